"""Canonical JSON formats for models, controllers, trees, and indices.

Every document carries a ``kind`` discriminator.  Serialization is canonical
(sorted keys, two-space indent, trailing newline) so saving a loaded document
reproduces it byte for byte.  Loaders validate before returning and report
violations with a JSON-path-like location.
"""

from __future__ import annotations

import json
import warnings
from pathlib import Path
from typing import Any

from .dtree import DecisionTree, FeatureSpec, Leaf, Predicate, Split
from .dtcontroller import DtFsc
from .errors import SchemaError
from .fsc import Fsc
from .pomdp import ModelError, Observation, Pomdp, make_dist, validate_pomdp
from .skipfsc import SKIP, IterationIndex, SkipFsc

KINDS = ("pomdp", "fsc", "skip-fsc", "dtfsc", "iteration-index")


def dumps(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def save(path: str | Path, payload: dict) -> None:
    Path(path).write_text(dumps(payload))


def _expect(cond: bool, where: str, message: str) -> None:
    if not cond:
        raise SchemaError(f"{where}: {message}")


def _obs(values: Any, where: str) -> Observation:
    _expect(isinstance(values, list), where, "expected an observation array")
    _expect(
        all(isinstance(v, int) and not isinstance(v, bool) for v in values),
        where,
        "observation values must be integers",
    )
    return tuple(values)


# -- features ---------------------------------------------------------------

def feature_to_dict(f: FeatureSpec) -> dict:
    if f.boolean:
        return {"kind": "bool", "name": f.name}
    return {"kind": "int", "name": f.name, "lo": f.lo, "hi": f.hi}


def feature_from_dict(d: Any, where: str) -> FeatureSpec:
    _expect(isinstance(d, dict), where, "expected a feature object")
    kind = d.get("kind")
    name = d.get("name")
    _expect(isinstance(name, str) and name != "", where, "feature needs a name")
    if kind == "bool":
        return FeatureSpec(name, 0, 1, boolean=True)
    if kind == "int":
        lo, hi = d.get("lo"), d.get("hi")
        _expect(isinstance(lo, int) and isinstance(hi, int), where, "int feature needs lo/hi")
        try:
            return FeatureSpec(name, lo, hi)
        except ModelError as exc:
            raise SchemaError(f"{where}: {exc}") from None
    raise SchemaError(f"{where}: unknown feature kind {kind!r}")


# -- pomdp ------------------------------------------------------------------

def pomdp_to_dict(model: Pomdp) -> dict:
    return {
        "kind": "pomdp",
        "name": model.name,
        "actions": list(model.actions),
        "features": [feature_to_dict(f) for f in model.features],
        "observations": [list(z) for z in model.observations],
        "transitions": [
            {
                model.actions[a]: [[t, p] for t, p in dist]
                for a, dist in sorted(entry.items())
            }
            for entry in model.transitions
        ],
        "init": model.init,
        "targets": sorted(model.targets),
    }


def pomdp_from_dict(doc: Any) -> Pomdp:
    _expect(isinstance(doc, dict), "$", "expected an object")
    _expect(doc.get("kind") == "pomdp", "kind", "expected 'pomdp'")
    actions = doc.get("actions")
    _expect(
        isinstance(actions, list) and actions and all(isinstance(a, str) for a in actions),
        "actions",
        "expected a non-empty array of action names",
    )
    _expect(len(set(actions)) == len(actions), "actions", "duplicate action names")
    features = [
        feature_from_dict(f, f"features[{i}]") for i, f in enumerate(doc.get("features", []))
    ]
    _expect(bool(features), "features", "expected at least one feature")
    raw_obs = doc.get("observations")
    _expect(isinstance(raw_obs, list) and raw_obs, "observations", "expected per-state array")
    observations = tuple(_obs(z, f"observations[{i}]") for i, z in enumerate(raw_obs))
    raw_trans = doc.get("transitions")
    _expect(
        isinstance(raw_trans, list) and len(raw_trans) == len(observations),
        "transitions",
        "expected one entry per state",
    )
    if "rewards" in doc:
        warnings.warn("reward structure is parsed but ignored", stacklevel=2)
    name_to_id = {a: i for i, a in enumerate(actions)}
    transitions = []
    for s, entry in enumerate(raw_trans):
        _expect(isinstance(entry, dict), f"transitions[{s}]", "expected an object")
        built = {}
        for aname, rows in entry.items():
            where = f"transitions[{s}].{aname}"
            _expect(aname in name_to_id, where, "unknown action")
            _expect(isinstance(rows, list) and rows, where, "expected a support array")
            pairs = []
            for j, row in enumerate(rows):
                _expect(
                    isinstance(row, list) and len(row) == 2 and isinstance(row[0], int),
                    f"{where}[{j}]",
                    "expected [state, probability]",
                )
                pairs.append((row[0], float(row[1])))
            try:
                built[name_to_id[aname]] = make_dist(pairs)
            except ModelError as exc:
                raise SchemaError(f"{where}: {exc}") from None
        transitions.append(built)
    init = doc.get("init")
    _expect(isinstance(init, int), "init", "expected a state id")
    targets = doc.get("targets")
    _expect(
        isinstance(targets, list) and all(isinstance(t, int) for t in targets),
        "targets",
        "expected an array of state ids",
    )
    model = Pomdp(
        actions=tuple(actions),
        features=tuple(features),
        observations=observations,
        transitions=tuple(transitions),
        init=init,
        targets=frozenset(targets),
        name=doc.get("name", ""),
    )
    try:
        validate_pomdp(model)
    except ModelError as exc:
        raise SchemaError(f"$: {exc}") from None
    return model


# -- fsc / skip-fsc ----------------------------------------------------------

def _controller_to_dict(kind: str, num_nodes, init_node, gamma, delta) -> dict:
    nodes = []
    for n in range(num_nodes):
        nodes.append(
            {
                "gamma": [
                    [list(z), a]
                    for (m, z), a in sorted(
                        gamma.items(), key=lambda kv: (kv[0][0], kv[0][1])
                    )
                    if m == n
                ],
                "delta": [
                    [list(z), list(z2), t]
                    for (m, z, z2), t in sorted(
                        delta.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2])
                    )
                    if m == n
                ],
            }
        )
    return {"kind": kind, "num_nodes": num_nodes, "init_node": init_node, "nodes": nodes}


def fsc_to_dict(fsc: Fsc) -> dict:
    return _controller_to_dict("fsc", fsc.num_nodes, fsc.init_node, fsc.gamma, fsc.delta)


def skip_fsc_to_dict(sf: SkipFsc) -> dict:
    return _controller_to_dict("skip-fsc", sf.num_nodes, sf.init_node, sf.gamma, sf.delta)


def _controller_from_dict(doc: Any, kind: str):
    _expect(isinstance(doc, dict), "$", "expected an object")
    _expect(doc.get("kind") == kind, "kind", f"expected '{kind}'")
    num_nodes = doc.get("num_nodes")
    init_node = doc.get("init_node")
    _expect(isinstance(num_nodes, int) and num_nodes > 0, "num_nodes", "expected a count")
    _expect(isinstance(init_node, int), "init_node", "expected a node id")
    _expect(
        0 <= init_node < num_nodes, "init_node", f"node id {init_node} >= num_nodes"
    )
    raw_nodes = doc.get("nodes")
    _expect(
        isinstance(raw_nodes, list) and len(raw_nodes) == num_nodes,
        "nodes",
        "expected one entry per node",
    )
    gamma: dict = {}
    delta: dict = {}
    for n, entry in enumerate(raw_nodes):
        _expect(isinstance(entry, dict), f"nodes[{n}]", "expected an object")
        for j, row in enumerate(entry.get("gamma", [])):
            where = f"nodes[{n}].gamma[{j}]"
            _expect(isinstance(row, list) and len(row) == 2, where, "expected [obs, action]")
            z = _obs(row[0], where)
            a = row[1]
            if a == SKIP:
                _expect(kind == "skip-fsc", where, "skip labels need a skip-fsc")
            else:
                _expect(isinstance(a, int) and a >= 0, where, "expected an action id")
            gamma[(n, z)] = a
        for j, row in enumerate(entry.get("delta", [])):
            where = f"nodes[{n}].delta[{j}]"
            _expect(isinstance(row, list) and len(row) == 3, where, "expected [obs, obs', node]")
            z = _obs(row[0], where)
            z2 = _obs(row[1], where)
            t = row[2]
            _expect(isinstance(t, int), where, "expected a node id")
            _expect(0 <= t < num_nodes, where, f"node id {t} >= num_nodes")
            delta[(n, z, z2)] = t
    return num_nodes, init_node, gamma, delta


def fsc_from_dict(doc: Any) -> Fsc:
    num_nodes, init_node, gamma, delta = _controller_from_dict(doc, "fsc")
    try:
        return Fsc(num_nodes, init_node, gamma, delta)
    except ModelError as exc:
        raise SchemaError(f"$: {exc}") from None


def skip_fsc_from_dict(doc: Any) -> SkipFsc:
    num_nodes, init_node, gamma, delta = _controller_from_dict(doc, "skip-fsc")
    try:
        return SkipFsc(num_nodes, init_node, gamma, delta)
    except ModelError as exc:
        raise SchemaError(f"$: {exc}") from None


# -- decision trees / dtfsc ---------------------------------------------------

def tree_to_dict(tree: DecisionTree) -> dict:
    nodes = []
    for node in tree.nodes:
        if isinstance(node, Leaf):
            nodes.append({"label": node.label})
        else:
            nodes.append(
                {
                    "feature": node.pred.feature,
                    "op": node.pred.op,
                    "value": node.pred.value,
                    "false": node.false_child,
                    "true": node.true_child,
                }
            )
    return {
        "layout": [feature_to_dict(f) for f in tree.layout],
        "nodes": nodes,
        "root": tree.root,
        "labels": list(tree.label_names),
    }


def tree_from_dict(doc: Any, where: str) -> DecisionTree:
    _expect(isinstance(doc, dict), where, "expected a tree object")
    layout = tuple(
        feature_from_dict(f, f"{where}.layout[{i}]")
        for i, f in enumerate(doc.get("layout", []))
    )
    labels = doc.get("labels")
    _expect(
        isinstance(labels, list) and all(isinstance(x, str) for x in labels),
        f"{where}.labels",
        "expected an array of label names",
    )
    raw_nodes = doc.get("nodes")
    _expect(isinstance(raw_nodes, list) and raw_nodes, f"{where}.nodes", "expected nodes")
    nodes: list[Leaf | Split] = []
    for i, nd in enumerate(raw_nodes):
        loc = f"{where}.nodes[{i}]"
        _expect(isinstance(nd, dict), loc, "expected a node object")
        if "label" in nd:
            _expect(isinstance(nd["label"], int), loc, "expected an integer label")
            nodes.append(Leaf(nd["label"]))
        else:
            for key in ("feature", "value", "false", "true"):
                _expect(isinstance(nd.get(key), int), loc, f"missing {key}")
            _expect(nd.get("op") in ("eq", "le"), loc, "op must be eq or le")
            _expect(
                0 <= nd["false"] < len(raw_nodes) and 0 <= nd["true"] < len(raw_nodes),
                loc,
                "child index out of range",
            )
            nodes.append(
                Split(Predicate(nd["feature"], nd["op"], nd["value"]), nd["false"], nd["true"])
            )
    root = doc.get("root")
    _expect(isinstance(root, int) and 0 <= root < len(nodes), f"{where}.root", "bad root")
    return DecisionTree(layout, tuple(nodes), root, tuple(labels))


def dtfsc_to_dict(dtfsc: DtFsc) -> dict:
    return {
        "kind": "dtfsc",
        "num_nodes": dtfsc.num_nodes,
        "init_node": dtfsc.init_node,
        "action_dists": [[[a, p] for a, p in dist] for dist in dtfsc.action_dists],
        "nodes": [
            {
                "action_tree": tree_to_dict(at) if at is not None else None,
                "transition_tree": tree_to_dict(tt) if tt is not None else None,
            }
            for at, tt in zip(dtfsc.action_trees, dtfsc.transition_trees)
        ],
    }


def dtfsc_from_dict(doc: Any) -> DtFsc:
    _expect(isinstance(doc, dict), "$", "expected an object")
    _expect(doc.get("kind") == "dtfsc", "kind", "expected 'dtfsc'")
    num_nodes = doc.get("num_nodes")
    init_node = doc.get("init_node")
    _expect(isinstance(num_nodes, int) and num_nodes > 0, "num_nodes", "expected a count")
    _expect(
        isinstance(init_node, int) and 0 <= init_node < num_nodes,
        "init_node",
        "expected a valid node id",
    )
    raw_nodes = doc.get("nodes")
    _expect(
        isinstance(raw_nodes, list) and len(raw_nodes) == num_nodes,
        "nodes",
        "expected one entry per node",
    )
    action_trees = []
    transition_trees = []
    for n, entry in enumerate(raw_nodes):
        _expect(isinstance(entry, dict), f"nodes[{n}]", "expected an object")
        at = entry.get("action_tree")
        tt = entry.get("transition_tree")
        action_trees.append(None if at is None else tree_from_dict(at, f"nodes[{n}].action_tree"))
        transition_trees.append(
            None if tt is None else tree_from_dict(tt, f"nodes[{n}].transition_tree")
        )
    dists = []
    for i, rows in enumerate(doc.get("action_dists", [])):
        where = f"action_dists[{i}]"
        _expect(isinstance(rows, list) and rows, where, "expected a support array")
        try:
            dists.append(make_dist((int(a), float(p)) for a, p in rows))
        except (ModelError, TypeError, ValueError) as exc:
            raise SchemaError(f"{where}: {exc}") from None
    return DtFsc(
        num_nodes,
        init_node,
        tuple(action_trees),
        tuple(transition_trees),
        tuple(dists),
    )


# -- iteration index ----------------------------------------------------------

def index_to_dict(idx: IterationIndex) -> dict:
    return {
        "kind": "iteration-index",
        "entries": [[list(z), i] for z, i in sorted(idx.entries.items())],
    }


def index_from_dict(doc: Any) -> IterationIndex:
    _expect(isinstance(doc, dict), "$", "expected an object")
    _expect(doc.get("kind") == "iteration-index", "kind", "expected 'iteration-index'")
    entries = {}
    raw = doc.get("entries")
    _expect(isinstance(raw, list), "entries", "expected an array")
    for j, row in enumerate(raw):
        where = f"entries[{j}]"
        _expect(isinstance(row, list) and len(row) == 2, where, "expected [obs, iteration]")
        z = _obs(row[0], where)
        _expect(isinstance(row[1], int) and row[1] >= 0, where, "expected an iteration")
        entries[z] = row[1]
    return IterationIndex(entries)


# -- dispatch ----------------------------------------------------------------

_TO_DICT = {
    Pomdp: pomdp_to_dict,
    Fsc: fsc_to_dict,
    SkipFsc: skip_fsc_to_dict,
    DtFsc: dtfsc_to_dict,
    IterationIndex: index_to_dict,
}

_FROM_DICT = {
    "pomdp": pomdp_from_dict,
    "fsc": fsc_from_dict,
    "skip-fsc": skip_fsc_from_dict,
    "dtfsc": dtfsc_from_dict,
    "iteration-index": index_from_dict,
}


def to_dict(obj) -> dict:
    return _TO_DICT[type(obj)](obj)


def save_object(path: str | Path, obj) -> None:
    save(path, to_dict(obj))


def load_object(path: str | Path):
    """Load any document, dispatching on its ``kind`` field."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"$: not valid JSON ({exc})") from None
    if not isinstance(doc, dict) or doc.get("kind") not in _FROM_DICT:
        raise SchemaError(f"kind: expected one of {', '.join(KINDS)}")
    return _FROM_DICT[doc["kind"]](doc)


def load_typed(path: str | Path, kind: str):
    obj = load_object(path)
    expected = {
        "pomdp": Pomdp,
        "fsc": Fsc,
        "skip-fsc": SkipFsc,
        "dtfsc": DtFsc,
        "iteration-index": IterationIndex,
    }[kind]
    if not isinstance(obj, expected):
        raise SchemaError(f"kind: expected '{kind}', found another document")
    return obj
