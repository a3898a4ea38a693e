"""Graphviz DOT export for trees and controllers.

Inner tree nodes render their test (``name<=v`` or ``name=v``) with edges
labeled true/false; controller graphs label nodes with their tree references
and draw skip descents dashed.  Output ordering is fixed, so exports are
byte-identical across runs.
"""

from __future__ import annotations

from .dtcontroller import DtFsc
from .dtree import DecisionTree, Leaf
from .fsc import Fsc, extract_tables
from .pomdp import Pomdp
from .skipfsc import SKIP, SkipFsc, extract_skip_tables


def _leaf_text(tree: DecisionTree, label: int, overrides) -> str:
    if overrides and label in overrides:
        return overrides[label]
    if 0 <= label < len(tree.label_names):
        return tree.label_names[label]
    return str(label)


def tree_to_dot(
    tree: DecisionTree, name: str = "tree", leaf_overrides: dict[int, str] | None = None
) -> str:
    lines = [f"digraph {name} {{"]
    for i, node in enumerate(tree.nodes):
        if isinstance(node, Leaf):
            text = _leaf_text(tree, node.label, leaf_overrides)
            lines.append(f'  n{i} [label="{text}", shape=box];')
        else:
            lines.append(f'  n{i} [label="{node.pred.render(tree.layout)}", shape=ellipse];')
    for i, node in enumerate(tree.nodes):
        if not isinstance(node, Leaf):
            lines.append(f'  n{i} -> n{node.true_child} [label="true"];')
            lines.append(f'  n{i} -> n{node.false_child} [label="false"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def action_leaf_overrides(dtfsc: DtFsc, action_names) -> dict[int, str]:
    """Expanded text for distribution labels in action trees."""
    base = len(action_names) + 1  # actions then the skip marker
    return {
        base + k: dist_label(dist, action_names)
        for k, dist in enumerate(dtfsc.action_dists)
    }


def dist_label(dist, action_names) -> str:
    """Randomized choices render as probability:action pairs, 3 decimals."""
    return ", ".join(f"{p:.3f}:{action_names[a]}" for a, p in dist)


def _controller_dot(name, num_nodes, init_node, edges, node_labels) -> str:
    lines = [f"digraph {name} {{"]
    for n in range(num_nodes):
        shape = "doublecircle" if n == init_node else "circle"
        lines.append(f'  n{n} [label="{node_labels(n)}", shape={shape}];')
    for n, m, label, dashed in edges:
        style = ', style=dashed' if dashed else ""
        lines.append(f'  n{n} -> n{m} [label="{label}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def fsc_to_dot(fsc: Fsc, model: Pomdp, name: str = "fsc") -> str:
    tables = extract_tables(fsc, model)
    edges = []
    for t in tables:
        targets = sorted({m for _, _, m in t.transition_rows})
        for m in targets:
            edges.append((t.node, m, f"t{t.node}", False))
    return _controller_dot(
        name, fsc.num_nodes, fsc.init_node, edges, lambda n: f"n{n}\\n[g{n}, t{n}]"
    )


def skip_fsc_to_dot(sf: SkipFsc, model: Pomdp, name: str = "skip_fsc") -> str:
    tables = extract_skip_tables(sf, model)
    skip_targets: dict[int, set[int]] = {}
    for (n, z), a in sf.gamma.items():
        if a == SKIP and (n, z, z) in sf.delta:
            skip_targets.setdefault(n, set()).add(sf.delta[(n, z, z)])
    edges = []
    for t in tables:
        targets = sorted({m for _, _, m in t.transition_rows})
        for m in targets:
            dashed = m in skip_targets.get(t.node, ())
            edges.append((t.node, m, f"t{t.node}", dashed))
    return _controller_dot(
        name, sf.num_nodes, sf.init_node, edges, lambda n: f"n{n}\\n[g{n}, t{n}]"
    )


def dtfsc_to_dot(dtfsc: DtFsc, name: str = "dtfsc") -> str:
    """Node graph whose edges follow the transition trees' leaf labels."""
    edges = []
    for n, tree in enumerate(dtfsc.transition_trees):
        if tree is None:
            continue
        targets = sorted(
            {node.label for node in tree.nodes if isinstance(node, Leaf)}
        )
        for m in targets:
            if 0 <= m < dtfsc.num_nodes:
                edges.append((n, m, f"t{n}", False))
    return _controller_dot(
        name, dtfsc.num_nodes, dtfsc.init_node, edges, lambda n: f"n{n}\\n[g{n}, t{n}]"
    )
