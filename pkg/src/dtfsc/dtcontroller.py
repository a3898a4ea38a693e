"""Tree-backed controllers: each node carries an action tree over the current
observation and a transition tree over the (current, next) observation pair.

Action-tree labels share one id space: ids below the model's action count are
plain actions, the next id is the ``skip`` marker used by skip controllers,
and any further ids reference entries of ``action_dists`` (randomized choices
from controllers produced by quantitative tools).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .dtree import Dataset, DecisionTree, evaluate, learn, primed_layout
from .errors import ModelError, UndefinedGammaError
from .fsc import Fsc, NodeTables, StepOutcome, extract_tables, sample
from .pomdp import Observation, Pomdp

SKIP = "skip"


def action_label_names(model: Pomdp, num_dists: int = 0) -> tuple[str, ...]:
    names = list(model.actions) + [SKIP]
    names += [f"d{i}" for i in range(num_dists)]
    return tuple(names)


def skip_label_id(model: Pomdp) -> int:
    return len(model.actions)


@dataclass(frozen=True)
class DtFsc:
    num_nodes: int
    init_node: int
    action_trees: tuple[DecisionTree | None, ...]
    transition_trees: tuple[DecisionTree | None, ...]
    # distribution id -> ((action id, probability), ...)
    action_dists: tuple[tuple[tuple[int, float], ...], ...] = ()

    def __post_init__(self):
        if not (0 <= self.init_node < self.num_nodes):
            raise ModelError(f"initial node {self.init_node} out of range")
        if len(self.action_trees) != self.num_nodes:
            raise ModelError("one action tree required per node")
        if len(self.transition_trees) != self.num_nodes:
            raise ModelError("one transition tree required per node")


def node_label_names(num_nodes: int) -> tuple[str, ...]:
    return tuple(f"n{i}" for i in range(num_nodes))


def datasets_for_node(
    model: Pomdp, tables: NodeTables, num_nodes: int
) -> tuple[Dataset, Dataset]:
    """Action and transition datasets for one node's tables."""
    skip_id = skip_label_id(model)
    action_rows = tuple(
        (z, skip_id if a == SKIP else a) for z, a in tables.action_rows
    )
    action_ds = Dataset(tuple(model.features), action_rows, action_label_names(model))
    trans_rows = tuple((z + z2, m) for z, z2, m in tables.transition_rows)
    trans_ds = Dataset(
        primed_layout(model.features), trans_rows, node_label_names(num_nodes)
    )
    return action_ds, trans_ds


def build_from_tables(
    tables: Sequence[NodeTables],
    model: Pomdp,
    num_nodes: int,
    init_node: int,
    impurity: str = "entropy",
    jobs: int = 1,
) -> DtFsc:
    """Learn one tree pair per tabulated node; nodes without tables stay empty."""
    pairs: dict[int, tuple[DecisionTree, DecisionTree]] = {}

    def learn_node(t: NodeTables):
        action_ds, trans_ds = datasets_for_node(model, t, num_nodes)
        return t.node, (learn(action_ds, impurity), learn(trans_ds, impurity))

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for node, pair in pool.map(learn_node, tables):
                pairs[node] = pair
    else:
        for t in tables:
            node, pair = learn_node(t)
            pairs[node] = pair

    action_trees = tuple(
        pairs[n][0] if n in pairs else None for n in range(num_nodes)
    )
    transition_trees = tuple(
        pairs[n][1] if n in pairs else None for n in range(num_nodes)
    )
    return DtFsc(num_nodes, init_node, action_trees, transition_trees)


def build_dtfsc(
    fsc: Fsc, model: Pomdp, impurity: str = "entropy", jobs: int = 1
) -> DtFsc:
    tables = extract_tables(fsc, model)
    return build_from_tables(
        tables, model, fsc.num_nodes, fsc.init_node, impurity, jobs
    )


def resolve_action(
    dtfsc: DtFsc, model: Pomdp, label: int, rng: random.Random | None
) -> int:
    """Map an action-tree label to a concrete action id."""
    num_actions = len(model.actions)
    if label < num_actions:
        return label
    if label == num_actions:
        raise ModelError("skip label outside a skip controller step")
    dist = dtfsc.action_dists[label - num_actions - 1]
    if rng is None:
        raise ValueError("a sampling source is required for distribution labels")
    return sample(dist, rng)


def dtfsc_step(
    dtfsc: DtFsc,
    model: Pomdp,
    node: int,
    state: int,
    *,
    rng: random.Random | None = None,
    successor: int | None = None,
) -> StepOutcome:
    z = model.obs(state)
    action_tree = dtfsc.action_trees[node]
    trans_tree = dtfsc.transition_trees[node]
    if action_tree is None or trans_tree is None:
        raise UndefinedGammaError(node, z)
    action = resolve_action(dtfsc, model, evaluate(action_tree, z), rng)
    dist = model.transitions[state].get(action)
    if dist is None:
        raise ModelError(f"action {action} not enabled in state {state}")
    if successor is None:
        if rng is None:
            raise ValueError("provide either rng or an explicit successor")
        next_state = sample(dist, rng)
    else:
        if successor not in {t for t, _ in dist}:
            raise ModelError(
                f"state {successor} not in the support of trans({state}, {action})"
            )
        next_state = successor
    z2 = model.obs(next_state)
    next_node = evaluate(trans_tree, z + z2)
    return StepOutcome(action, next_node, next_state, z2)


@dataclass(frozen=True)
class FaithfulnessCounterexample:
    node: int
    kind: str  # "action" or "transition"
    row_input: Observation
    table_label: int | str
    tree_label: int | str


def check_faithful(
    tables: Sequence[NodeTables], dtfsc: DtFsc, model: Pomdp
) -> FaithfulnessCounterexample | None:
    """Replay every table row through the trees; None means exact agreement.

    Inputs never realizable at a node are absent from the tables, so trees are
    free to generalize there.
    """
    skip_id = skip_label_id(model)
    for t in tables:
        action_tree = dtfsc.action_trees[t.node]
        trans_tree = dtfsc.transition_trees[t.node]
        for z, a in t.action_rows:
            expected = skip_id if a == SKIP else a
            got = evaluate(action_tree, z)
            if got != expected:
                return FaithfulnessCounterexample(t.node, "action", z, a, got)
        for z, z2, m in t.transition_rows:
            got = evaluate(trans_tree, z + z2)
            if got != m:
                return FaithfulnessCounterexample(t.node, "transition", z + z2, m, got)
    return None
