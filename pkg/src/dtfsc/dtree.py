"""Decision-tree induction over factored observation vectors.

Greedy top-down construction with information gain, recursing until every
leaf is pure, so a learned tree replays its training rows exactly.  Split
candidates are equality tests on observed values for small domains and
less-or-equal thresholds between consecutive observed values for larger
integer domains.  Ties break on lowest feature index, then smallest test
value, then equality before threshold, making learning fully deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DatasetError
from .pomdp import FeatureSpec, Observation

#: domains up to this size split with equality tests only
EQ_DOMAIN_LIMIT = 8


@dataclass(frozen=True)
class Predicate:
    feature: int
    op: str  # "eq" or "le"
    value: int

    def holds(self, x: Sequence[int]) -> bool:
        v = x[self.feature]
        return v == self.value if self.op == "eq" else v <= self.value

    def render(self, layout: Sequence[FeatureSpec]) -> str:
        name = layout[self.feature].name
        return f"{name}={self.value}" if self.op == "eq" else f"{name}<={self.value}"


@dataclass(frozen=True)
class Leaf:
    label: int


@dataclass(frozen=True)
class Split:
    pred: Predicate
    false_child: int
    true_child: int


@dataclass(frozen=True)
class DecisionTree:
    layout: tuple[FeatureSpec, ...]
    nodes: tuple[Leaf | Split, ...]
    root: int
    label_names: tuple[str, ...]


@dataclass(frozen=True)
class Dataset:
    """Rows of (feature vector, label id) plus display names for the labels.

    Rows must be functional: the same vector may not carry two labels.
    """

    layout: tuple[FeatureSpec, ...]
    rows: tuple[tuple[Observation, int], ...]
    label_names: tuple[str, ...]

    def validate(self) -> None:
        if not self.rows:
            raise DatasetError("dataset is empty")
        seen: dict[Observation, int] = {}
        for vec, label in self.rows:
            if len(vec) != len(self.layout):
                raise DatasetError(f"row {vec} does not match the feature layout")
            for f, v in zip(self.layout, vec):
                if not f.contains(v):
                    raise DatasetError(
                        f"row {vec}: value {v} outside domain of feature {f.name}"
                    )
            if vec in seen and seen[vec] != label:
                raise DatasetError(
                    f"contradictory rows: {vec} labeled both {seen[vec]} and {label}"
                )
            seen[vec] = label


def _entropy(counts: dict[int, int], total: int) -> float:
    h = 0.0
    for c in counts.values():
        p = c / total
        h -= p * math.log2(p)
    return h


def _gini(counts: dict[int, int], total: int) -> float:
    return 1.0 - sum((c / total) ** 2 for c in counts.values())


_IMPURITY = {"entropy": _entropy, "gini": _gini}


def _candidates(layout, rows):
    for i, feat in enumerate(layout):
        observed = sorted({vec[i] for vec, _ in rows})
        if len(observed) < 2:
            continue  # would produce an empty child
        if feat.size <= EQ_DOMAIN_LIMIT:
            for v in observed:
                yield Predicate(i, "eq", v)
        else:
            for v in observed[:-1]:
                yield Predicate(i, "le", v)


def _best_split(layout, rows, impurity):
    measure = _IMPURITY[impurity]
    counts: dict[int, int] = {}
    for _, label in rows:
        counts[label] = counts.get(label, 0) + 1
    base = measure(counts, len(rows))
    best = None
    best_key = None
    for pred in _candidates(layout, rows):
        true_rows = [r for r in rows if pred.holds(r[0])]
        false_rows = [r for r in rows if not pred.holds(r[0])]
        if not true_rows or not false_rows:
            continue
        gain = base
        for part in (false_rows, true_rows):
            part_counts: dict[int, int] = {}
            for _, label in part:
                part_counts[label] = part_counts.get(label, 0) + 1
            gain -= len(part) / len(rows) * measure(part_counts, len(part))
        key = (-gain, pred.feature, pred.value, 0 if pred.op == "eq" else 1)
        if best_key is None or key < best_key:
            best_key = key
            best = (pred, false_rows, true_rows)
    return best


def learn(ds: Dataset, impurity: str = "entropy") -> DecisionTree:
    """Grow a tree with zero training error on the dataset."""
    ds.validate()
    if impurity not in _IMPURITY:
        raise ValueError(f"unknown impurity {impurity!r}")
    nodes: list[Leaf | Split] = []

    def grow(rows) -> int:
        labels = {label for _, label in rows}
        if len(labels) == 1:
            nodes.append(Leaf(labels.pop()))
            return len(nodes) - 1
        split = _best_split(ds.layout, rows, impurity)
        if split is None:  # unreachable for functional data, kept as a guard
            raise DatasetError("no split separates an impure row set")
        pred, false_rows, true_rows = split
        index = len(nodes)
        nodes.append(Leaf(-1))  # placeholder, replaced below
        false_child = grow(false_rows)
        true_child = grow(true_rows)
        nodes[index] = Split(pred, false_child, true_child)
        return index

    root = grow(list(ds.rows))
    return DecisionTree(ds.layout, tuple(nodes), root, ds.label_names)


def evaluate(tree: DecisionTree, x: Sequence[int]) -> int:
    if len(x) != len(tree.layout):
        raise DatasetError(f"input {tuple(x)} does not match the feature layout")
    for f, v in zip(tree.layout, x):
        if not f.contains(v):
            raise DatasetError(f"value {v} outside domain of feature {f.name}")
    node = tree.nodes[tree.root]
    while isinstance(node, Split):
        node = tree.nodes[node.true_child if node.pred.holds(x) else node.false_child]
    return node.label


def tree_size(tree: DecisionTree) -> int:
    return len(tree.nodes)


def tested_features(tree: DecisionTree) -> frozenset[int]:
    return frozenset(
        n.pred.feature for n in tree.nodes if isinstance(n, Split)
    )


def primed_layout(features: Sequence[FeatureSpec]) -> tuple[FeatureSpec, ...]:
    """Current-observation features followed by primed next-observation copies."""
    primed = [
        FeatureSpec(f.name + "'", f.lo, f.hi, boolean=f.boolean) for f in features
    ]
    return tuple(features) + tuple(primed)
