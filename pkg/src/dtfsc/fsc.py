"""Posterior-aware finite-state controllers and their tabular views.

A controller node pairs an action map gamma(node, z) with a transition map
delta(node, z, z') read on the current and next observation.  Both maps are
partial; what must be defined is governed by closure against a concrete
model: wherever a (node, z) pair is reachable and gamma acts, delta must
cover every observation pair the model can realize under that action.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import (
    ClosureError,
    ModelError,
    UndefinedDeltaError,
    UndefinedGammaError,
)
from .pomdp import (
    Dist,
    InducedChain,
    Observation,
    Pomdp,
    almost_sure_reach,
    enabled_actions,
)


@dataclass(frozen=True)
class Fsc:
    num_nodes: int
    init_node: int
    gamma: Mapping[tuple[int, Observation], int]
    delta: Mapping[tuple[int, Observation, Observation], int]

    def __post_init__(self):
        if not (0 <= self.init_node < self.num_nodes):
            raise ModelError(f"initial node {self.init_node} out of range")
        for (n, _z), a in self.gamma.items():
            if not (0 <= n < self.num_nodes):
                raise ModelError(f"gamma mentions node {n} out of range")
            if a < 0:
                raise ModelError(f"gamma maps to invalid action id {a}")
        for (n, _z, _z2), m in self.delta.items():
            if not (0 <= n < self.num_nodes) or not (0 <= m < self.num_nodes):
                raise ModelError(f"delta entry ({n} -> {m}) out of node range")


def validate_enabledness(fsc: Fsc, model: Pomdp) -> None:
    """Every gamma action must be enabled for its observation."""
    for (n, z), a in fsc.gamma.items():
        if a not in enabled_actions(model, z):
            raise ModelError(
                f"gamma at node {n} picks action {a} not enabled for observation {z}"
            )


@dataclass(frozen=True)
class StepOutcome:
    action: int
    node: int
    state: int
    observation: Observation


def sample(dist: Dist, rng: random.Random) -> int:
    x = rng.random()
    acc = 0.0
    for state, prob in dist:
        acc += prob
        if x < acc:
            return state
    return dist[-1][0]


def fsc_step(
    fsc: Fsc,
    model: Pomdp,
    node: int,
    state: int,
    *,
    rng: random.Random | None = None,
    successor: int | None = None,
) -> StepOutcome:
    """One execution step: act on gamma, observe, move on delta.

    The successor is drawn from the model unless injected explicitly; with an
    injected successor the step is a pure function of (node, state, successor).
    """
    z = model.obs(state)
    try:
        action = fsc.gamma[(node, z)]
    except KeyError:
        raise UndefinedGammaError(node, z) from None
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
    try:
        next_node = fsc.delta[(node, z, z2)]
    except KeyError:
        raise UndefinedDeltaError(node, z, z2) from None
    return StepOutcome(action, next_node, next_state, z2)


def _walk(fsc: Fsc, model: Pomdp, strict: bool):
    """BFS over (node, observation) pairs from the initial pair.

    Returns (visited pairs in discovery order, realizable transition triples).
    In strict mode a realizable pair without a delta entry raises ClosureError;
    otherwise that branch is simply not followed.
    """
    start = (fsc.init_node, model.obs(model.init))
    visited: list[tuple[int, Observation]] = [start]
    seen = {start}
    triples: list[tuple[int, Observation, Observation]] = []
    queue = [start]
    while queue:
        n, z = queue.pop(0)
        action = fsc.gamma.get((n, z))
        if action is None:
            continue
        posteriors = sorted(
            {
                model.obs(t)
                for s in model.states_with_obs(z)
                for t, _ in model.transitions[s].get(action, ())
            }
        )
        for z2 in posteriors:
            triples.append((n, z, z2))
            m = fsc.delta.get((n, z, z2))
            if m is None:
                if strict:
                    raise ClosureError(n, z, z2)
                continue
            if (m, z2) not in seen:
                seen.add((m, z2))
                visited.append((m, z2))
                queue.append((m, z2))
    return visited, triples


def reachable_nodes(fsc: Fsc, model: Pomdp) -> frozenset[int]:
    visited, _ = _walk(fsc, model, strict=False)
    return frozenset(n for n, _ in visited)


def check_closure(fsc: Fsc, model: Pomdp) -> None:
    """Raise ClosureError with a witness triple if the controller is not closed."""
    _walk(fsc, model, strict=True)


@dataclass(frozen=True)
class NodeTables:
    """Tabular view of one controller node.

    Action rows are exactly the defined gamma entries of the node; transition
    rows are the delta entries restricted to observation pairs the model can
    realize at reachable (node, observation) pairs.  Rows are sorted
    lexicographically so row counts and serializations are reproducible.
    """

    node: int
    action_rows: tuple[tuple[Observation, int | str], ...]
    transition_rows: tuple[tuple[Observation, Observation, int], ...]


def extract_tables(fsc: Fsc, model: Pomdp) -> list[NodeTables]:
    visited, triples = _walk(fsc, model, strict=True)
    nodes = sorted({n for n, _ in visited})
    tables = []
    for n in nodes:
        action_rows = tuple(
            sorted((z, a) for (m, z), a in fsc.gamma.items() if m == n)
        )
        transition_rows = tuple(
            sorted((z, z2, fsc.delta[(m, z, z2)]) for m, z, z2 in triples if m == n)
        )
        tables.append(NodeTables(n, action_rows, transition_rows))
    return tables


def from_tables(tables: Iterable[NodeTables], num_nodes: int, init_node: int) -> Fsc:
    """Rebuild a controller from tabular form (inverse of extract_tables
    up to entries that extraction dropped as unrealizable)."""
    gamma = {}
    delta = {}
    for t in tables:
        for z, a in t.action_rows:
            gamma[(t.node, z)] = a
        for z, z2, m in t.transition_rows:
            delta[(t.node, z, z2)] = m
    return Fsc(num_nodes, init_node, gamma, delta)


def product_chain(
    fsc: Fsc, model: Pomdp
) -> tuple[InducedChain, int, frozenset[int]]:
    """Markov chain over reachable (node, state) pairs under the controller.

    Target states are absorbing.  Returns (chain, start index, goal indices).
    """
    start = (fsc.init_node, model.init)
    index = {start: 0}
    order = [start]
    succ: list[Dist] = []
    queue = [start]
    while queue:
        n, s = queue.pop(0)
        i = index[(n, s)]
        while len(succ) <= i:
            succ.append(())
        if s in model.targets:
            succ[i] = ((i, 1.0),)
            continue
        z = model.obs(s)
        action = fsc.gamma.get((n, z))
        if action is None:
            raise UndefinedGammaError(n, z)
        dist = model.transitions[s].get(action)
        if dist is None:
            raise ModelError(f"action {action} not enabled in state {s}")
        entries = []
        for t, p in dist:
            z2 = model.obs(t)
            m = fsc.delta.get((n, z, z2))
            if m is None:
                raise UndefinedDeltaError(n, z, z2)
            key = (m, t)
            if key not in index:
                index[key] = len(order)
                order.append(key)
                queue.append(key)
            entries.append((index[key], p))
        merged: dict[int, float] = {}
        for j, p in entries:
            merged[j] = merged.get(j, 0.0) + p
        succ[i] = tuple(sorted(merged.items()))
    goals = frozenset(i for (n, s), i in index.items() if s in model.targets)
    chain = InducedChain(tuple(succ))
    return chain, 0, goals


def controller_wins(fsc: Fsc, model: Pomdp) -> bool:
    """Almost-sure reachability of the targets from the initial configuration."""
    chain, start, goals = product_chain(fsc, model)
    if not goals:
        return False
    return almost_sure_reach(chain, goals, start)
