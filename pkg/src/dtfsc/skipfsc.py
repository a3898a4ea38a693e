"""Skip controllers: layered controllers whose action labels may defer.

A node reading the ``skip`` marker on its current observation descends one
node (node ids are ordered by creation, so descent strictly decreases) and
retries, reaching the node that originally claimed that observation before
any real action is taken.  Conversion from a layered controller rewrites
every cross-layer jump into such single-step descents; an executable product
check certifies that conversion preserved the policy.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping

from .errors import (
    ChainViolationError,
    ModelError,
    UndefinedDeltaError,
    UndefinedGammaError,
)
from .fsc import Fsc, NodeTables, StepOutcome, sample
from .pomdp import Observation, Pomdp

SKIP = "skip"


@dataclass(frozen=True)
class SkipFsc:
    num_nodes: int
    init_node: int
    gamma: Mapping[tuple[int, Observation], int | str]
    delta: Mapping[tuple[int, Observation, Observation], int]

    def __post_init__(self):
        if not (0 <= self.init_node < self.num_nodes):
            raise ModelError(f"initial node {self.init_node} out of range")
        for (n, z), a in self.gamma.items():
            if not (0 <= n < self.num_nodes):
                raise ModelError(f"gamma mentions node {n} out of range")
            if a == SKIP:
                m = self.delta.get((n, z, z))
                if m is None:
                    raise ModelError(
                        f"skip at node {n}, observation {z} has no descent entry"
                    )
                if m >= n:
                    raise ModelError(
                        f"skip at node {n}, observation {z} does not descend (-> {m})"
                    )
            elif not isinstance(a, int) or a < 0:
                raise ModelError(f"gamma maps to invalid action label {a!r}")
        for (n, _z, _z2), m in self.delta.items():
            if not (0 <= n < self.num_nodes) or not (0 <= m < self.num_nodes):
                raise ModelError(f"delta entry ({n} -> {m}) out of node range")


@dataclass(frozen=True)
class IterationIndex:
    """Maps each observation won during synthesis to its winning iteration."""

    entries: Mapping[Observation, int]

    def __iter__(self):
        return iter(sorted(self.entries))

    def __getitem__(self, z: Observation) -> int:
        return self.entries[z]

    def __len__(self):
        return len(self.entries)

    def __contains__(self, z: Observation) -> bool:
        return z in self.entries


def verify_chain_structure(fsc: Fsc, idx: IterationIndex, model: Pomdp) -> None:
    """Check the layered-jump property the conversion relies on.

    For every indexed observation z and node j above its winning iteration,
    the posterior-z transition from j must jump straight to that iteration's
    node, whatever the current observation.
    """
    observations = model.obs_values()
    for z in idx:
        i = idx[z]
        if not (0 <= i < fsc.num_nodes):
            raise ChainViolationError(f"iteration index {i} for {z} out of range")
        for j in range(i + 1, fsc.num_nodes):
            for z_cur in observations:
                target = fsc.delta.get((j, z_cur, z))
                if target != i:
                    raise ChainViolationError(
                        f"node {j}, current observation {z_cur}: posterior {z} "
                        f"maps to {target}, expected node {i}"
                    )


def to_skip_fsc(fsc: Fsc, idx: IterationIndex, model: Pomdp) -> SkipFsc:
    """Rewrite cross-layer jumps as chains of single-step descents.

    For each indexed observation z' won at iteration i and node k > i, the
    posterior-z' jump from k lands one node down, and seeing z' as the current
    observation at k defers via ``skip``.  A real action already defined at
    (k, z') would be destroyed by that marker, which the layered structure
    rules out; it is reported rather than silently overwritten.
    """
    verify_chain_structure(fsc, idx, model)
    observations = model.obs_values()
    gamma: dict[tuple[int, Observation], int | str] = dict(fsc.gamma)
    delta: dict[tuple[int, Observation, Observation], int] = dict(fsc.delta)
    for z_prime in idx:
        i = idx[z_prime]
        for k in range(i + 1, fsc.num_nodes):
            existing = fsc.gamma.get((k, z_prime))
            if existing is not None:
                raise ChainViolationError(
                    f"cannot mark node {k}, observation {z_prime} as skip: "
                    f"a real action {existing} is defined there"
                )
            gamma[(k, z_prime)] = SKIP
            for z_cur in observations:
                delta[(k, z_cur, z_prime)] = k - 1
    return SkipFsc(fsc.num_nodes, fsc.init_node, gamma, delta)


def resolve_skips(
    sf: SkipFsc, node: int, z: Observation
) -> tuple[int, list[int]]:
    """Follow skip descents for the current observation until a real label.

    Returns the acting node and the strictly intermediate nodes passed on the
    way (the final acting node is excluded).  Termination is structural: each
    descent strictly decreases the node id.
    """
    entered: list[int] = []
    n = node
    while sf.gamma.get((n, z)) == SKIP:
        m = sf.delta.get((n, z, z))
        if m is None:
            raise UndefinedDeltaError(n, z, z)
        if m >= n:
            raise ModelError(f"skip descent does not decrease: {n} -> {m}")
        entered.append(m)
        n = m
    return n, entered[:-1] if entered else []


def skip_step(
    sf: SkipFsc,
    model: Pomdp,
    node: int,
    state: int,
    *,
    rng: random.Random | None = None,
    successor: int | None = None,
) -> tuple[StepOutcome, list[int]]:
    """One step with skip resolution; also returns the skipped-through nodes."""
    z = model.obs(state)
    acting, trace = resolve_skips(sf, node, z)
    action = sf.gamma.get((acting, z))
    if action is None:
        raise UndefinedGammaError(acting, z)
    assert isinstance(action, int)
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
    next_node = sf.delta.get((acting, z, z2))
    if next_node is None:
        raise UndefinedDeltaError(acting, z, z2)
    return StepOutcome(action, next_node, next_state, z2), trace


def _skip_walk(sf: SkipFsc, model: Pomdp):
    """BFS over (node, observation) pairs with skip resolution.

    Skip rows visited during resolution count as reached, so extraction keeps
    the (z, z) descent rows execution actually consults.
    """
    start = (sf.init_node, model.obs(model.init))
    seen = {start}
    order = [start]
    action_pairs: set[tuple[int, Observation]] = set()
    triples: set[tuple[int, Observation, Observation]] = set()
    queue = [start]
    while queue:
        n, z = queue.pop(0)
        label = sf.gamma.get((n, z))
        if label is None:
            continue
        if label == SKIP:
            action_pairs.add((n, z))
            triples.add((n, z, z))
            m = sf.delta[(n, z, z)]
            if (m, z) not in seen:
                seen.add((m, z))
                order.append((m, z))
                queue.append((m, z))
            continue
        action_pairs.add((n, z))
        posteriors = sorted(
            {
                model.obs(t)
                for s in model.states_with_obs(z)
                for t, _ in model.transitions[s].get(label, ())
            }
        )
        for z2 in posteriors:
            triples.add((n, z, z2))
            m = sf.delta.get((n, z, z2))
            if m is None:
                raise UndefinedDeltaError(n, z, z2)
            if (m, z2) not in seen:
                seen.add((m, z2))
                order.append((m, z2))
                queue.append((m, z2))
    return order, action_pairs, triples


def skip_reachable_nodes(sf: SkipFsc, model: Pomdp) -> frozenset[int]:
    order, _, _ = _skip_walk(sf, model)
    return frozenset(n for n, _ in order)


def extract_skip_tables(sf: SkipFsc, model: Pomdp) -> list[NodeTables]:
    """Tabular view of a skip controller.

    Action rows are all defined gamma entries (skip markers included);
    transition rows are the reachable descent rows plus the realizable
    observation pairs under real actions.
    """
    order, _, triples = _skip_walk(sf, model)
    nodes = sorted({n for n, _ in order})
    tables = []
    for n in nodes:
        action_rows = tuple(
            sorted((z, a) for (m, z), a in sf.gamma.items() if m == n)
        )
        transition_rows = tuple(
            sorted(
                (z, z2, sf.delta[(m, z, z2)])
                for m, z, z2 in triples
                if m == n
            )
        )
        tables.append(NodeTables(n, action_rows, transition_rows))
    return tables


@dataclass(frozen=True)
class EquivCounterexample:
    """Shortest run on which the two controllers diverge.

    ``steps`` holds the (observation, action) pairs of the common prefix; the
    final fields describe the point of divergence.
    """

    steps: tuple[tuple[Observation, int], ...]
    observation: Observation
    fsc_action: int | None
    skip_action: int | None


def check_equiv(
    fsc: Fsc, sf: SkipFsc, model: Pomdp
) -> EquivCounterexample | None:
    """Product check that both controllers choose identical actions everywhere.

    BFS over (state, fsc node, skip node) triples from the shared start; at
    each triple skips are resolved first, then the chosen actions must agree,
    and the search expands through every successor in the action's support.
    Node identities are never compared: skip resolution legitimately lands in
    different node ids while realizing the same policy.  None means
    equivalent; otherwise the shortest violating run is returned.
    """
    start = (model.init, fsc.init_node, sf.init_node)
    parent: dict[tuple, tuple | None] = {start: None}
    labels: dict[tuple, tuple[Observation, int]] = {}
    queue = [start]

    def trace_back(key) -> tuple[tuple[Observation, int], ...]:
        steps = []
        while parent[key] is not None:
            key = parent[key]
            steps.append(labels[key])
        return tuple(reversed(steps))

    while queue:
        key = queue.pop(0)
        s, nf, ns = key
        if s in model.targets:
            continue
        z = model.obs(s)
        a_f = fsc.gamma.get((nf, z))
        try:
            acting, _ = resolve_skips(sf, ns, z)
            a_s = sf.gamma.get((acting, z))
        except UndefinedDeltaError:
            a_s = None
        if a_s == SKIP:
            a_s = None
        if a_f != a_s:
            return EquivCounterexample(trace_back(key), z, a_f, a_s)
        if a_f is None:
            continue
        labels[key] = (z, a_f)
        for t, _p in model.transitions[s][a_f]:
            z2 = model.obs(t)
            nf2 = fsc.delta.get((nf, z, z2))
            ns2 = sf.delta.get((acting, z, z2))
            if nf2 is None:
                raise UndefinedDeltaError(nf, z, z2)
            if ns2 is None:
                raise UndefinedDeltaError(acting, z, z2)
            nxt = (t, nf2, ns2)
            if nxt not in parent:
                parent[nxt] = key
                queue.append(nxt)
    return None
