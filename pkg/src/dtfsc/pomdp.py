"""POMDP model types, induced chains, and the qualitative reachability check.

States are contiguous integers, observations are tuples of integers aligned
with a list of feature specifications (booleans encode as 0/1).  Almost-sure
reachability is decided on the support graph alone; probability magnitudes
never enter the decision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import (
    MissingChoiceError,
    ModelError,
    UnknownObservationError,
)

Observation = tuple[int, ...]

#: sum tolerance for floating-point distributions
DIST_TOLERANCE = 1e-9


@dataclass(frozen=True)
class FeatureSpec:
    """One observable feature: a name plus a bounded integer domain.

    Boolean features use the domain {0, 1} and render as ``name=v`` in DOT
    output; integer features carry an inclusive [lo, hi] range.
    """

    name: str
    lo: int
    hi: int
    boolean: bool = False

    def __post_init__(self):
        if self.lo > self.hi:
            raise ModelError(f"feature {self.name}: lo {self.lo} > hi {self.hi}")
        if self.boolean and (self.lo, self.hi) != (0, 1):
            raise ModelError(f"boolean feature {self.name} must have domain [0, 1]")

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    def contains(self, value: int) -> bool:
        return self.lo <= value <= self.hi


def bool_feature(name: str) -> FeatureSpec:
    return FeatureSpec(name, 0, 1, boolean=True)


def int_feature(name: str, lo: int, hi: int) -> FeatureSpec:
    return FeatureSpec(name, lo, hi)


# A distribution is a tuple of (state, probability) pairs, sorted by state id.
Dist = tuple[tuple[int, float], ...]


def make_dist(support: Iterable[tuple[int, float]]) -> Dist:
    """Normalize a support list into canonical form and validate it."""
    items = sorted(support)
    seen = set()
    total = 0.0
    for state, prob in items:
        if state in seen:
            raise ModelError(f"distribution mentions state {state} twice")
        seen.add(state)
        if prob <= 0.0:
            raise ModelError(f"probability {prob} for state {state} not positive")
        total += prob
    if math.isclose(total, 1.0, abs_tol=DIST_TOLERANCE):
        return tuple(items)
    raise ModelError(f"distribution sums to {total!r}, expected 1")


@dataclass(frozen=True)
class Pomdp:
    """Finite POMDP with a factored observation space.

    ``transitions[s]`` maps enabled action ids to distributions; every state
    must enable at least one action, and states sharing an observation must
    enable the same actions.
    """

    actions: tuple[str, ...]
    features: tuple[FeatureSpec, ...]
    observations: tuple[Observation, ...]
    transitions: tuple[Mapping[int, Dist], ...]
    init: int
    targets: frozenset[int]
    name: str = ""

    @property
    def num_states(self) -> int:
        return len(self.observations)

    def obs(self, state: int) -> Observation:
        return self.observations[state]

    def enabled(self, state: int) -> frozenset[int]:
        return frozenset(self.transitions[state])

    def action_id(self, name: str) -> int:
        return self.actions.index(name)

    def obs_values(self) -> list[Observation]:
        """All distinct observations, sorted lexicographically.

        The position in this list is the observation's canonical id; every
        deterministic iteration order in the package derives from it.
        """
        return sorted(set(self.observations))

    def states_with_obs(self, z: Observation) -> list[int]:
        return [s for s in range(self.num_states) if self.observations[s] == z]

    def target_observations(self) -> frozenset[Observation]:
        return frozenset(self.observations[t] for t in self.targets)


def validate_pomdp(model: Pomdp) -> None:
    """Check every structural invariant; raise ModelError on the first breach."""
    n = model.num_states
    if n == 0:
        raise ModelError("model has no states")
    if not (0 <= model.init < n):
        raise ModelError(f"initial state {model.init} out of range")
    if not model.targets:
        raise ModelError("target set is empty")
    for t in model.targets:
        if not (0 <= t < n):
            raise ModelError(f"target state {t} out of range")
    width = len(model.features)
    names = [f.name for f in model.features]
    if len(set(names)) != len(names):
        raise ModelError("feature names are not unique")
    for s, z in enumerate(model.observations):
        if len(z) != width:
            raise ModelError(f"state {s}: observation has {len(z)} values, expected {width}")
        for f, v in zip(model.features, z):
            if not f.contains(v):
                raise ModelError(f"state {s}: value {v} outside domain of feature {f.name}")
    if len(model.transitions) != n:
        raise ModelError("transition table length does not match state count")
    for s in range(n):
        if not model.transitions[s]:
            raise ModelError(f"state {s} enables no action")
        for a, dist in model.transitions[s].items():
            if not (0 <= a < len(model.actions)):
                raise ModelError(f"state {s}: unknown action id {a}")
            make_dist(dist)
            for succ, _ in dist:
                if not (0 <= succ < n):
                    raise ModelError(f"state {s}, action {a}: successor {succ} out of range")
    by_obs: dict[Observation, frozenset[int]] = {}
    for s in range(n):
        z = model.observations[s]
        enabled = model.enabled(s)
        if z in by_obs:
            if by_obs[z] != enabled:
                raise ModelError(
                    f"states with observation {z} disagree on enabled actions"
                )
        else:
            by_obs[z] = enabled
    target_obs = model.target_observations()
    for s in range(n):
        if model.observations[s] in target_obs and s not in model.targets:
            raise ModelError(
                f"state {s} shares an observation with a target but is not a target"
            )


def enabled_actions(model: Pomdp, z: Observation) -> frozenset[int]:
    """Actions enabled in every (equivalently, any) state observing ``z``."""
    for s in range(model.num_states):
        if model.observations[s] == z:
            return model.enabled(s)
    raise UnknownObservationError(f"no state has observation {z}")


# Stationary observation-based policies are plain dicts Observation -> action id.
StationaryObsPolicy = dict[Observation, int]


@dataclass(frozen=True)
class InducedChain:
    """Markov chain over the model's states under a fixed policy.

    ``succ[s]`` lists the (successor, probability) support of state ``s``.
    Absorbing states self-loop.  ``unresolved`` collects states whose
    observation had no policy entry; they are absorbing placeholders and may
    not be reached by any query.
    """

    succ: tuple[Dist, ...]
    unresolved: frozenset[int] = field(default_factory=frozenset)

    @property
    def num_states(self) -> int:
        return len(self.succ)

    def support(self, s: int) -> tuple[int, ...]:
        return tuple(t for t, _ in self.succ[s])


def build_chain(
    model: Pomdp,
    policy: StationaryObsPolicy,
    frontier: Iterable[Observation],
) -> InducedChain:
    """Like induce_chain but tolerant of reachable unresolved states."""
    frontier_set = set(frontier)
    succ: list[Dist] = []
    unresolved = set()
    for s in range(model.num_states):
        z = model.observations[s]
        if s in model.targets or z in frontier_set:
            succ.append(((s, 1.0),))
        elif z in policy:
            succ.append(model.transitions[s][policy[z]])
        else:
            succ.append(((s, 1.0),))
            unresolved.add(s)
    return InducedChain(tuple(succ), frozenset(unresolved))


def induce_chain(
    model: Pomdp,
    policy: StationaryObsPolicy,
    frontier: Iterable[Observation],
) -> InducedChain:
    """Single-action chain: frontier observations and targets become absorbing.

    Raises MissingChoiceError naming the first observation (in BFS order from
    the policy's own domain) that is reachable yet has no policy entry.
    """
    chain = build_chain(model, policy, frontier)
    if chain.unresolved:
        start = [s for s in range(model.num_states) if model.observations[s] in policy]
        seen = set(start)
        queue = list(start)
        while queue:
            s = queue.pop(0)
            if s in chain.unresolved:
                raise MissingChoiceError(model.observations[s])
            for t in chain.support(s):
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
    return chain


def almost_sure_reach(chain: InducedChain, goal: Iterable[int], start: int) -> bool:
    """True iff ``goal`` is reached from ``start`` with probability one.

    Purely graph-theoretic: with U the set of states from which the goal is
    unreachable, the answer is "no state of U is reachable from start".
    """
    goal_set = set(goal)
    if not goal_set:
        raise ModelError("goal set is empty")

    reach = {start}
    queue = [start]
    while queue:
        s = queue.pop(0)
        if s in goal_set:
            continue
        if s in chain.unresolved:
            raise MissingChoiceError(s)
        for t in chain.support(s):
            if t not in reach:
                reach.add(t)
                queue.append(t)

    # backward closure of the goal along support edges
    preds: dict[int, list[int]] = {}
    for s in range(chain.num_states):
        for t in chain.support(s):
            preds.setdefault(t, []).append(s)
    can_reach = set(goal_set)
    queue = [g for g in goal_set]
    while queue:
        t = queue.pop(0)
        for s in preds.get(t, ()):
            if s not in can_reach:
                can_reach.add(s)
                queue.append(s)

    return all(s in can_reach for s in reach)
