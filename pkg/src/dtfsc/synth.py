"""Iterative construction of winning controllers for almost-sure reachability.

Each iteration finds a stationary observation-based policy that wins a fresh
set of observations outright, treating previously won observations as an
absorbing frontier.  Iteration i becomes controller node i; posteriors won at
an earlier iteration jump straight to that iteration's node, everything else
self-loops.  The loop stops once the initial observation is won, after which
unreachable nodes are pruned with a dense, order-preserving renumbering.

The per-iteration search is a deterministic backtracking procedure: a sweep
assigns actions observation by observation in canonical order, keeping an
assignment whenever it makes its observation fully winning; when the sweep
alone wins nothing new, a depth-first search assigns actions along the play
closure of one candidate observation at a time, pruned by a fully-observable
relaxation, and the first feasible assignment wins.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import SynthesisError
from .fsc import Fsc, reachable_nodes
from .pomdp import (
    Observation,
    Pomdp,
    StationaryObsPolicy,
    build_chain,
    enabled_actions,
)
from .skipfsc import IterationIndex, verify_chain_structure


@dataclass
class SynthState:
    """Bookkeeping for one synthesis run."""

    won: dict[Observation, int] = field(default_factory=dict)
    policies: list[StationaryObsPolicy] = field(default_factory=list)
    iteration: int = 0


def _good_states(model: Pomdp, frontier: set[Observation]) -> set[int]:
    return {
        s
        for s in range(model.num_states)
        if s in model.targets or model.obs(s) in frontier
    }


def _winning_states(model: Pomdp, sigma: StationaryObsPolicy, frontier) -> set[int]:
    """States that reach targets or the frontier with probability one when
    assigned observations act and everything else absorbs."""
    chain = build_chain(model, sigma, frontier)
    good = _good_states(model, set(frontier))
    preds: dict[int, list[int]] = {}
    for s in range(chain.num_states):
        for t in chain.support(s):
            preds.setdefault(t, []).append(s)
    can_reach = set(good)
    queue = list(good)
    while queue:
        t = queue.pop(0)
        for s in preds.get(t, ()):
            if s not in can_reach:
                can_reach.add(s)
                queue.append(s)
    doomed = {s for s in range(chain.num_states) if s not in can_reach}
    queue = list(doomed)
    while queue:
        t = queue.pop(0)
        for s in preds.get(t, ()):
            if s not in doomed:
                doomed.add(s)
                queue.append(s)
    return {s for s in range(chain.num_states) if s not in doomed}


def _fully_winning_obs(model, sigma, frontier) -> set[Observation]:
    winning = _winning_states(model, sigma, frontier)
    out = set()
    for z in model.obs_values():
        if z in frontier:
            continue
        states = model.states_with_obs(z)
        if states and all(s in winning for s in states):
            out.add(z)
    return out


def _relaxed_winning(model: Pomdp, sigma, frontier) -> set[int]:
    """Almost-sure winning region when unassigned states pick actions freely.

    Greatest-fixpoint computation; an over-approximation of what any
    observation-uniform completion of ``sigma`` can achieve, used to prune.
    """
    good = _good_states(model, set(frontier))

    def allowed(s: int):
        z = model.obs(s)
        if s in good:
            return []
        if z in sigma:
            return [sigma[z]]
        return sorted(model.transitions[s])

    region = set(range(model.num_states))
    while True:
        reach = set(good) & region
        changed = True
        while changed:
            changed = False
            for s in region - reach:
                for a in allowed(s):
                    support = {t for t, _ in model.transitions[s][a]}
                    if support <= region and support & reach:
                        reach.add(s)
                        changed = True
                        break
        if reach == region:
            return region
        region = reach


def _trim(model, sigma, frontier, w_plus) -> StationaryObsPolicy:
    """Restrict a policy to observations reachable from the won states."""
    chain = build_chain(model, sigma, frontier)
    good = _good_states(model, set(frontier))
    start = sorted(
        s for z in w_plus for s in model.states_with_obs(z)
    )
    seen = set(start)
    queue = list(start)
    used: set[Observation] = set()
    while queue:
        s = queue.pop(0)
        if s in good:
            continue
        used.add(model.obs(s))
        for t in chain.support(s):
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return {z: a for z, a in sigma.items() if z in used}


def _closure_candidates(model, sigma, frontier, sources) -> list[Observation]:
    """Unassigned observations reached by the play closure, discovery order."""
    chain = build_chain(model, sigma, frontier)
    good = _good_states(model, set(frontier))
    seen = set(sources)
    queue = sorted(sources)
    out: list[Observation] = []
    while queue:
        s = queue.pop(0)
        if s in good:
            continue
        z = model.obs(s)
        if z not in sigma:
            if z not in out:
                out.append(z)
            continue
        for t in chain.support(s):
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return out


def find_iteration_policy(
    model: Pomdp, won: set[Observation]
) -> tuple[StationaryObsPolicy, set[Observation]] | None:
    """One iteration: a policy winning at least one new observation, or None.

    The returned policy is trimmed to the observations its winning plays can
    actually visit; the returned set is maximal for that policy.
    """
    unwon = [z for z in model.obs_values() if z not in won]

    # sweep: keep any single assignment that wins its own observation given
    # what the growing policy already covers
    sigma: StationaryObsPolicy = {}
    for z in unwon:
        states = model.states_with_obs(z)
        for a in sorted(enabled_actions(model, z)):
            candidate = dict(sigma)
            candidate[z] = a
            winning = _winning_states(model, candidate, won)
            if all(s in winning for s in states):
                sigma = candidate
                break
    w_plus = _fully_winning_obs(model, sigma, won)
    if w_plus:
        return _trim(model, sigma, won, w_plus), w_plus

    # escalation: grow an assignment along the play closure of one candidate
    # observation, depth-first, actions in id order, first feasible wins
    for z_star in unwon:
        states = model.states_with_obs(z_star)

        def feasible(assignment) -> bool:
            region = _relaxed_winning(model, assignment, won)
            return all(s in region for s in states)

        def search(assignment) -> StationaryObsPolicy | None:
            if not feasible(assignment):
                return None
            pending = _closure_candidates(model, assignment, won, states)
            if not pending:
                winning = _winning_states(model, assignment, won)
                if all(s in winning for s in states):
                    return assignment
                return None
            z_next = pending[0]
            for a in sorted(enabled_actions(model, z_next)):
                extended = dict(assignment)
                extended[z_next] = a
                found = search(extended)
                if found is not None:
                    return found
            return None

        for a in sorted(enabled_actions(model, z_star)):
            found = search({z_star: a})
            if found is not None:
                w_plus = _fully_winning_obs(model, found, won)
                return _trim(model, found, won, w_plus), w_plus
    return None


def _trivial_controller(model: Pomdp) -> tuple[Fsc, IterationIndex]:
    """Single node used when the initial observation is already a target's."""
    gamma = {}
    delta = {}
    for z in sorted(model.target_observations()):
        a = min(enabled_actions(model, z))
        gamma[(0, z)] = a
        posteriors = {
            model.obs(t)
            for s in model.states_with_obs(z)
            for t, _ in model.transitions[s][a]
        }
        for z2 in sorted(posteriors):
            delta[(0, z, z2)] = 0
    return Fsc(1, 0, gamma, delta), IterationIndex({})


def synthesize(model: Pomdp) -> tuple[Fsc, IterationIndex]:
    """Build a winning controller plus the iteration index of each observation.

    Raises SynthesisError when no iteration can win a new observation before
    the initial observation is covered.
    """
    state = SynthState()
    target_obs = set(model.target_observations())
    won_set = set(target_obs)
    init_obs = model.obs(model.init)

    if init_obs in won_set:
        return _trivial_controller(model)

    while init_obs not in won_set:
        result = find_iteration_policy(model, won_set)
        if result is None:
            raise SynthesisError(
                f"no policy wins a new observation at iteration {state.iteration}; "
                f"{len(won_set)} observations won so far"
            )
        sigma, w_plus = result
        for z in sorted(w_plus):
            state.won[z] = state.iteration
        state.policies.append(sigma)
        won_set |= w_plus
        state.iteration += 1

    num = len(state.policies)
    observations = model.obs_values()
    gamma = {
        (i, z): a
        for i, sigma in enumerate(state.policies)
        for z, a in sigma.items()
    }
    delta = {}
    for i in range(num):
        for z in observations:
            for z2 in observations:
                j = state.won.get(z2)
                delta[(i, z, z2)] = j if j is not None and j < i else i
    fsc = Fsc(num, state.won[init_obs], gamma, delta)

    keep = sorted(reachable_nodes(fsc, model))
    if len(keep) != num:
        remap = {old: new for new, old in enumerate(keep)}
        gamma = {(remap[n], z): a for (n, z), a in gamma.items() if n in remap}
        delta = {
            (remap[n], z, z2): remap[m]
            for (n, z, z2), m in delta.items()
            if n in remap and m in remap
        }
        fsc = Fsc(len(keep), remap[fsc.init_node], gamma, delta)
        index = IterationIndex(
            {z: remap[i] for z, i in state.won.items() if i in remap}
        )
    else:
        index = IterationIndex(dict(state.won))

    verify_chain_structure(fsc, index, model)
    return fsc, index
