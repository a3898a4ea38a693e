"""Episodic rollouts for any controller representation.

Episodes are capped at a configurable horizon since the underlying objective
is infinite-horizon; each episode reports whether a target was hit or the
horizon ran out.  Rollouts draw successors from an explicit random source,
so a fixed seed reproduces runs bit for bit.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .dtcontroller import DtFsc, dtfsc_step
from .fsc import Fsc, fsc_step
from .pomdp import Pomdp
from .skipfsc import SkipFsc, skip_step

DEFAULT_HORIZON = 10_000

TARGET_HIT = "target-hit"
HORIZON_EXHAUSTED = "horizon-exhausted"


@dataclass(frozen=True)
class EpisodeResult:
    outcome: str
    steps: int
    final_state: int
    final_node: int


def _stepper(controller, model):
    if isinstance(controller, Fsc):
        return lambda n, s, rng: fsc_step(controller, model, n, s, rng=rng)
    if isinstance(controller, DtFsc):
        return lambda n, s, rng: dtfsc_step(controller, model, n, s, rng=rng)
    if isinstance(controller, SkipFsc):
        return lambda n, s, rng: skip_step(controller, model, n, s, rng=rng)[0]
    raise TypeError(f"cannot simulate {type(controller).__name__}")


def run_episode(
    controller, model: Pomdp, rng: random.Random, horizon: int = DEFAULT_HORIZON
) -> EpisodeResult:
    step = _stepper(controller, model)
    node = controller.init_node
    state = model.init
    for i in range(horizon):
        if state in model.targets:
            return EpisodeResult(TARGET_HIT, i, state, node)
        outcome = step(node, state, rng)
        node, state = outcome.node, outcome.state
    outcome_kind = TARGET_HIT if state in model.targets else HORIZON_EXHAUSTED
    return EpisodeResult(outcome_kind, horizon, state, node)


def simulate(
    controller,
    model: Pomdp,
    episodes: int,
    seed: int,
    horizon: int = DEFAULT_HORIZON,
) -> list[EpisodeResult]:
    rng = random.Random(seed)
    return [run_episode(controller, model, rng, horizon) for _ in range(episodes)]
