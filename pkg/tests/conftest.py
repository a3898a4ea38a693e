import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dtfsc import (
    Fsc,
    Pomdp,
    gen_maze,
    gen_obstacle,
    gen_refuel,
    int_feature,
    make_dist,
    synthesize,
)

# maze observation vectors (CanGoDown, CanGoLeft, CanGoRight, CanGoUp, bad, clk, goal)
Y = (0, 1, 1, 0, 0, 1, 0)
G = (1, 1, 1, 0, 0, 1, 0)
B = (1, 0, 0, 1, 0, 1, 0)
W = (1, 0, 1, 0, 0, 1, 0)
R = (1, 1, 0, 0, 0, 1, 0)
PRE = (0, 0, 0, 0, 0, 0, 0)
BAD = (0, 0, 0, 0, 1, 1, 0)
GOAL = (0, 0, 0, 0, 0, 1, 1)

UP, DOWN, LEFT, RIGHT, INIT = range(5)


def line_model() -> Pomdp:
    """Three states in a row; moving right from the start reaches the goal."""
    return Pomdp(
        actions=("left", "right"),
        features=(int_feature("pos", 0, 2),),
        observations=((0,), (1,), (2,)),
        transitions=(
            {0: make_dist([(0, 1.0)]), 1: make_dist([(1, 1.0)])},
            {0: make_dist([(0, 1.0)]), 1: make_dist([(2, 1.0)])},
            {0: make_dist([(2, 1.0)]), 1: make_dist([(2, 1.0)])},
        ),
        init=0,
        targets=frozenset({2}),
        name="line",
    )


def two_node_maze_fsc(model: Pomdp) -> Fsc:
    """Hand-written two-node reference controller for the maze.

    Each node's transition behavior depends only on the next observation; the
    per-posterior maps below expand over every current observation.
    """
    t0 = {Y: 0, R: 0, G: 1, B: 1, PRE: 0, W: 1}
    t1 = {Y: 1, G: 1, B: 1, W: 1, R: 1, GOAL: 1}
    gamma = {
        (0, Y): LEFT,
        (0, PRE): INIT,
        (0, R): LEFT,
        (0, B): UP,
        (1, W): RIGHT,
        (1, B): DOWN,
        (1, G): DOWN,
        (1, Y): RIGHT,
    }
    delta = {}
    for node, tmap in ((0, t0), (1, t1)):
        for z in model.obs_values():
            for z2, m in tmap.items():
                delta[(node, z, z2)] = m
    return Fsc(2, 0, gamma, delta)


BENCHMARK_BUILDERS = [
    ("line", line_model),
    ("maze", gen_maze),
    ("obstacle-6", lambda: gen_obstacle(6)),
    ("obstacle-8", lambda: gen_obstacle(8)),
    ("refuel-6-8", lambda: gen_refuel(6, 8)),
    ("refuel-7-7", lambda: gen_refuel(7, 7)),
]


@pytest.fixture(scope="session")
def benchmarks():
    """name -> (model, synthesized controller, iteration index)."""
    out = {}
    for name, build in BENCHMARK_BUILDERS:
        model = build()
        fsc, idx = synthesize(model)
        out[name] = (model, fsc, idx)
    return out


@pytest.fixture(scope="session")
def maze_model():
    return gen_maze()


@pytest.fixture(scope="session")
def maze_fixture_fsc(maze_model):
    return two_node_maze_fsc(maze_model)


@pytest.fixture()
def line():
    return line_model()
