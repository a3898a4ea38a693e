"""Deterministic grid-world benchmark generators.

Three families: a small cheese maze with aliased corridor cells, a grid with
crash obstacles and a corner target, and a fuel-constrained rover grid with
refueling stations and slippery moves.  Layouts are hand-tuned so that each
instance admits an almost-surely winning controller that the iterative
synthesizer can discover; the tuning constants are documented inline.

Generators are pure: the same parameters always produce byte-identical
models.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ModelError
from .pomdp import (
    Dist,
    Observation,
    Pomdp,
    bool_feature,
    int_feature,
    make_dist,
    validate_pomdp,
)

Coord = tuple[int, int]


@dataclass(frozen=True)
class GridSpec:
    """Parameters of one grid instance; generators fill in family defaults."""

    family: str
    n: int
    energy: int = 0
    slip: float = 0.0
    obstacles: frozenset[Coord] = field(default_factory=frozenset)
    stations: frozenset[Coord] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.family not in {"maze", "obstacle", "refuel"}:
            raise ModelError(f"unknown benchmark family {self.family!r}")
        if self.n < 3:
            raise ModelError(f"grid side {self.n} too small")
        for r, c in self.obstacles | self.stations:
            if not (0 <= r < self.n and 0 <= c < self.n):
                raise ModelError(f"coordinate ({r}, {c}) outside the grid")
        if self.family == "refuel" and self.energy < 1:
            raise ModelError("refuel requires energy capacity >= 1")


# directions in action order: up, down, left, right
_MOVES = {"up": (-1, 0), "down": (1, 0), "left": (0, -1), "right": (0, 1)}


def _merge(pairs) -> Dist:
    acc: dict[int, float] = {}
    for state, prob in pairs:
        acc[state] = acc.get(state, 0.0) + prob
    return make_dist(sorted(acc.items()))


# --------------------------------------------------------------------------
# maze
# --------------------------------------------------------------------------

def gen_maze() -> Pomdp:
    """Fixed cheese maze: a five-cell top corridor over a central column.

    Wall configurations alias the two inner corridor cells and the two
    column cells; the placement step, the trap under the west corner, and the
    two cheese cells (below the east corner and below the column) complete
    the layout.  Placed cells expose seven distinct observations: five wall
    configurations plus the trap and the cheese.
    """
    # cell ids by position
    w_cell, c1, c2, c3, r_cell = 0, 1, 2, 3, 4  # top row, west to east
    trap = 5        # below the west corner
    m1 = 6          # column below c2
    cheese_e = 7    # below the east corner
    m2 = 8          # column below m1
    cheese_s = 9    # below m2
    pre = 10        # pre-placement state

    actions = ("up", "down", "left", "right", "INIT")
    up, down, left, right, init_a = range(5)

    features = (
        bool_feature("CanGoDown"),
        bool_feature("CanGoLeft"),
        bool_feature("CanGoRight"),
        bool_feature("CanGoUp"),
        bool_feature("bad"),
        bool_feature("clk"),
        bool_feature("goal"),
    )

    def cell_obs(d, l, r, u) -> Observation:
        return (d, l, r, u, 0, 1, 0)

    observations = (
        cell_obs(1, 0, 1, 0),  # w_cell: trap below, corridor right
        cell_obs(0, 1, 1, 0),  # c1
        cell_obs(1, 1, 1, 0),  # c2: column below
        cell_obs(0, 1, 1, 0),  # c3 (same as c1)
        cell_obs(1, 1, 0, 0),  # r_cell: cheese below
        (0, 0, 0, 0, 1, 1, 0),  # trap
        cell_obs(1, 0, 0, 1),  # m1
        (0, 0, 0, 0, 0, 1, 1),  # cheese_e
        cell_obs(1, 0, 0, 1),  # m2
        (0, 0, 0, 0, 0, 1, 1),  # cheese_s
        (0, 0, 0, 0, 0, 0, 0),  # pre
    )

    neighbors = {
        w_cell: {down: trap, right: c1},
        c1: {left: w_cell, right: c2},
        c2: {left: c1, right: c3, down: m1},
        c3: {left: c2, right: r_cell},
        r_cell: {left: c3, down: cheese_e},
        m1: {up: c2, down: m2},
        m2: {up: m1, down: cheese_s},
    }

    transitions: list[dict[int, Dist]] = []
    placement = (w_cell, c1, c2, c3, r_cell, m1, m2)
    for s in range(11):
        if s in neighbors:
            transitions.append(
                {a: make_dist([(t, 1.0)]) for a, t in neighbors[s].items()}
            )
        elif s == pre:
            transitions.append(
                {init_a: make_dist([(t, 1.0 / len(placement)) for t in placement])}
            )
        else:  # traps and cheese absorb under every move
            transitions.append(
                {a: make_dist([(s, 1.0)]) for a in (up, down, left, right)}
            )

    model = Pomdp(
        actions=actions,
        features=features,
        observations=observations,
        transitions=tuple(transitions),
        init=pre,
        targets=frozenset({cheese_e, cheese_s}),
        name="maze",
    )
    validate_pomdp(model)
    return model


# --------------------------------------------------------------------------
# obstacle
# --------------------------------------------------------------------------

#: chance that a move carries the agent two cells instead of one
OBSTACLE_SLIP = 0.3


def obstacle_spec(n: int) -> GridSpec:
    if n < 4:
        raise ModelError(f"obstacle requires N >= 4, got {n}")
    # crash cells sit on the top row and west column, away from the
    # south/east drainage the winning policies use
    return GridSpec(
        family="obstacle",
        n=n,
        slip=OBSTACLE_SLIP,
        obstacles=frozenset({(0, n // 2), (2, 0)}),
    )


def gen_obstacle(n: int) -> Pomdp:
    """N x N grid with crash cells; reach the far corner from (0, 0).

    Observations expose a three-valued class (transit, crash, goal) plus the
    four wall bits of the grid; crash cells are invisible until entered.
    """
    spec = obstacle_spec(n)
    actions = ("up", "down", "left", "right")
    features = (
        int_feature("class", 0, 2),
        bool_feature("CanGoDown"),
        bool_feature("CanGoLeft"),
        bool_feature("CanGoRight"),
        bool_feature("CanGoUp"),
    )
    goal: Coord = (n - 1, n - 1)
    cells = [(r, c) for r in range(n) for c in range(n)]
    index = {pos: i for i, pos in enumerate(cells)}

    def in_grid(pos: Coord) -> bool:
        return 0 <= pos[0] < n and 0 <= pos[1] < n

    observations = []
    for pos in cells:
        if pos in spec.obstacles:
            observations.append((1, 0, 0, 0, 0))
        elif pos == goal:
            observations.append((2, 0, 0, 0, 0))
        else:
            r, c = pos
            bits = tuple(
                1 if in_grid((r + dr, c + dc)) else 0
                for dr, dc in (_MOVES["down"], _MOVES["left"], _MOVES["right"], _MOVES["up"])
            )
            observations.append((0,) + bits)

    transitions = []
    for pos in cells:
        if pos in spec.obstacles or pos == goal:
            transitions.append(
                {a: make_dist([(index[pos], 1.0)]) for a in range(4)}
            )
            continue
        r, c = pos
        entry: dict[int, Dist] = {}
        for a, name in enumerate(actions):
            dr, dc = _MOVES[name]
            p1 = (r + dr, c + dc)
            if not in_grid(p1):
                continue
            p2 = (r + 2 * dr, c + 2 * dc)
            if p1 == goal or p1 in spec.obstacles or not in_grid(p2):
                entry[a] = make_dist([(index[p1], 1.0)])
            else:
                entry[a] = _merge(
                    [(index[p1], 1.0 - spec.slip), (index[p2], spec.slip)]
                )
        transitions.append(entry)

    model = Pomdp(
        actions=actions,
        features=features,
        observations=tuple(observations),
        transitions=tuple(transitions),
        init=index[(0, 0)],
        targets=frozenset({index[goal]}),
        name=f"obstacle-{n}",
    )
    validate_pomdp(model)
    return model


# --------------------------------------------------------------------------
# refuel
# --------------------------------------------------------------------------

#: slip probability of the rover grid
REFUEL_SLIP = 0.4

# Impassable cells per grid size.  Both sets funnel the rover through a
# descent corridor on the west edge and an east leg along the station row,
# block slips past the mid-grid station, and wall off dead ends that would
# otherwise leave no almost-surely winning policy.
_REFUEL_OBSTACLES: dict[int, frozenset[Coord]] = {
    6: frozenset({(1, 1), (2, 2), (4, 4), (4, 0), (3, 4)}),
    7: frozenset({(0, 1), (1, 1), (2, 1), (3, 1), (5, 0), (4, 5)}),
}


def refuel_spec(n: int, energy: int) -> GridSpec:
    if n < 4:
        raise ModelError(f"refuel requires N >= 4, got {n}")
    if energy < 2:
        raise ModelError(f"refuel requires E >= 2, got {energy}")
    mid = (n + 1) // 2
    obstacles = _REFUEL_OBSTACLES.get(
        n,
        frozenset({(i, i) for i in range(1, n - 1) if i != mid}),
    )
    return GridSpec(
        family="refuel",
        n=n,
        energy=energy,
        slip=REFUEL_SLIP,
        obstacles=obstacles,
        stations=frozenset({(0, 0), (mid, mid)}),
    )


def _fuel_bucket(f: int, energy: int) -> int:
    if f <= energy // 3:
        return 0
    if f <= (2 * energy) // 3:
        return 1
    return 2


def gen_refuel(n: int, energy: int) -> Pomdp:
    """Rover grid: reach the far corner before the tank runs dry.

    Moves cost one unit whether or not they slip; stations refill the tank.
    Running dry anywhere but a station is absorbing-bad.  Observations carry
    the location class (transit / start / bad / good), a three-bucket fuel
    meter, station and tank-full flags, and the four wall bits (impassable
    cells read as walls).
    """
    spec = refuel_spec(n, energy)
    actions = ("up", "down", "left", "right", "refuel")
    refuel_a = 4
    features = (
        int_feature("class", 0, 3),
        int_feature("fuelmeter", 0, 2),
        bool_feature("refuelStation"),
        bool_feature("fuelFull"),
        bool_feature("CanGoDown"),
        bool_feature("CanGoLeft"),
        bool_feature("CanGoRight"),
        bool_feature("CanGoUp"),
    )
    goal: Coord = (n - 1, n - 1)
    start: Coord = (0, 0)

    def open_cell(pos: Coord) -> bool:
        r, c = pos
        return 0 <= r < n and 0 <= c < n and pos not in spec.obstacles

    positions = [
        (r, c)
        for r in range(n)
        for c in range(n)
        if open_cell((r, c)) and (r, c) != goal
    ]

    # state layout: (pos, fuel) for live cells, then the goal, then the sink
    states: list[tuple[Coord, int]] = []
    for pos in positions:
        low = 0 if pos in spec.stations else 1
        for f in range(low, energy + 1):
            states.append((pos, f))
    index = {st: i for i, st in enumerate(states)}
    goal_id = len(states)
    sink_id = goal_id + 1

    def wall_bits(pos: Coord) -> tuple[int, int, int, int]:
        r, c = pos
        return tuple(
            1 if open_cell((r + dr, c + dc)) else 0
            for dr, dc in (_MOVES["down"], _MOVES["left"], _MOVES["right"], _MOVES["up"])
        )

    observations = []
    for pos, f in states:
        cls = 1 if pos == start else 0
        observations.append(
            (
                cls,
                _fuel_bucket(f, energy),
                1 if pos in spec.stations else 0,
                1 if f == energy else 0,
            )
            + wall_bits(pos)
        )
    observations.append((3, 0, 0, 0, 0, 0, 0, 0))  # goal
    observations.append((2, 0, 0, 0, 0, 0, 0, 0))  # out of fuel

    def landing(pos: Coord, f: int) -> int:
        if pos == goal:
            return goal_id
        if f == 0 and pos not in spec.stations:
            return sink_id
        return index[(pos, f)]

    transitions = []
    for pos, f in states:
        r, c = pos
        entry: dict[int, Dist] = {}
        for a, name in enumerate(actions[:4]):
            dr, dc = _MOVES[name]
            p1 = (r + dr, c + dc)
            if not open_cell(p1):
                continue
            if f == 0:
                entry[a] = make_dist([(sink_id, 1.0)])
                continue
            p2 = (r + 2 * dr, c + 2 * dc)
            if p1 == goal or not open_cell(p2):
                entry[a] = make_dist([(landing(p1, f - 1), 1.0)])
            else:
                entry[a] = _merge(
                    [
                        (landing(p1, f - 1), 1.0 - spec.slip),
                        (landing(p2, f - 1), spec.slip),
                    ]
                )
        if pos in spec.stations:
            entry[refuel_a] = make_dist([(index[(pos, energy)], 1.0)])
        transitions.append(entry)

    for absorbing in (goal_id, sink_id):
        transitions.append(
            {a: make_dist([(absorbing, 1.0)]) for a in range(4)}
        )

    model = Pomdp(
        actions=actions,
        features=features,
        observations=tuple(observations),
        transitions=tuple(transitions),
        init=index[(start, energy)],
        targets=frozenset({goal_id}),
        name=f"refuel-{n}-{energy}",
    )
    validate_pomdp(model)
    return model
