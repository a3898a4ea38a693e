import pytest

from conftest import B, G, GOAL, INIT, LEFT, R, UP, W, Y
from dtfsc import (
    Fsc,
    Pomdp,
    bool_feature,
    controller_wins,
    extract_tables,
    from_tables,
    fsc_step,
    make_dist,
    reachable_nodes,
)
from dtfsc.errors import ClosureError, UndefinedDeltaError, UndefinedGammaError
from dtfsc.fsc import check_closure, validate_enabledness


def one_state_model() -> Pomdp:
    return Pomdp(
        actions=("a",),
        features=(bool_feature("x"),),
        observations=((0,),),
        transitions=({0: make_dist([(0, 1.0)])},),
        init=0,
        targets=frozenset({0}),
    )


def one_node_fsc() -> Fsc:
    return Fsc(1, 0, {(0, (0,)): 0}, {(0, (0,), (0,)): 0})


class TestStep:
    def test_self_loop_fixed_point(self):
        m = one_state_model()
        out = fsc_step(one_node_fsc(), m, 0, 0, successor=0)
        assert (out.action, out.node, out.state, out.observation) == (0, 0, 0, (0,))

    def test_maze_corridor_action_is_up(self, maze_model, maze_fixture_fsc):
        corridor_state = maze_model.states_with_obs(B)[0]
        out = fsc_step(
            maze_fixture_fsc, maze_model, 0, corridor_state,
            successor=maze_model.transitions[corridor_state][UP][0][0],
        )
        assert out.action == UP

    def test_posterior_g_switches_to_node_one(self, maze_model, maze_fixture_fsc):
        # from node 0, any transition whose next observation is G lands in node 1
        for z in maze_model.obs_values():
            assert maze_fixture_fsc.delta[(0, z, G)] == 1

    def test_injected_successor_is_deterministic(self, maze_model, maze_fixture_fsc):
        pre = maze_model.init
        succ = maze_model.transitions[pre][INIT][2][0]
        a = fsc_step(maze_fixture_fsc, maze_model, 0, pre, successor=succ)
        b = fsc_step(maze_fixture_fsc, maze_model, 0, pre, successor=succ)
        assert a == b

    def test_undefined_gamma_names_pair(self, maze_model, maze_fixture_fsc):
        # node 0 has no action entry for the west corner's observation
        w_state = maze_model.states_with_obs(W)[0]
        with pytest.raises(UndefinedGammaError) as err:
            fsc_step(maze_fixture_fsc, maze_model, 0, w_state, successor=0)
        assert (err.value.node, err.value.observation) == (0, W)

    def test_undefined_delta_names_triple(self):
        m = one_state_model()
        fsc = Fsc(1, 0, {(0, (0,)): 0}, {})
        with pytest.raises(UndefinedDeltaError) as err:
            fsc_step(fsc, m, 0, 0, successor=0)
        assert (err.value.node, err.value.observation, err.value.posterior) == (
            0,
            (0,),
            (0,),
        )


class TestReachableNodes:
    def test_single_node(self):
        assert reachable_nodes(one_node_fsc(), one_state_model()) == {0}

    def test_isolated_node_dropped(self):
        fsc = Fsc(2, 0, {(0, (0,)): 0}, {(0, (0,), (0,)): 0})
        assert reachable_nodes(fsc, one_state_model()) == {0}

    def test_maze_fixture_reaches_both_nodes(self, maze_model, maze_fixture_fsc):
        assert reachable_nodes(maze_fixture_fsc, maze_model) == {0, 1}


class TestExtractTables:
    def test_single_node_single_observation(self):
        tables = extract_tables(one_node_fsc(), one_state_model())
        assert len(tables) == 1
        assert tables[0].action_rows == (((0,), 0),)

    def test_maze_fixture_row_counts(self, maze_model, maze_fixture_fsc):
        tables = {t.node: t for t in extract_tables(maze_fixture_fsc, maze_model)}
        assert len(tables[0].action_rows) == 4
        assert len(tables[1].action_rows) == 4
        # node 1's transitions realize exactly six observation pairs
        assert len(tables[1].transition_rows) == 6
        # node 0 pairs: five placement posteriors, two from the corridor
        # cells, one from the east corner (hand enumeration of the grid)
        assert len(tables[0].transition_rows) == 8

    def test_maze_fixture_posterior_behavior(self, maze_model, maze_fixture_fsc):
        # collapsing node 0's rows by next observation gives the published map
        tables = {t.node: t for t in extract_tables(maze_fixture_fsc, maze_model)}
        by_posterior = {}
        for z, z2, m in tables[0].transition_rows:
            by_posterior.setdefault(z2, set()).add(m)
        assert by_posterior == {
            W: {1},
            Y: {0},
            G: {1},
            R: {0},
            B: {1},
        }

    def test_enabledness_validated(self, maze_model, maze_fixture_fsc):
        validate_enabledness(maze_fixture_fsc, maze_model)
        bad = Fsc(
            2,
            0,
            dict(maze_fixture_fsc.gamma) | {(0, B): LEFT},  # left not enabled in corridors
            dict(maze_fixture_fsc.delta),
        )
        with pytest.raises(Exception, match="not enabled"):
            validate_enabledness(bad, maze_model)

    def test_closure_violation_carries_witness(self, maze_model, maze_fixture_fsc):
        delta = {
            k: v for k, v in maze_fixture_fsc.delta.items() if k != (1, B, GOAL)
        }
        broken = Fsc(2, 0, dict(maze_fixture_fsc.gamma), delta)
        with pytest.raises(ClosureError) as err:
            check_closure(broken, maze_model)
        assert (err.value.node, err.value.observation, err.value.posterior) == (
            1,
            B,
            GOAL,
        )

    def test_rebuild_then_extract_is_identity(self, maze_model, maze_fixture_fsc):
        tables = extract_tables(maze_fixture_fsc, maze_model)
        rebuilt = from_tables(tables, 2, 0)
        assert extract_tables(rebuilt, maze_model) == tables

    def test_row_counts_invariant_under_renumbering(self, maze_model, maze_fixture_fsc):
        perm = {0: 1, 1: 0}
        renumbered = Fsc(
            2,
            perm[maze_fixture_fsc.init_node],
            {(perm[n], z): a for (n, z), a in maze_fixture_fsc.gamma.items()},
            {
                (perm[n], z, z2): perm[m]
                for (n, z, z2), m in maze_fixture_fsc.delta.items()
            },
        )
        original = sorted(
            (len(t.action_rows), len(t.transition_rows))
            for t in extract_tables(maze_fixture_fsc, maze_model)
        )
        permuted = sorted(
            (len(t.action_rows), len(t.transition_rows))
            for t in extract_tables(renumbered, maze_model)
        )
        assert original == permuted




class TestWinning:
    def test_line_controller_wins(self, line):
        fsc = Fsc(
            1,
            0,
            {(0, (0,)): 1, (0, (1,)): 1},
            {
                (0, z, z2): 0
                for z in line.obs_values()
                for z2 in line.obs_values()
            },
        )
        assert controller_wins(fsc, line)

    def test_line_left_controller_loses(self, line):
        fsc = Fsc(
            1,
            0,
            {(0, (0,)): 0, (0, (1,)): 0},
            {
                (0, z, z2): 0
                for z in line.obs_values()
                for z2 in line.obs_values()
            },
        )
        assert not controller_wins(fsc, line)

    def test_maze_fixture_wins(self, maze_model, maze_fixture_fsc):
        assert controller_wins(maze_fixture_fsc, maze_model)
