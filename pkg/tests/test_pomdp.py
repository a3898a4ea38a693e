import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import B, G
from dtfsc import (
    InducedChain,
    build_chain,
    Pomdp,
    almost_sure_reach,
    bool_feature,
    enabled_actions,
    induce_chain,
    make_dist,
    validate_pomdp,
)
from dtfsc.errors import (
    MissingChoiceError,
    ModelError,
    UnknownObservationError,
)
from vi_oracle import chain_value


def tiny_model(**overrides) -> Pomdp:
    fields = dict(
        actions=("a",),
        features=(bool_feature("x"),),
        observations=((0,), (1,)),
        transitions=(
            {0: make_dist([(1, 1.0)])},
            {0: make_dist([(1, 1.0)])},
        ),
        init=0,
        targets=frozenset({1}),
    )
    fields.update(overrides)
    return Pomdp(**fields)


class TestValidation:
    def test_valid_model_passes(self):
        validate_pomdp(tiny_model())

    def test_dead_state_rejected(self):
        m = tiny_model(transitions=({0: make_dist([(1, 1.0)])}, {}))
        with pytest.raises(ModelError, match="no action"):
            validate_pomdp(m)

    def test_observation_inconsistent_actions_rejected(self):
        m = tiny_model(
            observations=((0,), (0,), (1,)),
            transitions=(
                {0: make_dist([(2, 1.0)])},
                {0: make_dist([(2, 1.0)]), 1: make_dist([(0, 1.0)])},
                {0: make_dist([(2, 1.0)])},
            ),
            actions=("a", "b"),
            targets=frozenset({2}),
        )
        with pytest.raises(ModelError, match="disagree"):
            validate_pomdp(m)

    def test_target_observation_closure_enforced(self):
        # state 2 shares the target's observation but is not a target
        m = tiny_model(
            observations=((0,), (1,), (1,)),
            transitions=(
                {0: make_dist([(1, 1.0)])},
                {0: make_dist([(1, 1.0)])},
                {0: make_dist([(2, 1.0)])},
            ),
        )
        with pytest.raises(ModelError, match="shares an observation"):
            validate_pomdp(m)

    def test_feature_domain_checked(self):
        m = tiny_model(observations=((0,), (7,)))
        with pytest.raises(ModelError, match="domain"):
            validate_pomdp(m)


class TestDist:
    def test_low_sum_rejected(self):
        with pytest.raises(ModelError, match="sums to"):
            make_dist([(0, 0.9)])

    def test_duplicate_states_rejected(self):
        with pytest.raises(ModelError, match="twice"):
            make_dist([(0, 0.5), (0, 0.5)])

    def test_nonpositive_probability_rejected(self):
        with pytest.raises(ModelError, match="not positive"):
            make_dist([(0, 0.0), (1, 1.0)])

    def test_rational_style_floats_accepted(self):
        assert make_dist([(1, 1 / 3), (0, 2 / 3)]) == ((0, 2 / 3), (1, 1 / 3))


class TestEnabledActions:
    def test_singleton_model(self):
        m = tiny_model()
        assert enabled_actions(m, (0,)) == {0}

    def test_maze_corridor_is_up_down(self, maze_model):
        up = maze_model.action_id("up")
        down = maze_model.action_id("down")
        assert enabled_actions(maze_model, B) == {up, down}

    def test_obstacle_goal_has_full_action_set(self, benchmarks):
        model, _, _ = benchmarks["obstacle-6"]
        goal_obs = model.obs(next(iter(model.targets)))
        assert enabled_actions(model, goal_obs) == set(range(len(model.actions)))

    def test_unknown_observation_raises(self):
        with pytest.raises(UnknownObservationError):
            enabled_actions(tiny_model(), (3,))


class TestInduceChain:
    def test_no_frontier_matches_chosen_actions(self, line):
        policy = {(0,): 1, (1,): 1}
        chain = induce_chain(line, policy, frontier=set())
        assert chain.support(0) == (1,)
        assert chain.support(1) == (2,)
        assert chain.support(2) == (2,)  # target absorbs

    def test_line_frontier_absorbs_middle(self, line):
        chain = induce_chain(line, {(0,): 1}, frontier={(1,)})
        assert chain.support(1) == (1,)
        assert chain.support(2) == (2,)
        assert chain.support(0) == (1,)

    def test_maze_frontier_absorbs_all_matching_states(self, maze_model, maze_fixture_fsc):
        # structural check: the node-0 policy leaves the west corner uncovered,
        # so the tolerant builder is used and only absorption is asserted
        node0_policy = {
            z: a for (n, z), a in maze_fixture_fsc.gamma.items() if n == 0
        }
        chain = build_chain(maze_model, node0_policy, frontier={G})
        for s in range(maze_model.num_states):
            if maze_model.obs(s) == G:
                assert chain.support(s) == (s,)

    def test_missing_choice_names_first_reachable_observation(self, line):
        with pytest.raises(MissingChoiceError) as err:
            induce_chain(line, {(0,): 1}, frontier=set())
        assert err.value.observation == (1,)

    def test_exactly_one_action_per_non_absorbing_state(self, maze_model):
        policy = {z: min(enabled_actions(maze_model, z)) for z in maze_model.obs_values()}
        chain = induce_chain(maze_model, policy, frontier=set())
        for s in range(maze_model.num_states):
            assert len(chain.succ[s]) >= 1


class TestAlmostSureReach:
    def test_deterministic_chain_into_goal(self):
        chain = InducedChain((((1, 1.0),), ((1, 1.0),)))
        assert almost_sure_reach(chain, {1}, 0)

    def test_coin_flip_to_sink_fails(self):
        # state 0 flips between goal 1 and absorbing sink 2
        chain = InducedChain(
            (((1, 0.5), (2, 0.5)), ((1, 1.0),), ((2, 1.0),))
        )
        assert not almost_sure_reach(chain, {1}, 0)

    def test_start_in_goal(self):
        chain = InducedChain((((0, 1.0),),))
        assert almost_sure_reach(chain, {0}, 0)

    def test_unresolved_reachable_state_raises(self):
        chain = InducedChain(
            (((1, 1.0),), ((1, 1.0),), ((2, 1.0),)), unresolved=frozenset({1})
        )
        with pytest.raises(MissingChoiceError):
            almost_sure_reach(chain, {2}, 0)

    def test_empty_goal_rejected(self):
        chain = InducedChain((((0, 1.0),),))
        with pytest.raises(ModelError):
            almost_sure_reach(chain, set(), 0)


@st.composite
def random_chains(draw):
    n = draw(st.integers(min_value=1, max_value=8))
    succ = []
    for _ in range(n):
        k = draw(st.integers(min_value=1, max_value=min(3, n)))
        targets = draw(
            st.lists(
                st.integers(min_value=0, max_value=n - 1),
                min_size=k,
                max_size=k,
                unique=True,
            )
        )
        share = 1.0 / len(targets)
        succ.append(tuple((t, share) for t in sorted(targets)))
    goal = draw(
        st.sets(st.integers(min_value=0, max_value=n - 1), min_size=1, max_size=n)
    )
    start = draw(st.integers(min_value=0, max_value=n - 1))
    return tuple(succ), goal, start


class TestOracleAgreement:
    @settings(max_examples=200, deadline=None)
    @given(random_chains())
    def test_graph_answer_matches_value_iteration(self, case):
        succ, goal, start = case
        graph = almost_sure_reach(InducedChain(succ), goal, start)
        absorbed = [
            ((s, 1.0),) if s in goal else row for s, row in enumerate(succ)
        ]
        value = chain_value(absorbed, goal, start)
        assert graph == (abs(1.0 - value) < 1e-6)

    def test_agreement_on_benchmark_chains(self, benchmarks):
        for model, _, _ in benchmarks.values():
            policy = {
                z: min(enabled_actions(model, z)) for z in model.obs_values()
            }
            chain = induce_chain(model, policy, frontier=set())
            graph = almost_sure_reach(chain, set(model.targets), model.init)
            value = chain_value(
                [list(row) for row in chain.succ], set(model.targets), model.init
            )
            assert graph == (abs(1.0 - value) < 1e-6)
