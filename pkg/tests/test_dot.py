from dtfsc import Dataset, build_dtfsc, learn, to_skip_fsc
from dtfsc.dot import dtfsc_to_dot, fsc_to_dot, skip_fsc_to_dot, tree_to_dot
from dtfsc.dot import dist_label
from dtfsc.pomdp import bool_feature


class TestTreeDot:
    def test_single_leaf_renders_one_node(self):
        ds = Dataset((bool_feature("x"),), (((0,), 1),), ("a", "b"))
        text = tree_to_dot(learn(ds))
        assert text.count("shape=box") == 1
        assert 'label="b"' in text

    def test_split_nodes_render_tests_and_edges(self):
        ds = Dataset(
            (bool_feature("x"),), (((0,), 0), ((1,), 1)), ("a", "b")
        )
        text = tree_to_dot(learn(ds))
        assert 'label="x=0"' in text
        assert 'label="true"' in text and 'label="false"' in text

    def test_output_is_deterministic(self, maze_model, maze_fixture_fsc):
        dt = build_dtfsc(maze_fixture_fsc, maze_model)
        a = tree_to_dot(dt.action_trees[0])
        b = tree_to_dot(dt.action_trees[0])
        assert a == b


class TestControllerDot:
    def test_maze_dtfsc_has_two_nodes_and_four_tree_references(
        self, maze_model, maze_fixture_fsc
    ):
        dt = build_dtfsc(maze_fixture_fsc, maze_model)
        text = dtfsc_to_dot(dt)
        assert "n0 [" in text and "n1 [" in text
        for ref in ("g0", "t0", "g1", "t1"):
            assert ref in text

    def test_fsc_dot_is_deterministic(self, maze_model, maze_fixture_fsc):
        assert fsc_to_dot(maze_fixture_fsc, maze_model) == fsc_to_dot(
            maze_fixture_fsc, maze_model
        )

    def test_skip_edges_are_dashed(self, benchmarks):
        model, fsc, idx = benchmarks["maze"]
        sf = to_skip_fsc(fsc, idx, model)
        text = skip_fsc_to_dot(sf, model)
        assert "style=dashed" in text

    def test_initial_node_is_highlighted(self, benchmarks):
        model, fsc, idx = benchmarks["line"]
        text = fsc_to_dot(fsc, model)
        assert f"n{fsc.init_node} [" in text
        assert "doublecircle" in text


class TestDistLabel:
    def test_three_decimal_rendering(self):
        assert dist_label(((0, 0.5), (1, 0.5)), ("stay", "go")) == (
            "0.500:stay, 0.500:go"
        )


class TestDistributionLeafRendering:
    def test_action_tree_with_distribution_leaf_expands_in_dot(self, line):
        from dtfsc import DtFsc
        from dtfsc.dot import action_leaf_overrides
        from dtfsc.dtree import DecisionTree, Leaf, primed_layout

        action_tree = DecisionTree(
            tuple(line.features),
            (Leaf(len(line.actions) + 1),),
            0,
            tuple(line.actions) + ("skip", "d0"),
        )
        trans_tree = DecisionTree(
            primed_layout(line.features), (Leaf(0),), 0, ("n0",)
        )
        dt = DtFsc(
            1, 0, (action_tree,), (trans_tree,),
            action_dists=(((0, 0.25), (1, 0.75)),),
        )
        overrides = action_leaf_overrides(dt, line.actions)
        text = tree_to_dot(action_tree, leaf_overrides=overrides)
        assert "0.250:left, 0.750:right" in text
