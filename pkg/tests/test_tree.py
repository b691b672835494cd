"""Entropy, split search, induction, pruning, prediction, serialization."""
import json
import math
from statistics import NormalDist

import numpy as np
import pytest
from hypothesis import given, strategies as st

from solvgrade.tree import (
    Leaf,
    Split,
    TreeParams,
    best_numeric_split,
    build,
    entropy,
    node_count,
    predict_distribution,
    prune_pessimistic,
    tree_depth,
    tree_from_doc,
    tree_to_doc,
)

from helpers import make_dataset, naive_best_split, random_dataset


class TestEntropy:
    def test_balanced_binary_is_one_bit(self):
        assert entropy([5, 5]) == 1.0

    def test_pure_is_zero(self):
        assert entropy([10, 0, 0, 0]) == 0.0

    def test_one_three_split(self):
        assert entropy([1, 3]) == pytest.approx(0.8113, abs=1e-4)

    @pytest.mark.parametrize("k", [2, 3, 4, 7, 16])
    def test_uniform_is_log2_k(self, k):
        assert entropy([6] * k) == pytest.approx(math.log2(k), abs=1e-12)

    def test_rejects_all_zero_and_negative(self):
        with pytest.raises(ValueError):
            entropy([0, 0])
        with pytest.raises(ValueError):
            entropy([3, -1])
        with pytest.raises(ValueError):
            entropy([])

    @given(st.lists(st.integers(0, 50), min_size=1, max_size=8).filter(lambda c: sum(c) > 0))
    def test_bounds(self, counts):
        h = entropy(counts)
        assert -1e-12 <= h <= math.log2(len(counts)) + 1e-12


class TestBestNumericSplit:
    def test_clean_separation(self):
        ds = make_dataset([[1.0], [2.0], [3.0], [4.0]], [0, 0, 1, 1])
        cand = best_numeric_split(ds, 0)
        assert cand.threshold == 2.5
        assert cand.info_gain == pytest.approx(1.0, abs=1e-12)
        assert cand.gain_ratio == pytest.approx(1.0, abs=1e-12)

    def test_constant_attribute_has_no_split(self):
        ds = make_dataset([[4.0]] * 6, [0, 0, 0, 1, 1, 1])
        assert best_numeric_split(ds, 0) is None

    def test_pure_labels_have_no_split(self):
        ds = make_dataset([[1.0], [2.0]], [0, 0], n_classes=2)
        assert best_numeric_split(ds, 0) is None

    def test_min_size_filters_candidates(self):
        # best unconstrained cut isolates the lone class-1 instance
        ds = make_dataset([[1.0], [2.0], [3.0], [4.0]], [1, 0, 0, 0])
        assert best_numeric_split(ds, 0).threshold == 1.5
        constrained = best_numeric_split(ds, 0, min_size=2)
        assert constrained is None or constrained.threshold != 1.5

    def test_threshold_is_midpoint_of_distinct_values(self):
        ds = make_dataset([[1.0], [1.0], [5.0], [5.0]], [0, 0, 1, 1])
        assert best_numeric_split(ds, 0).threshold == 3.0

    def test_matches_naive_enumeration_on_random_data(self):
        rng = np.random.default_rng(40)
        for _ in range(40):
            k = int(rng.integers(2, 5))
            n = int(rng.integers(k, 50))
            ds = random_dataset(rng, n, 1, k)
            got = best_numeric_split(ds, 0)
            want = naive_best_split(ds.x[:, 0], ds.y, k)
            if want is None:
                assert got is None
            else:
                assert got.threshold == want[0]
                assert got.info_gain == pytest.approx(want[1], abs=1e-9)
                assert got.gain_ratio == pytest.approx(want[2], abs=1e-9)


class TestBuild:
    def test_separable_pair_of_leaves(self):
        ds = make_dataset([[1.0], [2.0], [11.0], [12.0]], [0, 0, 1, 1])
        tree = build(ds, TreeParams(min_leaf=1, prune=False))
        assert isinstance(tree, Split)
        assert tree.threshold == 6.5
        assert isinstance(tree.left, Leaf) and isinstance(tree.right, Leaf)
        assert tree.left.counts.tolist() == [2.0, 0.0]
        assert tree.right.counts.tolist() == [0.0, 2.0]

    def test_single_class_collapses_to_leaf(self):
        ds = make_dataset([[1.0], [2.0], [3.0]], [1, 1, 1], n_classes=2)
        tree = build(ds, TreeParams(min_leaf=1, prune=False))
        assert isinstance(tree, Leaf)
        assert tree.counts.tolist() == [0.0, 3.0]

    def test_xor_style_general_position(self):
        # axis-aligned splits do carry gain once the four points sit in
        # general position; two levels separate the classes completely
        ds = make_dataset(
            [[1.0, 1.0], [2.0, 4.0], [3.0, 2.0], [4.0, 3.0]], [0, 1, 1, 0]
        )
        tree = build(ds, TreeParams(min_leaf=1, prune=False))
        assert tree_depth(tree) == 2
        for i in range(4):
            dist = predict_distribution(tree, ds.x[i])
            assert int(np.argmax(dist)) == ds.y[i]

    def test_every_split_child_holds_min_leaf_instances(self):
        rng = np.random.default_rng(77)
        ds = random_dataset(rng, 80, 3, 3)
        tree = build(ds, TreeParams(min_leaf=5, prune=False))

        def walk(node):
            if isinstance(node, Leaf):
                return
            for child in (node.left, node.right):
                assert child.counts.sum() >= 5
                walk(child)

        walk(tree)

    def test_unpruned_tree_memorizes_consistent_data(self):
        rng = np.random.default_rng(13)
        for _ in range(5):
            n = int(rng.integers(5, 60))
            ds = random_dataset(rng, n, 2, 3)
            tree = build(ds, TreeParams(min_leaf=1, prune=False))
            correct = sum(
                int(np.argmax(predict_distribution(tree, ds.x[i]))) == ds.y[i]
                for i in range(ds.n)
            )
            # distinct continuous values make label conflicts impossible
            assert correct == ds.n

    def test_monotone_transform_leaves_routing_unchanged(self):
        rng = np.random.default_rng(29)
        ds = random_dataset(rng, 50, 2, 3)
        x2 = ds.x.copy()
        x2[:, 0] = x2[:, 0] ** 3  # strictly monotone remap of one attribute
        ds2 = make_dataset(x2, ds.y, n_classes=3)
        params = TreeParams(min_leaf=2, prune=True)
        t1, t2 = build(ds, params), build(ds2, params)
        for i in range(ds.n):
            a = predict_distribution(t1, ds.x[i])
            b = predict_distribution(t2, ds2.x[i])
            assert np.array_equal(a, b)

    def test_empty_dataset_rejected(self):
        ds = make_dataset(np.empty((0, 1)), np.empty(0, dtype=int), n_classes=2)
        with pytest.raises(ValueError):
            build(ds)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            TreeParams(min_leaf=0)
        with pytest.raises(ValueError):
            TreeParams(confidence=0.0)
        with pytest.raises(ValueError):
            TreeParams(confidence=1.0)


def leaf(counts):
    return Leaf(np.asarray(counts, dtype=np.float64))


class TestPruning:
    def test_mixed_children_collapse(self):
        # pooled (8,2) bound beats the (4,0)+(4,2) children sum at 0.25
        tree = Split(0, 1.0, leaf([4, 0]), leaf([4, 2]), np.array([8.0, 2.0]))
        pruned = prune_pessimistic(tree, confidence=0.25)
        assert isinstance(pruned, Leaf)
        assert pruned.counts.tolist() == [8.0, 2.0]

    def test_clean_split_survives(self):
        tree = Split(0, 1.0, leaf([5, 0]), leaf([0, 5]), np.array([5.0, 5.0]))
        pruned = prune_pessimistic(tree, confidence=0.25)
        assert isinstance(pruned, Split)

    def test_children_matching_parent_majority_collapse(self):
        tree = Split(0, 1.0, leaf([6, 1]), leaf([6, 1]), np.array([12.0, 2.0]))
        assert isinstance(prune_pessimistic(tree, confidence=0.25), Leaf)

    def test_frozen_bound_values(self):
        # upper bounds computed from the normal-approximation formula
        from solvgrade.tree import _error_upper_bound

        z = NormalDist().inv_cdf(0.75)
        assert z == pytest.approx(0.6744897501960817, abs=1e-15)
        assert 10 * _error_upper_bound(10.0, 2.0, z) == pytest.approx(2.9751, abs=1e-4)
        assert 4 * _error_upper_bound(4.0, 0.0, z) == pytest.approx(0.4085, abs=1e-4)
        assert 6 * _error_upper_bound(6.0, 2.0, z) == pytest.approx(2.8247, abs=1e-4)

    def test_never_increases_node_count(self):
        rng = np.random.default_rng(91)
        for _ in range(20):
            ds = random_dataset(rng, int(rng.integers(10, 80)), 2, 3)
            raw = build(ds, TreeParams(min_leaf=2, prune=False))
            pruned = prune_pessimistic(raw, confidence=0.25)
            assert node_count(pruned) <= node_count(raw)

    def test_confidence_validation(self):
        with pytest.raises(ValueError):
            prune_pessimistic(leaf([1, 1]), confidence=1.5)


class TestPredict:
    def test_leaf_distribution(self):
        assert predict_distribution(leaf([3, 1]), [0.0]).tolist() == [0.75, 0.25]

    def test_laplace_smoothing(self):
        dist = predict_distribution(leaf([3, 1]), [0.0], laplace=True)
        assert dist.tolist() == [4.0 / 6.0, 2.0 / 6.0]

    def test_boundary_value_routes_left(self):
        tree = Split(0, 2.5, leaf([1, 0]), leaf([0, 1]), np.array([1.0, 1.0]))
        assert predict_distribution(tree, [2.5]).tolist() == [1.0, 0.0]
        assert predict_distribution(tree, [2.5000001]).tolist() == [0.0, 1.0]

    def test_probabilities_sum_to_one(self):
        rng = np.random.default_rng(3)
        ds = random_dataset(rng, 40, 2, 4)
        tree = build(ds, TreeParams())
        for i in range(ds.n):
            dist = predict_distribution(tree, ds.x[i])
            assert dist.sum() == pytest.approx(1.0, abs=1e-9)
            assert (dist >= 0).all()


class TestSerialization:
    def test_round_trip_is_bit_exact(self):
        rng = np.random.default_rng(55)
        ds = random_dataset(rng, 60, 3, 4)
        tree = build(ds, TreeParams(min_leaf=2, prune=True))
        doc = tree_to_doc(tree, ds.schema)
        # through actual JSON text, as the model file would store it
        again = tree_from_doc(json.loads(json.dumps(doc)), ds.schema)

        def same(a, b):
            if isinstance(a, Leaf):
                assert isinstance(b, Leaf)
                assert a.counts.tolist() == b.counts.tolist()
                return
            assert isinstance(b, Split)
            assert a.attribute == b.attribute
            assert a.threshold == b.threshold  # bit-exact float
            assert a.counts.tolist() == b.counts.tolist()
            same(a.left, b.left)
            same(a.right, b.right)

        same(tree, again)

    def test_attribute_stored_by_name(self):
        ds = make_dataset([[1.0, 5.0], [2.0, 6.0]], [0, 1])
        tree = build(ds, TreeParams(min_leaf=1, prune=False))
        doc = tree_to_doc(tree, ds.schema)
        assert doc["kind"] == "split"
        assert doc["attribute"] in ("a0", "a1")

    def test_unknown_kind_rejected(self):
        ds = make_dataset([[1.0]], [0], n_classes=2)
        with pytest.raises(ValueError):
            tree_from_doc({"kind": "forest"}, ds.schema)
