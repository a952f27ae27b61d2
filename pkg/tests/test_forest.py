"""Regression trees, forests, scoring conventions, adaptive depth."""

import time

import numpy as np
import pytest

from stratlearn.forest import (
    DataPoint,
    Dataset,
    RandomForest,
    dump_forest,
    fit_adaptive,
    fit_forest,
    fit_tree,
    load_forest,
    predict,
    r2_score,
)


def make_dataset(X, y):
    return Dataset(DataPoint(tuple(int(v) for v in row), float(c)) for row, c in zip(X, y))


def brute_force_root_split(X, y):
    """Exhaustive minimum-weighted-variance split; independent of the tree code."""
    best = None
    for feature in range(X.shape[1]):
        values = np.unique(X[:, feature])
        for low, high in zip(values, values[1:]):
            threshold = (low + high) / 2.0
            left = X[:, feature] <= threshold
            sse = np.var(y[left]) * left.sum() + np.var(y[~left]) * (~left).sum()
            if best is None or sse < best[0] - 1e-12:
                best = (sse, feature, threshold)
    return best


def route(node, row):
    while node.feature is not None:
        node = node.left if row[node.feature] <= node.threshold else node.right
    return node


XOR_DATA = make_dataset([(0, 0), (0, 1), (1, 0), (1, 1)], [0.0, 1.0, 1.0, 0.0])


class TestFitTree:
    def test_depth_zero_predicts_global_mean(self):
        data = make_dataset([(0,), (1,), (2,)], [1.0, 2.0, 6.0])
        tree = fit_tree(data, max_depth=0)
        assert tree.root.is_leaf and tree.root.value == pytest.approx(3.0)

    def test_single_point_is_a_leaf(self):
        data = make_dataset([(4, 2)], [3.5])
        tree = fit_tree(data, max_depth=5)
        assert tree.root.is_leaf and tree.root.value == 3.5

    def test_root_split_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(123)
        for _ in range(20):
            n = int(rng.integers(4, 21))
            k = int(rng.integers(1, 4))
            X = rng.integers(0, 5, size=(n, k)).astype(float)
            y = rng.normal(size=n)
            expected = brute_force_root_split(X, y)
            tree = fit_tree(make_dataset(X, y), max_depth=1)
            if expected is None:
                assert tree.root.is_leaf
                continue
            _, feature, threshold = expected
            assert tree.root.feature == feature
            assert tree.root.threshold == pytest.approx(threshold)

    def test_leaf_values_are_routed_means(self):
        rng = np.random.default_rng(5)
        X = rng.integers(0, 4, size=(30, 3)).astype(float)
        y = rng.normal(size=30)
        tree = fit_tree(make_dataset(X, y), max_depth=3)
        buckets = {}
        for row, target in zip(X, y):
            buckets.setdefault(id(route(tree.root, row)), []).append(target)
        for row in X:
            leaf = route(tree.root, row)
            assert leaf.value == pytest.approx(np.mean(buckets[id(leaf)]))
            assert leaf.count == len(buckets[id(leaf)])

    def test_bootstrap_requires_generator(self):
        data = make_dataset([(0,), (1,)], [0.0, 1.0])
        with pytest.raises(ValueError, match="generator"):
            fit_tree(data, max_depth=1, bootstrap=True)

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            fit_tree(Dataset(), max_depth=1)


class TestForest:
    def test_single_tree_no_bootstrap_equals_tree(self):
        rng = np.random.default_rng(0)
        X = rng.integers(0, 4, size=(20, 2)).astype(float)
        y = rng.normal(size=20)
        data = make_dataset(X, y)
        forest = fit_forest(data, n_trees=1, max_depth=3, seed=1, bootstrap=False)
        tree = fit_tree(data, max_depth=3)
        probe = rng.integers(0, 4, size=(50, 2)).astype(float)
        assert np.array_equal(forest.predict(probe), tree.predict(probe))

    def test_constant_costs_predict_constant_and_score_one(self):
        data = make_dataset([(0, 1), (1, 0), (2, 2), (3, 1)], [0.1, 0.1, 0.1, 0.1])
        forest = fit_forest(data, n_trees=50, max_depth=2, seed=0)
        X, _ = data.to_arrays()
        assert np.all(forest.predict(X) == 0.1)
        assert forest.training_score == 1.0

    def test_identical_seeds_identical_forests(self):
        rng = np.random.default_rng(11)
        X = rng.integers(0, 5, size=(40, 3)).astype(float)
        y = rng.normal(size=40)
        data = make_dataset(X, y)
        probe = rng.integers(0, 5, size=(100, 3)).astype(float)
        a = fit_forest(data, n_trees=10, max_depth=4, seed=7)
        b = fit_forest(data, n_trees=10, max_depth=4, seed=7)
        assert np.array_equal(a.predict(probe), b.predict(probe))
        c = fit_forest(data, n_trees=10, max_depth=4, seed=8)
        assert not np.array_equal(a.predict(probe), c.predict(probe))

    def test_mean_of_two_trees(self):
        data_low = make_dataset([(0,), (1,)], [1.0, 1.0])
        data_high = make_dataset([(0,), (1,)], [3.0, 3.0])
        t1 = fit_tree(data_low, max_depth=0)
        t2 = fit_tree(data_high, max_depth=0)
        forest = RandomForest((t1, t2), feature_width=1, trained_depth=0, training_score=0.0)
        assert predict(forest, (0,)) == 2.0

    def test_single_leaf_forest_ignores_input(self):
        data = make_dataset([(0, 0), (5, 9)], [2.0, 4.0])
        forest = fit_forest(data, n_trees=1, max_depth=0, seed=0, bootstrap=False)
        assert predict(forest, (0, 0)) == predict(forest, (99, -3)) == 3.0

    def test_saturated_tree_memorizes_distinct_points(self):
        X = np.array([[0, 0], [0, 1], [1, 0], [1, 1], [2, 2]], dtype=float)
        y = np.array([0.5, 1.5, -0.5, 2.5, 9.0])
        data = make_dataset(X, y)
        forest = fit_forest(data, n_trees=1, max_depth=10, seed=0, bootstrap=False)
        for row, target in zip(X, y):
            assert predict(forest, tuple(row)) == target

    def test_prediction_invariant_to_tree_order(self):
        rng = np.random.default_rng(3)
        X = rng.integers(0, 4, size=(25, 2)).astype(float)
        y = rng.normal(size=25)
        forest = fit_forest(make_dataset(X, y), n_trees=5, max_depth=3, seed=2)
        reversed_forest = RandomForest(
            tuple(reversed(forest.trees)), forest.feature_width,
            forest.trained_depth, forest.training_score,
        )
        probe = rng.integers(0, 4, size=(30, 2)).astype(float)
        assert np.allclose(forest.predict(probe), reversed_forest.predict(probe))

    def test_width_mismatch_rejected(self):
        data = make_dataset([(0, 1), (1, 0)], [0.0, 1.0])
        forest = fit_forest(data, n_trees=1, max_depth=1, seed=0)
        with pytest.raises(ValueError, match="width"):
            predict(forest, (0, 1, 2))

    def test_doubling_trees_roughly_doubles_time(self):
        rng = np.random.default_rng(9)
        X = rng.integers(0, 6, size=(300, 5)).astype(float)
        y = rng.normal(size=300)
        data = make_dataset(X, y)
        fit_forest(data, n_trees=5, max_depth=5, seed=0)  # warm-up
        start = time.perf_counter()
        fit_forest(data, n_trees=20, max_depth=5, seed=0)
        t_small = time.perf_counter() - start
        start = time.perf_counter()
        fit_forest(data, n_trees=40, max_depth=5, seed=0)
        t_big = time.perf_counter() - start
        assert t_big < 4.0 * t_small  # coarse linearity bound


class TestR2:
    def test_memorizing_forest_scores_one(self):
        X = np.array([[0], [1], [2], [3]], dtype=float)
        y = np.array([0.0, 2.0, -1.0, 5.0])
        forest = fit_forest(make_dataset(X, y), n_trees=1, max_depth=10, seed=0, bootstrap=False)
        assert forest.training_score == 1.0

    def test_mean_predictor_scores_zero(self):
        X = np.array([[0], [1], [2], [3]], dtype=float)
        y = np.array([0.0, 2.0, -1.0, 5.0])
        data = make_dataset(X, y)
        stump = fit_forest(data, n_trees=1, max_depth=0, seed=0, bootstrap=False)
        assert r2_score(stump, data) == 0.0

    def test_halved_residuals_score_three_quarters(self):
        X = np.array([[0], [1], [2], [3]], dtype=float)
        y = np.array([0.0, 2.0, -1.0, 5.0])
        data = make_dataset(X, y)
        memorizer = fit_tree(data, max_depth=10)
        stump = fit_tree(data, max_depth=0)
        blend = RandomForest((memorizer, stump), 1, 10, 0.0)
        assert r2_score(blend, data) == pytest.approx(0.75, abs=1e-9)


class TestAdaptiveDepth:
    def test_easy_data_stops_at_initial_depth(self):
        X = np.array([[0], [1], [2], [3]], dtype=float)
        y = np.array([0.0, 0.0, 10.0, 10.0])
        forest = fit_adaptive(make_dataset(X, y), n_trees=1, init_depth=1,
                              score_threshold=0.9, depth_cap=5, seed=0, bootstrap=False)
        assert forest.trained_depth == 1
        assert forest.training_score >= 0.9

    def test_xor_needs_depth_two(self):
        shallow = fit_forest(XOR_DATA, n_trees=1, max_depth=1, seed=0, bootstrap=False)
        assert shallow.training_score < 0.9
        forest = fit_adaptive(XOR_DATA, n_trees=1, init_depth=1,
                              score_threshold=0.9, depth_cap=4, seed=0, bootstrap=False)
        assert forest.trained_depth == 2
        assert forest.training_score >= 0.9

    def test_zero_threshold_keeps_initial_depth(self):
        forest = fit_adaptive(XOR_DATA, n_trees=1, init_depth=1,
                              score_threshold=0.0, depth_cap=4, seed=0, bootstrap=False)
        assert forest.trained_depth == 1

    def test_monotone_capacity_without_bootstrap(self):
        rng = np.random.default_rng(21)
        X = rng.integers(0, 4, size=(40, 3)).astype(float)
        y = rng.normal(size=40)
        data = make_dataset(X, y)
        scores = [
            fit_forest(data, n_trees=1, max_depth=d, seed=0, bootstrap=False).training_score
            for d in range(0, 7)
        ]
        assert all(a <= b + 1e-12 for a, b in zip(scores, scores[1:]))

    def test_depth_cap_defaults_to_feature_width(self):
        forest = fit_adaptive(XOR_DATA, n_trees=1, init_depth=1,
                              score_threshold=1.1, seed=0, bootstrap=False)
        assert forest.trained_depth == XOR_DATA.feature_width


class TestDataset:
    def test_width_is_enforced(self):
        data = Dataset([DataPoint((1, 2), 0.5)])
        with pytest.raises(ValueError, match="width"):
            data.append(DataPoint((1, 2, 3), 0.5))

    def test_cost_must_be_finite(self):
        with pytest.raises(ValueError, match="finite"):
            DataPoint((1,), float("nan"))


class TestDumpLoad:
    def test_round_trip_preserves_predictions(self, tmp_path):
        rng = np.random.default_rng(2)
        X = rng.integers(0, 4, size=(30, 3)).astype(float)
        y = rng.normal(size=30)
        forest = fit_forest(make_dataset(X, y), n_trees=4, max_depth=3, seed=5)
        path = tmp_path / "forest.txt"
        dump_forest(forest, path)
        loaded = load_forest(path)
        probe = rng.integers(0, 4, size=(50, 3)).astype(float)
        assert np.array_equal(forest.predict(probe), loaded.predict(probe))
        assert loaded.training_score == forest.training_score
        assert loaded.trained_depth == forest.trained_depth
