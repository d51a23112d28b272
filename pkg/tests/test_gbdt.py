import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from canopyboost.gbdt import (
    WEIGHTED_MULTICLASS,
    WEIGHTED_RMSE,
    ClassProbabilities,
    GbdtHyperparams,
    GbdtModel,
    HeightClassifier,
    ObliviousBoostingClassifier,
    ObliviousBoostingRegressor,
    ObliviousTree,
    QuantileBinner,
    QuantizationMap,
    TrainingSet,
    class_weights,
    find_best_oblivious_split,
    gradients,
    load_model,
    loss_weighted_multiclass,
    loss_weighted_rmse,
    model_from_dict,
    model_to_dict,
    predict,
    quantize_labels,
    save_model,
    train,
)
from canopyboost.gbdt.boosting import _pack_stats

FOUR_X = np.array([[0.0], [1.0], [2.0], [3.0]])
FOUR_Y = np.array([0.0, 0.0, 1.0, 1.0])


def regression_data(n=400, m=5, seed=0, noise=0.1):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, m))
    y = np.sin(X[:, 0]) + 0.5 * X[:, 1] ** 2 - X[:, 2] + noise * rng.standard_normal(n)
    return X, y


def hp(**kw):
    base = dict(num_trees=1, depth=1, learning_rate=1.0, min_samples_leaf=1, early_stopping_rounds=None)
    base.update(kw)
    return GbdtHyperparams(**base)


# ------------------------------------------------------------------ losses


class TestLosses:
    def test_rmse_exact_fit(self):
        assert loss_weighted_rmse([1, 2, 3], [1, 2, 3]) == 0.0

    def test_rmse_weighted(self):
        assert loss_weighted_rmse([0, 3], [0, 0], [1, 3]) == pytest.approx(math.sqrt(27 / 4), abs=1e-12)
        assert loss_weighted_rmse([0, 3], [0, 0], [1, 3]) == pytest.approx(2.5981, abs=1e-4)

    def test_rmse_uniform_weights(self):
        rng = np.random.default_rng(1)
        p, t = rng.standard_normal(20), rng.standard_normal(20)
        assert loss_weighted_rmse(p, t, np.full(20, 7.0)) == pytest.approx(np.sqrt(np.mean((p - t) ** 2)))

    def test_rmse_zero_weights(self):
        with pytest.raises(ValueError, match="zero"):
            loss_weighted_rmse([1.0], [0.0], [0.0])

    def test_multiclass_uniform(self):
        assert loss_weighted_multiclass([[0.0, 0.0]], [0]) == pytest.approx(math.log(2))

    def test_multiclass_large_margin(self):
        assert loss_weighted_multiclass([[800.0, 0.0, 0.0]], [0]) < 1e-12

    def test_multiclass_zero_weight_excluded(self):
        logits = np.array([[0.3, -1.0, 2.0], [5.0, 1.0, 0.0]])
        both = loss_weighted_multiclass(logits, [2, 1], [1.0, 0.0])
        assert both == pytest.approx(loss_weighted_multiclass(logits[:1], [2]))

    def test_multiclass_zero_weights(self):
        with pytest.raises(ValueError):
            loss_weighted_multiclass([[0.0, 0.0]], [0], [0.0])

    def test_regression_gradient_is_negative_residual(self):
        g, h = gradients(WEIGHTED_RMSE, np.zeros((2, 1)), np.array([1.0, -1.0]))
        np.testing.assert_array_equal(-g[:, 0], [1.0, -1.0])
        np.testing.assert_array_equal(h[:, 0], [1.0, 1.0])

    def test_multiclass_gradient_uniform(self):
        g, _ = gradients(WEIGHTED_MULTICLASS, np.zeros((1, 3)), np.array([0]))
        np.testing.assert_allclose(g[0], [-2 / 3, 1 / 3, 1 / 3], atol=1e-15)

    def test_unknown_loss(self):
        with pytest.raises(ValueError):
            gradients("Huber", np.zeros((1, 1)), np.zeros(1))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 8))
    def test_multiclass_finite_difference(self, seed, t):
        rng = np.random.default_rng(seed)
        logits = rng.standard_normal((1, t)) * 2
        label = int(rng.integers(t))
        w = float(rng.uniform(0.1, 3.0))
        g, _ = gradients(WEIGHTED_MULTICLASS, logits, np.array([label]), np.array([w]))
        step = 1e-4
        for k in range(t):
            e = np.zeros_like(logits)
            e[0, k] = step
            up = w * loss_weighted_multiclass(logits + e, [label])
            down = w * loss_weighted_multiclass(logits - e, [label])
            assert abs(g[0, k] - (up - down) / (2 * step)) < 1e-6

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_regression_finite_difference(self, seed):
        rng = np.random.default_rng(seed)
        f, t, w = rng.standard_normal(3)
        w = abs(w) + 0.1
        g, _ = gradients(WEIGHTED_RMSE, np.array([[f]]), np.array([t]), np.array([w]))

        def half_sq(v):
            return 0.5 * w * (v - t) ** 2

        step = 1e-4
        assert abs(g[0, 0] - (half_sq(f + step) - half_sq(f - step)) / (2 * step)) < 1e-6


class TestProbabilities:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 100))
    def test_normalized(self, seed, t):
        logits = np.random.default_rng(seed).standard_normal((5, t)) * 30
        p = ClassProbabilities.from_logits(logits).probabilities
        assert np.all((p >= 0) & (p <= 1))
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-9)


class TestQuantization:
    def test_sixty_one_classes(self):
        labels, q = quantize_labels([0.0, 60.0], 1.0)
        assert q.n_classes == 61 and q.origin == 0.0
        assert q.classes(12.7) == 12
        assert q.heights(12) == 12.5
        np.testing.assert_array_equal(labels, [0, 60])

    def test_single_class_rejected(self):
        with pytest.raises(ValueError, match="2 classes"):
            quantize_labels([3.0, 4.0], 10.0)

    def test_empty(self):
        with pytest.raises(ValueError, match="empty"):
            quantize_labels([], 1.0)

    def test_non_positive_width(self):
        with pytest.raises(ValueError):
            quantize_labels([0.0, 5.0], 0.0)

    def test_height_range_clamps(self):
        labels, q = quantize_labels([-3.0, 10.0, 75.0], 1.0, height_range=(0.0, 60.0))
        assert q.n_classes == 61
        np.testing.assert_array_equal(labels, [0, 10, 60])

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-100, 100, allow_nan=False), min_size=2, max_size=50),
           st.floats(0.05, 5.0))
    def test_roundtrip_error(self, heights, width):
        h = np.asarray(heights)
        if math.floor((h.max() - math.floor(h.min() / width) * width) / width) < 1:
            return
        labels, q = quantize_labels(h, width)
        assert np.all(np.abs(q.heights(labels) - h) <= width / 2 + 1e-9)

    def test_map_invariants(self):
        with pytest.raises(ValueError):
            QuantizationMap(0.0, -1.0, 5)
        with pytest.raises(ValueError):
            QuantizationMap(0.0, 1.0, 1)


class TestClassWeights:
    def test_example(self):
        np.testing.assert_allclose(class_weights([0, 0, 0, 1], 2), [2 / 3, 2 / 3, 2 / 3, 2])

    def test_balanced(self):
        np.testing.assert_array_equal(class_weights([0, 1, 2, 0, 1, 2], 3), np.ones(6))

    def test_single_class(self):
        np.testing.assert_array_equal(class_weights([1, 1, 1], 2), np.full(3, 0.5))


# ------------------------------------------------------------------ binning


class TestBinning:
    def test_few_distinct_values_get_own_bins(self):
        b = QuantileBinner(255).fit(FOUR_X)
        np.testing.assert_array_equal(b.transform(FOUR_X)[0], [0, 1, 2, 3])
        np.testing.assert_allclose(b.thresholds_[0], [0.5, 1.5, 2.5])

    def test_equal_frequency(self):
        X = np.arange(1000.0)[:, None]
        counts = np.bincount(QuantileBinner(10).fit_transform(X)[0])
        assert counts.size == 10 and np.all(counts == 100)

    def test_constant_column(self):
        b = QuantileBinner(8).fit(np.ones((5, 1)))
        assert b.n_bins_[0] == 1
        assert np.all(b.transform(np.ones((5, 1))) == 0)

    def test_bins_limit(self):
        b = QuantileBinner(255).fit(np.random.default_rng(0).standard_normal((5000, 2)))
        assert np.all(b.n_bins_ <= 255)
        with pytest.raises(ValueError):
            QuantileBinner(300).fit(np.zeros((3, 1)))

    def test_feature_count_checked(self):
        b = QuantileBinner(4).fit(np.zeros((3, 2)))
        with pytest.raises(ValueError, match="features"):
            b.transform(np.zeros((3, 3)))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 64))
    def test_monotone_transform_invariance(self, seed, bins):
        x = np.random.default_rng(seed).uniform(-3, 3, (300, 1))
        a = QuantileBinner(bins).fit_transform(x)
        b = QuantileBinner(bins).fit_transform(np.exp(2 * x) + 5)
        np.testing.assert_array_equal(a, b)


# ------------------------------------------------------------------ splits


def brute_force_split(X, residual):
    """Exhaustive depth-1 search, squared-error reduction, ties to lowest (feature, threshold)."""
    best = None
    total = residual.sum() ** 2 / residual.size
    for f in range(X.shape[1]):
        values = np.unique(X[:, f])
        for k, v in enumerate(values[:-1]):
            left = X[:, f] <= v
            gain = (residual[left].sum() ** 2 / left.sum()
                    + residual[~left].sum() ** 2 / (~left).sum() - total)
            if gain > 1e-12 and (best is None or gain > best[2] * (1 + 1e-9)):
                best = (f, k, gain)
    return best


def split_on(X, residual, l2=0.0):
    binner = QuantileBinner(255).fit(X)
    stats = _pack_stats(-residual[:, None], np.ones((residual.size, 1)))
    return find_best_oblivious_split(binner.transform(X), binner.n_bins_,
                                     np.zeros(len(X), dtype=np.int64), stats, 1, l2_reg=l2)


class TestSplit:
    def test_four_point_example(self):
        f, b, gain = split_on(FOUR_X, np.array([-0.5, -0.5, 0.5, 0.5]))
        assert (f, b) == (0, 1)
        assert gain == pytest.approx(1.0)
        assert QuantileBinner(255).fit(FOUR_X).thresholds_[0][b] == 1.5

    def test_constant_feature_never_chosen(self):
        X = np.column_stack([np.ones(4), FOUR_X[:, 0]])
        f, _, _ = split_on(X, np.array([-0.5, -0.5, 0.5, 0.5]))
        assert f == 1

    def test_no_valid_split(self):
        assert split_on(np.ones((4, 1)), np.array([-1.0, 1.0, 2.0, 0.0])) is None

    def test_tie_goes_to_lowest_feature(self):
        X = np.column_stack([FOUR_X[:, 0], FOUR_X[:, 0] * 10])
        f, _, _ = split_on(X, np.array([-0.5, -0.5, 0.5, 0.5]))
        assert f == 0

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 64), st.integers(1, 4), st.booleans())
    def test_matches_brute_force(self, seed, n, m, discrete):
        rng = np.random.default_rng(seed)
        X = rng.integers(0, 5, (n, m)).astype(float) if discrete else rng.standard_normal((n, m))
        residual = rng.standard_normal(n)
        ours = split_on(X, residual)
        oracle = brute_force_split(X, residual)
        if oracle is None:
            assert ours is None or ours[2] < 1e-9
            return
        assert ours is not None
        assert (ours[0], ours[1]) == oracle[:2]
        assert ours[2] == pytest.approx(oracle[2], rel=1e-9)


# ------------------------------------------------------------------ training


class TestTrain:
    def test_constant_targets(self):
        X, _ = regression_data(50)
        m = train(TrainingSet(X, np.full(50, 7.25)), hp=hp(num_trees=5, depth=3))
        np.testing.assert_array_equal(predict(m, X), np.full(50, 7.25))

    def test_four_point_hand_trace(self):
        m = train(TrainingSet(FOUR_X, FOUR_Y), hp=hp())
        assert len(m.trees) == 1
        tree = m.trees[0]
        assert tree.features.tolist() == [0] and tree.thresholds.tolist() == [1.5]
        np.testing.assert_allclose(tree.leaf_values[:, 0], [-0.5, 0.5])
        np.testing.assert_allclose(predict(m, FOUR_X), FOUR_Y, atol=1e-15)
        assert loss_weighted_rmse(predict(m, FOUR_X), FOUR_Y) < 1e-15

    def test_zero_trees_predicts_base(self):
        m = GbdtModel(np.array([3.0]), [], n_features=2)
        np.testing.assert_array_equal(predict(m, np.zeros((4, 2))), np.full(4, 3.0))

    def test_weighted_base_score(self):
        X = np.zeros((2, 1))
        m = train(TrainingSet(X, [0.0, 4.0], [3.0, 1.0]), hp=hp(num_trees=1))
        assert m.base_score[0] == pytest.approx(1.0)

    def test_training_loss_monotone(self):
        X, y = regression_data(600)
        history = []
        train(TrainingSet(X, y), hp=GbdtHyperparams(num_trees=80, depth=4, early_stopping_rounds=None),
              history=history)
        assert len(history) == 80
        assert np.all(np.diff(history) <= 1e-9)

    def test_beats_baseline(self):
        X, y = regression_data(1500)
        Xv, yv = regression_data(500, seed=1)
        m = train(TrainingSet(X, y), TrainingSet(Xv, yv), GbdtHyperparams(num_trees=200, depth=6))
        assert loss_weighted_rmse(predict(m, Xv), yv) < 0.5 * yv.std()

    def test_early_stopping_keeps_best_prefix(self):
        X, y = regression_data(300, noise=2.0)
        Xv, yv = regression_data(300, seed=5, noise=2.0)
        m = train(TrainingSet(X, y), TrainingSet(Xv, yv),
                  GbdtHyperparams(num_trees=400, depth=6, learning_rate=0.5, early_stopping_rounds=5,
                                  min_samples_leaf=1))
        assert 0 < len(m.trees) < 400
        losses = [loss_weighted_rmse(m.raw_predict(Xv, k)[:, 0], yv) for k in range(len(m.trees) + 1)]
        assert np.argmin(losses) == len(m.trees)

    def test_min_samples_leaf_respected(self):
        X, y = regression_data(200)
        m = train(TrainingSet(X, y), hp=GbdtHyperparams(num_trees=10, depth=6, min_samples_leaf=30,
                                                       early_stopping_rounds=None))
        for tree in m.trees:
            leaves, counts = np.unique(tree.leaf_index(X), return_counts=True)
            # frozen subtrees share one value; group leaves by value before counting
            by_value = {}
            for leaf, c in zip(leaves, counts):
                by_value[tree.leaf_values[leaf, 0]] = by_value.get(tree.leaf_values[leaf, 0], 0) + c
            assert min(by_value.values()) >= 30

    def test_shrinkage_identity(self):
        X, y = regression_data(300)
        m = train(TrainingSet(X, y), hp=GbdtHyperparams(num_trees=20, depth=4, learning_rate=0.3,
                                                       early_stopping_rounds=None))
        c = 4.0
        scaled = GbdtModel(m.base_score, [ObliviousTree(t.features, t.thresholds, t.leaf_values * c)
                                          for t in m.trees], m.learning_rate / c, m.loss, m.n_features)
        np.testing.assert_allclose(predict(scaled, X), predict(m, X), atol=1e-12)

    def test_monotone_transform_gives_same_model(self):
        X, y = regression_data(300)
        h = GbdtHyperparams(num_trees=15, depth=4, early_stopping_rounds=None)
        a = train(TrainingSet(X, y), hp=h)
        X2 = X.copy()
        X2[:, 1] = np.exp(X2[:, 1])
        b = train(TrainingSet(X2, y), hp=h)
        np.testing.assert_array_equal(a.raw_predict(X), b.raw_predict(X2))
        for ta, tb in zip(a.trees, b.trees):
            np.testing.assert_array_equal(ta.features, tb.features)
            np.testing.assert_array_equal(ta.leaf_values, tb.leaf_values)

    @pytest.mark.parametrize("threads", [1, 2])
    def test_deterministic(self, threads):
        X, y = regression_data(500)
        h = GbdtHyperparams(num_trees=20, depth=5, subsample=0.7, seed=11, early_stopping_rounds=None)
        a = train(TrainingSet(X, y), hp=h, n_threads=1)
        b = train(TrainingSet(X, y), hp=h, n_threads=threads)
        assert model_to_dict(a) == model_to_dict(b)

    def test_seed_changes_subsample(self):
        X, y = regression_data(500)
        h = GbdtHyperparams(num_trees=5, depth=4, subsample=0.5, early_stopping_rounds=None)
        a = train(TrainingSet(X, y), hp=h)
        b = train(TrainingSet(X, y), hp=GbdtHyperparams(**{**h.__dict__, "seed": 1}))
        assert model_to_dict(a) != model_to_dict(b)

    def test_multiclass_vector_leaves(self):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((600, 3))
        labels = (X[:, 0] > 0).astype(int) + (X[:, 1] > 0.5).astype(int)
        m = train(TrainingSet(X, labels), hp=GbdtHyperparams(num_trees=30, depth=3,
                                                             loss=WEIGHTED_MULTICLASS,
                                                             early_stopping_rounds=None))
        assert m.n_outputs == 3
        assert all(t.leaf_values.shape == (8, 3) for t in m.trees)
        np.testing.assert_array_equal(m.base_score, np.zeros(3))
        heights, probs = predict(m, X)
        assert np.mean(heights == labels) > 0.9
        np.testing.assert_allclose(probs.probabilities.sum(axis=1), 1.0, atol=1e-9)

    def test_multiclass_history_decreases(self):
        rng = np.random.default_rng(2)
        X = rng.standard_normal((300, 2))
        labels = (X[:, 0] > 0).astype(int)
        hist = []
        train(TrainingSet(X, labels), hp=GbdtHyperparams(num_trees=20, depth=2,
                                                         loss=WEIGHTED_MULTICLASS,
                                                         early_stopping_rounds=None), history=hist)
        assert hist[-1] < hist[0] < math.log(2)

    def test_classifier_dequantizes(self):
        labels, q = quantize_labels(np.array([0.2, 0.7, 5.1, 5.9] * 20), 1.0)
        X = np.tile([[0.0], [0.0], [1.0], [1.0]], (20, 1))
        m = train(TrainingSet(X, labels), hp=GbdtHyperparams(num_trees=30, depth=1,
                                                             loss=WEIGHTED_MULTICLASS,
                                                             early_stopping_rounds=None),
                  quantization=q)
        heights, _ = predict(m, np.array([[0.0], [1.0]]))
        np.testing.assert_array_equal(heights, [0.5, 5.5])

    @pytest.mark.parametrize("kwargs", [dict(num_trees=0), dict(depth=0), dict(depth=17),
                                        dict(learning_rate=0.0), dict(learning_rate=1.5),
                                        dict(histogram_bins=1), dict(histogram_bins=257),
                                        dict(loss="L1")])
    def test_hyperparam_invariants(self, kwargs):
        with pytest.raises(ValueError):
            GbdtHyperparams(**kwargs)

    def test_leaf_l2_defaults(self):
        assert GbdtHyperparams().leaf_l2 == 0.0
        assert GbdtHyperparams(loss=WEIGHTED_MULTICLASS).leaf_l2 == 1e-3

    @pytest.mark.parametrize("make", [
        lambda: TrainingSet(np.zeros((3, 2)), np.zeros(2)),
        lambda: TrainingSet(np.zeros(3), np.zeros(3)),
        lambda: TrainingSet(np.zeros((2, 1)), [0.0, np.nan]),
        lambda: TrainingSet(np.zeros((2, 1)), [0.0, 1.0], [1.0, -1.0]),
    ])
    def test_training_set_invariants(self, make):
        with pytest.raises(ValueError):
            make()

    def test_errors(self):
        with pytest.raises(ValueError, match="two samples"):
            train(TrainingSet(np.zeros((1, 1)), [1.0]))
        with pytest.raises(ValueError, match="zero"):
            train(TrainingSet(np.zeros((2, 1)), [1.0, 2.0], [0.0, 0.0]))

    def test_predict_dimension_mismatch(self):
        m = train(TrainingSet(FOUR_X, FOUR_Y), hp=hp())
        with pytest.raises(ValueError, match="length 1"):
            predict(m, np.zeros((2, 3)))

    def test_predict_single_vector(self):
        m = train(TrainingSet(FOUR_X, FOUR_Y), hp=hp())
        assert predict(m, np.array([2.5])) == pytest.approx(1.0)


class TestTree:
    def test_leaf_bit_order(self):
        t = ObliviousTree([0, 1], [0.5, 0.5], np.arange(4.0))
        X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
        np.testing.assert_array_equal(t.leaf_index(X), [0, 1, 2, 3])

    def test_leaf_count_checked(self):
        with pytest.raises(ValueError, match="2\\*\\*depth"):
            ObliviousTree([0, 1], [0.0, 0.0], np.zeros(3))

    def test_feature_bound_checked(self):
        with pytest.raises(ValueError, match="n_features"):
            GbdtModel(np.zeros(1), [ObliviousTree([3], [0.0], np.zeros(2))], n_features=2)


# ------------------------------------------------------------------ model files


class TestModelIo:
    def test_regression_roundtrip(self, tmp_path):
        X, y = regression_data(300)
        m = train(TrainingSet(X, y), hp=GbdtHyperparams(num_trees=25, depth=4, early_stopping_rounds=None))
        save_model(m, tmp_path / "m.json")
        back = load_model(tmp_path / "m.json")
        assert predict(back, X).tobytes() == predict(m, X).tobytes()
        assert (tmp_path / "m.json").read_text().count("\n") == 1

    def test_classifier_roundtrip(self, tmp_path):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((200, 2))
        labels, q = quantize_labels(rng.uniform(0, 4, 200) + 3 * (X[:, 0] > 0), 1.0)
        m = train(TrainingSet(X, labels), hp=GbdtHyperparams(num_trees=5, depth=2, loss=WEIGHTED_MULTICLASS,
                                                             early_stopping_rounds=None), quantization=q)
        save_model(m, tmp_path / "c.json")
        back = load_model(tmp_path / "c.json")
        assert back.quantization == q
        assert back.raw_predict(X).tobytes() == m.raw_predict(X).tobytes()

    def test_bad_version(self):
        doc = model_to_dict(GbdtModel(np.zeros(1), [], n_features=1))
        doc["format_version"] = 99
        with pytest.raises(ValueError, match="format_version"):
            model_from_dict(doc)


# ------------------------------------------------------------------ estimators


class TestEstimators:
    def test_regressor(self):
        X, y = regression_data(800)
        r = ObliviousBoostingRegressor(n_estimators=100, depth=4).fit(X, y)
        assert r.score(X, y) > 0.9
        assert r.n_trees_ == 100 and len(r.history_) == 100

    def test_regressor_eval_set(self):
        X, y = regression_data(400, noise=2.0)
        Xv, yv = regression_data(200, seed=9, noise=2.0)
        r = ObliviousBoostingRegressor(n_estimators=300, learning_rate=0.5, early_stopping_rounds=5)
        r.fit(X, y, eval_set=(Xv, yv))
        assert r.n_trees_ < 300

    def test_clone(self):
        r = ObliviousBoostingRegressor(depth=3, random_state=5)
        c = clone(r)
        assert c.get_params() == r.get_params()

    def test_classifier_labels(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((400, 2))
        y = np.where(X[:, 0] > 0, "tall", "short")
        c = ObliviousBoostingClassifier(n_estimators=40, depth=2).fit(X, y)
        assert set(c.predict(X)) <= {"tall", "short"}
        assert c.score(X, y) > 0.95
        np.testing.assert_allclose(c.predict_proba(X).sum(axis=1), 1.0)

    def test_classifier_needs_two_classes(self):
        with pytest.raises(ValueError):
            ObliviousBoostingClassifier().fit(np.zeros((3, 1)), [1, 1, 1])

    def test_height_classifier_bin_centers(self):
        rng = np.random.default_rng(4)
        X = rng.uniform(0, 60, (3000, 1))
        y = X[:, 0] + rng.normal(0, 0.2, 3000)
        c = HeightClassifier(n_estimators=60, depth=6, height_range=(0, 60)).fit(X, y)
        assert c.quantization_.n_classes == 61
        pred = c.predict(X)
        assert np.all(np.isin(pred, np.arange(61) + 0.5))
        assert np.sqrt(np.mean((pred - y) ** 2)) < 3.0

    def test_feature_count_checked(self):
        r = ObliviousBoostingRegressor(n_estimators=2).fit(*regression_data(50))
        with pytest.raises(ValueError, match="features"):
            r.predict(np.zeros((2, 3)))



def test_brute_force_oracle_sanity():
    f, k, gain = brute_force_split(FOUR_X, np.array([-0.5, -0.5, 0.5, 0.5]))
    assert (f, k) == (0, 1) and gain == pytest.approx(1.0)
