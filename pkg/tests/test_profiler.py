import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import variantsim as vs
from variantsim.profiler import Hyperparams, make_dataset
from variantsim.synthetic import profiler_benchmark, pure_noise_dataset


def constant_dataset(n=40, value=70_000.0):
    rng = np.random.default_rng(0)
    return make_dataset(
        features={"algorithm": rng.choice(["haar", "lbp"], n).tolist(),
                  "cpu_load": rng.uniform(0, 1, n)},
        target_us=[value] * n,
    )


def one_split_dataset(n=200, seed=0):
    rng = np.random.default_rng(seed)
    algo = rng.choice(["haar", "lbp"], n)
    duration = np.where(algo == "haar", 100_000.0, 50_000.0)
    return make_dataset(
        features={"algorithm": algo.tolist(), "cpu_load": rng.uniform(0, 1, n)},
        target_us=duration,
    )


def slope_dataset(n=2000, seed=0):
    rng = np.random.default_rng(seed)
    neighbors = rng.integers(1, 11, n).astype(float)
    noise = rng.lognormal(mean=0.0, sigma=0.02, size=n)
    duration = 20_000.0 * neighbors * noise
    return make_dataset(features={"min_neighbors": neighbors}, target_us=duration)


class TestFit:
    def test_constant_target_is_single_leaf(self):
        model = vs.fit(constant_dataset())
        assert model.root.is_leaf
        assert model.root.value == pytest.approx(70_000.0)

    def test_recovers_single_categorical_split(self):
        model = vs.fit(one_split_dataset())
        assert model.depth() == 1
        root = model.root
        assert root.feature == "algorithm"
        leaf_values = sorted((root.left.value, root.right.value))
        assert leaf_values[0] == pytest.approx(50_000.0)
        assert leaf_values[1] == pytest.approx(100_000.0)

    def test_monotone_slope_reaches_high_train_r2(self):
        dataset = slope_dataset()
        model = vs.fit(dataset, Hyperparams(max_depth=6))
        r2 = vs.r2_score(vs.predict(model, dataset), dataset.target_us)
        assert r2 >= 0.95
        # predictions follow the slope direction
        low = vs.predict_one(model, {"min_neighbors": 1.0})
        high = vs.predict_one(model, {"min_neighbors": 10.0})
        assert low < high

    def test_too_small_dataset_rejected(self):
        data = one_split_dataset(n=6)
        with pytest.raises(ValueError):
            vs.fit(data, Hyperparams(min_samples_leaf=4))

    def test_min_samples_leaf_respected(self):
        dataset = one_split_dataset(n=40)
        model = vs.fit(dataset, Hyperparams(max_depth=8, min_samples_leaf=5))

        def walk(node):
            if node.is_leaf:
                assert node.n >= 5
                return
            walk(node.left)
            walk(node.right)

        walk(model.root)

    def test_deeper_never_hurts_train_r2(self):
        dataset = profiler_benchmark(rows=1500, seed=4)
        previous = -math.inf
        for depth in (1, 2, 4, 6, 8):
            model = vs.fit(dataset, Hyperparams(max_depth=depth))
            r2 = vs.r2_score(vs.predict(model, dataset), dataset.target_us)
            assert r2 >= previous - 1e-12
            previous = r2

    def test_determinism(self):
        dataset = profiler_benchmark(rows=800, seed=5)
        a = vs.fit(dataset, Hyperparams(max_depth=5), seed=9)
        b = vs.fit(dataset, Hyperparams(max_depth=5), seed=9)
        assert a == b


class TestPredict:
    def test_single_leaf_always_predicts_leaf_value(self):
        model = vs.fit(constant_dataset())
        assert vs.predict_one(model, {"algorithm": "haar", "cpu_load": 0.5}) == pytest.approx(70_000.0)

    def test_depth_one_routing(self):
        model = vs.fit(one_split_dataset())
        assert vs.predict_one(model, {"algorithm": "haar", "cpu_load": 0.1}) == pytest.approx(100_000.0)
        assert vs.predict_one(model, {"algorithm": "lbp", "cpu_load": 0.1}) == pytest.approx(50_000.0)

    def test_unseen_category_routes_to_majority_child(self):
        dataset = one_split_dataset()
        model = vs.fit(dataset)
        haar_rows = int(np.sum(dataset.features["algorithm"] == "haar"))
        majority = 100_000.0 if haar_rows >= dataset.n - haar_rows else 50_000.0
        assert vs.predict_one(model, {"algorithm": "surf", "cpu_load": 0.2}) == pytest.approx(majority)

    def test_missing_feature_rejected(self):
        model = vs.fit(one_split_dataset())
        with pytest.raises(ValueError, match="missing feature"):
            vs.predict_one(model, {"cpu_load": 0.5})

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_predictions_bounded_by_training_targets(self, seed):
        dataset = profiler_benchmark(rows=300, seed=seed)
        model = vs.fit(dataset, Hyperparams(max_depth=4))
        predictions = vs.predict(model, dataset)
        assert predictions.min() >= model.target_min_us
        assert predictions.max() <= model.target_max_us


class TestR2Score:
    def test_perfect(self):
        assert vs.r2_score([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 1.0

    def test_mean_prediction_scores_zero(self):
        assert vs.r2_score([2.0, 2.0, 2.0], [1.0, 2.0, 3.0]) == 0.0

    def test_half(self):
        assert vs.r2_score([1.0, 2.0, 4.0], [1.0, 2.0, 3.0]) == 0.5

    def test_constant_actual_is_undefined(self):
        assert math.isnan(vs.r2_score([1.0, 2.0], [5.0, 5.0]))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            vs.r2_score([1.0], [1.0, 2.0])


class TestFeatureImportance:
    def test_single_leaf_has_empty_ranking(self):
        model = vs.fit(constant_dataset())
        assert vs.feature_importance(model) == []

    def test_single_split_concentrates_importance(self):
        model = vs.fit(one_split_dataset())
        ranking = vs.feature_importance(model)
        assert ranking[0] == ("algorithm", 1.0)
        assert dict(ranking)["cpu_load"] == 0.0

    def test_importances_sum_to_one(self):
        dataset = profiler_benchmark(rows=2000, seed=2)
        model = vs.fit(dataset)
        ranking = vs.feature_importance(model)
        assert sum(v for _, v in ranking) == pytest.approx(1.0)
        assert [v for _, v in ranking] == sorted((v for _, v in ranking), reverse=True)

    def test_dominant_generator_term_ranks_first(self):
        dataset = profiler_benchmark(rows=3000, seed=6)
        model = vs.fit(dataset)
        ranking = vs.feature_importance(model)
        assert ranking[0][0] == "algorithm"


class TestTrainTestEvaluate:
    def test_noiseless_split_generalizes_perfectly(self):
        result = vs.train_test_evaluate(one_split_dataset(), 0.5, Hyperparams(max_depth=2), seed=0)
        assert result.test_r2 == pytest.approx(1.0)

    def test_benchmark_scores_high(self):
        dataset = profiler_benchmark(rows=5000, seed=1)
        result = vs.train_test_evaluate(dataset, 0.7, Hyperparams(max_depth=6), seed=1)
        assert result.test_r2 >= 0.95
        assert result.importance[0][0] == "algorithm"

    def test_pure_noise_fails_to_generalize(self):
        for seed in range(20):
            dataset = pure_noise_dataset(rows=1500, seed=seed)
            result = vs.train_test_evaluate(dataset, 0.7, Hyperparams(max_depth=6), seed=seed)
            assert result.test_r2 < 0.3

    def test_degenerate_split_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            vs.train_test_evaluate(one_split_dataset(n=20), 0.95, seed=0)

    def test_bad_fraction_rejected(self):
        with pytest.raises(ValueError):
            vs.train_test_evaluate(one_split_dataset(), 1.5, seed=0)


class TestDatasetCsv:
    def test_roundtrip(self, tmp_path):
        dataset = profiler_benchmark(rows=100, seed=3)
        path = tmp_path / "bench.csv"
        vs.write_dataset_csv(dataset, path)
        loaded = vs.read_dataset_csv(path)
        assert loaded.schema == dataset.schema
        assert np.allclose(loaded.target_us, dataset.target_us, rtol=1e-5)
        assert loaded.features["algorithm"].tolist() == dataset.features["algorithm"].tolist()

    def test_schema_header_format(self, tmp_path):
        dataset = profiler_benchmark(rows=10, seed=3)
        path = tmp_path / "bench.csv"
        vs.write_dataset_csv(dataset, path)
        header = path.read_text().splitlines()[0]
        assert header == (
            "algorithm:categorical,scale_factor:numeric,min_neighbors:numeric,"
            "cpu_load:numeric,duration_us:target"
        )

    def test_missing_target_column_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a:numeric,b:numeric\n1,2\n")
        with pytest.raises(ValueError, match="target"):
            vs.read_dataset_csv(path)
