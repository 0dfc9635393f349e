import numpy as np
import pytest

from oracles import svm_dual_pga
from svm_asymptotics import (
    ModelSpec,
    count_boundary,
    fit_svm,
    generate_dataset,
    generate_test_set,
    load_dataset,
    save_dataset,
    solve_null,
)
from svm_asymptotics.svm import Dataset


class TestGenerateDataset:
    def test_feature_moments(self):
        m = ModelSpec.null(1.0, 1.0)
        d = generate_dataset(m, 100_000, 1, seed=0)
        assert abs(d.features.mean()) <= 4 / np.sqrt(100_000)
        assert d.features.std() == pytest.approx(1.0, abs=0.02)

    def test_null_labels(self):
        d = generate_dataset(ModelSpec.null(1.0, 1.0), 5000, 3, seed=1)
        assert set(np.unique(d.labels)) == {-1.0, 1.0}
        assert d.a0 is None

    def test_a0_norm(self):
        d = generate_dataset(ModelSpec.logistic(3, 1, 1), 10, 512, seed=2)
        assert d.a0 @ d.a0 == pytest.approx(512.0, abs=1e-8)

    def test_indicator_deterministic_labels(self):
        m = ModelSpec.indicator(0.5, 1.0)
        d = generate_dataset(m, 2000, 50, seed=3)
        signs = np.sign(d.features @ d.a0)
        assert np.array_equal(d.labels, signs)

    def test_same_seed_bitwise_identical(self):
        m = ModelSpec.logistic(3, 1, 1)
        d1 = generate_dataset(m, 64, 32, seed=7)
        d2 = generate_dataset(m, 64, 32, seed=7)
        assert np.array_equal(d1.features, d2.features)
        assert np.array_equal(d1.labels, d2.labels)
        assert np.array_equal(d1.a0, d2.a0)

    def test_test_stream_independent_of_train(self):
        m = ModelSpec.logistic(3, 1, 1)
        d = generate_dataset(m, 64, 32, seed=7)
        xt, yt = generate_test_set(m, d, 64)
        assert not np.array_equal(xt, d.features)
        xt2, yt2 = generate_test_set(m, d, 64)
        assert np.array_equal(xt, xt2) and np.array_equal(yt, yt2)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            generate_dataset(ModelSpec.null(1, 1), 0, 5, seed=0)


class TestFitSvm:
    @pytest.mark.parametrize("seed", range(6))
    def test_matches_projected_gradient_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n, p = int(rng.integers(5, 21)), int(rng.integers(2, 11))
        m = ModelSpec.null(p / n, 1.0)
        d = generate_dataset(m, n, p, seed=seed)
        lam = float(rng.uniform(0.2, 3.0))
        fit = fit_svm(d, lam, tol=1e-12)
        _, _, primal_ref, _ = svm_dual_pga(d.features, d.labels, lam)
        assert fit.primal_objective == pytest.approx(primal_ref, abs=1e-6)
        assert fit.gap <= 1e-8

    def test_duals_in_box_and_stationarity(self):
        d = generate_dataset(ModelSpec.logistic(3, 0.5, 1), 200, 100, seed=5)
        fit = fit_svm(d, 1.0, tol=1e-10)
        assert fit.converged
        assert np.all((fit.duals >= 0) & (fit.duals <= 1))
        a_rec = (fit.duals * d.labels) @ d.features / (2 * 1.0 * np.sqrt(d.p))
        assert np.max(np.abs(a_rec - fit.coefficients)) <= 1e-10

    def test_gap_nonnegative(self):
        d = generate_dataset(ModelSpec.null(1, 1), 100, 100, seed=9)
        fit = fit_svm(d, 0.5, tol=1e-10)
        assert fit.gap >= -1e-12

    def test_permutation_invariance(self):
        d = generate_dataset(ModelSpec.null(1, 1), 120, 120, seed=11)
        fit = fit_svm(d, 1.0, tol=1e-10)
        perm = np.random.default_rng(0).permutation(d.n)
        d2 = Dataset(features=d.features[perm], labels=d.labels[perm],
                     a0=None, seed=d.seed)
        fit2 = fit_svm(d2, 1.0, tol=1e-10)
        assert fit2.primal_objective == pytest.approx(fit.primal_objective, abs=1e-9)
        assert np.allclose(np.sort(fit2.margins), np.sort(fit.margins), atol=1e-8)

    def test_rotation_invariance_in_distribution(self):
        # fitting with a0 = sqrt(p) e1 vs a rotated a0: same objective law
        n, p, lam = 80, 40, 1.0
        rng = np.random.default_rng(13)
        obj_a, obj_b = [], []
        for s in range(20):
            m = ModelSpec.indicator(p / n, lam)
            d = generate_dataset(m, n, p, seed=1000 + s)
            obj_b.append(fit_svm(d, lam).primal_objective)
            # axis-aligned ground truth with the same feature draw
            a0 = np.zeros(p)
            a0[0] = np.sqrt(p)
            y = np.sign(d.features @ a0)
            d2 = Dataset(features=d.features, labels=y, a0=a0, seed=d.seed)
            obj_a.append(fit_svm(d2, lam).primal_objective)
        obj_a, obj_b = np.array(obj_a), np.array(obj_b)
        se = np.sqrt(obj_a.var(ddof=1) / 20 + obj_b.var(ddof=1) / 20)
        assert abs(obj_a.mean() - obj_b.mean()) <= 3 * se

    def test_null_coef_sd_matches_theory(self):
        d = generate_dataset(ModelSpec.null(1.0, 1.0), 2000, 2000, seed=21)
        fit = fit_svm(d, 1.0)
        assert fit.converged
        assert fit.coefficients.std() == pytest.approx(0.44, abs=0.02)

    def test_max_epochs_status(self):
        d = generate_dataset(ModelSpec.null(1, 1), 200, 200, seed=4)
        fit = fit_svm(d, 1.0, tol=1e-14, max_epochs=1)
        assert fit.status == "max_epochs"
        assert fit.epochs == 1

    def test_rejects_bad_lambda(self):
        d = generate_dataset(ModelSpec.null(1, 1), 10, 5, seed=0)
        with pytest.raises(ValueError):
            fit_svm(d, 0.0)


class TestCountBoundary:
    def test_all_duals_at_edges_gives_zero(self):
        d = generate_dataset(ModelSpec.null(1, 1), 20, 10, seed=1)
        fit = fit_svm(d, 1.0, tol=1e-10)
        forced = fit.__class__(**{**fit.__dict__, "duals": np.round(fit.duals)})
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            assert count_boundary(forced) == 0

    def test_null_boundary_fraction(self):
        d = generate_dataset(ModelSpec.null(1.0, 1.0), 2000, 2000, seed=22)
        fit = fit_svm(d, 1.0)
        assert count_boundary(fit) / 2000 == pytest.approx(0.10, abs=0.03)

    def test_large_penalty_boundary_nearly_empty(self):
        d = generate_dataset(ModelSpec.null(1.0, 50.0), 1000, 1000, seed=23)
        fit = fit_svm(d, 50.0)
        assert count_boundary(fit) / 1000 <= 0.01

    def test_rejects_unconverged(self):
        d = generate_dataset(ModelSpec.null(1, 1), 50, 50, seed=2)
        fit = fit_svm(d, 1.0, tol=1e-14, max_epochs=1)
        with pytest.raises(ValueError):
            count_boundary(fit)


class TestReplicateConcentration:
    @pytest.mark.slow
    def test_boundary_fraction_concentrates(self):
        fracs = []
        for s in range(20):
            d = generate_dataset(ModelSpec.null(1.0, 1.0), 500, 500, seed=3000 + s)
            fit = fit_svm(d, 1.0)
            fracs.append(count_boundary(fit) / 500)
        assert np.std(fracs, ddof=1) < 0.03


class TestDatasetIO:
    def test_round_trip(self, tmp_path):
        m = ModelSpec.logistic(3, 1, 1)
        d = generate_dataset(m, 32, 16, seed=17)
        path = tmp_path / "data.bin"
        save_dataset(path, d)
        d2 = load_dataset(path)
        assert np.array_equal(d.features, d2.features)
        assert np.array_equal(d.labels, d2.labels)
        assert np.array_equal(d.a0, d2.a0)
        assert d2.seed == 17

    def test_null_round_trip_without_a0(self, tmp_path):
        d = generate_dataset(ModelSpec.null(1, 1), 8, 4, seed=1)
        path = tmp_path / "n.bin"
        save_dataset(path, d)
        assert load_dataset(path).a0 is None

    def test_rejects_bad_magic(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"\x00" * 64)
        with pytest.raises(ValueError):
            load_dataset(path)
