import json

import numpy as np
import pytest
from scipy.stats import norm

from svm_asymptotics import (
    ModelSpec,
    empirical_report,
    fit_svm,
    generate_dataset,
    ks_distance,
    theory_report,
)
from svm_asymptotics.reports import ks_distance_excluding


class TestKsDistance:
    def test_exact_on_uniform(self):
        # F(x)=x on a deterministic grid: KS distance is exactly 1/(2n) + offset
        x = (np.arange(1, 101) - 0.5) / 100
        assert ks_distance(x, lambda t: t) == pytest.approx(0.005, abs=1e-12)

    def test_matches_scipy(self):
        from scipy.stats import kstest

        rng = np.random.default_rng(0)
        x = rng.standard_normal(500)
        ours = ks_distance(x, norm.cdf)
        theirs = kstest(x, norm.cdf).statistic
        assert ours == pytest.approx(theirs, abs=1e-12)

    def test_exclusion_drops_atom_jitter(self):
        # reference law has an atom exactly at 1; empirical "atom" points sit
        # at 1 - 1e-5 (solver noise).  Plain KS sees the full atom mass as
        # deviation; excluding the band removes that artifact.
        rng = np.random.default_rng(1)
        mass = 0.1

        def cdf_with_atom(t):
            t = np.asarray(t, dtype=float)
            return np.where(t < 1.0, (1 - mass) * norm.cdf(np.minimum(t, 1.0)),
                            (1 - mass) * norm.cdf(1.0) + mass
                            + (1 - mass) * (norm.cdf(t) - norm.cdf(1.0)))

        x = np.concatenate([rng.standard_normal(900), np.full(100, 1.0 - 1e-5)])
        full = ks_distance(x, cdf_with_atom)
        trimmed = ks_distance_excluding(x, cdf_with_atom, 1.0 - 1e-4, 1.0 + 1e-4)
        assert full >= mass * 0.9
        assert trimmed < 0.05


@pytest.fixture(scope="module")
def logistic_run():
    model = ModelSpec.logistic(3.0, 1.0, 1.0)
    theory = theory_report(model)
    data = generate_dataset(model, 800, 800, seed=31)
    fit = fit_svm(data, 1.0)
    rep = empirical_report(fit, data, model, n_test=50_000, theory=theory)
    return model, theory, rep


class TestEmpiricalReport:
    def test_fields_and_ranges(self, logistic_run):
        _, _, rep = logistic_run
        emp = rep.empirical
        for key in ("coef_ks", "margin_ks", "boundary_fraction", "test_error",
                    "objective"):
            assert key in emp
        assert 0 <= emp["boundary_fraction"] <= 1
        assert 0 <= emp["test_error"] <= 1
        assert all(v >= 0 for v in rep.deltas.values())

    def test_agreement_with_theory(self, logistic_run):
        _, theory, rep = logistic_run
        assert rep.deltas["test_error"] <= 0.03
        assert rep.deltas["boundary_fraction"] <= 0.04
        assert rep.empirical["coef_ks"] <= 0.06
        assert rep.empirical["margin_ks"] <= 0.06

    def test_json_config_round_trip(self, logistic_run):
        model, _, rep = logistic_run
        doc = json.loads(rep.to_json())
        cfg = doc["config"]
        assert cfg == {"model": "logistic:3", "delta": 1.0, "lambda": 1.0,
                       "n": 800, "p": 800, "seed": 31}

    def test_null_test_error_half(self):
        model = ModelSpec.null(1.0, 1.0)
        theory = theory_report(model)
        data = generate_dataset(model, 500, 500, seed=41)
        fit = fit_svm(data, 1.0)
        rep = empirical_report(fit, data, model, n_test=100_000, theory=theory)
        assert rep.empirical["test_error"] == pytest.approx(0.5, abs=0.01)

    def test_dimension_mismatch_rejected(self):
        model = ModelSpec.null(1.0, 1.0)
        theory = theory_report(model)
        data = generate_dataset(model, 100, 100, seed=1)
        fit = fit_svm(data, 1.0)
        other = generate_dataset(model, 50, 50, seed=2)
        with pytest.raises(ValueError):
            empirical_report(fit, other, model, 100, theory)

    @pytest.mark.slow
    def test_indicator_coef_ks(self):
        model = ModelSpec.indicator(0.25, 1.0)
        theory = theory_report(model)
        data = generate_dataset(model, 4000, 1000, seed=51)
        fit = fit_svm(data, 1.0)
        rep = empirical_report(fit, data, model, n_test=10_000, theory=theory)
        assert rep.empirical["coef_ks"] <= 0.05
