import math

import numpy as np
import pytest
from scipy import integrate
from scipy.stats import kstest, norm

from oracles import expect_v_quadrature, sample_v
from svm_asymptotics import ModelSpec, v_density, v_quadrature
from svm_asymptotics.models import ModelConfigError, v_cdf


class TestModelSpec:
    def test_rejects_bad_delta_lambda(self):
        with pytest.raises(ModelConfigError):
            ModelSpec.null(delta=0.0, lam=1.0)
        with pytest.raises(ModelConfigError):
            ModelSpec.null(delta=1.0, lam=-2.0)

    def test_parse_round_trip(self):
        m = ModelSpec.parse("logistic:3", 1.0, 1.0)
        assert m.kind == "logistic" and m.c == 3.0
        assert m.model_string() == "logistic:3"
        assert ModelSpec.parse("null", 1.0, 1.0).kind == "null"
        assert ModelSpec.parse("indicator", 0.25, 1.0).kind == "indicator"

    def test_parse_rejects_garbage(self):
        with pytest.raises(ModelConfigError):
            ModelSpec.parse("probit", 1.0, 1.0)
        with pytest.raises(ModelConfigError):
            ModelSpec.parse("logistic", 1.0, 1.0)  # missing scale

    def test_custom_weight_normalization_check(self):
        with pytest.raises(ModelConfigError):
            ModelSpec.custom(lambda v: 1.5 * np.ones_like(v), 1.0, 1.0)
        # w = 1 is the null weight and is properly normalized
        ModelSpec.custom(lambda v: np.ones_like(v), 1.0, 1.0)


class TestVDensity:
    def test_null_is_standard_normal(self):
        assert v_density(ModelSpec.null(1, 1), 1.3) == pytest.approx(
            norm.pdf(1.3), abs=1e-15
        )

    def test_logistic_midpoint(self):
        m = ModelSpec.logistic(7.0, 1, 1)
        assert v_density(m, 0.0) == pytest.approx(norm.pdf(0.0), abs=1e-15)

    def test_indicator_no_negative_mass(self):
        m = ModelSpec.indicator(1, 1)
        assert v_density(m, -0.5) == 0.0
        assert v_density(m, 0.5) == pytest.approx(2 * norm.pdf(0.5), abs=1e-15)

    @pytest.mark.parametrize("model_str", ["null", "logistic:3", "logistic:0.5", "indicator"])
    def test_density_integrates_to_one(self, model_str):
        m = ModelSpec.parse(model_str, 1.0, 1.0)
        total, _ = integrate.quad(lambda v: v_density(m, v), -np.inf, np.inf)
        assert total == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("model_str", ["null", "logistic:3", "indicator"])
    def test_weight_identity(self, model_str):
        m = ModelSpec.parse(model_str, 1.0, 1.0)
        v = np.linspace(-6, 6, 241)
        w = m.weight_fn(v)
        assert np.all((w >= 0) & (w <= 2))
        assert np.allclose(w + m.weight_fn(-v), 2.0, atol=1e-12)


class TestVQuadrature:
    def test_minimum_nodes(self):
        with pytest.raises(ValueError):
            v_quadrature(ModelSpec.null(1, 1), n_nodes=4)

    def test_weights_normalized(self, logistic_model):
        q = v_quadrature(logistic_model)
        assert np.all(q.weights >= 0)
        assert q.weights.sum() == pytest.approx(1.0, abs=1e-10)

    def test_null_moments(self):
        q = v_quadrature(ModelSpec.null(1, 1), 64)
        assert q.expect(lambda v: v) == pytest.approx(0.0, abs=1e-10)
        assert q.expect(lambda v: v**2) == pytest.approx(1.0, abs=1e-10)

    def test_indicator_mean_is_half_normal(self):
        q = v_quadrature(ModelSpec.indicator(1, 1), 64)
        # E|Z| = sqrt(2/pi)
        assert q.expect(lambda v: v) == pytest.approx(0.7978845608028654, abs=1e-10)

    def test_logistic_mean_matches_adaptive_quadrature(self, logistic_model):
        q = v_quadrature(logistic_model, 200)
        # frozen oracle: adaptive quadrature of 2 v phi(v) / (1 + exp(-3v))
        assert q.expect(lambda v: v) == pytest.approx(0.6890274286434633, abs=1e-8)

    def test_polynomial_expectations(self, logistic_model):
        q = v_quadrature(logistic_model, 200)
        for deg in (1, 2, 3, 4, 6):
            oracle = expect_v_quadrature(logistic_model.weight_fn, lambda v: v**deg)
            assert q.expect(lambda v, d=deg: v**d) == pytest.approx(oracle, abs=1e-9)

    def test_prob_v_negative(self):
        qn = v_quadrature(ModelSpec.null(1, 1))
        assert qn.expect(lambda v: (v < 0).astype(float)) == pytest.approx(0.5, abs=1e-9)
        qi = v_quadrature(ModelSpec.indicator(1, 1))
        assert qi.expect(lambda v: (v < 0).astype(float)) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("model_str,delta", [("null", 1.0), ("logistic:3", 1.0), ("indicator", 0.25)])
    def test_monte_carlo_cdf_cross_check(self, model_str, delta):
        # empirical V samples vs the quadrature-implied CDF, KS within 0.02
        m = ModelSpec.parse(model_str, delta, 1.0)
        rng = np.random.default_rng(99)
        v = sample_v(m, 100_000, rng)
        stat = kstest(v, lambda t: v_cdf(m, t)).statistic
        assert stat <= 0.02

    def test_step_cdf_consistent_with_smooth_cdf(self, logistic_model):
        # the discrete rule's staircase tracks the smooth CDF to ~max weight
        q = v_quadrature(logistic_model)
        t = np.linspace(-4, 4, 101)
        assert np.max(np.abs(q.cdf(t) - v_cdf(logistic_model, t))) <= q.weights.max()
