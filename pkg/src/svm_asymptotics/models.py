"""Label models and the induced distribution of V = y * a0^T x / sqrt(p).

For a label model P(y=1|x) = link(a0^T x / sqrt(p)), the margin-side scalar
V has density phi(v) * w(v) with weight w(v) = link(v) + 1 - link(-v).
All theory expectations over V are evaluated with a Gauss-Hermite rule
reweighted by w.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .gauss import std_normal_pdf

KIND_NULL = "null"
KIND_LOGISTIC = "logistic"
KIND_INDICATOR = "indicator"
KIND_CUSTOM = "custom"

DEFAULT_NODES = 200


class ModelConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    """Classification-model descriptor: label model plus (delta, lambda).

    kind    one of "null", "logistic", "indicator", "custom"
    c       logistic scale (logistic kind only)
    weight  custom weight function v -> [0, 2] (custom kind only);
            phi(v)*weight(v) must integrate to 1
    delta   p/n ratio, > 0
    lam     ridge penalty, > 0
    """

    kind: str
    delta: float
    lam: float
    c: Optional[float] = None
    weight: Optional[Callable[[np.ndarray], np.ndarray]] = field(
        default=None, compare=False
    )

    def __post_init__(self):
        if self.delta <= 0:
            raise ModelConfigError(f"delta must be > 0, got {self.delta}")
        if self.lam <= 0:
            raise ModelConfigError(f"lambda must be > 0, got {self.lam}")
        if self.kind not in (KIND_NULL, KIND_LOGISTIC, KIND_INDICATOR, KIND_CUSTOM):
            raise ModelConfigError(f"unknown model kind {self.kind!r}")
        if self.kind == KIND_LOGISTIC:
            if self.c is None or self.c <= 0:
                raise ModelConfigError("logistic model requires scale c > 0")
        if self.kind == KIND_CUSTOM:
            if self.weight is None:
                raise ModelConfigError("custom model requires a weight function")
            total, _ = integrate.quad(
                lambda v: std_normal_pdf(v) * float(self.weight(np.asarray(v))),
                -np.inf,
                np.inf,
            )
            if abs(total - 1.0) > 1e-8:
                raise ModelConfigError(
                    f"custom weight density integrates to {total}, not 1"
                )

    # -- constructors ------------------------------------------------------

    @staticmethod
    def null(delta: float, lam: float) -> "ModelSpec":
        return ModelSpec(KIND_NULL, delta, lam)

    @staticmethod
    def logistic(c: float, delta: float, lam: float) -> "ModelSpec":
        return ModelSpec(KIND_LOGISTIC, delta, lam, c=c)

    @staticmethod
    def indicator(delta: float, lam: float) -> "ModelSpec":
        return ModelSpec(KIND_INDICATOR, delta, lam)

    @staticmethod
    def custom(weight, delta: float, lam: float) -> "ModelSpec":
        return ModelSpec(KIND_CUSTOM, delta, lam, weight=weight)

    @staticmethod
    def parse(model: str, delta: float, lam: float) -> "ModelSpec":
        """Parse a CLI model string: "null" | "logistic:<c>" | "indicator"."""
        name, _, arg = model.partition(":")
        name = name.strip().lower()
        if name == KIND_NULL:
            return ModelSpec.null(delta, lam)
        if name == KIND_INDICATOR:
            return ModelSpec.indicator(delta, lam)
        if name == KIND_LOGISTIC:
            if not arg:
                raise ModelConfigError("logistic model needs a scale: logistic:<c>")
            return ModelSpec.logistic(float(arg), delta, lam)
        raise ModelConfigError(f"unrecognized model string {model!r}")

    def model_string(self) -> str:
        if self.kind == KIND_LOGISTIC:
            return f"logistic:{self.c:g}"
        return self.kind

    def with_lambda(self, lam: float) -> "ModelSpec":
        return ModelSpec(self.kind, self.delta, lam, c=self.c, weight=self.weight)

    # -- label model -------------------------------------------------------

    def link(self, g):
        """P(y = 1 | a0^T x / sqrt(p) = g)."""
        g = np.asarray(g, dtype=float)
        if self.kind == KIND_NULL:
            return np.full_like(g, 0.5)
        if self.kind == KIND_LOGISTIC:
            # stable sigmoid
            out = np.empty_like(g)
            pos = g >= 0
            out[pos] = 1.0 / (1.0 + np.exp(-self.c * g[pos]))
            e = np.exp(self.c * g[~pos])
            out[~pos] = e / (1.0 + e)
            return out
        if self.kind == KIND_INDICATOR:
            return (g >= 0).astype(float)
        raise ModelConfigError("custom models define V via weight, not link")

    def weight_fn(self, v):
        """w(v) = link(v) + 1 - link(-v); the density of V is phi(v)*w(v)."""
        v = np.asarray(v, dtype=float)
        if self.kind == KIND_CUSTOM:
            return np.asarray(self.weight(v), dtype=float)
        return self.link(v) + 1.0 - self.link(-v)


def v_density(model: ModelSpec, v):
    """Density of V = y * a0^T x / sqrt(p) at v."""
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("v_density: non-finite input")
    out = std_normal_pdf(v) * model.weight_fn(v)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class VQuadrature:
    """Nodes/weights for E_V[g(V)] ~= sum_k weights[k] * g(nodes[k])."""

    nodes: np.ndarray
    weights: np.ndarray

    def expect(self, g) -> float:
        return float(np.dot(self.weights, g(self.nodes)))

    def cdf(self, t):
        """P(V <= t) implied by the discrete rule (step function)."""
        t = np.asarray(t, dtype=float)
        order = np.argsort(self.nodes)
        nodes = self.nodes[order]
        cum = np.cumsum(self.weights[order])
        idx = np.searchsorted(nodes, t, side="right")
        out = np.where(idx > 0, cum[np.minimum(idx, len(cum)) - 1], 0.0)
        return out if out.ndim else float(out)


def v_cdf(model: ModelSpec, t):
    """Smooth CDF of V; closed forms for null/indicator, dense-grid
    integration of the density otherwise."""
    from scipy.special import ndtr

    t = np.asarray(t, dtype=float)
    if model.kind == KIND_NULL:
        out = ndtr(t)
    elif model.kind == KIND_INDICATOR:
        out = np.maximum(0.0, 2.0 * ndtr(t) - 1.0)
    else:
        grid = np.linspace(-12.0, 12.0, 9601)
        dens = std_normal_pdf(grid) * model.weight_fn(grid)
        cum = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) * 0.5 * np.diff(grid))])
        cum /= cum[-1]
        out = np.interp(t, grid, cum, left=0.0, right=1.0)
    return out if out.ndim else float(out)


def v_quadrature(model: ModelSpec, n_nodes: int = DEFAULT_NODES) -> VQuadrature:
    """Gauss-Hermite rule (probabilists') reweighted by the model's w(v).

    The indicator model (V =d |Z|) gets a half-line Gauss-Legendre rule on
    [0, 12] with the half-normal density folded into the weights: every
    integrand here is analytic, so this converges geometrically, whereas
    full-line rules pay an algebraic penalty for the |v| kink at 0.
    """
    if n_nodes < 8:
        raise ValueError("n_nodes must be >= 8")
    if model.kind == KIND_INDICATOR:
        u, w = np.polynomial.legendre.leggauss(n_nodes)
        span = 12.0  # half-normal tail mass beyond 12 is ~2e-33
        nodes = (u + 1.0) * (span / 2.0)
        weights = w * (span / 2.0) * 2.0 * std_normal_pdf(nodes)
        return VQuadrature(nodes=nodes, weights=weights / weights.sum())
    x, w = np.polynomial.hermite_e.hermegauss(n_nodes)
    w = w / np.sum(w)  # normalized standard-normal weights
    if model.kind == KIND_NULL:
        nodes, weights = x, w
    else:
        wt = model.weight_fn(x)
        weights = w * wt
        total = weights.sum()
        if abs(total - 1.0) > 1e-6:
            raise ModelConfigError(
                f"quadrature mass {total} far from 1; weight ill-conditioned"
            )
        nodes, weights = x, weights / total
    return VQuadrature(nodes=nodes, weights=weights)
