"""Standard-normal special functions and truncated moments.

Everything downstream (the fixed-point residuals, the theory objective,
the predicted CDFs) reduces to Phi, phi and the first two moments of a
standard normal restricted to an interval, so these are kept exact and
cancellation-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

SQRT_2PI = math.sqrt(2.0 * math.pi)


def std_normal_pdf(x):
    """Density of N(0,1); vectorized, phi(+-inf) = 0."""
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * np.square(x)) / SQRT_2PI
    # exp already underflows to 0 for |x| large, but +-inf gives exp(-inf)=0 too
    return out if out.ndim else float(out)


def std_normal_cdf(x):
    """CDF of N(0,1) via the complementary error function.

    ndtr evaluates erfc(-x/sqrt(2))/2, which is symmetric and accurate to
    ~1e-16 in both tails; arguments of +-50 (tiny sigma) are safe.
    """
    x = np.asarray(x, dtype=float)
    if np.isnan(x).any():
        raise ValueError("std_normal_cdf: NaN input")
    out = ndtr(x)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class TruncatedMoments:
    """Mass and first two moments of Z ~ N(0,1) restricted to [a, b]."""

    p0: float
    m1: float
    m2: float

    def __iter__(self):
        return iter((self.p0, self.m1, self.m2))


def truncated_moments(a: float, b: float) -> TruncatedMoments:
    """Closed-form (p0, m1, m2) of Z on [a, b]; a, b may be +-inf.

    p0 = Phi(b) - Phi(a)
    m1 = phi(a) - phi(b)
    m2 = p0 + a*phi(a) - b*phi(b)

    A degenerate interval (a >= b) yields (0, 0, 0).
    """
    if math.isnan(a) or math.isnan(b):
        raise ValueError("truncated_moments: NaN endpoint")
    if a >= b:
        return TruncatedMoments(0.0, 0.0, 0.0)
    p0 = float(ndtr(b) - ndtr(a))
    pa = float(std_normal_pdf(a))
    pb = float(std_normal_pdf(b))
    m1 = pa - pb
    # x*phi(x) -> 0 as x -> +-inf; avoid inf*0 = nan
    apa = a * pa if math.isfinite(a) else 0.0
    bpb = b * pb if math.isfinite(b) else 0.0
    m2 = p0 + apa - bpb
    return TruncatedMoments(p0, m1, max(m2, 0.0))


def truncated_moments_arrays(a, b):
    """Vectorized truncated moments for arrays of finite endpoints.

    Hot path of the signaled residuals (one interval per quadrature node).
    Degenerate entries (a >= b) come out as zeros.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    live = a < b
    pa = std_normal_pdf(a)
    pb = std_normal_pdf(b)
    p0 = np.where(live, ndtr(b) - ndtr(a), 0.0)
    m1 = np.where(live, pa - pb, 0.0)
    m2 = np.where(live, np.maximum(p0 + a * pa - b * pb, 0.0), 0.0)
    return p0, m1, m2
