"""Finite-sample lab: data generation and an exact hinge+ridge SVM solver.

The solver is dual coordinate ascent on
    max_{beta in [0,1]^n}  sum_i beta_i - (1/(4*lam*p)) * beta' Q beta,
with Q_ij = y_i y_j <x_i, x_j>, maintaining u = sum_i beta_i y_i x_i so a
coordinate update costs O(p).  The primal vector is a = u / (2*lam*sqrt(p)).

Randomness: Philox counter-based generator keyed by SeedSequence, normal
variates by inversion (ndtri of half-integer uniforms) for cross-platform
bit stability.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit
from scipy.special import ndtri

from .models import KIND_NULL, ModelSpec

TEST_STREAM_KEY = 0x7E57  # spawn key for held-out test data
STATUS_CONVERGED = "converged"
STATUS_MAX_EPOCHS = "max_epochs"


def _rng(seed_seq) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed_seq))


def _standard_normal(rng: np.random.Generator, size) -> np.ndarray:
    # inversion on half-integer uniforms: deterministic, never hits 0 or 1
    u = (rng.integers(0, 1 << 53, size=size, dtype=np.int64) + 0.5) * 2.0**-53
    return ndtri(u)


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray  # (n, p), row-major, float64
    labels: np.ndarray    # (n,), values in {+1.0, -1.0}
    a0: Optional[np.ndarray]  # (p,), ||a0||^2 = p; None under the null
    seed: int

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]


def _draw(model: ModelSpec, n: int, p: int, rng, a0):
    x = np.ascontiguousarray(_standard_normal(rng, (n, p)))
    if model.kind == KIND_NULL:
        y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
        return x, y
    g = x @ a0 / np.sqrt(p)
    y = np.where(rng.random(n) < model.link(g), 1.0, -1.0)
    return x, y


def generate_dataset(model: ModelSpec, n: int, p: int, seed: int) -> Dataset:
    """Sample (X, y) from the generative model, with a0 uniform on the
    radius-sqrt(p) sphere in the signaled case."""
    if n < 1 or p < 1:
        raise ValueError("generate_dataset: n and p must be >= 1")
    rng = _rng(np.random.SeedSequence(seed))
    a0 = None
    if model.kind != KIND_NULL:
        d = _standard_normal(rng, p)
        a0 = d * np.sqrt(p) / np.linalg.norm(d)
    x, y = _draw(model, n, p, rng, a0)
    return Dataset(features=x, labels=y, a0=a0, seed=seed)


def generate_test_set(model: ModelSpec, data: Dataset, n_test: int):
    """Fresh (X, y) from the same model and a0, on an independent stream
    derived from (seed, TEST_STREAM_KEY)."""
    rng = _rng(np.random.SeedSequence(data.seed, spawn_key=(TEST_STREAM_KEY,)))
    return _draw(model, n_test, data.p, rng, data.a0)


# -- solver ------------------------------------------------------------------


@njit(cache=True)
def _dca_sweeps(x, yv, beta, u, sqnorms, scale, tol, orders):
    """Dual coordinate ascent epochs; returns (epochs_run, max_kkt_violation).

    scale = 1/(2*lam*p).  KKT violation at beta_i with g = 1 - L_i:
    g_+ at the lower box edge, (-g)_+ at the upper edge, |g| inside.
    """
    n, p = x.shape
    max_epochs = orders.shape[0]
    viol = np.inf
    for epoch in range(max_epochs):
        viol = 0.0
        for k in range(n):
            i = orders[epoch, k]
            dot = 0.0
            for j in range(p):
                dot += x[i, j] * u[j]
            g = 1.0 - yv[i] * dot * scale
            b = beta[i]
            if b <= 0.0:
                pv = g if g > 0.0 else 0.0
            elif b >= 1.0:
                pv = -g if g < 0.0 else 0.0
            else:
                pv = abs(g)
            if pv > viol:
                viol = pv
            if pv > 0.0:
                nb = b + g / (sqnorms[i] * scale)
                if nb < 0.0:
                    nb = 0.0
                elif nb > 1.0:
                    nb = 1.0
                d = nb - b
                if d != 0.0:
                    beta[i] = nb
                    dy = d * yv[i]
                    for j in range(p):
                        u[j] += dy * x[i, j]
        if viol <= tol:
            return epoch + 1, viol
    return max_epochs, viol


@dataclass(frozen=True)
class SvmFit:
    coefficients: np.ndarray   # a-hat, (p,)
    margins: np.ndarray        # L_i = y_i x_i' a / sqrt(p), (n,)
    duals: np.ndarray          # beta in [0,1]^n
    primal_objective: float
    dual_objective: float
    gap: float
    epochs: int
    kkt_violation: float
    status: str
    lam: float

    @property
    def converged(self) -> bool:
        return self.status == STATUS_CONVERGED


def fit_svm(
    data: Dataset,
    lam: float,
    tol: float = 1e-8,
    max_epochs: int = 10_000,
) -> SvmFit:
    """Solve min_a sum_i (1 - y_i x_i'a/sqrt(p))_+ + lam*||a||^2 exactly.

    Coordinate order is a fresh seeded permutation each epoch.  Terminates
    when the maximum KKT violation over an epoch is <= tol; the duality gap
    is reported as a certificate.
    """
    if lam <= 0:
        raise ValueError("fit_svm: lambda must be > 0")
    n, p = data.features.shape
    if n == 0:
        raise ValueError("fit_svm: empty dataset")
    x = data.features
    yv = data.labels
    sqnorms = np.einsum("ij,ij->i", x, x)
    scale = 1.0 / (2.0 * lam * p)

    rng = _rng(np.random.SeedSequence(data.seed, spawn_key=(0xC0DE,)))
    beta = np.zeros(n)
    u = np.zeros(p)
    # permutations are drawn up front in blocks so the kernel stays RNG-free
    epochs_done = 0
    status = STATUS_MAX_EPOCHS
    viol = np.inf
    block = 256
    while epochs_done < max_epochs:
        nb = min(block, max_epochs - epochs_done)
        orders = np.empty((nb, n), dtype=np.int64)
        for e in range(nb):
            orders[e] = rng.permutation(n)
        ran, viol = _dca_sweeps(x, yv, beta, u, sqnorms, scale, tol, orders)
        epochs_done += ran
        if viol <= tol:
            status = STATUS_CONVERGED
            break

    a = u / (2.0 * lam * np.sqrt(p))
    margins = yv * (x @ a) / np.sqrt(p)
    primal = float(np.sum(np.maximum(0.0, 1.0 - margins)) + lam * np.dot(a, a))
    dual = float(np.sum(beta) - lam * np.dot(a, a))
    return SvmFit(
        coefficients=a,
        margins=margins,
        duals=beta,
        primal_objective=primal,
        dual_objective=dual,
        gap=primal - dual,
        epochs=epochs_done,
        kkt_violation=float(viol),
        status=status,
        lam=lam,
    )


def count_boundary(fit: SvmFit, eps_dual: float = 1e-6, band_tol: float = 1e-5):
    """Number of samples on the margin boundary, by the dual-interior rule.

    Points with beta_i strictly inside (eps_dual, 1-eps_dual) sit exactly on
    the boundary in the primal.  Cross-checked against the |L_i - 1| band;
    a disagreement above 1% of n is attached as a warning, not an error.
    """
    if not fit.converged:
        raise ValueError("count_boundary: fit did not converge")
    n_dual = int(np.sum((fit.duals > eps_dual) & (fit.duals < 1.0 - eps_dual)))
    n_band = int(np.sum(np.abs(fit.margins - 1.0) <= band_tol))
    n = len(fit.duals)
    if abs(n_dual - n_band) > 0.01 * n:
        warnings.warn(
            f"boundary count disagreement: dual-interior {n_dual} vs "
            f"primal band {n_band} (n={n})",
            stacklevel=2,
        )
    return n_dual


# -- columnar binary dump ------------------------------------------------

MAGIC = b"SVMASYMDATA\x00\x00\x00\x00\x01"  # 16 bytes, last byte = version


def save_dataset(path, data: Dataset) -> None:
    """Columnar binary dump: magic, version-bearing header, little-endian
    float64 features/a0, int8 labels."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        has_a0 = data.a0 is not None
        fh.write(struct.pack("<qqqq", data.n, data.p, int(has_a0), data.seed))
        fh.write(np.ascontiguousarray(data.features, dtype="<f8").tobytes())
        fh.write(data.labels.astype(np.int8).tobytes())
        if has_a0:
            fh.write(np.ascontiguousarray(data.a0, dtype="<f8").tobytes())


def load_dataset(path) -> Dataset:
    with open(path, "rb") as fh:
        magic = fh.read(16)
        if magic != MAGIC:
            raise ValueError(f"not a dataset file (bad magic {magic!r})")
        n, p, has_a0, seed = struct.unpack("<qqqq", fh.read(32))
        feats = np.frombuffer(fh.read(8 * n * p), dtype="<f8").reshape(n, p)
        labels = np.frombuffer(fh.read(n), dtype=np.int8).astype(float)
        a0 = None
        if has_a0:
            a0 = np.frombuffer(fh.read(8 * p), dtype="<f8").copy()
    return Dataset(features=feats.copy(), labels=labels, a0=a0, seed=seed)
