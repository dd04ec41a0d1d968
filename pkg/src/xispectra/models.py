"""Data-generating models for the simulation studies, and their samplers.

Six models over n x p matrices:

* ``a``  i.i.d. standard normal entries (null);
* ``b``  i.i.d. standard Cauchy entries (null, heavy-tailed);
* ``c``  linear dependence: rows N_p(0, Sigma), Sigma banded with
         Sigma_ij = rho^|i-j| for |i-j| <= band;
* ``d``  nonlinear dependence: X_i = r1 Z_i^3 + r2 Z_{i+1}^3 + r3 Z_{i+2}^3
         + r4 E_i from p+2 latent normals (no wraparound);
* ``e``  oscillatory dependence: X = (U, V), U standard normal,
         V = sin(2 pi U) + noise * Z;
* ``f``  W-shaped dependence: X = (U, V), V = |U+1/2| for U < 0 and
         |U-1/2| for U >= 0, plus noise * Z (zero linear correlation).

Models ``a`` and ``b`` draw one uniform per entry and apply a strictly
increasing transform (inverse normal CDF, respectively tan(pi(u - 1/2))).
With the same generator state they therefore produce entrywise co-monotone
matrices with identical column ranks, which makes the null distribution of
every rank statistic not just equal in law but bit-identical across the
two models — the distribution-freeness contract the calibration engine
relies on.

Reproducibility contract: all replicated experiments derive one generator
per replication via :func:`replication_rng`, seeding a PCG64 stream from
the tuple (master seed, stream label, replication path).  Results are
therefore independent of thread scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtri

from .errors import NotPSD, OddDimension
from .rankcorr import DataMatrix

MODEL_IDS = ("a", "b", "c", "d", "e", "f")

# stream labels for replication_rng: keep all derived streams disjoint
STREAM_TABLE = 0
STREAM_CENTERING = 1
STREAM_CALIBRATION = 2
STREAM_ESD = 3
STREAM_CLT = 4
STREAM_TIES = 5


def replication_rng(seed: int, *path: int) -> np.random.Generator:
    """Generator for one replication, from (seed, stream label, indices).

    Distinct paths give statistically independent PCG64 streams; a fixed
    path gives an identical stream on every run and thread.
    """
    if seed < 0 or any(x < 0 for x in path):
        raise ValueError("seed and path components must be nonnegative")
    return np.random.default_rng(np.random.SeedSequence((int(seed),) + tuple(int(x) for x in path)))


@dataclass(frozen=True)
class ModelSpec:
    """One sampling model instance: identifier, sizes, and parameters."""

    model: str
    n: int
    p: int
    rho: float = 0.25
    band: int = 4
    coeffs: tuple[float, float, float, float] = (0.1, 0.05, 0.02, 0.5)
    noise: float = 0.1

    def __post_init__(self):
        if self.model not in MODEL_IDS:
            raise ValueError(f"unknown model {self.model!r}, expected one of {MODEL_IDS}")
        if self.n < 3 or self.p < 2:
            raise ValueError(f"need n >= 3 and p >= 2, got ({self.n}, {self.p})")
        if self.model in ("e", "f") and self.p % 2 != 0:
            raise OddDimension(f"model {self.model!r} needs even p, got {self.p}")


def standard_normal(rng, size=None):
    """Standard normal draws by the polar Box-Muller method.

    Pairs (u, v) uniform on the square are rejected outside the unit disc;
    accepted pairs map to independent normals u*sqrt(-2 ln s / s),
    v*sqrt(-2 ln s / s) with s = u^2 + v^2.  Returns a scalar when ``size``
    is None.
    """
    want = 1 if size is None else int(np.prod(size))
    out = np.empty(want)
    have = 0
    while have < want:
        m = max(8, int(1.2 * (want - have) / 2) + 1)
        u = 2.0 * rng.random(m) - 1.0
        v = 2.0 * rng.random(m) - 1.0
        s = u * u + v * v
        keep = (s > 0.0) & (s < 1.0)
        u, v, s = u[keep], v[keep], s[keep]
        factor = np.sqrt(-2.0 * np.log(s) / s)
        pair = np.concatenate([u * factor, v * factor])
        take = min(want - have, pair.size)
        out[have : have + take] = pair[:take]
        have += take
    if size is None:
        return float(out[0])
    return out.reshape(size)


def standard_cauchy(rng, size=None):
    """Standard Cauchy draws by the inverse CDF tan(pi(u - 1/2))."""
    u = rng.random() if size is None else rng.random(size)
    out = np.tan(np.pi * (u - 0.5))
    return float(out) if size is None else out


def psd_factor(sigma) -> np.ndarray:
    """Lower-triangular L with L L^T = Sigma for symmetric PSD Sigma.

    Cholesky when Sigma is positive definite; otherwise an eigenvalue
    factorization with tiny negative eigenvalues clipped to zero, brought
    to lower-triangular form.  Raises :class:`NotPSD` when Sigma has an
    eigenvalue below -1e-10 relative.
    """
    m = np.asarray(sigma, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got {m.shape}")
    scale = max(1.0, np.abs(m).max())
    if np.abs(m - m.T).max() > 1e-10 * scale:
        raise NotPSD("matrix is not symmetric")
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        pass
    w, v = np.linalg.eigh(0.5 * (m + m.T))
    if w.min() < -1e-10 * scale:
        raise NotPSD(f"minimum eigenvalue {w.min():.3e} is negative beyond tolerance")
    f = v * np.sqrt(np.clip(w, 0.0, None))
    # rotate the square root to lower-triangular form: F^T = QR gives L = R^T
    q, r = np.linalg.qr(f.T)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    ell = r.T * signs
    if np.linalg.norm(ell @ ell.T - m) > 1e-9 * max(1.0, np.linalg.norm(m)):
        raise NotPSD("factorization residual exceeds tolerance")
    return ell


@lru_cache(maxsize=8)
def _banded_factor(p: int, rho: float, band: int) -> np.ndarray:
    idx = np.arange(p)
    dist = np.abs(idx[:, None] - idx[None, :])
    sigma = np.where(dist <= band, np.asarray(rho, dtype=float) ** dist, 0.0)
    ell = psd_factor(sigma)
    ell.setflags(write=False)
    return ell


def sample_model(spec: ModelSpec, rng) -> DataMatrix:
    """Draw one n x p dataset from the given model.

    Models ``a`` and ``b`` consume exactly one uniform per entry through
    strictly increasing transforms (see module docstring); the remaining
    models use the polar Box-Muller sampler for their normal inputs.
    """
    n, p = spec.n, spec.p
    if spec.model == "a":
        values = ndtri(rng.random((n, p)))
    elif spec.model == "b":
        values = np.tan(np.pi * (rng.random((n, p)) - 0.5))
    elif spec.model == "c":
        ell = _banded_factor(p, spec.rho, spec.band)
        values = standard_normal(rng, (n, p)) @ ell.T
    elif spec.model == "d":
        r1, r2, r3, r4 = spec.coeffs
        z = standard_normal(rng, (n, p + 2)) ** 3
        e = standard_normal(rng, (n, p))
        values = r1 * z[:, :p] + r2 * z[:, 1 : p + 1] + r3 * z[:, 2 : p + 2] + r4 * e
    else:
        half = p // 2
        u = standard_normal(rng, (n, half))
        z = standard_normal(rng, (n, half))
        if spec.model == "e":
            v = np.sin(2.0 * np.pi * u) + spec.noise * z
        else:
            v = np.where(u < 0, np.abs(u + 0.5), np.abs(u - 0.5)) + spec.noise * z
        values = np.concatenate([u, v], axis=1)
    return DataMatrix(values)
