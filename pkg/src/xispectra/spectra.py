"""Symmetric eigensolving, empirical spectral distributions, and histograms.

The eigensolver wraps LAPACK's symmetric driver behind two consistency
identities (eigenvalue sum versus trace, eigenvalue square sum versus
squared Frobenius norm); a decomposition violating either raises rather
than returning silently wrong spectra.

The Kolmogorov-Smirnov distance here is the exact sup distance between the
step empirical spectral CDF and a reference CDF supplied as a callable: at
every eigenvalue atom both one-sided gaps are taken, with the left gap
evaluating the reference just below the atom so that step references are
also handled exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EigenFailure, NotSymmetric
from .rankcorr import CorrelationMatrix


@dataclass(frozen=True)
class SpectralSummary:
    """Eigenvalues of a symmetric matrix, sorted descending."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        if ev.ndim != 1 or ev.size == 0:
            raise ValueError(f"expected a nonempty eigenvalue vector, got {ev.shape}")
        if np.any(np.diff(ev) > 0):
            raise ValueError("eigenvalues must be sorted descending")
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def dimension(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True)
class Histogram:
    """Equal-width density histogram; integrates to one by construction.

    Values outside the requested range are clipped into the end bins;
    ``clipped_low``/``clipped_high`` count them.
    """

    bin_edges: np.ndarray
    densities: np.ndarray
    clipped_low: int = 0
    clipped_high: int = 0

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        dens = np.asarray(self.densities, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("bin_edges must be strictly increasing, length >= 2")
        if dens.shape != (edges.size - 1,):
            raise ValueError("densities must have one entry per bin")
        if np.any(dens < 0):
            raise ValueError("densities must be nonnegative")
        edges.setflags(write=False)
        dens.setflags(write=False)
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "densities", dens)


def _as_array(a) -> np.ndarray:
    if isinstance(a, CorrelationMatrix):
        return a.values
    return np.asarray(a, dtype=float)


def sym_eigenvalues(a, tol: float = 1e-10) -> SpectralSummary:
    """Full spectrum of a symmetric matrix, sorted descending.

    The input must be symmetric within 1e-12 relative.  The result is
    checked against the trace and Frobenius identities within
    ``tol * p * norm``; violation raises :class:`EigenFailure`.
    """
    m = _as_array(a)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = np.abs(m).max() if m.size else 0.0
    if np.abs(m - m.T).max() > 1e-12 * max(scale, 1.0):
        raise NotSymmetric("matrix is not symmetric within 1e-12 relative")
    try:
        ev = np.linalg.eigvalsh(m)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"eigenvalue decomposition failed: {exc}") from exc
    p = m.shape[0]
    norm = max(1.0, np.abs(ev).max())
    if abs(ev.sum() - np.trace(m)) > tol * p * norm:
        raise EigenFailure("eigenvalue sum deviates from trace beyond tolerance")
    if abs((ev * ev).sum() - (m * m).sum()) > tol * p * norm * norm:
        raise EigenFailure("eigenvalue square sum deviates from Frobenius norm")
    return SpectralSummary(ev[::-1].copy())


def trace_power(a, k: int, method: str = "product") -> float:
    """tr(A^k) for symmetric A, by matrix products or from the spectrum."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    if method == "product":
        m = _as_array(a)
        acc = m
        for _ in range(k - 1):
            acc = acc @ m
        return float(np.trace(acc))
    if method == "spectral":
        ev = sym_eigenvalues(a).eigenvalues
        return float((ev**k).sum())
    raise ValueError(f"unknown method {method!r}")


def esd_cdf(summary: SpectralSummary, x: float) -> float:
    """Empirical spectral CDF: fraction of eigenvalues <= x."""
    ev = summary.eigenvalues
    return float(np.count_nonzero(ev <= x)) / summary.dimension


def ks_distance(summary: SpectralSummary, ref_cdf) -> float:
    """Exact sup distance between the step ESD and a reference CDF callable.

    At each atom the right gap compares the CDFs at the atom and the left
    gap compares them just below it (one float step down), which is exact
    for continuous references and also for step references evaluated as
    right-continuous functions.
    """
    atoms, counts = np.unique(summary.eigenvalues, return_counts=True)
    m = summary.dimension
    cum = np.cumsum(counts)
    f_right = cum / m
    f_left = (cum - counts) / m  # integer subtraction: exact step values
    best = 0.0
    for lam, fr, fl in zip(atoms, f_right, f_left):
        best = max(best, abs(fr - ref_cdf(lam)))
        best = max(best, abs(fl - ref_cdf(np.nextafter(lam, -np.inf))))
    return best


def histogram(summary: SpectralSummary, bins: int = 50, value_range=None) -> Histogram:
    """Equal-width density histogram of the spectrum.

    Default range pads the eigenvalue span by 5% on each side.  Values
    outside the range are clipped into the end bins (and counted), so the
    densities always integrate to exactly one.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    ev = summary.eigenvalues
    if value_range is None:
        lo, hi = ev.min(), ev.max()
        span = hi - lo
        pad = 0.05 * span if span > 0 else 0.5
        lo, hi = lo - pad, hi + pad
    else:
        lo, hi = float(value_range[0]), float(value_range[1])
        if not lo < hi:
            raise ValueError("range must satisfy lo < hi")
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(np.clip(ev, lo, hi), bins=edges)
    width = (hi - lo) / bins
    densities = counts / (ev.size * width)
    return Histogram(
        edges,
        densities,
        clipped_low=int(np.count_nonzero(ev < lo)),
        clipped_high=int(np.count_nonzero(ev > hi)),
    )
