"""Replication engines: size/power tables, spectral-distribution and
central-limit experiments.

All engines follow one reproducibility contract: a master seed plus a
stream label and replication index feed :func:`~xispectra.models.replication_rng`,
so every replication owns an independent generator and results are
bit-identical for any thread count.

The size/power engine shares one null-calibration pass per (n, p) across
models and statistics: thresholds for the Monte-Carlo-calibrated
statistics and the simulated tr(Psi^2) centering are computed once and
reused, and they coincide exactly with what
:func:`~xispectra.hightest.calibrate_null` and
:func:`~xispectra.hightest.simulate_q_xi4_centering` return for the same
seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from ._parallel import run_indexed
from .hightest import (
    RANK_BASED,
    STATISTIC_IDS,
    Workspace,
    _MC_DEFAULT,
    extreme_value_threshold,
    simulate_q_xi4_centering,
    statistic_value,
)
from .limitlaws import MPLaw, SemicircleLaw, lss_cov, mp_cdf, semicircle_cdf
from .models import (
    MODEL_IDS,
    STREAM_CALIBRATION,
    STREAM_CLT,
    STREAM_ESD,
    STREAM_TABLE,
    ModelSpec,
    psd_factor,
    replication_rng,
    sample_model,
    standard_cauchy,
    standard_normal,
)
from .rankcorr import phi_matrix, psi_matrix, xi_matrix
from .spectra import Histogram, SpectralSummary, histogram, ks_distance, sym_eigenvalues

__all__ = [
    "ModelSpec",
    "SimTable",
    "EsdResult",
    "CltSample",
    "CltResult",
    "sample_model",
    "standard_normal",
    "standard_cauchy",
    "psd_factor",
    "replication_rng",
    "run_size",
    "run_power",
    "run_esd",
    "run_clt",
]

SIZE_MODELS = ("a", "b")
POWER_MODELS = ("c", "d", "e", "f")
DEFAULT_GRID = ((50, 50), (100, 100))
DEFAULT_STATS = ("q_xi2", "q_xi4")


@dataclass(frozen=True)
class SimTable:
    """Rejection rates over a (model, n, p) x statistic grid.

    ``cells[(model, n, p)][stat]`` is the fraction of replications whose
    test rejected at level ``alpha``.
    """

    stats: tuple[str, ...]
    cells: dict[tuple[str, int, int], dict[str, float]]
    reps: int
    seed: int
    alpha: float = 0.05

    def __post_init__(self):
        if self.reps <= 0:
            raise ValueError("reps must be positive")
        for key, row in self.cells.items():
            for stat, rate in row.items():
                if not 0.0 <= rate <= 1.0:
                    raise ValueError(f"rate {rate} out of [0,1] at {key}/{stat}")

    def rate(self, model: str, n: int, p: int, stat: str) -> float:
        return self.cells[(model, n, p)][stat]

    def iter_records(self):
        """Yield (model, n, p, stat, reps, rate) rows in deterministic order."""
        for model, n, p in sorted(self.cells, key=lambda k: (MODEL_IDS.index(k[0]), k[1], k[2])):
            row = self.cells[(model, n, p)]
            for stat in self.stats:
                yield model, n, p, stat, self.reps, row[stat]


@dataclass(frozen=True)
class EsdResult:
    """Pooled empirical spectral distribution of Phi or Psi against its limit."""

    matrix_kind: str
    n: int
    p: int
    reps: int
    seed: int
    gamma: float
    law: object
    histogram: Histogram
    ks: float
    eigenvalues: np.ndarray


@dataclass(frozen=True)
class CltSample:
    """The tr(Psi^k) draws of one k across all replications."""

    k: int
    values: np.ndarray
    reference_variance: float

    @property
    def sample_mean(self) -> float:
        return float(self.values.mean())

    @property
    def sample_variance(self) -> float:
        return float(self.values.var(ddof=1))

    @property
    def centered(self) -> np.ndarray:
        return self.values - self.values.mean()


@dataclass(frozen=True)
class CltResult:
    n: int
    p: int
    reps: int
    seed: int
    gamma: float
    samples: dict[int, CltSample] = field(default_factory=dict)


def _validate_grid(grid):
    cleaned = []
    for entry in grid:
        n, p = int(entry[0]), int(entry[1])
        if n < 3 or p < 2:
            raise ValueError(f"grid entry needs n >= 3 and p >= 2, got ({n}, {p})")
        cleaned.append((n, p))
    if not cleaned:
        raise ValueError("grid is empty")
    return tuple(cleaned)


def _prepare_thresholds(stats, n, p, alpha, seed, mc_reps, centering_reps, threads):
    """Per-(n, p) decision context: q_xi4 centering and one threshold per stat.

    Asymptotic thresholds are closed-form; the Monte-Carlo ones come from a
    single shared null pass over all MC-calibrated statistics.
    """
    centering = None
    if "q_xi4" in stats:
        centering = simulate_q_xi4_centering(
            n, p, reps=centering_reps, seed=seed, threads=threads
        )
    thresholds: dict[str, float] = {}
    z = float(ndtri(1.0 - alpha))
    for stat in stats:
        if stat in ("q_xi2", "q_xi4", "q_r2"):
            thresholds[stat] = z
        elif stat in ("m_rho", "m_tau"):
            thresholds[stat] = extreme_value_threshold(alpha)
    mc_stats = [s for s in stats if s in _MC_DEFAULT]
    if mc_stats:
        spec = ModelSpec("a", n, p)
        draws = np.empty((mc_reps, len(mc_stats)))

        def one(i: int) -> None:
            rng = replication_rng(seed, STREAM_CALIBRATION, n, p, i)
            ws = Workspace(sample_model(spec, rng))
            for j, stat in enumerate(mc_stats):
                draws[i, j] = statistic_value(stat, ws, centering)

        run_indexed(one, mc_reps, threads)
        for j, stat in enumerate(mc_stats):
            thresholds[stat] = float(np.quantile(draws[:, j], 1.0 - alpha, method="higher"))
    return thresholds, centering


def _run_table(models, stats, grid, reps, seed, alpha, mc_reps, centering_reps, threads):
    if reps < 100:
        raise ValueError(f"the tables need reps >= 100, got {reps}")
    stats = tuple(stats)
    for stat in stats:
        if stat not in STATISTIC_IDS:
            raise ValueError(f"unknown statistic {stat!r}")
    grid = _validate_grid(grid)
    models = tuple(models)
    specs = {(m, n, p): ModelSpec(m, n, p) for m in models for n, p in grid}

    cells: dict[tuple[str, int, int], dict[str, float]] = {}
    for n, p in grid:
        thresholds, centering = _prepare_thresholds(
            stats, n, p, alpha, seed, mc_reps, centering_reps, threads
        )
        for model in models:
            spec = specs[(model, n, p)]
            model_idx = MODEL_IDS.index(model)
            hits = np.zeros((reps, len(stats)), dtype=bool)

            def one(i: int, spec=spec, model_idx=model_idx, hits=hits, th=thresholds, c=centering) -> None:
                rng = replication_rng(seed, STREAM_TABLE, model_idx, n, p, i)
                ws = Workspace(sample_model(spec, rng))
                for j, stat in enumerate(stats):
                    hits[i, j] = statistic_value(stat, ws, c) > th[stat]

            run_indexed(one, reps, threads)
            counts = hits.sum(axis=0)
            cells[(model, n, p)] = {
                stat: float(counts[j]) / reps for j, stat in enumerate(stats)
            }
    return SimTable(stats=stats, cells=cells, reps=reps, seed=seed, alpha=alpha)


def run_size(
    models=SIZE_MODELS,
    stats=DEFAULT_STATS,
    grid=DEFAULT_GRID,
    reps: int = 500,
    seed: int = 0,
    alpha: float = 0.05,
    mc_reps: int = 2000,
    centering_reps: int = 1000,
    threads: int = 1,
) -> SimTable:
    """Empirical sizes under the null models (a) Gaussian, (b) Cauchy."""
    for m in models:
        if m not in SIZE_MODELS:
            raise ValueError(f"size models must come from {SIZE_MODELS}, got {m!r}")
    return _run_table(models, stats, grid, reps, seed, alpha, mc_reps, centering_reps, threads)


def run_power(
    models=POWER_MODELS,
    stats=DEFAULT_STATS,
    grid=DEFAULT_GRID,
    reps: int = 500,
    seed: int = 0,
    alpha: float = 0.05,
    mc_reps: int = 2000,
    centering_reps: int = 1000,
    threads: int = 1,
) -> SimTable:
    """Empirical powers under the dependent models (c)-(f)."""
    for m in models:
        if m not in POWER_MODELS:
            raise ValueError(f"power models must come from {POWER_MODELS}, got {m!r}")
    return _run_table(models, stats, grid, reps, seed, alpha, mc_reps, centering_reps, threads)


def run_esd(
    matrix_kind: str,
    n: int,
    p: int,
    reps: int,
    bins: int = 50,
    seed: int = 0,
    threads: int = 1,
) -> EsdResult:
    """Pooled eigenvalue distribution of Phi or Psi under the null.

    Replications draw standard-normal columns; eigenvalues are pooled over
    replications and compared, via the Kolmogorov-Smirnov distance, with
    the limiting law at gamma = p/n: a semicircle centered at 1 with
    radius 2 sqrt(gamma/5) for Phi, the square-case (ratio 1)
    Marchenko-Pastur law with scale 2 gamma / 5 for Psi.
    """
    if matrix_kind not in ("phi", "psi"):
        raise ValueError(f"matrix_kind must be 'phi' or 'psi', got {matrix_kind!r}")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    gamma = p / n
    spec = ModelSpec("a", n, p)
    pool = np.empty((reps, p))

    def one(i: int) -> None:
        rng = replication_rng(seed, STREAM_ESD, n, p, i)
        xi = xi_matrix(sample_model(spec, rng))
        m = phi_matrix(xi) if matrix_kind == "phi" else psi_matrix(xi)
        pool[i] = sym_eigenvalues(m).eigenvalues

    run_indexed(one, reps, threads)
    summary = SpectralSummary(np.sort(pool.ravel())[::-1])
    if matrix_kind == "phi":
        law = SemicircleLaw(1.0, 2.0 * math.sqrt(gamma / 5.0))
        ks = ks_distance(summary, lambda x: semicircle_cdf(law, x))
    else:
        law = MPLaw(1.0, 2.0 * gamma / 5.0)
        ks = ks_distance(summary, lambda x: mp_cdf(law, x))
    hist = histogram(summary, bins=bins)
    return EsdResult(
        matrix_kind=matrix_kind,
        n=n,
        p=p,
        reps=reps,
        seed=seed,
        gamma=gamma,
        law=law,
        histogram=hist,
        ks=ks,
        eigenvalues=summary.eigenvalues,
    )


def run_clt(
    k_list,
    n: int,
    p: int,
    reps: int,
    seed: int = 0,
    threads: int = 1,
) -> CltResult:
    """Replicated tr(Psi^k) draws for the central-limit comparison.

    Reports, per k, the raw draws (centering by the sample mean is a
    property of the result), the sample variance to set against
    lss_cov(k, k), and the Gaussian-limit reference variance.
    """
    ks = tuple(int(k) for k in k_list)
    if not ks or any(k < 1 for k in ks):
        raise ValueError(f"k_list must contain positive integers, got {k_list!r}")
    if reps < 200:
        raise ValueError(f"the CLT experiment needs reps >= 200, got {reps}")
    gamma = p / n
    spec = ModelSpec("a", n, p)
    values = np.empty((reps, len(ks)))
    need_eigs = max(ks) > 2

    def one(i: int) -> None:
        rng = replication_rng(seed, STREAM_CLT, n, p, i)
        psi = psi_matrix(xi_matrix(sample_model(spec, rng))).values
        if need_eigs:
            lam = sym_eigenvalues(psi).eigenvalues
            for j, k in enumerate(ks):
                values[i, j] = float((lam**k).sum())
        else:
            for j, k in enumerate(ks):
                if k == 1:
                    values[i, j] = float(np.trace(psi))
                else:
                    values[i, j] = float((psi * psi).sum())

    run_indexed(one, reps, threads)
    samples = {
        k: CltSample(
            k=k,
            values=values[:, j].copy(),
            reference_variance=lss_cov(gamma, k, k),
        )
        for j, k in enumerate(ks)
    }
    return CltResult(n=n, p=p, reps=reps, seed=seed, gamma=gamma, samples=samples)
