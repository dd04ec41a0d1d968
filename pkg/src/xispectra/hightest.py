"""Nine complete-independence test statistics and their calibration.

The null hypothesis is complete independence of the p columns.  Two
statistics are built on the Chatterjee correlation matrix through linear
spectral statistics of Psi = (Xi - I)(Xi - I)^T:

* ``q_xi2``   standardized tr(Psi), exact rational centering, asymptotic
              normal threshold;
* ``q_xi4``   standardized tr(Psi^2), simulated (or user-provided)
              centering, asymptotic normal threshold.

Seven comparison statistics from the complete-independence literature:

* ``schott_q_r2``   sum of squared Pearson correlations, standardized
                    (Gaussian theory; not distribution-free);
* ``leung_q_rho2``  sum of squared Spearman correlations, centered;
* ``leung_q_tau2``  sum of squared Kendall correlations, centered;
* ``han_m_rho``     extreme-value statistic of the largest squared
                    Spearman correlation;
* ``han_m_tau``     extreme-value statistic of the largest squared
                    Kendall correlation;
* ``bao_q_rho4``    fourth-moment (tr S^4) Spearman statistic;
* ``li_q_tau4``     fourth-moment (tr K^4) Kendall statistic.

All tests are upper-sided: large values indicate dependence.  Every
statistic except Schott's depends on the data only through column ranks,
hence is distribution-free under the null; :func:`calibrate_null`
exploits this to produce exact-up-to-MC-error thresholds from
standard-normal null replications.

Reported values follow the uniform decomposition
``value = (raw - centering) / scale``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtr, ndtri

from ._parallel import run_indexed
from .errors import CalibrationTooSmall, NotDistributionFree
from .limitlaws import exact_mean_tr_psi, lss_cov
from .models import (
    STREAM_CALIBRATION,
    STREAM_CENTERING,
    ModelSpec,
    replication_rng,
    sample_model,
)
from .rankcorr import (
    DataMatrix,
    as_data,
    column_ranks,
    kendall_values_from_ranks,
    pearson_matrix,
    psi_matrix,
    spearman_values_from_ranks,
    xi_matrix_from_ranks,
)

STATISTIC_IDS = (
    "q_xi2",
    "q_xi4",
    "q_r2",
    "q_rho2",
    "q_tau2",
    "m_rho",
    "m_tau",
    "q_rho4",
    "q_tau4",
)

#: statistics whose value depends on the data only through column ranks
RANK_BASED = frozenset(s for s in STATISTIC_IDS if s != "q_r2")

#: statistics with no usable closed-form threshold: Monte-Carlo by default
_MC_DEFAULT = frozenset({"q_rho2", "q_tau2", "q_rho4", "q_tau4"})

_NORMAL_LIMIT = frozenset({"q_xi2", "q_xi4", "q_r2"})
_EXTREME_VALUE_LIMIT = frozenset({"m_rho", "m_tau"})


@dataclass(frozen=True)
class TestConfig:
    """Decision-rule settings shared by all nine tests.

    ``calibration`` is ``None`` for the per-statistic default (asymptotic
    where a limit law is implemented, Monte-Carlo otherwise), or one of
    ``"asymptotic"`` / ``"monte_carlo"``.  Monte-Carlo thresholds use
    ``mc_reps`` null replications seeded from ``mc_seed``.
    """

    __test__ = False  # not a test case, despite the class name

    alpha: float = 0.05
    side: str = "upper"
    calibration: str | None = None
    mc_reps: int = 2000
    mc_seed: int = 0
    mc_threads: int = 1

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.side != "upper":
            raise ValueError("only upper-sided tests are defined")
        if self.calibration not in (None, "asymptotic", "monte_carlo"):
            raise ValueError(f"unknown calibration mode {self.calibration!r}")
        if self.mc_reps < 100:
            raise CalibrationTooSmall(f"mc_reps must be >= 100, got {self.mc_reps}")


@dataclass(frozen=True)
class TestReport:
    """Outcome of one test: standardized value, threshold, decision.

    ``value = (raw - centering) / scale`` and ``reject`` iff
    ``value > threshold``.  ``p_value`` is present only when the
    calibration mode has a limit law attached.
    """

    __test__ = False  # not a test case, despite the class name

    name: str
    value: float
    centering: float
    scale: float
    threshold: float
    p_value: float | None
    reject: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "centering": self.centering,
            "scale": self.scale,
            "threshold": self.threshold,
            "p_value": self.p_value,
            "reject": self.reject,
        }


class Workspace:
    """Lazy cache of the per-dataset intermediates the statistics share.

    Ranking happens once; each correlation matrix and trace is computed on
    first use and reused by later statistics on the same dataset.
    """

    def __init__(self, data: DataMatrix, tie_policy: str = "error", rng=None):
        self.data = as_data(data)
        self._tie_policy = tie_policy
        self._rng = rng
        self._cache: dict[str, object] = {}

    @property
    def n(self) -> int:
        return self.data.n

    @property
    def p(self) -> int:
        return self.data.p

    def _get(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def ranks(self) -> np.ndarray:
        def build():
            ranks, order = column_ranks(self.data, self._tie_policy, self._rng)
            self._cache["order"] = order
            return ranks

        return self._get("ranks", build)

    def psi(self) -> np.ndarray:
        def build():
            ranks = self.ranks()
            return psi_matrix(xi_matrix_from_ranks(ranks)).values

        return self._get("psi", build)

    def tr_psi(self) -> float:
        return self._get("tr_psi", lambda: float(np.trace(self.psi())))

    def tr_psi2(self) -> float:
        def build():
            g = self.psi()
            return float((g * g).sum())

        return self._get("tr_psi2", build)

    def spearman(self) -> np.ndarray:
        return self._get("spearman", lambda: spearman_values_from_ranks(self.ranks()))

    def kendall(self) -> np.ndarray:
        return self._get("kendall", lambda: kendall_values_from_ranks(self.ranks()))

    def pearson(self) -> np.ndarray:
        return self._get("pearson", lambda: pearson_matrix(self.data).values)


def _offdiag_square_sum(m: np.ndarray) -> float:
    """sum_{i<j} m_ij^2 for a symmetric matrix with unit diagonal."""
    p = m.shape[0]
    return 0.5 * float((m * m).sum() - p)


def _offdiag_square_max(m: np.ndarray) -> float:
    sq = m * m
    np.fill_diagonal(sq, -np.inf)
    return float(sq.max())


def _raw_q_rho4(ws: Workspace) -> float:
    s = ws.spearman()
    m = s @ s
    return (ws.n / ws.p) ** 4 * float((m * m).sum())


def _raw_q_tau4(ws: Workspace) -> float:
    k = ws.kendall()
    m = k @ k
    return float((m * m).sum())


#: statistic id -> function Workspace -> raw (uncentered, unscaled) value
_RAW = {
    "q_xi2": lambda ws: ws.tr_psi(),
    "q_xi4": lambda ws: ws.tr_psi2(),
    "q_r2": lambda ws: _offdiag_square_sum(ws.pearson()),
    "q_rho2": lambda ws: _offdiag_square_sum(ws.spearman()),
    "q_tau2": lambda ws: _offdiag_square_sum(ws.kendall()),
    "m_rho": lambda ws: (ws.n - 1.0) * _offdiag_square_max(ws.spearman()),
    "m_tau": lambda ws: (
        9.0 * ws.n * (ws.n - 1.0) / (2.0 * (2.0 * ws.n + 5.0))
    )
    * _offdiag_square_max(ws.kendall()),
    "q_rho4": _raw_q_rho4,
    "q_tau4": _raw_q_tau4,
}


def _centering_scale(stat: str, n: int, p: int, q_xi4_centering: float | None = None):
    """The (centering, scale) pair of each statistic's standardization.

    Centerings are the null means of the raw values: exact rationals for
    tr(Psi), exact Gaussian moments for Pearson (E r_ij^2 = 1/(n-1)),
    the classical rank-moment formulas for Spearman/Kendall sums, and the
    growth terms of the extreme-value statistics.  The tr(Psi^2) centering
    must be supplied (simulated or user-provided).
    """
    gamma = p / n
    if stat == "q_xi2":
        return float(exact_mean_tr_psi(n, p)), math.sqrt(lss_cov(gamma, 1, 1))
    if stat == "q_xi4":
        if q_xi4_centering is None:
            raise ValueError("q_xi4 needs a centering value")
        return float(q_xi4_centering), math.sqrt(lss_cov(gamma, 2, 2))
    if stat == "q_r2":
        scale = math.sqrt(p * (p - 1.0) * (n - 1.0) / (n * n * (n + 2.0)))
        return p * (p - 1.0) / (2.0 * (n - 1.0)), scale
    if stat == "q_rho2":
        return p * (p - 1.0) / (2.0 * (n - 1.0)), 1.0
    if stat == "q_tau2":
        return p * (p - 1.0) * (2.0 * n + 5.0) / (9.0 * n * (n - 1.0)), 1.0
    if stat in ("m_rho", "m_tau"):
        return 4.0 * math.log(p) - math.log(math.log(p)), 1.0
    if stat == "q_rho4":
        n4 = float(n) ** 4
        center = (
            n4 / (n - 1.0) ** 3
            + n4 / float(p) ** 3
            + 6.0 * n4 / ((n - 1.0) * p * p)
            + 6.0 * n4 / (p * (n - 1.0) ** 2)
        )
        return center, 1.0
    if stat == "q_tau4":
        center = (
            p
            + 8.0 * p * p / (3.0 * n)
            + 128.0 * float(p) ** 3 / (n * n)
            + 16.0 * float(p) ** 4 / (81.0 * float(n) ** 3)
        )
        return center, 1.0
    raise ValueError(f"unknown statistic {stat!r}")


def statistic_value(
    stat: str, ws: Workspace, q_xi4_centering: float | None = None
) -> float:
    """Standardized value of one statistic on a prepared workspace."""
    centering, scale = _centering_scale(stat, ws.n, ws.p, q_xi4_centering)
    return (_RAW[stat](ws) - centering) / scale


def extreme_value_threshold(alpha: float) -> float:
    """Upper-alpha point of the Gumbel-type limit exp(-(8 pi)^{-1/2} e^{-y/2})."""
    return -2.0 * math.log(-math.sqrt(8.0 * math.pi) * math.log1p(-alpha))


def extreme_value_p(value: float) -> float:
    return -math.expm1(-math.exp(-value / 2.0) / math.sqrt(8.0 * math.pi))


def simulate_q_xi4_centering(
    n: int, p: int, reps: int = 1000, seed: int = 0, threads: int = 1
) -> float:
    """Null mean of tr(Psi^2) at (n, p) by simulation.

    tr(Psi^2) is rank-based, hence distribution-free under the null; the
    replications use standard-normal columns.  Deterministic given seed.
    """
    if reps < 100:
        raise CalibrationTooSmall(f"centering needs >= 100 replications, got {reps}")
    spec = ModelSpec("a", n, p)
    out = np.empty(reps)

    def one(i: int) -> None:
        rng = replication_rng(seed, STREAM_CENTERING, n, p, i)
        out[i] = Workspace(sample_model(spec, rng)).tr_psi2()

    run_indexed(one, reps, threads)
    return float(out.mean())


def null_statistic_stream(
    stat: str,
    n: int,
    p: int,
    reps: int,
    seed: int = 0,
    generator: str = "gaussian",
    q_xi4_centering: float | None = None,
    threads: int = 1,
) -> np.ndarray:
    """The statistic's values over ``reps`` independent null datasets.

    ``generator`` chooses the null marginals ("gaussian" or "cauchy");
    both consume one uniform per entry through increasing transforms, so
    rank-based statistics produce bit-identical streams under either.
    """
    if stat not in STATISTIC_IDS:
        raise ValueError(f"unknown statistic {stat!r}")
    if generator not in ("gaussian", "cauchy"):
        raise ValueError(f"unknown null generator {generator!r}")
    if stat == "q_xi4" and q_xi4_centering is None:
        q_xi4_centering = simulate_q_xi4_centering(n, p, seed=seed, threads=threads)
    spec = ModelSpec("a" if generator == "gaussian" else "b", n, p)
    out = np.empty(reps)

    def one(i: int) -> None:
        rng = replication_rng(seed, STREAM_CALIBRATION, n, p, i)
        ws = Workspace(sample_model(spec, rng))
        out[i] = statistic_value(stat, ws, q_xi4_centering)

    run_indexed(one, reps, threads)
    return out


def calibrate_null(
    stat: str,
    n: int,
    p: int,
    reps: int = 2000,
    seed: int = 0,
    alpha: float = 0.05,
    generator: str = "gaussian",
    allow_model_dependent: bool = False,
    threads: int = 1,
    q_xi4_centering: float | None = None,
) -> float:
    """Empirical upper-alpha threshold of a statistic under the null.

    Exact up to Monte-Carlo error for rank-based statistics, whose null
    law does not depend on the (continuous) marginals.  The Pearson-based
    statistic is not distribution-free: calibrating it is refused unless
    ``allow_model_dependent`` is set, in which case the threshold is valid
    only for the chosen generator's marginals.
    """
    if stat not in STATISTIC_IDS:
        raise ValueError(f"unknown statistic {stat!r}")
    if reps < 100:
        raise CalibrationTooSmall(f"calibration needs >= 100 replications, got {reps}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if stat not in RANK_BASED:
        if not allow_model_dependent:
            raise NotDistributionFree(
                f"{stat!r} is not rank-based; its null law depends on the marginals. "
                "Pass allow_model_dependent=True to calibrate against a chosen model."
            )
        warnings.warn(
            f"calibrating {stat!r} against {generator!r} marginals; the threshold "
            "is model-dependent",
            stacklevel=2,
        )
    draws = null_statistic_stream(
        stat, n, p, reps, seed, generator, q_xi4_centering, threads=threads
    )
    return float(np.quantile(draws, 1.0 - alpha, method="higher"))


def _resolve_calibration(stat: str, config: TestConfig) -> str:
    if config.calibration is not None:
        return config.calibration
    return "monte_carlo" if stat in _MC_DEFAULT else "asymptotic"


def _decide(
    stat: str,
    ws: Workspace,
    config: TestConfig | None,
    threshold_override: float | None,
    q_xi4_centering: float | None = None,
) -> TestReport:
    config = config or TestConfig()
    centering, scale = _centering_scale(stat, ws.n, ws.p, q_xi4_centering)
    value = (_RAW[stat](ws) - centering) / scale
    mode = _resolve_calibration(stat, config)

    p_value: float | None = None
    if stat in _NORMAL_LIMIT:
        p_value = float(ndtr(-value))
    elif stat in _EXTREME_VALUE_LIMIT:
        p_value = extreme_value_p(value)

    if threshold_override is not None:
        threshold = float(threshold_override)
    elif mode == "asymptotic":
        if stat in _NORMAL_LIMIT:
            threshold = float(ndtri(1.0 - config.alpha))
        elif stat in _EXTREME_VALUE_LIMIT:
            threshold = extreme_value_threshold(config.alpha)
        else:
            raise ValueError(
                f"{stat!r} has no asymptotic threshold; use Monte-Carlo calibration "
                "or pass an explicit threshold"
            )
    else:
        # the threshold stream must share q_xi4's centering constant so that
        # value and threshold sit on the same affine scale
        threshold = calibrate_null(
            stat,
            ws.n,
            ws.p,
            reps=config.mc_reps,
            seed=config.mc_seed,
            alpha=config.alpha,
            threads=config.mc_threads,
            allow_model_dependent=False,
            q_xi4_centering=q_xi4_centering,
        )
        p_value = None
    return TestReport(
        name=stat,
        value=float(value),
        centering=float(centering),
        scale=float(scale),
        threshold=float(threshold),
        p_value=p_value,
        reject=bool(value > threshold),
    )


def q_xi2(
    data,
    config: TestConfig | None = None,
    threshold: float | None = None,
    tie_policy: str = "error",
    rng=None,
) -> TestReport:
    """Test via standardized tr(Psi): exact rational centering, variance
    from the linear-spectral-statistic covariance at gamma = p/n."""
    ws = Workspace(as_data(data), tie_policy, rng)
    return _decide("q_xi2", ws, config, threshold)


def q_xi4(
    data,
    config: TestConfig | None = None,
    centering: float | None = None,
    centering_reps: int = 1000,
    centering_seed: int = 0,
    threshold: float | None = None,
    tie_policy: str = "error",
    rng=None,
) -> TestReport:
    """Test via standardized tr(Psi^2).

    The null mean of tr(Psi^2) has no implemented closed form; pass
    ``centering`` to reuse a precomputed value, else it is simulated with
    ``centering_reps`` null replications (>= 100) from ``centering_seed``.
    """
    ws = Workspace(as_data(data), tie_policy, rng)
    if centering is None:
        centering = simulate_q_xi4_centering(ws.n, ws.p, centering_reps, centering_seed)
    return _decide("q_xi4", ws, config, threshold, q_xi4_centering=centering)


def schott_q_r2(
    data, config: TestConfig | None = None, threshold: float | None = None
) -> TestReport:
    """Sum of squared Pearson correlations, standardized to asymptotic
    N(0,1) under Gaussian sampling.

    Centering uses the exact Gaussian null moment E r_ij^2 = 1/(n-1),
    i.e. p(p-1)/(2(n-1)).  Not distribution-free: sizes are unreliable
    under heavy-tailed data.
    """
    config = config or TestConfig()
    if _resolve_calibration("q_r2", config) == "monte_carlo" and threshold is None:
        raise NotDistributionFree(
            "Monte-Carlo calibration of the Pearson statistic is model-dependent; "
            "use calibrate_null(..., allow_model_dependent=True) and pass the "
            "threshold explicitly"
        )
    ws = Workspace(as_data(data))
    return _decide("q_r2", ws, config, threshold)


def leung_q_rho2(
    data,
    config: TestConfig | None = None,
    threshold: float | None = None,
    tie_policy: str = "error",
    rng=None,
) -> TestReport:
    """Sum of squared Spearman correlations minus its exact null mean;
    Monte-Carlo threshold by default."""
    ws = Workspace(as_data(data), tie_policy, rng)
    return _decide("q_rho2", ws, config, threshold)


def leung_q_tau2(
    data,
    config: TestConfig | None = None,
    threshold: float | None = None,
    tie_policy: str = "error",
    rng=None,
) -> TestReport:
    """Sum of squared Kendall correlations minus its exact null mean;
    Monte-Carlo threshold by default."""
    ws = Workspace(as_data(data), tie_policy, rng)
    return _decide("q_tau2", ws, config, threshold)


def han_m_rho(
    data,
    config: TestConfig | None = None,
    threshold: float | None = None,
    tie_policy: str = "error",
    rng=None,
) -> TestReport:
    """Largest squared Spearman correlation, recentered on its 4 log p
    growth; Gumbel-type asymptotic threshold."""
    ws = Workspace(as_data(data), tie_policy, rng)
    return _decide("m_rho", ws, config, threshold)


def han_m_tau(
    data,
    config: TestConfig | None = None,
    threshold: float | None = None,
    tie_policy: str = "error",
    rng=None,
) -> TestReport:
    """Largest squared Kendall correlation, recentered on its 4 log p
    growth; Gumbel-type asymptotic threshold."""
    ws = Workspace(as_data(data), tie_policy, rng)
    return _decide("m_tau", ws, config, threshold)


def bao_q_rho4(
    data,
    config: TestConfig | None = None,
    threshold: float | None = None,
    tie_policy: str = "error",
    rng=None,
) -> TestReport:
    """Fourth spectral moment (n/p)^4 tr(S^4) of the Spearman matrix,
    recentered; Monte-Carlo threshold by default."""
    ws = Workspace(as_data(data), tie_policy, rng)
    return _decide("q_rho4", ws, config, threshold)


def li_q_tau4(
    data,
    config: TestConfig | None = None,
    threshold: float | None = None,
    tie_policy: str = "error",
    rng=None,
) -> TestReport:
    """Fourth spectral moment tr(K^4) of the Kendall matrix, recentered;
    Monte-Carlo threshold by default."""
    ws = Workspace(as_data(data), tie_policy, rng)
    return _decide("q_tau4", ws, config, threshold)


#: statistic id -> public single-dataset operation
STATISTIC_FUNCTIONS = {
    "q_xi2": q_xi2,
    "q_xi4": q_xi4,
    "q_r2": schott_q_r2,
    "q_rho2": leung_q_rho2,
    "q_tau2": leung_q_tau2,
    "m_rho": han_m_rho,
    "m_tau": han_m_tau,
    "q_rho4": bao_q_rho4,
    "q_tau4": li_q_tau4,
}


def with_alpha(config: TestConfig | None, alpha: float) -> TestConfig:
    """A copy of the config (or the default) at a different level."""
    return replace(config or TestConfig(), alpha=alpha)
