"""Spectral theory of the Chatterjee rank-correlation matrix.

Estimation of the pairwise rank correlation xi and its p x p matrix
forms, empirical spectral distributions against semicircle and
Marchenko-Pastur limits, Gaussian fluctuations of trace powers,
high-dimensional complete-independence tests built on them, and an exact
rational enumeration oracle for the finite-n constants.
"""

__version__ = "0.1.0"

from .errors import (
    CalibrationTooSmall,
    DegenerateColumn,
    EigenFailure,
    EnumerationTooLarge,
    InvalidSample,
    NotDistributionFree,
    NotPSD,
    NotSymmetric,
    OddDimension,
    RangeExceeded,
    SizeMismatch,
    TiesPresent,
    XiSpectraError,
)
from .hightest import (
    RANK_BASED,
    STATISTIC_FUNCTIONS,
    STATISTIC_IDS,
    TestConfig,
    TestReport,
    Workspace,
    bao_q_rho4,
    calibrate_null,
    han_m_rho,
    han_m_tau,
    leung_q_rho2,
    leung_q_tau2,
    li_q_tau4,
    null_statistic_stream,
    q_xi2,
    q_xi4,
    schott_q_r2,
    simulate_q_xi4_centering,
)
from .limitlaws import (
    LssGaussian,
    MPLaw,
    SemicircleLaw,
    catalan,
    exact_mean_tr_psi,
    exact_mean_xi_sq,
    exact_var_sqrtn_xi,
    exact_var_xi_sq,
    lss_cov,
    mp_cdf,
    mp_moment,
    mp_pdf,
    semicircle_cdf,
    semicircle_central_moment,
    semicircle_pdf,
)
from .models import (
    MODEL_IDS,
    ModelSpec,
    psd_factor,
    replication_rng,
    sample_model,
    standard_cauchy,
    standard_normal,
)
from .montecarlo import (
    CltResult,
    CltSample,
    EsdResult,
    SimTable,
    run_clt,
    run_esd,
    run_power,
    run_size,
)
from .oracle import (
    OracleReport,
    oracle_expectation,
    relative_rank_expectation,
    verification_suite,
    verify_arrow_probabilities,
    verify_counterexample,
    verify_jxi_third_moment,
    verify_mean_tr_psi,
    verify_moment_displays,
    verify_tree_independence,
)
from .permutations import (
    DependenceGraph,
    Permutation,
    compose,
    enumerate_all,
    inverse,
    is_independent_family,
    ranks_of,
    relative_rank,
    sample_uniform,
)
from .rankcorr import (
    CorrelationMatrix,
    DataMatrix,
    chatterjee_xi,
    column_ranks,
    f_rho,
    f_rho_exact,
    f_tau,
    f_tau_exact,
    f_xi,
    f_xi_exact,
    inversion_count,
    kendall_matrix,
    kendall_tau,
    pearson_matrix,
    phi_matrix,
    psi_matrix,
    spearman_matrix,
    xi_matrix,
    xi_matrix_from_ranks,
)
from .spectra import (
    Histogram,
    SpectralSummary,
    esd_cdf,
    histogram,
    ks_distance,
    sym_eigenvalues,
    trace_power,
)
