"""Rank-correlation functionals and the correlation matrices built from them.

Three classical rank functionals of a permutation sigma on {1..n} (each the
value a sample correlation takes when the relative rank of the two columns
is sigma):

* ``f_rho``  Spearman: 1 - 6 sum_k (sigma(k)-k)^2 / (n(n^2-1))
* ``f_tau``  Kendall:  1 - 4 inv(sigma) / (n(n-1)), inv counting inversions
* ``f_xi``   Chatterjee: 1 - 3 sum_k |sigma(k+1)-sigma(k)| / (n^2-1)

From an n x p data matrix, ``xi_matrix`` assembles the asymmetric p x p
matrix Xi with Xi[i,j] = xi_n(column i, column j) off the diagonal and
exactly 1 on it, computed from the per-column rank permutations alone.  Its
two symmetrizations are ``phi_matrix`` (Phi = (Xi + Xi^T)/2) and
``psi_matrix`` (Psi = (Xi - I)(Xi - I)^T, a Gram matrix and hence PSD).
Spearman, Kendall, and Pearson matrices of the same data feed the
comparison tests.

All rank computations reject ties by default; ``tie_policy="random"``
breaks ties by a uniform random perturbation of order so that the
continuous-margin theory applies.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DegenerateColumn, InvalidSample, NotSymmetric, TiesPresent
from .permutations import Permutation, ranks_of, relative_rank

_SYMMETRIC_KINDS = ("phi", "psi", "spearman", "kendall", "pearson")


@dataclass(frozen=True)
class DataMatrix:
    """An n x p matrix of observations; rows are samples, columns variables."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise InvalidSample(f"expected a 2-d array, got shape {v.shape}")
        if v.shape[0] < 3 or v.shape[1] < 2:
            raise InvalidSample(f"need at least 3 rows and 2 columns, got {v.shape}")
        if not np.isfinite(v).all():
            raise InvalidSample("data contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class CorrelationMatrix:
    """A dense p x p correlation matrix tagged with its kind.

    Kind ``xi`` is asymmetric with unit diagonal; all other kinds are
    exactly symmetric by construction.
    """

    kind: str
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {v.shape}")
        if self.kind not in ("xi",) + _SYMMETRIC_KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind in _SYMMETRIC_KINDS and not np.array_equal(v, v.T):
            raise NotSymmetric(f"{self.kind} matrix must be exactly symmetric")
        if self.kind == "xi":
            if not np.all(np.diag(v) == 1.0):
                raise ValueError("xi matrix must have unit diagonal")
            off = v[~np.eye(v.shape[0], dtype=bool)]
            if off.size and (off.min() < -0.5 - 1e-12 or off.max() > 1.0 + 1e-12):
                raise ValueError("xi off-diagonals outside the [-1/2, 1] envelope")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def p(self) -> int:
        return self.values.shape[0]


def as_data(data) -> DataMatrix:
    """Coerce an array-like (or pass through a DataMatrix) to DataMatrix."""
    if isinstance(data, DataMatrix):
        return data
    return DataMatrix(np.asarray(data, dtype=float))


# ---------------------------------------------------------------------------
# rank functionals on permutations


def f_rho(sigma: Permutation) -> float:
    """Spearman functional 1 - 6 sum (sigma(k)-k)^2 / (n(n^2-1))."""
    return float(f_rho_exact(sigma))


def f_tau(sigma: Permutation) -> float:
    """Kendall functional 1 - 4 inv(sigma) / (n(n-1))."""
    return float(f_tau_exact(sigma))


def f_xi(sigma: Permutation) -> float:
    """Chatterjee functional 1 - 3 sum |sigma(k+1)-sigma(k)| / (n^2-1)."""
    return float(f_xi_exact(sigma))


def f_rho_exact(sigma: Permutation) -> Fraction:
    n = sigma.n
    disp = sum((v - k) ** 2 for k, v in enumerate(sigma.image, start=1))
    return 1 - Fraction(6 * disp, n * (n * n - 1))


def f_tau_exact(sigma: Permutation) -> Fraction:
    n = sigma.n
    return 1 - Fraction(4 * inversion_count(sigma.image), n * (n - 1))


def f_xi_exact(sigma: Permutation) -> Fraction:
    n = sigma.n
    img = sigma.image
    steps = sum(abs(img[k + 1] - img[k]) for k in range(n - 1))
    return 1 - Fraction(3 * steps, n * n - 1)


def inversion_count(seq) -> int:
    """Number of inversions of a sequence, by merge-sort in O(n log n)."""
    items = list(seq)

    def sort(lo: int, hi: int, buf: list) -> int:
        if hi - lo <= 1:
            return 0
        mid = (lo + hi) // 2
        count = sort(lo, mid, buf) + sort(mid, hi, buf)
        i, j, k = lo, mid, lo
        while i < mid and j < hi:
            if items[i] <= items[j]:
                buf[k] = items[i]
                i += 1
            else:
                buf[k] = items[j]
                count += mid - i
                j += 1
            k += 1
        buf[k:hi] = items[i:mid] if i < mid else items[j:hi]
        items[lo:hi] = buf[lo:hi]
        return count

    return sort(0, len(items), [0] * len(items))


# ---------------------------------------------------------------------------
# rankings of data columns


def column_ranks(data, tie_policy: str = "error", rng=None):
    """Per-column ranks of a data matrix.

    Returns ``(ranks, order)``: ``ranks[k, j]`` is the rank of entry (k, j)
    within column j (values 1..n), and ``order[:, j]`` sorts column j
    ascending, i.e. ``order[r-1, j]`` is the row holding rank r.  Everything
    downstream of the rank matrices depends on the data only through these.
    """
    x = as_data(data).values
    n, p = x.shape
    if tie_policy == "error":
        order = np.argsort(x, axis=0, kind="stable")
        srt = np.take_along_axis(x, order, axis=0)
        tied = np.nonzero((np.diff(srt, axis=0) == 0).any(axis=0))[0]
        if tied.size:
            raise TiesPresent(
                f"tied values in column {int(tied[0])}; use tie_policy='random'"
            )
    elif tie_policy == "random":
        gen = np.random.default_rng(rng)
        order = np.empty((n, p), dtype=np.intp)
        for j in range(p):
            order[:, j] = np.lexsort((gen.random(n), x[:, j]))
    else:
        raise ValueError(f"unknown tie_policy {tie_policy!r}")
    ranks = np.empty((n, p), dtype=np.int32)
    np.put_along_axis(ranks, order, np.arange(1, n + 1, dtype=np.int32)[:, None], axis=0)
    return ranks, order


def chatterjee_xi(x, y, tie_policy: str = "error", rng=None) -> float:
    """Chatterjee's rank correlation xi_n(x, y); asymmetric in (x, y)."""
    gen = np.random.default_rng(rng) if tie_policy == "random" else None
    rx = ranks_of(x, tie_policy, gen)
    ry = ranks_of(y, tie_policy, gen)
    return f_xi(relative_rank(rx, ry))


# ---------------------------------------------------------------------------
# matrix construction


def _xi_values_from_ranks(ranks: np.ndarray, order: np.ndarray) -> np.ndarray:
    """The Xi matrix from rank and sort-order matrices, unit diagonal set."""
    n, p = ranks.shape
    steps = np.empty((p, p))
    for i in range(p):
        seqs = ranks[order[:, i], :]  # column j = relative rank R_j o R_i^{-1}
        steps[i] = np.abs(np.diff(seqs, axis=0)).sum(axis=0, dtype=np.int64)
    xi = 1.0 - 3.0 * steps / (n * n - 1.0)
    np.fill_diagonal(xi, 1.0)
    return xi


def xi_matrix(data, tie_policy: str = "error", rng=None) -> CorrelationMatrix:
    """The Chatterjee rank correlation matrix Xi of a data matrix.

    Xi[i, j] = xi_n(column i, column j) for i != j, exactly 1 on the
    diagonal.  Each column is ranked once (O(n log n)); each ordered pair
    then costs O(n).
    """
    ranks, order = column_ranks(data, tie_policy, rng)
    return CorrelationMatrix("xi", _xi_values_from_ranks(ranks, order))


def xi_matrix_from_ranks(ranks) -> CorrelationMatrix:
    """Xi recomputed from a rank matrix alone; bit-identical to
    ``xi_matrix`` on the data the ranks came from."""
    r = np.asarray(ranks)
    order = np.argsort(r, axis=0).astype(np.intp)
    return CorrelationMatrix("xi", _xi_values_from_ranks(r.astype(np.int32), order))


def phi_matrix(xi: CorrelationMatrix) -> CorrelationMatrix:
    """The additive symmetrization Phi = (Xi + Xi^T)/2, unit diagonal set."""
    if xi.kind != "xi":
        raise ValueError("phi_matrix expects a kind='xi' matrix")
    v = 0.5 * (xi.values + xi.values.T)
    np.fill_diagonal(v, 1.0)
    return CorrelationMatrix("phi", v)


def psi_matrix(xi: CorrelationMatrix) -> CorrelationMatrix:
    """The Gram symmetrization Psi = (Xi - I)(Xi - I)^T (PSD)."""
    if xi.kind != "xi":
        raise ValueError("psi_matrix expects a kind='xi' matrix")
    a = xi.values - np.eye(xi.p)
    g = a @ a.T
    g = 0.5 * (g + g.T)
    return CorrelationMatrix("psi", g)


def spearman_values_from_ranks(ranks) -> np.ndarray:
    """Spearman matrix from tie-free ranks, exact in integer arithmetic.

    rho_ij = (12 sum_k R_ki R_kj - 3n(n+1)^2) / (n(n^2-1)); the Gram of the
    rank columns is integer-valued and well below 2^53, so the float64
    matmul is exact.
    """
    r = np.asarray(ranks, dtype=float)
    n = r.shape[0]
    gram = r.T @ r
    rho = (12.0 * gram - 3.0 * n * (n + 1.0) ** 2) / (n * (n * n - 1.0))
    rho = 0.5 * (rho + rho.T)
    np.fill_diagonal(rho, 1.0)
    return rho


def spearman_matrix(data, tie_policy: str = "error", rng=None) -> CorrelationMatrix:
    """Spearman correlation matrix (Pearson on ranks), exactly symmetric."""
    ranks, _ = column_ranks(data, tie_policy, rng)
    return CorrelationMatrix("spearman", spearman_values_from_ranks(ranks))


def kendall_values_from_ranks(ranks, chunk_elements: int = 1 << 24) -> np.ndarray:
    """Kendall matrix from tie-free ranks via an exact sign Gram product.

    tau_ij = (1/(n(n-1))) sum_{k != l} sgn(R_ki - R_li) sgn(R_kj - R_lj).
    The (n^2 x p) sign matrix is processed in row chunks bounded by
    ``chunk_elements`` values; all Gram entries are integers below 2^53, so
    the float64 accumulation is exact.
    """
    r = np.asarray(ranks, dtype=np.int32)
    n, p = r.shape
    gram = np.zeros((p, p))
    rows_per_chunk = max(1, chunk_elements // (n * p))
    for k0 in range(0, n, rows_per_chunk):
        k1 = min(n, k0 + rows_per_chunk)
        signs = np.sign(r[k0:k1, None, :] - r[None, :, :]).astype(float)
        block = signs.reshape((k1 - k0) * n, p)
        gram += block.T @ block
    tau = gram / (n * (n - 1.0))
    tau = 0.5 * (tau + tau.T)
    np.fill_diagonal(tau, 1.0)
    return tau


def kendall_matrix(data, tie_policy: str = "error", rng=None) -> CorrelationMatrix:
    """Kendall correlation matrix, exactly symmetric with unit diagonal."""
    ranks, _ = column_ranks(data, tie_policy, rng)
    return CorrelationMatrix("kendall", kendall_values_from_ranks(ranks))


def kendall_tau(x, y, tie_policy: str = "error", rng=None) -> float:
    """Kendall's tau of two samples via O(n log n) inversion counting."""
    gen = np.random.default_rng(rng) if tie_policy == "random" else None
    rx = ranks_of(x, tie_policy, gen)
    ry = ranks_of(y, tie_policy, gen)
    return f_tau(relative_rank(rx, ry))


def pearson_matrix(data) -> CorrelationMatrix:
    """Pearson correlation matrix of the raw data values."""
    x = as_data(data).values
    centered = x - x.mean(axis=0)
    scale = np.sqrt((centered * centered).sum(axis=0))
    bad = np.nonzero(scale == 0.0)[0]
    if bad.size:
        raise DegenerateColumn(f"zero variance in column {int(bad[0])}")
    z = centered / scale
    corr = z.T @ z
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.0)
    return CorrelationMatrix("pearson", corr)
