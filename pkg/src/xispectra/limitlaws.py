"""Limiting spectral laws, their moments, and exact finite-n moments.

Covers the three limit objects the spectral theory converges to:

* the semicircle law W(u, r) with center u and radius r, the weak limit of
  the ESD of the additive symmetrization Phi_n when p/n -> gamma, at
  parameters (1, 2 sqrt(gamma/5));
* the Marchenko-Pastur law MP(y, sigma^2), the weak limit of the ESD of
  the Gram symmetrization Psi_n, at parameters (1, 2 gamma/5);
* the mean-zero Gaussian process (G_k) governing linear spectral
  statistics tr(Psi_n^k), through its covariance function ``lss_cov``.

Alongside these are the exact finite-n null moments of the Chatterjee
correlation (as rationals), and the Catalan-number helpers the covariance
formula is built from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate

from .errors import RangeExceeded

_MOMENT_LIMIT = 20
_CATALAN_LIMIT = 30
_LSS_LIMIT = 12


@dataclass(frozen=True)
class SemicircleLaw:
    """Semicircle law W(u, r): density 2 sqrt(r^2 - (x-u)^2) / (pi r^2)."""

    u: float
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("radius r must be positive")


def semicircle_pdf(law: SemicircleLaw, x) -> float | np.ndarray:
    x = np.asarray(x, dtype=float)
    d2 = law.r**2 - (x - law.u) ** 2
    out = np.where(d2 > 0, 2.0 * np.sqrt(np.maximum(d2, 0.0)) / (np.pi * law.r**2), 0.0)
    return out if out.ndim else float(out)


def semicircle_cdf(law: SemicircleLaw, x) -> float | np.ndarray:
    t = np.clip((np.asarray(x, dtype=float) - law.u) / law.r, -1.0, 1.0)
    out = 0.5 + (t * np.sqrt(1.0 - t * t) + np.arcsin(t)) / np.pi
    return out if out.ndim else float(out)


def semicircle_central_moment(law: SemicircleLaw, m: int) -> float:
    """The m-th central moment: 0 for odd m, C_{m/2} (r/2)^m for even m."""
    if m < 0 or m > _MOMENT_LIMIT:
        raise RangeExceeded(f"moment order {m} outside 0..{_MOMENT_LIMIT}")
    if m % 2 == 1:
        return 0.0
    half = m // 2
    return float(catalan(half)) * (law.r / 2.0) ** m


@dataclass(frozen=True)
class MPLaw:
    """Marchenko-Pastur law MP(y, sigma^2).

    Continuous density sqrt((b-x)(x-a)) / (2 pi x y sigma^2) on [a, b] with
    a = sigma^2 (1-sqrt(y))^2 and b = sigma^2 (1+sqrt(y))^2, plus a point
    mass 1 - 1/y at zero when y > 1.
    """

    y: float
    sigma2: float

    def __post_init__(self):
        if not (self.y > 0 and self.sigma2 > 0):
            raise ValueError("y and sigma2 must be positive")

    @property
    def a(self) -> float:
        return self.sigma2 * (1.0 - math.sqrt(self.y)) ** 2

    @property
    def b(self) -> float:
        return self.sigma2 * (1.0 + math.sqrt(self.y)) ** 2

    @property
    def atom(self) -> float:
        return max(0.0, 1.0 - 1.0 / self.y)


def mp_pdf(law: MPLaw, x) -> float | np.ndarray:
    """Continuous part of the density (the atom at zero is not included)."""
    x = np.asarray(x, dtype=float)
    inside = (x > law.a) & (x < law.b) & (x > 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        val = np.sqrt(np.maximum((law.b - x) * (x - law.a), 0.0)) / (
            2.0 * np.pi * x * law.y * law.sigma2
        )
    out = np.where(inside, val, 0.0)
    return out if out.ndim else float(out)


def _mp_theta(law: MPLaw, x: float) -> float:
    """Invert x = sigma^2 (1 + y - 2 sqrt(y) cos(theta)) on [a, b]."""
    c = (1.0 + law.y - x / law.sigma2) / (2.0 * math.sqrt(law.y))
    return math.acos(min(1.0, max(-1.0, c)))


def mp_cdf(law: MPLaw, x) -> float:
    """CDF including the atom; continuous part by adaptive quadrature.

    Integrates in the angle parametrization x(theta) = sigma^2 (1 + y
    - 2 sqrt(y) cos(theta)), where the density transforms to the bounded
    smooth integrand 2 sin^2(t) / (pi (1 + y - 2 sqrt(y) cos t)); the
    square-root edge singularities of the density disappear, so the
    quadrature converges at full tolerance in a few subdivisions.
    """
    x = float(x)
    if x < 0:
        return 0.0
    if x <= law.a:
        return law.atom
    if x >= law.b:
        return 1.0
    theta = _mp_theta(law, x)
    root_y = math.sqrt(law.y)
    base = (1.0 - root_y) ** 2

    # half-angle form: 1 + y - 2 sqrt(y) cos t = (1-sqrt(y))^2 + 4 sqrt(y) sin^2(t/2)
    # stays exact for tiny t where cos t rounds to 1; at y=1 the sin^2(t/2)
    # factor cancels, leaving the bounded limit (2/pi) cos^2(t/2)
    def g(t: float) -> float:
        s2 = math.sin(0.5 * t) ** 2
        c2 = math.cos(0.5 * t) ** 2
        if base == 0.0:
            return 2.0 * c2 / math.pi
        return 8.0 * s2 * c2 / (math.pi * (base + 4.0 * root_y * s2))

    val, _ = integrate.quad(g, 0.0, theta, limit=200, epsabs=1e-11, epsrel=1e-11)
    return min(1.0, law.atom + val)


def _mp_cdf_closed(law: MPLaw, x) -> float:
    """Closed-form CDF, derived independently; test cross-check for mp_cdf.

    In the angle parametrization the integrand splits by polynomial
    division into sin/linear terms plus a standard 1/(A - B cos t)
    integral, giving for y != 1

        F = atom + [sin(theta)/sqrt(y) + (1+y) theta / (2y)
            - (|1-y|/y) arctan((1+sqrt(y))/|1-sqrt(y)| tan(theta/2))] / pi,

    and for y = 1 simply (theta + sin(theta)) / pi.
    """
    x = float(x)
    if x < 0:
        return 0.0
    if x <= law.a:
        return law.atom
    if x >= law.b:
        return 1.0
    theta = _mp_theta(law, x)
    y = law.y
    if y == 1.0:
        return (theta + math.sin(theta)) / math.pi
    if theta == math.pi:
        arc = math.pi / 2.0
    else:
        root_y = math.sqrt(y)
        arc = math.atan((1.0 + root_y) / abs(1.0 - root_y) * math.tan(theta / 2.0))
    val = (
        math.sin(theta) / math.sqrt(y)
        + (1.0 + y) * theta / (2.0 * y)
        - abs(1.0 - y) / y * arc
    ) / math.pi
    return min(1.0, law.atom + val)


def mp_moment(law: MPLaw, k: int) -> float:
    """The k-th moment: sigma^{2k} sum_{r<k} y^r/(r+1) C(k,r) C(k-1,r)."""
    if k < 0 or k > _MOMENT_LIMIT:
        raise RangeExceeded(f"moment order {k} outside 0..{_MOMENT_LIMIT}")
    if k == 0:
        return 1.0
    total = sum(
        law.y**r / (r + 1) * math.comb(k, r) * math.comb(k - 1, r) for r in range(k)
    )
    return law.sigma2**k * total


@dataclass(frozen=True)
class LssGaussian:
    """The mean-zero Gaussian limit (G_k) of centered tr(Psi_n^k)."""

    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")


def _lss_inner_sum(k: int, t: int) -> Fraction:
    """S_{k,t} = sum_l binom(2k-2l-1, k-l-t) binom(2l+1, l+1) / (2k-2l-1)."""
    total = Fraction(0)
    for ell in range(k - t + 1):
        total += Fraction(
            math.comb(2 * k - 2 * ell - 1, k - ell - t) * math.comb(2 * ell + 1, ell + 1),
            2 * k - 2 * ell - 1,
        )
    return total


def lss_cov(g, k1: int, k2: int) -> float:
    """Cov(G_{k1}, G_{k2}) of the linear-spectral-statistic limit process.

    (2 gamma/5)^{k1+k2} [ 2 binom(2k1, k1+1) binom(2k2, k2+1)
      + 2 sum_{t=2}^{k1 ^ k2} t (2t-1)^2 S_{k1,t} S_{k2,t} ],
    with the bracket accumulated in exact rational arithmetic.  ``g`` is
    an :class:`LssGaussian` or its gamma ratio directly.
    """
    if not isinstance(g, LssGaussian):
        g = LssGaussian(float(g))
    for k in (k1, k2):
        if k < 1 or k > _LSS_LIMIT:
            raise RangeExceeded(f"index {k} outside 1..{_LSS_LIMIT}")
    bracket = Fraction(2 * math.comb(2 * k1, k1 + 1) * math.comb(2 * k2, k2 + 1))
    for t in range(2, min(k1, k2) + 1):
        bracket += 2 * t * (2 * t - 1) ** 2 * _lss_inner_sum(k1, t) * _lss_inner_sum(k2, t)
    return float(Fraction(2, 5) ** (k1 + k2) * bracket) * g.gamma ** (k1 + k2)


# ---------------------------------------------------------------------------
# exact finite-n null moments (rationals)


def exact_mean_tr_psi(n: int, p: int) -> Fraction:
    """E tr(Psi_n) under complete independence, exactly:
    p(p-1)(n-2)(4n-7) / (10(n-1)^2(n+1))."""
    if n < 3 or p < 1:
        raise ValueError("need n >= 3 and p >= 1")
    return Fraction(p * (p - 1) * (n - 2) * (4 * n - 7), 10 * (n - 1) ** 2 * (n + 1))


def exact_mean_xi_sq(n: int) -> Fraction:
    """E[xi_n^2] under independence: (n-2)(4n-7) / (10(n-1)^2(n+1))."""
    if n < 3:
        raise ValueError("need n >= 3")
    return Fraction((n - 2) * (4 * n - 7), 10 * (n - 1) ** 2 * (n + 1))


def exact_var_sqrtn_xi(n: int) -> Fraction:
    """Var(sqrt(n) xi_n) under independence: n(n-2)(4n-7) / (10(n+1)(n-1)^2)."""
    if n < 3:
        raise ValueError("need n >= 3")
    return Fraction(n * (n - 2) * (4 * n - 7), 10 * (n + 1) * (n - 1) ** 2)


def exact_var_xi_sq(n: int) -> Fraction:
    """The closed-form expression tabulated for Var(xi_n^2) under independence.

    Evaluates (224n^5 - 1792n^4 + 5051n^3 - 4969n^2 - 2458n + 18128) /
    (700(n-1)^4(n+1)^3) exactly.  Exhaustive enumeration (see the oracle
    module) confirms this expression for 4 <= n <= 8 but shows it does not
    hold at n = 3, where the true variance is 1/2048.
    """
    if n < 3:
        raise ValueError("need n >= 3")
    numerator = (
        224 * n**5 - 1792 * n**4 + 5051 * n**3 - 4969 * n**2 - 2458 * n + 18128
    )
    return Fraction(numerator, 700 * (n - 1) ** 4 * (n + 1) ** 3)


# ---------------------------------------------------------------------------
# Catalan helpers


def catalan(m: int) -> int:
    """The m-th Catalan number (2m)! / (m! (m+1)!)."""
    if m < 0 or m > _CATALAN_LIMIT:
        raise RangeExceeded(f"Catalan index {m} outside 0..{_CATALAN_LIMIT}")
    return math.comb(2 * m, m) // (m + 1)


def catalan_convolution(n: int, m: int) -> int:
    """The m-fold Catalan convolution sum_{i_1+..+i_m=n} prod_j C_{i_j},
    in closed form m/(2n+m) binom(2n+m, n)."""
    if m < 1 or m > _CATALAN_LIMIT or n < 0 or n > _CATALAN_LIMIT:
        raise RangeExceeded(f"arguments ({n},{m}) outside the guarded range")
    value = Fraction(m, 2 * n + m) * math.comb(2 * n + m, n)
    assert value.denominator == 1
    return int(value)
