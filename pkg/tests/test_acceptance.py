"""Acceptance gate: ten end-to-end criteria, one printed verdict line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the verdict lines as
they happen; without ``-s`` pytest shows them for failing tests only.

Criterion 1 asserts exact rational equality of every tabulated reference
constant against independent enumeration.  Two reference values are known
to be unattainable (the enumerated truths differ; see the oracle module
docstring and the verdict message) — that test fails by design rather than
hiding the discrepancy.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import skew

from xispectra.hightest import STATISTIC_FUNCTIONS, null_statistic_stream
from xispectra.limitlaws import exact_mean_tr_psi, lss_cov
from xispectra.montecarlo import run_clt, run_esd, run_power, run_size
from xispectra.oracle import verification_suite, verify_tree_independence
from xispectra.rankcorr import kendall_tau, psi_matrix, xi_matrix
from xispectra.spectra import sym_eigenvalues, trace_power


def _verdict(num: int, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {num:02d} [{'PASS' if ok else 'FAIL'}] {detail}")


def _naive_kendall(x, y) -> float:
    n = len(x)
    s = 0
    for k in range(n):
        for l in range(n):
            if k != l:
                s += np.sign(x[k] - x[l]) * np.sign(y[k] - y[l])
    return float(s / (n * (n - 1)))


@pytest.fixture(scope="module")
def clt_run():
    start = time.perf_counter()
    result = run_clt([1, 2], 100, 100, reps=1000, seed=0)
    return result, time.perf_counter() - start


def test_criterion_01_exact_constants():
    start = time.perf_counter()
    reports = verification_suite()
    elapsed = time.perf_counter() - start
    failures = [r for r in reports if not r.match]
    detail = (
        f"exact-constant suite: {len(reports) - len(failures)}/{len(reports)} "
        f"equalities hold in {elapsed:.2f}s"
    )
    if failures:
        detail += "; unattained references: " + ", ".join(
            f"{r.quantity} (enumerated {r.exact}, reference {r.reference})"
            for r in failures
        )
    _verdict(1, not failures and elapsed < 60.0, detail)
    assert elapsed < 60.0
    assert not failures, (
        "independent exact enumeration does not reproduce these reference "
        "values: "
        + "; ".join(
            f"{r.quantity}: enumerated {r.exact} vs reference {r.reference}"
            for r in failures
        )
        + ". The enumerated values are exact rational averages over all "
        "ranking tuples and are confirmed by a second enumeration route; "
        "the references appear to be in error (details in the oracle "
        "module and the mismatch reports)."
    )


def test_criterion_02_tree_independence():
    start = time.perf_counter()
    star, path, cycle = verify_tree_independence(3)
    elapsed = time.perf_counter() - start
    ok = (
        star.match
        and star.exact == 0
        and star.details["predicted_independent"] is True
        and path.match
        and path.exact == 0
        and path.details["predicted_independent"] is True
        and cycle.match
        and cycle.exact > 0
        and cycle.details["predicted_independent"] is False
        and elapsed < 10.0
    )
    _verdict(
        2,
        ok,
        f"forest criterion: star/path factorize exactly, cycle gap "
        f"{cycle.exact}, predictions all correct in {elapsed:.2f}s",
    )
    assert star.match and star.exact == 0
    assert path.match and path.exact == 0
    assert cycle.match and cycle.exact == Fraction(2, 27)
    assert elapsed < 10.0


def test_criterion_03_semicircle_esd():
    start = time.perf_counter()
    ks = [run_esd("phi", 200, 100, reps=5, seed=s).ks for s in range(10)]
    elapsed = time.perf_counter() - start
    med = float(np.median(ks))
    ok = med <= 0.08 and elapsed < 60.0
    _verdict(
        3,
        ok,
        f"Phi eigenvalues vs semicircle limit: median KS {med:.4f} over 10 "
        f"seeds (max {max(ks):.4f}) <= 0.08 in {elapsed:.1f}s",
    )
    assert med <= 0.08
    assert elapsed < 60.0


def test_criterion_04_marchenko_pastur_esd():
    ks = [run_esd("psi", 200, 100, reps=5, seed=s).ks for s in range(10)]
    med = float(np.median(ks))
    _verdict(
        4,
        med <= 0.08,
        f"Psi eigenvalues vs square-case Marchenko-Pastur limit: median KS "
        f"{med:.4f} over 10 seeds (max {max(ks):.4f}) <= 0.08",
    )
    assert med <= 0.08


def test_criterion_05_clt_mean(clt_run):
    result, elapsed = clt_run
    s = result.samples[1]
    target = float(exact_mean_tr_psi(100, 100))
    se = math.sqrt(s.sample_variance / result.reps)
    dev = abs(s.sample_mean - target)
    ok = dev <= 3.0 * se and elapsed < 120.0
    _verdict(
        5,
        ok,
        f"tr(Psi) mean over 1000 reps at n=p=100: {s.sample_mean:.4f} vs "
        f"exact {target:.4f}, |dev| {dev:.4f} <= 3 SE {3 * se:.4f} "
        f"(draws in {elapsed:.1f}s)",
    )
    assert target == pytest.approx(38.5178, abs=5e-4)
    assert dev <= 3.0 * se
    assert elapsed < 120.0


def test_criterion_06_clt_variance_and_skewness(clt_run):
    result, _ = clt_run
    v1 = result.samples[1].sample_variance
    v2 = result.samples[2].sample_variance
    ref1 = lss_cov(1.0, 1, 1)
    ref2 = lss_cov(1.0, 2, 2)
    sk1 = abs(float(skew(result.samples[1].values)))
    sk2 = abs(float(skew(result.samples[2].values)))
    ok = (
        abs(v1 - ref1) <= 0.15 * ref1
        and abs(v2 - ref2) <= 0.20 * ref2
        and sk1 <= 0.25
        and sk2 <= 0.25
    )
    _verdict(
        6,
        ok,
        f"trace-power variances: tr(Psi) {v1:.4f} vs {ref1} (+-15%), "
        f"tr(Psi^2) {v2:.4f} vs {ref2} (+-20%); |skewness| {sk1:.3f}/{sk2:.3f}"
        " <= 0.25",
    )
    assert ref1 == 0.32 and ref2 == 0.9216
    assert abs(v1 - ref1) <= 0.15 * ref1
    assert abs(v2 - ref2) <= 0.20 * ref2
    assert sk1 <= 0.25 and sk2 <= 0.25


def test_criterion_07_empirical_sizes():
    start = time.perf_counter()
    table = run_size(
        models=("a", "b"),
        stats=("q_xi2", "q_xi4", "q_r2"),
        grid=((100, 100),),
        reps=1000,
        seed=0,
        alpha=0.05,
    )
    elapsed = time.perf_counter() - start
    sizes = {
        (m, s): table.rate(m, 100, 100, s)
        for m in ("a", "b")
        for s in ("q_xi2", "q_xi4")
    }
    schott_b = table.rate("b", 100, 100, "q_r2")
    ok = (
        all(0.02 <= v <= 0.08 for v in sizes.values())
        and schott_b >= 0.20
        and elapsed < 600.0
    )
    rendered = ", ".join(f"{m}/{s}={v:.3f}" for (m, s), v in sorted(sizes.items()))
    _verdict(
        7,
        ok,
        f"sizes at n=p=100, 1000 reps: {rendered} all in [0.02, 0.08]; "
        f"Pearson-sum size under heavy tails {schott_b:.3f} >= 0.20 "
        f"(in {elapsed:.0f}s)",
    )
    for key, v in sizes.items():
        assert 0.02 <= v <= 0.08, (key, v)
    assert schott_b >= 0.20
    assert elapsed < 600.0


def test_criterion_08_empirical_powers():
    table = run_power(
        models=("c", "e", "f"),
        stats=("q_xi2", "q_r2"),
        grid=((100, 100),),
        reps=500,
        seed=0,
        alpha=0.05,
    )
    xi_e = table.rate("e", 100, 100, "q_xi2")
    xi_f = table.rate("f", 100, 100, "q_xi2")
    xi_c = table.rate("c", 100, 100, "q_xi2")
    schott_c = table.rate("c", 100, 100, "q_r2")
    ok = xi_e >= 0.98 and xi_f >= 0.98 and xi_c <= 0.25 and schott_c >= 0.98
    _verdict(
        8,
        ok,
        f"powers at n=p=100, 500 reps: trace test {xi_e:.3f}/{xi_f:.3f} >= "
        f"0.98 under oscillating/W-shaped pairs, {xi_c:.3f} <= 0.25 under "
        f"banded linear dependence; Pearson sum {schott_c:.3f} >= 0.98 there",
    )
    assert xi_e >= 0.98
    assert xi_f >= 0.98
    assert xi_c <= 0.25
    assert schott_c >= 0.98


def test_criterion_09_distribution_freeness():
    rank_stats = [s for s in STATISTIC_FUNCTIONS if s != "q_r2"]
    identical = {}
    for stat in rank_stats:
        g = null_statistic_stream(stat, 30, 10, reps=2000, seed=0, generator="gaussian")
        c = null_statistic_stream(stat, 30, 10, reps=2000, seed=0, generator="cauchy")
        identical[stat] = bool(np.array_equal(g, c))
    ok = all(identical.values())
    _verdict(
        9,
        ok,
        "null statistic streams at (30,10), 2000 reps: Gaussian and Cauchy "
        "marginals give bit-identical draws for "
        + (
            "all 8 rank-based statistics"
            if ok
            else "only " + ", ".join(s for s, v in identical.items() if v)
        ),
    )
    assert all(identical.values()), identical


def test_criterion_10_numerical_identities():
    rng = np.random.default_rng(0)
    checks = []

    x = rng.standard_normal((60, 15))
    xi = xi_matrix(x)
    psi = psi_matrix(xi).values
    off = xi.values - np.eye(15)
    tr_ok = abs(np.trace(psi) - (off * off).sum()) <= 1e-10 * abs(np.trace(psi))
    checks.append(("trace identity", tr_ok))

    m = rng.standard_normal((40, 40))
    m = 0.5 * (m + m.T)
    ev = sym_eigenvalues(m).eigenvalues
    eig_ok = (
        abs(ev.sum() - np.trace(m)) <= 1e-10 * 40 * max(1.0, np.abs(ev).max())
        and abs((ev * ev).sum() - (m * m).sum())
        <= 1e-10 * 40 * max(1.0, np.abs(ev).max()) ** 2
    )
    checks.append(("eigensolver identities", eig_ok))

    power_ok = all(
        abs(trace_power(m, k, "spectral") - trace_power(m, k, "product"))
        <= 1e-8 * abs(trace_power(m, k, "product"))
        for k in (2, 3, 4)
    )
    checks.append(("trace powers product vs spectral", power_ok))

    kendall_ok = True
    for _ in range(100):
        a = rng.standard_normal(12)
        b = rng.standard_normal(12)
        if abs(kendall_tau(a, b) - _naive_kendall(a, b)) > 1e-12:
            kendall_ok = False
            break
    checks.append(("Kendall fast path vs naive on 100 cases", kendall_ok))

    data = rng.standard_normal((40, 5))
    mono_ok = True
    for stat, fn in STATISTIC_FUNCTIONS.items():
        if stat == "q_r2":
            continue
        kwargs = {"threshold": 0.0}
        if stat == "q_xi4":
            kwargs["centering"] = 50.0
        base = fn(data, **kwargs).value
        mapped = fn(np.exp(data), **kwargs).value
        if abs(mapped - base) > 1e-12 * max(1.0, abs(base)):
            mono_ok = False
            break
    checks.append(("monotone invariance of rank statistics", mono_ok))

    ok = all(flag for _, flag in checks)
    failing = [name for name, flag in checks if not flag]
    _verdict(
        10,
        ok,
        "numerical identities: "
        + ("all five families hold" if ok else "failing: " + ", ".join(failing)),
    )
    assert ok, failing
