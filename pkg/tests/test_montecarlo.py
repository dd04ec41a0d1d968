import math

import numpy as np
import pytest

from xispectra.limitlaws import exact_mean_tr_psi, lss_cov
from xispectra.montecarlo import (
    DEFAULT_GRID,
    DEFAULT_STATS,
    POWER_MODELS,
    SIZE_MODELS,
    CltSample,
    SimTable,
    run_clt,
    run_esd,
    run_power,
    run_size,
)


class TestSimTable:
    def test_validation(self):
        with pytest.raises(ValueError):
            SimTable(("q_xi2",), {("a", 10, 5): {"q_xi2": 1.5}}, reps=100, seed=0)
        with pytest.raises(ValueError):
            SimTable(("q_xi2",), {}, reps=0, seed=0)

    def test_iter_records_order(self):
        cells = {
            ("b", 50, 50): {"q_xi2": 0.1, "q_xi4": 0.2},
            ("a", 100, 100): {"q_xi2": 0.3, "q_xi4": 0.4},
            ("a", 50, 50): {"q_xi2": 0.5, "q_xi4": 0.6},
        }
        t = SimTable(("q_xi2", "q_xi4"), cells, reps=100, seed=0)
        rows = list(t.iter_records())
        keys = [(m, n, p, s) for m, n, p, s, _, _ in rows]
        assert keys == [
            ("a", 50, 50, "q_xi2"),
            ("a", 50, 50, "q_xi4"),
            ("a", 100, 100, "q_xi2"),
            ("a", 100, 100, "q_xi4"),
            ("b", 50, 50, "q_xi2"),
            ("b", 50, 50, "q_xi4"),
        ]
        assert all(r == 100 for _, _, _, _, r, _ in rows)

    def test_rate_accessor(self):
        t = SimTable(("q_xi2",), {("a", 10, 5): {"q_xi2": 0.25}}, reps=100, seed=0)
        assert t.rate("a", 10, 5, "q_xi2") == 0.25


class TestTableValidation:
    def test_model_membership(self):
        with pytest.raises(ValueError):
            run_size(models=("c",), reps=100)
        with pytest.raises(ValueError):
            run_power(models=("a",), reps=100)
        assert SIZE_MODELS == ("a", "b")
        assert POWER_MODELS == ("c", "d", "e", "f")

    def test_rejects_small_reps(self):
        with pytest.raises(ValueError):
            run_size(models=("a",), grid=((20, 5),), reps=50)

    def test_rejects_bad_grid_and_stat(self):
        with pytest.raises(ValueError):
            run_size(models=("a",), grid=((2, 5),), reps=100)
        with pytest.raises(ValueError):
            run_size(models=("a",), grid=(), reps=100)
        with pytest.raises(ValueError):
            run_size(models=("a",), stats=("nope",), grid=((20, 5),), reps=100)

    def test_defaults_are_sane(self):
        assert DEFAULT_GRID == ((50, 50), (100, 100))
        assert DEFAULT_STATS == ("q_xi2", "q_xi4")


class TestTableRuns:
    def test_thread_count_does_not_change_results(self):
        kwargs = dict(
            models=("a",),
            stats=("q_xi2",),
            grid=((20, 10),),
            reps=100,
            seed=3,
        )
        t1 = run_size(threads=1, **kwargs)
        t4 = run_size(threads=4, **kwargs)
        assert t1.cells == t4.cells

    def test_seed_reproducibility(self):
        kwargs = dict(models=("a",), stats=("q_xi2",), grid=((20, 10),), reps=100)
        assert run_size(seed=5, **kwargs).cells == run_size(seed=5, **kwargs).cells

    def test_monte_carlo_calibrated_size_is_near_nominal(self):
        t = run_size(
            models=("a", "b"),
            stats=("q_rho2",),
            grid=((20, 10),),
            reps=300,
            seed=0,
            mc_reps=500,
        )
        for model in ("a", "b"):
            assert 0.01 <= t.rate(model, 20, 10, "q_rho2") <= 0.12

    def test_asymptotic_size_is_plausible(self):
        t = run_size(models=("a",), stats=("q_xi2",), grid=((50, 50),), reps=300, seed=0)
        assert 0.0 <= t.rate("a", 50, 50, "q_xi2") <= 0.15

    def test_power_under_strong_dependence(self):
        t = run_power(
            models=("e",), stats=("q_xi2",), grid=((60, 4),), reps=200, seed=0
        )
        assert t.rate("e", 60, 4, "q_xi2") >= 0.7


class TestEsd:
    def test_validation(self):
        with pytest.raises(ValueError):
            run_esd("sigma", 20, 10, reps=1)
        with pytest.raises(ValueError):
            run_esd("phi", 20, 10, reps=0)

    def test_phi_law_parameters(self):
        res = run_esd("phi", 40, 10, reps=2, seed=1)
        gamma = 10 / 40
        assert res.law.u == 1.0
        assert res.law.r == pytest.approx(2.0 * math.sqrt(gamma / 5.0))
        assert res.eigenvalues.size == 2 * 10
        assert np.all(np.diff(res.eigenvalues) <= 0)

    def test_psi_law_parameters(self):
        res = run_esd("psi", 40, 10, reps=2, seed=1)
        assert res.law.y == 1.0
        assert res.law.sigma2 == pytest.approx(2.0 * (10 / 40) / 5.0)

    def test_histogram_integrates_to_one(self):
        res = run_esd("psi", 30, 10, reps=3, seed=2, bins=21)
        h = res.histogram
        assert (h.densities * np.diff(h.bin_edges)).sum() == pytest.approx(1.0, rel=1e-12)

    def test_determinism_and_ks_range(self):
        a = run_esd("phi", 60, 20, reps=3, seed=4)
        b = run_esd("phi", 60, 20, reps=3, seed=4, threads=4)
        assert a.ks == b.ks
        assert np.array_equal(a.eigenvalues, b.eigenvalues)
        assert 0.0 < a.ks < 0.5


class TestClt:
    def test_validation(self):
        with pytest.raises(ValueError):
            run_clt([1], 20, 10, reps=100)
        with pytest.raises(ValueError):
            run_clt([], 20, 10, reps=200)
        with pytest.raises(ValueError):
            run_clt([0], 20, 10, reps=200)

    def test_trace_route_matches_eigenvalue_route(self):
        # k <= 2 uses direct traces; adding k=3 forces the spectral route on
        # the same replication streams, so the two must agree numerically
        direct = run_clt([1, 2], 30, 10, reps=200, seed=6)
        spectral = run_clt([1, 2, 3], 30, 10, reps=200, seed=6)
        for k in (1, 2):
            assert np.allclose(
                direct.samples[k].values, spectral.samples[k].values, rtol=1e-8
            )

    def test_reference_variance_and_mean(self):
        res = run_clt([1], 30, 10, reps=200, seed=7)
        s = res.samples[1]
        assert s.reference_variance == pytest.approx(lss_cov(10 / 30, 1, 1), rel=1e-12)
        assert s.sample_mean == pytest.approx(float(exact_mean_tr_psi(30, 10)), abs=0.1)

    def test_sample_properties(self):
        s = CltSample(k=1, values=np.array([1.0, 2.0, 3.0, 4.0]), reference_variance=0.5)
        assert s.sample_mean == 2.5
        assert s.sample_variance == pytest.approx(np.var([1, 2, 3, 4], ddof=1))
        assert s.centered.mean() == pytest.approx(0.0, abs=1e-15)

    def test_threads_do_not_change_values(self):
        a = run_clt([1], 25, 8, reps=200, seed=8, threads=1)
        b = run_clt([1], 25, 8, reps=200, seed=8, threads=3)
        assert np.array_equal(a.samples[1].values, b.samples[1].values)
