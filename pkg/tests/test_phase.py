import math

import mpmath as mp
import numpy as np
import pytest

import robgap.phase as phase_mod
from robgap.numerics import DomainError, _h_from_log, phi_gap
from robgap.phase import (
    BracketOverflow,
    a0_lower,
    bernoulli_critical_n,
    find_critical,
    gaussian_critical_n,
    x0_sq_lower_bound,
)

from oracles import h_reference

# x0^2 = ln a1, root of h located with mpmath.findroot at 40 digits
X0_SQ = {
    0.2: 3.0617308905872968,
    0.4: 3.2704693493716631,
    0.5: 3.4554591730074119,
    0.7: 4.1315152141874224,
    0.9: 6.0512705334855123,
    0.95: 7.3961878526449464,
}


class TestA0Lower:
    def test_small_delta_limit(self):
        assert a0_lower(1e-7) == pytest.approx(math.exp(1.5), rel=1e-6)

    def test_half(self):
        assert a0_lower(0.5) == pytest.approx(2.5 ** (1 / 0.375), rel=1e-14)
        assert a0_lower(0.5) == pytest.approx(11.512598433251208, rel=1e-14)

    def test_never_below_e_three_halves(self):
        ds = np.linspace(1e-4, 0.999, 500)
        assert all(a0_lower(d) >= math.exp(1.5) * (1 - 1e-12) for d in ds)

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 1.5])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            a0_lower(bad)

    def test_h_is_maximal_at_a0(self):
        # independent check: derivative of the literal polynomial vanishes at a0
        d = mp.mpf("0.3")
        c = d * (d + 2) / 2
        dh = lambda a: 2 * d * (d - 1) * a ** (2 * d - 1) + 2 * c * a ** (c - 1)
        assert abs(dh(mp.mpf(a0_lower(0.3)))) < 1e-12


class TestFindCritical:
    @pytest.mark.parametrize("delta,expected", sorted(X0_SQ.items()))
    def test_frozen_values(self, delta, expected):
        cp = find_critical(delta)
        assert cp.x0_sq == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("delta", [0.05, 0.3, 0.5, 0.75, 0.9, 0.99])
    def test_root_brackets_sign_change_of_reference_h(self, delta):
        cp = find_critical(delta)
        lo = math.exp(cp.log_a1_lo)
        hi = math.exp(cp.log_a1_hi)
        assert h_reference(lo * (1 - 1e-9), delta) > 0
        assert h_reference(hi * (1 + 1e-9), delta) < 0

    @pytest.mark.parametrize("delta", [0.05, 0.3, 0.5, 0.75, 0.9, 0.99])
    def test_bracket_invariants(self, delta):
        cp = find_critical(delta)
        assert cp.a1 > max(math.exp(1.5), 1.0 / (1.0 - delta) ** 2)
        assert cp.a1 > a0_lower(delta)
        assert cp.x0_sq > x0_sq_lower_bound(delta)
        assert cp.lower_bracket <= cp.x0_sq

    def test_half_example(self):
        cp = find_critical(0.5)
        assert cp.x0_sq > max(1.5, 2 * math.log(2))
        assert cp.x0_sq > math.log(max(math.exp(1.5), 4.0))

    def test_point_nine_example(self):
        assert find_critical(0.9).a1 > 100.0

    def test_small_delta_tends_to_three(self):
        # h ~ delta^2 (3L - L^2) near delta = 0, so L = ln a1 -> 3
        for d, tol in ((1e-2, 2e-2), (1e-4, 2e-4), (1e-6, 2e-6)):
            assert abs(find_critical(d).x0_sq - 3.0) < tol

    def test_stable_under_tolerance_halving(self):
        for d in (0.1, 0.5, 0.93):
            a = find_critical(d, tol=1e-10).x0_sq
            b = find_critical(d, tol=5e-11).x0_sq
            assert abs(a - b) <= 1e-10

    @pytest.mark.parametrize("delta", [1.0, 1.3, 7.0])
    def test_no_critical_point_for_large_delta(self, delta):
        assert find_critical(delta) is None

    @pytest.mark.parametrize("bad", [0.0, -1.0])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            find_critical(bad)

    def test_overflow_when_bracketing_budget_runs_out(self, monkeypatch):
        monkeypatch.setattr(phase_mod, "MAX_DOUBLINGS", 0)
        with pytest.raises(BracketOverflow):
            find_critical(1 - 1e-12)
        assert issubclass(BracketOverflow, OverflowError)

    def test_near_one_still_brackets(self):
        cp = find_critical(1 - 1e-12)
        assert math.isfinite(cp.x0) and cp.x0_sq > x0_sq_lower_bound(1 - 1e-12)


class TestUnimodality:
    def test_random_deltas(self):
        rng = np.random.default_rng(20261016)
        deltas = rng.uniform(0.0, 1.0, 200)
        for d in deltas:
            x0 = find_critical(d).x0
            rising = np.linspace(1e-3 * x0, x0 * (1 - 1e-3), 400)
            falling = np.linspace(x0 * (1 + 1e-3), 20 * x0, 4000)
            assert np.all(np.diff(phi_gap(rising, d)) > 0), d
            assert np.all(np.diff(phi_gap(falling, d)) < 0), d

    @pytest.mark.parametrize("delta", [0.01, 0.2, 0.5, 0.8, 0.97])
    def test_single_sign_change_of_h(self, delta):
        cp = find_critical(delta)
        logs = np.linspace(1e-6, 4.0 * cp.x0_sq, 10 ** 4)
        signs = np.sign([_h_from_log(L, delta) for L in logs])
        assert signs[0] > 0
        assert np.count_nonzero(np.diff(signs) != 0) == 1

    def test_peak_of_phi_matches_root(self):
        # golden-section search on phi is independent of h
        d = 0.6
        f = lambda x: -float(mp.mpf(2) * mp.ncdf(x) - mp.ncdf(x * (1 + d)) - mp.ncdf(x * (1 - d)))
        lo, hi = mp.mpf(1), mp.mpf(4)
        g = (mp.sqrt(5) - 1) / 2
        for _ in range(120):
            a = hi - g * (hi - lo)
            b = lo + g * (hi - lo)
            if f(a) < f(b):
                hi = b
            else:
                lo = a
        assert find_critical(d).x0 == pytest.approx(float((lo + hi) / 2), rel=1e-7)


class TestCriticalN:
    def test_gaussian_composition(self):
        assert gaussian_critical_n(0.5, 2.0) == pytest.approx(4 * X0_SQ[0.5], rel=1e-12)

    def test_gaussian_quadratic_scaling(self):
        assert gaussian_critical_n(0.3, 2.0) == pytest.approx(4 * gaussian_critical_n(0.3, 1.0), rel=1e-14)

    def test_gaussian_small_delta(self):
        assert gaussian_critical_n(1e-6, 2.0) == pytest.approx(12.0, abs=1e-4)

    def test_gaussian_strong(self):
        assert gaussian_critical_n(1.0, 2.0) == math.inf

    def test_bernoulli_composition(self):
        assert bernoulli_critical_n(0.4, 0.5) == pytest.approx(3 * X0_SQ[0.4], rel=1e-12)

    def test_bernoulli_tau_limits(self):
        assert bernoulli_critical_n(0.4, 1 - 1e-9) < 1e-7
        assert bernoulli_critical_n(0.4, 1e-4) > 1e8

    @pytest.mark.parametrize("tau", [0.0, 1.0, -0.1])
    def test_bernoulli_domain(self, tau):
        with pytest.raises(DomainError):
            bernoulli_critical_n(0.4, tau)

    def test_snr_domain(self):
        with pytest.raises(DomainError):
            gaussian_critical_n(0.4, 0.0)
