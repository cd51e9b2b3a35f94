"""Tests for residual formulas, barrier certificates and the multid path."""

import math

import numpy as np
import pytest

from polybarrier.activations import get_activation
from polybarrier.barrier import (
    AnalyticEllipseParams,
    BarrierReport,
    GevreyParams,
    Schedule,
    StripParams,
    analytic_params_for,
    analytic_residual,
    barron_remainder_check,
    best_poly_multid,
    default_gevrey_constants,
    gevrey_residual,
    regime_classification,
    strip_residual,
    verify_barrier,
    verify_barrier_multid,
    verify_network_poly_bound,
    zero_residual_report,
)
from polybarrier.ellipse import BernsteinEllipse, ellipse_norm
from polybarrier.network import ConstraintSet, FitConfig, NetworkParams, zero_network
from polybarrier.remez import discrete_minimax, remez_best_approx
from polybarrier.targets import separable_abs

TANH = get_activation("tanh")
SIN = get_activation("sin")
BUMP = get_activation("bump")

FAST_FIT = FitConfig(n_restarts=6, max_iters=400)


class TestResidualFormulas:
    def test_analytic_arithmetic(self):
        rp = AnalyticEllipseParams(rho=2.0, M=1.0, C_of_rho=2.0)
        assert analytic_residual(3, 1.0, rp) == pytest.approx(0.25)

    def test_analytic_zero_budget(self):
        rp = AnalyticEllipseParams(rho=2.0, M=1.0)
        assert analytic_residual(5, 0.0, rp) == 0.0

    def test_analytic_geometric_halving(self):
        rp = AnalyticEllipseParams(rho=2.0, M=3.7, C_of_rho=1.1)
        for m in range(1, 8):
            ratio = analytic_residual(m + 1, 1.0, rp) / analytic_residual(m, 1.0, rp)
            assert ratio == pytest.approx(0.5, rel=1e-12)

    def test_default_constant_is_two_over_rho_minus_one(self):
        rp = AnalyticEllipseParams(rho=3.0, M=1.0)
        assert rp.C_of_rho == pytest.approx(1.0)

    def test_strip_matches_exact_rho_construction(self):
        """delta/L = 3/4 at safety 1 forces rho_m = 2, so the residual is
        2 * B * M * 2^-m with M the ellipse norm at rho 2."""
        M = ellipse_norm(SIN.eval_complex, BernsteinEllipse(2.0, 1.0))
        for m in (1, 4, 9):
            got = strip_residual(m, 1.3, 1.0, SIN, safety=1.0, delta=0.75)
            assert got == pytest.approx(2.0 * 1.3 * M * 2.0 ** (-m), rel=1e-9)

    def test_strip_decays_geometrically_for_fixed_cap(self):
        vals = [strip_residual(m, 1.0, 1.0, TANH) for m in range(1, 12)]
        ratios = [b / a for a, b in zip(vals, vals[1:])]
        assert np.allclose(ratios, ratios[0], rtol=1e-9)
        assert ratios[0] < 1

    def test_strip_growing_cap_flattens(self):
        """With L_m = m the exponent m/L_m freezes, so the residual stops
        vanishing (the regime boundary)."""
        vals = [strip_residual(m, 1.0, float(m), TANH) for m in (8, 16, 32, 64)]
        assert vals[-1] > 0.1 * vals[0]
        assert min(vals) > 1e-3

    def test_gevrey_at_m_equals_cap(self):
        assert gevrey_residual(7, 2.0, 7.0, 2.0, 1.5, 0.9) == pytest.approx(
            1.5 * 2.0 * math.exp(-0.9)
        )

    def test_gevrey_s1_exponential_shape(self):
        vals = [gevrey_residual(m, 1.0, 1.0, 1.0, 1.0, 0.7) for m in range(1, 6)]
        for m, v in enumerate(vals, start=1):
            assert v == pytest.approx(math.exp(-0.7 * m))

    def test_gevrey_doubling_scales_exponent_by_sqrt2(self):
        a = gevrey_residual(8, 1.0, 1.0, 2.0, 1.0, 1.0)
        b = gevrey_residual(16, 1.0, 1.0, 2.0, 1.0, 1.0)
        assert math.log(a) / math.log(b) == pytest.approx(1 / math.sqrt(2), rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            AnalyticEllipseParams(rho=0.9, M=1.0)
        with pytest.raises(ValueError):
            StripParams(delta=-1.0)
        with pytest.raises(ValueError):
            GevreyParams(s=0.5, A=1.0, c=1.0)
        with pytest.raises(ValueError):
            gevrey_residual(3, 1.0, 1.0, 2.0, -1.0, 1.0)

    def test_gevrey_default_constants(self):
        gp = default_gevrey_constants(BUMP)
        C, R, s = BUMP.gevrey
        assert gp.A == pytest.approx(math.e * C)
        assert gp.c == pytest.approx(s / (math.e * R) ** (1 / s))
        with pytest.raises(ValueError):
            default_gevrey_constants(TANH)

    def test_gevrey_default_dominates_measured_network_errors(self):
        """The constructive (A, c) must upper-bound Remez errors of bump
        networks; this is the empirical certification of the constants."""
        gp = default_gevrey_constants(BUMP)
        rng = np.random.default_rng(13)
        for _ in range(5):
            lam = rng.uniform(-1, 1, 5)
            lam /= np.sum(np.abs(lam))
            al = rng.uniform(-1, 1, 5)
            net = lambda x: BUMP.eval_real(np.outer(np.asarray(x, float), al)) @ lam
            for m in (1, 4, 9, 16, 25):
                E = remez_best_approx(net, m).error
                assert E <= gevrey_residual(m, 1.0, 1.0, gp.s, gp.A, gp.c)


class TestAnalyticParamsFor:
    def test_strip_default_rho_and_unit_norm(self):
        """tanh at safety 1/2 yields the ellipse with semi-minor pi/4, where
        |tanh| peaks at exactly 1 (the imaginary vertex)."""
        rp = analytic_params_for(TANH, 1.0)
        want = np.pi / 4 + np.sqrt(np.pi ** 2 / 16 + 1)
        assert rp.rho == pytest.approx(want)
        assert rp.M == pytest.approx(1.0, abs=1e-9)

    def test_entire_default(self):
        rp = analytic_params_for(get_activation("exp"), 1.0)
        assert rp.rho == 2.0
        assert rp.M == pytest.approx(float(np.exp(1.25)), abs=1e-8)

    def test_uncovered_request_rejected(self):
        with pytest.raises(ValueError, match="not analytic"):
            analytic_params_for(TANH, 1.0, rho=4.0)
        with pytest.raises(ValueError, match="analyticity"):
            analytic_params_for(BUMP, 1.0)


class TestNetworkPolyBound:
    def test_zero_network_always_passes(self):
        rp = AnalyticEllipseParams(rho=2.0, M=1.0)
        rows = verify_network_poly_bound(zero_network(TANH), rp, range(0, 6))
        assert all(r.passed for r in rows)

    def test_single_tanh_unit_positive_margins(self):
        net = NetworkParams([1.0], [1.0], TANH, 1)
        M = ellipse_norm(TANH.eval_complex, BernsteinEllipse(2.0, 1.0))
        rp = AnalyticEllipseParams(rho=2.0, M=M)
        rows = verify_network_poly_bound(net, rp, range(0, 16))
        assert all(r.passed for r in rows)
        assert all(r.margin > 0 for r in rows)

    def test_broken_constant_fails_somewhere(self):
        net = NetworkParams([1.0], [1.0], TANH, 1)
        M = ellipse_norm(TANH.eval_complex, BernsteinEllipse(2.0, 1.0))
        rp = AnalyticEllipseParams(rho=2.0, M=M, C_of_rho=0.0)
        rows = verify_network_poly_bound(net, rp, range(0, 8))
        assert any(not r.passed for r in rows)

    def test_uncertified_network_rejected(self):
        net = NetworkParams([1.0], [1.5], TANH, 1)
        rp = AnalyticEllipseParams(rho=2.0, M=1.0, dilation=1.0)
        with pytest.raises(ValueError, match="dilation"):
            verify_network_poly_bound(net, rp, [2])


class TestVerifyBarrier:
    def test_polynomial_target_trivially_passes(self):
        sched = Schedule(((3, 1.0, 1.0), (5, 1.0, 1.0)))
        f = lambda x: 0.5 * np.asarray(x, dtype=float) ** 3
        rp = analytic_params_for(TANH, 1.0)
        report = verify_barrier(f, TANH, sched, rp, FAST_FIT)
        assert report.passes
        for r in report.rows:
            assert r.E_m_f < 1e-9

    def test_realizable_target_near_zero_net_error(self):
        sched = Schedule(((1, 1.0, 1.0), (2, 1.0, 1.0)))
        rp = analytic_params_for(TANH, 1.0)
        report = verify_barrier(TANH.eval_real, TANH, sched, rp, FAST_FIT)
        assert report.passes
        assert report.rows[0].net_error <= 1e-6

    def test_abs_tanh_slacks_nonnegative(self):
        sched = Schedule(((2, 1.0, 1.0), (4, 1.0, 1.0), (6, 1.0, 1.0)))
        rp = analytic_params_for(TANH, 1.0)
        report = verify_barrier(np.abs, TANH, sched, rp, FAST_FIT)
        assert report.passes
        # odd networks cannot track the even target at all: the class
        # infimum is exactly 1 (attained by the zero network)
        for r in report.rows:
            assert r.net_error >= 1.0 - 1e-9

    def test_strip_and_gevrey_modes_run(self):
        sched = Schedule(((2, 1.0, 1.0), (4, 1.0, 1.0)))
        rep_strip = verify_barrier(np.abs, TANH, sched,
                                   StripParams(delta=np.pi / 2), FAST_FIT)
        assert rep_strip.passes
        rep_gev = verify_barrier(np.abs, BUMP, sched,
                                 default_gevrey_constants(BUMP), FAST_FIT)
        assert rep_gev.passes

    def test_zero_residual_negative_control(self):
        """Forcing the residual to zero must break realizable-target rows
        (fitted error ~ 0 while E_m(f) > 0)."""
        sched = Schedule(((1, 1.0, 1.0), (2, 1.0, 1.0)))
        rp = analytic_params_for(TANH, 1.0)
        report = verify_barrier(TANH.eval_real, TANH, sched, rp, FAST_FIT)
        assert report.passes
        broken = zero_residual_report(report)
        assert not broken.passes

    def test_csv_shape(self):
        sched = Schedule(((1, 1.0, 1.0),))
        rp = analytic_params_for(TANH, 1.0)
        report = verify_barrier(np.abs, TANH, sched, rp, FAST_FIT)
        text = report.to_csv(seed=7)
        lines = text.splitlines()
        assert lines[0] == "# seed=7"
        assert lines[1] == "m,E_m_f,net_error,residual,slack,sharpness_ratio"
        assert len(lines) == 3
        assert text.endswith("\n")

    def test_schedule_validation(self):
        with pytest.raises(ValueError, match="increasing"):
            Schedule(((2, 1.0, 1.0), (2, 1.0, 1.0)))
        with pytest.raises(ValueError, match="non-empty"):
            Schedule(())
        with pytest.raises(ValueError, match="positive"):
            Schedule(((1, -1.0, 1.0),))


class TestRegimeClassification:
    def test_constant_budget_vanishes(self):
        sched = Schedule(tuple((m, 1.0, 1.0) for m in range(1, 17)))
        rp = AnalyticEllipseParams(rho=2.0, M=1.0)
        assert regime_classification(sched, rp).label == "vanishing"

    def test_exponential_budget_does_not_vanish(self):
        sched = Schedule(tuple((m, math.exp(m), 1.0) for m in range(1, 17)))
        rp = AnalyticEllipseParams(rho=2.0, M=1.0)
        assert regime_classification(sched, rp).label == "non-vanishing"

    def test_subexponential_budget_vanishes(self):
        sched = Schedule(tuple((m, math.exp(math.sqrt(m)), 1.0) for m in range(1, 17)))
        rp = AnalyticEllipseParams(rho=2.0, M=1.0)
        assert regime_classification(sched, rp).label == "vanishing"

    def test_gevrey_mode_uses_s_root(self):
        gp = GevreyParams(s=2.0, A=1.0, c=1.0)
        sched = Schedule(tuple((m, 1.5, 1.0) for m in range(1, 17)))
        result = regime_classification(sched, gp)
        assert result.trend[0] == pytest.approx(math.log(1.5))
        assert result.label == "vanishing"

    def test_short_schedule_rejected(self):
        sched = Schedule(((1, 1.0, 1.0), (2, 1.0, 1.0), (3, 1.0, 1.0)))
        with pytest.raises(ValueError, match="4"):
            regime_classification(sched, AnalyticEllipseParams(rho=2.0, M=1.0))


class TestBarronRemainder:
    def test_all_low_measures_zero(self):
        net = NetworkParams([0.5, -0.5], [0.3, 0.9], TANH, 1)
        check = barron_remainder_check(net, 1.0)
        assert check.measured == 0.0
        assert check.passed

    def test_single_high_term(self):
        net = NetworkParams([1.0], [2.0], TANH, 1)
        check = barron_remainder_check(net, 1.0)
        assert check.bound == pytest.approx(2.0)
        assert check.measured <= 1.0
        assert check.passed

    def test_seeded_random_networks_pass(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            w = int(rng.integers(1, 9))
            net = NetworkParams(rng.uniform(-1, 1, w), rng.uniform(-4, 4, w), TANH, 1)
            L = float(np.median(np.abs(net.alphas))) or 1.0
            assert barron_remainder_check(net, L).passed

    def test_unbounded_activation_rejected(self):
        net = NetworkParams([1.0], [2.0], get_activation("exp"), 1)
        with pytest.raises(ValueError, match="unbounded"):
            barron_remainder_check(net, 1.0)


class TestMultidMinimax:
    def test_xy_exactly_representable(self):
        f = lambda p: np.atleast_2d(p)[:, 0] * np.atleast_2d(p)[:, 1]
        _, _, err = best_poly_multid(f, 2, 13, 2)
        assert err <= 1e-10

    def test_x_only_matches_univariate_oracle(self):
        from polybarrier.chebyshev import chebyshev_points

        f = lambda p: np.abs(np.atleast_2d(p)[:, 0])
        _, _, err2 = best_poly_multid(f, 2, 13, 2)
        _, err1 = discrete_minimax(np.abs, 2, chebyshev_points(13))
        assert abs(err2 - err1) < 1e-8

    def test_separable_abs_bracket(self):
        _, _, err = best_poly_multid(separable_abs, 2, 13, 2)
        assert 0.125 - 1e-9 <= err <= 0.25 + 1e-9

    def test_dim3_smoke(self):
        f = lambda p: np.sum(np.atleast_2d(p) ** 2, axis=1)
        _, _, err = best_poly_multid(f, 2, 7, 3)
        assert err <= 1e-9

    def test_validation(self):
        f = separable_abs
        with pytest.raises(ValueError, match="dim"):
            best_poly_multid(f, 2, 13, 1)
        with pytest.raises(ValueError, match="degree"):
            best_poly_multid(f, 11, 30, 2)
        with pytest.raises(ValueError, match="2m"):
            best_poly_multid(f, 4, 7, 2)


class TestMultidBarrier:
    def test_polynomial_target_passes(self):
        f = lambda p: 0.25 * np.atleast_2d(p)[:, 0] * np.atleast_2d(p)[:, 1]
        sched = Schedule(((2, 1.0, 1.0), (3, 1.0, 1.0)))
        cfg = FitConfig(n_restarts=4, max_iters=200, grid_size=17, report_grid_size=68)
        report = verify_barrier_multid(f, TANH, sched, 2, cfg)
        assert report.passes
        for r in report.rows:
            assert r.E_m_f < 1e-9

    def test_separable_abs_rows_pass(self):
        sched = Schedule(((2, 1.0, 1.0), (4, 1.0, 1.0)))
        cfg = FitConfig(n_restarts=4, max_iters=300, grid_size=17, report_grid_size=68)
        report = verify_barrier_multid(separable_abs, TANH, sched, 2, cfg)
        assert report.passes

    def test_dim_validation(self):
        sched = Schedule(((2, 1.0, 1.0),))
        with pytest.raises(ValueError, match="dim"):
            verify_barrier_multid(separable_abs, TANH, sched, 1, FAST_FIT)
