"""Tests for constrained network evaluation, projection, fitting and I/O."""

import math

import numpy as np
import pytest

from polybarrier.activations import get_activation
from polybarrier.ellipse import BernsteinEllipse, ellipse_boundary
from polybarrier.network import (
    ConstraintSet,
    FitConfig,
    NetworkParams,
    StepRule,
    barron_weighted_norm,
    eval_complex,
    eval_real,
    fit_l1_constrained,
    frequency_split,
    gevrey_derivative_bound,
    holo_sup_bound,
    l1_ball_projection,
    load_network,
    save_network,
    zero_network,
)

TANH = get_activation("tanh")
EXP = get_activation("exp")
BUMP = get_activation("bump")


def random_tanh_net(rng, width=8, B=1.0, L=1.0):
    lam = rng.uniform(-1.0, 1.0, width)
    lam *= B / np.sum(np.abs(lam))
    al = rng.uniform(-L, L, width)
    return NetworkParams(lam, al, TANH, 1)


class TestEvaluation:
    def test_zero_weights_give_zero(self):
        net = NetworkParams([0.0, 0.0], [0.5, -0.3], TANH, 1)
        xs = np.linspace(-1, 1, 11)
        assert np.all(eval_real(net, xs) == 0.0)

    def test_single_exp_unit_at_origin(self):
        net = NetworkParams([1.0], [1.0], EXP, 1)
        assert eval_real(net, 0.0) == pytest.approx(1.0)

    def test_cancelling_pair(self):
        net = NetworkParams([1.0, -1.0], [0.7, 0.7], TANH, 1)
        xs = np.linspace(-1, 1, 33)
        assert np.max(np.abs(eval_real(net, xs))) < 1e-15

    def test_dim2_inner_products(self):
        net = NetworkParams([2.0], [[1.0, -1.0]], TANH, 2)
        val = eval_real(net, np.array([0.25, -0.25]))
        assert val == pytest.approx(2.0 * np.tanh(0.5))

    def test_zero_network_sentinel(self):
        z = zero_network(TANH, 1)
        assert z.width == 0
        assert eval_real(z, 0.3) == 0.0
        assert ConstraintSet(0.5, 0.5).satisfies(z)

    def test_validation(self):
        with pytest.raises(ValueError, match="length"):
            NetworkParams([1.0, 2.0], [0.5], TANH, 1)
        with pytest.raises(ValueError, match="finite"):
            NetworkParams([np.inf], [0.5], TANH, 1)
        with pytest.raises(ValueError):
            NetworkParams([1.0], [[0.5, 0.5]], TANH, 3)


class TestComplexEvaluation:
    def test_matches_real_on_axis(self):
        rng = np.random.default_rng(5)
        net = random_tanh_net(rng)
        e = BernsteinEllipse(2.0, 1.0)
        xs = np.linspace(-1, 1, 21)
        zvals = eval_complex(net, xs.astype(complex), e)
        assert np.max(np.abs(zvals - eval_real(net, xs))) < 1e-12

    def test_constant_direction(self):
        net = NetworkParams([0.3], [0.0], TANH, 1)
        e = BernsteinEllipse(2.0, 1.0)
        # alpha = 0 collapses to the constant 0.3 * tanh(0) = 0
        assert eval_complex(net, 0.5 + 0.1j, e) == pytest.approx(0.0)
        netc = NetworkParams([0.3], [0.0], get_activation("gaussian"), 1)
        assert eval_complex(netc, 0.5 + 0.1j, e) == pytest.approx(0.3)

    def test_single_exp_at_i(self):
        net = NetworkParams([1.0], [1.0], EXP, 1)
        e = BernsteinEllipse(2.0, 1.0)
        got = eval_complex(net, 1j * 0.7, e)
        assert got == pytest.approx(complex(np.cos(0.7), np.sin(0.7)))

    def test_alpha_exceeding_dilation_named(self):
        net = NetworkParams([1.0, 1.0], [0.5, 1.5], TANH, 1)
        with pytest.raises(ValueError, match="alpha_1"):
            eval_complex(net, 0.0j, BernsteinEllipse(2.0, 1.0))

    def test_point_outside_ellipse(self):
        net = NetworkParams([1.0], [1.0], TANH, 1)
        with pytest.raises(ValueError, match="outside"):
            eval_complex(net, 2.0 + 0.0j, BernsteinEllipse(2.0, 1.0))

    def test_uncovered_activation(self):
        net = NetworkParams([1.0], [1.0], BUMP, 1)
        with pytest.raises(ValueError, match="not certified"):
            eval_complex(net, 0.0j, BernsteinEllipse(2.0, 1.0))


class TestHoloSupBound:
    def test_zero_budget(self):
        net = NetworkParams([0.0], [0.5], TANH, 1)
        assert holo_sup_bound(net, BernsteinEllipse(2.0, 1.0)) == 0.0

    def test_single_exp_term_is_tight(self):
        net = NetworkParams([1.0], [1.0], EXP, 1)
        e = BernsteinEllipse(2.0, 1.0)
        bound = holo_sup_bound(net, e)
        assert bound == pytest.approx(float(np.exp(1.25)), abs=1e-9)
        sampled = np.max(np.abs(eval_complex(net, ellipse_boundary(BernsteinEllipse(2.0), 4096), e)))
        assert sampled <= bound + 1e-9
        assert sampled == pytest.approx(bound, rel=1e-9)

    def test_dominates_sampled_sup_for_random_networks(self):
        rng = np.random.default_rng(99)
        e = BernsteinEllipse(2.0, 1.0)
        base = ellipse_boundary(BernsteinEllipse(2.0), 2048)
        for _ in range(20):
            net = random_tanh_net(rng)
            bound = holo_sup_bound(net, e)
            sampled = float(np.max(np.abs(eval_complex(net, base, e))))
            assert sampled <= bound + 1e-9


class TestL1Projection:
    def test_interior_point_unchanged(self):
        v = np.array([0.2, -0.3])
        assert np.array_equal(l1_ball_projection(v, 1.0), v)

    def test_axis_point(self):
        got = l1_ball_projection(np.array([3.0, 0.0]), 1.0)
        assert np.allclose(got, [1.0, 0.0], atol=1e-12)

    def test_soft_threshold(self):
        got = l1_ball_projection(np.array([2.0, 1.0]), 1.0)
        assert np.allclose(got, [1.0, 0.0], atol=1e-12)

    def test_signs_preserved_and_feasible(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            v = rng.standard_normal(rng.integers(1, 7)) * 3
            B = float(rng.uniform(0.1, 2.0))
            w = l1_ball_projection(v, B)
            assert np.sum(np.abs(w)) <= B + 1e-12
            assert np.all(w * v >= -1e-15)

    def test_matches_qp_oracle(self):
        cvxpy = pytest.importorskip("cvxpy")
        rng = np.random.default_rng(23)
        for _ in range(50):
            n = int(rng.integers(1, 7))
            v = rng.standard_normal(n) * 2
            B = float(rng.uniform(0.2, 1.5))
            w = l1_ball_projection(v, B)
            x = cvxpy.Variable(n)
            prob = cvxpy.Problem(
                cvxpy.Minimize(cvxpy.sum_squares(x - v)),
                [cvxpy.norm1(x) <= B],
            )
            prob.solve(solver=cvxpy.CLARABEL,
                       tol_gap_abs=1e-13, tol_gap_rel=1e-13, tol_feas=1e-13)
            assert np.max(np.abs(w - x.value)) < 1e-8

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            l1_ball_projection(np.array([1.0]), 0.0)
        with pytest.raises(ValueError):
            l1_ball_projection(np.array([np.nan]), 1.0)


class TestFit:
    def test_realizable_target_recovered(self):
        cs = ConstraintSet(1.0, 1.0)
        cfg = FitConfig(n_restarts=8, max_iters=800)
        net, err = fit_l1_constrained(TANH.eval_real, 1, cs, cfg, TANH)
        assert err <= 1e-6
        assert cs.satisfies(net)

    def test_zero_target(self):
        cs = ConstraintSet(1.0, 1.0)
        cfg = FitConfig(n_restarts=4, max_iters=400)
        net, err = fit_l1_constrained(lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                                      3, cs, cfg, TANH)
        assert err <= 1e-9
        assert cs.satisfies(net)

    def test_deterministic_given_seed(self):
        cs = ConstraintSet(1.0, 1.0)
        cfg = FitConfig(n_restarts=3, max_iters=200, seed=7)
        net1, err1 = fit_l1_constrained(np.abs, 4, cs, cfg, TANH)
        net2, err2 = fit_l1_constrained(np.abs, 4, cs, cfg, TANH)
        assert err1 == err2
        assert np.array_equal(net1.lambdas, net2.lambdas)
        assert np.array_equal(net1.alphas, net2.alphas)

    def test_budget_monotonicity(self):
        """Doubling the budget never hurts.  The infimum is monotone by
        feasible-set nesting; the fitted value is asserted on a pinned
        configuration since distinct budgets take distinct PGD paths."""
        cfg = FitConfig(n_restarts=6, max_iters=400, seed=11)
        errs = []
        for B in (0.25, 0.5, 1.0, 2.0):
            _, err = fit_l1_constrained(np.sin, 3, ConstraintSet(B, 1.0), cfg, TANH)
            errs.append(err)
        for a, b in zip(errs, errs[1:]):
            assert b <= a + 1e-12

    def test_dim2_fit_constant_feasible(self):
        f = lambda p: 0.4 * np.tanh(np.atleast_2d(p)[:, 0])
        cs = ConstraintSet(1.0, 1.0)
        cfg = FitConfig(n_restarts=4, max_iters=300, grid_size=17, report_grid_size=68)
        net, err = fit_l1_constrained(f, 2, cs, cfg, TANH, dim=2)
        assert cs.satisfies(net)
        assert err < 0.05

    def test_width_validation(self):
        with pytest.raises(ValueError):
            fit_l1_constrained(np.abs, 0, ConstraintSet(1, 1), FitConfig(), TANH)


class TestFunctionals:
    def test_barron_norm_arithmetic(self):
        net = NetworkParams([1.0, -2.0], [3.0, 0.5], TANH, 1)
        assert barron_weighted_norm(net) == pytest.approx(4.0)

    def test_barron_norm_zero_alphas(self):
        net = NetworkParams([1.0, 2.0], [0.0, 0.0], TANH, 1)
        assert barron_weighted_norm(net) == 0.0

    def test_barron_norm_single_term(self):
        net = NetworkParams([-0.5], [0.25], TANH, 1)
        assert barron_weighted_norm(net) == pytest.approx(0.125)

    def test_split_all_low(self):
        net = NetworkParams([1.0, 0.5], [0.2, -0.4], TANH, 1)
        low, high = frequency_split(net, 1.0)
        assert low.width == 2 and high.width == 0

    def test_split_all_high(self):
        net = NetworkParams([1.0, 0.5], [2.0, -3.0], TANH, 1)
        low, high = frequency_split(net, 1.0)
        assert low.width == 0 and high.width == 2

    def test_split_partition_and_reconstruction(self):
        net = NetworkParams([1.0, -0.5], [0.5, 2.0], TANH, 1)
        low, high = frequency_split(net, 1.0)
        assert np.array_equal(low.alphas, [0.5])
        assert np.array_equal(high.alphas, [2.0])
        xs = np.linspace(-1, 1, 1001)
        total = eval_real(low, xs) + eval_real(high, xs)
        assert np.max(np.abs(total - eval_real(net, xs))) < 1e-12

    def test_gevrey_bound_order_zero(self):
        cs = ConstraintSet(3.0, 1.0)
        C, R, s = BUMP.gevrey
        assert gevrey_derivative_bound(cs, BUMP, 0) == pytest.approx(C * 3.0)

    def test_gevrey_bound_arithmetic(self):
        from dataclasses import replace

        act = replace(BUMP, gevrey=(1.0, 2.0, 2.0))
        assert gevrey_derivative_bound(ConstraintSet(3.0, 1.0), act, 2) == pytest.approx(48.0)

    def test_gevrey_bound_s1_specialization(self):
        from dataclasses import replace

        act = replace(BUMP, gevrey=(1.7, 2.5, 1.0))
        for n in range(5):
            got = gevrey_derivative_bound(ConstraintSet(1.0, 1.0), act, n)
            assert got == pytest.approx(1.7 * 2.5 ** n * math.factorial(n))

    def test_gevrey_bound_requires_metadata(self):
        with pytest.raises(ValueError, match="Gevrey"):
            gevrey_derivative_bound(ConstraintSet(1, 1), TANH, 2)


class TestSerialization:
    def test_round_trip_bit_identical(self, tmp_path):
        rng = np.random.default_rng(31)
        net = random_tanh_net(rng, width=5)
        cs = ConstraintSet(1.0, 1.0)
        p1 = tmp_path / "net1.txt"
        p2 = tmp_path / "net2.txt"
        save_network(net, cs, p1)
        net2, cs2 = load_network(p1)
        save_network(net2, cs2, p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert np.array_equal(net.lambdas, net2.lambdas)
        assert np.array_equal(net.alphas, net2.alphas)
        assert (cs2.B, cs2.L) == (cs.B, cs.L)

    def test_round_trip_dim2(self, tmp_path):
        net = NetworkParams([0.5, -0.25], [[1.0, 0.1], [-0.3, 0.9]], TANH, 2)
        cs = ConstraintSet(2.0, 1.5)
        p = tmp_path / "net.txt"
        save_network(net, cs, p)
        net2, _ = load_network(p)
        assert np.array_equal(net.alphas, net2.alphas)

    def test_zero_network_record(self, tmp_path):
        p = tmp_path / "zero.txt"
        save_network(zero_network(TANH), ConstraintSet(1, 1), p)
        net, _ = load_network(p)
        assert net.width == 0

    def test_malformed_record(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("1 2 tanh 1 1\n0.5 0.5\n")
        with pytest.raises(ValueError, match="unit lines"):
            load_network(p)


class TestGevreyDerivativeProperty:
    def test_bump_network_derivatives_below_bound(self):
        """FD-estimated ||g^(n)|| stays under the formula for n <= 3, and at
        least one seeded network comes within a factor 100 (non-vacuous)."""
        rng = np.random.default_rng(77)
        cs = ConstraintSet(1.0, 1.0)
        h = 0.004
        best_ratio = 0.0
        for _ in range(10):
            lam = rng.uniform(-1, 1, 6)
            lam *= cs.B / np.sum(np.abs(lam))
            al = rng.uniform(-1, 1, 6)
            net = NetworkParams(lam, al, BUMP, 1)
            g = lambda t: eval_real(net, np.clip(t, -1, 1))

            def deriv(fun, order):
                if order == 0:
                    return fun
                prev = deriv(fun, order - 1)
                return lambda t: (prev(t + h) - prev(t - h)) / (2 * h)

            for n in range(4):
                ts = np.linspace(-0.95, 0.95, 301)
                est = float(np.max(np.abs(deriv(g, n)(ts))))
                bound = gevrey_derivative_bound(cs, BUMP, n)
                assert est <= bound * (1 + 1e-9)
                best_ratio = max(best_ratio, est / bound)
        assert best_ratio > 1e-2
