import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from aloha_tf.errors import DomainError, GridTooCoarse
from aloha_tf.grid import Grid
from aloha_tf.jain import (
    jain_curve,
    jain_curve_properties,
    jain_interpolation,
    jain_optimal_point,
    jain_optimal_point_inequality,
)
from aloha_tf.model import Regime, critical_throughputs, jain_fairness, rates_from_control, throughput

# four users at theta = 0.47: three active, (3/4) * F*(0.47; 3), 40-digit mpmath value
F_047_N4 = 0.58705350160891938317
# interpolation at n = 4, F = 0.6, 40-digit mpmath value
INTERP_06_N4 = 0.47020096007904112097


def two_user_closed_form(theta):
    return theta**2 / (theta**2 + 2 * theta - 1)


def two_user_second_derivative(theta):
    return (2 * theta**2 * (-2 * theta + 3) + 2) / (theta**2 + 2 * theta - 1) ** 3


class TestOptimalPoint:
    def test_critical_point(self):
        pt = jain_optimal_point(0.5, 4)
        assert pt.regime is Regime.CRITICAL_POINT
        assert pt.F_star == 0.5 and pt.t == 2
        assert_allclose(pt.control.p, [0, 0, 0.5, 0.5])

    def test_two_users(self):
        pt = jain_optimal_point(0.6, 2)
        assert pt.regime is Regime.TWO_VALUE
        assert pt.F_star == pytest.approx(9 / 14, abs=1e-14)
        assert pt.p_s == pytest.approx((2 - math.sqrt(0.8)) / 4, abs=1e-15)

    def test_equal_rate(self):
        pt = jain_optimal_point(0.4, 3)
        assert pt.regime is Regime.EQUAL_RATE and pt.F_star == 1.0
        assert_allclose(rates_from_control(pt.control).x, [0.4 / 3] * 3, atol=1e-12)
        assert pt.p_s < 1 / 3

    def test_four_user_two_value(self):
        pt = jain_optimal_point(0.47, 4)
        assert (pt.t, pt.n_prime, pt.k) == (3, 3, 1)
        assert pt.F_star == pytest.approx(F_047_N4, abs=1e-12)

    def test_theta_n_is_critical(self):
        crit = critical_throughputs(5)
        pt = jain_optimal_point(crit.of(5), 5)
        assert pt.regime is Regime.CRITICAL_POINT and pt.F_star == 1.0

    @pytest.mark.parametrize("theta", [0.0, 1.0, -0.2, 1.5])
    def test_invalid_theta(self, theta):
        with pytest.raises(DomainError, match=r"theta must lie in \(0,1\)"):
            jain_optimal_point(theta, 3)

    def test_invalid_n(self):
        with pytest.raises(DomainError):
            jain_optimal_point(0.5, 1)

    @pytest.mark.parametrize("theta", [0.3, 0.5, 0.6, 4 / 9])
    def test_inequality_identical(self, theta):
        for n in (2, 3, 4):
            assert jain_optimal_point_inequality(theta, n) == jain_optimal_point(theta, n)

    def test_feasibility(self):
        for n in (2, 3, 5, 8):
            for theta in np.linspace(0.05, 0.995, 200):
                pt = jain_optimal_point(theta, n)
                x = rates_from_control(pt.control).x
                if pt.regime is Regime.EQUAL_RATE:
                    assert_allclose(x, theta / n, atol=1e-12)
                else:
                    assert abs(throughput(x) - theta) <= 1e-10
                    assert pt.control.is_efficient()
                    assert jain_fairness(x) == pytest.approx(pt.F_star, rel=1e-12)

    def test_continuity_at_critical(self):
        for n in (3, 5, 7):
            crit = critical_throughputs(n)
            for t in range(2, n + 1):
                a = jain_optimal_point(crit.of(t), n).F_star
                b = jain_optimal_point(crit.of(t) + 1e-9, n).F_star
                assert abs(a - b) <= 1e-6

    def test_dominance_in_n(self):
        for n in range(2, 7):
            crit = critical_throughputs(n)
            for theta in np.linspace(crit.of(n), 0.999, 101):
                assert jain_optimal_point(theta, n).F_star > jain_optimal_point(theta, n + 1).F_star


class TestCurve:
    def test_recursion_and_direct(self):
        curves = jain_curve(4, Grid(0.3, 0.999, 1e-3))
        crit = critical_throughputs(4)
        for i, pt in enumerate(curves[4].points):
            direct = jain_optimal_point(pt.theta, 4)
            assert pt.F_star == pytest.approx(direct.F_star, abs=1e-10)
            if pt.theta >= crit.of(3):
                assert pt.F_star == pytest.approx(0.75 * curves[3].points[i].F_star, abs=1e-10)

    def test_limit_at_one(self):
        curves = jain_curve(5, Grid(0.9999, 0.99995, 1e-5))
        for m, curve in curves.items():
            assert curve.F[-1] == pytest.approx(1 / m, abs=2e-3)
            assert np.all(curve.F > 1 / m)

    def test_theta_two_for_two_users(self):
        curves = jain_curve(3, Grid(0.45, 0.55, 0.01))
        i = list(curves[2].thetas).index(0.5)
        assert curves[2].points[i].F_star == 1.0
        assert curves[2].points[i].regime is Regime.CRITICAL_POINT

    def test_critical_points_injected(self):
        crit = critical_throughputs(6)
        curves = jain_curve(6, Grid(0.35, 0.99, 0.01))
        for t in range(2, 7):
            assert crit.of(t) in set(curves[6].thetas)
        assert np.all(np.diff(curves[6].thetas) > 0)

    def test_bad_grid(self):
        with pytest.raises(DomainError):
            jain_curve(3, Grid(0.0, 0.5, 0.1))
        with pytest.raises(DomainError):
            Grid(0.5, 0.4, 0.1)

    def test_worker_count_does_not_change_output(self, monkeypatch):
        grid = Grid(0.4, 0.9, 1e-3)
        serial = jain_curve(4, grid)
        monkeypatch.setenv("ALOHA_TF_THREADS", "4")
        parallel = jain_curve(4, grid)
        assert serial == parallel


class TestInterpolation:
    @pytest.mark.parametrize("n", [2, 4, 7])
    def test_through_critical_points(self, n):
        crit = critical_throughputs(n)
        for t in range(2, n + 1):
            assert jain_interpolation(t / n, n) == pytest.approx(crit.of(t), abs=1e-12)
        assert jain_interpolation(1.0, n) == pytest.approx(crit.of(n), abs=1e-15)

    def test_value(self):
        assert jain_interpolation(0.6, 4) == pytest.approx(INTERP_06_N4, abs=1e-14)

    def test_domain(self):
        with pytest.raises(DomainError):
            jain_interpolation(0.2, 4)
        with pytest.raises(DomainError):
            jain_interpolation(1.01, 4)

    @pytest.mark.parametrize("n", [3, 4, 6])
    def test_lies_above_tradeoff(self, n):
        curve = jain_curve(n, Grid(critical_throughputs(n).of(n), 0.9999, 1e-4))[n]
        theta, F = curve.thetas, curve.F
        # F* is decreasing, so its inverse at level F is found by interpolation
        for level in np.linspace(F.min(), 1.0, 60):
            theta_true = np.interp(level, F[::-1], theta[::-1])
            assert jain_interpolation(level, n) >= theta_true - 1e-4


class TestProperties:
    def test_four_users(self):
        crit = critical_throughputs(4)
        curve = jain_curve(4, Grid(crit.of(4), 0.999, 1e-4))[4]
        report = jain_curve_properties(curve)
        assert report.passed, report.to_dict()
        assert all(v is True for v in report.checks.values())

    def test_two_users_convex(self):
        curve = jain_curve(2, Grid(0.5, 0.999, 1e-4))[2]
        report = jain_curve_properties(curve)
        assert report.checks["piecewise_convex"] is True
        theta = np.linspace(0.5, 0.999, 500)
        assert np.all(two_user_second_derivative(theta) > 0)
        # the closed-form second derivative matches finite differences of the curve
        th, F = curve.thetas, curve.F
        d2 = (F[2:] - 2 * F[1:-1] + F[:-2]) / 1e-8
        assert_allclose(d2[100:-100:50], two_user_second_derivative(th[1:-1])[100:-100:50],
                        rtol=1e-3)
        assert_allclose(F, two_user_closed_form(th), atol=1e-12)

    def test_constant_curve(self):
        curve = jain_curve(4, Grid(0.2, 0.4, 1e-3))[4]
        report = jain_curve_properties(curve)
        assert report.checks["decreasing"] is None
        assert np.all(curve.F == 1.0)

    def test_too_coarse(self):
        with pytest.raises(GridTooCoarse):
            jain_curve_properties(jain_curve(3, Grid(0.4, 0.99, 0.01))[3])

    def test_kink_ratio_reported(self):
        crit = critical_throughputs(5)
        curve = jain_curve(5, Grid(crit.of(5), 0.999, 1e-4))[5]
        report = jain_curve_properties(curve)
        assert report.details["kink_slope_ratio"] == pytest.approx(3 / 4, rel=0.05)
