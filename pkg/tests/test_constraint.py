import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aloha_tf.constraint import (
    achievable_range,
    equal_rate_control,
    feasible_pairs,
    regime_index,
    restricted_throughput,
    solve_ps,
)
from aloha_tf.errors import DomainError, OutOfRegime
from aloha_tf.model import critical_throughput, critical_throughputs

# p_s for T(p_s, 1, 3) = 0.47, from a 40-digit mpmath root
PS_047_1_3 = 0.12600131604352743556


def throughput_polynomial(p_s, k, n):
    """Expanded closed form of T(p_s, k, n'), written independently of the solver."""
    q_l = (n - k - 1 + k * p_s) / (n - k)  # 1 - p_l without cancellation
    return (-(1 - p_s) ** (k - 1) * (-k * n * p_s**2 + n * p_s + k - n)
            * q_l ** (n - k) / (k * p_s + (n - k - 1)))


def throughput_derivative(p_s, k, n):
    q_l = (n - k - 1 + k * p_s) / (n - k)
    return (-k * (1 - p_s) ** (k - 2) * (n * p_s - 1) * q_l ** (n - k)
            * (k * p_s * (n * p_s - 2) - (n - 1 - k)) / (k * p_s + (n - k - 1)) ** 2)


boxes = st.integers(2, 12).flatmap(
    lambda n: st.tuples(st.integers(1, n - 1), st.just(n)))


class TestRestrictedThroughput:
    @pytest.mark.parametrize("n", [2, 3, 5, 9])
    def test_uniform_gives_critical(self, n):
        for k in range(1, n + 1):
            assert restricted_throughput(1 / n, k, n) == pytest.approx(
                critical_throughput(n), rel=1e-14)

    def test_small_ps_limit(self):
        assert restricted_throughput(1e-12, 1, 2) == pytest.approx(1.0, abs=1e-11)

    def test_quadratic_point(self):
        assert restricted_throughput(0.276393202250021, 1, 2) == pytest.approx(0.6, abs=1e-14)

    @given(boxes, st.floats(1e-6, 1.0))
    def test_matches_expanded_polynomial(self, box, frac):
        k, n = box
        p_s = frac / n
        assert restricted_throughput(p_s, k, n) == pytest.approx(
            throughput_polynomial(p_s, k, n), rel=1e-11, abs=1e-14)

    @given(boxes, st.floats(0.01, 0.99))
    def test_derivative(self, box, frac):
        k, n = box
        p_s = frac / n
        h = 1e-6 / n
        fd = (restricted_throughput(p_s + h, k, n) - restricted_throughput(p_s - h, k, n)) / (2 * h)
        assert fd == pytest.approx(throughput_derivative(p_s, k, n), rel=1e-4, abs=1e-7)

    def test_strictly_decreasing(self):
        rng = np.random.default_rng(0)
        for _ in range(10_000):
            n = int(rng.integers(2, 16))
            k = int(rng.integers(1, n))
            grid = np.sort(rng.uniform(1e-6, 1 / n, 2))
            a, b = (restricted_throughput(float(p), k, n) for p in grid)
            if grid[1] - grid[0] > 1e-9:
                assert b < a

    @pytest.mark.parametrize("args", [(0.6, 1, 2), (0.0, 1, 2), (0.2, 0, 3), (0.2, 3, 3), (0.3, 1, 1)])
    def test_box(self, args):
        with pytest.raises(DomainError):
            restricted_throughput(*args)


class TestSolvePs:
    def test_boundary_exact(self):
        for n in range(2, 8):
            for k in range(1, n):
                assert solve_ps(critical_throughput(n), k, n) == 1 / n

    def test_quadratic(self):
        assert solve_ps(0.6, 1, 2) == pytest.approx((2 - math.sqrt(0.8)) / 4, abs=1e-15)

    def test_quadratic_agrees_with_bisection(self):
        from aloha_tf.constraint import _bisect_ps, _quadratic_ps

        for theta in np.linspace(0.501, 0.999, 50):
            assert _bisect_ps(theta, 1, 2) == pytest.approx(_quadratic_ps(theta), abs=1e-12)

    def test_three_users(self):
        p_s = solve_ps(0.47, 1, 3)
        assert p_s == pytest.approx(PS_047_1_3, abs=1e-12)
        assert abs(restricted_throughput(p_s, 1, 3) - 0.47) <= 1e-12
        assert abs(throughput_polynomial(p_s, 1, 3) - 0.47) <= 1e-12

    def test_no_solution(self):
        assert solve_ps(0.4, 1, 2) is None
        assert solve_ps(0.5, 1, 3) is None
        assert solve_ps(0.99, 1, 3) is None

    def test_round_trip(self):
        rng = np.random.default_rng(5)
        hits = 0
        for _ in range(3000):
            n = int(rng.integers(2, 10))
            k = int(rng.integers(1, n))
            theta = float(rng.uniform(0.3, 1.0))
            p_s = solve_ps(theta, k, n)
            if p_s is not None:
                hits += 1
                assert abs(restricted_throughput(p_s, k, n) - theta) <= 1e-10
        assert hits > 500

    @pytest.mark.parametrize("n", [2, 3, 4, 6])
    def test_consistency_with_range(self, n):
        for k in range(1, n):
            rng_ = achievable_range(k, n)
            for theta in np.arange(0.001, 1.0, 1e-3):
                assert (theta in rng_) == (solve_ps(theta, k, n) is not None)


class TestAchievableRange:
    def test_values(self):
        r = achievable_range(1, 3)
        assert r.lo == pytest.approx(4 / 9, abs=1e-15) and r.hi == 0.5
        r = achievable_range(2, 4)
        assert r.lo == pytest.approx(27 / 64, abs=1e-16) and r.hi == 0.5
        assert achievable_range(4, 5).hi == 1.0

    def test_nested(self):
        for n in range(2, 12):
            for k in range(1, n - 1):
                assert achievable_range(k, n).issubset(achievable_range(k + 1, n))

    def test_invalid(self):
        with pytest.raises(DomainError):
            achievable_range(3, 3)


class TestFeasiblePairs:
    def test_two_users(self):
        fp = feasible_pairs(0.6, 2)
        assert fp.t == 2 and set(fp) == {(1, 2)}

    def test_figure_example(self):
        theta = (critical_throughput(4) + critical_throughput(3)) / 2
        fp = feasible_pairs(theta, 12)
        assert fp.t == 4
        assert {k for k, n_prime in fp if n_prime == 8} == {5, 6, 7}

    def test_four_users(self):
        fp = feasible_pairs(0.47, 4)
        assert fp.t == 3
        assert set(fp) == {(1, 3), (2, 3), (2, 4), (3, 4)}

    @pytest.mark.parametrize("n", range(2, 9))
    def test_matches_brute_force(self, n):
        crit = critical_throughputs(n)
        for theta in np.arange(crit.of(n), 1.0, 7e-3):
            brute = {(k, m) for m in range(2, n + 1) for k in range(1, m)
                     if solve_ps(theta, k, m) is not None}
            assert set(feasible_pairs(theta, n)) == brute

    def test_out_of_regime(self):
        with pytest.raises(OutOfRegime):
            feasible_pairs(0.4, 3)
        with pytest.raises(OutOfRegime):
            feasible_pairs(1.0, 3)


def test_regime_index_half_open():
    crit = critical_throughputs(5)
    for t in range(2, 6):
        assert regime_index(crit.of(t), 5) == t
    assert regime_index(np.nextafter(crit.of(3), 0), 5) == 4


class TestEqualRateControl:
    def test_smaller_root(self):
        p = equal_rate_control(0.4, 3)
        assert p == pytest.approx(0.21807801814575442, abs=1e-15)
        assert p < 1 / 3

    def test_boundary(self):
        assert equal_rate_control(critical_throughput(4), 4) == 0.25

    @given(st.integers(2, 20), st.floats(1e-6, 1.0))
    def test_rates_exact(self, n, frac):
        theta = frac * critical_throughput(n)
        p = equal_rate_control(theta, n)
        assert abs(n * p * (1 - p) ** (n - 1) - theta) <= 1e-15
