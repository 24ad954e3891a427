"""Brute-force oracles: vertex enumeration, finite differences, grid search."""

import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from welfareopt.oracles import (
    GridSpec,
    finite_difference_gradient,
    grid_search_optimum,
    max_over_capped_simplex,
    min_over_capped_simplex,
)
from welfareopt.solver import Box, UtilityOracle
from welfareopt.welfare import LowKWelfare, MinimumWelfare


class SeparableOracle(UtilityOracle):
    """Agent i's utility is theta_i (identity matrix of linear utilities)."""

    def __init__(self, n):
        self.n_agents = n
        self.dim = n
        self.concave = True

    def utilities(self, theta):
        return np.asarray(theta, dtype=float).copy()

    def utilities_batch(self, S):
        return np.asarray(S, dtype=float).copy()

    def supergradient(self, theta, agent):
        g = np.zeros(self.dim)
        g[agent] = 1.0
        return g


class TestCappedSimplexMin:
    def test_example(self):
        value, w = min_over_capped_simplex([3.0, 1.0, 2.0], 2)
        assert value == 1.5
        np.testing.assert_array_equal(w, [0.0, 0.5, 0.5])

    def test_k1_is_minimum_indicator(self):
        value, w = min_over_capped_simplex([3.0, 1.0, 2.0], 1)
        assert value == 1.0
        np.testing.assert_array_equal(w, [0.0, 1.0, 0.0])

    def test_k_equals_n_is_uniform_mean(self):
        value, w = min_over_capped_simplex([3.0, 1.0, 2.0], 3)
        assert value == 2.0
        np.testing.assert_allclose(w, [1 / 3, 1 / 3, 1 / 3])

    def test_returned_vertex_attains_value(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            n = int(rng.integers(2, 11))
            k = int(rng.integers(1, n + 1))
            u = rng.uniform(-10, 10, n)
            value, w = min_over_capped_simplex(u, k)
            assert abs(float(w @ u) - value) <= 1e-12
            assert np.all(w >= 0) and abs(w.sum() - 1) <= 1e-12
            assert np.all(w <= 1 / k + 1e-12)

    def test_size_guard(self):
        with pytest.raises(ValueError):
            min_over_capped_simplex(np.zeros(13), 2)
        with pytest.raises(ValueError):
            min_over_capped_simplex([1.0, 2.0], 3)

    def test_cross_validation_against_lp_solver(self):
        # Independent route: solve the same LP with bounds [0, 1/k] by HiGHS.
        rng = np.random.default_rng(1)
        for _ in range(60):
            n = int(rng.integers(2, 5))
            k = int(rng.integers(1, n + 1))
            u = rng.uniform(-10, 10, n)
            value, _ = min_over_capped_simplex(u, k)
            res = linprog(
                c=u,
                A_eq=np.ones((1, n)),
                b_eq=[1.0],
                bounds=[(0.0, 1.0 / k)] * n,
                method="highs",
            )
            assert res.success
            assert abs(value - res.fun) <= 1e-9

    def test_cross_validation_against_simplex_grid(self):
        # Sweep a fine rational grid of the capped simplex; the enumerated
        # extreme points must match the grid minimum exactly, because every
        # uniform-on-a-subset vertex lies on a denominator-60 grid.
        rng = np.random.default_rng(2)
        steps = 60
        for n in (2, 3, 4):
            grid = [
                np.array(c) / steps
                for c in itertools.product(range(steps + 1), repeat=n - 1)
                if sum(c) <= steps
            ]
            W = np.array([np.append(g, 1.0 - g.sum()) for g in grid])
            for k in range(1, n + 1):
                feasible = W[np.all(W <= 1.0 / k + 1e-12, axis=1)]
                for _ in range(5):
                    u = rng.uniform(-10, 10, n)
                    value, _ = min_over_capped_simplex(u, k)
                    grid_min = float((feasible @ u).min())
                    assert value <= grid_min + 1e-12
                    assert abs(value - grid_min) <= 1e-9

    def test_max_variant(self):
        value, w = max_over_capped_simplex([1.0, 2.0, 3.0], 2)
        assert value == 2.5
        assert abs(float(w @ [1.0, 2.0, 3.0]) - value) <= 1e-12


class TestFiniteDifferences:
    def test_exact_on_linear(self):
        c = np.array([1.5, -2.0, 0.25])
        grad = finite_difference_gradient(lambda x: float(c @ x), np.ones(3))
        np.testing.assert_allclose(grad, c, atol=1e-10)

    def test_quadratic(self):
        x = np.array([0.3, -1.2, 2.0])
        grad = finite_difference_gradient(lambda y: 0.5 * float(y @ y), x, h=1e-6)
        np.testing.assert_allclose(grad, x, atol=1e-9)


class TestGridSearch:
    def test_monotone_1d_hits_upper_endpoint(self):
        box = Box([-1.0], [0.5])
        grid = GridSpec(0.01, box)
        value, theta = grid_search_optimum(
            MinimumWelfare(), SeparableOracle(1), grid
        )
        assert value == 0.5
        np.testing.assert_allclose(theta, [0.5])

    def test_separable_min_welfare_hits_upper_corner(self):
        box = Box([-1.0, -2.0], [0.25, 0.25])
        value, theta = grid_search_optimum(
            MinimumWelfare(), SeparableOracle(2), GridSpec(0.05, box)
        )
        assert value == 0.25
        np.testing.assert_allclose(theta, [0.25, 0.25])

    def test_ties_resolve_to_lexicographically_smallest_point(self):
        # min(theta) = 0.25 on a ridge; the row-major scan keeps the first.
        box = Box([-1.0, -2.0], [0.25, 0.75])
        value, theta = grid_search_optimum(
            MinimumWelfare(), SeparableOracle(2), GridSpec(0.05, box)
        )
        assert value == 0.25
        np.testing.assert_allclose(theta, [0.25, 0.25])

    def test_value_dominates_sampled_grid_points(self):
        box = Box([-1.0, -1.0], [0.0, 0.0])
        grid = GridSpec(0.02, box)
        oracle = SeparableOracle(2)
        phi = LowKWelfare(2)
        value, _ = grid_search_optimum(phi, oracle, grid)
        axes = grid.axes()
        rng = np.random.default_rng(3)
        for _ in range(100):
            pt = np.array([axes[0][rng.integers(axes[0].size)],
                           axes[1][rng.integers(axes[1].size)]])
            assert phi.evaluate(oracle.utilities(pt)) <= value + 1e-15

    def test_axes_cover_endpoints_within_resolution(self):
        grid = GridSpec(0.3, Box([0.0, 0.0], [1.0, 2.0]))
        for axis, lo, hi in zip(grid.axes(), [0.0, 0.0], [1.0, 2.0]):
            assert axis[0] == lo and axis[-1] == hi
            assert np.all(np.diff(axis) <= 0.3 + 1e-12)

    def test_dimension_guard(self):
        box = Box(np.zeros(4), np.ones(4))
        with pytest.raises(ValueError):
            grid_search_optimum(
                MinimumWelfare(), SeparableOracle(4), GridSpec(0.5, box)
            )

    def test_requires_finite_box(self):
        with pytest.raises(ValueError):
            GridSpec(0.1, Box([-np.inf], [0.0]))

    def test_resolution_guard(self):
        with pytest.raises(ValueError):
            GridSpec(3.0, Box([0.0], [1.0]))
