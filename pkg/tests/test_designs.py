import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import qmc

from kernelrates.designs import (
    Design,
    diagnostics,
    fill_distance,
    grid_design,
    halton_points,
    perturb_with_near_duplicate,
    radical_inverse,
    separation_radius,
)


def brute_fill_1d(x):
    """Exact 1-d fill distance: end gaps and half interior gaps."""
    x = np.sort(x)
    return max(x[0], 1 - x[-1], np.max(np.diff(x)) / 2 if len(x) > 1 else 0)


class TestDesign:
    def test_validation(self):
        with pytest.raises(ValueError):
            Design([0.1, 1.2])
        with pytest.raises(ValueError):
            Design([0.1, 0.1])
        with pytest.raises(ValueError):
            Design(np.empty((0, 1)))

    def test_read_only(self):
        X = grid_design(5)
        with pytest.raises(ValueError):
            X.points[0, 0] = 0.3

    def test_csv_round_trip(self, tmp_path):
        X = halton_points(17, 3)
        text = X.to_csv(tmp_path / "x.csv")
        assert text.splitlines()[0] == "x1,x2,x3"
        assert Design.from_csv(tmp_path / "x.csv") == X
        assert Design.from_csv(text) == X

    def test_hashable(self):
        assert hash(grid_design(4)) == hash(grid_design(4))
        assert grid_design(4) != grid_design(5)


class TestGrid:
    def test_examples(self):
        np.testing.assert_array_equal(grid_design(3).points[:, 0], [0, 0.5, 1])
        np.testing.assert_array_equal(grid_design(1).points, [[0.5]])
        corners = {tuple(p) for p in grid_design(4, 2).points}
        assert corners == {(0, 0), (0, 1), (1, 0), (1, 1)}

    def test_non_power(self):
        with pytest.raises(ValueError):
            grid_design(5, 2)

    def test_three_dim(self):
        assert grid_design(27, 3).points.shape == (27, 3)


class TestHalton:
    def test_examples(self):
        np.testing.assert_array_equal(halton_points(3, 1).points[:, 0], [0.5, 0.25, 0.75])
        np.testing.assert_allclose(halton_points(1, 2).points, [[0.5, 1 / 3]])

    @pytest.mark.parametrize("d", [1, 2, 4, 6])
    def test_matches_scipy_unscrambled(self, d):
        ref = qmc.Halton(d, scramble=False).random(201)[1:]  # scipy starts at index 0
        np.testing.assert_allclose(halton_points(200, d).points, ref, atol=1e-15)

    def test_open_cube(self):
        P = halton_points(500, 3).points
        assert np.all((P > 0) & (P < 1))

    def test_radical_inverse(self):
        assert radical_inverse(0, 2) == 0.0
        assert radical_inverse(6, 2) == 0.375  # 110 -> 0.011
        assert radical_inverse(5, 3) == pytest.approx(7 / 9)  # 12 -> 0.21

    def test_dimension_limit(self):
        with pytest.raises(ValueError):
            halton_points(5, 7)


class TestFillDistance:
    def test_examples(self):
        assert fill_distance(Design([0, 0.5, 1]), 10_000) == pytest.approx(0.25, abs=1e-4)
        assert fill_distance(Design([0.5]), 10_000) == pytest.approx(0.5, abs=1e-4)

    @pytest.mark.parametrize("n", [2, 7, 20, 101])
    def test_grid(self, n):
        assert fill_distance(grid_design(n)) == pytest.approx(1 / (2 * (n - 1)), abs=1e-4)

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=30, unique=True))
    @settings(max_examples=60, deadline=None)
    def test_lower_bound_property(self, xs):
        X = Design(xs)
        res = 10_000
        h = fill_distance(X, res)
        exact = brute_fill_1d(np.array(xs))
        assert h <= exact + 1e-12
        assert exact - h <= 1 / res

    def test_two_dim_corner(self):
        h = fill_distance(Design([[0.5, 0.5]]), 200)
        assert h == pytest.approx(np.sqrt(0.5), abs=np.sqrt(2) / 200)

    def test_resolution_check(self):
        with pytest.raises(ValueError):
            fill_distance(grid_design(50), 100)

    def test_scaled_fill_tends_to_half(self):
        vals = [fill_distance(grid_design(n)) * n for n in (10, 100, 1000)]
        assert abs(vals[-1] - 0.5) < abs(vals[0] - 0.5)
        assert vals[-1] == pytest.approx(0.5, abs=1e-3)


class TestSeparation:
    def test_examples(self):
        assert separation_radius(Design([0, 0.2, 1.0])) == pytest.approx(0.1)
        assert separation_radius(grid_design(11)) == pytest.approx(0.05)

    def test_reorder_invariant(self):
        X = halton_points(40, 2)
        Y = Design(X.points[::-1])
        assert separation_radius(X) == separation_radius(Y)

    def test_needs_two(self):
        with pytest.raises(ValueError):
            separation_radius(Design([0.3]))


class TestDiagnostics:
    @pytest.mark.parametrize("n", [5, 30, 77, 150, 333])
    def test_grid_ratio(self, n):
        res = 10_000
        diag = diagnostics(grid_design(n), res)
        assert 1 - 1e-12 <= diag.ratio <= 1 + 10 / res

    def test_fill_at_least_separation(self):
        for X in (halton_points(64, 2), grid_design(16, 2), halton_points(50)):
            diag = diagnostics(X)
            assert diag.fill >= diag.separation


class TestPerturb:
    def test_example(self):
        X = Design([0, 0.5, 1])
        Y = perturb_with_near_duplicate(X, 0.01)
        assert Y.n == 4
        assert separation_radius(Y) == pytest.approx(0.005)

    def test_fill_unchanged_ratio_grows(self):
        X = grid_design(11)
        Y = perturb_with_near_duplicate(X, 1e-4)
        assert fill_distance(Y) == pytest.approx(fill_distance(X), abs=1e-4)
        assert diagnostics(Y).ratio >= diagnostics(X).ratio

    def test_flips_direction_at_boundary(self):
        Y = perturb_with_near_duplicate(Design([1.0, 0.0]), 0.01)
        assert Y.points[-1, 0] == pytest.approx(0.99)

    def test_eps_too_large(self):
        with pytest.raises(ValueError):
            perturb_with_near_duplicate(grid_design(3), 0.3)
        with pytest.raises(ValueError):
            perturb_with_near_duplicate(Design([0.5]), 0.6)
