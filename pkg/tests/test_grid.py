import numpy as np
import pytest

from nlorlicz import (
    GridFunction,
    ValidationError,
    bump,
    decreasing_rearrangement,
    indicator_function,
    make_grid,
    random_function,
)
from nlorlicz.grid import from_csv, to_csv


class TestMakeGrid:
    def test_interval_cell_centers(self):
        g = make_grid("interval", 8, (-1.0, 1.0))
        assert g.spacing == pytest.approx(0.25)
        assert np.allclose(g.nodes.ravel(),
                           [-0.875, -0.625, -0.375, -0.125, 0.125, 0.375, 0.625, 0.875])
        assert g.cell_volume == pytest.approx(0.25)

    def test_box_counts(self):
        g = make_grid("box", 4, (0.0, 1.0, 0.0, 1.0))
        assert g.n_nodes == 16
        assert g.cell_volume == pytest.approx(1.0 / 16.0)
        # row-major: second axis fastest
        assert np.allclose(g.nodes[0], [0.125, 0.125])
        assert np.allclose(g.nodes[1], [0.125, 0.375])

    def test_ball_count_tracks_area(self):
        g = make_grid("ball", 8, (0.0, 0.0, 1.0))
        assert g.n_nodes == 52  # centers inside the disk; ~pi/4 * 64
        assert abs(g.n_nodes - np.pi / 4 * 64) <= 8
        assert np.all(np.hypot(*(g.nodes - g.center).T) < 1.0)
        assert g.cell_volume * g.n_nodes == pytest.approx(g.volume, rel=0.05)

    def test_rejections(self):
        with pytest.raises(ValidationError):
            make_grid("interval", 3, (-1.0, 1.0))
        with pytest.raises(ValidationError):
            make_grid("interval", 8, (1.0, 1.0))
        with pytest.raises(ValidationError):
            make_grid("ball", 8, (0.0, 0.0, 0.0))
        with pytest.raises(ValidationError):
            make_grid("box", 8, (0.0, 2.0, 0.0, 1.0))  # not square
        with pytest.raises(ValidationError):
            make_grid("hexagon", 8)

    def test_grid_function_validation(self):
        g = make_grid("interval", 8, (-1.0, 1.0))
        with pytest.raises(ValidationError):
            GridFunction(g, np.zeros(5))
        with pytest.raises(ValidationError):
            GridFunction(g, np.full(8, np.nan))


class TestRearrangement:
    def test_fixed_point(self):
        g = make_grid("interval", 16, (-1.0, 1.0))
        vals = np.exp(-np.abs(g.nodes.ravel()))  # radially decreasing, positive
        u = GridFunction(g, vals)
        out = decreasing_rearrangement(u)
        assert np.allclose(out.values, vals)

    def test_indicator_moves_to_center(self):
        g = make_grid("interval", 16, (-1.0, 1.0))
        u = indicator_function(g, seed=4, fraction=0.25, height=1.0)
        k = int(u.values.sum())
        out = decreasing_rearrangement(u)
        dist = np.abs(g.nodes.ravel() - g.center[0])
        nearest = np.argsort(dist, kind="stable")[:k]
        assert set(np.nonzero(out.values)[0]) == set(nearest)

    def test_preserves_value_multiset(self):
        g = make_grid("ball", 8, (0.0, 0.0, 1.0))
        u = random_function(g, seed=9)
        out = decreasing_rearrangement(u)
        assert np.allclose(np.sort(np.abs(u.values)), np.sort(out.values))

    def test_idempotent(self):
        g = make_grid("ball", 8, (0.0, 0.0, 1.0))
        u = random_function(g, seed=10)
        once = decreasing_rearrangement(u)
        twice = decreasing_rearrangement(once)
        assert np.array_equal(once.values, twice.values)

    def test_radially_nonincreasing(self):
        g = make_grid("interval", 32, (-1.0, 1.0))
        u = random_function(g, seed=11)
        out = decreasing_rearrangement(u)
        dist = np.abs(g.nodes.ravel() - g.center[0])
        order = np.argsort(dist, kind="stable")
        assert np.all(np.diff(out.values[order]) <= 1e-15)


class TestGenerators:
    def test_bump_center_and_support(self):
        g = make_grid("interval", 64, (-1.0, 1.0))
        center = g.nodes[40]  # place the apex exactly on a node
        u = bump(g, center, 0.5, 2.0)
        assert u.values[40] == pytest.approx(2.0)
        assert np.all(u.values[np.abs(g.nodes.ravel() - center[0]) >= 0.5] == 0.0)

    def test_zero_height_bump(self):
        g = make_grid("interval", 8, (-1.0, 1.0))
        assert not np.any(bump(g, [0.0], 0.5, 0.0).values)

    def test_random_function_deterministic(self):
        g = make_grid("interval", 32, (-1.0, 1.0))
        a = random_function(g, seed=77, amplitude=2.0)
        b = random_function(g, seed=77, amplitude=2.0)
        c = random_function(g, seed=78, amplitude=2.0)
        assert np.array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)
        assert np.max(np.abs(a.values)) <= 2.0

    def test_csv_roundtrip(self):
        g = make_grid("box", 4, (0.0, 1.0, 0.0, 1.0))
        u = random_function(g, seed=3)
        text = to_csv(u)
        assert text.splitlines()[0] == "x,y,value"
        back = from_csv(g, text)
        assert np.array_equal(back.values, u.values)
