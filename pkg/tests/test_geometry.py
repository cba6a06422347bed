import math

import numpy as np
import pytest
from scipy import stats

from spatialp2p.geometry import (
    CellGrid,
    GeometryError,
    Torus,
    poisson_count,
    torus_distance,
    uniform_point,
)


UNIT = Torus(1.0)


def brute_force_within(points, probe, radius, torus):
    d = torus.distances(points, probe)
    return sorted(np.nonzero(d <= radius)[0].tolist())


class TestTorusDistance:
    def test_identity(self):
        assert torus_distance((0.3, 0.7), (0.3, 0.7), UNIT) == 0.0

    def test_wraparound(self):
        assert torus_distance((0.0, 0.0), (0.9, 0.0), UNIT) == pytest.approx(0.1)

    def test_hand_computed_minimal_images(self):
        # dx = 0.5, dy = 0.4 after wrapping
        d = torus_distance((0.2, 0.3), (0.7, 0.9), UNIT)
        assert d == pytest.approx(math.sqrt(0.41), abs=1e-12)

    def test_symmetry_translation_triangle(self):
        rng = np.random.default_rng(7)
        t = Torus(2.5)
        for _ in range(500):
            p, q, s = t.uniform_points(rng, 3)
            assert torus_distance(p, q, t) == pytest.approx(
                torus_distance(q, p, t), abs=1e-12
            )
            shift = rng.uniform(-5, 5, size=2)
            d0 = torus_distance(p, q, t)
            d1 = torus_distance(t.wrap(p + shift), t.wrap(q + shift), t)
            assert d1 == pytest.approx(d0, abs=1e-9)
            assert d0 <= torus_distance(p, s, t) + torus_distance(s, q, t) + 1e-12

    def test_diameter_bound(self):
        rng = np.random.default_rng(8)
        t = Torus(3.0)
        pts = t.uniform_points(rng, 200)
        for p in pts[:100]:
            for q in pts[100:]:
                assert torus_distance(p, q, t) <= t.side * math.sqrt(2) / 2 + 1e-12

    def test_bad_side_rejected(self):
        with pytest.raises(GeometryError):
            Torus(0.0)


class TestUniformPoint:
    def test_mean_is_center(self):
        rng = np.random.default_rng(42)
        t = Torus(2.0)
        pts = t.uniform_points(rng, 10**6)
        sigma = t.side / math.sqrt(12) / math.sqrt(10**6)
        for axis in (0, 1):
            assert abs(pts[:, axis].mean() - t.side / 2) < 3 * sigma

    def test_chi_square_occupancy(self):
        rng = np.random.default_rng(123)
        pts = UNIT.uniform_points(rng, 100_000)
        cells = np.floor(pts * 10).astype(int)
        counts = np.bincount(cells[:, 0] * 10 + cells[:, 1], minlength=100)
        _, p = stats.chisquare(counts)
        assert p > 0.01

    def test_seed_replay(self):
        a = [uniform_point(np.random.default_rng(5), UNIT) for _ in range(3)]
        b = [uniform_point(np.random.default_rng(5), UNIT) for _ in range(3)]
        rng1, rng2 = np.random.default_rng(9), np.random.default_rng(9)
        seq1 = [uniform_point(rng1, UNIT) for _ in range(100)]
        seq2 = [uniform_point(rng2, UNIT) for _ in range(100)]
        assert np.array_equal(np.array(seq1), np.array(seq2))
        assert np.array_equal(a[0], b[0])


class TestPoissonCount:
    def test_zero_mean(self):
        rng = np.random.default_rng(0)
        assert poisson_count(rng, 0.0) == 0

    def test_mean_and_variance(self):
        rng = np.random.default_rng(2024)
        draws = rng.poisson(5.0, size=10**6)
        assert abs(draws.mean() - 5.0) < 0.02
        assert abs(draws.var() - 5.0) < 0.05

    def test_negative_mean_rejected(self):
        with pytest.raises(GeometryError):
            poisson_count(np.random.default_rng(0), -1.0)


class TestCellGrid:
    def test_empty_grid(self):
        grid = CellGrid(UNIT, cell_size=0.1)
        assert grid.neighbors_within((0.5, 0.5), 0.1) == []

    def test_exact_radius_included(self):
        # binary-exact coordinates so the distance is exactly the radius
        grid = CellGrid(UNIT, cell_size=0.25)
        grid.insert(1, (0.125, 0.125))
        grid.insert(2, (0.375, 0.125))
        assert grid.neighbors_within((0.125, 0.125), 0.25) == [1, 2]
        assert grid.neighbors_within_excluding((0.125, 0.125), 0.25, exclude=1) == [2]

    def test_radius_above_cell_size_rejected(self):
        grid = CellGrid(UNIT, cell_size=0.1)
        with pytest.raises(GeometryError):
            grid.neighbors_within((0.0, 0.0), 0.2)

    def test_matches_brute_force(self):
        # >= 10^4 randomized probes against the exhaustive scan
        rng = np.random.default_rng(99)
        n_probes_total = 0
        for trial in range(25):
            side = float(rng.uniform(0.5, 4.0))
            t = Torus(side)
            radius = float(rng.uniform(0.05, 0.45)) * side
            grid = CellGrid(t, cell_size=radius)
            pts = t.uniform_points(rng, 400)
            for pid, p in enumerate(pts):
                grid.insert(pid, p)
            probes = t.uniform_points(rng, 440)
            for probe in probes:
                got = sorted(grid.neighbors_within(probe, radius))
                want = brute_force_within(pts, probe, radius, t)
                assert got == want
                n_probes_total += 1
        assert n_probes_total >= 10_000

    def test_insert_remove_bookkeeping(self):
        rng = np.random.default_rng(3)
        t = Torus(1.0)
        grid = CellGrid(t, cell_size=0.2)
        pts = t.uniform_points(rng, 50)
        for pid, p in enumerate(pts):
            grid.insert(pid, p)
        assert len(grid) == 50
        for pid in range(0, 50, 2):
            grid.remove(pid)
        assert len(grid) == 25
        got = sorted(grid.neighbors_within((0.5, 0.5), 0.2))
        keep = np.arange(1, 50, 2)
        d = t.distances(pts[keep], (0.5, 0.5))
        assert got == sorted(keep[d <= 0.2].tolist())

    def test_tiny_grid_wraps_without_duplicates(self):
        t = Torus(1.0)
        grid = CellGrid(t, cell_size=0.5)  # only 2x2 cells: 3x3 scan wraps
        grid.insert(1, (0.1, 0.1))
        grid.insert(2, (0.9, 0.9))
        out = grid.neighbors_within((0.0, 0.0), 0.5)
        assert sorted(out) == [1, 2]
        assert len(out) == len(set(out))
