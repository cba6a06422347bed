"""Flat square torus: minimal-image metric, uniform sampling, cell-grid index.

All positions live in [0, side) x [0, side). The cell grid answers
closed-ball range queries (distance <= radius inclusive) and must agree
exactly with a brute-force scan; the simulator relies on that contract.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Torus:
    """Square torus [0, side)^2 with the minimal-image Euclidean metric."""

    side: float

    def __post_init__(self):
        if not (self.side > 0):
            raise GeometryError(f"torus side must be positive, got {self.side}")

    @property
    def area(self) -> float:
        return self.side * self.side

    def wrap(self, xy):
        """Reduce coordinates into [0, side). Works on scalars and arrays."""
        return np.mod(xy, self.side)

    def distance(self, p, q) -> float:
        return torus_distance(p, q, self)

    def distances(self, points: np.ndarray, q) -> np.ndarray:
        """Minimal-image distances from each row of `points` to `q`."""
        d = np.abs(np.asarray(points, dtype=float) - np.asarray(q, dtype=float))
        d = np.minimum(d, self.side - d)
        return np.hypot(d[..., 0], d[..., 1])

    def pair_displacements(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Minimal-image displacement vectors b - a, componentwise in (-side/2, side/2]."""
        d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
        d -= self.side * np.round(d / self.side)
        return d

    def uniform_point(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(0.0, self.side, size=2)

    def uniform_points(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(0.0, self.side, size=(n, 2))


def torus_distance(p, q, torus: Torus) -> float:
    """Minimal-image Euclidean distance; always in [0, side/sqrt(2)]."""
    side = torus.side
    dx = abs(p[0] - q[0]) % side
    dy = abs(p[1] - q[1]) % side
    dx = min(dx, side - dx)
    dy = min(dy, side - dy)
    return float(np.hypot(dx, dy))


def uniform_point(rng: np.random.Generator, torus: Torus) -> np.ndarray:
    """One position with i.i.d. uniform coordinates on [0, side)."""
    return torus.uniform_point(rng)


def poisson_count(rng: np.random.Generator, mean: float) -> int:
    """Poisson draw; mean 0 deterministically yields 0."""
    if mean < 0:
        raise GeometryError(f"poisson mean must be non-negative, got {mean}")
    if mean == 0:
        return 0
    return int(rng.poisson(mean))


@dataclass
class CellGrid:
    """Bucketed spatial index for closed-ball range queries on the torus.

    The effective cell width is side / n_cells >= cell_size >= any query
    radius, so a query only ever touches the 3x3 block of cells around the
    probe. Single writer; concurrent reads are fine between mutations.
    """

    torus: Torus
    cell_size: float
    n_cells: int = field(init=False)
    _buckets: dict = field(init=False, default_factory=dict)
    _positions: dict = field(init=False, default_factory=dict)

    def __post_init__(self):
        if not (0 < self.cell_size):
            raise GeometryError(f"cell_size must be positive, got {self.cell_size}")
        if self.cell_size > self.torus.side:
            raise GeometryError("cell_size larger than the torus side")
        # floor keeps the actual cell width >= cell_size
        self.n_cells = max(1, int(self.torus.side / self.cell_size))

    def __len__(self) -> int:
        return len(self._positions)

    def _cell_of(self, pos) -> tuple:
        w = self.torus.side / self.n_cells
        i = int(pos[0] / w) % self.n_cells
        j = int(pos[1] / w) % self.n_cells
        return (i, j)

    def insert(self, pid: int, pos) -> None:
        pos = (float(pos[0]) % self.torus.side, float(pos[1]) % self.torus.side)
        if pid in self._positions:
            raise GeometryError(f"point id {pid} already present")
        self._positions[pid] = pos
        self._buckets.setdefault(self._cell_of(pos), []).append(pid)

    def remove(self, pid: int) -> None:
        pos = self._positions.pop(pid)
        cell = self._cell_of(pos)
        bucket = self._buckets[cell]
        bucket.remove(pid)
        if not bucket:
            del self._buckets[cell]

    def position(self, pid: int):
        return self._positions[pid]

    def neighbors_within(self, p, radius: float) -> list:
        """Ids of stored points q != p-location with distance(q, p) <= radius.

        A stored point exactly at `p` (distance 0) is included unless it is
        excluded by id via `exclude`.
        """
        return self.neighbors_within_excluding(p, radius, exclude=None)

    def neighbors_within_excluding(self, p, radius: float, exclude=None) -> list:
        if radius > self.cell_size:
            raise GeometryError(
                f"query radius {radius} exceeds cell_size {self.cell_size}"
            )
        n = self.n_cells
        ci, cj = self._cell_of(p)
        seen_cells = set()
        out = []
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                cell = ((ci + di) % n, (cj + dj) % n)
                if cell in seen_cells:  # wrap duplicates when n_cells < 3
                    continue
                seen_cells.add(cell)
                for pid in self._buckets.get(cell, ()):
                    if pid == exclude:
                        continue
                    if torus_distance(self._positions[pid], p, self.torus) <= radius:
                        out.append(pid)
        return out
