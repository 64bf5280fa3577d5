"""Points, datasets, Euclidean distance, and fixed-radius range-query indexes.

All neighborhood queries in the pipeline are closed-ball queries: a point at
distance exactly ``radius`` from the query center is included.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class Point:
    """A d-dimensional object with a stable non-negative integer id."""

    id: int
    coords: tuple[float, ...]

    def __post_init__(self):
        if not isinstance(self.id, int) or self.id < 0:
            raise InputError(f"point id must be a non-negative integer, got {self.id!r}")
        object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))
        if not all(math.isfinite(c) for c in self.coords):
            raise InputError(f"point {self.id} has non-finite coordinates")

    @property
    def dim(self) -> int:
        return len(self.coords)


def distance(a: Point, b: Point) -> float:
    """Euclidean distance between two points of equal dimensionality.

    This is the single metric seam for the whole package; every neighborhood
    definition is expressed in terms of it.
    """
    if len(a.coords) != len(b.coords):
        raise InputError(f"dimension mismatch: {len(a.coords)} vs {len(b.coords)}")
    return coord_distance(a.coords, b.coords)


def coord_distance(a: Sequence[float], b: Sequence[float]) -> float:
    # Plain left-to-right sum of squares; index implementations compute the
    # same expression so closed-ball membership agrees bit-for-bit.
    s = 0.0
    for x, y in zip(a, b):
        d = x - y
        s += d * d
    return math.sqrt(s)


class Dataset:
    """An immutable collection of points with distinct ids and a fixed dimension."""

    def __init__(self, points: Iterable[Point], dim: int | None = None):
        self.points: tuple[Point, ...] = tuple(points)
        if dim is None:
            if not self.points:
                raise InputError("an empty dataset needs an explicit dim")
            dim = self.points[0].dim
        if dim < 1:
            raise InputError("dim must be positive")
        self.dim = int(dim)
        for p in self.points:
            if p.dim != self.dim:
                raise InputError(f"point {p.id} has {p.dim} coordinates, expected {self.dim}")
        self._by_id = {p.id: p for p in self.points}
        if len(self._by_id) != len(self.points):
            raise InputError("duplicate point ids in dataset")
        self.ids = np.array([p.id for p in self.points], dtype=np.int64)
        self.coords = (
            np.array([p.coords for p in self.points], dtype=np.float64)
            if self.points
            else np.empty((0, self.dim), dtype=np.float64)
        )

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[Point]:
        return iter(self.points)

    def point(self, point_id: int) -> Point:
        try:
            return self._by_id[point_id]
        except KeyError:
            raise InputError(f"no point with id {point_id}") from None

    def __contains__(self, point_id: int) -> bool:
        return point_id in self._by_id


def _select_distances(coords: np.ndarray, positions: np.ndarray, center: np.ndarray) -> np.ndarray:
    diff = coords[positions] - center
    return np.sqrt((diff * diff).sum(axis=1))


class GridIndex:
    """Uniform-grid index over an (n, d) coordinate array.

    Cell side should be the dominant query radius; arbitrary radii still work,
    the query just scans more cells. Positions are returned in ascending order.
    """

    def __init__(self, coords: np.ndarray, cell_size: float):
        if cell_size <= 0 or not math.isfinite(cell_size):
            raise InputError(f"cell_size must be positive and finite, got {cell_size}")
        self.coords = np.asarray(coords, dtype=np.float64)
        self.cell_size = float(cell_size)
        self.dim = self.coords.shape[1]
        self._origin = self.coords.min(axis=0) if len(self.coords) else np.zeros(self.dim)
        self._cells: dict[tuple[int, ...], list[int]] = {}
        for pos, row in enumerate(self.coords):
            self._cells.setdefault(self._cell_of(row), []).append(pos)
        if self._cells:
            keys = np.array(list(self._cells))
            self._cell_lo = keys.min(axis=0)
            self._cell_hi = keys.max(axis=0)

    def _cell_of(self, row: np.ndarray) -> tuple[int, ...]:
        return tuple(int(v) for v in np.floor((row - self._origin) / self.cell_size))

    def query(self, center: Sequence[float], radius: float) -> np.ndarray:
        positions, _ = self.query_with_distances(center, radius)
        return positions

    def query_with_distances(self, center: Sequence[float], radius: float):
        center = np.asarray(center, dtype=np.float64)
        if center.shape != (self.dim,):
            raise InputError(f"query center has dimension {center.shape}, index has {self.dim}")
        if len(self.coords) == 0:
            return np.empty(0, dtype=np.int64), np.empty(0)
        lo = np.floor((center - radius - self._origin) / self.cell_size).astype(int)
        hi = np.floor((center + radius - self._origin) / self.cell_size).astype(int)
        # Only occupied cells can contribute; for radii far above the cell
        # size it is cheaper to scan the occupied cells than the box product.
        lo = np.maximum(lo, self._cell_lo)
        hi = np.minimum(hi, self._cell_hi)
        if (lo > hi).any():
            return np.empty(0, dtype=np.int64), np.empty(0)
        candidates: list[int] = []
        if math.prod(int(b - a) + 1 for a, b in zip(lo, hi)) > len(self._cells):
            for cell, members in self._cells.items():
                if all(a <= c <= b for c, a, b in zip(cell, lo, hi)):
                    candidates.extend(members)
        else:
            for cell in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))):
                candidates.extend(self._cells.get(cell, ()))
        if not candidates:
            return np.empty(0, dtype=np.int64), np.empty(0)
        positions = np.array(sorted(candidates), dtype=np.int64)
        dists = _select_distances(self.coords, positions, center)
        keep = dists <= radius
        return positions[keep], dists[keep]


class KDTreeIndex:
    """k-d tree index over an (n, d) coordinate array (scipy-backed)."""

    def __init__(self, coords: np.ndarray):
        from scipy.spatial import cKDTree

        self.coords = np.asarray(coords, dtype=np.float64)
        self.dim = self.coords.shape[1]
        self._tree = cKDTree(self.coords) if len(self.coords) else None

    def query(self, center: Sequence[float], radius: float) -> np.ndarray:
        positions, _ = self.query_with_distances(center, radius)
        return positions

    def query_with_distances(self, center: Sequence[float], radius: float):
        center = np.asarray(center, dtype=np.float64)
        if center.shape != (self.dim,):
            raise InputError(f"query center has dimension {center.shape}, index has {self.dim}")
        if self._tree is None:
            return np.empty(0, dtype=np.int64), np.empty(0)
        found = self._tree.query_ball_point(center, radius)
        positions = np.array(sorted(found), dtype=np.int64)
        # Recompute distances with our own formula so the <= radius boundary
        # matches coord_distance exactly.
        dists = _select_distances(self.coords, positions, center)
        keep = dists <= radius
        return positions[keep], dists[keep]


class RangeIndex:
    """Fixed-radius query index over a Dataset, answering in point ids.

    Immutable once built; safe for concurrent read-only queries. Results are
    sorted by ascending id, which also fixes the summation order of the
    quality scores computed from them.
    """

    def __init__(self, dataset: Dataset, cell_size: float | None = None):
        self.dataset = dataset
        if cell_size is not None and dataset.dim <= 4:
            self._core = GridIndex(dataset.coords, cell_size)
        else:
            self._core = KDTreeIndex(dataset.coords)

    def query_ids(self, center: Sequence[float], radius: float) -> list[int]:
        positions = self._core.query(center, radius)
        return sorted(int(self.dataset.ids[p]) for p in positions)

    def query_with_distances(self, center: Sequence[float], radius: float) -> list[tuple[int, float]]:
        positions, dists = self._core.query_with_distances(center, radius)
        pairs = [(int(self.dataset.ids[p]), float(d)) for p, d in zip(positions, dists)]
        pairs.sort()
        return pairs


def build_index(ds: Dataset, cell_size: float | None = None) -> RangeIndex:
    """Build a range-query index; pass the dominant query radius as cell_size."""
    return RangeIndex(ds, cell_size=cell_size)


def range_query(idx: RangeIndex, center: Point, radius: float) -> set[int]:
    """Ids of all dataset points within the closed ball of `radius` around `center`."""
    if radius < 0:
        raise InputError(f"radius must be non-negative, got {radius}")
    if center.dim != idx.dataset.dim:
        raise InputError(f"dimension mismatch: query {center.dim}, index {idx.dataset.dim}")
    return set(idx.query_ids(center.coords, radius))


def save_dataset_csv(ds: Dataset, path: str | Path) -> None:
    """Write `id,c0,...,c{d-1}` header plus one row per point."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["id"] + [f"c{k}" for k in range(ds.dim)])
        for p in ds.points:
            writer.writerow([p.id] + [repr(c) for c in p.coords])


def load_dataset_csv(path: str | Path) -> Dataset:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty dataset file") from None
        if len(header) < 2 or header[0] != "id" or header[1:] != [f"c{k}" for k in range(len(header) - 1)]:
            raise InputError(f"{path}: bad header {header!r}, expected id,c0,...")
        dim = len(header) - 1
        points = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != dim + 1:
                raise InputError(f"{path}:{lineno}: expected {dim + 1} fields, got {len(row)}")
            try:
                points.append(Point(int(row[0]), tuple(float(v) for v in row[1:])))
            except ValueError as e:
                raise InputError(f"{path}:{lineno}: {e}") from None
        return Dataset(points, dim=dim)
