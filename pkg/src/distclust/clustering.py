"""Global clustering of representative streams, plus a centralized reference.

The global algorithm is a weighted DBSCAN variant: every range query around a
representative r uses the enlarged radius epsilon + cov_rad(r), and the core
test sums the cov_cnt weights of the representatives found instead of counting
them. With cov_rad = 0 and cov_cnt = 1 everywhere it degenerates term by term
to the textbook algorithm, which `reference_dbscan` implements independently
as the centralized baseline.

Cluster ids: -1 marks UNCLASSIFIED (never survives a completed run), 0 is
NOISE, and real clusters are numbered 1..K in discovery order.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InputError
from .geometry import Dataset, GridIndex, KDTreeIndex, build_index
from .representatives import RepresentativeRecord

UNCLASSIFIED = -1
NOISE = 0


@dataclass(frozen=True)
class GlobalParams:
    """Base epsilon (shared with the local sites) and the MinPts threshold."""

    epsilon: float
    min_pts: int

    def __post_init__(self):
        if self.epsilon <= 0:
            raise InputError(f"epsilon must be positive, got {self.epsilon}")
        if self.min_pts < 1:
            raise InputError(f"min_pts must be >= 1, got {self.min_pts}")


@dataclass
class GlobalLabeling:
    """Cluster ids keyed by (site, seq)."""

    labels: dict[tuple[int, int], int]

    @property
    def n_clusters(self) -> int:
        return len({v for v in self.labels.values() if v >= 1})


@dataclass
class ReferenceLabeling:
    """Cluster ids keyed by object id."""

    labels: dict[int, int]

    @property
    def n_clusters(self) -> int:
        return len({v for v in self.labels.values() if v >= 1})


def enlarged_radius(rep: RepresentativeRecord, params: GlobalParams) -> float:
    """Query radius used around `rep` on the global site."""
    if rep.cov_rad < 0:
        raise InputError(f"cov_rad must be non-negative, got {rep.cov_rad}")
    return params.epsilon + rep.cov_rad


def weighted_neighborhood_count(seeds: Iterable[RepresentativeRecord]) -> int:
    """Total number of local objects represented by `seeds` (sum of cov_cnt)."""
    return sum(rec.cov_cnt for rec in seeds)


def global_dbscan(reps: Sequence[RepresentativeRecord], params: GlobalParams) -> GlobalLabeling:
    """Cluster representatives in input order with per-representative enlarged
    radii and cov_cnt-weighted core tests.

    A start representative whose weighted neighborhood stays below min_pts is
    labeled NOISE; it may still be absorbed later as a border member of a
    cluster. Expansion enqueues UNCLASSIFIED neighbors of core representatives
    only. Deterministic: same input sequence and params, same labeling.
    """
    records = list(reps)
    m = len(records)
    if m == 0:
        return GlobalLabeling({})
    dims = {p.point.dim for p in records}
    if len(dims) != 1:
        raise InputError(f"representatives have mixed dimensions {sorted(dims)}")
    coords = np.array([r.point.coords for r in records], dtype=np.float64)
    cov_rad = np.array([r.cov_rad for r in records], dtype=np.float64)
    cov_cnt = np.array([r.cov_cnt for r in records], dtype=np.int64)
    if (cov_rad < 0).any() or (cov_cnt < 0).any():
        raise InputError("coverage aggregates must be non-negative")

    dim = coords.shape[1]
    cell = params.epsilon + float(cov_rad.max())
    index = GridIndex(coords, cell) if dim <= 4 else KDTreeIndex(coords)

    def neighborhood(i: int) -> np.ndarray:
        return index.query(coords[i], params.epsilon + cov_rad[i])

    labels = [UNCLASSIFIED] * m
    next_cluster = 1
    for start in range(m):
        if labels[start] != UNCLASSIFIED:
            continue
        seeds = neighborhood(start)
        if int(cov_cnt[seeds].sum()) < params.min_pts:
            labels[start] = NOISE
            continue
        for s in seeds:
            if labels[s] in (UNCLASSIFIED, NOISE):
                labels[s] = next_cluster
        frontier = deque(int(s) for s in seeds if s != start)
        while frontier:
            cur = frontier.popleft()
            nbrs = neighborhood(cur)
            if int(cov_cnt[nbrs].sum()) >= params.min_pts:
                for p in nbrs:
                    if labels[p] == UNCLASSIFIED:
                        frontier.append(int(p))
                        labels[p] = next_cluster
                    elif labels[p] == NOISE:
                        labels[p] = next_cluster
        next_cluster += 1
    return GlobalLabeling({records[i].key: labels[i] for i in range(m)})


def reference_dbscan(ds: Dataset, params: GlobalParams) -> ReferenceLabeling:
    """Textbook density-based clustering of the full dataset.

    Closed epsilon-balls; a point is core when its neighborhood, itself
    included, holds at least min_pts points. Visits points in dataset order.
    Serves as the centralized baseline the distributed result is judged
    against.
    """
    labels = {p.id: UNCLASSIFIED for p in ds}
    if not len(ds):
        return ReferenceLabeling(labels)
    index = build_index(ds, cell_size=params.epsilon)
    next_cluster = 1
    for start in ds:
        if labels[start.id] != UNCLASSIFIED:
            continue
        seeds = index.query_ids(start.coords, params.epsilon)
        if len(seeds) < params.min_pts:
            labels[start.id] = NOISE
            continue
        for s in seeds:
            if labels[s] in (UNCLASSIFIED, NOISE):
                labels[s] = next_cluster
        frontier = deque(s for s in seeds if s != start.id)
        while frontier:
            cur = frontier.popleft()
            nbrs = index.query_ids(ds.point(cur).coords, params.epsilon)
            if len(nbrs) >= params.min_pts:
                for q in nbrs:
                    if labels[q] == UNCLASSIFIED:
                        frontier.append(q)
                        labels[q] = next_cluster
                    elif labels[q] == NOISE:
                        labels[q] = next_cluster
        next_cluster += 1
    return ReferenceLabeling(labels)


def save_global_labels_csv(labeling: GlobalLabeling, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["site", "seq", "cluster_id"])
        for (site, seq), cid in sorted(labeling.labels.items()):
            writer.writerow([site, seq, cid])


def load_global_labels_csv(path: str | Path) -> GlobalLabeling:
    labels: dict[tuple[int, int], int] = {}
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["site", "seq", "cluster_id"]:
            raise InputError(f"{path}: bad header {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                labels[(int(row[0]), int(row[1]))] = int(row[2])
            except (ValueError, IndexError) as e:
                raise InputError(f"{path}:{lineno}: {e}") from None
    return GlobalLabeling(labels)


def save_reference_labels_csv(labeling: ReferenceLabeling | Mapping[int, int],
                              path: str | Path) -> None:
    labels = labeling.labels if isinstance(labeling, ReferenceLabeling) else labeling
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["id", "cluster_id"])
        for oid, cid in sorted(labels.items()):
            writer.writerow([oid, cid])


def load_reference_labels_csv(path: str | Path) -> ReferenceLabeling:
    labels: dict[int, int] = {}
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["id", "cluster_id"]:
            raise InputError(f"{path}: bad header {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                labels[int(row[0])] = int(row[1])
            except (ValueError, IndexError) as e:
                raise InputError(f"{path}:{lineno}: {e}") from None
    return ReferenceLabeling(labels)
