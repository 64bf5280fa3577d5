"""Push global cluster ids back onto the local objects of each site.

An object is labeled through the representative that first covered it during
selection; objects the truncated stream never covered are labeled NOISE. No
geometric re-assignment happens here, so the labeling is an honest picture of
what the transmitted stream can reconstruct.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .clustering import NOISE, GlobalLabeling
from .errors import ConsistencyError, InputError


@dataclass
class LocalLabeling:
    """Cluster id per local object id, with the covering representative
    (site, seq) recorded for every covered object."""

    labels: dict[int, int]
    provenance: dict[int, tuple[int, int]] = field(default_factory=dict)


def relabel_site(site_ids: Iterable[int], coverage_owner: Mapping[int, int],
                 global_labeling: GlobalLabeling, site: int) -> LocalLabeling:
    """Label every object of one site from the global clustering.

    coverage_owner maps object id to the seq of the representative that first
    covered it; objects absent from it get NOISE. Raises ConsistencyError when
    an owner seq has no global label (the transmitted stream and the labeled
    stream disagree in length).
    """
    labels: dict[int, int] = {}
    provenance: dict[int, tuple[int, int]] = {}
    for oid in site_ids:
        seq = coverage_owner.get(oid)
        if seq is None:
            labels[oid] = NOISE
            continue
        key = (site, seq)
        if key not in global_labeling.labels:
            raise ConsistencyError(
                f"object {oid} is owned by representative {key}, "
                "which has no global label (truncated stream?)"
            )
        labels[oid] = global_labeling.labels[key]
        provenance[oid] = key
    return LocalLabeling(labels, provenance)


def save_local_labels_csv(labeling: LocalLabeling, path: str | Path) -> None:
    """Write `id,cluster_id,owner_seq` rows; owner_seq is -1 for uncovered."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["id", "cluster_id", "owner_seq"])
        for oid in sorted(labeling.labels):
            owner = labeling.provenance.get(oid)
            writer.writerow([oid, labeling.labels[oid], owner[1] if owner else -1])


def load_local_labels_csv(path: str | Path) -> dict[int, int]:
    """Read back just the id -> cluster_id map of a per-site labels file."""
    labels: dict[int, int] = {}
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["id", "cluster_id", "owner_seq"]:
            raise InputError(f"{path}: bad header {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                labels[int(row[0])] = int(row[1])
            except (ValueError, IndexError) as e:
                raise InputError(f"{path}:{lineno}: {e}") from None
    return labels
