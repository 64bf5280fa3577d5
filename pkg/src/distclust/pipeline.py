"""End-to-end orchestration: partition, per-site selection, merge, global
clustering, relabeling, evaluation, and experiment sweeps.

Site selections are independent; they can run sequentially or on worker
threads, with bit-identical results either way. The harness always evaluates
against a single centralized clustering of the unpartitioned dataset with the
same parameters.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .clustering import GlobalLabeling, GlobalParams, ReferenceLabeling, global_dbscan, reference_dbscan
from .datagen import DatasetSpec, generate
from .errors import InputError
from .evaluation import CostModel, QualityReport, TransmissionCost, evaluate, transmission_cost
from .geometry import Dataset
from .relabel import LocalLabeling, relabel_site
from .representatives import (
    RepresentativeRecord,
    RepresentativeStream,
    SelectionState,
    StopCriterion,
)

Budget = float | int


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetSpec
    n_sites: int
    epsilon: float
    min_pts: int
    budgets: tuple[Budget, ...] = (0.05,)
    cost_model: CostModel = CostModel(bytes_per_object=100, bytes_per_aggregate=4)
    seed: int = 0
    merge_order: str = "interleave"  # or "concat"
    concurrent: bool = False

    def __post_init__(self):
        if self.n_sites < 1:
            raise InputError(f"n_sites must be >= 1, got {self.n_sites}")
        if not self.budgets:
            raise InputError("at least one representative budget is required")
        for b in self.budgets:
            budget_to_stop(b)
        if self.merge_order not in ("interleave", "concat"):
            raise InputError(f"unknown merge order {self.merge_order!r}")

    @property
    def params(self) -> GlobalParams:
        return GlobalParams(self.epsilon, self.min_pts)


def budget_to_stop(budget: Budget) -> StopCriterion:
    """A float in (0, 1] is a per-site fraction; an int >= 1 an absolute count."""
    if isinstance(budget, bool):
        raise InputError(f"bad budget {budget!r}")
    if isinstance(budget, int):
        return StopCriterion.size(budget)
    if isinstance(budget, float):
        return StopCriterion.fraction(budget)
    raise InputError(f"bad budget {budget!r}")


def partition(ds: Dataset, n_sites: int, seed: int) -> list[Dataset]:
    """Shuffle by seed, then deal points round-robin onto n_sites datasets.

    Site sizes differ by at most one; the parts are disjoint and their union
    is the input. Sites may come out empty when n_sites exceeds the dataset.
    """
    if n_sites < 1:
        raise InputError(f"n_sites must be >= 1, got {n_sites}")
    order = np.random.default_rng(seed).permutation(len(ds))
    parts: list[list] = [[] for _ in range(n_sites)]
    for pos, idx in enumerate(order):
        parts[pos % n_sites].append(ds.points[idx])
    return [Dataset(part, dim=ds.dim) for part in parts]


def merge_streams(site_records: Sequence[Sequence[RepresentativeRecord]],
                  order: str = "interleave") -> list[RepresentativeRecord]:
    """Merge per-site streams into the global visit order.

    "interleave" sorts by (seq, site): every site's best representative comes
    before anyone's second-best. "concat" keeps whole sites together.
    """
    merged = [rec for records in site_records for rec in records]
    if order == "interleave":
        merged.sort(key=lambda r: (r.seq, r.site))
    elif order == "concat":
        merged.sort(key=lambda r: (r.site, r.seq))
    else:
        raise InputError(f"unknown merge order {order!r}")
    return merged


@dataclass
class PipelineResult:
    dataset: Dataset
    sites: list[Dataset]
    site_records: list[list[RepresentativeRecord]]
    merged: list[RepresentativeRecord]
    global_labeling: GlobalLabeling
    local_labelings: dict[int, LocalLabeling]
    distributed: dict[int, int]
    reference: ReferenceLabeling
    report: QualityReport
    cost: TransmissionCost
    site_seconds: tuple[float, ...] = ()
    global_seconds: float = 0.0

    @property
    def local_seconds(self) -> float:
        """Local phase under the distributed model: the slowest site, not the sum."""
        return max(self.site_seconds, default=0.0)

    @property
    def cpu_seconds(self) -> float:
        return self.local_seconds + self.global_seconds

    @property
    def n_reps(self) -> int:
        return len(self.merged)


def _select_site(site_ds: Dataset, epsilon: float, stop: StopCriterion, site: int,
                 concurrent: bool):
    t0 = time.perf_counter()
    state = SelectionState(site_ds, epsilon, site=site)
    if concurrent:
        stream = RepresentativeStream(state, stop)
        records = list(stream)
    else:
        records = list(state.run(stop))
    return records, dict(state.coverage_owner), time.perf_counter() - t0


def run_pipeline(cfg: ExperimentConfig, budget: Budget | None = None,
                 dataset: Dataset | None = None,
                 reference: ReferenceLabeling | None = None) -> PipelineResult:
    """One full distributed run at a single budget (default: the config's first).

    Pass `dataset`/`reference` to reuse work across runs; they must match the
    config's spec and params.
    """
    budget = cfg.budgets[0] if budget is None else budget
    stop = budget_to_stop(budget)
    ds = dataset if dataset is not None else generate(cfg.dataset)
    sites = partition(ds, cfg.n_sites, cfg.seed)

    if cfg.concurrent:
        with ThreadPoolExecutor(max_workers=cfg.n_sites) as pool:
            outcomes = list(pool.map(
                lambda k: _select_site(sites[k], cfg.epsilon, stop, k, True),
                range(cfg.n_sites),
            ))
    else:
        outcomes = [_select_site(sites[k], cfg.epsilon, stop, k, False)
                    for k in range(cfg.n_sites)]
    site_records = [records for records, _, _ in outcomes]
    owners = [owner for _, owner, _ in outcomes]
    site_seconds = tuple(elapsed for _, _, elapsed in outcomes)

    merged = merge_streams(site_records, cfg.merge_order)
    t0 = time.perf_counter()
    global_labeling = global_dbscan(merged, cfg.params)
    global_seconds = time.perf_counter() - t0

    local_labelings = {
        k: relabel_site((p.id for p in sites[k]), owners[k], global_labeling, k)
        for k in range(cfg.n_sites)
    }
    distributed: dict[int, int] = {}
    for labeling in local_labelings.values():
        distributed.update(labeling.labels)

    if reference is None:
        reference = reference_dbscan(ds, cfg.params)
    report = evaluate(distributed, reference.labels)
    cost = transmission_cost(len(merged), len(ds), cfg.cost_model)
    return PipelineResult(
        dataset=ds, sites=sites, site_records=site_records, merged=merged,
        global_labeling=global_labeling, local_labelings=local_labelings,
        distributed=distributed, reference=reference, report=report, cost=cost,
        site_seconds=site_seconds, global_seconds=global_seconds,
    )


@dataclass(frozen=True)
class SweepRow:
    fraction: float
    n_sites: int
    quality: float
    bytes: int
    speedup: float
    cpu_time: float


def sweep(cfg: ExperimentConfig, fractions: Sequence[Budget] | None = None,
          site_counts: Sequence[int] | None = None) -> list[SweepRow]:
    """One pipeline run per (budget, site count) grid cell.

    The dataset is generated once and the centralized reference is clustered
    once; both are shared across cells.
    """
    fractions = tuple(fractions) if fractions is not None else cfg.budgets
    if not fractions:
        raise InputError("empty budget list")
    site_counts = tuple(site_counts) if site_counts is not None else (cfg.n_sites,)
    if not site_counts:
        raise InputError("empty site-count list")

    ds = generate(cfg.dataset)
    reference = reference_dbscan(ds, cfg.params)
    rows = []
    for n_sites in site_counts:
        cell_cfg = replace(cfg, n_sites=n_sites)
        for frac in fractions:
            result = run_pipeline(cell_cfg, budget=frac, dataset=ds, reference=reference)
            rows.append(SweepRow(
                fraction=float(frac), n_sites=n_sites,
                quality=result.report.matching_quality,
                bytes=result.cost.bytes_distributed,
                speedup=result.cost.speedup,
                cpu_time=result.cpu_seconds,
            ))
    return rows


def write_sweep_csv(rows: Iterable[SweepRow], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["fraction", "n_sites", "quality", "bytes", "speedup", "cpu_time"])
        for row in rows:
            writer.writerow([row.fraction, row.n_sites, row.quality,
                             row.bytes, row.speedup, row.cpu_time])
