"""Quality-driven greedy selection of local cluster representatives.

Each object gets a static representation quality: the sum of (epsilon - d)
margins over its closed epsilon-neighborhood, so densely surrounded, centrally
located objects score highest. Selection repeatedly takes the object with the
best dynamic quality (the same sum restricted to objects not yet covered by a
chosen representative) and emits it together with two aggregates: the distance
to the farthest newly covered object (cov_rad) and the count of newly covered
objects (cov_cnt). The emitted stream is best-first and can be cut off at any
point by the consumer.
"""

from __future__ import annotations

import heapq
import json
import math
import queue
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator

from .errors import InputError
from .geometry import Dataset, Point, RangeIndex, build_index


@dataclass(frozen=True)
class RepresentativeRecord:
    """One selected representative plus its coverage aggregates."""

    point: Point
    cov_rad: float
    cov_cnt: int
    site: int
    seq: int

    @property
    def key(self) -> tuple[int, int]:
        return (self.site, self.seq)


@dataclass(frozen=True)
class StopCriterion:
    """Either a size bound (absolute count or fraction of the site) or an
    error bound: stop once the best remaining dynamic quality drops to theta."""

    max_count: int | None = None
    max_fraction: float | None = None
    theta: float | None = None

    def __post_init__(self):
        active = sum(v is not None for v in (self.max_count, self.max_fraction, self.theta))
        if active != 1:
            raise InputError("exactly one stop-criterion variant must be set")
        if self.max_count is not None and self.max_count < 1:
            raise InputError("size bound must be >= 1")
        if self.max_fraction is not None and not 0.0 < self.max_fraction <= 1.0:
            raise InputError("fraction bound must be in (0, 1]")
        if self.theta is not None and self.theta < 0:
            raise InputError("theta must be >= 0")

    @classmethod
    def size(cls, count: int) -> "StopCriterion":
        return cls(max_count=count)

    @classmethod
    def fraction(cls, frac: float) -> "StopCriterion":
        return cls(max_fraction=frac)

    @classmethod
    def error_bound(cls, theta: float = 0.0) -> "StopCriterion":
        return cls(theta=theta)

    def resolve_count(self, n: int) -> int | None:
        """Concrete record limit for a site of n objects; None for error bounds."""
        if self.max_count is not None:
            return self.max_count
        if self.max_fraction is not None:
            return max(1, int(math.floor(self.max_fraction * n + 1e-9)))
        return None


def stat_rep_q(o: Point, epsilon: float, idx: RangeIndex) -> float:
    """Static representation quality: sum of (epsilon - d) over the closed
    epsilon-neighborhood of o, including o's own epsilon term."""
    if epsilon <= 0:
        raise InputError(f"epsilon must be positive, got {epsilon}")
    total = 0.0
    for _, d in idx.query_with_distances(o.coords, epsilon):
        total += epsilon - d
    return total


def dyn_rep_q(o: Point, epsilon: float, state: "SelectionState") -> float:
    """Dynamic representation quality of o: the static sum restricted to
    neighbors not yet covered by any chosen representative."""
    if epsilon <= 0:
        raise InputError(f"epsilon must be positive, got {epsilon}")
    total = 0.0
    for i, d in state.index.query_with_distances(o.coords, epsilon):
        if i not in state.covered:
            total += epsilon - d
    return total


class SelectionState:
    """Mutable state of one site's greedy selection.

    Candidate scores live in a max-priority heap with lazy re-evaluation:
    when an object becomes covered, every candidate whose neighborhood holds
    it is only marked stale; a stale candidate is re-scored from the
    definition the next time it surfaces at the top of the heap. Scores never
    increase, so the first fresh entry popped is the true maximum, and
    re-scored values are bit-identical to a from-scratch evaluation (which
    keeps tie-breaking reproducible).

    Already-covered objects stay candidates; ties break toward the lower id.
    """

    def __init__(self, dataset: Dataset, epsilon: float, site: int = 0,
                 index: RangeIndex | None = None):
        if epsilon <= 0:
            raise InputError(f"epsilon must be positive, got {epsilon}")
        self.dataset = dataset
        self.epsilon = float(epsilon)
        self.site = int(site)
        self.index = index if index is not None else build_index(dataset, cell_size=epsilon)
        self.covered: set[int] = set()
        self.chosen: list[RepresentativeRecord] = []
        self.coverage_owner: dict[int, int] = {}
        self.next_seq = 0  # advanced by covering_stats, one commit per representative
        self._candidates: set[int] = {p.id for p in dataset}
        self._scores: dict[int, float] = {}
        self._dirty: set[int] = set()
        self._heap: list[tuple[float, int]] = []
        for p in dataset:
            s = stat_rep_q(p, self.epsilon, self.index)
            self._scores[p.id] = s
            self._heap.append((-s, p.id))
        heapq.heapify(self._heap)

    def _evaluate(self, oid: int) -> float:
        return dyn_rep_q(self.dataset.point(oid), self.epsilon, self)

    def current_score(self, oid: int) -> float:
        """Exact current dynamic quality of a candidate, refreshing it if stale."""
        if oid not in self._candidates:
            raise InputError(f"{oid} is not a candidate (already chosen or unknown)")
        if oid in self._dirty:
            val = self._evaluate(oid)
            self._scores[oid] = val
            self._dirty.discard(oid)
            heapq.heappush(self._heap, (-val, oid))
        return self._scores[oid]

    def candidate_scores(self) -> dict[int, float]:
        """Materialized scores of all candidates (refreshes stale entries)."""
        return {oid: self.current_score(oid) for oid in sorted(self._candidates)}

    def _pop_best(self) -> tuple[int, float] | None:
        while self._heap:
            neg, oid = heapq.heappop(self._heap)
            if oid not in self._candidates:
                continue
            if -neg != self._scores[oid]:
                continue  # superseded by a fresher entry
            if oid in self._dirty:
                val = self._evaluate(oid)
                self._scores[oid] = val
                self._dirty.discard(oid)
                heapq.heappush(self._heap, (-val, oid))
                continue
            self._candidates.discard(oid)
            return oid, -neg
        return None

    def run(self, stop: StopCriterion) -> Iterator[RepresentativeRecord]:
        """Greedy selection; yields records best-first, one per round.

        The generator computes a record only when the consumer asks for it, so
        closing it early cancels the remaining work.
        """
        limit = stop.resolve_count(len(self.dataset))
        while True:
            if limit is not None and len(self.chosen) >= limit:
                return
            best = self._pop_best()
            if best is None:
                return
            oid, score = best
            if stop.theta is not None and score <= stop.theta:
                # Not emitted; restore candidacy so the state stays inspectable.
                self._candidates.add(oid)
                heapq.heappush(self._heap, (-score, oid))
                return
            rep = self.dataset.point(oid)
            seq = self.next_seq
            cov_rad, cov_cnt, _ = covering_stats(rep, self)
            record = RepresentativeRecord(rep, cov_rad, cov_cnt, self.site, seq)
            self.chosen.append(record)
            yield record


def covering_stats(rep: Point, state: SelectionState) -> tuple[float, int, list[int]]:
    """Coverage aggregates of `rep` against the state's current covered set,
    and the commit of that coverage.

    Returns (cov_rad, cov_cnt, newly_covered_ids): the distance to the
    farthest newly covered object (0 when nothing new is covered) and the
    count of newly covered objects. Records `rep`'s seq as the owner of each
    newly covered object and marks affected candidates for re-scoring.
    """
    pairs = state.index.query_with_distances(rep.coords, state.epsilon)
    newly = [(i, d) for i, d in pairs if i not in state.covered]
    cov_cnt = len(newly)
    cov_rad = max((d for _, d in newly), default=0.0)
    seq = state.next_seq
    state.next_seq += 1
    for i, _ in newly:
        state.covered.add(i)
        state.coverage_owner[i] = seq
    for i, _ in newly:
        for q in state.index.query_ids(state.dataset.point(i).coords, state.epsilon):
            if q in state._candidates:
                state._dirty.add(q)
    return cov_rad, cov_cnt, [i for i, _ in newly]


def select_representatives(ds: Dataset, epsilon: float, stop: StopCriterion,
                           site: int = 0) -> Iterator[RepresentativeRecord]:
    """Convenience wrapper: fresh selection over `ds`, yielding records lazily."""
    state = SelectionState(ds, epsilon, site=site)
    return state.run(stop)


class RepresentativeStream:
    """One site's records produced on a worker thread through a bounded queue.

    The producer blocks when the queue is full; close() cancels it promptly
    even mid-block. Iteration order equals the sequential selection order.
    """

    _SENTINEL = object()

    def __init__(self, state: SelectionState, stop: StopCriterion, maxsize: int = 32):
        self.state = state
        self._queue: queue.Queue = queue.Queue(maxsize=maxsize)
        self._cancel = threading.Event()
        self._error: BaseException | None = None
        self._closed = False
        self._thread = threading.Thread(target=self._produce, args=(stop,), daemon=True)
        self._thread.start()

    def _produce(self, stop: StopCriterion) -> None:
        try:
            for record in self.state.run(stop):
                if not self._put(record):
                    return
        except BaseException as e:  # surfaced to the consumer
            self._error = e
        finally:
            self._put(self._SENTINEL)

    def _put(self, item) -> bool:
        while not self._cancel.is_set():
            try:
                self._queue.put(item, timeout=0.05)
                return True
            except queue.Full:
                continue
        return False

    def __iter__(self) -> Iterator[RepresentativeRecord]:
        return self

    def __next__(self) -> RepresentativeRecord:
        if self._closed:
            raise StopIteration
        item = self._queue.get()
        if item is self._SENTINEL:
            self._closed = True
            if self._error is not None:
                raise self._error
            raise StopIteration
        return item

    def close(self) -> None:
        """Cancel the producer and wait for it to stop."""
        self._closed = True
        self._cancel.set()
        while self._thread.is_alive():
            try:
                self._queue.get(timeout=0.01)
            except queue.Empty:
                pass
        self._thread.join()


def record_to_json(rec: RepresentativeRecord) -> str:
    return json.dumps({
        "site": rec.site,
        "seq": rec.seq,
        "coords": list(rec.point.coords),
        "cov_rad": rec.cov_rad,
        "cov_cnt": rec.cov_cnt,
    })


def write_records_jsonl(records: Iterable[RepresentativeRecord], dest: str | Path | IO[str]) -> int:
    """Write one JSON object per line, in stream order; returns the record count."""
    if hasattr(dest, "write"):
        return _write_records(records, dest)
    with open(dest, "w") as f:
        return _write_records(records, f)


def _write_records(records: Iterable[RepresentativeRecord], f: IO[str]) -> int:
    n = 0
    for rec in records:
        f.write(record_to_json(rec) + "\n")
        n += 1
    return n


def read_records_jsonl(path: str | Path) -> list[RepresentativeRecord]:
    """Parse a representative stream file; the wire format carries no object
    ids, so each point gets its seq as a synthetic id."""
    records = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                rec = RepresentativeRecord(
                    point=Point(int(obj["seq"]), tuple(float(c) for c in obj["coords"])),
                    cov_rad=float(obj["cov_rad"]),
                    cov_cnt=int(obj["cov_cnt"]),
                    site=int(obj["site"]),
                    seq=int(obj["seq"]),
                )
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as e:
                raise InputError(f"{path}:{lineno}: bad representative record: {e}") from None
            if rec.cov_rad < 0 or rec.cov_cnt < 0:
                raise InputError(f"{path}:{lineno}: negative coverage aggregate")
            records.append(rec)
    return records
