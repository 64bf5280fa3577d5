import time

import numpy as np
import pytest

import oracles
from conftest import as_pairs, make_dataset, random_dataset
from distclust import (
    Dataset,
    InputError,
    RepresentativeStream,
    SelectionState,
    StopCriterion,
    build_index,
    covering_stats,
    dyn_rep_q,
    select_representatives,
    stat_rep_q,
)
from distclust.representatives import read_records_jsonl, write_records_jsonl


def run_selection(ds, eps, stop, site=0):
    state = SelectionState(ds, eps, site=site)
    return list(state.run(stop)), state


# ---------------------------------------------------------------- stat_rep_q

def test_stat_rep_q_isolated_point_is_epsilon():
    ds = make_dataset([(0.0, 0.0), (100.0, 100.0)])
    idx = build_index(ds, cell_size=2.0)
    assert stat_rep_q(ds.point(0), 2.0, idx) == 2.0


def test_stat_rep_q_sums_margins_of_all_neighbors():
    # Center object with four neighbors inside the range: the score is the sum
    # of the four (eps - d) margins plus the center's own eps term.
    eps = 2.0
    dists = [0.5, 0.8, 1.2, 1.9]
    coords = [(0.0, 0.0)] + [(d, 0.0) for d in dists]
    ds = make_dataset(coords)
    idx = build_index(ds, cell_size=eps)
    expected = sum(eps - d for d in dists) + eps
    assert stat_rep_q(ds.point(0), eps, idx) == pytest.approx(expected, rel=1e-12)


def test_stat_rep_q_matches_brute_force(rng):
    ds = random_dataset(rng, 100)
    span = ds.coords.max(axis=0) - ds.coords.min(axis=0)
    eps = 0.2 * float(np.sqrt((span * span).sum()))
    idx = build_index(ds, cell_size=eps)
    pairs = as_pairs(ds)
    for p in ds:
        expected = oracles.stat_rep_q_brute(pairs, p.id, eps)
        assert stat_rep_q(p, eps, idx) == pytest.approx(expected, rel=1e-9)


def test_stat_rep_q_rejects_bad_epsilon():
    ds = make_dataset([(0.0, 0.0)])
    with pytest.raises(InputError):
        stat_rep_q(ds.point(0), 0.0, build_index(ds))


# ----------------------------------------------------------------- dyn_rep_q

def test_dyn_rep_q_equals_stat_when_nothing_chosen(rng):
    ds = random_dataset(rng, 60)
    eps = 1.5
    state = SelectionState(ds, eps)
    for p in ds:
        assert dyn_rep_q(p, eps, state) == stat_rep_q(p, eps, state.index)


def test_dyn_rep_q_drops_when_neighbors_get_covered():
    # B has neighbors at 0.5, 0.8, 0.9; a representative away from B covers
    # the two far ones, leaving B with its 0.5-neighbor and its own term.
    eps = 1.0
    ds = make_dataset([(0.0, 0.0), (-0.5, 0.0), (0.9, 0.0), (0.8, 0.0), (1.7, 0.0)])
    state = SelectionState(ds, eps)
    b = ds.point(0)
    assert dyn_rep_q(b, eps, state) == pytest.approx((1 - 0.5) + (1 - 0.8) + (1 - 0.9) + 1.0)
    covering_stats(ds.point(4), state)  # covers ids 2, 3, 4
    assert state.covered == {2, 3, 4}
    assert dyn_rep_q(b, eps, state) == pytest.approx((1 - 0.5) + 1.0)


def test_dyn_rep_q_matches_recompute_after_picks(rng):
    ds = random_dataset(rng, 100)
    eps = 1.2
    records, state = run_selection(ds, eps, StopCriterion.size(5))
    chosen_ids = [r.point.id for r in records]
    pairs = as_pairs(ds)
    for p in ds:
        if p.id in chosen_ids:
            continue
        expected = oracles.dyn_rep_q_brute(pairs, p.id, eps, chosen_ids)
        assert dyn_rep_q(p, eps, state) == pytest.approx(expected, rel=1e-9)


# ------------------------------------------------------- select_representatives

def test_single_point_selection():
    ds = make_dataset([(3.0, 4.0)])
    records, _ = run_selection(ds, 1.0, StopCriterion.error_bound(0.0))
    assert len(records) == 1
    rec = records[0]
    assert (rec.point.id, rec.cov_rad, rec.cov_cnt, rec.seq) == (0, 0.0, 1, 0)


def test_collinear_middle_point_wins():
    # x = 0, 1, 2 with eps 1.5: the middle scores (1.5-1)+(1.5-1)+1.5 = 2.5,
    # the ends only 0.5 + 1.5 = 2.0.
    ds = make_dataset([(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)])
    idx = build_index(ds, cell_size=1.5)
    assert stat_rep_q(ds.point(1), 1.5, idx) == 2.5
    assert stat_rep_q(ds.point(0), 1.5, idx) == 2.0
    records, _ = run_selection(ds, 1.5, StopCriterion.size(1))
    assert [r.point.id for r in records] == [1]
    assert records[0].cov_cnt == 3
    assert records[0].cov_rad == 1.0


def test_first_pick_attains_max_stat_rep_q(rng):
    ds = random_dataset(rng, 80)
    eps = 1.4
    idx = build_index(ds, cell_size=eps)
    best = max(ds, key=lambda p: (stat_rep_q(p, eps, idx), -p.id))
    records, _ = run_selection(ds, eps, StopCriterion.size(1))
    assert records[0].point.id == best.id


def test_exact_score_ties_break_to_lowest_id():
    # Two isolated points score exactly eps each; the lower id must come first.
    ds = make_dataset([(50.0, 50.0), (0.0, 0.0)])
    records, _ = run_selection(ds, 1.0, StopCriterion.size(2))
    assert [r.point.id for r in records] == [0, 1]


@pytest.mark.parametrize("stop", [
    StopCriterion.size(4),
    StopCriterion.size(10_000),
    StopCriterion.fraction(0.25),
    StopCriterion.fraction(1.0),
    StopCriterion.error_bound(0.0),
    StopCriterion.error_bound(1.0),
])
def test_selection_matches_naive_greedy(rng, stop):
    for n in (17, 60):
        ds = random_dataset(rng, n)
        eps = 1.3
        records, state = run_selection(ds, eps, stop)
        expected, expected_owner = oracles.naive_select(
            as_pairs(ds), eps,
            size_bound=stop.resolve_count(n), theta=stop.theta,
        )
        got = [(r.point.id, r.cov_rad, r.cov_cnt) for r in records]
        assert [(i, c) for i, _, c in got] == [(i, c) for i, _, c in expected]
        for (_, rad_got, _), (_, rad_exp, _) in zip(got, expected):
            assert rad_got == pytest.approx(rad_exp, rel=1e-9, abs=1e-12)
        assert state.coverage_owner == expected_owner


def test_maintained_scores_match_from_scratch_each_round(rng):
    ds = random_dataset(rng, 60)
    eps = 1.5
    pairs = as_pairs(ds)
    state = SelectionState(ds, eps)
    chosen = []
    for rec in state.run(StopCriterion.size(12)):
        chosen.append(rec.point.id)
        maintained = state.candidate_scores()
        expected = oracles.def3_scores(pairs, eps, chosen, maintained.keys())
        for oid, score in maintained.items():
            assert score == pytest.approx(expected[oid], rel=1e-9, abs=1e-12)


def test_dyn_rep_q_monotone_over_rounds(rng):
    ds = random_dataset(rng, 70)
    eps = 1.5
    state = SelectionState(ds, eps)
    previous = dict(state.candidate_scores())
    for _ in state.run(StopCriterion.size(15)):
        current = state.candidate_scores()
        for oid, score in current.items():
            assert score <= previous[oid] + 1e-12
        previous = current


def test_prefix_stability(rng):
    ds = random_dataset(rng, 60)
    eps = 1.3
    full, _ = run_selection(ds, eps, StopCriterion.size(20))
    short, _ = run_selection(ds, eps, StopCriterion.size(7))
    assert [r.point.id for r in short] == [r.point.id for r in full[:7]]
    assert short == full[:7]


def test_coverage_partition_and_cov_cnt_bound(rng):
    ds = random_dataset(rng, 90)
    eps = 1.2
    records, state = run_selection(ds, eps, StopCriterion.error_bound(0.0))
    # Exhaustive run: everything covered, newly-covered sets partition the ids.
    assert state.covered == {p.id for p in ds}
    assert sum(r.cov_cnt for r in records) == len(ds)
    assert all(r.cov_rad <= eps for r in records)
    # Truncated run: sum of cov_cnt can only fall short.
    short, short_state = run_selection(ds, eps, StopCriterion.size(5))
    assert sum(r.cov_cnt for r in short) == len(short_state.covered) <= len(ds)


def test_seq_values_consecutive(rng):
    ds = random_dataset(rng, 40)
    records, _ = run_selection(ds, 1.4, StopCriterion.size(9))
    assert [r.seq for r in records] == list(range(len(records)))


def test_size_bound_beyond_dataset_ends_at_dataset(rng):
    ds = random_dataset(rng, 12)
    records, _ = run_selection(ds, 1.0, StopCriterion.size(50))
    assert len(records) == 12
    assert sorted(r.point.id for r in records) == [p.id for p in ds]


def test_zero_score_candidates_emitted_inert_under_size_bound():
    # One dense pair: the second pick has nothing left to cover.
    ds = make_dataset([(0.0, 0.0), (0.1, 0.0)])
    records, _ = run_selection(ds, 1.0, StopCriterion.size(2))
    assert records[0].cov_cnt == 2
    assert records[1].cov_cnt == 0
    assert records[1].cov_rad == 0.0


def test_error_bound_zero_stops_before_inert_records(rng):
    ds = random_dataset(rng, 50)
    records, _ = run_selection(ds, 1.5, StopCriterion.error_bound(0.0))
    assert all(r.cov_cnt >= 1 for r in records)


def test_empty_dataset_yields_empty_stream():
    ds = Dataset([], dim=2)
    assert list(select_representatives(ds, 1.0, StopCriterion.size(3))) == []


def test_generator_cancellation_stops_work(rng):
    ds = random_dataset(rng, 60)
    state = SelectionState(ds, 1.3)
    gen = state.run(StopCriterion.error_bound(0.0))
    consumed = [next(gen), next(gen)]
    gen.close()
    assert len(state.chosen) == 2
    assert state.chosen == consumed


# -------------------------------------------------------------- covering_stats

def test_covering_stats_first_then_second_representative():
    # First representative covers nine objects, the farthest defining its
    # radius; the next one only picks up the two not yet covered.
    eps = 2.0
    ring = [(0.0, 0.0)] + [(0.25 * k, 0.0) for k in range(1, 8)] + [(0.0, 1.9)]
    far = [(3.5, 0.0), (3.8, 0.0)]
    ds = make_dataset(ring + far)
    state = SelectionState(ds, eps)

    cov_rad, cov_cnt, newly = covering_stats(ds.point(0), state)
    assert cov_cnt == 9
    assert cov_rad == max(oracles.dist(c, (0.0, 0.0)) for c in ring)
    assert sorted(newly) == list(range(9))

    cov_rad, cov_cnt, newly = covering_stats(ds.point(9), state)
    assert cov_cnt == 2
    assert cov_rad == oracles.dist((3.8, 0.0), (3.5, 0.0))
    assert sorted(newly) == [9, 10]


def test_covering_stats_fully_covered_representative_is_inert():
    ds = make_dataset([(0.0, 0.0), (0.2, 0.0)])
    state = SelectionState(ds, 1.0)
    covering_stats(ds.point(0), state)
    cov_rad, cov_cnt, newly = covering_stats(ds.point(1), state)
    assert (cov_rad, cov_cnt, newly) == (0.0, 0, [])


def test_covering_stats_records_first_owner():
    ds = make_dataset([(0.0, 0.0), (0.5, 0.0), (1.4, 0.0)])
    state = SelectionState(ds, 1.0)
    covering_stats(ds.point(0), state)   # covers 0, 1
    covering_stats(ds.point(2), state)   # newly covers only 2
    assert state.coverage_owner == {0: 0, 1: 0, 2: 1}


# -------------------------------------------------------------- stop criteria

def test_stop_criterion_validation():
    with pytest.raises(InputError):
        StopCriterion()
    with pytest.raises(InputError):
        StopCriterion(max_count=3, theta=0.0)
    with pytest.raises(InputError):
        StopCriterion.size(0)
    with pytest.raises(InputError):
        StopCriterion.fraction(0.0)
    with pytest.raises(InputError):
        StopCriterion.fraction(1.5)
    with pytest.raises(InputError):
        StopCriterion.error_bound(-1.0)


def test_fraction_resolution():
    assert StopCriterion.fraction(1.0).resolve_count(7) == 7
    assert StopCriterion.fraction(0.05).resolve_count(10) == 1  # clamped to >= 1
    assert StopCriterion.fraction(0.29).resolve_count(100) == 29
    assert StopCriterion.size(3).resolve_count(100) == 3
    assert StopCriterion.error_bound().resolve_count(100) is None


# ------------------------------------------------------------------ streaming

def test_stream_matches_sequential_selection(rng):
    ds = random_dataset(rng, 60)
    eps = 1.3
    sequential, _ = run_selection(ds, eps, StopCriterion.size(15))
    stream = RepresentativeStream(SelectionState(ds, eps), StopCriterion.size(15), maxsize=4)
    assert list(stream) == sequential


def test_stream_close_cancels_producer_promptly(rng):
    ds = random_dataset(rng, 200, clustered=False)
    stream = RepresentativeStream(SelectionState(ds, 0.8), StopCriterion.error_bound(0.0),
                                  maxsize=2)
    consumed = [next(stream) for _ in range(3)]
    stream.close()
    deadline = time.monotonic() + 2.0
    while stream._thread.is_alive() and time.monotonic() < deadline:
        time.sleep(0.005)
    assert not stream._thread.is_alive()
    # Producer ran at most a few records past the consumer (bounded queue).
    assert len(stream.state.chosen) <= len(consumed) + 2 + 2
    assert stream.state.chosen[:3] == consumed


def test_stream_propagates_nothing_after_close(rng):
    ds = random_dataset(rng, 30)
    stream = RepresentativeStream(SelectionState(ds, 1.0), StopCriterion.size(10))
    next(stream)
    stream.close()
    with pytest.raises(StopIteration):
        next(stream)


# ---------------------------------------------------------------- wire format

def test_jsonl_roundtrip(tmp_path, rng):
    ds = random_dataset(rng, 40)
    records, _ = run_selection(ds, 1.3, StopCriterion.size(10), site=3)
    path = tmp_path / "reps.jsonl"
    assert write_records_jsonl(records, path) == 10
    back = read_records_jsonl(path)
    assert [(r.site, r.seq, r.point.coords, r.cov_rad, r.cov_cnt) for r in back] == [
        (r.site, r.seq, r.point.coords, r.cov_rad, r.cov_cnt) for r in records
    ]
    first = path.read_text().splitlines()[0]
    assert first.startswith('{"site": 3, "seq": 0, "coords": [')


def test_jsonl_rejects_garbage(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"site": 0, "seq": 0}\n')
    with pytest.raises(InputError):
        read_records_jsonl(path)
    path.write_text("not json\n")
    with pytest.raises(InputError):
        read_records_jsonl(path)
