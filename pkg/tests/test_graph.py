import random
from collections import defaultdict

import pytest
from hypothesis import given, settings, strategies as st

from hashnet import graph
from hashnet.graph import (AGGREGATED, ROLLING, STATIC, MemoryPolicy, SnapshotFormatError,
                           build_snapshot_series, export_snapshot, import_snapshot)
from hashnet.ingest import DAY, WEEK

from conftest import T0, ev

WINDOW = (T0, T0 + 8 * WEEK)


def brute_snapshot(events, lo, hi):
    """Edge weight = number of distinct users who co-used the pair in [lo, hi)."""
    users = defaultdict(set)
    nodes = set()
    for e in events:
        if lo <= e.timestamp < hi:
            tags = sorted(e.hashtags)
            nodes.update(tags)
            for i in range(len(tags)):
                for j in range(i + 1, len(tags)):
                    users[(tags[i], tags[j])].add(e.user_id)
    return nodes, {p: len(u) for p, u in users.items()}


def random_events(rng, n=400, n_users=15, vocab=12, span=8 * WEEK):
    out = []
    for i in range(n):
        k = rng.randint(0, 4)
        tags = rng.sample([f"t{j}" for j in range(vocab)], k)
        out.append(ev(T0 + rng.randrange(span), f"u{rng.randrange(n_users)}", tags, eid=f"e{i}"))
    out.sort(key=lambda e: e.timestamp)
    return out


def test_snapshot_ends_and_scopes():
    p = MemoryPolicy(ROLLING)
    ends = p.snapshot_ends(WINDOW)
    assert ends[0] == T0 + 4 * WEEK and ends[-1] == WINDOW[1] and len(ends) == 5
    assert p.scope(ends[0], WINDOW) == (T0, T0 + 4 * WEEK)
    assert p.scope(ends[2], WINDOW) == (T0 + 2 * WEEK, T0 + 6 * WEEK)
    a = MemoryPolicy(AGGREGATED)
    assert a.scope(ends[2], WINDOW) == (T0, T0 + 6 * WEEK)
    assert MemoryPolicy(STATIC).snapshot_ends(WINDOW) == [WINDOW[1]]
    # capture shorter than a whole number of steps: last end is clamped
    short = (T0, T0 + 5 * WEEK + 3 * DAY)
    assert a.snapshot_ends(short) == [T0 + 4 * WEEK, T0 + 5 * WEEK, short[1]]


def test_policy_validation():
    with pytest.raises(ValueError):
        MemoryPolicy("bogus")
    with pytest.raises(ValueError):
        MemoryPolicy(ROLLING, step=0)
    with pytest.raises(ValueError):
        MemoryPolicy(ROLLING, baseline_span=DAY, step=WEEK)
    with pytest.raises(ValueError):
        MemoryPolicy(ROLLING, step=5 * WEEK, baseline_span=5 * WEEK, window_span=WEEK)
    assert graph.policy_kind("rolling") == ROLLING


@pytest.mark.parametrize("kind", [ROLLING, AGGREGATED, STATIC])
def test_matches_brute_force(kind):
    rng = random.Random(11)
    events = random_events(rng)
    pol = MemoryPolicy(kind)
    for snap in build_snapshot_series(events, pol, WINDOW, support="exact"):
        snap.check()
        nodes, edges = brute_snapshot(events, *snap.time_range)
        assert snap.nodes == nodes
        assert snap.edges == edges
        for p, users in snap.support.items():
            assert len(users) == snap.edges[p]


def test_distinct_users_not_events():
    events = [ev(T0 + i, "u", ["a", "b"], eid=f"x{i}") for i in range(5)]
    events.append(ev(T0 + 10, "v", ["b", "a"]))
    snap = build_snapshot_series(events, MemoryPolicy(STATIC), WINDOW)[0]
    assert snap.edges == {("a", "b"): 2}


def test_single_hashtag_adds_node():
    snap = build_snapshot_series([ev(T0, "u", ["solo"])], MemoryPolicy(STATIC), WINDOW)[0]
    assert snap.nodes == {"solo"} and snap.edges == {}


def test_rolling_first_equals_aggregated_first():
    events = random_events(random.Random(2))
    r = build_snapshot_series(events, MemoryPolicy(ROLLING), WINDOW)
    a = build_snapshot_series(events, MemoryPolicy(AGGREGATED), WINDOW)
    assert r[0].nodes == a[0].nodes and r[0].edges == a[0].edges
    assert r[0].time_range == a[0].time_range


def test_final_aggregated_equals_static_and_mismatch():
    events = random_events(random.Random(3))
    ok, diff = graph.final_aggregated_equals_static(events, WINDOW)
    assert ok and diff == []
    extra = sorted(events + [ev(T0 + 5, "intruder", ["zz", "t0"])], key=lambda e: e.timestamp)
    ok, diff = graph.final_aggregated_equals_static(events, WINDOW, static_events=extra)
    assert not ok
    assert "node zz only in second" in diff


def test_events_outside_window_rejected():
    with pytest.raises(ValueError):
        build_snapshot_series([ev(T0 - 1, "u", ["a"])], MemoryPolicy(STATIC), WINDOW)


def test_export_import_roundtrip(tmp_path):
    events = random_events(random.Random(4))
    for snap in build_snapshot_series(events, MemoryPolicy(ROLLING), WINDOW):
        p = export_snapshot(snap, tmp_path / f"s{snap.week_index}.tsv")
        back = import_snapshot(p)
        assert back.frozen and back.support is None
        assert (back.nodes, back.edges, back.time_range, back.week_index, back.policy) == \
            (snap.nodes, snap.edges, snap.time_range, snap.week_index, snap.policy)
        assert graph.render_snapshot(back) == p.read_text()


@pytest.mark.parametrize("body,line", [
    ("a\nb\na\tc\t1\n", 4),   # unknown node
    ("a\nb\na\tb\t0\n", 4),   # weight < 1
    ("a\nb\na\tb\tx\n", 4),   # bad weight
    ("a\nb\na\tb\t1\nb\ta\t2\n", 5),  # duplicate
    ("a\na\ta\t1\n", 3),      # self-loop
    ("a\nb\na\tb\t1\nc\n", 5),  # node after edges
    ("a\tb\n", 2),
])
def test_import_errors_carry_line_numbers(tmp_path, body, line):
    snap = build_snapshot_series([], MemoryPolicy(STATIC), WINDOW)[0]
    head = graph.render_snapshot(snap).splitlines()[0]
    f = tmp_path / "bad.tsv"
    f.write_text(head + "\n" + body)
    with pytest.raises(SnapshotFormatError) as exc:
        import_snapshot(f)
    assert f":{line}:" in str(exc.value) or f"line {line}" in str(exc.value)


def test_import_bad_header(tmp_path):
    f = tmp_path / "x.tsv"
    f.write_text("a\n")
    with pytest.raises(SnapshotFormatError):
        import_snapshot(f)


def test_sketch_close_to_exact():
    rng = random.Random(7)
    events = random_events(rng, n=3000, n_users=400, vocab=6)
    exact = build_snapshot_series(events, MemoryPolicy(AGGREGATED), WINDOW, support="none")
    approx = build_snapshot_series(events, MemoryPolicy(AGGREGATED), WINDOW, support="sketch",
                                   sketch_precision=10)
    for s, a in zip(exact, approx):
        assert a.approximate and a.nodes == s.nodes and set(a.edges) == set(s.edges)
        for p, w in s.edges.items():
            assert abs(a.edges[p] - w) <= max(3, 0.15 * w)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 8 * WEEK - 1), st.integers(0, 5),
                          st.sets(st.sampled_from("abcdef"), max_size=4)), max_size=60))
def test_property_incremental_equals_rebuild(rows):
    events = sorted((ev(T0 + t, f"u{u}", tags, eid=f"e{i}") for i, (t, u, tags) in enumerate(rows)),
                    key=lambda e: e.timestamp)
    for kind in (ROLLING, AGGREGATED):
        series = build_snapshot_series(events, MemoryPolicy(kind), WINDOW, support="none")
        for snap in series:
            nodes, edges = brute_snapshot(events, *snap.time_range)
            assert snap.nodes == nodes and snap.edges == edges
        if kind == AGGREGATED:
            for a, b in zip(series, series[1:]):
                assert a.nodes <= b.nodes and all(b.edges[p] >= w for p, w in a.edges.items())
