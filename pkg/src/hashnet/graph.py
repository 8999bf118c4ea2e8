"""Hashtag co-occurrence snapshots under rolling, growing and static memory.

Edge weights count distinct users: a user adds at most one to a pair's weight
within one snapshot's accumulation scope, however often they post the pair.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .ingest import DAY, Event
from .sketch import HyperLogLog

ROLLING = "rolling_window"
AGGREGATED = "growing_aggregated"
STATIC = "static_full"
POLICY_KINDS = (ROLLING, AGGREGATED, STATIC)

SHORT_NAMES = {ROLLING: "rolling", AGGREGATED: "aggregated", STATIC: "static"}
_ALIASES = {v: k for k, v in SHORT_NAMES.items()}

HEADER_TAG = "# hashnet-snapshot"


class SnapshotFormatError(ValueError):
    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = path
        self.line_no = line_no


def policy_kind(name: str) -> str:
    if name in POLICY_KINDS:
        return name
    try:
        return _ALIASES[name]
    except KeyError:
        raise ValueError(f"unknown memory policy {name!r}") from None


@dataclass(frozen=True)
class MemoryPolicy:
    kind: str
    baseline_span: int = 28 * DAY
    step: int = 7 * DAY
    window_span: int = 28 * DAY

    def __post_init__(self):
        object.__setattr__(self, "kind", policy_kind(self.kind))
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.baseline_span < self.step:
            raise ValueError("baseline_span must be at least one step")
        if self.kind == ROLLING and self.step > self.window_span:
            raise ValueError("step must not exceed window_span")

    @property
    def name(self) -> str:
        return SHORT_NAMES[self.kind]

    def header_fields(self) -> dict:
        return {
            "policy": self.kind,
            "baseline_span": self.baseline_span,
            "step": self.step,
            "window_span": self.window_span,
        }

    def snapshot_ends(self, window: tuple[int, int]) -> list[int]:
        """End time of every snapshot over the capture window ``[start, end)``."""
        start, end = window
        if self.kind == STATIC:
            return [end]
        first = min(start + self.baseline_span, end)
        ends = [first]
        t = first
        while t < end:
            t = min(t + self.step, end)
            ends.append(t)
        return ends

    def scope(self, end_k: int, window: tuple[int, int]) -> tuple[int, int]:
        start = window[0]
        if self.kind == ROLLING and end_k - start > self.baseline_span:
            return (max(start, end_k - self.window_span), end_k)
        return (start, end_k)


def event_pairs(ev: Event):
    return itertools.combinations(sorted(ev.hashtags), 2)


@dataclass
class CoocSnapshot:
    week_index: int
    time_range: tuple
    nodes: frozenset
    edges: dict  # (a, b) with a < b -> weight
    policy: MemoryPolicy
    support: dict | None = None  # pair -> frozenset of users, or pair -> HyperLogLog
    approximate: bool = False
    frozen: bool = False
    node_users: dict = field(default_factory=dict)  # tag -> distinct users (empty when imported)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> dict:
        adj = {n: set() for n in self.nodes}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def check(self) -> None:
        for (a, b), w in self.edges.items():
            if a == b:
                raise ValueError(f"self-loop on {a}")
            if not a < b:
                raise ValueError(f"edge key {(a, b)} not ordered")
            if a not in self.nodes or b not in self.nodes:
                raise ValueError(f"edge {(a, b)} has an endpoint outside the node set")
            if w < 1:
                raise ValueError(f"edge {(a, b)} has weight {w}")


class _Accumulator:
    """Distinct-user tallies with removal support (for the rolling window)."""

    def __init__(self):
        self.nodes: dict[str, Counter] = {}
        self.pairs: dict[tuple, Counter] = {}

    def add(self, ev: Event):
        u = ev.user_id
        for h in ev.hashtags:
            c = self.nodes.get(h)
            if c is None:
                c = self.nodes[h] = Counter()
            c[u] += 1
        for p in event_pairs(ev):
            c = self.pairs.get(p)
            if c is None:
                c = self.pairs[p] = Counter()
            c[u] += 1

    def remove(self, ev: Event):
        u = ev.user_id
        for h in ev.hashtags:
            c = self.nodes[h]
            c[u] -= 1
            if not c[u]:
                del c[u]
                if not c:
                    del self.nodes[h]
        for p in event_pairs(ev):
            c = self.pairs[p]
            c[u] -= 1
            if not c[u]:
                del c[u]
                if not c:
                    del self.pairs[p]


def build_snapshot_series(events: Sequence[Event], policy: MemoryPolicy,
                          window: tuple[int, int], support: str = "exact",
                          sketch_precision: int = 8) -> list[CoocSnapshot]:
    """Fold time-sorted events into the snapshot series of one policy.

    ``support`` is ``"exact"`` (keep per-edge user sets), ``"none"`` (weights
    only, still exact) or ``"sketch"`` (HyperLogLog per edge; weights become
    estimates and the snapshot is flagged approximate).
    """
    if support == "sketch":
        return _build_sketched(events, policy, window, sketch_precision)
    if support not in ("exact", "none"):
        raise ValueError(f"unknown support mode {support!r}")
    start, end = window
    for ev in events:
        if not start <= ev.timestamp < end:
            raise ValueError(f"event {ev.event_id} outside the capture window")
    acc = _Accumulator()
    head = tail = 0  # events[tail:head] are currently accumulated
    out = []
    for k, end_k in enumerate(policy.snapshot_ends(window)):
        lo, hi = policy.scope(end_k, window)
        while head < len(events) and events[head].timestamp < hi:
            acc.add(events[head])
            head += 1
        while tail < head and events[tail].timestamp < lo:
            acc.remove(events[tail])
            tail += 1
        edges = {p: len(c) for p, c in acc.pairs.items()}
        sup = None
        if support == "exact":
            sup = {p: frozenset(c) for p, c in acc.pairs.items()}
        out.append(CoocSnapshot(
            week_index=k,
            time_range=(lo, hi),
            nodes=frozenset(acc.nodes),
            edges=dict(sorted(edges.items())),
            policy=policy,
            support=sup,
            node_users={h: len(c) for h, c in sorted(acc.nodes.items())},
        ))
    return out


def _build_sketched(events, policy, window, p):
    start, end = window
    step = policy.step
    if policy.kind != STATIC and (policy.baseline_span % step or policy.window_span % step):
        raise ValueError("sketch mode needs baseline_span and window_span to be multiples of step")
    n_seg = max(1, -(-(end - start) // step))
    seg_pairs = [dict() for _ in range(n_seg)]
    seg_nodes = [dict() for _ in range(n_seg)]
    for ev in events:
        if not start <= ev.timestamp < end:
            raise ValueError(f"event {ev.event_id} outside the capture window")
        j = (ev.timestamp - start) // step
        for h in ev.hashtags:
            seg_nodes[j].setdefault(h, set()).add(ev.user_id)
        for pair in event_pairs(ev):
            sk = seg_pairs[j].get(pair)
            if sk is None:
                sk = seg_pairs[j][pair] = HyperLogLog(p)
            sk.add(ev.user_id)
    out = []
    for k, end_k in enumerate(policy.snapshot_ends(window)):
        lo, hi = policy.scope(end_k, window)
        j0, j1 = (lo - start) // step, -(-(hi - start) // step)
        merged: dict = {}
        nodes: dict = {}
        for j in range(j0, j1):
            for pair, sk in seg_pairs[j].items():
                if pair in merged:
                    merged[pair].update(sk)
                else:
                    merged[pair] = sk.copy()
            for h, users in seg_nodes[j].items():
                nodes.setdefault(h, set()).update(users)
        edges = {pair: max(1, len(sk)) for pair, sk in sorted(merged.items())}
        out.append(CoocSnapshot(k, (lo, hi), frozenset(nodes), edges, policy,
                                support=merged, approximate=True,
                                node_users={h: len(u) for h, u in sorted(nodes.items())}))
    return out


def snapshot_diff(a: CoocSnapshot, b: CoocSnapshot, limit: int = 20) -> list[str]:
    """Human-readable differences in nodes, edges and weights (at most ``limit``)."""
    diff = []
    for n in sorted(a.nodes - b.nodes):
        diff.append(f"node {n} only in first")
    for n in sorted(b.nodes - a.nodes):
        diff.append(f"node {n} only in second")
    for e in sorted(set(a.edges) | set(b.edges)):
        wa, wb = a.edges.get(e), b.edges.get(e)
        if wa != wb:
            diff.append(f"edge {e[0]}-{e[1]}: {wa} vs {wb}")
    return diff[:limit] if limit else diff


def final_aggregated_equals_static(events: Sequence[Event], window: tuple[int, int],
                                   baseline_span: int = 28 * DAY, step: int = 7 * DAY,
                                   static_events: Sequence[Event] | None = None):
    """Check that the last growing snapshot and the static snapshot coincide.

    Returns ``(equal, diff)``.  ``static_events`` lets the static side be fed a
    different corpus, which is how a mismatch is exercised.
    """
    agg = build_snapshot_series(events, MemoryPolicy(AGGREGATED, baseline_span, step), window,
                                support="none")[-1]
    stat = build_snapshot_series(events if static_events is None else static_events,
                                 MemoryPolicy(STATIC, baseline_span, step), window,
                                 support="none")[0]
    diff = snapshot_diff(agg, stat, limit=0)
    return (not diff, diff)


# --------------------------------------------------------------------------
# file format


def render_snapshot(snap: CoocSnapshot) -> str:
    head = {"week_index": snap.week_index, "start": snap.time_range[0],
            "end": snap.time_range[1], **snap.policy.header_fields()}
    lines = [HEADER_TAG + "\t" + "\t".join(f"{k}={v}" for k, v in head.items())]
    lines.extend(sorted(snap.nodes))
    for (a, b), w in sorted(snap.edges.items()):
        lines.append(f"{a}\t{b}\t{w}")
    return "\n".join(lines) + "\n"


def export_snapshot(snap: CoocSnapshot, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_snapshot(snap), encoding="utf-8")
    return path


def import_snapshot(path) -> CoocSnapshot:
    """Read a snapshot file.  The result is frozen: it has no support sets."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith(HEADER_TAG):
        raise SnapshotFormatError(path, 1, "missing snapshot header")
    meta = {}
    for item in lines[0][len(HEADER_TAG):].split("\t"):
        if not item:
            continue
        key, sep, value = item.partition("=")
        if not sep:
            raise SnapshotFormatError(path, 1, f"bad header field {item!r}")
        meta[key] = value
    try:
        policy = MemoryPolicy(meta["policy"], int(meta["baseline_span"]), int(meta["step"]),
                              int(meta["window_span"]))
        week_index = int(meta["week_index"])
        time_range = (int(meta["start"]), int(meta["end"]))
    except (KeyError, ValueError) as exc:
        raise SnapshotFormatError(path, 1, f"bad header: {exc}") from None
    nodes, edges = set(), {}
    seen_edge = False
    for line_no, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) == 1 and parts[0]:
            if seen_edge:
                raise SnapshotFormatError(path, line_no, "node line after edge lines")
            nodes.add(parts[0])
        elif len(parts) == 3:
            seen_edge = True
            a, b, w = parts
            if a not in nodes or b not in nodes:
                missing = a if a not in nodes else b
                raise SnapshotFormatError(path, line_no, f"edge references unknown node {missing!r}")
            if a == b:
                raise SnapshotFormatError(path, line_no, "self-loop")
            try:
                weight = int(w)
            except ValueError:
                raise SnapshotFormatError(path, line_no, f"bad weight {w!r}") from None
            if weight < 1:
                raise SnapshotFormatError(path, line_no, "weight must be >= 1")
            key = (a, b) if a < b else (b, a)
            if key in edges:
                raise SnapshotFormatError(path, line_no, "duplicate edge")
            edges[key] = weight
        else:
            raise SnapshotFormatError(path, line_no, "expected a node or an edge line")
    return CoocSnapshot(week_index, time_range, frozenset(nodes), dict(sorted(edges.items())),
                        policy, support=None, frozen=True)
