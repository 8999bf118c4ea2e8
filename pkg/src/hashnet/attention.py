"""User attention over topics and group similarity time series.

For day ``d`` each user's hashtag uses over the trailing week ``(d-7, d]`` are
mapped onto the topics of the governing partition.  A user's description
vector is their topic distribution minus the population's, scaled to unit
length; a group's profile is the mean of its members' vectors and the
similarity of two groups is the dot product of their profiles.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse

from .graph import STATIC, policy_kind
from .ingest import DAY, Event
from .topics import TopicPartition

TRAILING_DAYS = 7
ZERO_TOL = 1e-12

EFFECTIVE = "effective"  # divide by members with a nonzero vector
ALL_MEMBERS = "all"  # divide by every member, inactive ones counting as zero vectors


class NoPartitionError(LookupError):
    pass


def day_date(start: int, day: int) -> str:
    return datetime.fromtimestamp(start + day * DAY, tz=timezone.utc).date().isoformat()


class DayIndex:
    """Hashtag uses bucketed by (day, user) for trailing-window queries."""

    def __init__(self, events: Iterable[Event], start: int, n_days: int | None = None,
                 users: Iterable[str] | None = None):
        self.start = start
        events = list(events)
        if users is None:
            users = {ev.user_id for ev in events}
        self.users = sorted(set(users))
        self.user_index = {u: i for i, u in enumerate(self.users)}
        last = max(((ev.timestamp - start) // DAY for ev in events), default=-1)
        self.n_days = n_days if n_days is not None else last + 1
        rows: dict = defaultdict(list)
        tags: dict = defaultdict(list)
        for ev in events:
            d = (ev.timestamp - start) // DAY
            if d < 0 or d >= self.n_days:
                continue
            ui = self.user_index.get(ev.user_id)
            if ui is None:
                continue
            for h in sorted(ev.hashtags):
                rows[d].append(ui)
                tags[d].append(h)
        self._rows = {d: np.asarray(r, dtype=np.int64) for d, r in rows.items()}
        self._tags = dict(tags)

    @property
    def n_users(self) -> int:
        return len(self.users)

    def day_pairs(self, day: int) -> set:
        """Distinct (user index, hashtag) pairs used on ``day``."""
        tags = self._tags.get(day)
        if not tags:
            return set()
        return set(zip(self._rows[day].tolist(), tags))

    def frame_pairs(self, first: int, last: int, rows: set | None = None) -> set:
        """Distinct (user index, hashtag) pairs over days ``first..last`` inclusive,
        optionally restricted to the user indices in ``rows``."""
        out: set = set()
        for d in range(max(first, 0), last + 1):
            out |= self.day_pairs(d)
        if rows is not None:
            out = {p for p in out if p[0] in rows}
        return out

    def day_matrix(self, day: int, topic_map: Mapping[str, Sequence[int]], n_topics: int):
        """(users x topics) counts for one day, plus (uses, skipped) tallies."""
        tags = self._tags.get(day)
        if not tags:
            return sparse.csr_matrix((self.n_users, n_topics)), 0, 0
        rows = self._rows[day]
        r, c = [], []
        skipped = 0
        for ui, h in zip(rows.tolist(), tags):
            ids = topic_map.get(h)
            if not ids:
                skipped += 1
                continue
            for t in ids:
                r.append(ui)
                c.append(t)
        data = np.ones(len(r))
        m = sparse.csr_matrix((data, (r, c)), shape=(self.n_users, n_topics))
        return m, len(tags), skipped


@dataclass
class UsageMatrix:
    day: int
    partition_week: int
    users: list
    counts: sparse.csr_matrix  # users x topics
    uses: int = 0
    skipped: int = 0

    @property
    def total(self) -> np.ndarray:
        return np.asarray(self.counts.sum(axis=0)).ravel()

    @property
    def coverage(self) -> float | None:
        return None if self.uses == 0 else 1.0 - self.skipped / self.uses

    def row(self, user: str) -> np.ndarray:
        return self.counts[self.users.index(user)].toarray().ravel()


def week_start(day: int, start: int, step: int) -> int:
    return start + ((day * DAY) // step) * step


def governing_partition(partitions: Sequence[TopicPartition], day: int, start: int,
                        step: int = 7 * DAY, policy: str | None = None) -> TopicPartition:
    """Partition used for ``day``: the latest one whose snapshot closed by the
    start of the day's week.  A static policy's single partition governs every day.
    """
    kind = policy_kind(policy or (partitions[0].policy if partitions else ""))
    if kind == STATIC:
        if not partitions:
            raise NoPartitionError("no static partition")
        return partitions[0]
    cutoff = week_start(day, start, step)
    best = None
    for p in partitions:
        if p.time_range[1] <= cutoff and (best is None or p.time_range[1] > best.time_range[1]):
            best = p
    if best is None:
        raise NoPartitionError(f"no partition available for day {day}")
    return best


def usage_matrix(index: DayIndex, partition: TopicPartition, day: int) -> UsageMatrix:
    """Topic-attributed hashtag uses of every user over days ``day-6 .. day``.

    A hashtag in several topics counts fully in each; hashtags in no topic
    (noise or unseen) are skipped and tallied.
    """
    tmap = partition.topic_map()
    total = sparse.csr_matrix((index.n_users, partition.n_topics))
    uses = skipped = 0
    for d in range(day - TRAILING_DAYS + 1, day + 1):
        m, u, s = index.day_matrix(d, tmap, partition.n_topics)
        total = total + m
        uses += u
        skipped += s
    return UsageMatrix(day, partition.week_index, index.users, total.tocsr(), uses, skipped)


def description_vector(u, T):
    """Return ``(d, active)`` for one user's usage ``u`` and population total ``T``.

    ``d`` is the zero vector (and ``active`` False) when the user has no usage
    or their distribution coincides with the population's.
    """
    u = np.asarray(u, dtype=float)
    T = np.asarray(T, dtype=float)
    su, sT = u.sum(), T.sum()
    if su == 0 or sT == 0:
        return np.zeros_like(u), False
    v = u / su - T / sT
    norm = np.sqrt(np.dot(v, v))
    if norm <= ZERO_TOL:
        return np.zeros_like(u), False
    return v / norm, True


def description_vectors(U, T=None):
    """Row-wise :func:`description_vector` for a dense or sparse usage matrix.

    Returns ``(D, active)`` with ``D`` dense ``(n_users, n_topics)``.
    """
    U = U.toarray() if sparse.issparse(U) else np.asarray(U, dtype=float)
    if T is None:
        T = U.sum(axis=0)
    T = np.asarray(T, dtype=float)
    D = np.zeros_like(U, dtype=float)
    sT = T.sum()
    su = U.sum(axis=1)
    if sT == 0:
        return D, np.zeros(U.shape[0], dtype=bool)
    nz = su > 0
    V = U[nz] / su[nz, None] - T / sT
    norms = np.sqrt(np.einsum("ij,ij->i", V, V))
    ok = norms > ZERO_TOL
    rows = np.flatnonzero(nz)[ok]
    D[rows] = V[ok] / norms[ok, None]
    active = np.zeros(U.shape[0], dtype=bool)
    active[rows] = True
    return D, active


@dataclass
class GroupProfile:
    label: str
    day: int
    vector: np.ndarray
    member_count: int
    active_count: int


def group_profile(D: np.ndarray, active: np.ndarray, rows: Sequence[int], label: str = "",
                  day: int = 0, normalization: str = EFFECTIVE) -> GroupProfile:
    rows = np.asarray(sorted(rows), dtype=np.int64)
    act = rows[active[rows]] if len(rows) else rows
    n_t = D.shape[1]
    if len(act) == 0:
        vec = np.zeros(n_t)
    elif normalization == EFFECTIVE:
        vec = D[act].sum(axis=0) / len(act)
    elif normalization == ALL_MEMBERS:
        vec = D[act].sum(axis=0) / len(rows)
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    return GroupProfile(label, day, vec, len(rows), len(act))


def cross_similarity(profile_a: GroupProfile, profile_b: GroupProfile) -> float | None:
    """Dot product of two profiles; ``None`` when either group has no active member."""
    if profile_a.active_count == 0 or profile_b.active_count == 0:
        return None
    return float(np.dot(profile_a.vector, profile_b.vector))


def pair_key(a: str, b: str) -> str:
    return f"{a}|{b}"


@dataclass
class SimilaritySeries:
    pair: tuple
    policy: str
    points: list = field(default_factory=list)  # (day, s, active_a, active_b)

    @property
    def key(self) -> str:
        return pair_key(*self.pair)

    def values(self) -> dict:
        return {d: s for d, s, _a, _b in self.points}


def _pair_rows(groups_rows: Mapping[str, set], a: str, b: str):
    ra, rb = groups_rows[a], groups_rows[b]
    if a == b:
        return ra, rb
    shared = ra & rb
    return ra - shared, rb - shared


def similarity_series(index: DayIndex, partitions: Sequence[TopicPartition],
                      groups: Mapping[str, Iterable[str]], pairs: Sequence[tuple],
                      policy: str, step: int = 7 * DAY, days: Sequence[int] | None = None,
                      normalization: str = EFFECTIVE) -> dict:
    """Similarity series for each ``(a, b)`` in ``pairs`` under one policy.

    For ``a != b`` members of both groups are dropped from both before the
    profiles are formed.  Days without a governing partition are skipped; a
    day where either group has no active member yields no point.
    Returns ``{(a, b): SimilaritySeries}``.
    """
    kind = policy_kind(policy)
    groups_rows = {
        label: {index.user_index[u] for u in members if u in index.user_index}
        for label, members in groups.items()
    }
    out = {tuple(p): SimilaritySeries(tuple(p), kind) for p in pairs}
    if days is None:
        days = range(index.n_days)
    cache_part = None
    tmap: dict = {}
    mats: dict = {}
    for day in days:
        try:
            part = governing_partition(partitions, day, index.start, step, kind)
        except NoPartitionError:
            continue
        if part is not cache_part:
            cache_part, tmap, mats = part, part.topic_map(), {}
        U = None
        for d in range(day - TRAILING_DAYS + 1, day + 1):
            if d not in mats:
                mats[d] = index.day_matrix(d, tmap, part.n_topics)[0]
            U = mats[d] if U is None else U + mats[d]
        if part.n_topics == 0:
            continue
        D, active = description_vectors(U)
        for (a, b), series in out.items():
            ra, rb = _pair_rows(groups_rows, a, b)
            pa = group_profile(D, active, ra, a, day, normalization)
            pb = pa if a == b else group_profile(D, active, rb, b, day, normalization)
            s = cross_similarity(pa, pb)
            if s is not None:
                series.points.append((day, s, pa.active_count, pb.active_count))
    return out
