"""Hashtag and topic entropy.

Both use distinct users: an item's probability is the number of unique users
who used it in the frame divided by the number of distinct (item, user)
pairs in the same frame.  Entropy is the usual positive Shannon entropy.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .attention import DayIndex, NoPartitionError, governing_partition
from .ingest import DAY
from .topics import TopicPartition

HASHTAG_FRAME_DAYS = 7
TOPIC_FRAME_DAYS = 28


@dataclass
class EntropyPoint:
    value: float
    n_items: int
    n_users: int


def shannon(counts: Iterable[int], base: float = math.e) -> float:
    counts = [c for c in counts if c > 0]
    total = sum(counts)
    if total == 0:
        raise ValueError("entropy of an empty distribution")
    log_total = math.log(total)
    s = -math.fsum(c / total * (math.log(c) - log_total) for c in counts)
    s = max(s, 0.0)
    return s if base == math.e else s / math.log(base)


def _group_rows(index: DayIndex, group: Iterable[str] | None):
    if group is None:
        return None
    return {index.user_index[u] for u in group if u in index.user_index}


def _point(pairs: set, base: float) -> EntropyPoint | None:
    if not pairs:
        return None
    users_per_item = Counter(item for _u, item in pairs)
    return EntropyPoint(shannon(users_per_item.values(), base), len(users_per_item),
                        len({u for u, _i in pairs}))


def hashtag_entropy(index: DayIndex, day: int, group: Iterable[str] | None = None,
                    base: float = math.e, frame_days: int = HASHTAG_FRAME_DAYS):
    """Entropy of hashtag use over the ``frame_days`` days ending at ``day``.

    Returns ``None`` for an empty frame.
    """
    pairs = index.frame_pairs(day - frame_days + 1, day, _group_rows(index, group))
    return _point({(u, h) for u, h in pairs}, base)


def topic_frame(week: int, step_days: int = 7, frame_days: int = TOPIC_FRAME_DAYS):
    """First and last day of the month ending with the last day of ``week``."""
    last = (week + 1) * step_days - 1
    return last - frame_days + 1, last


def topic_entropy(index: DayIndex, week: int, partition: TopicPartition,
                  group: Iterable[str] | None = None, base: float = math.e,
                  step_days: int = 7, frame_days: int = TOPIC_FRAME_DAYS):
    """Entropy of topic use over the month preceding and including ``week``.

    A user uses a topic when they use any of its hashtags; noise hashtags do
    not count.  Returns ``None`` for an empty frame.
    """
    first, last = topic_frame(week, step_days, frame_days)
    pairs = index.frame_pairs(first, last, _group_rows(index, group))
    tmap = partition.topic_map()
    topic_pairs = set()
    for u, h in pairs:
        for t in tmap.get(h, ()):
            topic_pairs.add((u, t))
    return _point(topic_pairs, base)


def hashtag_entropy_series(index: DayIndex, days: Sequence[int] | None = None,
                           group: Iterable[str] | None = None, base: float = math.e):
    """[(day, EntropyPoint)] with empty frames left out."""
    rows = _group_rows(index, group)
    days = range(index.n_days) if days is None else days
    out = []
    frame: Counter = Counter()  # (user, hashtag) -> number of frame days it appears on
    prev = None
    for day in days:
        if prev is None or day != prev + 1:
            frame = Counter()
            for d in range(day - HASHTAG_FRAME_DAYS + 1, day + 1):
                frame.update(_restricted(index.day_pairs(d), rows))
        else:
            frame.update(_restricted(index.day_pairs(day), rows))
            frame.subtract(_restricted(index.day_pairs(day - HASHTAG_FRAME_DAYS), rows))
            frame = +frame
        prev = day
        pt = _point(set(frame), base)
        if pt is not None:
            out.append((day, pt))
    return out


def _restricted(pairs: set, rows):
    return pairs if rows is None else {p for p in pairs if p[0] in rows}


def topic_entropy_series(index: DayIndex, partitions: Sequence[TopicPartition], policy: str,
                         group: Iterable[str] | None = None, base: float = math.e,
                         step: int = 7 * DAY, weeks: Sequence[int] | None = None):
    """[(week, EntropyPoint)] using, for each week, the partition governing its days."""
    step_days = step // DAY
    n_weeks = -(-index.n_days // step_days)
    weeks = range(n_weeks) if weeks is None else weeks
    out = []
    for w in weeks:
        try:
            part = governing_partition(partitions, w * step_days, index.start, step, policy)
        except NoPartitionError:
            continue
        pt = topic_entropy(index, w, part, group, base, step_days)
        if pt is not None:
            out.append((w, pt))
    return out
