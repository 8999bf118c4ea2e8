"""Event parsing, user classification and group assignment.

Input is line-delimited JSON, one post per line::

    {"id": "e1", "ts": 1633046400, "user": "u1", "kind": "original",
     "tags": ["#Paris"], "loc": "paris"}

Reposts carry ``"rt_of"``, the account being reposted.  Supporter and
preferred-media labels are derived from reposts of configured anchor accounts.
"""

from __future__ import annotations

import itertools
import json
import random
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

DAY = 86400
WEEK = 7 * DAY

ORIGINAL = "original"
REPOST = "repost"
_KIND_ALIASES = {
    "original": ORIGINAL,
    "tweet": ORIGINAL,
    "repost": REPOST,
    "retweet": REPOST,
}

CANDIDATE = "candidate"
MEDIA = "media"
FAMILIES = (CANDIDATE, MEDIA)

STATIC = "static_whole_period"
WEEKLY = "weekly_update"

NO_LABEL = "(none)"

_STRIP = re.compile(r"[\s,]+")


class IngestError(ValueError):
    """Raised for unrecoverable input problems (strict mode, bad anchors, ...)."""


@dataclass(frozen=True)
class Event:
    event_id: str
    timestamp: int
    user_id: str
    kind: str
    hashtags: frozenset
    repost_of_user: str | None = None
    location_tag: str | None = None

    def __post_init__(self):
        if (self.kind == REPOST) != (self.repost_of_user is not None):
            raise IngestError(
                f"event {self.event_id}: repost_of_user must be set exactly for reposts"
            )

    def to_record(self) -> dict:
        rec = {
            "id": self.event_id,
            "ts": self.timestamp,
            "user": self.user_id,
            "kind": self.kind,
            "tags": sorted(self.hashtags),
        }
        if self.repost_of_user is not None:
            rec["rt_of"] = self.repost_of_user
        if self.location_tag is not None:
            rec["loc"] = self.location_tag
        return rec


def normalize_hashtag(tag: str) -> str:
    """Case-fold, drop a leading '#', and remove separators used by our file formats."""
    tag = _STRIP.sub("", str(tag))
    return tag.lstrip("#").casefold()


def normalize_hashtags(tags) -> frozenset:
    out = set()
    for t in tags:
        t = normalize_hashtag(t)
        if t:
            out.add(t)
    return frozenset(out)


# --------------------------------------------------------------------------
# parsing


DEFAULT_FIELDS = {
    "id": ("id", "event_id"),
    "ts": ("ts", "timestamp"),
    "user": ("user", "user_id"),
    "kind": ("kind",),
    "rt_of": ("rt_of", "repost_of", "repost_of_user"),
    "tags": ("tags", "hashtags"),
    "loc": ("loc", "location", "location_tag"),
}


@dataclass
class Schema:
    """Which record keys hold which field.

    Each entry is a tuple of accepted key names; the first one present wins.
    ``Schema.from_mapping({"user": "author"})`` remaps a single field.
    """

    fields: dict = field(default_factory=lambda: dict(DEFAULT_FIELDS))

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, str] | None):
        fields = dict(DEFAULT_FIELDS)
        for key, name in (mapping or {}).items():
            if key not in fields:
                raise IngestError(f"unknown schema field {key!r}")
            fields[key] = (name,) if isinstance(name, str) else tuple(name)
        return cls(fields)

    def get(self, record: dict, key: str):
        for name in self.fields[key]:
            if name in record:
                return record[name]
        return None


@dataclass
class ParseResult:
    events: list
    rejects: list  # (line number, reason)
    n_lines: int = 0

    @property
    def n_rejected(self) -> int:
        return len(self.rejects)


def parse_timestamp(value) -> int:
    if isinstance(value, bool):
        raise ValueError("boolean timestamp")
    if isinstance(value, (int, float)):
        return int(value)
    if isinstance(value, str):
        s = value.strip()
        if re.fullmatch(r"-?\d+", s):
            return int(s)
        if s.endswith("Z"):
            s = s[:-1] + "+00:00"
        dt = datetime.fromisoformat(s)
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return int(dt.timestamp())
    raise ValueError(f"unsupported timestamp {value!r}")


def _parse_record(rec: dict, schema: Schema, line_no: int) -> Event:
    if not isinstance(rec, dict):
        raise ValueError("record is not an object")
    ts_raw = schema.get(rec, "ts")
    if ts_raw is None:
        raise ValueError("missing timestamp")
    try:
        ts = parse_timestamp(ts_raw)
    except (ValueError, OverflowError) as exc:
        raise ValueError(f"unparseable timestamp: {exc}") from None
    user = schema.get(rec, "user")
    if user is None or user == "":
        raise ValueError("missing user")
    kind_raw = schema.get(rec, "kind")
    if kind_raw is None:
        raise ValueError("missing kind")
    kind = _KIND_ALIASES.get(str(kind_raw).lower())
    if kind is None:
        raise ValueError(f"unknown kind {kind_raw!r}")
    tags = schema.get(rec, "tags")
    if tags is None:
        raise ValueError("missing hashtags")
    if isinstance(tags, str) or not isinstance(tags, (list, tuple)):
        raise ValueError("hashtags must be a list")
    rt_of = schema.get(rec, "rt_of")
    if rt_of == "":
        rt_of = None
    if kind == REPOST and rt_of is None:
        raise ValueError("repost without repost target")
    if kind == ORIGINAL and rt_of is not None:
        raise ValueError("original post with repost target")
    loc = schema.get(rec, "loc")
    event_id = schema.get(rec, "id")
    return Event(
        event_id=str(event_id) if event_id is not None else f"L{line_no}",
        timestamp=ts,
        user_id=str(user),
        kind=kind,
        hashtags=normalize_hashtags(tags),
        repost_of_user=None if rt_of is None else str(rt_of),
        location_tag=None if loc in (None, "") else str(loc),
    )


def parse_events(
    lines: Iterable[str],
    schema: Schema | None = None,
    window: tuple[int, int] | None = None,
    sort: bool = True,
    strict: bool = False,
) -> ParseResult:
    """Parse JSONL records into time-ordered events.

    Malformed lines are collected in ``rejects`` with their 1-based line
    number; ``strict=True`` raises on the first one instead.  ``window`` is the
    half-open capture window ``[start, end)``.  With ``sort=False`` the input
    must already be time-ordered, otherwise :class:`IngestError` is raised.
    """
    schema = schema or Schema()
    events, rejects = [], []
    n_lines = 0
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        n_lines += 1
        try:
            rec = json.loads(line)
            ev = _parse_record(rec, schema, line_no)
            if window is not None and not (window[0] <= ev.timestamp < window[1]):
                raise ValueError(f"timestamp {ev.timestamp} outside capture window")
        except (ValueError, IngestError) as exc:
            reason = str(exc) if not isinstance(exc, json.JSONDecodeError) else "invalid JSON"
            if strict:
                raise IngestError(f"line {line_no}: {reason}") from None
            rejects.append((line_no, reason))
            continue
        events.append(ev)
    if sort:
        events.sort(key=lambda e: e.timestamp)
    else:
        for a, b in zip(events, events[1:]):
            if b.timestamp < a.timestamp:
                raise IngestError(f"events out of order at {b.event_id}")
    return ParseResult(events, rejects, n_lines)


def read_events(path, **kwargs) -> ParseResult:
    with open(path, encoding="utf-8") as fh:
        return parse_events(fh, **kwargs)


def write_events(events: Iterable[Event], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ev in events:
            fh.write(json.dumps(ev.to_record(), sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# anchors and users


@dataclass(frozen=True)
class Anchor:
    account_id: str
    family: str
    label: str


def load_anchors(path) -> list[Anchor]:
    anchors = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rec = json.loads(line)
            try:
                a = Anchor(str(rec["account_id"]), rec["family"], str(rec["label"]))
            except KeyError as exc:
                raise IngestError(f"anchors line {line_no}: missing {exc}") from None
            if a.family not in FAMILIES:
                raise IngestError(f"anchors line {line_no}: bad family {a.family!r}")
            anchors.append(a)
    return anchors


def write_anchors(anchors: Iterable[Anchor], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a in anchors:
            fh.write(json.dumps({"account_id": a.account_id, "family": a.family,
                                 "label": a.label}, sort_keys=True) + "\n")


class LocationFilter:
    """In-scope predicate over a user's declared location.

    With no allowlist every user passes; otherwise the tag must be nonempty and
    its case-folded form listed.
    """

    def __init__(self, allowlist: Iterable[str] | None = None):
        self.allowlist = None if allowlist is None else {a.strip().casefold() for a in allowlist}

    @classmethod
    def from_file(cls, path):
        if path is None:
            return cls(None)
        text = Path(path).read_text(encoding="utf-8")
        return cls(line for line in text.splitlines() if line.strip())

    def __call__(self, location: str | None) -> bool:
        if self.allowlist is None:
            return True
        return bool(location) and location.strip().casefold() in self.allowlist


@dataclass
class UserProfile:
    user_id: str
    in_scope: bool
    repost_counts: Counter
    location: str | None = None
    n_events: int = 0
    groups: frozenset = frozenset()


def build_profiles(events: Iterable[Event], location_filter=None) -> dict[str, UserProfile]:
    """One profile per active user.  Location is the user's last non-empty tag."""
    location_filter = location_filter or LocationFilter(None)
    profiles: dict[str, UserProfile] = {}
    for ev in events:
        p = profiles.get(ev.user_id)
        if p is None:
            p = profiles[ev.user_id] = UserProfile(ev.user_id, False, Counter())
        p.n_events += 1
        if ev.location_tag:
            p.location = ev.location_tag
        if ev.kind == REPOST:
            p.repost_counts[ev.repost_of_user] += 1
    for p in profiles.values():
        p.in_scope = location_filter(p.location)
    return profiles


def in_scope_events(events: Iterable[Event], profiles: Mapping[str, UserProfile]) -> list[Event]:
    return [ev for ev in events if profiles[ev.user_id].in_scope]


def sample_null_model(users: Iterable[str], size: int, seed: int) -> list[str]:
    """Fixed random sample of ``size`` users (all of them if fewer)."""
    pool = sorted(set(users))
    if size >= len(pool):
        return pool
    return sorted(random.Random(seed).sample(pool, size))


# --------------------------------------------------------------------------
# group assignment


def _check_threshold(threshold) -> Fraction:
    frac = Fraction(threshold).limit_denominator(10**9)
    if not (Fraction(1, 2) < frac <= 1):
        raise IngestError(
            f"threshold must lie in (0.5, 1], got {threshold}; at or below 0.5 two "
            "anchors could both qualify"
        )
    return frac


def _label_counts(counts: Mapping[str, int], anchors: Mapping[str, Anchor], threshold: Fraction):
    labels = set()
    for family in FAMILIES:
        fam = {a: c for a, c in counts.items() if a in anchors and anchors[a].family == family}
        total = sum(fam.values())
        if total == 0:
            continue
        best = min(fam, key=lambda a: (-fam[a], a))
        # integer comparison: count / total >= threshold
        if fam[best] * threshold.denominator >= threshold.numerator * total:
            labels.add(anchors[best].label)
    return frozenset(labels)


@dataclass
class GroupAssignment:
    mode: str
    threshold: float
    assignments: dict  # static: user -> labels; weekly: week -> {user -> labels}
    families: dict  # label -> family
    week_start: int | None = None

    def members(self, label: str, week: int | None = None) -> set:
        table = self.assignments if self.mode == STATIC else self.assignments.get(week, {})
        return {u for u, labels in table.items() if label in labels}

    def group_sizes(self, week: int | None = None) -> dict:
        table = self.assignments if self.mode == STATIC else self.assignments.get(week, {})
        sizes = Counter()
        for labels in table.values():
            sizes.update(labels)
        return {label: sizes.get(label, 0) for label in sorted(self.families)}

    def groups(self) -> dict:
        """label -> sorted member list (static mode)."""
        if self.mode != STATIC:
            raise IngestError("groups() only applies to static assignments")
        return {label: sorted(self.members(label)) for label in sorted(self.families)}

    @property
    def weeks(self) -> list:
        return sorted(self.assignments) if self.mode == WEEKLY else []


def assign_groups(
    events: Sequence[Event],
    anchors: Sequence[Anchor],
    threshold: float = 0.75,
    mode: str = STATIC,
    start: int | None = None,
    n_weeks: int | None = None,
    lookback_weeks: int | None = 1,
) -> GroupAssignment:
    """Label users as supporters / preferred-media followers.

    A user gets label ``a`` when reposts of anchor ``a`` make up at least
    ``threshold`` of the user's reposts of that anchor's family (candidates and
    media are tallied separately).  Under ``weekly_update`` week ``w`` looks
    at reposts in the ``lookback_weeks`` weeks ending with ``w`` (``None`` means
    everything since ``start``); nothing after week ``w`` is used.
    """
    if not anchors:
        raise IngestError("no anchors configured")
    thr = _check_threshold(threshold)
    by_account = {a.account_id: a for a in anchors}
    families = {a.label: a.family for a in anchors}

    if mode == STATIC:
        counts: dict[str, Counter] = defaultdict(Counter)
        for ev in events:
            if ev.kind == REPOST and ev.repost_of_user in by_account:
                counts[ev.user_id][ev.repost_of_user] += 1
        table = {}
        for user in sorted(counts):
            labels = _label_counts(counts[user], by_account, thr)
            if labels:
                table[user] = labels
        return GroupAssignment(mode, float(threshold), table, families)

    if mode != WEEKLY:
        raise IngestError(f"unknown assignment mode {mode!r}")
    if start is None:
        start = min((ev.timestamp for ev in events), default=0)
    weekly: dict[int, Counter] = defaultdict(Counter)  # (week) -> Counter[(user, anchor)]
    last_week = -1
    for ev in events:
        w = (ev.timestamp - start) // WEEK
        last_week = max(last_week, w)
        if ev.kind == REPOST and ev.repost_of_user in by_account and w >= 0:
            weekly[w][(ev.user_id, ev.repost_of_user)] += 1
    if n_weeks is None:
        n_weeks = last_week + 1
    assignments = {}
    running: Counter = Counter()
    for w in range(n_weeks):
        running.update(weekly.get(w, {}))
        if lookback_weeks is not None and w - lookback_weeks >= 0:
            running.subtract(weekly.get(w - lookback_weeks, {}))
            running = +running
        per_user: dict[str, Counter] = defaultdict(Counter)
        for (user, acct), c in running.items():
            per_user[user][acct] = c
        table = {}
        for user in sorted(per_user):
            labels = _label_counts(per_user[user], by_account, thr)
            if labels:
                table[user] = labels
        assignments[w] = table
    return GroupAssignment(mode, float(threshold), assignments, families, week_start=start)


@dataclass(frozen=True)
class Flow:
    week: int
    from_label: str
    to_label: str
    count: int


def weekly_group_flows(assignment: GroupAssignment, family: str | None = None,
                       min_count: int = 5) -> list[Flow]:
    """Label transitions between consecutive weeks.

    Unlabeled users appear as ``(none)``.  Only flows involving more than
    ``min_count`` users are kept, so ``min_count=0`` keeps every transition.
    """
    if assignment.mode != WEEKLY:
        raise IngestError("flows need a weekly_update assignment")
    fams = [family] if family else list(FAMILIES)
    flows = []
    weeks = assignment.weeks
    for prev, cur in zip(weeks, weeks[1:]):
        a, b = assignment.assignments[prev], assignment.assignments[cur]
        for fam in fams:
            def label_of(table, user):
                for lab in table.get(user, ()):
                    if assignment.families.get(lab) == fam:
                        return lab
                return NO_LABEL

            moves = Counter()
            for user in set(a) | set(b):
                x, y = label_of(a, user), label_of(b, user)
                if x != y:
                    moves[(x, y)] += 1
            for (x, y), c in sorted(moves.items()):
                if c > min_count:
                    flows.append(Flow(cur, x, y, c))
    return flows


# --------------------------------------------------------------------------
# descriptive statistics


def hashtags_per_tweet_histogram(events: Iterable[Event]) -> dict[int, int]:
    hist = Counter(len(ev.hashtags) for ev in events if ev.hashtags)
    return dict(sorted(hist.items()))


@dataclass
class DatasetSummary:
    total_users: int = 0
    active_users: int = 0
    in_scope_users: int = 0
    total_events: int = 0
    total_hashtags: int = 0
    cooccurrences: int = 0
    group_sizes: dict = field(default_factory=dict)

    def rows(self):
        yield ("total_users", self.total_users)
        yield ("active_users", self.active_users)
        yield ("in_scope_users", self.in_scope_users)
        yield ("total_events", self.total_events)
        yield ("total_hashtags", self.total_hashtags)
        yield ("cooccurrences", self.cooccurrences)
        for label, n in sorted(self.group_sizes.items()):
            yield (f"group:{label}", n)


def dataset_summary(events: Sequence[Event], assignment: GroupAssignment | None = None,
                    profiles: Mapping[str, UserProfile] | None = None,
                    roster: Iterable[str] = ()) -> DatasetSummary:
    """Corpus bookkeeping.

    ``roster`` lists known accounts that may never have posted (followers);
    ``cooccurrences`` counts distinct (user, hashtag pair) incidences.
    """
    active = {ev.user_id for ev in events}
    pairs = set()
    n_tags = 0
    for ev in events:
        n_tags += len(ev.hashtags)
        if len(ev.hashtags) >= 2:
            for a, b in itertools.combinations(sorted(ev.hashtags), 2):
                pairs.add((ev.user_id, a, b))
    if profiles is None:
        in_scope = len(active)
    else:
        in_scope = sum(1 for u in active if profiles[u].in_scope)
    sizes = {}
    if assignment is not None and assignment.mode == STATIC:
        sizes = assignment.group_sizes()
    return DatasetSummary(
        total_users=len(active | set(roster)),
        active_users=len(active),
        in_scope_users=in_scope,
        total_events=len(events),
        total_hashtags=n_tags,
        cooccurrences=len(pairs),
        group_sizes=sizes,
    )
