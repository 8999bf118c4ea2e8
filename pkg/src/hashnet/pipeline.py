"""In-memory stage functions shared by the command line and the tests."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from . import attention, entropy, graph, topics
from .ingest import (DAY, STATIC, WEEK, Anchor, LocationFilter, assign_groups, build_profiles,
                     in_scope_events, load_anchors, read_events, sample_null_model)

NULL_GROUP = "null"


@dataclass
class Settings:
    threshold: float = 0.75
    baseline_days: int = 28
    step_days: int = 7
    window_days: int = 28
    support: str = "none"
    resolution: float = 1.0
    min_topic_size: int = 2
    detector_command: str | None = None
    seed: int = 0
    null_size: int = 300
    null_seed: int = 1
    normalization: str = attention.EFFECTIVE
    groups: list | None = None  # labels to analyse; None means every anchor label
    entropy_base: float = math.e

    @classmethod
    def from_dict(cls, data: dict | None) -> "Settings":
        data = dict(data or {})
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown analysis keys: {sorted(unknown)}")
        return cls(**data)

    def policy(self, kind: str) -> graph.MemoryPolicy:
        return graph.MemoryPolicy(kind, self.baseline_days * DAY, self.step_days * DAY,
                                  self.window_days * DAY)

    @property
    def step(self) -> int:
        return self.step_days * DAY

    def detector(self):
        if self.detector_command:
            return topics.ExternalCommandDetector(self.detector_command)
        return topics.LouvainDetector(self.resolution)


def to_timestamp(value) -> int:
    if isinstance(value, (int, float)):
        return int(value)
    dt = datetime.fromisoformat(str(value).replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def infer_window(events) -> tuple[int, int]:
    """Whole UTC days covering the events."""
    if not events:
        raise ValueError("cannot infer a capture window from no events")
    lo = events[0].timestamp // DAY * DAY
    hi = (events[-1].timestamp // DAY + 1) * DAY
    return lo, hi


@dataclass
class Corpus:
    window: tuple
    events: list  # every parsed event in the window
    scoped: list  # events of in-scope users
    rejects: list
    anchors: list
    profiles: dict
    n_lines: int = 0

    @property
    def n_days(self) -> int:
        return (self.window[1] - self.window[0]) // DAY

    @property
    def n_weeks(self) -> int:
        return -(-(self.window[1] - self.window[0]) // WEEK)


def load_corpus(events_path, anchors_path, locations_path=None, window=None,
                schema=None) -> Corpus:
    res = read_events(events_path, schema=schema)
    events = res.events
    if window is None:
        window = infer_window(events)
    rejects = list(res.rejects)
    kept = []
    for ev in events:
        if window[0] <= ev.timestamp < window[1]:
            kept.append(ev)
    anchors = load_anchors(anchors_path) if anchors_path else []
    loc = LocationFilter.from_file(locations_path) if locations_path else LocationFilter(None)
    profiles = build_profiles(kept, loc)
    return Corpus(tuple(window), kept, in_scope_events(kept, profiles), rejects, anchors,
                  profiles, res.n_lines)


def analysis_groups(corpus: Corpus, settings: Settings) -> dict:
    """Static supporter groups restricted to in-scope users, plus the null sample."""
    assignment = assign_groups(corpus.events, corpus.anchors, settings.threshold, STATIC)
    scoped_users = {ev.user_id for ev in corpus.scoped}
    groups = {label: sorted(set(m) & scoped_users) for label, m in assignment.groups().items()}
    if settings.groups is not None:
        groups = {g: groups[g] for g in settings.groups if g in groups}
    if settings.null_size:
        groups[NULL_GROUP] = sample_null_model(scoped_users, settings.null_size, settings.null_seed)
    return groups


def build_graphs(corpus: Corpus, settings: Settings, kind: str):
    return graph.build_snapshot_series(corpus.scoped, settings.policy(kind), corpus.window,
                                       support=settings.support)


def detect_series(snaps: Sequence, settings: Settings) -> list:
    det = settings.detector()
    return [topics.detect_topics(s, det, settings.seed, settings.min_topic_size) for s in snaps]


@dataclass
class PolicyRun:
    kind: str
    snapshots: list
    partitions: list = field(default_factory=list)


def run_policy(corpus: Corpus, settings: Settings, kind: str) -> PolicyRun:
    snaps = build_graphs(corpus, settings, kind)
    return PolicyRun(graph.policy_kind(kind), snaps, detect_series(snaps, settings))


def day_index(corpus: Corpus) -> attention.DayIndex:
    return attention.DayIndex(corpus.scoped, corpus.window[0], corpus.n_days)


def group_pairs(labels: Sequence[str], self_pairs: bool = True) -> list:
    labels = list(labels)
    out = []
    for i, a in enumerate(labels):
        for b in labels[i if self_pairs else i + 1:]:
            out.append((a, b))
    return out


def similarity(corpus: Corpus, settings: Settings, run: PolicyRun, groups: dict, pairs,
               index: attention.DayIndex | None = None) -> dict:
    index = index or day_index(corpus)
    return attention.similarity_series(index, run.partitions, groups, pairs, run.kind,
                                       settings.step, normalization=settings.normalization)


def topic_entropy(corpus: Corpus, settings: Settings, run: PolicyRun, group=None,
                  index: attention.DayIndex | None = None):
    index = index or day_index(corpus)
    return entropy.topic_entropy_series(index, run.partitions, run.kind, group,
                                        settings.entropy_base, settings.step)


def corpus_paths(directory) -> dict:
    d = Path(directory)
    return {"events": d / "events.jsonl", "anchors": d / "anchors.jsonl",
            "locations": d / "locations.txt"}
