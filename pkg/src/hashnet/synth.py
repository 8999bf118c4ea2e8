"""Synthetic event corpora with planted structure and ground truth.

Users belong to at most one planted group (a candidate's supporters or a
medium's followers) or to the background.  Every week a user posts a
Poisson number of messages; each message draws its hashtags from one source
(a hashtag pool, or a union of pools) chosen by the user's mixing row for
that week.  Scheduled events modify the mixing rows or the repost behaviour:

``synchronization``
    participants move ``intensity`` of their attention onto a shared pool.
``burst_topic``
    a new pool is born and draws ``intensity`` of everyone's attention for
    ``duration`` weeks, optionally citing an existing pool.
``topic_merge_divergence``
    two pools are co-used by everyone early on, then revived late, one per
    participant group.
``buzz``
    background users repost one anchor heavily during a single week.

Randomness comes from one ``numpy`` PCG64 generator, so a seed reproduces
the corpus byte for byte.
"""

from __future__ import annotations

import copy
import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .ingest import CANDIDATE, DAY, MEDIA, ORIGINAL, REPOST, WEEK, Anchor

SCHEDULE_KINDS = ("synchronization", "buzz", "burst_topic", "topic_merge_divergence")

IN_SCOPE_LOCATIONS = ["france", "paris", "lyon", "marseille", "lille", "toulouse"]
OUT_OF_SCOPE_LOCATIONS = ["bruxelles", "montreal", "geneve"]


class SynthConfigError(ValueError):
    pass


@dataclass
class SynthConfig:
    seed: int = 7
    n_users: int = 2000
    n_weeks: int = 12
    start: str = "2021-09-01"
    events_per_week: float = 3.0
    activity_sigma: float = 0.5
    hashtags_per_event: dict = field(default_factory=lambda: {0: 0.15, 1: 0.2, 2: 0.3, 3: 0.22, 4: 0.13})
    cross_pool_prob: float = 0.04
    repost_other_prob: float = 0.2
    out_of_scope_fraction: float = 0.1
    pools: list = field(default_factory=list)  # {name, size, birth_week?, death_week?, isolated?}
    groups: list = field(default_factory=list)  # {label, family, size, anchor?, mixing: {source: w}}
    background: dict = field(default_factory=dict)  # mixing row of ungrouped users
    extra_anchors: list = field(default_factory=list)  # {label, family, anchor?} with no planted group
    own_reposts_per_week: float = 2.0
    other_reposts: int = 2
    background_reposts_per_anchor: int = 2
    threshold: float = 0.75
    drift: dict = field(default_factory=dict)  # {amplitude, period_weeks}
    scheduled: list = field(default_factory=list)
    focus: int | None = None  # each user keeps only this many sources of their row
    common_pools: list = field(default_factory=list)  # sources every user keeps
    null_model_size: int = 300
    corrupt_fraction: float = 0.0

    @classmethod
    def from_dict(cls, data: dict) -> "SynthConfig":
        data = dict(data)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise SynthConfigError(f"unknown synth config keys: {sorted(unknown)}")
        if "hashtags_per_event" in data:
            data["hashtags_per_event"] = {int(k): float(v) for k, v in data["hashtags_per_event"].items()}
        return cls(**data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hashtags_per_event"] = {str(k): v for k, v in sorted(self.hashtags_per_event.items())}
        return d

    @property
    def start_ts(self) -> int:
        dt = datetime.fromisoformat(self.start)
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return int(dt.timestamp())

    @property
    def window(self) -> tuple:
        return (self.start_ts, self.start_ts + self.n_weeks * WEEK)

    def anchors(self) -> list:
        out = []
        for g in list(self.groups) + list(self.extra_anchors):
            out.append(Anchor(g.get("anchor", f"acct_{g['label']}"), g["family"], g["label"]))
        return out

    def validate(self) -> None:
        if self.n_users < 1 or self.n_weeks < 1:
            raise SynthConfigError("n_users and n_weeks must be positive")
        pools = {p["name"] for p in self.pools}
        if len(pools) != len(self.pools):
            raise SynthConfigError("duplicate pool names")
        for p in self.pools:
            if p["size"] < 1:
                raise SynthConfigError(f"pool {p['name']} is empty")
        planted = sum(g["size"] for g in self.groups)
        if planted > self.n_users:
            raise SynthConfigError(f"groups need {planted} users but only {self.n_users} exist")
        labels = [g["label"] for g in self.groups] + [a["label"] for a in self.extra_anchors]
        if len(set(labels)) != len(labels):
            raise SynthConfigError("duplicate group labels")
        fams = Counter(g["family"] for g in list(self.groups) + list(self.extra_anchors))
        for g in list(self.groups) + list(self.extra_anchors):
            if g["family"] not in (CANDIDATE, MEDIA):
                raise SynthConfigError(f"bad family for {g['label']}")
        for g in self.groups:
            for source in g.get("mixing", {}):
                for name in _source_pools(source):
                    if name not in pools:
                        raise SynthConfigError(f"group {g['label']} mixes unknown pool {name}")
        total = sum(self.hashtags_per_event.values())
        if total <= 0 or any(v < 0 for v in self.hashtags_per_event.values()):
            raise SynthConfigError("hashtags_per_event must be a nonnegative distribution")
        bg = self.background_reposts_per_anchor
        for ev in self.scheduled:
            kind = ev.get("kind")
            if kind not in SCHEDULE_KINDS:
                raise SynthConfigError(f"unknown scheduled event kind {kind!r}")
            s, d = ev.get("start_week", 0), ev.get("duration", 1)
            if s < 0 or s + d > self.n_weeks:
                raise SynthConfigError(f"{kind} window weeks [{s}, {s + d}) outside capture")
            if kind == "buzz":
                fam = [g for g in list(self.groups) + list(self.extra_anchors)
                       if g["label"] == ev["anchor"]]
                if not fam:
                    raise SynthConfigError(f"buzz anchor {ev['anchor']} unknown")
                n_anchor = fams[fam[0]["family"]]
                r = ev.get("reposts_per_user", 6)
                # buzzed background users must stay below the static threshold
                if n_anchor < 2 or (bg + r) >= self.threshold * (n_anchor * bg + r):
                    raise SynthConfigError("buzz would relabel background users statically")
        if len(fams) and any(n < 2 for n in fams.values()) and bg:
            raise SynthConfigError("each anchor family needs two anchors for balanced background reposts")


def _source_pools(source: str) -> list:
    return source.split("+")


def _zipf_weights(n: int, s: float = 0.8) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1) ** s
    return w / w.sum()


@dataclass
class Corpus:
    records: list  # JSON-ready event records, time-sorted
    ground_truth: dict
    anchors: list

    def lines(self) -> list:
        return [json.dumps(r, sort_keys=True, separators=(",", ":")) for r in self.records]


class _Generator:
    def __init__(self, cfg: SynthConfig):
        cfg.validate()
        self.cfg = cfg
        self.rng = np.random.Generator(np.random.PCG64(cfg.seed))
        self.start = cfg.start_ts
        self.vocab = {p["name"]: [f"{p['name']}_{i:02d}" for i in range(p["size"])] for p in cfg.pools}
        self.vocab_w = {name: _zipf_weights(len(v)) for name, v in self.vocab.items()}
        self.pool_info = {p["name"]: p for p in cfg.pools}
        self.users = [f"u{i:05d}" for i in range(cfg.n_users)]
        self.records = []
        self.event_pool = []
        self._sources: dict = {}
        self._rows: dict = {}
        self._sizes = sorted(cfg.hashtags_per_event)
        self._size_cum = np.cumsum([cfg.hashtags_per_event[k] for k in self._sizes])

    # -- population -------------------------------------------------------
    def assign_users(self):
        cfg, rng = self.cfg, self.rng
        order = rng.permutation(cfg.n_users)
        self.group_of = {}
        pos = 0
        for g in cfg.groups:
            for idx in order[pos:pos + g["size"]]:
                self.group_of[self.users[idx]] = g["label"]
            pos += g["size"]
        self.groups = {g["label"]: g for g in cfg.groups}
        self.location = {}
        for u in self.users:
            if rng.random() < cfg.out_of_scope_fraction:
                self.location[u] = OUT_OF_SCOPE_LOCATIONS[int(rng.integers(len(OUT_OF_SCOPE_LOCATIONS)))]
            else:
                self.location[u] = IN_SCOPE_LOCATIONS[int(rng.integers(len(IN_SCOPE_LOCATIONS)))]
        act = rng.lognormal(0.0, cfg.activity_sigma, cfg.n_users)
        self.activity = dict(zip(self.users, act / act.mean()))
        self.background_users = [u for u in self.users if u not in self.group_of]
        rows = {}
        labels = sorted(self.groups) + ["_background"]
        for label in labels:
            row = cfg.background if label == "_background" else self.groups[label].get("mixing", {})
            rows[label] = dict(row)
        self.base_rows = rows
        self.focus_of = {}
        for u in self.users:
            row = rows[self.group_of.get(u, "_background")]
            if not cfg.focus:
                self.focus_of[u] = None
                continue
            srcs = sorted(s for s in row if s not in cfg.common_pools and row[s] > 0)
            w = np.array([row[s] for s in srcs], dtype=float)
            k = min(cfg.focus, len(srcs))
            chosen = rng.choice(len(srcs), size=k, replace=False, p=w / w.sum()) if k else []
            self.focus_of[u] = tuple(sorted([srcs[i] for i in chosen] + list(cfg.common_pools)))
        self.phase = {}
        for label in labels:
            for src in sorted(self.all_sources()):
                self.phase[(label, src)] = float(rng.uniform(0, 2 * math.pi))

    def all_sources(self):
        out = set()
        for row in self.base_rows.values():
            out.update(row)
        return out

    def alive(self, name: str, week: int) -> bool:
        p = self.pool_info[name]
        death = p.get("death_week")
        return p.get("birth_week", 0) <= week and (death is None or week < death)

    # -- mixing -----------------------------------------------------------
    def mixing_row(self, label: str, week: int, focus=None) -> dict:
        cfg = self.cfg
        row = dict(self.base_rows[label])
        if focus is not None:
            row = {s: w for s, w in row.items() if s in focus}
        amp = cfg.drift.get("amplitude", 0.0)
        if amp:
            period = cfg.drift.get("period_weeks", 6)
            for src in row:
                row[src] *= 1.0 + amp * math.sin(2 * math.pi * week / period + self.phase[(label, src)])
        row = {s: w for s, w in row.items() if all(self.alive(p, week) for p in _source_pools(s))}
        for ev in cfg.scheduled:
            s0, d = ev.get("start_week", 0), ev.get("duration", 1)
            kind = ev["kind"]
            parts = ev.get("participants", [])
            if kind == "topic_merge_divergence":
                bridge_weeks = ev.get("bridge_weeks", 4)
                if week < bridge_weeks:
                    row = _blend(row, "+".join(ev["pools"]), ev.get("bridge_intensity", 0.25))
                elif label in parts:
                    own = ev["pools"][parts.index(label)]
                    level = ev["intensity"] if s0 <= week < s0 + d else ev.get("quiet_intensity", 0.05)
                    row = _blend(row, own, level)
                continue
            if not s0 <= week < s0 + d:
                continue
            if kind == "synchronization" and label in parts:
                row = _blend(row, ev["pool"], ev["intensity"])
            elif kind == "burst_topic" and (not parts or parts == "all" or label in parts):
                row = _blend(row, ev["pool"], ev["intensity"])
        return row

    # -- posting ------------------------------------------------------------
    def _draw(self, cum: np.ndarray) -> int:
        return min(int(np.searchsorted(cum, self.rng.random() * cum[-1], side="right")), len(cum) - 1)

    def _source_table(self, source: str):
        tab = self._sources.get(source)
        if tab is None:
            names = _source_pools(source)
            vocab = [h for p in names for h in self.vocab[p]]
            cum = np.cumsum(np.concatenate([self.vocab_w[p] for p in names]))
            isolated = any(self.pool_info[p].get("isolated") for p in names)
            tab = self._sources[source] = (names, vocab, cum, isolated)
        return tab

    def draw_hashtags(self, source: str, week: int, extra_pool: str | None = None) -> list:
        rng, cfg = self.rng, self.cfg
        n = self._sizes[self._draw(self._size_cum)]
        names, vocab, cum, isolated = self._source_table(source)
        n = min(n, len(vocab))
        picked: list = []
        while len(picked) < n:  # weighted draws without replacement
            i = self._draw(cum)
            if i not in picked:
                picked.append(i)
        tags = [vocab[i] for i in picked]
        if cfg.cross_pool_prob and not isolated:
            others = [p for p in sorted(self.vocab) if p not in names and self.alive(p, week)
                      and not self.pool_info[p].get("isolated")]
            for i in range(len(tags)):
                if others and rng.random() < cfg.cross_pool_prob:
                    p = others[int(rng.integers(len(others)))]
                    tags[i] = self.vocab[p][self._draw(np.cumsum(self.vocab_w[p]))]
        if extra_pool and tags:
            tags.append(self.vocab[extra_pool][self._draw(np.cumsum(self.vocab_w[extra_pool]))])
        return sorted(set(tags))

    def row_for(self, label: str, week: int, focus=None):
        key = (label, week, focus)
        if key not in self._rows:
            row = self.mixing_row(label, week, focus)
            srcs = sorted(s for s in row if row[s] > 0)
            self._rows[key] = (srcs, np.cumsum([row[s] for s in srcs]) if srcs else None)
        return self._rows[key]

    def pick_source(self, user: str, week: int):
        label = self.group_of.get(user, "_background")
        srcs, cum = self.row_for(label, week, self.focus_of[user])
        if not srcs:
            return None
        return srcs[self._draw(cum)]

    def emit(self, user, week, kind, rt_of, source=None):
        rng = self.rng
        ts = self.start + week * WEEK + int(rng.integers(WEEK))
        tags = self.draw_hashtags(source, week, self._attach(source, week)) if source else []
        rec = {"ts": ts, "user": user, "kind": kind, "tags": tags, "loc": self.location[user]}
        if rt_of is not None:
            rec["rt_of"] = rt_of
        self.records.append(rec)
        self.event_pool.append(source)

    def _attach(self, source, week):
        for ev in self.cfg.scheduled:
            if ev["kind"] == "burst_topic" and source == ev["pool"] and ev.get("attach_pool"):
                if self.rng.random() < ev.get("attach_prob", 0.0):
                    return ev["attach_pool"]
        return None

    def run(self) -> Corpus:
        cfg, rng = self.cfg, self.rng
        self.assign_users()
        anchors = cfg.anchors()
        acct = {a.label: a.account_id for a in anchors}
        family_anchors = {f: [a.label for a in anchors if a.family == f] for f in (CANDIDATE, MEDIA)}
        repost_counts = {u: Counter() for u in self.users}

        # content posts
        for week in range(cfg.n_weeks):
            for u in self.users:
                n = int(rng.poisson(cfg.events_per_week * self.activity[u]))
                for _ in range(n):
                    src = self.pick_source(u, week)
                    if rng.random() < cfg.repost_other_prob:
                        other = self.users[int(rng.integers(len(self.users)))]
                        self.emit(u, week, REPOST, other, src)
                    else:
                        self.emit(u, week, ORIGINAL, None, src)

        def repost(u, label, week):
            src = self.pick_source(u, week)
            self.emit(u, week, REPOST, acct[label], src)
            repost_counts[u][label] += 1

        # supporter reposts: own anchor dominates its family
        for u in self.users:
            label = self.group_of.get(u)
            if label is None:
                continue
            fam = self.groups[label]["family"]
            own = [int(rng.poisson(cfg.own_reposts_per_week)) for _ in range(cfg.n_weeks)]
            others = [a for a in family_anchors[fam] if a != label]
            n_other = cfg.other_reposts if others else 0
            while sum(own) < 4 * n_other or sum(own) == 0:
                own[int(rng.integers(cfg.n_weeks))] += 1
            for week, c in enumerate(own):
                for _ in range(c):
                    repost(u, label, week)
            for _ in range(n_other):
                repost(u, others[int(rng.integers(len(others)))], int(rng.integers(cfg.n_weeks)))
        # balanced background reposts in every family the user has no planted label in
        for u in self.users:
            label = self.group_of.get(u)
            own_fam = self.groups[label]["family"] if label else None
            for fam, labels in family_anchors.items():
                if fam == own_fam or len(labels) < 2:
                    continue
                for a in labels:
                    for _ in range(cfg.background_reposts_per_anchor):
                        repost(u, a, int(rng.integers(cfg.n_weeks)))
        # buzz: background users flood one anchor for one week
        buzz_truth = []
        for ev in cfg.scheduled:
            if ev["kind"] != "buzz":
                continue
            pool = sorted(self.background_users)
            k = min(int(ev.get("n_users", 100)), len(pool))
            chosen = sorted(pool[i] for i in rng.choice(len(pool), size=k, replace=False))
            for u in chosen:
                for _ in range(int(ev.get("reposts_per_user", 6))):
                    repost(u, ev["anchor"], ev["start_week"])
            buzz_truth.append({"anchor": ev["anchor"], "week": ev["start_week"], "users": chosen})

        order = sorted(range(len(self.records)),
                       key=lambda i: (self.records[i]["ts"], self.records[i]["user"], i))
        records, pools_of = [], {}
        for n, i in enumerate(order):
            rec = self.records[i]
            rec["id"] = f"e{n:07d}"
            records.append(rec)
            pools_of[rec["id"]] = self.event_pool[i]

        hist = Counter(len(r["tags"]) for r in records if r["tags"])
        truth = {
            "config": cfg.to_dict(),
            "window": list(cfg.window),
            "anchors": [asdict(a) for a in anchors],
            "pools": self.vocab,
            "schedule": copy.deepcopy(cfg.scheduled),
            "users": {u: {"group": self.group_of.get(u), "in_scope": self.location[u] in IN_SCOPE_LOCATIONS,
                          "location": self.location[u]} for u in self.users},
            "intended_labels": {u: [self.group_of[u]] for u in sorted(self.group_of)},
            "group_sizes": {g["label"]: g["size"] for g in cfg.groups},
            "in_scope_locations": IN_SCOPE_LOCATIONS,
            "event_source": pools_of,
            "hashtags_per_event": {str(k): v for k, v in sorted(hist.items())},
            "n_events": len(records),
            "n_hashtag_occurrences": sum(len(r["tags"]) for r in records),
            "active_users": len({r["user"] for r in records}),
            "repost_counts": {u: dict(sorted(c.items())) for u, c in sorted(repost_counts.items()) if c},
            "buzz": buzz_truth,
            "corrupted_lines": [],
        }
        return Corpus(records, truth, anchors)


def _blend(row: dict, source: str, intensity: float) -> dict:
    """Move ``intensity`` of the row's mass onto ``source``."""
    total = sum(max(w, 0.0) for w in row.values())
    if total <= 0:
        return {source: 1.0}
    out = {s: (1 - intensity) * max(w, 0.0) / total for s, w in row.items()}
    out[source] = out.get(source, 0.0) + intensity
    return out


_CORRUPTIONS = (
    lambda line: line[: max(1, len(line) // 2)],  # truncated JSON
    lambda line: json.dumps({k: v for k, v in json.loads(line).items() if k != "user"}),
    lambda line: json.dumps({**json.loads(line), "ts": "not-a-time"}),
)


def generate(config: SynthConfig) -> Corpus:
    """Build a corpus; lines listed in ``ground_truth['corrupted_lines']`` are spoiled."""
    corpus = _Generator(config).run()
    if config.corrupt_fraction:
        lines = corpus.lines()
        k = int(round(config.corrupt_fraction * len(lines)))
        rng = np.random.Generator(np.random.PCG64(config.seed + 1))
        bad = sorted(int(i) for i in rng.choice(len(lines), size=k, replace=False))
        corpus.ground_truth["corrupted_lines"] = [i + 1 for i in bad]
        corpus.ground_truth["corrupted_ids"] = [corpus.records[i]["id"] for i in bad]
        corpus._corrupt = {i: _CORRUPTIONS[j % len(_CORRUPTIONS)](lines[i]) for j, i in enumerate(bad)}
    return corpus


def write_corpus(corpus: Corpus, out_dir) -> dict:
    """Write ``events.jsonl``, ``anchors.jsonl`` and ``ground_truth.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = corpus.lines()
    for i, text in getattr(corpus, "_corrupt", {}).items():
        lines[i] = text
    (out / "events.jsonl").write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    (out / "anchors.jsonl").write_text(
        "".join(json.dumps(asdict(a), sort_keys=True) + "\n" for a in corpus.anchors), encoding="utf-8")
    (out / "ground_truth.json").write_text(json.dumps(corpus.ground_truth, sort_keys=True, indent=1),
                                           encoding="utf-8")
    (out / "locations.txt").write_text("\n".join(IN_SCOPE_LOCATIONS) + "\n", encoding="utf-8")
    return {"events": out / "events.jsonl", "anchors": out / "anchors.jsonl",
            "ground_truth": out / "ground_truth.json", "locations": out / "locations.txt"}


# ---------------------------------------------------------------------------
# presets


def _pools(n: int, size: int, prefix: str = "p") -> list:
    return [{"name": f"{prefix}{i}", "size": size} for i in range(n)]


def _row(favs: dict, n_pools: int, floor: float = 0.25, extra: dict | None = None) -> dict:
    row = {f"p{i}": floor for i in range(n_pools)}
    row.update(favs)
    row.update(extra or {})
    return row


def default_scenario(seed: int = 7) -> SynthConfig:
    """Six groups, a two-week A/B synchronisation and a buzz on a small candidate."""
    n = 10
    return SynthConfig(
        seed=seed,
        pools=_pools(n, 14) + [{"name": "sync", "size": 12}],
        groups=[
            {"label": "A", "family": CANDIDATE, "size": 260, "mixing": _row({"p0": 4, "p1": 2}, n, extra={"sync": 0.3})},
            {"label": "B", "family": CANDIDATE, "size": 260, "mixing": _row({"p3": 4, "p4": 2}, n, extra={"sync": 0.3})},
            {"label": "Z", "family": CANDIDATE, "size": 200, "mixing": _row({"p5": 4, "p6": 2}, n, extra={"sync": 0.3})},
            {"label": "P", "family": CANDIDATE, "size": 60, "mixing": _row({"p7": 3}, n, extra={"sync": 0.3})},
            {"label": "C", "family": MEDIA, "size": 200, "mixing": _row({"p5": 2, "p8": 3}, n, extra={"sync": 0.3})},
            {"label": "M", "family": MEDIA, "size": 160, "mixing": _row({"p1": 2, "p9": 3}, n, extra={"sync": 0.3})},
        ],
        background=_row({}, n, floor=1.0, extra={"sync": 0.3}),
        scheduled=[
            {"kind": "synchronization", "participants": ["A", "B"], "pool": "sync",
             "start_week": 7, "duration": 2, "intensity": 0.45},
            {"kind": "buzz", "anchor": "P", "n_users": 120, "reposts_per_user": 6, "start_week": 9,
             "duration": 1},
        ],
    )


def burst_scenario(seed: int = 11) -> SynthConfig:
    """A two-week burst of a new hashtag pool that grabs most of the attention.

    Each user follows one of many niche pools plus a common pool that only
    appears in week 6.  Burst posts often cite the common pool, so the burst
    joins it in the long aggregated graph but stands apart in a short window.
    """
    n = 40
    flat = _row({}, n, floor=1.0, extra={"gen": 0.5})
    return SynthConfig(
        seed=seed,
        n_weeks=20,
        cross_pool_prob=0.02,
        pools=_pools(n, 10) + [{"name": "gen", "size": 12, "birth_week": 6},
                               {"name": "war", "size": 10, "birth_week": 13, "death_week": 15}],
        groups=[
            {"label": "A", "family": CANDIDATE, "size": 200, "mixing": flat},
            {"label": "B", "family": CANDIDATE, "size": 200, "mixing": flat},
            {"label": "C", "family": MEDIA, "size": 150, "mixing": flat},
            {"label": "M", "family": MEDIA, "size": 150, "mixing": flat},
        ],
        background=flat,
        focus=1,
        common_pools=["gen"],
        scheduled=[
            {"kind": "burst_topic", "participants": "all", "pool": "war", "start_week": 13,
             "duration": 2, "intensity": 0.7, "attach_pool": "gen", "attach_prob": 0.7},
        ],
    )


def divergence_scenario(seed: int = 13) -> SynthConfig:
    """Two pools bridged early and revived late by Z and C separately."""
    n = 8
    pools = _pools(n, 14) + [{"name": "q1", "size": 10, "isolated": True},
                             {"name": "q2", "size": 10, "isolated": True}]
    return SynthConfig(
        seed=seed,
        pools=pools,
        groups=[
            {"label": "A", "family": CANDIDATE, "size": 280, "mixing": _row({"p0": 4, "p1": 2}, n)},
            {"label": "B", "family": CANDIDATE, "size": 280, "mixing": _row({"p2": 4, "p3": 2}, n)},
            {"label": "Z", "family": CANDIDATE, "size": 100, "mixing": _row({"p4": 4, "p1": 1}, n)},
            {"label": "C", "family": MEDIA, "size": 100, "mixing": _row({"p5": 3, "p4": 1}, n)},
            {"label": "M", "family": MEDIA, "size": 220, "mixing": _row({"p6": 3, "p7": 2}, n)},
        ],
        background=_row({}, n, floor=1.0),
        drift={"amplitude": 1.0, "period_weeks": 5},
        scheduled=[
            {"kind": "topic_merge_divergence", "pools": ["q1", "q2"], "participants": ["Z", "C"],
             "bridge_weeks": 4, "bridge_intensity": 0.25, "quiet_intensity": 0.06,
             "start_week": 8, "duration": 2, "intensity": 0.7},
        ],
    )


SCENARIOS = {
    "default": default_scenario,
    "burst": burst_scenario,
    "divergence": divergence_scenario,
}


def scenario(name: str, seed: int | None = None) -> SynthConfig:
    try:
        factory = SCENARIOS[name]
    except KeyError:
        raise SynthConfigError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None
    return factory() if seed is None else factory(seed)
