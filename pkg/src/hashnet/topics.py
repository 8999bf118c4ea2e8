"""Topic extraction: hashtag communities detected in each snapshot.

The built-in detector is a deterministic weighted Louvain.  Any other
algorithm (OSLOM for overlapping topics, say) can be plugged in through
:class:`ExternalCommandDetector`, which talks to a subprocess through the
snapshot and partition file formats.
"""

from __future__ import annotations

import random
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from .graph import CoocSnapshot, export_snapshot

NOISE = "noise"
PARTITION_HEADER = "# hashnet-partition"


class DetectorError(RuntimeError):
    pass


@dataclass
class TopicPartition:
    week_index: int
    topics: list  # list of frozensets of hashtags; index = topic id
    noise: frozenset = frozenset()
    detector_tag: str = ""
    time_range: tuple = (0, 0)
    policy: str = ""
    membership: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.topics = [frozenset(t) for t in self.topics]
        self.noise = frozenset(self.noise)
        mem: dict = {}
        for i, t in enumerate(self.topics):
            if not t:
                raise ValueError(f"topic {i} is empty")
            for h in t:
                mem.setdefault(h, set()).add(i)
        self.membership = {h: frozenset(ids) for h, ids in mem.items()}

    @property
    def n_topics(self) -> int:
        return len(self.topics)

    def topic_map(self) -> dict:
        """hashtag -> sorted tuple of topic ids (noise hashtags absent)."""
        return {h: tuple(sorted(ids)) for h, ids in self.membership.items()}


class TopicDetector(Protocol):
    def tag(self, seed: int) -> str: ...

    def communities(self, snapshot: CoocSnapshot, seed: int) -> list: ...


# --------------------------------------------------------------------------
# Louvain


def modularity(communities: Iterable[Iterable], edges: dict, resolution: float = 1.0) -> float:
    """Weighted Newman modularity of a node partition."""
    deg: dict = {}
    m = 0.0
    for (a, b), w in edges.items():
        deg[a] = deg.get(a, 0.0) + w
        deg[b] = deg.get(b, 0.0) + w
        m += w
    if m == 0:
        return 0.0
    which = {}
    for i, c in enumerate(communities):
        for n in c:
            which[n] = i
    inner: dict = {}
    tot: dict = {}
    for (a, b), w in edges.items():
        if which[a] == which[b]:
            inner[which[a]] = inner.get(which[a], 0.0) + w
    for n, d in deg.items():
        tot[which[n]] = tot.get(which[n], 0.0) + d
    return sum(inner.get(c, 0.0) / m - resolution * (tot[c] / (2 * m)) ** 2 for c in tot)


def _one_level(nbrs, self_w, k, m2, resolution, order):
    n = len(nbrs)
    comm = list(range(n))
    tot = list(k)
    moved_any = False
    while True:
        moved = False
        for i in order:
            ci = comm[i]
            wc: dict = {}
            for j, w in nbrs[i].items():
                cj = comm[j]
                wc[cj] = wc.get(cj, 0.0) + w
            ki = k[i]
            tot[ci] -= ki
            best = ci
            best_gain = wc.get(ci, 0.0) - resolution * tot[ci] * ki / m2
            for c in sorted(wc):
                gain = wc[c] - resolution * tot[c] * ki / m2
                if gain > best_gain + 1e-12 * (abs(best_gain) + ki):
                    best, best_gain = c, gain
            tot[best] += ki
            if best != ci:
                comm[i] = best
                moved = True
                moved_any = True
        if not moved:
            break
    return comm, moved_any


def louvain(nodes: Sequence, edges: dict, resolution: float = 1.0, seed: int = 0) -> list[list]:
    """Weighted Louvain with deterministic visiting order.

    Nodes are visited in the order given (callers pass them sorted); a
    nonzero ``seed`` shuffles that order reproducibly.  Ties between candidate
    communities go to the current one, then to the lowest community index.
    Returns communities as lists of nodes, ordered by their first node.
    """
    index = {node: i for i, node in enumerate(nodes)}
    n = len(nodes)
    nbrs = [dict() for _ in range(n)]
    self_w = [0.0] * n
    for (a, b), w in edges.items():
        i, j = index[a], index[b]
        if i == j:
            self_w[i] += w
            continue
        nbrs[i][j] = nbrs[i].get(j, 0.0) + w
        nbrs[j][i] = nbrs[j].get(i, 0.0) + w
    members = [[i] for i in range(n)]
    rng = random.Random(seed) if seed else None
    while True:
        k = [sum(nbrs[i].values()) + 2 * self_w[i] for i in range(len(nbrs))]
        m2 = sum(k)
        if m2 == 0:
            break
        order = list(range(len(nbrs)))
        if rng is not None:
            rng.shuffle(order)
        comm, moved = _one_level(nbrs, self_w, k, m2, resolution, order)
        if not moved:
            break
        relabel: dict = {}
        for c in comm:
            if c not in relabel:
                relabel[c] = len(relabel)
        new_members = [[] for _ in relabel]
        new_nbrs = [dict() for _ in relabel]
        new_self = [0.0] * len(relabel)
        for i, c in enumerate(comm):
            ci = relabel[c]
            new_members[ci].extend(members[i])
            new_self[ci] += self_w[i]
            for j, w in nbrs[i].items():
                cj = relabel[comm[j]]
                if ci == cj:
                    if i < j:
                        new_self[ci] += w
                else:
                    new_nbrs[ci][cj] = new_nbrs[ci].get(cj, 0.0) + w
        members, nbrs, self_w = new_members, new_nbrs, new_self
    groups = [sorted(m) for m in members]
    groups.sort(key=lambda g: g[0])
    return [[nodes[i] for i in g] for g in groups]


class LouvainDetector:
    """Default detector: disjoint topics from weighted modularity, resolution 1."""

    version = "1"

    def __init__(self, resolution: float = 1.0):
        self.resolution = resolution

    def tag(self, seed: int) -> str:
        return f"louvain-v{self.version}:resolution={self.resolution}:seed={seed}"

    def communities(self, snapshot: CoocSnapshot, seed: int) -> list:
        return louvain(sorted(snapshot.nodes), snapshot.edges, self.resolution, seed)


class ExternalCommandDetector:
    """Run an external program as ``command <snapshot file> <partition file>``.

    ``command`` is an argv list or a shell-style string.  The placeholders
    ``{snapshot}`` and ``{partition}`` may appear in it; if neither does, the two
    paths are appended.  ``{seed}`` is substituted too.
    """

    def __init__(self, command, name: str | None = None, timeout: float | None = 600):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.name = name or Path(self.argv[0]).name
        self.timeout = timeout

    def tag(self, seed: int) -> str:
        return f"external:{self.name}:seed={seed}"

    def communities(self, snapshot: CoocSnapshot, seed: int) -> list:
        with tempfile.TemporaryDirectory(prefix="hashnet-") as tmp:
            snap_path = Path(tmp) / "snapshot.tsv"
            part_path = Path(tmp) / "partition.tsv"
            export_snapshot(snapshot, snap_path)
            subs = {"snapshot": str(snap_path), "partition": str(part_path), "seed": str(seed)}
            argv = [a.format(**subs) for a in self.argv]
            if not any("{snapshot}" in a or "{partition}" in a for a in self.argv):
                argv += [str(snap_path), str(part_path)]
            try:
                proc = subprocess.run(argv, capture_output=True, text=True, timeout=self.timeout)
            except (OSError, subprocess.TimeoutExpired) as exc:
                raise DetectorError(f"{self.name}: could not run detector: {exc}") from None
            if proc.returncode != 0:
                raise DetectorError(
                    f"{self.name}: exit status {proc.returncode}: {proc.stderr.strip()[:500]}"
                )
            if not part_path.exists():
                raise DetectorError(f"{self.name}: no partition file written")
            topics, _noise, _meta = parse_partition_text(part_path.read_text(encoding="utf-8"),
                                                         source=self.name)
            return topics


def _finalize(raw: Sequence, snapshot: CoocSnapshot, min_size: int):
    kept, seen = [], set()
    for t in raw:
        t = frozenset(t)
        unknown = t - snapshot.nodes
        if unknown:
            raise DetectorError(f"detector returned unknown hashtags: {sorted(unknown)[:5]}")
        if len(t) >= min_size and t not in seen:
            kept.append(t)
            seen.add(t)
    covered = set().union(*kept) if kept else set()
    noise = frozenset(snapshot.nodes - covered)
    kept.sort(key=lambda t: sorted(t))
    return kept, noise


def detect_topics(snapshot: CoocSnapshot, detector=None, seed: int = 0,
                  min_size: int = 2, policy: str = "") -> TopicPartition:
    """Topics of one snapshot.

    Communities smaller than ``min_size`` and hashtags left unassigned go to
    the noise pseudo-topic.  An empty snapshot yields an empty partition.
    """
    detector = detector or LouvainDetector()
    raw = detector.communities(snapshot, seed) if snapshot.nodes else []
    topics, noise = _finalize(raw, snapshot, min_size)
    return TopicPartition(snapshot.week_index, topics, noise, detector.tag(seed),
                          tuple(snapshot.time_range), policy or snapshot.policy.kind)


def topic_count_series(partitions: Sequence[TopicPartition]) -> list[tuple]:
    return [(p.week_index, p.n_topics) for p in partitions]


# --------------------------------------------------------------------------
# partition file


def render_partition(part: TopicPartition) -> str:
    head = {"week_index": part.week_index, "start": part.time_range[0],
            "end": part.time_range[1], "policy": part.policy, "detector": part.detector_tag}
    lines = [PARTITION_HEADER + "\t" + "\t".join(f"{k}={v}" for k, v in head.items())]
    for i, t in enumerate(part.topics):
        lines.append(f"{i}\t{','.join(sorted(t))}")
    if part.noise:
        lines.append(f"{NOISE}\t{','.join(sorted(part.noise))}")
    return "\n".join(lines) + "\n"


def write_partition(part: TopicPartition, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_partition(part), encoding="utf-8")
    return path


def parse_partition_text(text: str, source: str = "<partition>"):
    topics, noise, meta = [], set(), {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            if line.startswith(PARTITION_HEADER):
                for item in line[len(PARTITION_HEADER):].split("\t"):
                    key, sep, value = item.partition("=")
                    if sep:
                        meta[key] = value
            continue
        tid, sep, rest = line.partition("\t")
        if not sep or not tid:
            raise DetectorError(f"{source}:{line_no}: expected 'topic_id<TAB>tags'")
        tags = [t for t in rest.split(",") if t]
        if not tags:
            raise DetectorError(f"{source}:{line_no}: topic {tid!r} has no hashtags")
        if tid == NOISE:
            noise.update(tags)
        else:
            topics.append(frozenset(tags))
    return topics, frozenset(noise), meta


def read_partition(path) -> TopicPartition:
    topics, noise, meta = parse_partition_text(Path(path).read_text(encoding="utf-8"),
                                               source=str(path))
    try:
        week = int(meta["week_index"])
        rng = (int(meta["start"]), int(meta["end"]))
    except (KeyError, ValueError):
        raise DetectorError(f"{path}: missing or bad partition header") from None
    return TopicPartition(week, topics, noise, meta.get("detector", ""), rng,
                          meta.get("policy", ""))
