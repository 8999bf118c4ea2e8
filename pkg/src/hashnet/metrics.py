"""Structural metrics of one snapshot and persistence across a snapshot series."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Sequence

from .graph import CoocSnapshot


@dataclass
class SnapshotMetrics:
    n_nodes: int
    n_edges: int
    density: float | None
    avg_degree: float | None
    clustering_raw: float | None
    clustering_standard: float | None
    assortativity: float | None
    n_components: int
    largest_component_fraction: float | None

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def row(self) -> list:
        return [getattr(self, c) for c in self.columns()]


def triangles_per_node(adj: dict) -> dict:
    """Number of triangles through each node, by neighbour-set intersection."""
    order = {n: i for i, n in enumerate(sorted(adj))}
    tri = dict.fromkeys(adj, 0)
    for u in adj:
        iu = order[u]
        higher = {v for v in adj[u] if order[v] > iu}
        for v in higher:
            common = higher & adj[v]
            for w in common:
                if order[w] > order[v]:
                    tri[u] += 1
                    tri[v] += 1
                    tri[w] += 1
    return tri


def connected_components(adj: dict) -> list[set]:
    seen, comps = set(), []
    for root in sorted(adj):
        if root in seen:
            continue
        comp, stack = {root}, [root]
        seen.add(root)
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    comp.add(v)
                    stack.append(v)
        comps.append(comp)
    return comps


def degree_assortativity(adj: dict, edges) -> float | None:
    """Newman's degree correlation over edge ends; ``None`` if degrees do not vary.

    Sums are kept as integers so the only rounding is the final division.
    """
    m = s_prod = s_sum = s_sq = 0
    for a, b in edges:
        j, k = len(adj[a]), len(adj[b])
        m += 1
        s_prod += j * k
        s_sum += j + k
        s_sq += j * j + k * k
    if m == 0:
        return None
    num = 4 * m * s_prod - s_sum * s_sum
    den = 2 * m * s_sq - s_sum * s_sum
    if den == 0:
        return None
    return num / den


def compute_metrics(snapshot: CoocSnapshot) -> SnapshotMetrics:
    """Metrics on the unweighted backbone of ``snapshot``.

    ``clustering_raw`` is the mean over nodes of the raw closed-walk count
    sum_{j != k} a_ij a_jk a_ki (twice the triangles at i, no normalisation).
    ``clustering_standard`` is mean local clustering with degree < 2 nodes
    contributing zero.
    """
    adj = snapshot.adjacency()
    n, e = len(adj), len(snapshot.edges)
    if n == 0:
        return SnapshotMetrics(0, 0, None, None, None, None, None, 0, None)
    tri = triangles_per_node(adj)
    local = []
    for u in sorted(adj):
        k = len(adj[u])
        local.append(2.0 * tri[u] / (k * (k - 1)) if k >= 2 else 0.0)
    comps = connected_components(adj)
    return SnapshotMetrics(
        n_nodes=n,
        n_edges=e,
        density=2.0 * e / (n * (n - 1)) if n > 1 else None,
        avg_degree=2.0 * e / n,
        clustering_raw=sum(2 * t for t in tri.values()) / n,
        clustering_standard=math.fsum(local) / n,  # order independent
        assortativity=degree_assortativity(adj, snapshot.edges),
        n_components=len(comps),
        largest_component_fraction=max(len(c) for c in comps) / n,
    )


@dataclass
class PersistenceRates:
    weeks: list
    node_retention: list
    edge_retention: list
    node_renewal: list
    edge_renewal: list

    def rows(self):
        return zip(self.weeks, self.node_retention, self.edge_retention,
                   self.node_renewal, self.edge_renewal)


def _ratio(num: int, den: int):
    return num / den if den else None


def compute_persistence(series: Sequence[CoocSnapshot]) -> PersistenceRates:
    if len(series) < 2:
        raise ValueError("persistence needs at least two snapshots")
    v0, e0 = series[0].nodes, set(series[0].edges)
    out = PersistenceRates([], [], [], [], [])
    prev_v, prev_e = None, None
    for snap in series:
        v, e = snap.nodes, set(snap.edges)
        out.weeks.append(snap.week_index)
        if prev_v is None:
            out.node_retention.append(1.0 if v0 else None)
            out.edge_retention.append(1.0 if e0 else None)
            out.node_renewal.append(None)
            out.edge_renewal.append(None)
        else:
            out.node_retention.append(_ratio(len(v0 & v), len(v0)))
            out.edge_retention.append(_ratio(len(e0 & e), len(e0)))
            out.node_renewal.append(_ratio(len(prev_v & v), len(v)))
            out.edge_renewal.append(_ratio(len(prev_e & e), len(e)))
        prev_v, prev_e = v, e
    return out
