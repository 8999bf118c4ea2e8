import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hashnet.graph import STATIC, CoocSnapshot, MemoryPolicy
from hashnet.metrics import compute_metrics, compute_persistence

POL = MemoryPolicy(STATIC)


def snap(nodes, edges, k=0):
    e = {}
    for a, b in edges:
        a, b = min(a, b), max(a, b)
        e[(a, b)] = e.get((a, b), 0) + 1
    return CoocSnapshot(k, (0, 1), frozenset(nodes), dict(sorted(e.items())), POL)


def oracle(nodes, edges):
    """Dense adjacency-matrix definitions, evaluated literally."""
    nodes = sorted(nodes)
    idx = {n: i for i, n in enumerate(nodes)}
    n = len(nodes)
    A = np.zeros((n, n), dtype=np.int64)
    for a, b in edges:
        A[idx[a], idx[b]] = A[idx[b], idx[a]] = 1
    deg = A.sum(1)
    closed = np.zeros(n, dtype=np.int64)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if j != k:
                    closed[i] += A[i, j] * A[j, k] * A[k, i]
    local = [closed[i] / (deg[i] * (deg[i] - 1)) if deg[i] >= 2 else 0.0 for i in range(n)]
    ends = []
    for i, j in zip(*np.nonzero(np.triu(A))):
        ends.append((deg[i], deg[j]))
        ends.append((deg[j], deg[i]))
    ends = np.array(ends, dtype=float)
    r = None
    if len(ends) and ends[:, 0].std() > 0:
        r = np.corrcoef(ends[:, 0], ends[:, 1])[0, 1]
    m = int(A.sum() // 2)
    # components by boolean transitive closure (Warshall)
    reach = (A + np.eye(n, dtype=np.int64)) > 0
    for k in range(n):
        reach = reach | (reach[:, [k]] & reach[[k], :])
    comps = {tuple(np.nonzero(row)[0]) for row in reach}
    return dict(n_nodes=n, n_edges=m, density=2 * m / (n * (n - 1)) if n > 1 else None,
                avg_degree=2 * m / n, clustering_raw=closed.mean(),
                clustering_standard=float(np.mean(local)), assortativity=r,
                n_components=len(comps), largest_component_fraction=max(map(len, comps)) / n)


def random_graph(rng):
    n = rng.randint(2, 25)
    nodes = [f"n{i:02d}" for i in range(n)]
    p = rng.uniform(0.05, 0.7)
    edges = [(a, b) for a, b in itertools.combinations(nodes, 2) if rng.random() < p]
    return nodes, edges


def test_random_graphs_against_oracle():
    rng = random.Random(2024)
    for _ in range(30):
        nodes, edges = random_graph(rng)
        got = compute_metrics(snap(nodes, edges))
        want = oracle(nodes, edges)
        for key, w in want.items():
            g = getattr(got, key)
            if w is None:
                assert g is None, key
            else:
                assert g == pytest.approx(w, abs=1e-12, rel=0), key


def test_triangle():
    m = compute_metrics(snap("abc", [("a", "b"), ("b", "c"), ("a", "c")]))
    assert m.clustering_standard == 1.0
    assert m.clustering_raw == 2.0
    assert m.density == 1.0 and m.n_components == 1
    assert m.assortativity is None  # every degree is 2


def test_path_graph():
    m = compute_metrics(snap("abcd", [("a", "b"), ("b", "c"), ("c", "d")]))
    assert m.clustering_standard == 0.0 and m.clustering_raw == 0.0
    assert m.assortativity == pytest.approx(-0.5, abs=1e-12)
    assert m.avg_degree == 1.5


@pytest.mark.parametrize("n,k,edges", [
    (4, 3, list(itertools.combinations(range(4), 2))),
    (5, 2, [(i, (i + 1) % 5) for i in range(5)]),
])
def test_vertex_transitive_normalisation(n, k, edges):
    nodes = [str(i) for i in range(n)]
    m = compute_metrics(snap(nodes, [(str(a), str(b)) for a, b in edges]))
    assert m.clustering_raw == pytest.approx(k * (k - 1) * m.clustering_standard, abs=1e-12)


def test_isolated_nodes_and_empty():
    m = compute_metrics(snap(["a", "b", "c"], [("a", "b")]))
    assert m.n_components == 2 and m.largest_component_fraction == pytest.approx(2 / 3)
    e = compute_metrics(snap([], []))
    assert e.n_nodes == 0 and e.density is None and e.clustering_standard is None
    one = compute_metrics(snap(["x"], []))
    assert one.density is None and one.clustering_standard == 0.0


def test_weights_ignored():
    s1 = snap("abc", [("a", "b"), ("b", "c")])
    s2 = CoocSnapshot(0, (0, 1), s1.nodes, {k: 9 for k in s1.edges}, POL)
    assert compute_metrics(s1) == compute_metrics(s2)


def test_persistence():
    s0 = snap("abc", [("a", "b"), ("b", "c")], 0)
    s1 = snap("abd", [("a", "b")], 1)
    s2 = snap("de", [("d", "e")], 2)
    p = compute_persistence([s0, s1, s2])
    assert p.node_retention == [1.0, 2 / 3, 0.0]
    assert p.edge_retention == [1.0, 0.5, 0.0]
    assert p.node_renewal == [None, 2 / 3, 0.5]
    assert p.edge_renewal == [None, 1.0, 0.0]
    with pytest.raises(ValueError):
        compute_persistence([s0])
    empty = compute_persistence([snap([], []), snap("a", [])])
    assert empty.node_retention == [None, None] and empty.edge_renewal == [None, None]


@settings(max_examples=60, deadline=None)
@given(st.sets(st.tuples(st.integers(0, 9), st.integers(0, 9)).filter(lambda t: t[0] != t[1]),
               max_size=30))
def test_property_bounds(pairs):
    nodes = [str(i) for i in range(10)]
    m = compute_metrics(snap(nodes, [(str(a), str(b)) for a, b in pairs]))
    assert 0.0 <= m.clustering_standard <= 1.0
    assert 0.0 <= m.density <= 1.0
    assert m.assortativity is None or -1 - 1e-12 <= m.assortativity <= 1 + 1e-12
    assert m.n_components >= 1
