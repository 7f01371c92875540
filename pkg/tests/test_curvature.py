import itertools
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphs import admissible_complex, golden_graphs, random_graphs, random_weighted
from netcurv.curvature import (
    CurvatureField,
    CurvatureKind,
    HaantjesConvention,
    bochner_admissible,
    bochner_box1,
    bochner_decomposition,
    box1_matrix,
    curvature_field,
    forman_full,
    forman_full_all,
    forman_graph,
    forman_graph_all,
    forman_graph_combinatorial,
    forman_grid,
    haantjes_path,
    haantjes_ricci,
    scalar_curvature,
)
from netcurv.graph import CellComplex2, GraphError, MetricKind, WeightedGraph, build_complex

PC, CC = HaantjesConvention.PATH_CHORD, HaantjesConvention.CYCLE_CHORD


# -- reference evaluators built from the definitions -------------------------


def ref_forman_graph(G, u, v):
    we = G[u][v]["weight"]
    total = G.nodes[u]["weight"] / we + G.nodes[v]["weight"] / we
    for x in (u, v):
        for y in G[x]:
            if {x, y} != {u, v}:
                total -= G.nodes[x]["weight"] / math.sqrt(we * G[x][y]["weight"])
    return we * total


def ref_forman_full(G, faces, fw, u, v):
    """Literal sum over faces, vertices and parallel edges of ``uv``."""

    def edges_of(f):
        return {frozenset((f[i], f[(i + 1) % len(f)])) for i in range(len(f))}

    e = frozenset((u, v))
    we = G[u][v]["weight"]
    my_faces = [k for k, f in enumerate(faces) if e in edges_of(f)]
    total = sum(we / fw[k] for k in my_faces)
    total += (G.nodes[u]["weight"] + G.nodes[v]["weight"]) / we
    for a, b in G.edges:
        o = frozenset((a, b))
        if o == e:
            continue
        shared_f = [k for k in my_faces if o in edges_of(faces[k])]
        shared_v = list(e & o)
        if bool(shared_f) == bool(shared_v):
            continue
        wo = G[a][b]["weight"]
        s = sum(math.sqrt(we * wo) / fw[k] for k in shared_f)
        s -= sum(G.nodes[x]["weight"] / math.sqrt(we * wo) for x in shared_v)
        total -= abs(s)
    return we * total


def to_nx(g):
    return g.to_networkx()


def random_complex(rng, n=7, p=0.5, weighted=True):
    G = nx.gnp_random_graph(n, p, seed=int(rng.integers(2**31)))
    g = random_weighted(G, rng) if weighted else WeightedGraph.from_networkx(G)
    fw = (lambda g, f: float(rng.uniform(0.3, 3.0))) if weighted else None
    return build_complex(g, 4, face_weights=fw)


# -- graph Forman ------------------------------------------------------------


def test_forman_graph_examples():
    g = WeightedGraph("ab", [("a", "b")])
    assert forman_graph(g, ("a", "b")) == 2.0
    assert forman_graph_combinatorial(g, 0) == 2
    (_, _), (g2, e2), (g3, e3) = golden_graphs()
    assert forman_graph(g2, e2) == -1.0
    assert forman_graph_combinatorial(g2, e2) == -1
    assert forman_graph(g3, e3) == -4.0


@pytest.mark.parametrize("seed", range(10))
def test_forman_graph_matches_reference(seed):
    rng = np.random.default_rng(seed)
    G = random_graphs(1, (5, 15), seed=seed)[0]
    g = random_weighted(G, rng)
    H = to_nx(g)
    vals = forman_graph_all(g)
    for k in range(g.n_edges):
        u, v = g.edge_labels(k)
        ref = ref_forman_graph(H, u, v)
        assert vals[k] == pytest.approx(ref, abs=1e-12)
        assert forman_graph(g, k) == pytest.approx(ref, abs=1e-12)


def test_zero_weights_rejected_by_curvature():
    g = WeightedGraph("ab", [("a", "b")])
    object.__setattr__(g, "edge_weights", np.array([0.0]))
    with pytest.raises(GraphError):
        forman_graph(g, 0)


# -- full Forman -------------------------------------------------------------


def test_forman_full_pendant_triangle():
    _, (g2, e2), _ = golden_graphs()
    assert forman_full(build_complex(g2), e2) == 2.0


def test_forman_full_face_free_equals_graph():
    rng = np.random.default_rng(1)
    for G in random_graphs(10, (4, 12), seed=1):
        g = random_weighted(G, rng)
        c = CellComplex2.from_faces(g, [])
        assert np.allclose(forman_full_all(c), forman_graph_all(g), atol=1e-12)


@pytest.mark.parametrize("seed", range(25))
def test_forman_full_matches_reference(seed):
    rng = np.random.default_rng(seed)
    c = random_complex(rng, n=int(rng.integers(4, 9)), p=0.6, weighted=seed % 2 == 0)
    g = c.base
    H = to_nx(g)
    faces = [tuple(g.labels[i] for i in f) for f in c.faces]
    for k in range(g.n_edges):
        u, v = g.edge_labels(k)
        ref = ref_forman_full(H, faces, c.face_weights, u, v)
        assert forman_full(c, k) == pytest.approx(ref, abs=1e-10)


# -- Bochner operator --------------------------------------------------------


def test_box1_examples():
    g = WeightedGraph("abc", [("a", "b"), ("b", "c")])
    c = CellComplex2.from_faces(g, [])
    assert bochner_box1(c, 0, 0) == 2.0
    tri = build_complex(WeightedGraph("abc", [("a", "b"), ("b", "c"), ("a", "c")]))
    assert all(bochner_box1(tri, k, k) == pytest.approx(3.0) for k in range(3))
    two = CellComplex2.from_faces(WeightedGraph("abcd", [("a", "b"), ("c", "d")]), [])
    assert bochner_box1(two, 0, 1) == 0.0


def test_box1_matrix_matches_term_by_term():
    rng = np.random.default_rng(2)
    for _ in range(10):
        c = random_complex(rng)
        M = box1_matrix(c)
        m = c.base.n_edges
        T = np.array([[bochner_box1(c, a, b) for b in range(m)] for a in range(m)])
        assert np.allclose(M, T, atol=1e-12)


def test_box1_unit_weights_is_hodge_laplacian():
    # independent oracle: boundary matrices with random orientations
    rng = np.random.default_rng(3)
    for _ in range(10):
        c = random_complex(rng, weighted=False)
        g = c.base
        edges = [tuple(rng.permutation(e)) for e in g.edges.tolist()]
        pos = {frozenset(e): k for k, e in enumerate(edges)}
        d1 = np.zeros((g.n_nodes, g.n_edges))
        for k, (a, b) in enumerate(edges):
            d1[a, k], d1[b, k] = -1, 1
        d2 = np.zeros((g.n_edges, c.n_faces))
        for fi, f in enumerate(c.faces):
            f = f if rng.random() < 0.5 else f[::-1]
            for a, b in zip(f, f[1:] + f[:1]):
                k = pos[frozenset((a, b))]
                d2[k, fi] = 1 if edges[k] == (a, b) else -1
        L1 = d1.T @ d1 + d2 @ d2.T
        M = box1_matrix(c)
        assert np.allclose(np.linalg.eigvalsh(M), np.linalg.eigvalsh(L1), atol=1e-10)
        assert np.allclose(np.abs(M), np.abs(L1), atol=1e-12)


def test_box1_star_face_free():
    star = WeightedGraph(range(4), [(0, 1), (0, 2), (0, 3)])
    M = box1_matrix(CellComplex2.from_faces(star, []))
    # all edges point away from the shared centre, so off-diagonals are +1
    assert np.array_equal(M, np.ones((3, 3)) + np.eye(3))


def test_decomposition_examples():
    path = WeightedGraph(range(5), [(i, i + 1) for i in range(4)])
    dec = bochner_decomposition(CellComplex2.from_faces(path, []))
    assert dec.min_eigenvalue >= -1e-9
    single = bochner_decomposition(CellComplex2.from_faces(WeightedGraph("ab", [("a", "b")]), []))
    assert single.b1.values.shape == (1, 1) and single.b1.values[0, 0] >= 0
    tri = build_complex(WeightedGraph("abc", [("a", "b"), ("b", "c"), ("a", "c")]))
    dec = bochner_decomposition(tri)
    assert dec.residual < 1e-12
    assert np.array_equal(np.diag(dec.f1) + dec.b1.values, dec.box1)


def test_decomposition_diagonal_is_forman_over_weight():
    rng = np.random.default_rng(4)
    c = random_complex(rng)
    dec = bochner_decomposition(c)
    assert np.allclose(dec.f1 * c.base.edge_weights, forman_full_all(c), atol=1e-12)


def test_admissible_generator_and_check():
    rng = np.random.default_rng(5)
    for _ in range(20):
        assert bochner_admissible(admissible_complex(rng))
    k4 = build_complex(WeightedGraph.from_networkx(nx.complete_graph(4)), 4)
    assert not bochner_admissible(k4)


def test_b1_can_be_indefinite_off_the_admissible_class():
    # diamond: both triangles and the outer 4-cycle are faces, so each corner
    # of the 4-cycle is also a corner of a triangle
    g = WeightedGraph(range(4), [(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)])
    c = build_complex(g, 4)
    assert not bochner_admissible(c)
    dec = bochner_decomposition(c)
    assert dec.min_eigenvalue == pytest.approx(-1.0, abs=1e-12)
    assert dec.b1.kind == "indefinite"


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_b1_positive_on_triangle_complexes(seed):
    rng = np.random.default_rng(seed)
    G = nx.gnp_random_graph(int(rng.integers(3, 9)), 0.6, seed=seed)
    w1, w2 = rng.uniform(0.5, 2.0, 2)
    g = WeightedGraph(list(G.nodes), [(u, v, w1 * w2) for u, v in G.edges], [w1] * G.number_of_nodes())
    c = build_complex(g, 3, face_weights=lambda g, f: w1 * w2**2)
    if g.n_edges:
        assert bochner_decomposition(c).min_eigenvalue >= -1e-9


# -- square grids ------------------------------------------------------------


def grid(n_rows, n_cols, weights=None):
    idx = lambda r, c: r * n_cols + c
    edges = []
    for r in range(n_rows):
        for c in range(n_cols):
            if c + 1 < n_cols:
                edges.append((idx(r, c), idx(r, c + 1)))
            if r + 1 < n_rows:
                edges.append((idx(r, c), idx(r + 1, c)))
    weights = weights or {}
    g = WeightedGraph(range(n_rows * n_cols), [(a, b, weights.get((a, b), 1.0)) for a, b in edges])
    faces = [(idx(r, c), idx(r, c + 1), idx(r + 1, c + 1), idx(r + 1, c)) for r in range(n_rows - 1) for c in range(n_cols - 1)]
    return CellComplex2.from_faces(g, faces)


def test_forman_grid_examples():
    c = grid(3, 3)
    assert all(forman_grid(c, k) == 0.0 for k in range(c.base.n_edges))
    # centre column edge (1,4) with both opposite edges (0,3), (2,5) of weight 4
    c = grid(3, 3, {(0, 3): 4.0, (2, 5): 4.0})
    assert forman_grid(c, (1, 4)) == -2.0
    # boundary edge with a single unit quad
    assert forman_grid(grid(2, 2), (0, 1)) == 0.0


def test_forman_grid_rejects_non_grids():
    k4 = build_complex(WeightedGraph.from_networkx(nx.complete_graph(4)), 4)
    with pytest.raises(GraphError):
        forman_grid(k4, 0)


# -- Haantjes ----------------------------------------------------------------


def test_haantjes_path_examples():
    assert haantjes_path(3.0, 1.0, PC) == math.sqrt(2)
    assert haantjes_path(2.5, 2.5) == 0.0
    assert haantjes_path(1.0, 2.0) == -1.0
    assert haantjes_path(2.0, 1.0, CC) == math.sqrt(2)
    with pytest.raises(ValueError):
        haantjes_path(0.0, 1.0)


def test_haantjes_ricci_examples():
    (g1, e1), (g2, e2), (g3, e3) = golden_graphs()
    assert haantjes_ricci(build_complex(g1), e1, CC) == 0.0
    assert haantjes_ricci(build_complex(g2), e2, CC) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert haantjes_ricci(build_complex(g3), e3, CC) == pytest.approx(2 * math.sqrt(2) + math.sqrt(3), abs=1e-12)
    # path-chord: triangle path 2 over chord 1 -> 1, quad path 3 -> sqrt(2)
    assert haantjes_ricci(build_complex(g3), e3, PC) == pytest.approx(2 + math.sqrt(2), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 100), st.floats(0.01, 100))
def test_haantjes_sign_follows_excess(l_path, l_chord):
    k = haantjes_path(l_path, l_chord)
    assert math.copysign(1, k) == (1 if l_path >= l_chord else -1)
    assert k * k == pytest.approx(abs(l_path - l_chord) / min(l_path, l_chord) ** 3 if l_path < l_chord else (l_path - l_chord) / l_chord**3)


def test_haantjes_metric_choice_changes_lengths():
    g = WeightedGraph("abc", [("a", "b", 2.0), ("b", "c", 1.0), ("a", "c", 1.0)])
    c = build_complex(g)
    assert haantjes_ricci(c, ("a", "b"), metric=MetricKind.PATH) == 0.0
    assert haantjes_ricci(c, ("a", "b"), metric=MetricKind.COMBINATORIAL) == 1.0


# -- fields ------------------------------------------------------------------


def test_scalar_curvature_examples():
    g = WeightedGraph("ab", [("a", "b")])
    s = scalar_curvature(g, curvature_field(g, "graph-forman"))
    assert s.values.tolist() == [2.0, 2.0] and s.target == "node"
    star = WeightedGraph(range(4), [(0, 1), (0, 2), (0, 3)])
    s = scalar_curvature(star, curvature_field(star, "graph-forman"))
    assert s.values[0] == 0.0


@pytest.mark.parametrize("kind", list(CurvatureKind))
def test_handshake_identity(kind):
    rng = np.random.default_rng(6)
    for G in random_graphs(5, (5, 10), seed=6):
        g = random_weighted(G, rng)
        f = curvature_field(g, kind)
        s = scalar_curvature(g, f)
        assert math.fsum(s.values) == pytest.approx(2 * math.fsum(f.values), rel=1e-12, abs=1e-12)


def test_field_metadata():
    g = WeightedGraph.from_networkx(nx.karate_club_graph())
    f = curvature_field(g, "haantjes", convention="cycle-chord", metric="resistance")
    assert f.params == {"max_len": 4, "convention": "cycle-chord", "metric": "resistance"}
    f2 = curvature_field(g, "haantjes", convention="cycle-chord", metric="resistance")
    assert f.fingerprint == f2.fingerprint
    assert f.fingerprint != curvature_field(g, "haantjes").fingerprint
    assert f.as_dict(g)[g.edge_labels(0)] == f.values[0]
    with pytest.raises(ValueError):
        f.values[0] = 1.0
    with pytest.raises(ValueError):
        CurvatureField(CurvatureKind.HAANTJES, "face", [1.0])


def test_max_len_three_ignores_quadrangles():
    c4 = WeightedGraph(range(4), [(i, (i + 1) % 4) for i in range(4)])
    assert curvature_field(c4, "haantjes", max_len=3).values.tolist() == [0.0] * 4
    assert curvature_field(c4, "haantjes", max_len=4).values.tolist() == [math.sqrt(2)] * 4
