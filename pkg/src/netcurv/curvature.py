"""Discrete Ricci curvatures of weighted graphs and 2-complexes.

Edge curvatures are returned either one edge at a time (``forman_graph``,
``forman_full``, ...) or for the whole edge set as a :class:`CurvatureField`
via :func:`curvature_field`.  Per-edge arrays follow the canonical edge
index of the underlying :class:`~netcurv.graph.WeightedGraph`.
"""
from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .graph import CellComplex2, GraphError, MetricKind, WeightedGraph, build_complex, edge_lengths
from .matrices import KernelMatrix


class CurvatureKind(enum.Enum):
    GRAPH_FORMAN = "graph-forman"
    FULL_FORMAN = "full-forman"
    HAANTJES = "haantjes"
    BOX1 = "box1"


class HaantjesConvention(enum.Enum):
    """How the Haantjes path length is measured for a face containing ``e``.

    ``PATH_CHORD`` uses the open complementary path; ``CYCLE_CHORD`` uses the
    full cycle length (path plus chord).
    """

    PATH_CHORD = "path-chord"
    CYCLE_CHORD = "cycle-chord"


@dataclass(frozen=True)
class CurvatureField:
    kind: CurvatureKind
    target: str  # "edge" or "node"
    values: np.ndarray
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.target not in ("edge", "node"):
            raise ValueError(f"target must be 'edge' or 'node', not {self.target!r}")
        v = np.array(self.values, dtype=float)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def fingerprint(self) -> str:
        blob = json.dumps({"kind": self.kind.value, "target": self.target, **self.params}, sort_keys=True, default=str)
        return hashlib.sha1(blob.encode()).hexdigest()[:12]

    def __len__(self) -> int:
        return len(self.values)

    def as_dict(self, g: WeightedGraph) -> dict:
        """Values keyed by node label or by ``(u, v)`` label pairs."""
        if self.target == "node":
            return dict(zip(g.labels, self.values.tolist()))
        return {g.edge_labels(e): float(x) for e, x in enumerate(self.values)}


def _graph_of(obj) -> WeightedGraph:
    return obj.base if isinstance(obj, CellComplex2) else obj


def _require_positive(g: WeightedGraph) -> None:
    if np.any(g.edge_weights <= 0) or np.any(g.node_weights <= 0):
        raise GraphError("curvature requires strictly positive weights")


# ---------------------------------------------------------------------------
# graph Forman


def forman_graph(g: WeightedGraph, e) -> float:
    """Forman-Ricci curvature of an edge of a graph (no 2-faces)."""
    _require_positive(g)
    k = g.edge_index(e)
    i, j = g.edges[k]
    we = g.edge_weights[k]
    wi, wj = g.node_weights[i], g.node_weights[j]
    total = wi / we + wj / we
    for v, wv in ((i, wi), (j, wj)):
        for f in g.incident[v]:
            if f != k:
                total -= wv / math.sqrt(we * g.edge_weights[f])
    return float(we * total)


def forman_graph_all(g: WeightedGraph) -> np.ndarray:
    _require_positive(g)
    if g.n_edges == 0:
        return np.zeros(0)
    w = g.edge_weights
    isw = 1.0 / np.sqrt(w)
    s = np.zeros(g.n_nodes)
    np.add.at(s, g.edges[:, 0], isw)
    np.add.at(s, g.edges[:, 1], isw)
    i, j = g.edges[:, 0], g.edges[:, 1]
    wi, wj = g.node_weights[i], g.node_weights[j]
    return w * ((wi + wj) / w - wi * isw * (s[i] - isw) - wj * isw * (s[j] - isw))


def forman_graph_combinatorial(g: WeightedGraph, e) -> int:
    """``4 - deg(v1) - deg(v2)``; the unit-weight form of the graph curvature."""
    i, j = g.edges[g.edge_index(e)]
    return 4 - g.degree(i) - g.degree(j)


# ---------------------------------------------------------------------------
# full Forman and the Bochner Laplacian


def _edge_neighbours(c: CellComplex2, k: int) -> dict[int, tuple[list[int], list[int]]]:
    """Edges sharing a face or a vertex with ``k``: ``{edge: (faces, vertices)}``."""
    g = c.base
    out: dict[int, tuple[list[int], list[int]]] = {}
    for f in c.edge_faces[k]:
        for other in c.face_edges[f]:
            if other != k:
                out.setdefault(other, ([], []))[0].append(f)
    for v in g.edges[k]:
        for other in g.incident[v]:
            if other != k:
                out.setdefault(other, ([], []))[1].append(int(v))
    return out


def forman_full(c: CellComplex2, e) -> float:
    """Forman-Ricci curvature of an edge of a 2-complex.

    An edge is parallel to ``e`` when it shares a face with ``e`` or a vertex
    with ``e``, but not both; only parallel edges enter the negative sum.
    """
    g = c.base
    _require_positive(g)
    k = g.edge_index(e)
    we = g.edge_weights[k]
    total = sum(we / c.face_weights[f] for f in c.edge_faces[k])
    total += sum(g.node_weights[v] / we for v in g.edges[k])
    for other, (faces, verts) in _edge_neighbours(c, k).items():
        if bool(faces) == bool(verts):
            continue
        root = math.sqrt(we * g.edge_weights[other])
        term = sum(root / c.face_weights[f] for f in faces)
        term -= sum(g.node_weights[v] / root for v in verts)
        total -= abs(term)
    return float(we * total)


def forman_full_all(c: CellComplex2) -> np.ndarray:
    return np.array([forman_full(c, k) for k in range(c.base.n_edges)])


def _orientation_signs(c: CellComplex2) -> tuple[np.ndarray, np.ndarray]:
    """Signed boundary matrices: nodes x edges and edges x faces.

    Edges are oriented from the lower to the higher node index; faces follow
    the vertex order of their canonical cycle.
    """
    g = c.base
    B1 = np.zeros((g.n_nodes, g.n_edges))
    B1[g.edges[:, 0], np.arange(g.n_edges)] = -1.0
    B1[g.edges[:, 1], np.arange(g.n_edges)] = 1.0
    B2 = np.zeros((g.n_edges, c.n_faces))
    for fi, f in enumerate(c.faces):
        for a, b, e in zip(f, f[1:] + f[:1], c.face_edges[fi]):
            B2[e, fi] = 1.0 if a < b else -1.0
    return B1, B2


def box1_matrix(c: CellComplex2) -> np.ndarray:
    """Dense weighted Bochner (Riemann-Laplace) operator on 1-cells."""
    g = c.base
    _require_positive(g)
    B1, B2 = _orientation_signs(c)
    w = g.edge_weights
    rw = np.sqrt(w)
    up = (rw[:, None] * B2) @ np.diag(1.0 / c.face_weights) @ (B2.T * rw[None, :]) if c.n_faces else 0.0
    down = (B1.T / rw[:, None]) @ np.diag(g.node_weights) @ (B1 / rw[None, :])
    M = up + down
    return (M + M.T) / 2


def bochner_box1(c: CellComplex2, e1, e2) -> float:
    """One entry of the Bochner operator, summed term by term.

    Diagonal: ``sum_f w(e)/w(f) + sum_v w(v)/w(e)``.  Off-diagonal: signed
    face terms ``sqrt(w1 w2)/w(f)`` plus signed vertex terms
    ``w(v)/sqrt(w1 w2)`` over shared faces and vertices.
    """
    g = c.base
    _require_positive(g)
    a, b = g.edge_index(e1), g.edge_index(e2)
    wa, wb = g.edge_weights[a], g.edge_weights[b]
    root = math.sqrt(wa * wb)
    total = 0.0
    for fi in set(c.edge_faces[a]) & set(c.edge_faces[b]):
        f = c.faces[fi]
        sign = 1.0
        for e in (a, b):
            pos = c.face_edges[fi].index(e)
            sign *= 1.0 if f[pos] < f[(pos + 1) % len(f)] else -1.0
        total += sign * root / c.face_weights[fi]
    for v in set(g.edges[a].tolist()) & set(g.edges[b].tolist()):
        sign = 1.0
        for e in (a, b):
            sign *= 1.0 if g.edges[e][1] == v else -1.0
        total += sign * g.node_weights[v] / root
    return float(total)


def bochner_admissible(c: CellComplex2) -> bool:
    """True when no two edges sharing a vertex lie on more than one common face.

    Under standard weights this is what makes the off-diagonal entries of
    non-parallel neighbours cancel, so that ``B1`` is diagonally dominant.
    """
    seen = set()
    for fe in c.face_edges:
        for p in range(len(fe)):
            a, b = fe[p], fe[(p + 1) % len(fe)]
            key = (a, b) if a < b else (b, a)
            if key in seen:
                return False
            seen.add(key)
    return True


class BochnerDecomposition(NamedTuple):
    box1: np.ndarray
    b1: KernelMatrix
    f1: np.ndarray
    min_eigenvalue: float
    residual: float


def bochner_decomposition(c: CellComplex2, tol: float = 1e-9) -> BochnerDecomposition:
    """Split ``Box1 = B1 + F1`` with ``F1 = diag(Ric_F(e) / w(e))``."""
    g = c.base
    box = box1_matrix(c)
    f1 = forman_full_all(c) / g.edge_weights if g.n_edges else np.zeros(0)
    b = box - np.diag(f1)
    b = (b + b.T) / 2
    index = [g.edge_labels(k) for k in range(g.n_edges)]
    km = KernelMatrix.tagged(index, b, tol=tol, diagonal="Box1(e,e) - Ric_F(e)/w(e)")
    resid = float(np.max(np.abs(box - (km.values + np.diag(f1))))) if g.n_edges else 0.0
    lam = km.min_eigenvalue if km.min_eigenvalue is not None else 0.0
    return BochnerDecomposition(box, km, f1, lam, resid)


# ---------------------------------------------------------------------------
# square grids


def _opposite_edge(c: CellComplex2, face: int, k: int) -> int:
    f = c.faces[face]
    fe = c.face_edges[face]
    if len(f) != 4:
        raise GraphError("grid curvature needs quadrangular faces")
    return fe[(fe.index(k) + 2) % 4]


def forman_grid(c: CellComplex2, e0) -> float:
    """Forman-Ricci curvature of a square-grid edge from its bounding quads.

    For each quad ``c_i`` containing ``e0`` with opposite edge ``e_i`` this
    adds ``w(e0)/w(c_i) - sqrt(w(e0) w(e_i))/w(c_i)``; boundary edges simply
    have a single quad.
    """
    g = c.base
    _require_positive(g)
    k = g.edge_index(e0)
    quads = c.edge_faces[k]
    if len(quads) > 2:
        raise GraphError("edge bounds more than two quads; not a grid complex")
    we = g.edge_weights[k]
    total = 0.0
    for f in quads:
        opp = _opposite_edge(c, f, k)
        total += we / c.face_weights[f] - math.sqrt(we * g.edge_weights[opp]) / c.face_weights[f]
    return float(we * total)


def forman_grid_all(c: CellComplex2) -> np.ndarray:
    g = c.base
    _require_positive(g)
    w = g.edge_weights
    out = np.zeros(g.n_edges)
    for fi, fe in enumerate(c.face_edges):
        if len(fe) != 4:
            raise GraphError("grid curvature needs quadrangular faces")
        fw = c.face_weights[fi]
        for p, k in enumerate(fe):
            opp = fe[(p + 2) % 4]
            out[k] += w[k] / fw - math.sqrt(w[k] * w[opp]) / fw
    if any(len(x) > 2 for x in c.edge_faces):
        raise GraphError("edge bounds more than two quads; not a grid complex")
    return w * out


# ---------------------------------------------------------------------------
# Haantjes


def haantjes_path(
    l_path: float,
    l_chord: float,
    convention: HaantjesConvention = HaantjesConvention.PATH_CHORD,
) -> float:
    """Signed Haantjes curvature of a path subtended by a chord.

    ``l_path`` is the length of the open path.  Under ``CYCLE_CHORD`` the
    chord is added to it first.  When the path is shorter than the chord the
    roles are swapped and the sign is negative.
    """
    if not (l_path > 0 and l_chord > 0):
        raise ValueError("path and chord lengths must be positive")
    length = l_path + l_chord if HaantjesConvention(convention) is HaantjesConvention.CYCLE_CHORD else l_path
    if length >= l_chord:
        return math.sqrt((length - l_chord) / l_chord**3)
    return -math.sqrt((l_chord - length) / length**3)


def haantjes_ricci(
    c: CellComplex2,
    e,
    convention: HaantjesConvention = HaantjesConvention.PATH_CHORD,
    metric: MetricKind = MetricKind.PATH,
    lengths: np.ndarray | None = None,
) -> float:
    """Sum of Haantjes path curvatures over the faces containing ``e``.

    The chord is the edge itself and each path is the rest of a face
    boundary; lengths come from ``lengths`` (per canonical edge) or from the
    edge lengths of ``metric``.
    """
    g = c.base
    k = g.edge_index(e)
    if lengths is None:
        lengths = edge_lengths(g, metric)
    chord = lengths[k]
    total = 0.0
    for f in c.edge_faces[k]:
        path = sum(lengths[x] for x in c.face_edges[f] if x != k)
        total += haantjes_path(path, chord, convention)
    return float(total)


def haantjes_ricci_all(
    c: CellComplex2,
    convention: HaantjesConvention = HaantjesConvention.PATH_CHORD,
    metric: MetricKind = MetricKind.PATH,
    lengths: np.ndarray | None = None,
) -> np.ndarray:
    if lengths is None:
        lengths = edge_lengths(c.base, metric)
    return np.array([haantjes_ricci(c, k, convention, lengths=lengths) for k in range(c.base.n_edges)])


# ---------------------------------------------------------------------------
# fields


def scalar_curvature(g: WeightedGraph, edge_field: CurvatureField) -> CurvatureField:
    """Node curvature: sum of the edge curvatures incident to each node."""
    if edge_field.target != "edge" or len(edge_field.values) != g.n_edges:
        raise ValueError("edge field does not cover the edge set of the graph")
    out = np.zeros(g.n_nodes)
    np.add.at(out, g.edges[:, 0], edge_field.values)
    np.add.at(out, g.edges[:, 1], edge_field.values)
    return CurvatureField(edge_field.kind, "node", out, dict(edge_field.params))


def curvature_field(
    obj: WeightedGraph | CellComplex2,
    kind: CurvatureKind | str,
    *,
    max_len: int = 4,
    convention: HaantjesConvention | str = HaantjesConvention.PATH_CHORD,
    metric: MetricKind | str = MetricKind.PATH,
    grid: bool = False,
) -> CurvatureField:
    """Edge curvature of the requested kind over the whole edge set.

    A plain graph is promoted to a complex of its 3-cycles (and 4-cycles
    when ``max_len == 4``) for the kinds that need faces.  ``grid=True``
    evaluates full Forman with the square-grid formula.
    """
    kind = CurvatureKind(kind)
    convention = HaantjesConvention(convention)
    metric = MetricKind(metric)
    g = _graph_of(obj)
    params: dict = {}
    if kind is CurvatureKind.GRAPH_FORMAN:
        vals = forman_graph_all(g)
    else:
        c = obj if isinstance(obj, CellComplex2) else build_complex(g, max_len)
        params["max_len"] = max(map(len, c.faces), default=0) if isinstance(obj, CellComplex2) else max_len
        if kind is CurvatureKind.FULL_FORMAN:
            vals = forman_grid_all(c) if grid else forman_full_all(c)
            params["grid"] = grid
        elif kind is CurvatureKind.HAANTJES:
            vals = haantjes_ricci_all(c, convention, metric)
            params["convention"] = convention.value
            params["metric"] = metric.value
        else:
            vals = np.diag(box1_matrix(c)).copy()
    return CurvatureField(kind, "edge", vals, params)
