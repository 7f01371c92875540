"""Weighted graphs, 2-complexes of short cycles, and graph metrics."""
from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np


class GraphError(ValueError):
    """Invalid graph data (bad weights, unknown nodes or edges)."""


class MetricKind(enum.Enum):
    PATH = "path"
    DEGREE_PATH = "degree-path"
    RESISTANCE = "resistance"
    COMBINATORIAL = "combinatorial"


class WeightedGraph:
    """Undirected simple graph with positive node and edge weights.

    Nodes are stored in a canonical order (the order given at construction)
    and referred to either by label or by dense index.  Edges are stored as
    index pairs ``(i, j)`` with ``i < j``, sorted lexicographically; that
    order is the canonical edge index used by every per-edge array in the
    package.
    """

    def __init__(
        self,
        nodes: Sequence[Hashable],
        edges: Iterable[tuple],
        node_weights: Mapping[Hashable, float] | Sequence[float] | None = None,
    ):
        self.labels: tuple = tuple(nodes)
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self._index) != len(self.labels):
            raise GraphError("duplicate node labels")
        n = len(self.labels)

        if node_weights is None:
            nw = np.ones(n)
        elif isinstance(node_weights, Mapping):
            nw = np.array([float(node_weights.get(lab, 1.0)) for lab in self.labels])
        else:
            nw = np.asarray(node_weights, dtype=float)
            if nw.shape != (n,):
                raise GraphError("node weight array has wrong length")
        if n and not np.all(nw > 0):
            raise GraphError("node weights must be strictly positive")

        pairs: dict[tuple[int, int], float] = {}
        for item in edges:
            if len(item) == 2:
                u, v = item
                w = 1.0
            else:
                u, v, w = item
            i, j = self.index(u), self.index(v)
            if i == j:
                raise GraphError(f"self-loop at {u!r}")
            key = (i, j) if i < j else (j, i)
            if key in pairs:
                raise GraphError(f"parallel edge {u!r}-{v!r}")
            w = float(w)
            if not w > 0 or not math.isfinite(w):
                raise GraphError(f"edge {u!r}-{v!r} has nonpositive weight {w}")
            pairs[key] = w

        keys = sorted(pairs)
        self.node_weights = nw
        self.node_weights.flags.writeable = False
        self.edges = np.array(keys, dtype=np.int64).reshape(-1, 2)
        self.edges.flags.writeable = False
        self.edge_weights = np.array([pairs[k] for k in keys], dtype=float)
        self.edge_weights.flags.writeable = False
        self._edge_index = {k: e for e, k in enumerate(keys)}

        inc: list[list[int]] = [[] for _ in range(n)]
        nbr: list[list[int]] = [[] for _ in range(n)]
        for e, (i, j) in enumerate(keys):
            inc[i].append(e)
            inc[j].append(e)
            nbr[i].append(j)
            nbr[j].append(i)
        self.incident: tuple[tuple[int, ...], ...] = tuple(tuple(x) for x in inc)
        self.neighbors: tuple[frozenset, ...] = tuple(frozenset(x) for x in nbr)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_networkx(cls, G, weight: str = "weight", node_weight: str = "weight"):
        nodes = list(G.nodes)
        nw = [G.nodes[v].get(node_weight, 1.0) for v in nodes]
        edges = [(u, v, d.get(weight, 1.0)) for u, v, d in G.edges(data=True)]
        return cls(nodes, edges, nw)

    def to_networkx(self):
        import networkx as nx

        G = nx.Graph()
        for lab, w in zip(self.labels, self.node_weights):
            G.add_node(lab, weight=float(w))
        for (i, j), w in zip(self.edges, self.edge_weights):
            G.add_edge(self.labels[i], self.labels[j], weight=float(w))
        return G

    def with_edge_weights(self, weights: np.ndarray, keep: np.ndarray | None = None) -> "WeightedGraph":
        """Copy of the graph with new edge weights, optionally dropping edges.

        ``keep`` is a boolean mask over the canonical edge index; the node set
        is unchanged.
        """
        weights = np.asarray(weights, dtype=float)
        if keep is None:
            keep = np.ones(self.n_edges, dtype=bool)
        edges = [
            (self.labels[i], self.labels[j], w)
            for (i, j), w, k in zip(self.edges, weights, keep)
            if k
        ]
        return WeightedGraph(self.labels, edges, self.node_weights.copy())

    def subgraph(self, node_indices: Iterable[int], edge_indices: Iterable[int] | None = None) -> "WeightedGraph":
        """Subgraph on the given nodes (canonical order preserved).

        Without ``edge_indices`` the subgraph is induced; otherwise only the
        listed edges whose endpoints are both kept are included.
        """
        keep = sorted(set(int(i) for i in node_indices))
        kept = set(keep)
        if edge_indices is None:
            cand = range(self.n_edges)
        else:
            cand = sorted(set(int(e) for e in edge_indices))
        edges = []
        for e in cand:
            i, j = self.edges[e]
            if i in kept and j in kept:
                edges.append((self.labels[i], self.labels[j], self.edge_weights[e]))
        return WeightedGraph(
            [self.labels[i] for i in keep], edges, self.node_weights[keep].copy()
        )

    # -- lookups --------------------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def index(self, label) -> int:
        try:
            return self._index[label]
        except (KeyError, TypeError):
            raise GraphError(f"unknown node {label!r}") from None

    def edge_index(self, e) -> int:
        """Canonical index of an edge given as an index or a pair of labels."""
        if isinstance(e, (int, np.integer)):
            if not 0 <= e < self.n_edges:
                raise GraphError(f"edge index {e} out of range")
            return int(e)
        u, v = e
        i, j = self.index(u), self.index(v)
        key = (i, j) if i < j else (j, i)
        try:
            return self._edge_index[key]
        except KeyError:
            raise GraphError(f"unknown edge {u!r}-{v!r}") from None

    def edge_between(self, i: int, j: int) -> int | None:
        """Edge index between node indices ``i`` and ``j`` or None."""
        return self._edge_index.get((i, j) if i < j else (j, i))

    def edge_labels(self, e: int) -> tuple:
        i, j = self.edges[e]
        return self.labels[i], self.labels[j]

    def degree(self, i: int) -> int:
        return len(self.incident[i])

    def degrees(self) -> np.ndarray:
        return np.array([len(x) for x in self.incident], dtype=np.int64)

    def __repr__(self) -> str:
        return f"WeightedGraph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"


# ---------------------------------------------------------------------------
# 2-complexes of triangles and quadrangles


def _canonical_cycle(cycle: Sequence[int]) -> tuple[int, ...]:
    """Smallest rotation/reflection of a vertex cycle."""
    n = len(cycle)
    best = None
    for seq in (list(cycle), list(reversed(cycle))):
        for r in range(n):
            cand = tuple(seq[r:] + seq[:r])
            if best is None or cand < best:
                best = cand
    return best


@dataclass(frozen=True)
class CellComplex2:
    """A weighted graph together with weighted 2-faces (3- and 4-cycles).

    ``faces`` holds canonical vertex cycles (node indices), ``face_weights``
    the matching positive weights and ``edge_faces[e]`` the indices of the
    faces whose boundary contains edge ``e``.
    """

    base: WeightedGraph
    faces: tuple[tuple[int, ...], ...]
    face_weights: np.ndarray
    edge_faces: tuple[tuple[int, ...], ...] = field(repr=False)
    face_edges: tuple[tuple[int, ...], ...] = field(repr=False)

    @classmethod
    def from_faces(
        cls,
        base: WeightedGraph,
        faces: Iterable[Sequence[int]],
        face_weights: Sequence[float] | None = None,
    ) -> "CellComplex2":
        faces = [tuple(int(x) for x in f) for f in faces]
        canon = [_canonical_cycle(f) for f in faces]
        if len(set(canon)) != len(canon):
            raise GraphError("duplicate faces")
        fw = np.ones(len(canon)) if face_weights is None else np.asarray(face_weights, dtype=float)
        if fw.shape != (len(canon),):
            raise GraphError("face weight array has wrong length")
        if len(fw) and not np.all(fw > 0):
            raise GraphError("face weights must be strictly positive")
        edge_faces: list[list[int]] = [[] for _ in range(base.n_edges)]
        face_edges = []
        for k, f in enumerate(canon):
            if len(f) not in (3, 4) or len(set(f)) != len(f):
                raise GraphError(f"face {f} is not an elementary 3- or 4-cycle")
            fe = []
            for a, b in zip(f, f[1:] + f[:1]):
                e = base.edge_between(a, b)
                if e is None:
                    raise GraphError(f"face {f} uses a missing edge")
                fe.append(e)
                edge_faces[e].append(k)
            face_edges.append(tuple(fe))
        fw.flags.writeable = False
        return cls(
            base,
            tuple(canon),
            fw,
            tuple(tuple(x) for x in edge_faces),
            tuple(face_edges),
        )

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def face_count_by_length(self) -> dict[int, int]:
        out = {3: 0, 4: 0}
        for f in self.faces:
            out[len(f)] += 1
        return out


def enumerate_triangles(g: WeightedGraph) -> list[tuple[int, int, int]]:
    out = []
    for i, j in g.edges:
        for k in g.neighbors[i] & g.neighbors[j]:
            if k > j:
                out.append((int(i), int(j), int(k)))
    out.sort()
    return out


def enumerate_quadrangles(g: WeightedGraph, induced_only: bool = False) -> list[tuple[int, int, int, int]]:
    """All elementary 4-cycles ``(a, b, c, d)`` with ``a`` minimal and ``b < d``."""
    out = []
    for a in range(g.n_nodes):
        higher = sorted(x for x in g.neighbors[a] if x > a)
        for p, b in enumerate(higher):
            for d in higher[p + 1:]:
                for c in g.neighbors[b] & g.neighbors[d]:
                    if c <= a:
                        continue
                    if induced_only and (c in g.neighbors[a] or d in g.neighbors[b]):
                        continue
                    out.append((a, b, int(c), d))
    out.sort()
    return out


FaceWeightRule = None | str | Mapping | Callable


def build_complex(
    g: WeightedGraph,
    max_len: int = 4,
    face_weights: FaceWeightRule = None,
    induced_only: bool = False,
) -> CellComplex2:
    """Attach every elementary 3-cycle (and 4-cycle if ``max_len == 4``) as a face.

    ``face_weights`` is ``None``/``"unit"`` for unit faces, a mapping from
    canonical face tuples (node indices) to weights, or a callable receiving
    the graph and the face tuple.
    """
    if max_len not in (3, 4):
        raise GraphError(f"max_len must be 3 or 4, got {max_len}")
    faces: list[tuple[int, ...]] = list(enumerate_triangles(g))
    if max_len == 4:
        faces.extend(enumerate_quadrangles(g, induced_only=induced_only))
    if face_weights is None or face_weights == "unit":
        fw = None
    elif isinstance(face_weights, Mapping):
        fw = [float(face_weights.get(f, 1.0)) for f in faces]
    elif callable(face_weights):
        fw = [float(face_weights(g, f)) for f in faces]
    else:
        raise GraphError(f"unsupported face weight rule {face_weights!r}")
    return CellComplex2.from_faces(g, faces, fw)


# ---------------------------------------------------------------------------
# metrics


def weighted_degree(g: WeightedGraph, v) -> float:
    """Sum of incident edge weights divided by the node weight."""
    i = g.index(v)
    return float(sum(g.edge_weights[e] for e in g.incident[i]) / g.node_weights[i])


def weighted_degrees(g: WeightedGraph) -> np.ndarray:
    out = np.zeros(g.n_nodes)
    np.add.at(out, g.edges[:, 0], g.edge_weights)
    np.add.at(out, g.edges[:, 1], g.edge_weights)
    return out / g.node_weights


def degree_path_lengths(g: WeightedGraph) -> np.ndarray:
    """Per-edge step cost ``max(d(u), d(v)) ** -1/2`` of the degree path metric."""
    d = weighted_degrees(g)
    return np.maximum(d[g.edges[:, 0]], d[g.edges[:, 1]]) ** -0.5


def _dijkstra(g: WeightedGraph, src: int, lengths: np.ndarray) -> np.ndarray:
    dist = np.full(g.n_nodes, np.inf)
    dist[src] = 0.0
    heap = [(0.0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for e in g.incident[u]:
            i, j = g.edges[e]
            v = j if i == u else i
            nd = d + lengths[e]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, int(v)))
    return dist


def edge_lengths(g: WeightedGraph, kind: MetricKind = MetricKind.PATH) -> np.ndarray:
    """Length of every edge under the given metric."""
    kind = MetricKind(kind)
    if kind is MetricKind.PATH:
        return np.asarray(g.edge_weights, dtype=float)
    if kind is MetricKind.COMBINATORIAL:
        return np.ones(g.n_edges)
    if kind is MetricKind.DEGREE_PATH:
        return degree_path_lengths(g)
    R = resistance_matrix(g)
    return R[g.edges[:, 0], g.edges[:, 1]]


def path_metric(g: WeightedGraph, src, kind: MetricKind = MetricKind.PATH) -> dict:
    """Single-source shortest path distances keyed by node label.

    Unreachable nodes get ``inf``.  ``DEGREE_PATH`` uses the degree path
    step costs; ``RESISTANCE`` is not a path metric and is delegated to
    :func:`resistance_metric`.
    """
    kind = MetricKind(kind)
    s = g.index(src)
    if kind is MetricKind.RESISTANCE:
        R = resistance_matrix(g)
        return dict(zip(g.labels, R[s].tolist()))
    dist = _dijkstra(g, s, edge_lengths(g, kind))
    return dict(zip(g.labels, dist.tolist()))


def degree_path_metric(g: WeightedGraph, x, y) -> float:
    """Degree path distance; ``inf`` when ``x`` and ``y`` are disconnected."""
    i, j = g.index(x), g.index(y)
    return float(_dijkstra(g, i, degree_path_lengths(g))[j])


def connected_components(g: WeightedGraph) -> np.ndarray:
    """Component label per node (labels numbered by first node index)."""
    comp = np.full(g.n_nodes, -1, dtype=np.int64)
    c = 0
    for s in range(g.n_nodes):
        if comp[s] >= 0:
            continue
        stack = [s]
        comp[s] = c
        while stack:
            u = stack.pop()
            for v in g.neighbors[u]:
                if comp[v] < 0:
                    comp[v] = c
                    stack.append(v)
        c += 1
    return comp


def conductance_matrix(g: WeightedGraph) -> np.ndarray:
    """Dense matrix of conductances ``1 / w(e)`` (zero off the edge set)."""
    C = np.zeros((g.n_nodes, g.n_nodes))
    i, j = g.edges[:, 0], g.edges[:, 1]
    C[i, j] = C[j, i] = 1.0 / g.edge_weights
    return C


def resistance_metric(g: WeightedGraph, x, y) -> float:
    """Effective resistance between ``x`` and ``y`` with resistances ``w(e)``.

    Solves for the potential ``f`` harmonic off ``{x, y}`` with ``f(x) = 1``
    and ``f(y) = 0`` and returns ``1 / sum_t f(t) r(t, y)``, the inverse of
    the current entering ``y``.  Disconnected pairs give ``inf``.
    """
    i, j = g.index(x), g.index(y)
    if i == j:
        return 0.0
    comp = connected_components(g)
    if comp[i] != comp[j]:
        return math.inf
    members = np.flatnonzero(comp == comp[i])
    C = conductance_matrix(g)[np.ix_(members, members)]
    pos = {int(m): k for k, m in enumerate(members)}
    a, b = pos[i], pos[j]
    interior = [k for k in range(len(members)) if k not in (a, b)]
    f = np.zeros(len(members))
    f[a] = 1.0
    if interior:
        L = np.diag(C.sum(axis=1)) - C
        A = L[np.ix_(interior, interior)]
        rhs = C[interior, a]
        f[interior] = np.linalg.solve(A, rhs)
    current = float(np.dot(f, C[:, b]))
    return 1.0 / current


def resistance_matrix(g: WeightedGraph) -> np.ndarray:
    """All-pairs effective resistance; ``inf`` across components."""
    n = g.n_nodes
    R = np.full((n, n), np.inf)
    comp = connected_components(g)
    C = conductance_matrix(g)
    for c in np.unique(comp):
        m = np.flatnonzero(comp == c)
        Cm = C[np.ix_(m, m)]
        L = np.diag(Cm.sum(axis=1)) - Cm
        # grounded solve per component: pinv of a connected Laplacian via L + J/n
        k = len(m)
        Linv = np.linalg.inv(L + np.ones((k, k)) / k) - np.ones((k, k)) / k
        Linv = (Linv + Linv.T) / 2
        d = np.diag(Linv)
        R[np.ix_(m, m)] = d[:, None] + d[None, :] - 2 * Linv
    np.fill_diagonal(R, 0.0)
    return np.maximum(R, 0.0)


def distance_matrix(g: WeightedGraph, kind: MetricKind = MetricKind.PATH) -> np.ndarray:
    """All-pairs distances under the given metric (``inf`` when disconnected)."""
    kind = MetricKind(kind)
    if kind is MetricKind.RESISTANCE:
        return resistance_matrix(g)
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import dijkstra

    n = g.n_nodes
    if n == 0:
        return np.zeros((0, 0))
    lengths = edge_lengths(g, kind)
    i, j = g.edges[:, 0], g.edges[:, 1]
    A = csr_matrix((np.r_[lengths, lengths], (np.r_[i, j], np.r_[j, i])), shape=(n, n))
    D = dijkstra(A, directed=False)
    # both triangles hold valid path lengths; rounding can differ in the last bit
    return np.minimum(D, D.T)
