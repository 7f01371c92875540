"""Curvature-driven vertex and edge sampling of networks."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .curvature import CurvatureField, CurvatureKind
from .graph import WeightedGraph


class Ranking(enum.Enum):
    ABS_VALUE = "abs"
    SIGNED_HIGH_PASS = "high"
    SIGNED_LOW_PASS = "low"


@dataclass(frozen=True)
class SampleSpec:
    target: str = "vertex"
    retain_fraction: float = 0.2
    ranking: Ranking = Ranking.ABS_VALUE
    leaf_rule: bool = True

    def __post_init__(self):
        if self.target not in ("vertex", "edge"):
            raise ValueError(f"target must be 'vertex' or 'edge', not {self.target!r}")
        if not 0 < self.retain_fraction <= 1:
            raise ValueError("retain_fraction must lie in (0, 1]")
        object.__setattr__(self, "ranking", Ranking(self.ranking))


@dataclass(frozen=True)
class SampleResult:
    source: WeightedGraph = field(repr=False)
    nodes: tuple[int, ...]
    edges: tuple[int, ...]
    graph: WeightedGraph = field(repr=False)
    kind: CurvatureKind | None = None
    threshold: float = math.nan

    @property
    def node_labels(self) -> list:
        return [self.source.labels[i] for i in self.nodes]


def retained_count(fraction: float, total: int) -> int:
    """``ceil(fraction * total)`` robust to float noise such as ``0.2 * 5``."""
    return min(total, math.ceil(round(fraction * total, 9)))


def rank_order(values: np.ndarray, ranking: Ranking) -> np.ndarray:
    """Indices best-first; ties go to the lower index."""
    ranking = Ranking(ranking)
    if ranking is Ranking.ABS_VALUE:
        key = -np.abs(values)
    elif ranking is Ranking.SIGNED_HIGH_PASS:
        key = -np.asarray(values, dtype=float)
    else:
        key = np.asarray(values, dtype=float)
    return np.lexsort((np.arange(len(values)), key))


def _score(values, ranking: Ranking):
    return np.abs(values) if ranking is Ranking.ABS_VALUE else values


def sample_vertices(g: WeightedGraph, scalar: CurvatureField, spec: SampleSpec) -> SampleResult:
    """Keep the best-ranked nodes and drop every other node with its edges."""
    if g.n_nodes == 0:
        raise ValueError("cannot sample an empty graph")
    if scalar.target != "node" or len(scalar) != g.n_nodes:
        raise ValueError("scalar field does not cover the node set")
    if spec.target != "vertex":
        raise ValueError("spec is not a vertex sampling spec")
    m = retained_count(spec.retain_fraction, g.n_nodes)
    order = rank_order(scalar.values, spec.ranking)
    keep = np.sort(order[:m])
    kept = set(keep.tolist())
    edges = tuple(e for e, (i, j) in enumerate(g.edges) if i in kept and j in kept)
    thr = float(_score(scalar.values, spec.ranking)[order[m - 1]])
    return SampleResult(g, tuple(keep.tolist()), edges, g.subgraph(keep), scalar.kind, thr)


def sample_edges(g: WeightedGraph, ricci: CurvatureField, spec: SampleSpec) -> SampleResult:
    """Keep the best-ranked edges.

    Endpoints of removed edges stay, except a node that ends up isolated
    after having been an endpoint of a removed leaf edge (an edge with an
    endpoint of degree 1) when ``spec.leaf_rule`` is set.
    """
    if g.n_edges == 0:
        raise ValueError("cannot edge-sample a graph without edges")
    if ricci.target != "edge" or len(ricci) != g.n_edges:
        raise ValueError("edge field does not cover the edge set")
    if spec.target != "edge":
        raise ValueError("spec is not an edge sampling spec")
    m = retained_count(spec.retain_fraction, g.n_edges)
    order = rank_order(ricci.values, spec.ranking)
    keep_e = np.sort(order[:m])
    kept_mask = np.zeros(g.n_edges, dtype=bool)
    kept_mask[keep_e] = True

    deg = g.degrees()
    still = np.zeros(g.n_nodes, dtype=np.int64)
    np.add.at(still, g.edges[keep_e, 0], 1)
    np.add.at(still, g.edges[keep_e, 1], 1)
    drop = np.zeros(g.n_nodes, dtype=bool)
    if spec.leaf_rule:
        for e in np.flatnonzero(~kept_mask):
            i, j = g.edges[e]
            if deg[i] == 1 or deg[j] == 1:
                drop[i] |= still[i] == 0
                drop[j] |= still[j] == 0
    nodes = tuple(np.flatnonzero(~drop).tolist())
    thr = float(_score(ricci.values, spec.ranking)[order[m - 1]])
    sub = g.subgraph(nodes, keep_e)
    return SampleResult(g, nodes, tuple(keep_e.tolist()), sub, ricci.kind, thr)


def common_core(samples: list[SampleResult]) -> tuple[frozenset, WeightedGraph]:
    """Nodes kept by every sample and the subgraph they induce in the source."""
    if len(samples) < 2:
        raise ValueError("common core needs at least two samples")
    src = samples[0].source
    for s in samples[1:]:
        if s.source.labels != src.labels:
            raise ValueError("samples are drawn from different node sets")
    core = set(samples[0].nodes)
    for s in samples[1:]:
        core &= set(s.nodes)
    return frozenset(core), src.subgraph(core)
