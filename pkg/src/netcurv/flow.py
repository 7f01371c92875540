"""Normalized discrete Ricci flow on edge weights with pruning."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curvature import (
    CurvatureKind,
    HaantjesConvention,
    forman_full_all,
    forman_graph_all,
    haantjes_ricci_all,
)
from .graph import CellComplex2, MetricKind, WeightedGraph, build_complex


class FlowError(RuntimeError):
    """The flow cannot continue (e.g. every edge was pruned)."""


@dataclass(frozen=True)
class FlowConfig:
    kind: CurvatureKind = CurvatureKind.GRAPH_FORMAN
    mean: str = "arithmetic"  # or "weighted"
    iterations: int = 5
    prune_keep_fraction: float = 0.9
    normalize_curvature: bool | None = None  # None: on for graph Forman only
    min_weight: float = 1e-6
    step: float = 1.0
    max_len: int = 4
    convention: HaantjesConvention = HaantjesConvention.PATH_CHORD
    metric: MetricKind = MetricKind.PATH
    stop_variance: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "kind", CurvatureKind(self.kind))
        object.__setattr__(self, "convention", HaantjesConvention(self.convention))
        object.__setattr__(self, "metric", MetricKind(self.metric))
        if self.kind is CurvatureKind.BOX1:
            raise ValueError("the flow is driven by a Ricci curvature, not Box1")
        if self.mean not in ("arithmetic", "weighted"):
            raise ValueError("mean must be 'arithmetic' or 'weighted'")
        if not 0 < self.prune_keep_fraction <= 1:
            raise ValueError("prune_keep_fraction must lie in (0, 1]")
        if not self.min_weight > 0:
            raise ValueError("min_weight must be positive")
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")

    @property
    def normalizes(self) -> bool:
        if self.normalize_curvature is None:
            return self.kind is CurvatureKind.GRAPH_FORMAN
        return self.normalize_curvature


@dataclass(frozen=True)
class StepReport:
    curvature: np.ndarray
    mean_curvature: float
    variance: float
    max_deviation: float
    clamped: int
    pruned: tuple = ()
    threshold: float = -math.inf


@dataclass
class FlowState:
    iteration: int
    edges: list  # label pairs
    weights: np.ndarray
    curvature: np.ndarray
    mean_curvature: float
    variance: float
    pruned: tuple = ()


@dataclass
class FlowTrace:
    states: list = field(default_factory=list)
    converged: bool = False
    vanished: bool = False

    def __len__(self) -> int:
        return len(self.states)

    @property
    def variances(self) -> list[float]:
        return [s.variance for s in self.states]


def _stable_mean(values: np.ndarray, weights: np.ndarray | None = None) -> float:
    # offset by the first value so constant inputs give that value exactly
    ref = float(values[0])
    with np.errstate(over="ignore", invalid="ignore"):
        dev = values - ref
        if weights is not None:
            dev = dev * weights
    if not np.all(np.isfinite(dev)):
        return math.nan
    if weights is None:
        return ref + math.fsum(dev) / len(values)
    return ref + math.fsum(dev) / math.fsum(weights)


def _variance(values: np.ndarray) -> float:
    if len(values) == 0:
        return 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.var(values))


def flow_curvature(g: WeightedGraph, c: CellComplex2 | None, cfg: FlowConfig) -> np.ndarray:
    if cfg.kind is CurvatureKind.GRAPH_FORMAN:
        return forman_graph_all(g)
    if c is None:
        c = build_complex(g, cfg.max_len)
    if c.base is not g:
        raise ValueError("complex is built over a different graph")
    if cfg.kind is CurvatureKind.FULL_FORMAN:
        return forman_full_all(c)
    return haantjes_ricci_all(c, cfg.convention, cfg.metric)


def _carry_faces(c: CellComplex2 | None, g_new: WeightedGraph, keep: np.ndarray) -> CellComplex2 | None:
    if c is None:
        return None
    faces, fw = [], []
    for f, fe, w in zip(c.faces, c.face_edges, c.face_weights):
        if all(keep[x] for x in fe):
            faces.append(f)
            fw.append(w)
    return CellComplex2.from_faces(g_new, faces, fw)


def flow_step(
    g: WeightedGraph, c: CellComplex2 | None, cfg: FlowConfig
) -> tuple[WeightedGraph, CellComplex2 | None, StepReport]:
    """One unit time step ``w <- w - step * (Ric - mean Ric) * w``.

    Weights are clamped below at ``cfg.min_weight``.  Pruning then removes
    the edges whose new weight lies strictly below the
    ``ceil(keep_fraction * |E|)``-th largest weight, so ties at the cut are
    kept and at least that many edges survive.
    """
    if g.n_edges == 0:
        raise FlowError("graph has no edges")
    if cfg.kind is not CurvatureKind.GRAPH_FORMAN and c is None:
        c = build_complex(g, cfg.max_len)
    ric = flow_curvature(g, c, cfg)
    if not np.all(np.isfinite(ric)):
        raise FlowError("curvature is not finite; the weights have diverged")
    drive = ric
    if cfg.normalizes:
        scale = float(np.max(np.abs(ric)))
        if scale > 0:
            drive = ric / scale
    w = np.asarray(g.edge_weights, dtype=float)
    mean = _stable_mean(drive, w if cfg.mean == "weighted" else None)
    with np.errstate(over="ignore", invalid="ignore"):
        new_w = w - cfg.step * (drive - mean) * w
    if not (math.isfinite(mean) and np.all(np.isfinite(new_w))):
        raise FlowError("flow step overflowed; try a smaller step")
    clamped = int(np.count_nonzero(new_w < cfg.min_weight))
    new_w = np.maximum(new_w, cfg.min_weight)

    m = math.ceil(round(cfg.prune_keep_fraction * g.n_edges, 9))
    thr = float(np.sort(new_w)[::-1][m - 1])
    keep = new_w >= thr
    if not keep.any():
        raise FlowError("all edges pruned")
    pruned = tuple(g.edge_labels(e) for e in np.flatnonzero(~keep))
    g_new = g.with_edge_weights(new_w, keep)
    c_new = _carry_faces(c, g_new, keep)
    var = _variance(ric)
    report = StepReport(ric, mean, var, float(np.max(np.abs(drive - mean))), clamped, pruned, thr)
    return g_new, c_new, report


def run_flow(g: WeightedGraph, c: CellComplex2 | None, cfg: FlowConfig) -> FlowTrace:
    """Iterate :func:`flow_step` and record weights and curvature per iteration.

    Stops early when the curvature variance falls below ``cfg.stop_variance``
    or the graph loses all its edges.
    """
    if g.n_edges == 0:
        raise FlowError("graph has no edges")
    if cfg.kind is not CurvatureKind.GRAPH_FORMAN and c is None:
        c = build_complex(g, cfg.max_len)
    trace = FlowTrace()

    def record(it, graph, complex_, pruned):
        ric = flow_curvature(graph, complex_, cfg) if graph.n_edges else np.zeros(0)
        mean = _stable_mean(ric) if len(ric) else math.nan
        var = _variance(ric)
        edges = [graph.edge_labels(e) for e in range(graph.n_edges)]
        trace.states.append(FlowState(it, edges, np.array(graph.edge_weights), ric, mean, var, pruned))
        return var

    var = record(0, g, c, ())
    for it in range(1, cfg.iterations + 1):
        if var < cfg.stop_variance:
            trace.converged = True
            break
        g, c, rep = flow_step(g, c, cfg)
        if g.n_edges == 0:
            trace.vanished = True
            break
        var = record(it, g, c, rep.pruned)
    return trace

