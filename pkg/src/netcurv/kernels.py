"""Curvature and Laplacian kernels, kernel distances and MDS embedding."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .curvature import CurvatureField, box1_matrix
from .graph import CellComplex2, WeightedGraph
from .matrices import (
    INDEFINITE,
    NEGATIVE,
    POSITIVE,
    KernelMatrix,
    negative_type_check,
    psd_check,
)

__all__ = [
    "KernelMatrix",
    "psd_check",
    "negative_type_check",
    "curvature_costs",
    "cost_kernel",
    "curvature_cost_kernel",
    "box1_kernel",
    "lift_to_nodes",
    "schoenberg_transform",
    "power_transform",
    "cross_similarity",
    "kernel_distance",
    "kernel_distance_matrix",
    "MDSConfig",
    "Embedding",
    "stress",
    "mds_embed",
]


# ---------------------------------------------------------------------------
# kernels on graphs


def curvature_costs(field: CurvatureField, eps: float = 1e-3) -> np.ndarray:
    """Edge costs ``exp(-Ric)`` rescaled affinely onto ``[eps, 1]``.

    Negatively curved edges become the expensive ones.  A constant field maps
    to all-ones.
    """
    if field.target != "edge":
        raise ValueError("curvature costs need an edge field")
    with np.errstate(over="ignore"):
        x = np.exp(-np.asarray(field.values, dtype=float))
    if len(x) == 0:
        return x
    lo, hi = float(x.min()), float(x.max())
    if not math.isfinite(hi):
        # exp overflow: rank-preserving fallback on the raw curvature
        x = -np.asarray(field.values, dtype=float)
        lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        return np.ones_like(x)
    return eps + (1 - eps) * (x - lo) / (hi - lo)


def cost_kernel(g: WeightedGraph, costs: np.ndarray, t: float = 1.0) -> KernelMatrix:
    """``exp(-t * delta)`` where ``delta`` is the shortest-path distance under ``costs``."""
    if not t > 0:
        raise ValueError("t must be positive")
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import dijkstra

    n = g.n_nodes
    costs = np.asarray(costs, dtype=float)
    if costs.shape != (g.n_edges,):
        raise ValueError("one cost per edge required")
    i, j = g.edges[:, 0], g.edges[:, 1]
    A = csr_matrix((np.r_[costs, costs], (np.r_[i, j], np.r_[j, i])), shape=(n, n))
    delta = dijkstra(A, directed=False) if n else np.zeros((0, 0))
    K = np.exp(-t * delta)  # exp(-inf) = 0 across components
    K = (K + K.T) / 2
    np.fill_diagonal(K, 1.0)
    return KernelMatrix.tagged(g.labels, K, diagonal="unit")


def curvature_cost_kernel(g: WeightedGraph, field: CurvatureField, t: float = 1.0, eps: float = 1e-3) -> KernelMatrix:
    """Node kernel from edge curvature via :func:`curvature_costs`."""
    if len(field) != g.n_edges:
        raise ValueError("field does not cover the edge set")
    return cost_kernel(g, curvature_costs(field, eps), t)


def box1_kernel(c: CellComplex2) -> KernelMatrix:
    """The Bochner operator as an edge-indexed kernel."""
    g = c.base
    index = [g.edge_labels(e) for e in range(g.n_edges)]
    return KernelMatrix.tagged(index, box1_matrix(c), diagonal="Box1(e,e)")


def lift_to_nodes(K: KernelMatrix, g: WeightedGraph) -> KernelMatrix:
    """Average an edge kernel onto nodes: ``P K P^T`` with ``P[v, e] = 1/deg(v)``.

    Isolated nodes get zero rows.  Positive semidefiniteness is preserved.
    """
    if len(K) != g.n_edges:
        raise ValueError("kernel is not indexed by the edges of g")
    P = np.zeros((g.n_nodes, g.n_edges))
    for v in range(g.n_nodes):
        inc = g.incident[v]
        if inc:
            P[v, list(inc)] = 1.0 / len(inc)
    return KernelMatrix.tagged(g.labels, P @ K.values @ P.T, diagonal="lifted")


# ---------------------------------------------------------------------------
# transforms


def schoenberg_transform(K: KernelMatrix | np.ndarray, t: float = 1.0, tol: float = 1e-8) -> KernelMatrix:
    """Entrywise ``exp(-t K)``, tagged by its measured spectrum."""
    if not t > 0:
        raise ValueError("t must be positive")
    index, vals = _unwrap(K)
    return KernelMatrix.tagged(index, np.exp(-t * vals), tol=tol)


def power_transform(K: KernelMatrix | np.ndarray, alpha: float, tol: float = 1e-9) -> KernelMatrix:
    """Entrywise ``K ** alpha`` for a nonnegative kernel and ``0 < alpha < 1``.

    When the input is of negative type the output is checked to be so as
    well; a failed check raises, since the transform guarantees it.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    index, vals = _unwrap(K)
    if np.any(vals < 0):
        raise ValueError("power transform needs a nonnegative kernel")
    out = vals**alpha
    out = (out + out.T) / 2
    if len(index) and negative_type_check(vals, tol)[0]:
        ok, lam = negative_type_check(out, tol)
        if not ok:
            raise ArithmeticError(f"negative type lost under power transform (eig {lam:g})")
        return KernelMatrix(index, out, NEGATIVE, lam, diagonal="conditionally negative")
    return KernelMatrix.tagged(index, out, tol=tol)


def _unwrap(K) -> tuple[tuple, np.ndarray]:
    if isinstance(K, KernelMatrix):
        return K.index, np.array(K.values)
    vals = np.asarray(K, dtype=float)
    return tuple(range(vals.shape[0])), vals


# ---------------------------------------------------------------------------
# kernel distance


def cross_similarity(K: KernelMatrix, P, Q) -> float:
    """Sum of ``K(p, q)`` over ``p`` in ``P`` and ``q`` in ``Q``."""
    ip, iq = K.position(list(P)), K.position(list(Q))
    return float(K.values[np.ix_(ip, iq)].sum())


@dataclass(frozen=True)
class KernelDistance:
    squared: float
    metric: bool

    @property
    def value(self) -> float:
        """The distance, or minus the root of ``|D^2|`` when ``D^2 < 0``."""
        return math.copysign(math.sqrt(abs(self.squared)), self.squared)


def kernel_distance(K: KernelMatrix, P, Q) -> KernelDistance:
    """Kernel distance between id sets from cross-similarities.

    ``metric`` is False when the squared distance came out negative, which
    can happen for kernels that are not positive definite.
    """
    P, Q = list(P), list(Q)
    if P == Q:
        return KernelDistance(0.0, True)
    d2 = cross_similarity(K, P, P) - 2 * cross_similarity(K, P, Q) + cross_similarity(K, Q, Q)
    return KernelDistance(d2, d2 >= 0)


def kernel_distance_matrix(K: KernelMatrix) -> np.ndarray:
    """Pairwise singleton kernel distances ``sqrt(K_pp - 2 K_pq + K_qq)``.

    Negative squared distances are clipped to zero.
    """
    v = K.values
    d = np.diag(v)
    D2 = d[:, None] + d[None, :] - 2 * v
    D = np.sqrt(np.maximum(D2, 0.0))
    np.fill_diagonal(D, 0.0)
    return (D + D.T) / 2


# ---------------------------------------------------------------------------
# MDS


@dataclass(frozen=True)
class MDSConfig:
    seed: int = 0
    dr_iterations: int = 500
    gamma: float = 0.5
    gd_iterations: int = 2000
    tol: float = 1e-14
    init: str = "classical"  # or "random"
    time_limit: float = 10.0


@dataclass
class Embedding:
    ids: tuple
    coordinates: np.ndarray
    cost: float
    log: list = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return self.coordinates.shape[1]


def stress(Y: np.ndarray, D: np.ndarray) -> float:
    """``sum_{i<j} (||y_i - y_j|| - D_ij)^2``."""
    diff = Y[:, None, :] - Y[None, :, :]
    dist = np.sqrt((diff**2).sum(-1))
    iu = np.triu_indices(len(Y), 1)
    return float(((dist[iu] - D[iu]) ** 2).sum())


def classical_scaling(D: np.ndarray, d: int) -> np.ndarray:
    n = len(D)
    H = np.eye(n) - np.ones((n, n)) / n
    B = -0.5 * H @ (D**2) @ H
    lam, V = np.linalg.eigh((B + B.T) / 2)
    order = np.argsort(lam)[::-1][:d]
    lam = np.maximum(lam[order], 0.0)
    Y = V[:, order] * np.sqrt(lam)
    if Y.shape[1] < d:
        Y = np.hstack([Y, np.zeros((n, d - Y.shape[1]))])
    return Y


def _prox_stress(Z: np.ndarray, Dv: np.ndarray, gamma: float) -> np.ndarray:
    # argmin_s gamma (|s| - D)^2 + 1/2 |s - z|^2, separately for each pair
    r = np.linalg.norm(Z, axis=1)
    target = (r + 2 * gamma * Dv) / (1 + 2 * gamma)
    scale = np.divide(target, r, out=np.ones_like(r), where=r > 0)
    out = Z * scale[:, None]
    zero = r == 0
    if np.any(zero):
        # any direction is optimal; use a fixed one for determinism
        out[zero] = 0.0
        out[zero, 0] = target[zero]
    return out


def _stress_grad(Y: np.ndarray, D: np.ndarray) -> np.ndarray:
    diff = Y[:, None, :] - Y[None, :, :]
    dist = np.sqrt((diff**2).sum(-1))
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.where(dist > 0, (dist - D) / dist, 0.0)
    np.fill_diagonal(coef, 0.0)
    return 2 * (coef[:, :, None] * diff).sum(axis=1)


def mds_embed(D, d: int = 3, cfg: MDSConfig = MDSConfig(), ids=None) -> Embedding:
    """Minimise the raw stress of an embedding of ``D`` into ``R^d``.

    Classical scaling provides the start, Douglas-Rachford splitting on the
    pair-difference formulation improves it, and backtracking gradient
    descent polishes the result.  Only downhill iterates are accepted, so
    the logged cost never increases.
    """
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError("D must be square")
    if np.any(np.isnan(D)):
        raise ValueError("D contains NaN")
    if np.max(np.abs(D - D.T), initial=0.0) > 1e-12:
        raise ValueError("D must be symmetric")
    if d < 1:
        raise ValueError("dimension must be at least 1")
    n = len(D)
    ids = tuple(range(n)) if ids is None else tuple(ids)
    if n <= 1:
        return Embedding(ids, np.zeros((n, d)), 0.0, [("init", 0.0)])

    t0 = time.monotonic()
    rng = np.random.default_rng(cfg.seed)
    if cfg.init == "classical":
        Y = classical_scaling(D, d)
    else:
        Y = rng.standard_normal((n, d))
    Y -= Y.mean(axis=0)
    best, best_cost = Y, stress(Y, D)
    log = [("init", best_cost)]

    # pair-difference operator A: y -> (y_i - y_j)_{i<j}
    iu, ju = np.triu_indices(n, 1)
    Dv = D[iu, ju]

    def project(Z):
        # least-squares y with A y closest to Z; A^T A = n I - 1 1^T on centred y
        S = np.zeros((n, d))
        np.add.at(S, iu, Z)
        np.add.at(S, ju, -Z)
        y = S / n
        return y - y.mean(axis=0)

    U = best[iu] - best[ju]
    for _ in range(cfg.dr_iterations):
        if best_cost <= cfg.tol or time.monotonic() - t0 > cfg.time_limit / 2:
            break
        y = project(U)
        X = y[iu] - y[ju]
        Zf = _prox_stress(2 * X - U, Dv, cfg.gamma)
        U = U + Zf - X
        c = stress(y, D)
        if c < best_cost:
            best, best_cost = y, c
            log.append(("dr", c))

    Y = best.copy()
    step = 1.0 / (2 * n)
    for _ in range(cfg.gd_iterations):
        if best_cost <= cfg.tol or time.monotonic() - t0 > cfg.time_limit:
            break
        g = _stress_grad(Y, D)
        gn = float((g**2).sum())
        if gn < 1e-30:
            break
        accepted = False
        for _ in range(40):
            cand = Y - step * g
            c = stress(cand, D)
            if c <= best_cost - 1e-4 * step * gn:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        Y, best_cost = cand, c
        log.append(("gd", c))
        step *= 2.0
    best = Y
    return Embedding(ids, best, stress(best, D), log)
