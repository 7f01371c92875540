"""Epsilon-nets of finite metric spaces and their intersection patterns."""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import WeightedGraph


class MetricSpaceError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Finite point set with a dense distance matrix.

    The axioms are checked on construction: exhaustively up to
    ``exhaustive_limit`` points and on random triples beyond.
    """

    ids: tuple
    distances: np.ndarray = field(repr=False)
    coordinates: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        D = np.asarray(self.distances, dtype=float)
        object.__setattr__(self, "distances", D)
        object.__setattr__(self, "ids", tuple(self.ids))
        n = len(self.ids)
        if D.shape != (n, n):
            raise MetricSpaceError("distance matrix does not match the ids")
        if np.any(D < 0) or np.any(~np.isfinite(D)):
            raise MetricSpaceError("distances must be finite and nonnegative")
        if np.any(np.diag(D) != 0):
            raise MetricSpaceError("d(i, i) must be 0")
        if np.max(np.abs(D - D.T), initial=0.0) > 1e-12:
            raise MetricSpaceError("distances must be symmetric")
        _check_triangle(D)

    @classmethod
    def from_coordinates(cls, X, ids=None) -> "FiniteMetricSpace":
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        from scipy.spatial.distance import cdist

        D = cdist(X, X)
        D = (D + D.T) / 2
        np.fill_diagonal(D, 0.0)
        ids = range(len(X)) if ids is None else ids
        return cls(tuple(ids), D, X)

    def __len__(self) -> int:
        return len(self.ids)


def _check_triangle(D: np.ndarray, exhaustive_limit: int = 200, samples: int = 200_000, tol: float = 1e-9) -> None:
    n = len(D)
    if n < 3:
        return
    if n <= exhaustive_limit:
        for k in range(n):
            # d(i,j) <= d(i,k) + d(k,j) for all i, j at once
            if np.any(D > D[:, k][:, None] + D[k, :][None, :] + tol * (1 + D)):
                raise MetricSpaceError("triangle inequality violated")
        return
    rng = np.random.default_rng(0)
    i, j, k = rng.integers(0, n, size=(3, samples))
    if np.any(D[i, j] > D[i, k] + D[k, j] + tol * (1 + D[i, j])):
        raise MetricSpaceError("triangle inequality violated")


# ---------------------------------------------------------------------------
# sample spaces


def circle_space(n: int, circumference: float = 10.0, seed: int = 0) -> FiniteMetricSpace:
    """Uniform sample of a circle with its arc-length metric."""
    rng = np.random.default_rng(seed)
    s = np.sort(rng.uniform(0, circumference, n))
    diff = np.abs(s[:, None] - s[None, :])
    D = np.minimum(diff, circumference - diff)
    np.fill_diagonal(D, 0.0)
    theta = 2 * np.pi * s / circumference
    r = circumference / (2 * np.pi)
    return FiniteMetricSpace(tuple(range(n)), D, np.c_[r * np.cos(theta), r * np.sin(theta)])


def sphere_space(n: int, seed: int = 0) -> FiniteMetricSpace:
    """Uniform sample of the unit 2-sphere with the great-circle metric."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, 3))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    D = np.arccos(np.clip(X @ X.T, -1.0, 1.0))
    D = (D + D.T) / 2
    np.fill_diagonal(D, 0.0)
    return FiniteMetricSpace(tuple(range(n)), D, X)


def torus_space(n: int, sides: tuple[float, float] = (1.0, 1.0), seed: int = 0) -> FiniteMetricSpace:
    """Uniform sample of a flat torus with the quotient (wrap-around) metric."""
    rng = np.random.default_rng(seed)
    L = np.asarray(sides, dtype=float)
    X = rng.uniform(0, 1, (n, 2)) * L
    diff = np.abs(X[:, None, :] - X[None, :, :])
    diff = np.minimum(diff, L - diff)
    D = np.sqrt((diff**2).sum(-1))
    np.fill_diagonal(D, 0.0)
    return FiniteMetricSpace(tuple(range(n)), D, X)


# ---------------------------------------------------------------------------
# nets


@dataclass(frozen=True)
class EpsilonNet:
    space: FiniteMetricSpace = field(repr=False)
    centers: tuple[int, ...]
    eps: float
    pattern: WeightedGraph = field(repr=False)

    def separation_ok(self) -> bool:
        c = list(self.centers)
        D = self.space.distances[np.ix_(c, c)]
        off = ~np.eye(len(c), dtype=bool)
        return bool(np.all(D[off] > self.eps))

    def covering_ok(self) -> bool:
        D = self.space.distances[:, list(self.centers)]
        return bool(np.all(D.min(axis=1) <= self.eps))


def farthest_point_order(X: FiniteMetricSpace, start: int = 0) -> list[int]:
    """Greedy farthest-first ordering of all points (ties to lower index)."""
    n = len(X)
    order = [start]
    dmin = X.distances[start].copy()
    used = np.zeros(n, dtype=bool)
    used[start] = True
    for _ in range(n - 1):
        cand = np.where(used, -np.inf, dmin)
        k = int(np.argmax(cand))
        order.append(k)
        used[k] = True
        dmin = np.minimum(dmin, X.distances[k])
    return order


def epsilon_net(X: FiniteMetricSpace, eps: float, order: Sequence[int] | str | None = None) -> EpsilonNet:
    """Greedy maximal ``eps``-separated set and its intersection pattern.

    Points are visited in ``order`` (canonical index order by default, or
    ``"farthest"``) and a point becomes a center when it is farther than
    ``eps`` from every existing center.  Maximality gives covering at radius
    ``eps``.  Centers are joined when their closed ``eps``-balls can meet,
    i.e. ``d <= 2 eps``.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    n = len(X)
    if n == 0:
        raise MetricSpaceError("empty metric space")
    if order is None or order == "canonical":
        seq = range(n)
    elif order == "farthest":
        seq = farthest_point_order(X)
    else:
        seq = [int(i) for i in order]
        if sorted(seq) != list(range(n)):
            raise ValueError("order must be a permutation of the point indices")
    D = X.distances
    centers: list[int] = []
    dmin = np.full(n, np.inf)
    for p in seq:
        if dmin[p] > eps:
            centers.append(p)
            dmin = np.minimum(dmin, D[p])
    labels = [X.ids[c] for c in centers]
    edges = [
        (labels[a], labels[b])
        for a, b in itertools.combinations(range(len(centers)), 2)
        if D[centers[a], centers[b]] <= 2 * eps
    ]
    return EpsilonNet(X, tuple(centers), float(eps), WeightedGraph(labels, edges))


def bounded_geometry_check(net: EpsilonNet) -> tuple[int, dict[int, int]]:
    """Maximum pattern degree and the degree histogram."""
    deg = net.pattern.degrees()
    return int(deg.max(initial=0)), dict(sorted(Counter(deg.tolist()).items()))


@dataclass(frozen=True)
class CurvatureBoundReport:
    max_degree: int
    min_curvature: float
    bound: int  # 1 - 2 k1
    sharp_bound: int  # 4 - 2 k1
    margin: float
    violations: int


def curvature_bound_check(net: EpsilonNet) -> CurvatureBoundReport:
    """Check ``4 - deg(u) - deg(v) >= 1 - 2 k1`` on every pattern edge."""
    g = net.pattern
    k1 = bounded_geometry_check(net)[0]
    deg = g.degrees()
    F = 4 - deg[g.edges[:, 0]] - deg[g.edges[:, 1]] if g.n_edges else np.zeros(0, dtype=np.int64)
    bound = 1 - 2 * k1
    fmin = float(F.min()) if len(F) else math.inf
    return CurvatureBoundReport(
        k1, fmin, bound, 4 - 2 * k1, fmin - bound, int(np.count_nonzero(F < bound))
    )


# ---------------------------------------------------------------------------
# simplex thickness


def cayley_menger_volume(P: np.ndarray) -> float:
    """``j``-volume of the simplex spanned by the ``j + 1`` rows of ``P``."""
    P = np.asarray(P, dtype=float)
    m = len(P)
    if m == 1:
        return 1.0
    j = m - 1
    D2 = ((P[:, None, :] - P[None, :, :]) ** 2).sum(-1)
    CM = np.ones((m + 1, m + 1))
    CM[0, 0] = 0.0
    CM[1:, 1:] = D2
    coef = (-1) ** (j + 1) / (2**j * math.factorial(j) ** 2)
    v2 = coef * np.linalg.det(CM)
    return math.sqrt(v2) if v2 > 0 else 0.0


def thickness(vertices, rel_tol: float = 1e-6) -> float:
    """Minimum of ``Vol_j / diam^j`` over all faces of a simplex.

    0-faces count as 1.  A face whose normalized volume is below
    ``rel_tol`` is treated as degenerate and gives 0; the determinant loses
    about half the digits to the square root, hence the loose default.
    """
    V = np.asarray(vertices, dtype=float)
    if V.ndim == 1:
        V = V[None, :]
    if len(V) < 1:
        raise ValueError("a simplex needs at least one vertex")
    best = 1.0
    for k in range(2, len(V) + 1):
        for idx in itertools.combinations(range(len(V)), k):
            P = V[list(idx)]
            diam = max(np.linalg.norm(a - b) for a, b in itertools.combinations(P, 2))
            if diam == 0:
                return 0.0
            ratio = cayley_menger_volume(P) / diam ** (k - 1)
            if ratio < rel_tol:
                return 0.0
            best = min(best, ratio)
    return best
