"""Grid complexes built from grayscale images and curvature-based pixel sampling.

Pixels are nodes (index ``r * width + c``), 4-adjacent pixels are joined by
an edge and every 2x2 block of pixels spans a quadrangular face.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curvature import (
    CurvatureField,
    CurvatureKind,
    HaantjesConvention,
    forman_full_all,
    forman_graph_all,
    forman_grid_all,
    haantjes_ricci_all,
    scalar_curvature,
)
from .graph import CellComplex2, WeightedGraph
from .sampling import Ranking, SampleSpec, sample_vertices


class ImageError(ValueError):
    pass


@dataclass(frozen=True)
class GrayImage:
    """Row-major grayscale image with intensities in ``[0, 1]``."""

    width: int
    height: int
    intensities: np.ndarray = field(repr=False)

    def __post_init__(self):
        I = np.asarray(self.intensities, dtype=float).reshape(-1)
        if self.width < 1 or self.height < 1:
            raise ImageError("image dimensions must be positive")
        if I.size != self.width * self.height:
            raise ImageError(f"{I.size} intensities for a {self.width}x{self.height} image")
        if not np.all(np.isfinite(I)):
            raise ImageError("intensities must be finite")
        if I.size and (I.min() < 0 or I.max() > 1):
            raise ImageError("intensities must lie in [0, 1]")
        I.flags.writeable = False
        object.__setattr__(self, "intensities", I)

    @classmethod
    def from_array(cls, A, maxval: float | None = None) -> "GrayImage":
        """Wrap a 2-D array; integer arrays are divided by ``maxval`` (255 by default)."""
        A = np.asarray(A)
        if A.ndim != 2:
            raise ImageError("expected a 2-D array")
        if maxval is None and np.issubdtype(A.dtype, np.integer):
            maxval = 255
        A = A.astype(float) / maxval if maxval else A.astype(float)
        return cls(A.shape[1], A.shape[0], A.ravel())

    @property
    def array(self) -> np.ndarray:
        return self.intensities.reshape(self.height, self.width)


@dataclass(frozen=True)
class GridComplex:
    image: GrayImage = field(repr=False)
    complex: CellComplex2 = field(repr=False)
    eps_w: float
    embedded_metric: bool = False
    diagonal: str = "top-left/bottom-right"

    @property
    def graph(self) -> WeightedGraph:
        return self.complex.base

    def metadata(self) -> dict:
        return {
            "width": self.image.width,
            "height": self.image.height,
            "eps_w": self.eps_w,
            "embedded_metric": self.embedded_metric,
            "face_weight": "heron-split",
            "diagonal": self.diagonal,
        }


def _grid_pairs(h: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(h * w).reshape(h, w)
    horiz = np.c_[idx[:, :-1].ravel(), idx[:, 1:].ravel()]
    vert = np.c_[idx[:-1, :].ravel(), idx[1:, :].ravel()]
    return horiz, vert


def heron(a, b, c):
    """Triangle area from side lengths (Kahan's stable ordering)."""
    s = np.sort(np.stack(np.broadcast_arrays(a, b, c)), axis=0)[::-1]
    a, b, c = s
    prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return 0.25 * np.sqrt(np.maximum(prod, 0.0))


def grid_from_image(img: GrayImage, eps_w: float = 1e-3, embedded_metric: bool = False) -> GridComplex:
    """Pixel grid complex of an image.

    Edge weights are ``|dI| + eps_w``, or the embedded length
    ``sqrt(1 + dI**2)`` when ``embedded_metric`` is set.  Each quad is cut
    along its top-left/bottom-right diagonal in the height field
    ``(c, r, I)`` and weighted by the sum of the two Heron areas.
    """
    w, h = img.width, img.height
    if w < 2 or h < 2:
        raise ImageError("grid complexes need width and height >= 2")
    if not eps_w > 0:
        raise ImageError("eps_w must be positive")
    I = img.intensities
    horiz, vert = _grid_pairs(h, w)
    pairs = np.r_[horiz, vert]
    dI = np.abs(I[pairs[:, 0]] - I[pairs[:, 1]])
    ew = np.sqrt(1 + dI**2) if embedded_metric else dI + eps_w
    g = WeightedGraph(range(h * w), [(int(a), int(b), x) for (a, b), x in zip(pairs, ew)])

    A = img.array
    tl, tr = A[:-1, :-1], A[:-1, 1:]
    bl, br = A[1:, :-1], A[1:, 1:]
    top = np.sqrt(1 + (tr - tl) ** 2)
    bottom = np.sqrt(1 + (br - bl) ** 2)
    left = np.sqrt(1 + (bl - tl) ** 2)
    right = np.sqrt(1 + (br - tr) ** 2)
    diag = np.sqrt(2 + (br - tl) ** 2)
    area = (heron(top, right, diag) + heron(left, bottom, diag)).ravel()

    r, c = np.divmod(np.arange((h - 1) * (w - 1)), w - 1)
    base = r * w + c
    faces = np.c_[base, base + 1, base + w + 1, base + w]
    cx = CellComplex2.from_faces(g, faces.tolist(), area)
    return GridComplex(img, cx, float(eps_w), embedded_metric)


def weighted_gaussian_grid(img: GrayImage, padding: str = "replicate") -> np.ndarray:
    """Discrete weighted Gaussian curvature of a flat pixel grid.

    The grid itself is flat, so this is the 5-point Laplacian of the
    intensity.  ``padding`` is ``"replicate"`` or ``"periodic"``; returns a
    row-major node array.
    """
    mode = {"replicate": "edge", "periodic": "wrap"}.get(padding)
    if mode is None:
        raise ValueError("padding must be 'replicate' or 'periodic'")
    P = np.pad(img.array, 1, mode=mode)
    lap = P[:-2, 1:-1] + P[2:, 1:-1] + P[1:-1, :-2] + P[1:-1, 2:] - 4 * P[1:-1, 1:-1]
    return lap.ravel()


def grid_curvature(gc: GridComplex, kind: CurvatureKind | str, formula: str = "grid") -> CurvatureField:
    """Edge curvature of a grid complex.

    Full Forman uses the square-grid formula unless ``formula="general"``;
    Haantjes sums over the quads with the edge weights as lengths.
    """
    kind = CurvatureKind(kind)
    c = gc.complex
    params = {"grid": gc.metadata()}
    if kind is CurvatureKind.GRAPH_FORMAN:
        vals = forman_graph_all(c.base)
    elif kind is CurvatureKind.FULL_FORMAN:
        if formula not in ("grid", "general"):
            raise ValueError("formula must be 'grid' or 'general'")
        vals = forman_grid_all(c) if formula == "grid" else forman_full_all(c)
        params["formula"] = formula
    elif kind is CurvatureKind.HAANTJES:
        vals = haantjes_ricci_all(c, HaantjesConvention.PATH_CHORD, lengths=np.asarray(c.base.edge_weights))
    else:
        raise ValueError("image sampling supports graph-forman, full-forman and haantjes")
    return CurvatureField(kind, "edge", vals, params)


def image_sample(
    gc: GridComplex,
    kind: CurvatureKind | str,
    retain_fraction: float = 0.2,
    target: str = "vertex",
    ranking: Ranking | str = Ranking.ABS_VALUE,
    formula: str = "grid",
) -> np.ndarray:
    """Boolean ``(height, width)`` mask of the pixels kept by vertex sampling."""
    if target != "vertex":
        raise ValueError("image grids are sampled by vertex only")
    field_ = scalar_curvature(gc.graph, grid_curvature(gc, kind, formula))
    res = sample_vertices(gc.graph, field_, SampleSpec("vertex", retain_fraction, ranking))
    mask = np.zeros(gc.graph.n_nodes, dtype=bool)
    mask[list(res.nodes)] = True
    return mask.reshape(gc.image.height, gc.image.width)
