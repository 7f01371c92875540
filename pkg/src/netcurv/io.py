"""Reading and writing networks, fields, traces, kernels, embeddings and images.

All writers are byte-deterministic: numbers are printed with 12 significant
digits and rows follow the canonical node or edge order.
"""
from __future__ import annotations

import csv
import io
import logging
import os
import re
from pathlib import Path

import numpy as np

from .curvature import CurvatureField, CurvatureKind
from .discretization import FiniteMetricSpace
from .flow import FlowTrace
from .graph import WeightedGraph
from .imaging import GrayImage
from .kernels import Embedding
from .matrices import KernelMatrix

log = logging.getLogger(__name__)


class DataError(ValueError):
    """Malformed or invalid input data."""


def fmt(x: float) -> str:
    return "%.12g" % x


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# networks


def _number(tok: str, path, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise DataError(f"{path}:{lineno}: cannot parse weight {tok!r}") from None


def _edge_records(path, fmt_: str):
    text = Path(path).read_text(encoding="utf-8")
    if fmt_ == "csv":
        rows = [(i, r) for i, r in enumerate(csv.reader(io.StringIO(text)), 1) if r and not r[0].startswith(("%", "#"))]
        if not rows:
            return
        lineno, header = rows[0]
        cols = [h.strip().lower() for h in header]
        try:
            su = cols.index("source") if "source" in cols else cols.index("u")
            sv = cols.index("target") if "target" in cols else cols.index("v")
        except ValueError:
            raise DataError(f"{path}:{lineno}: CSV header needs source,target columns") from None
        sw = cols.index("weight") if "weight" in cols else None
        for lineno, r in rows[1:]:
            if len(r) != len(cols):
                raise DataError(f"{path}:{lineno}: expected {len(cols)} fields, got {len(r)}")
            w = _number(r[sw], path, lineno) if sw is not None else 1.0
            yield lineno, r[su].strip(), r[sv].strip(), w
        return
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith(("%", "#")):
            continue
        tok = s.split()
        if len(tok) < 2:
            raise DataError(f"{path}:{lineno}: expected 'u v [weight]', got {line!r}")
        # KONECT files may carry a trailing timestamp column; only the third is used
        w = _number(tok[2], path, lineno) if len(tok) > 2 else 1.0
        yield lineno, tok[0], tok[1], w


def _guess_format(path) -> str:
    return "csv" if str(path).lower().endswith(".csv") else "tsv"


def read_node_weights(path) -> dict[str, float]:
    """Two columns ``node weight`` (whitespace or comma separated)."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        s = line.strip()
        if not s or s.startswith(("%", "#")):
            continue
        tok = re.split(r"[,\s]+", s)
        if len(tok) != 2:
            raise DataError(f"{path}:{lineno}: expected 'node weight'")
        if lineno == 1 and tok[1].lower() == "weight":
            continue
        out[tok[0]] = _number(tok[1], path, lineno)
    return out


def parse_network(
    path,
    fmt_hint: str | None = None,
    node_weights=None,
    clamp_min: float | None = None,
) -> WeightedGraph:
    """Read an edge list into a :class:`WeightedGraph`.

    ``fmt_hint`` is ``"tsv"`` (whitespace separated ``u v [w]``, lines
    starting with ``%`` or ``#`` skipped) or ``"csv"`` (header with
    ``source,target[,weight]``); by default it follows the file suffix.
    Nodes are indexed in order of first appearance.  Duplicate edges are
    merged with summed weights and self-loops dropped, each with a warning.
    Nonpositive weights raise :class:`DataError` unless ``clamp_min`` is
    given, in which case they are raised to it.
    """
    fmt_ = fmt_hint or _guess_format(path)
    if fmt_ not in ("tsv", "csv"):
        raise DataError(f"unknown network format {fmt_!r}")
    labels: dict[str, int] = {}
    weights: dict[tuple[str, str], float] = {}
    where: dict[tuple[str, str], int] = {}
    for lineno, u, v, w in _edge_records(path, fmt_):
        for x in (u, v):
            labels.setdefault(x, len(labels))
        if u == v:
            log.warning("%s:%d: dropping self-loop at %r", path, lineno, u)
            continue
        if not np.isfinite(w) or w <= 0:
            if clamp_min is None or not np.isfinite(w):
                raise DataError(f"{path}:{lineno}: nonpositive or invalid weight {w!r}")
            w = max(w, clamp_min)
        key = (u, v) if labels[u] < labels[v] else (v, u)
        if key in weights:
            log.warning("%s:%d: duplicate edge %s-%s merged (line %d)", path, lineno, u, v, where[key])
            weights[key] += w
        else:
            weights[key] = w
            where[key] = lineno
    nw = None
    if node_weights is not None:
        table = read_node_weights(node_weights) if isinstance(node_weights, (str, os.PathLike)) else dict(node_weights)
        unknown = set(table) - set(labels)
        if unknown:
            raise DataError(f"node weights for unknown nodes: {sorted(unknown)[:5]}")
        bad = [k for k, x in table.items() if not x > 0]
        if bad and clamp_min is None:
            raise DataError(f"nonpositive node weights: {bad[:5]}")
        nw = {k: max(x, clamp_min) if clamp_min is not None else x for k, x in table.items()}
    return WeightedGraph(list(labels), [(u, v, w) for (u, v), w in weights.items()], nw)


def write_network(g: WeightedGraph, path) -> None:
    """Tab-separated ``u v w`` edge list in canonical edge order."""
    lines = [f"{g.labels[i]}\t{g.labels[j]}\t{fmt(w)}" for (i, j), w in zip(g.edges, g.edge_weights)]
    _write_text(path, "".join(x + "\n" for x in lines))


def write_node_table(g: WeightedGraph, path) -> None:
    """Sidecar mapping dense node indices to labels."""
    rows = [(i, lab, fmt(w)) for i, (lab, w) in enumerate(zip(g.labels, g.node_weights))]
    _write_text(path, _csv_text(["index", "label", "weight"], rows))


# ---------------------------------------------------------------------------
# DOT


def _dot_id(x) -> str:
    return '"' + str(x).replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(g: WeightedGraph, field: CurvatureField, path) -> None:
    """Undirected DOT drawing with edges styled by curvature.

    Pen width is ``1 + 4 |k| / max |k|`` and colour is red for negative,
    blue for positive and gray for zero curvature.
    """
    if field.target != "edge" or len(field) != g.n_edges:
        raise ValueError("field does not cover the edges of the graph")
    vals = field.values
    top = float(np.max(np.abs(vals))) if len(vals) else 0.0
    out = ["graph G {"]
    for lab in g.labels:
        out.append(f"  {_dot_id(lab)};")
    for (i, j), k in zip(g.edges, vals):
        pw = 1.0 + 4.0 * abs(k) / top if top > 0 else 1.0
        color = "red" if k < 0 else "blue" if k > 0 else "gray"
        out.append(
            f"  {_dot_id(g.labels[i])} -- {_dot_id(g.labels[j])} "
            f'[penwidth={fmt(pw)}, color={color}, label="{fmt(k)}"];'
        )
    out.append("}")
    _write_text(path, "\n".join(out) + "\n")


# ---------------------------------------------------------------------------
# CSV export and re-import


def export_csv(obj, path, g: WeightedGraph | None = None) -> None:
    """Write a field, flow trace, embedding or kernel as a headered CSV.

    Curvature fields need the graph ``g`` to label their rows.
    """
    if isinstance(obj, CurvatureField):
        if g is None:
            raise ValueError("exporting a curvature field needs its graph")
        if obj.target == "edge":
            if len(obj) != g.n_edges:
                raise ValueError("field does not cover the edges of the graph")
            rows = [(e, g.labels[i], g.labels[j], fmt(x)) for e, ((i, j), x) in enumerate(zip(g.edges, obj.values))]
            text = _csv_text(["edge", "u", "v", obj.kind.value], rows)
        else:
            if len(obj) != g.n_nodes:
                raise ValueError("field does not cover the nodes of the graph")
            rows = [(i, lab, fmt(x)) for i, (lab, x) in enumerate(zip(g.labels, obj.values))]
            text = _csv_text(["node", "label", obj.kind.value], rows)
    elif isinstance(obj, FlowTrace):
        rows = []
        for s in obj.states:
            for (u, v), w, k in zip(s.edges, s.weights, s.curvature):
                rows.append((s.iteration, u, v, fmt(w), fmt(k)))
        text = _csv_text(["iteration", "u", "v", "weight", "curvature"], rows)
    elif isinstance(obj, Embedding):
        d = obj.coordinates.shape[1]
        rows = [(i, *map(fmt, y)) for i, y in zip(obj.ids, obj.coordinates)]
        text = _csv_text(["id"] + [f"x{k + 1}" for k in range(d)], rows)
    elif isinstance(obj, KernelMatrix):
        rows = [(i, *map(fmt, r)) for i, r in zip(obj.index, obj.values)]
        text = _csv_text(["id"] + [str(i) for i in obj.index], rows)
    else:
        raise TypeError(f"cannot export {type(obj).__name__} as CSV")
    _write_text(path, text)


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    return rows[0], rows[1:]


def read_field_csv(path) -> CurvatureField:
    header, rows = _read_rows(path)
    kind = CurvatureKind(header[-1])
    target = "edge" if header[0] == "edge" else "node"
    return CurvatureField(kind, target, np.array([float(r[-1]) for r in rows]))


def read_trace_csv(path) -> list[tuple[int, str, str, float, float]]:
    _, rows = _read_rows(path)
    return [(int(r[0]), r[1], r[2], float(r[3]), float(r[4])) for r in rows]


def read_embedding_csv(path) -> tuple[list[str], np.ndarray]:
    _, rows = _read_rows(path)
    return [r[0] for r in rows], np.array([[float(x) for x in r[1:]] for r in rows])


def read_kernel_csv(path) -> KernelMatrix:
    header, rows = _read_rows(path)
    ids = header[1:]
    V = np.array([[float(x) for x in r[1:]] for r in rows]).reshape(len(ids), len(ids))
    if [r[0] for r in rows] != ids:
        raise DataError(f"{path}: row ids do not match the header")
    return KernelMatrix.tagged(ids, V)


def read_matrix_csv(path) -> np.ndarray:
    """Plain numeric matrix; a non-numeric first row is taken as a header."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise DataError(f"{path}: empty file")
    try:
        [float(x) for x in rows[0]]
    except ValueError:
        rows = rows[1:]
    try:
        A = np.array([[float(x) for x in r] for r in rows])
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
    if A.ndim != 2:
        raise DataError(f"{path}: rows have unequal length")
    return A


def write_matrix_csv(A: np.ndarray, path) -> None:
    A = np.atleast_2d(np.asarray(A))
    if A.dtype == bool:
        A = A.astype(np.int64)
    conv = str if np.issubdtype(A.dtype, np.integer) else fmt
    _write_text(path, "".join(",".join(conv(x) for x in r) + "\n" for r in A))


def read_points(path) -> FiniteMetricSpace:
    return FiniteMetricSpace.from_coordinates(read_matrix_csv(path))


def read_distances(path) -> FiniteMetricSpace:
    D = read_matrix_csv(path)
    try:
        return FiniteMetricSpace(tuple(range(len(D))), D)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# images


def _pgm_tokens(data: bytes):
    # header tokens with '#' comments removed, and the offset after the last one
    pos, toks = 0, []
    while len(toks) < 4:
        m = re.compile(rb"\s*(#[^\n]*\n\s*)*([^\s#]+)").match(data, pos)
        if m is None:
            raise DataError("truncated PGM header")
        toks.append(m.group(2))
        pos = m.end()
    return toks, pos


def read_pgm(path) -> GrayImage:
    """Read a plain (P2) or raw (P5) PGM file."""
    data = Path(path).read_bytes()
    (magic, w, h, maxval), pos = _pgm_tokens(data)
    try:
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise DataError(f"{path}: bad PGM header") from None
    if not 0 < maxval < 65536:
        raise DataError(f"{path}: bad maxval {maxval}")
    if magic == b"P2":
        vals = np.array(data[pos:].split(), dtype=np.int64)
    elif magic == b"P5":
        dt = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        body = data[pos + 1:]
        vals = np.frombuffer(body[: w * h * dt.itemsize], dtype=dt).astype(np.int64)
    else:
        raise DataError(f"{path}: not a P2/P5 PGM file")
    if vals.size != w * h:
        raise DataError(f"{path}: expected {w * h} pixels, found {vals.size}")
    if vals.size and (vals.min() < 0 or vals.max() > maxval):
        raise DataError(f"{path}: pixel values outside [0, maxval]")
    return GrayImage(w, h, vals / maxval)


def write_pgm(A, path, binary: bool = False) -> None:
    """Write a 2-D array (bool mask or intensities in [0, 1]) as 8-bit PGM."""
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError("expected a 2-D array")
    q = np.round(np.clip(A.astype(float), 0, 1) * 255).astype(np.uint8)
    h, w = q.shape
    if binary:
        Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + q.tobytes())
    else:
        body = "".join(" ".join(map(str, r)) + "\n" for r in q)
        _write_text(path, f"P2\n{w} {h}\n255\n{body}")


def read_image(path) -> GrayImage:
    """PGM by magic number, otherwise a CSV matrix of intensities in [0, 1]."""
    with open(path, "rb") as fh:
        head = fh.read(2)
    if head in (b"P2", b"P5"):
        return read_pgm(path)
    A = read_matrix_csv(path)
    try:
        return GrayImage(A.shape[1], A.shape[0], A.ravel())
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
