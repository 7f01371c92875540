"""Command-line interface: ``netcurv <command> [options]``.

Every command writes its outputs plus a ``config.json`` holding the fully
resolved options into ``--out``.  Files are staged in a temporary directory
and only moved into place once the command has succeeded.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from . import io as nio
from .curvature import CurvatureKind, HaantjesConvention, curvature_field, scalar_curvature
from .discretization import (
    MetricSpaceError,
    bounded_geometry_check,
    circle_space,
    curvature_bound_check,
    epsilon_net,
    sphere_space,
    torus_space,
)
from .flow import FlowConfig, FlowError, run_flow
from .graph import GraphError, MetricKind, build_complex, distance_matrix
from .imaging import ImageError, grid_curvature, grid_from_image, image_sample, weighted_gaussian_grid
from .kernels import (
    MDSConfig,
    box1_kernel,
    curvature_cost_kernel,
    kernel_distance_matrix,
    lift_to_nodes,
    mds_embed,
)
from .matrices import KernelMatrix
from .sampling import Ranking, SampleSpec, common_core, sample_edges, sample_vertices

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

log = logging.getLogger("netcurv")

KINDS = [k.value for k in CurvatureKind]
RICCI_KINDS = [k.value for k in CurvatureKind if k is not CurvatureKind.BOX1]


class Staging:
    """Collects output files in a temp dir and moves them into place on commit."""

    def __init__(self, out: Path):
        self.out = out
        self.files: list[str] = []

    def __enter__(self):
        self.out.parent.mkdir(parents=True, exist_ok=True)
        self.tmp = Path(tempfile.mkdtemp(prefix=".netcurv-", dir=self.out.parent))
        return self

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.tmp / name

    def __exit__(self, exc_type, exc, tb):
        try:
            if exc_type is None:
                self.out.mkdir(parents=True, exist_ok=True)
                for name in self.files:
                    os.replace(self.tmp / name, self.out / name)
        finally:
            shutil.rmtree(self.tmp, ignore_errors=True)
        return False


def _threads() -> int | None:
    raw = os.environ.get("NETCURV_THREADS")
    if raw is None:
        return None
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise argparse.ArgumentTypeError(f"NETCURV_THREADS must be a positive integer, got {raw!r}")
    return n


# ---------------------------------------------------------------------------
# parser


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--metric", choices=[m.value for m in MetricKind], default="path")
    g.add_argument("--haantjes-convention", choices=[c.value for c in HaantjesConvention], default="path-chord")
    g.add_argument("--max-cycle", type=int, choices=(3, 4), default=4)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path, default=Path("netcurv-out"))
    g.add_argument("--clamp-min", type=float, default=None, help="raise nonpositive input weights to this value")
    g.add_argument("--format", dest="fmt", choices=("tsv", "csv"), default=None, help="network file format")
    g.add_argument("--node-weights", type=Path, default=None)
    g.add_argument("-q", "--quiet", action="store_true")
    return p


def _fraction(s: str) -> float:
    x = float(s)
    if not 0 < x <= 1:
        raise argparse.ArgumentTypeError("must lie in (0, 1]")
    return x


def _positive(s: str) -> float:
    x = float(s)
    if not x > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="netcurv", description="Discrete curvature tools for networks, point clouds and images.")
    ap.add_argument("--version", action="version", version=f"netcurv {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_, description=help_)

    p = add("curvature", "edge curvature of a network (plus node scalar curvature and a DOT drawing)")
    p.add_argument("input")
    p.add_argument("--kind", choices=KINDS, default="graph-forman")

    p = add("sample", "curvature-ranked vertex or edge sampling")
    p.add_argument("input")
    p.add_argument("--kind", choices=RICCI_KINDS, default="graph-forman")
    p.add_argument("--target", choices=("vertex", "edge"), default="vertex")
    p.add_argument("--retain", type=_fraction, default=0.2)
    p.add_argument("--ranking", choices=[r.value for r in Ranking], default="abs")
    p.add_argument("--no-leaf-rule", action="store_true")

    p = add("core", "nodes kept by the samples of several curvature kinds")
    p.add_argument("input")
    p.add_argument("--kinds", default="graph-forman,full-forman,haantjes", help="comma-separated curvature kinds")
    p.add_argument("--target", choices=("vertex", "edge"), default="vertex")
    p.add_argument("--retain", type=_fraction, default=0.2)
    p.add_argument("--ranking", choices=[r.value for r in Ranking], default="abs")

    p = add("flow", "normalized Ricci flow with pruning")
    p.add_argument("input")
    p.add_argument("--kind", choices=RICCI_KINDS, default="graph-forman")
    p.add_argument("--iterations", type=int, default=5)
    p.add_argument("--keep", type=_fraction, default=0.9, help="fraction of edges kept by pruning each step")
    p.add_argument("--mean", choices=("arithmetic", "weighted"), default="arithmetic")
    p.add_argument("--step", type=_positive, default=1.0)
    p.add_argument("--min-weight", type=_positive, default=1e-6)

    p = add("kernel", "curvature-cost or Box1 kernel and its kernel distances")
    p.add_argument("input")
    p.add_argument("--source", choices=("cost", "box1"), default="cost")
    p.add_argument("--kind", choices=RICCI_KINDS, default="graph-forman")
    p.add_argument("--t", type=_positive, default=1.0, help="Schoenberg time for the cost kernel")

    p = add("embed", "stress-minimizing MDS of a distance matrix or network metric")
    p.add_argument("input", help="distance matrix CSV, or a network file with --network")
    p.add_argument("--network", action="store_true", help="read a network and embed its --metric distances")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--dr-iterations", type=int, default=500)
    p.add_argument("--gd-iterations", type=int, default=2000)

    p = add("epsnet", "epsilon-net and intersection pattern of a point cloud")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--points", type=Path, help="CSV of coordinates, one point per row")
    src.add_argument("--distances", type=Path, help="CSV distance matrix")
    src.add_argument("--generator", choices=("circle", "sphere", "torus"))
    p.add_argument("--n", type=int, default=500, help="sample size for --generator")
    p.add_argument("--eps", type=_positive, required=True)
    p.add_argument("--order", choices=("canonical", "farthest"), default="canonical")

    p = add("image-grid", "grid complex and weighted Gaussian curvature of an image")
    p.add_argument("input", help="PGM (P2/P5) or CSV intensity matrix")
    p.add_argument("--eps-w", type=_positive, default=1e-3)
    p.add_argument("--embedded-metric", action="store_true")
    p.add_argument("--padding", choices=("replicate", "periodic"), default="replicate")

    p = add("image-sample", "curvature-based pixel sampling of an image")
    p.add_argument("input", help="PGM (P2/P5) or CSV intensity matrix")
    p.add_argument("--kind", choices=RICCI_KINDS, default="full-forman")
    p.add_argument("--retain", type=_fraction, default=0.2)
    p.add_argument("--ranking", choices=[r.value for r in Ranking], default="abs")
    p.add_argument("--formula", choices=("grid", "general"), default="grid", help="full-Forman formula on the grid")
    p.add_argument("--eps-w", type=_positive, default=1e-3)
    p.add_argument("--embedded-metric", action="store_true")
    return ap


# ---------------------------------------------------------------------------
# commands


def _graph(args):
    return nio.parse_network(args.input, args.fmt, args.node_weights, args.clamp_min)


def _field(g, kind, args):
    return curvature_field(
        g,
        kind,
        max_len=args.max_cycle,
        convention=args.haantjes_convention,
        metric=args.metric,
    )


def _json(path, obj) -> None:
    nio._write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_curvature(args, st: Staging) -> dict:
    g = _graph(args)
    f = _field(g, args.kind, args)
    nio.write_node_table(g, st.path("nodes.csv"))
    nio.export_csv(f, st.path("curvature.csv"), g)
    nio.export_csv(scalar_curvature(g, f), st.path("scalar.csv"), g)
    nio.export_dot(g, f, st.path("graph.dot"))
    return {"nodes": g.n_nodes, "edges": g.n_edges, "params": f.params}


def _sample(g, kind, args):
    f = _field(g, kind, args)
    if args.target == "vertex":
        spec = SampleSpec("vertex", args.retain, args.ranking)
        return sample_vertices(g, scalar_curvature(g, f), spec)
    spec = SampleSpec("edge", args.retain, args.ranking, not getattr(args, "no_leaf_rule", False))
    return sample_edges(g, f, spec)


def _write_sample(res, st: Staging, prefix: str) -> None:
    g = res.source
    rows = [(i, g.labels[i]) for i in res.nodes]
    nio._write_text(st.path(f"{prefix}_nodes.csv"), nio._csv_text(["node", "label"], rows))
    nio.write_network(res.graph, st.path(f"{prefix}_edges.tsv"))


def cmd_sample(args, st: Staging) -> dict:
    g = _graph(args)
    res = _sample(g, args.kind, args)
    nio.write_node_table(g, st.path("nodes.csv"))
    _write_sample(res, st, "sample")
    return {"kept_nodes": len(res.nodes), "kept_edges": len(res.edges), "threshold": res.threshold}


def cmd_core(args, st: Staging) -> dict:
    kinds = [CurvatureKind(k.strip()) for k in args.kinds.split(",") if k.strip()]
    if len(kinds) < 2 or CurvatureKind.BOX1 in kinds:
        raise argparse.ArgumentTypeError("--kinds needs at least two Ricci curvature kinds")
    g = _graph(args)
    samples = [_sample(g, k, args) for k in kinds]
    core, sub = common_core(samples)
    nio.write_node_table(g, st.path("nodes.csv"))
    for k, s in zip(kinds, samples):
        _write_sample(s, st, f"sample_{k.value}")
    rows = [(i, g.labels[i]) for i in sorted(core)]
    nio._write_text(st.path("core_nodes.csv"), nio._csv_text(["node", "label"], rows))
    nio.write_network(sub, st.path("core_edges.tsv"))
    return {"core_size": len(core), "kinds": [k.value for k in kinds]}


def cmd_flow(args, st: Staging) -> dict:
    g = _graph(args)
    cfg = FlowConfig(
        kind=args.kind,
        mean=args.mean,
        iterations=args.iterations,
        prune_keep_fraction=args.keep,
        min_weight=args.min_weight,
        step=args.step,
        max_len=args.max_cycle,
        convention=args.haantjes_convention,
        metric=args.metric,
    )
    trace = run_flow(g, None, cfg)
    nio.write_node_table(g, st.path("nodes.csv"))
    nio.export_csv(trace, st.path("trace.csv"))
    last = trace.states[-1]
    lines = [f"{u}\t{v}\t{nio.fmt(w)}\n" for (u, v), w in zip(last.edges, last.weights)]
    nio._write_text(st.path("final_edges.tsv"), "".join(lines))
    return {
        "steps": len(trace) - 1,
        "converged": trace.converged,
        "vanished": trace.vanished,
        "variances": [float(nio.fmt(v)) for v in trace.variances],
    }


def cmd_kernel(args, st: Staging) -> dict:
    g = _graph(args)
    if args.source == "cost":
        K = curvature_cost_kernel(g, _field(g, args.kind, args), args.t)
    else:
        c = build_complex(g, args.max_cycle)
        K = lift_to_nodes(box1_kernel(c), g)
    # exported with node labels as ids
    K = KernelMatrix(tuple(g.labels), K.values, K.kind, K.min_eigenvalue, K.diagonal)
    nio.write_node_table(g, st.path("nodes.csv"))
    nio.export_csv(K, st.path("kernel.csv"))
    nio.export_csv(
        KernelMatrix(K.index, kernel_distance_matrix(K)), st.path("kernel_distance.csv")
    )
    return {"kernel_kind": K.kind, "min_eigenvalue": float(nio.fmt(K.min_eigenvalue or 0.0))}


def cmd_embed(args, st: Staging) -> dict:
    if args.network:
        g = _graph(args)
        D = distance_matrix(g, args.metric)
        if not np.all(np.isfinite(D)):
            raise nio.DataError("network is disconnected; distances are infinite")
        ids = g.labels
        nio.write_node_table(g, st.path("nodes.csv"))
    else:
        D = nio.read_matrix_csv(args.input)
        ids = tuple(range(len(D)))
    if args.dim < 1:
        raise argparse.ArgumentTypeError("--dim must be at least 1")
    # no wall-clock limit: reruns must be byte-identical
    cfg = MDSConfig(seed=args.seed, dr_iterations=args.dr_iterations, gd_iterations=args.gd_iterations, time_limit=math.inf)
    emb = mds_embed(D, args.dim, cfg, ids)
    nio.export_csv(emb, st.path("embedding.csv"))
    rows = [(k, stage, nio.fmt(c)) for k, (stage, c) in enumerate(emb.log)]
    nio._write_text(st.path("stress_log.csv"), nio._csv_text(["step", "stage", "stress"], rows))
    return {"stress": float(nio.fmt(emb.cost))}


def cmd_epsnet(args, st: Staging) -> dict:
    if args.points:
        X = nio.read_points(args.points)
    elif args.distances:
        X = nio.read_distances(args.distances)
    else:
        gen = {"circle": circle_space, "sphere": sphere_space, "torus": torus_space}[args.generator]
        X = gen(args.n, seed=args.seed)
    net = epsilon_net(X, args.eps, args.order)
    rows = [(k, c) for k, c in enumerate(net.centers)]
    nio._write_text(st.path("centers.csv"), nio._csv_text(["center", "point"], rows))
    nio.write_network(net.pattern, st.path("pattern.tsv"))
    k1, hist = bounded_geometry_check(net)
    rep = curvature_bound_check(net)
    return {
        "points": len(X),
        "centers": len(net.centers),
        "separated": net.separation_ok(),
        "covering": net.covering_ok(),
        "max_degree": k1,
        "degree_histogram": {str(k): v for k, v in hist.items()},
        "min_curvature": rep.min_curvature if math.isfinite(rep.min_curvature) else None,
        "curvature_bound": rep.bound,
        "bound_violations": rep.violations,
    }


def cmd_image_grid(args, st: Staging) -> dict:
    img = nio.read_image(args.input)
    gc = grid_from_image(img, args.eps_w, args.embedded_metric)
    g, c = gc.graph, gc.complex
    rows = [(e, i, j, nio.fmt(w)) for e, ((i, j), w) in enumerate(zip(g.edges, g.edge_weights))]
    nio._write_text(st.path("grid_edges.csv"), nio._csv_text(["edge", "u", "v", "weight"], rows))
    rows = [(k, *f, nio.fmt(w)) for k, (f, w) in enumerate(zip(c.faces, c.face_weights))]
    nio._write_text(st.path("grid_faces.csv"), nio._csv_text(["face", "a", "b", "c", "d", "area"], rows))
    K = weighted_gaussian_grid(img, args.padding).reshape(img.height, img.width)
    nio.write_matrix_csv(K, st.path("gaussian.csv"))
    return {"grid": gc.metadata(), "edges": g.n_edges, "faces": c.n_faces, "gaussian_sum": float(nio.fmt(K.sum()))}


def cmd_image_sample(args, st: Staging) -> dict:
    img = nio.read_image(args.input)
    gc = grid_from_image(img, args.eps_w, args.embedded_metric)
    mask = image_sample(gc, args.kind, args.retain, "vertex", args.ranking, args.formula)
    nio.write_pgm(mask, st.path("mask.pgm"))
    nio.write_matrix_csv(mask, st.path("mask.csv"))
    f = grid_curvature(gc, args.kind, args.formula)
    nio.export_csv(scalar_curvature(gc.graph, f), st.path("pixel_curvature.csv"), gc.graph)
    return {"grid": gc.metadata(), "kept": int(mask.sum())}


COMMANDS = {
    "curvature": cmd_curvature,
    "sample": cmd_sample,
    "core": cmd_core,
    "flow": cmd_flow,
    "kernel": cmd_kernel,
    "embed": cmd_embed,
    "epsnet": cmd_epsnet,
    "image-grid": cmd_image_grid,
    "image-sample": cmd_image_sample,
}


def _resolved(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in ("quiet",):
            continue
        out[k] = str(v) if isinstance(v, Path) else v
    return out


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="netcurv: %(message)s")
    try:
        threads = _threads()
        with Staging(args.out) as st:
            summary = COMMANDS[args.command](args, st)
            config = _resolved(args)
            config["netcurv_threads"] = threads
            config["version"] = __version__
            _json(st.path("config.json"), {"config": config, "summary": summary})
    except argparse.ArgumentTypeError as exc:
        parser.print_usage(sys.stderr)
        print(f"netcurv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FlowError, FloatingPointError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"netcurv: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (nio.DataError, GraphError, MetricSpaceError, ImageError, ValueError, OSError) as exc:
        print(f"netcurv: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    if not args.quiet:
        print(f"wrote {len(st.files)} files to {args.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
