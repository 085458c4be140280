"""Command-line interface.

Subcommands: eigs, distance, generate, sample, rewire, cluster, kstest,
timeline.  Exit codes are stable: 0 ok, 1 usage, 2 I/O, 3 parse,
4 solver, 5 dimension, 6 numeric.

Defaults for -r, --tol and --dense-threshold can be overridden with the
environment variables NBDIST_R, NBDIST_TOL, NBDIST_DENSE_THRESHOLD; an
explicit flag always wins.  Every stochastic command takes a --seed that
is echoed in the output metadata, making outputs reproducible
byte-for-byte.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import analysis, distance, generators, graph, spectral

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_PARSE = 3
EXIT_SOLVER = 4
EXIT_DIMENSION = 5
EXIT_NUMERIC = 6


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; we reserve 2 for I/O
    def error(self, message):
        raise _UsageError(message)


def _env_int(name: str, default: int) -> int:
    return int(os.environ.get(name, default))


def _env_float(name: str, default: float) -> float:
    return float(os.environ.get(name, default))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nbdist",
                     description="Graph distance from truncated non-backtracking spectra")
    sub = parser.add_subparsers(dest="command", required=True)

    def common_eig(p):
        p.add_argument("-r", type=int, default=_env_int("NBDIST_R", 200),
                       help="number of eigenvalues (default 200)")
        p.add_argument("--tol", type=float, default=_env_float("NBDIST_TOL", 1e-8))
        p.add_argument("--dense-threshold", type=int,
                       default=_env_int("NBDIST_DENSE_THRESHOLD", 2000))
        p.add_argument("--no-shave", action="store_true",
                       help="skip 2-core reduction before eigensolving")
        p.add_argument("--lcc", action="store_true",
                       help="reduce each input graph to its largest connected component")

    def common_out(p):
        p.add_argument("--output", "-o", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--quiet", action="store_true")

    def tuning_flags(p):
        p.add_argument("--sigma", type=float, default=None)
        p.add_argument("--eta", type=float, default=None)
        p.add_argument("--preset", choices=sorted(distance.PRESETS), default=None)

    p = sub.add_parser("eigs", help="write the eigenvalue fingerprint of a graph")
    p.add_argument("graph")
    common_eig(p)
    common_out(p)

    p = sub.add_parser("distance", help="distance between two graphs or fingerprints")
    p.add_argument("inputs", nargs=2, metavar="GRAPH_OR_FP")
    common_eig(p)
    tuning_flags(p)
    common_out(p)

    p = sub.add_parser("generate", help="generate a random graph")
    p.add_argument("model", choices=generators.MODELS)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-k", type=float, required=True, help="target mean degree")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--beta", type=float, default=None, help="WS rewiring probability")
    p.add_argument("--temperature", type=float, default=None, help="HG temperature")
    p.add_argument("--seed", type=int, default=0)
    common_out(p)

    p = sub.add_parser("sample", help="sample a subgraph")
    p.add_argument("graph")
    p.add_argument("--method", choices=generators.SAMPLE_METHODS, required=True)
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--jump", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    common_out(p)

    p = sub.add_parser("rewire", help="degree-preserving rewiring")
    p.add_argument("graph")
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    common_out(p)

    p = sub.add_parser("cluster", help="embed fingerprints and cluster them")
    p.add_argument("fingerprints", nargs="+")
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--dims", type=int, default=2)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--labels", default=None,
                   help="comma-separated ground-truth labels, one per fingerprint")
    p.add_argument("--seed", type=int, default=0)
    tuning_flags(p)
    common_out(p)

    p = sub.add_parser("kstest", help="KS tests between two fingerprints")
    p.add_argument("fingerprints", nargs=2)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--bonferroni", type=int, default=14)
    common_out(p)

    p = sub.add_parser("timeline", help="distance timeline over ordered graphs")
    p.add_argument("graphs", nargs="*")
    p.add_argument("--manifest", default=None,
                   help="file listing one graph path per line, in order")
    p.add_argument("--mode", choices=("consecutive", "fixed"), default="consecutive")
    p.add_argument("--base", type=int, default=0, help="baseline index for fixed mode")
    common_eig(p)
    tuning_flags(p)
    common_out(p)
    return parser


def _read_text(path: str) -> str:
    with open(path, "r") as fh:
        return fh.read()


def _load_graph(path: str, lcc: bool = False) -> graph.Graph:
    g = graph.parse_edge_list(_read_text(path))
    return graph.largest_connected_component(g) if lcc else g


def _is_fingerprint_file(text: str) -> bool:
    head = text.lstrip().splitlines()[:1]
    return bool(head) and head[0].startswith("#") and "r=" in head[0]


def _tuning(args) -> distance.TuningParams:
    if args.preset is not None:
        t = distance.PRESETS[args.preset]
        sigma = args.sigma if args.sigma is not None else t.sigma
        eta = args.eta if args.eta is not None else t.eta
    else:
        sigma = args.sigma if args.sigma is not None else 1.0
        eta = args.eta if args.eta is not None else 0.0
    return distance.TuningParams(sigma=sigma, eta=eta)


def _write(args, text: str):
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fingerprint(g, args) -> spectral.Fingerprint:
    return spectral.top_eigenvalues(
        g, args.r, shave_first=not args.no_shave, tol=args.tol,
        dense_threshold=args.dense_threshold)


def _cmd_eigs(args) -> int:
    fp = _fingerprint(_load_graph(args.graph, args.lcc), args)
    if args.format == "json":
        payload = {"meta": {k: v for k, v in fp.meta.items()}, "r": fp.r,
                   "eigs": [[z.real, z.imag] for z in fp.eigs]}
        _write(args, json.dumps(payload, indent=2) + "\n")
    else:
        _write(args, spectral.fingerprint_to_csv(fp))
    return EXIT_OK


def _load_fp_or_graph(path: str, args) -> spectral.Fingerprint:
    text = _read_text(path)
    if _is_fingerprint_file(text):
        return spectral.fingerprint_from_csv(text)
    g = graph.parse_edge_list(text)
    if getattr(args, "lcc", False):
        g = graph.largest_connected_component(g)
    return _fingerprint(g, args)


def _cmd_distance(args) -> int:
    fp1 = _load_fp_or_graph(args.inputs[0], args)
    fp2 = _load_fp_or_graph(args.inputs[1], args)
    d = distance.tnbsd(fp1, fp2, _tuning(args))
    _write(args, f"{d:.17g}\n")
    return EXIT_OK


def _cmd_generate(args) -> int:
    extra = {}
    if args.beta is not None:
        extra["beta"] = args.beta
    if args.temperature is not None:
        extra["temperature"] = args.temperature
    spec = generators.ModelSpec(model=args.model, n=args.n,
                                target_mean_degree=args.k, gamma=args.gamma,
                                extra=extra, seed=args.seed)
    g = generators.generate(spec)
    header = (f"# nbdist generate {args.model} n={args.n} k={args.k:g}"
              + (f" gamma={args.gamma:g}" if args.gamma is not None else "")
              + f" seed={args.seed}\n")
    _write(args, header + graph.serialize(g))
    return EXIT_OK


def _cmd_sample(args) -> int:
    g = graph.parse_edge_list(_read_text(args.graph))
    spec = generators.SampleSpec(method=args.method, edge_fraction=args.fraction,
                                 jump_prob=args.jump, seed=args.seed)
    s = generators.sample(g, spec)
    header = (f"# nbdist sample method={args.method} fraction={args.fraction:g} "
              f"jump={args.jump:g} seed={args.seed}\n")
    _write(args, header + graph.serialize(s))
    return EXIT_OK


def _cmd_rewire(args) -> int:
    g = graph.parse_edge_list(_read_text(args.graph))
    h = generators.rewire(g, args.fraction, seed=args.seed)
    header = f"# nbdist rewire fraction={args.fraction:g} seed={args.seed}\n"
    _write(args, header + graph.serialize(h))
    return EXIT_OK


def _cmd_cluster(args) -> int:
    fps = [spectral.fingerprint_from_csv(_read_text(p)) for p in args.fingerprints]
    if len({fp.r for fp in fps}) > 1:
        raise distance.DimensionMismatchError("fingerprints have mixed r")
    t = _tuning(args)
    feats = [distance.feature_vector(fp, t) for fp in fps]
    embedded = analysis.kpca_cosine(feats, args.dims)
    try:
        fit = analysis.gmm_em(embedded, args.k, restarts=args.restarts, seed=args.seed)
    except ValueError as exc:
        raise analysis.NumericalError(str(exc)) from exc
    labels = args.labels.split(",") if args.labels else None
    pur = analysis.purity(fit.assignments, labels) if labels else None
    if args.format == "json":
        payload = {"seed": args.seed,
                   "assignments": [int(a) for a in fit.assignments],
                   "embedding": embedded.points.tolist(),
                   "purity": pur}
        _write(args, json.dumps(payload, indent=2) + "\n")
    else:
        lines = [f"# nbdist cluster k={args.k} dims={args.dims} "
                 f"restarts={args.restarts} seed={args.seed}",
                 "x,y,assignment" + (",label" if labels else "")]
        for i in range(len(fps)):
            coords = ",".join(f"{c:.17g}" for c in embedded.points[i])
            row = f"{coords},{fit.assignments[i]}"
            if labels:
                row += f",{labels[i]}"
            lines.append(row)
        if pur is not None:
            lines.append(f"# purity={pur:.17g}")
        _write(args, "\n".join(lines) + "\n")
    if pur is not None and not args.quiet and args.output:
        print(f"purity {pur:.6f}")
    return EXIT_OK


def _cmd_kstest(args) -> int:
    fp1 = spectral.fingerprint_from_csv(_read_text(args.fingerprints[0]))
    fp2 = spectral.fingerprint_from_csv(_read_text(args.fingerprints[1]))
    real, imag = analysis.fingerprint_ks_test(fp1, fp2, alpha=args.alpha,
                                              bonferroni_m=args.bonferroni)
    if args.format == "json":
        payload = {axis: {"statistic": res.statistic, "p_value": res.p_value,
                          "rejected": res.rejected}
                   for axis, res in (("real", real), ("imag", imag))}
        _write(args, json.dumps(payload, indent=2) + "\n")
    else:
        lines = [f"# nbdist kstest alpha={args.alpha:g} bonferroni={args.bonferroni}",
                 "axis,statistic,p_value,rejected"]
        for axis, res in (("real", real), ("imag", imag)):
            lines.append(f"{axis},{res.statistic:.17g},{res.p_value:.17g},{res.rejected}")
        _write(args, "\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_timeline(args) -> int:
    paths = list(args.graphs)
    if args.manifest:
        paths += [line.strip() for line in _read_text(args.manifest).splitlines()
                  if line.strip() and not line.strip().startswith("#")]
    if len(paths) < 2:
        raise _UsageError("timeline needs at least 2 graphs")
    fps = [_fingerprint(_load_graph(p, args.lcc), args) for p in paths]
    report = analysis.timeline(fps, mode=args.mode, base=args.base, t=_tuning(args))
    if args.format == "json":
        payload = {"mode": args.mode, "distances": list(report.distances),
                   "mean": report.mean, "std": report.std,
                   "anomalies": list(report.anomalies)}
        _write(args, json.dumps(payload, indent=2) + "\n")
    else:
        lines = [f"# nbdist timeline mode={args.mode} r={args.r}",
                 "index,distance,anomaly"]
        anom = set(report.anomalies)
        for i, d in enumerate(report.distances):
            lines.append(f"{i},{d:.17g},{int(i in anom)}")
        lines.append(f"# mean={report.mean:.17g} std={report.std:.17g}")
        _write(args, "\n".join(lines) + "\n")
    return EXIT_OK


_COMMANDS = {
    "eigs": _cmd_eigs,
    "distance": _cmd_distance,
    "generate": _cmd_generate,
    "sample": _cmd_sample,
    "rewire": _cmd_rewire,
    "cluster": _cmd_cluster,
    "kstest": _cmd_kstest,
    "timeline": _cmd_timeline,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except generators.ParameterError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, IsADirectoryError, PermissionError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except graph.EdgeListParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except spectral.SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except distance.DimensionMismatchError as exc:
        print(f"dimension error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except (analysis.NumericalError, generators.BudgetExhaustedError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
