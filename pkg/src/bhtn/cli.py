"""Command-line interface.

Subcommands: generate | decompose | reconstruct | bmf | bench | serve.
Machine-readable JSON goes to files or standard output; human-readable
progress goes to standard error, so pipelines stay clean.

Exit codes: 0 success, 1 usage/validation error, 2 input parse error,
3 solver error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

from . import __version__
from .bench import SweepSpec, run_sweep, summarize, write_csv
from .bmf import BmfConfig, factorize
from .boolcore import ShapeError
from .gen import GenerationError, GenSpec, add_noise, generate
from .htn import HtnConfig, decompose, error_rate, reconstruct
from .serialize import (
    ParseError,
    load_tensor,
    save_tensor,
    tensor_to_obj,
    tree_from_obj,
    tree_to_obj,
)
from .server import SolverService, make_server
from .solvers import SolverConfig, SolverError, kernel_backend

log = logging.getLogger("bhtn")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_SOLVER = 3

ENDPOINT_ENV = "BHTN_REMOTE_ENDPOINT"


class _Parser(argparse.ArgumentParser):
    # keep exit code 1 for every usage problem; 2 is reserved for input parsing
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _positive_int(name):
    def convert(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer") from None
        if value < 1:
            raise argparse.ArgumentTypeError(f"{name} must be >= 1")
        return value

    return convert


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected a comma-separated integer list") from None


def _add_solver_args(p: _Parser):
    p.add_argument("--backend", choices=("exact", "sa", "remote"), default="exact")
    p.add_argument("--num-reads", type=_positive_int("num-reads"), default=100)
    p.add_argument("--sweeps", type=_positive_int("sweeps"), default=1000)
    p.add_argument("--beta0", type=float, default=0.1, help="initial inverse temperature")
    p.add_argument("--beta1", type=float, default=10.0, help="final inverse temperature")
    p.add_argument(
        "--endpoint",
        default=os.environ.get(ENDPOINT_ENV),
        help=f"remote solver URL (default: ${ENDPOINT_ENV})",
    )


def _solver_config(args) -> SolverConfig:
    try:
        return SolverConfig(
            backend=args.backend,
            num_reads=args.num_reads,
            sweeps=args.sweeps,
            beta_range=(args.beta0, args.beta1),
            remote_endpoint=args.endpoint,
        )
    except ValueError as e:
        raise _UsageError(str(e)) from None


def _emit(obj, path: str | None):
    text = json.dumps(obj)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_generate(args) -> int:
    spec = GenSpec(
        order=args.order, size=args.size, rank=args.rank, p=args.p,
        noise_prob=args.noise, seed=args.seed,
    )
    tensor, tree = generate(spec)
    if args.out_tree:
        _emit(tree_to_obj(tree), args.out_tree)
    if args.noise > 0 and args.out_noisy:
        save_tensor(add_noise(tensor, args.noise, args.seed), args.out_noisy, args.format)
    if args.out_tensor:
        save_tensor(tensor, args.out_tensor, args.format)
    else:
        _emit(tensor_to_obj(tensor), None)
    log.info("generated order=%d size=%d rank=%d ones=%d/%d",
             args.order, args.size, args.rank, tensor.count_ones(), tensor.size)
    return EXIT_OK


def cmd_decompose(args) -> int:
    tensor = load_tensor(args.tensor)
    solver = _solver_config(args)
    if solver.backend == "remote" and not solver.remote_endpoint:
        raise _UsageError(f"remote backend needs --endpoint or ${ENDPOINT_ENV}")
    bmf_cfg = BmfConfig(
        rank=args.rank, max_iters=args.max_iters, solver=solver,
        init=args.init, stall_patience=args.stall_patience, jobs=args.jobs,
    )
    cfg = HtnConfig(rank=args.rank, bmf=bmf_cfg, seed=args.seed)
    t0 = time.perf_counter()
    stats: dict = {}
    tree = decompose(tensor, cfg, stats=stats)
    recon = reconstruct(tree)
    report = {
        "shape": list(tensor.shape),
        "elements": tensor.size,
        "rank": args.rank,
        "backend": solver.backend,
        "kernel": kernel_backend(),
        "seed": args.seed,
        "error_rate": error_rate(tensor, recon),
        "bmf_iters": stats["bmf_iters"],
        "factorize_calls": stats["factorize_calls"],
        "solver_ms": stats["solver_time"] * 1000.0,
        "total_ms": (time.perf_counter() - t0) * 1000.0,
    }
    log.info("decomposed %s: error %.4f, %.0f ms",
             "x".join(map(str, tensor.shape)), report["error_rate"], report["total_ms"])
    if args.out:
        _emit(tree_to_obj(tree), args.out)
        _emit(report, None)
    else:
        _emit({"report": report, "tree": tree_to_obj(tree)}, None)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    with open(args.tree) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e}") from None
    tree = tree_from_obj(obj)
    tensor = reconstruct(tree)
    if args.compare:
        ref = load_tensor(args.compare)
        print(json.dumps({"error_rate": error_rate(ref, tensor)}), file=sys.stderr)
    if args.out:
        save_tensor(tensor, args.out, args.format)
    else:
        _emit(tensor_to_obj(tensor), None)
    return EXIT_OK


def cmd_bmf(args) -> int:
    matrix = load_tensor(args.matrix)
    if matrix.order != 2:
        raise ParseError(f"bmf needs a matrix, got order-{matrix.order} tensor")
    solver = _solver_config(args)
    cfg = BmfConfig(
        rank=args.rank, max_iters=args.max_iters, solver=solver,
        init=args.init, stall_patience=args.stall_patience, seed=args.seed, jobs=args.jobs,
    )
    res = factorize(matrix, cfg)
    out = {
        "a": tensor_to_obj(res.a),
        "b": tensor_to_obj(res.b),
        "report": {
            "distance": res.distance,
            "error_rate": res.distance / matrix.size,
            "iters": res.iters,
            "history": list(res.history),
            "solver_ms": res.solver_time_total * 1000.0,
        },
    }
    _emit(out, args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    solver = _solver_config(args)
    if solver.backend == "remote" and not solver.remote_endpoint:
        raise _UsageError(f"remote backend needs --endpoint or ${ENDPOINT_ENV}")
    spec = SweepSpec(
        vary=args.vary, values=args.values, order=args.order, size=args.size,
        rank=args.rank, trials=args.trials, noise=args.noise,
        solver=solver, max_iters=args.max_iters, seed=args.seed,
    )
    records = run_sweep(spec, jobs=args.jobs)
    if args.out:
        write_csv(records, args.out)
    else:
        import csv

        from .bench import CSV_HEADER

        w = csv.writer(sys.stdout)
        w.writerow(CSV_HEADER)
        for rec in records:
            w.writerow(rec.row())
    for row in summarize(records):
        log.info(
            "order=%(order)d size=%(size)d rank=%(rank)d noise=%(noise)d: "
            "err_in=%(error_vs_input_mean).4f+-%(error_vs_input_sd).4f "
            "solver=%(solver_ms_mean).1fms", row,
        )
    if args.plot:
        from .bench import plot_sweep

        plot_sweep(records, spec, args.plot)
    return EXIT_OK


def cmd_serve(args) -> int:
    service = SolverService(
        sweeps=args.sweeps, beta_range=(args.beta0, args.beta1),
        max_concurrent=args.max_concurrent,
    )
    server = make_server(args.host, args.port, service)
    host, port = server.server_address[:2]
    print(f"solver service listening on http://{host}:{port}/solve", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        print("shutting down", file=sys.stderr)
    finally:
        server.server_close()
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="bhtn", description=__doc__)
    parser.add_argument("--version", action="version", version=f"bhtn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: _Parser):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("-v", "--verbose", action="count", default=0)

    p = sub.add_parser("generate", help="sample a tensor with an exact tree", parents=[])
    p.add_argument("--order", type=_positive_int("order"), required=True)
    p.add_argument("--size", type=_positive_int("size"), required=True)
    p.add_argument("--rank", type=_positive_int("rank"), required=True)
    p.add_argument("--p", type=float, default=None, help="factor density (default: sampled)")
    p.add_argument("--noise", type=float, default=0.0, help="bit-flip probability")
    p.add_argument("--out-tensor", help="tensor output path (default: stdout JSON)")
    p.add_argument("--out-tree", help="ground-truth tree output path")
    p.add_argument("--out-noisy", help="noisy tensor output path (with --noise)")
    p.add_argument("--format", choices=("json", "text"), default="json")
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("decompose", help="decompose a tensor file into a tree")
    p.add_argument("tensor", help="input tensor (JSON or text)")
    p.add_argument("--rank", type=_positive_int("rank"), required=True)
    p.add_argument("--max-iters", type=_positive_int("max-iters"), default=30)
    p.add_argument("--stall-patience", type=_positive_int("stall-patience"), default=3)
    p.add_argument("--init", choices=("column_sample", "random_bernoulli"),
                   default="column_sample")
    p.add_argument("--jobs", type=_positive_int("jobs"), default=os.cpu_count() or 1,
                   help="parallel column solves (1 = serial reference)")
    p.add_argument("--out", help="tree output path (default: combined JSON on stdout)")
    _add_solver_args(p)
    common(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("reconstruct", help="contract a tree file back to a tensor")
    p.add_argument("tree", help="tree JSON path")
    p.add_argument("--out", help="tensor output path (default: stdout JSON)")
    p.add_argument("--compare", help="tensor file to score the reconstruction against")
    p.add_argument("--format", choices=("json", "text"), default="json")
    common(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("bmf", help="factorize a Boolean matrix")
    p.add_argument("matrix", help="input matrix (JSON or text)")
    p.add_argument("--rank", type=_positive_int("rank"), required=True)
    p.add_argument("--max-iters", type=_positive_int("max-iters"), default=30)
    p.add_argument("--stall-patience", type=_positive_int("stall-patience"), default=3)
    p.add_argument("--init", choices=("column_sample", "random_bernoulli"),
                   default="column_sample")
    p.add_argument("--jobs", type=_positive_int("jobs"), default=os.cpu_count() or 1)
    p.add_argument("--out", help="output path (default: stdout)")
    _add_solver_args(p)
    common(p)
    p.set_defaults(func=cmd_bmf)

    p = sub.add_parser("bench", help="run a parameter sweep and write CSV")
    p.add_argument("--vary", choices=("rank", "size", "order"), required=True)
    p.add_argument("--values", type=_int_list, required=True, help="e.g. 2,3,4")
    p.add_argument("--order", type=_positive_int("order"), default=4)
    p.add_argument("--size", type=_positive_int("size"), default=4)
    p.add_argument("--rank", type=_positive_int("rank"), default=4)
    p.add_argument("--trials", type=_positive_int("trials"), default=10)
    p.add_argument("--noise", choices=("both", "clean", "noisy"), default="both")
    p.add_argument("--max-iters", type=_positive_int("max-iters"), default=30)
    p.add_argument("--jobs", type=_positive_int("jobs"), default=os.cpu_count() or 1)
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--plot", help="scatter+means chart output path (SVG/PNG)")
    _add_solver_args(p)
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="run the reference solver service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8180)
    p.add_argument("--sweeps", type=_positive_int("sweeps"), default=1000)
    p.add_argument("--beta0", type=float, default=0.1)
    p.add_argument("--beta1", type=float, default=10.0)
    p.add_argument("--max-concurrent", type=_positive_int("max-concurrent"), default=32)
    common(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)
    try:
        return args.func(args)
    except _UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, FileNotFoundError, IsADirectoryError) as e:
        print(f"error: cannot read input: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (SolverError, GenerationError) as e:
        print(f"error: solver failed: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except ShapeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
