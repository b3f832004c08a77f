"""Command line entry point: ``edge-mi <command> [options]``.

Exit codes: 0 success, 2 usage error (argparse), 3 invalid input,
4 infeasible or ill-conditioned configuration, 5 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .bench import mse_sweep, runtime_sweep
from .ensemble import SCHEMA_VERSION, constraint_matrix, edge_estimate, solve_weights
from .errors import (
    ConditioningError,
    EdgeError,
    EmptyInputError,
    InfeasibleConfigurationError,
    InfiniteMIError,
    InvalidArgumentError,
    NumericError,
)
from .estimator import DEFAULT_CLIP, LN2, generator_from_name, mi_from_samples
from .online import EnsembleStream, EpsilonSchedule, StreamState
from .synth import DiscreteGaussMix, GaussNoise, generate, oracle_mi

EXIT_OK = 0
EXIT_INPUT = 3
EXIT_CONFIG = 4
EXIT_NUMERIC = 5

COMMANDS = ("estimate", "bench-mse", "bench-runtime", "solve-weights", "stream-demo", "generate")


class CsvFormatError(InvalidArgumentError):
    pass


@dataclass
class RunConfig:
    """Everything needed to re-run a command; echoed at the top of each result."""

    command: str
    seed: int
    options: dict = field(default_factory=dict)

    def echo_lines(self) -> list[str]:
        lines = [f"# edge-mi {__version__}", f"# command: {self.command}", f"# seed: {self.seed}"]
        lines += [f"# {k}: {json.dumps(v)}" for k, v in sorted(self.options.items())]
        return lines


# ----------------------------------------------------------------------------- CSV I/O


def read_matrix_csv(path: str) -> np.ndarray:
    """Read a numeric CSV with a header row into a float64 ``(N, d)`` array.

    Parse failures name the file, 1-based line and column.  NaN and Inf are
    rejected.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InvalidArgumentError(f"{path}: cannot read ({exc.strerror})") from None
    except UnicodeDecodeError as exc:
        raise CsvFormatError(f"{path}: not UTF-8 ({exc.reason})") from None
    rows = [(i + 1, r) for i, r in enumerate(rows) if any(c.strip() for c in r)]
    if not rows:
        raise EmptyInputError(f"{path}: empty file (expected a header row and data)")
    (_, header), body = rows[0], rows[1:]
    if not body:
        raise EmptyInputError(f"{path}: header only, no data rows")
    width = len(header)
    out = np.empty((len(body), width))
    for r, (line, cells) in enumerate(body):
        if len(cells) != width:
            raise CsvFormatError(f"{path}:{line}: expected {width} columns, found {len(cells)}")
        for c, cell in enumerate(cells):
            try:
                v = float(cell)
            except ValueError:
                raise CsvFormatError(f"{path}:{line}:{c + 1}: not a number: {cell.strip()!r}") from None
            if not math.isfinite(v):
                raise CsvFormatError(f"{path}:{line}:{c + 1}: non-finite value {cell.strip()!r}")
            out[r, c] = v
    return out


def write_matrix_csv(path: str, a: np.ndarray, prefix: str) -> None:
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"{prefix}{k}" for k in range(a.shape[1])])
        w.writerows([[repr(float(v)) for v in row] for row in a])


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v


def _render(config: RunConfig, columns: list[str], rows: list[dict], fmt: str,
            extra: dict | None = None) -> str:
    if fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION, "config": asdict(config), "rows": rows}
        doc.update(extra or {})
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write("\n".join(config.echo_lines()) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c, "")) for c in columns])
    for k, v in (extra or {}).items():
        buf.write(f"# {k}: {json.dumps(v)}\n")
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ----------------------------------------------------------------------------- options


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of numbers, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(float(v)) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of integers, got {text!r}")


def resolve_seed(seed: int | None) -> int:
    """``--seed`` if given, else ``$EDGE_SEED``, else 0."""
    if seed is not None:
        return int(seed)
    env = os.environ.get("EDGE_SEED")
    if env is None or env.strip() == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise InvalidArgumentError(f"EDGE_SEED must be an integer, got {env!r}") from None


def _generator(args):
    params = (args.alpha,) if args.g == "alpha" else ()
    return generator_from_name(args.g, *params, clip_bound=args.u_bound)


def _family(args):
    if args.family == "gauss":
        return GaussNoise(args.d, args.a)
    return DiscreteGaussMix(args.k, args.dy)


def _common(p: argparse.ArgumentParser, estimator=True):
    p.add_argument("--seed", type=int, default=None, help="RNG seed (falls back to $EDGE_SEED, then 0)")
    p.add_argument("--out", default=None, help="write the result here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="result format")
    if estimator:
        p.add_argument("--g", choices=("shannon", "alpha", "tv", "chi2"), default="shannon",
                       help="f-divergence generator")
        p.add_argument("--alpha", type=float, default=0.5, help="order of the alpha divergence (--g alpha)")
        p.add_argument("--u-bound", type=float, default=DEFAULT_CLIP, help="clip bound U on g(omega_ij)")
        p.add_argument("--mode", choices=("floor", "pstable", "exact"), default="floor", help="hash mode")
        p.add_argument("--t-values", type=_float_list, default=None,
                       help="ensemble t grid (default 1, 1.5, 2, ... with d+3 members)")


def _family_args(p: argparse.ArgumentParser):
    p.add_argument("--family", choices=("gauss", "mix"), default="gauss",
                   help="gauss: Y = X + a U in d dims; mix: discrete X on k atoms, Gaussian Y in dy dims")
    p.add_argument("--a", type=float, default=1.0, help="noise width of the gauss family")
    p.add_argument("--d", type=int, default=2, help="dimension of the gauss family")
    p.add_argument("--k", type=int, default=4, help="number of atoms of the mix family")
    p.add_argument("--dy", type=int, default=4, help="Y dimension of the mix family")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="edge-mi", formatter_class=fmt,
                                     description="Hashing-based ensemble mutual information estimation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", formatter_class=fmt, help="estimate MI between two CSV files")
    p.add_argument("--x", required=True, help="CSV of X samples (header row, one sample per line)")
    p.add_argument("--y", required=True, help="CSV of Y samples, same row count as --x")
    p.add_argument("--epsilon", "--single-epsilon", dest="epsilon", type=float, default=None,
                   help="run one base estimate at this bin width instead of the ensemble")
    p.add_argument("--bits", action="store_true", help="report bits instead of nats")
    _common(p)

    p = sub.add_parser("bench-mse", formatter_class=fmt, help="MSE against the oracle over n")
    _family_args(p)
    p.add_argument("--n-list", type=_int_list, default=[500, 1000, 2000, 4000, 8000], help="sample sizes")
    p.add_argument("--trials", type=int, default=100, help="trials per sample size (>= 2)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (results do not depend on it)")
    _common(p)

    p = sub.add_parser("bench-runtime", formatter_class=fmt, help="wall time per sample size")
    _family_args(p)
    p.add_argument("--n-list", type=_int_list, default=[1000, 10000, 100000], help="sample sizes")
    p.add_argument("--repeats", type=int, default=5, help="timing rounds (best is kept)")
    p.add_argument("--variant", choices=("base", "edge"), default="base", help="estimator to time")
    _common(p, estimator=False)
    p.add_argument("--mode", choices=("floor", "pstable", "exact"), default="floor", help="hash mode")

    p = sub.add_parser("solve-weights", formatter_class=fmt, help="ensemble weights and residuals")
    p.add_argument("--t-values", type=_float_list, required=True, help="ensemble t grid")
    p.add_argument("--d", type=int, required=True, help="number of cancelled bias orders")
    _common(p, estimator=False)

    p = sub.add_parser("stream-demo", formatter_class=fmt, help="online estimate against batch re-estimation")
    _family_args(p)
    p.add_argument("--n", type=int, default=2000, help="pairs to stream")
    p.add_argument("--every", type=int, default=100, help="checkpoint interval")
    p.add_argument("--epsilon", type=float, default=None,
                   help="constant bin width (default: ensemble schedule)")
    _common(p)

    p = sub.add_parser("generate", formatter_class=fmt, help="write a synthetic batch as two CSV files")
    _family_args(p)
    p.add_argument("--n", type=int, required=True, help="number of pairs")
    p.add_argument("--x", required=True, help="output CSV for X")
    p.add_argument("--y", required=True, help="output CSV for Y")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (falls back to $EDGE_SEED, then 0)")
    return parser


# ----------------------------------------------------------------------------- commands


def cmd_estimate(args, seed: int) -> str:
    x = read_matrix_csv(args.x)
    y = read_matrix_csv(args.y)
    if x.shape[0] != y.shape[0]:
        raise InvalidArgumentError(f"row mismatch: {args.x} has {x.shape[0]} rows, {args.y} has {y.shape[0]}")
    g = _generator(args)
    unit, scale = ("bits", 1.0 / LN2) if args.bits else ("nats", 1.0)
    config = RunConfig("estimate", seed, {
        "x": args.x, "y": args.y, "n": int(x.shape[0]), "d_x": int(x.shape[1]), "d_y": int(y.shape[1]),
        "g": g.to_dict(), "mode": args.mode, "epsilon": args.epsilon, "t_values": args.t_values,
        "unit": unit,
    })
    start = time.perf_counter()
    if args.epsilon is not None:
        est = mi_from_samples(x, y, args.epsilon, g, seed=seed, mode=args.mode)
        rows = [{"variant": "base", "t": "", "epsilon": args.epsilon, "weight": 1.0,
                 "value": est.value * scale}]
    else:
        est = edge_estimate(x, y, t_values=args.t_values, g=g, seed=seed, mode=args.mode)
        rows = [{"variant": "member", "t": m.t, "epsilon": m.epsilon, "weight": m.weight,
                 "value": m.estimate * scale} for m in est.members]
        rows.append({"variant": "edge", "t": "", "epsilon": "", "weight": float(np.sum(est.weights)),
                     "value": est.value * scale})
    elapsed = time.perf_counter() - start
    for r in rows:
        r["unit"] = unit
    extra = {"estimate": rows[-1]["value"], "unit": unit, "elapsed_s": elapsed}
    return _render(config, ["variant", "t", "epsilon", "weight", "value", "unit"], rows, args.format, extra)


def cmd_bench_mse(args, seed: int) -> str:
    family = _family(args)
    g = _generator(args)
    oracle = oracle_mi(family)
    config = RunConfig("bench-mse", seed, {
        "family": family.to_dict(), "n_list": args.n_list, "trials": args.trials, "g": g.to_dict(),
        "mode": args.mode, "t_values": args.t_values,
    })
    sweep = mse_sweep(family, args.n_list, args.trials, seed=seed, t_values=args.t_values,
                      mode=args.mode, g=g, jobs=args.jobs, oracle=oracle.value)
    extra = {"oracle_error_bound": oracle.error_bound,
             "mse_slope": {v: sweep.slope(v) for v in sweep.variants()}}
    return _render(config, ["n", "variant", "mean", "mse", "var", "oracle"], sweep.rows(), args.format, extra)


def cmd_bench_runtime(args, seed: int) -> str:
    family = _family(args)
    config = RunConfig("bench-runtime", seed, {
        "family": family.to_dict(), "n_list": args.n_list, "repeats": args.repeats,
        "variant": args.variant, "mode": args.mode,
    })
    rows = runtime_sweep(family, args.n_list, repeats=args.repeats, seed=seed, variant=args.variant,
                         mode=args.mode)
    per = [r["per_sample_time"] for r in rows]
    extra = {"per_sample_max_over_min": max(per) / min(per)}
    return _render(config, ["n", "d", "variant", "wall_time", "per_sample_time"], rows, args.format, extra)


def cmd_solve_weights(args, seed: int) -> str:
    config = RunConfig("solve-weights", seed, {"t_values": args.t_values, "d": args.d})
    w = solve_weights(args.t_values, args.d)
    a = constraint_matrix(args.t_values, args.d)
    rhs = np.zeros(args.d + 1)
    rhs[0] = 1.0
    residual = a @ w - rhs
    rows = [{"t": t, "weight": wk} for t, wk in zip(args.t_values, w)]
    extra = {"weight_norm": float(np.linalg.norm(w)),
             "max_residual": float(np.max(np.abs(residual))),
             "condition_number": float(np.linalg.cond(a @ a.T))}
    return _render(config, ["t", "weight"], rows, args.format, extra)


def cmd_stream_demo(args, seed: int) -> str:
    family = _family(args)
    g = _generator(args)
    x, y = generate(family, args.n, seed)
    config = RunConfig("stream-demo", seed, {
        "family": family.to_dict(), "n": args.n, "every": args.every, "g": g.to_dict(),
        "mode": args.mode, "epsilon": args.epsilon, "t_values": args.t_values,
    })
    if args.epsilon is not None:
        stream = StreamState(EpsilonSchedule.constant(args.epsilon), g, seed, args.mode)
    else:
        stream = EnsembleStream(args.t_values, g, seed, args.mode)
    rows = []
    elapsed = 0.0
    for m in range(1, args.n + 1):
        start = time.perf_counter()
        value = stream.push(x[m - 1], y[m - 1])
        elapsed += time.perf_counter() - start
        if m % args.every == 0 or m == args.n:
            batch = stream.batch_estimate()
            rows.append({"n": m, "online": value, "batch": batch, "abs_diff": abs(value - batch)})
    extra = {"stream_elapsed_s": elapsed, "max_abs_diff": max(r["abs_diff"] for r in rows)}
    return _render(config, ["n", "online", "batch", "abs_diff"], rows, args.format, extra)


def cmd_generate(args, seed: int) -> str:
    family = _family(args)
    x, y = generate(family, args.n, seed)
    write_matrix_csv(args.x, x, "x")
    write_matrix_csv(args.y, y, "y")
    config = RunConfig("generate", seed, {"family": family.to_dict(), "n": args.n, "x": args.x, "y": args.y})
    return "\n".join(config.echo_lines()) + "\n"


_HANDLERS = {
    "estimate": cmd_estimate,
    "bench-mse": cmd_bench_mse,
    "bench-runtime": cmd_bench_runtime,
    "solve-weights": cmd_solve_weights,
    "stream-demo": cmd_stream_demo,
    "generate": cmd_generate,
}


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (InfeasibleConfigurationError, ConditioningError)):
        return EXIT_CONFIG
    if isinstance(exc, (NumericError, InfiniteMIError)):
        return EXIT_NUMERIC
    return EXIT_INPUT


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        seed = resolve_seed(args.seed)
        text = _HANDLERS[args.command](args, seed)
        if args.command != "generate":
            _emit(text, args.out)
    except EdgeError as exc:
        print(f"edge-mi: error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    return EXIT_OK


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
