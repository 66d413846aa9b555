"""Command-line interface: ``ewensrec <command> [options]``.

Exit status is 0 on success, 1 when ``validate`` finds a failure and 2 on
usage or domain errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import struct
import sys
import warnings

import numpy as np

from . import analytics, montecarlo
from .analytics import AsymptoticRegime, OddSizeWarning, UnsupportedRegime
from .montecarlo import DEFAULT_SEED
from .perm_core import PermutationError, read_permutations
from .sampler import RngStream, ThetaSpec, sample_ewens_cycles, sample_ewens_records
from .statistics import CSV_COLUMNS as STAT_COLUMNS
from .statistics import compute_stats

SIM_COLUMNS = ("n", "theta", "algorithm", "mode", "comparisons", "swaps", "mu4", "mu6", "nu3", "nu7", "nu8")


def _add_theta(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--theta", type=float, help="fixed theta > 0")
    g.add_argument("--theta-power", type=float, metavar="EPS", help="theta = n**EPS")
    g.add_argument("--theta-linear", type=float, metavar="LAMBDA", help="theta = LAMBDA * n")


def _theta_spec(args) -> ThetaSpec:
    if args.theta is not None:
        return ThetaSpec.fixed(args.theta)
    if args.theta_power is not None:
        return ThetaSpec.power(args.theta_power)
    return ThetaSpec.linear(args.theta_linear)


def _common(p: argparse.ArgumentParser, trials: int | None = None) -> None:
    p.add_argument("--n", type=int, required=True)
    _add_theta(p)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    if trials is not None:
        p.add_argument("--trials", type=int, default=trials)
    p.add_argument("--threads", type=int, default=1, help="maximum worker threads")


def _write(path: str | None, payload: str | bytes) -> None:
    binary = isinstance(payload, bytes)
    if path is None or path == "-":
        stream = sys.stdout.buffer if binary else sys.stdout
        stream.write(payload)
        stream.flush()
        return
    with open(path, "wb" if binary else "w") as fh:
        fh.write(payload)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ewensrec",
        description="Record-biased (Ewens-like) random permutations and branch-misprediction models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="emit random permutations, one per line")
    _common(p, trials=1)
    p.add_argument("--kind", choices=("records", "cycles"), default="records")
    p.add_argument("--format", choices=("text", "bin"), default="text")
    p.add_argument("--output", "-o")

    p = sub.add_parser("stats", help="statistics of permutations read one per line")
    p.add_argument("--input", "-i", help="input file (default: standard input)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", "-o")

    p = sub.add_parser("expect", help="closed-form expectation and leading asymptotic")
    p.add_argument("--stat", required=True, choices=analytics.STATISTICS + ("mu4", "nu7"))
    p.add_argument("--n", type=int, required=True)
    _add_theta(p)
    p.add_argument("--output", "-o")

    p = sub.add_parser("simulate", help="run an instrumented algorithm on sampled inputs")
    _common(p, trials=1000)
    p.add_argument("--algorithm", required=True, choices=tuple(montecarlo.ALGORITHMS))
    p.add_argument("--mode", choices=("analysis_model", "as_written"), default="analysis_model")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", "-o")

    p = sub.add_parser("validate", help="exhaustive and Monte Carlo checks of the closed forms")
    _common(p, trials=10_000)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--z-max", type=float, default=4.0)

    p = sub.add_parser("heatmap", help="counts of sigma(i) = j over many samples")
    _common(p)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--format", choices=("csv", "pgm"), default="csv")
    p.add_argument("--output", "-o")

    p = sub.add_parser("crossover", help="lambda where both min/max scans cost the same")
    p.add_argument("--cost", type=float, action="append",
                   help="misprediction cost in comparisons (repeatable; 0 compares mispredictions only)")
    p.add_argument("--table", action="store_true", help="emit a CSV of (lambda, mu, nu) per element")
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--output", "-o")
    return parser


def cmd_sample(args) -> int:
    spec = _theta_spec(args)
    theta = spec.resolve(args.n)
    sampler = sample_ewens_records if args.kind == "records" else sample_ewens_cycles
    chunks = []
    for t in range(args.trials):
        word = sampler(args.n, theta, RngStream(args.seed, t)).word
        if args.format == "bin":
            dt = np.dtype("<i4") if args.n < 2**31 else np.dtype("<i8")
            chunks.append(struct.pack("<q", args.n) + word.astype(dt).tobytes())
        else:
            chunks.append(" ".join(map(str, word.tolist())) + "\n")
    _write(args.output, b"".join(chunks) if args.format == "bin" else "".join(chunks))
    return 0


def read_binary(data: bytes) -> list[np.ndarray]:
    """Inverse of ``sample --format bin``: int64 n, then n int32 values (int64 when n >= 2**31)."""
    out, pos = [], 0
    while pos < len(data):
        (n,) = struct.unpack_from("<q", data, pos)
        pos += 8
        dt = np.dtype("<i4") if n < 2**31 else np.dtype("<i8")
        out.append(np.frombuffer(data, dtype=dt, count=n, offset=pos).astype(np.int64))
        pos += n * dt.itemsize
    return out


def cmd_stats(args) -> int:
    if args.input:
        with open(args.input) as fh:
            lines = fh.readlines()
    else:
        lines = sys.stdin.readlines()
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    if args.format == "csv":
        writer.writerow(STAT_COLUMNS)
    for p in read_permutations(lines):
        report = compute_stats(p)
        if args.format == "csv":
            writer.writerow(report.csv_row())
        else:
            out.write(report.to_json() + "\n")
    _write(args.output, out.getvalue())
    return 0


def cmd_expect(args) -> int:
    spec = _theta_spec(args)
    theta = spec.resolve(args.n)
    result = {"statistic": args.stat, "n": args.n, "theta": theta, "theta_spec": str(spec)}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", OddSizeWarning)
        if args.stat in analytics.BOUNDS:
            result["exact"] = None
            result["bound"] = analytics.BOUNDS[args.stat](args.n, theta)
        elif args.stat == "nu_total":
            result["exact"] = None
        elif args.stat == "mu_total":
            result["exact"] = None
            result["bound"] = analytics.expected_mu6(args.n, theta) + analytics.mu4_bound(args.n, theta)
        else:
            result["exact"] = analytics.exact_value(args.stat, args.n, theta)
        if caught:
            result["note"] = str(caught[0].message)
    try:
        result["asymptotic"] = analytics.asymptotic_eval(AsymptoticRegime(args.stat, spec), args.n)
    except UnsupportedRegime:
        pass
    _write(args.output, json.dumps(result) + "\n")
    return 0


def cmd_simulate(args) -> int:
    spec = _theta_spec(args)
    theta = spec.resolve(args.n)
    reports = montecarlo.simulate_algorithm(
        args.algorithm, args.n, theta, args.trials, args.seed, args.mode, args.threads
    )
    out = io.StringIO()
    if args.format == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(SIM_COLUMNS)
        writer.writerow([args.n, theta, args.algorithm, args.mode] + [reports[c].mean for c in SIM_COLUMNS[4:]])
    else:
        payload = {
            "algorithm": args.algorithm,
            "mode": args.mode,
            "n": args.n,
            "theta": theta,
            "trials": args.trials,
            "seed": args.seed,
            "counters": {c: r.to_dict() for c, r in reports.items()},
        }
        out.write(json.dumps(payload) + "\n")
    _write(args.output, out.getvalue())
    return 0


def cmd_validate(args) -> int:
    spec = _theta_spec(args)
    theta = spec.resolve(args.n)
    checks = []
    if args.n <= montecarlo.EXHAUSTIVE_MAX_N:
        checks += montecarlo.exhaustive_checks(args.n, theta, args.tol)
    if args.trials > 0:
        checks += montecarlo.monte_carlo_checks(args.n, theta, args.trials, args.seed, args.z_max, args.threads)
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 1 if failed else 0


def cmd_heatmap(args) -> int:
    spec = _theta_spec(args)
    hm = montecarlo.heatmap(args.n, spec.resolve(args.n), args.samples, args.seed)
    _write(args.output, hm.to_pgm() if args.format == "pgm" else hm.to_csv())
    return 0


def cmd_crossover(args) -> int:
    out = io.StringIO()
    if args.table:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(("lambda", "mu_per_element", "nu_per_element"))
        for row in analytics.crossover_table(args.points):
            writer.writerow(row)
    else:
        for c in args.cost or [0.0]:
            lam = analytics.crossover_lambda(c)
            out.write(json.dumps({"cost": c, "lambda": lam, "crossover": lam is not None}) + "\n")
    _write(args.output, out.getvalue())
    return 0


COMMANDS = {
    "sample": cmd_sample,
    "stats": cmd_stats,
    "expect": cmd_expect,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
    "heatmap": cmd_heatmap,
    "crossover": cmd_crossover,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, PermutationError, UnsupportedRegime, OSError) as exc:
        print(f"ewensrec {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
