"""Command-line frontend.

Subcommands: ``volume`` (annealed measure estimate), ``sample`` (restricted
Gaussian points, one JSON array per line), ``oracle`` (analytic measure or a
brute-force Monte Carlo estimate), and ``diagnose`` (diagnostic reports).

Data goes to stdout, messages to stderr.  Exit codes: 0 success, 1 input or
validation errors, 2 runtime estimation failures.  Numbers are serialized in
shortest round-trip decimal form, so printed output replays exactly.
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

import numpy as np

from .anneal import AnnealOptions, gaussian_volume, sample_gaussian_restricted
from .bodies import load_body, verify_unit_ball_containment
from .diagnostics import (
    average_local_conductance,
    consecutive_warmness_factor,
    local_conductance,
    mc_gaussian_measure,
)
from .errors import EstimationError
from .gaussian import (
    DEFAULT_DELTA_SCALE,
    DEFAULT_STEP_SCALE,
    NoAnalyticOracleError,
    StepBudgetPolicy,
    exact_gaussian_measure,
    schedule_params,
)
from .rng import RngStream

__all__ = ["main"]

_ENV_SEED = "GAUSSVOL_SEED"


class _Parser(argparse.ArgumentParser):
    # usage problems are input errors: exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_bool(token: str) -> bool:
    low = token.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {token!r}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="gaussvol", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--body", required=True, help="path to a body JSON file")
        p.add_argument("--seed", type=int, default=None,
                       help=f"random seed (fallback: ${_ENV_SEED}, then 0)")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    vol = sub.add_parser("volume", help="estimate the Gaussian measure")
    common(vol)
    vol.add_argument("--eps", type=float, default=0.2)
    vol.add_argument("--fail-prob", type=float, default=0.1)
    vol.add_argument("--step-scale", type=float, default=DEFAULT_STEP_SCALE)
    vol.add_argument("--delta-scale", type=float, default=DEFAULT_DELTA_SCALE)
    vol.add_argument("--lazy", type=_parse_bool, nargs="?", const=True,
                     default=False, metavar="BOOL")
    vol.add_argument("--workers", type=int, default=1)
    vol.add_argument("--allow-unverified", action="store_true",
                     help="run even if unit-ball containment is not verified")

    smp = sub.add_parser("sample", help="sample the restricted Gaussian")
    common(smp)
    smp.add_argument("--eps", type=float, default=0.1)
    smp.add_argument("--count", type=int, default=1)
    smp.add_argument("--step-scale", type=float, default=DEFAULT_STEP_SCALE)
    smp.add_argument("--delta-scale", type=float, default=DEFAULT_DELTA_SCALE)
    smp.add_argument("--lazy", type=_parse_bool, nargs="?", const=True,
                     default=False, metavar="BOOL")
    smp.add_argument("--allow-unverified", action="store_true")

    orc = sub.add_parser("oracle", help="analytic measure plus a brute-force check")
    common(orc)
    orc.add_argument("--mc-samples", type=int, default=100_000)

    dia = sub.add_parser("diagnose", help="run the diagnostics suite")
    common(dia)
    dia.add_argument("--eps", type=float, default=0.2)
    dia.add_argument("--samples", type=int, default=200,
                     help="target samples for the average local conductance")
    dia.add_argument("--trials", type=int, default=1000,
                     help="proposal trials per conductance estimate")

    return parser


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(_ENV_SEED)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ValueError(f"${_ENV_SEED} is not an integer: {env!r}") from exc
    return 0


def _emit_record(record: dict, fmt: str):
    if fmt == "json":
        print(json.dumps(record))
    else:
        buf = io.StringIO()
        writer = csv.writer(buf)
        flat = {k: v for k, v in record.items() if not isinstance(v, (list, dict))}
        writer.writerow(flat.keys())
        writer.writerow(flat.values())
        sys.stdout.write(buf.getvalue())


def _cmd_volume(args) -> int:
    body = load_body(args.body)
    seed = _resolve_seed(args)
    t0 = time.perf_counter()
    result = gaussian_volume(
        body,
        eps=args.eps,
        fail_prob=args.fail_prob,
        policy=StepBudgetPolicy(constant_scale=args.step_scale),
        rng=RngStream(seed),
        options=AnnealOptions(delta_scale=args.delta_scale, lazy=args.lazy),
        workers=args.workers,
        allow_unverified=args.allow_unverified,
    )
    wall_ms = (time.perf_counter() - t0) * 1e3
    record = {
        "log_measure": result.log_measure,
        "measure": result.measure,
        "eps": args.eps,
        "fail_prob": args.fail_prob,
        "seed": seed,
        "runs": len(result.run_log_measures),
        "run_log_measures": list(result.run_log_measures),
        "selected_run": result.selected_run,
        "steps_per_sample": result.steps_per_sample,
        "step_scale": args.step_scale,
        "delta_scale": args.delta_scale,
        "phases": result.schedule.s,
        "checkpoints": result.schedule.m,
        "samples_per_checkpoint": result.schedule.k,
        "per_phase_summary": [
            {
                "alpha": r.alpha,
                "d": r.d,
                "i": r.i,
                "k": r.k,
                "W": r.W,
                "log_w": r.log_w,
                "second_moment_ratio": r.second_moment_ratio,
            }
            for r in result.per_phase
        ],
        "oracle_calls": result.total_oracle_calls,
        "wall_ms": wall_ms,
    }
    _emit_record(record, args.format)
    return 0


def _cmd_sample(args) -> int:
    body = load_body(args.body)
    seed = _resolve_seed(args)
    if args.count < 1:
        raise ValueError("--count must be >= 1")
    points = sample_gaussian_restricted(
        body,
        eps=args.eps,
        count=args.count,
        policy=StepBudgetPolicy(constant_scale=args.step_scale),
        rng=RngStream(seed),
        options=AnnealOptions(delta_scale=args.delta_scale, lazy=args.lazy),
        allow_unverified=args.allow_unverified,
    )
    if args.format == "json":
        for row in points:
            print(json.dumps(row.tolist()))
    else:
        writer = csv.writer(sys.stdout)
        for row in points:
            writer.writerow(row.tolist())
    return 0


def _cmd_oracle(args) -> int:
    body = load_body(args.body)
    seed = _resolve_seed(args)
    try:
        analytic = exact_gaussian_measure(body)
        notice = None
    except NoAnalyticOracleError as exc:
        analytic = None
        notice = str(exc)
    p_hat, stderr = mc_gaussian_measure(body, args.mc_samples, RngStream(seed))
    record = {
        "analytic_measure": analytic,
        "notice": notice,
        "mc_measure": p_hat,
        "mc_stderr": stderr,
        "mc_samples": args.mc_samples,
        "seed": seed,
    }
    _emit_record(record, args.format)
    return 0


def _cmd_diagnose(args) -> int:
    body = load_body(args.body)
    seed = _resolve_seed(args)
    stream = RngStream(seed)
    n = body.dim
    schedule = schedule_params(n, args.eps)
    records = []

    records.append(
        {
            "record": "schedule",
            "n": n,
            "eps": args.eps,
            "sigma0_sq": float(schedule.sigma_sq[0]),
            "phases": schedule.s,
            "checkpoints": schedule.m,
            "samples_per_checkpoint": schedule.k,
            "nu": schedule.nu,
        }
    )
    records.append(
        {
            "record": "containment",
            "verified": verify_unit_ball_containment(body),
        }
    )
    records.append(
        {
            "record": "warmness_factor",
            "n": n,
            "value": consecutive_warmness_factor(n),
            "limit": math.sqrt(math.e),
        }
    )
    delta = 1.0 / (4096.0 * math.sqrt(n))  # worst-case radius at sigma = 1
    rep = local_conductance(
        body, np.zeros(n), delta, args.trials, stream.derive(0)
    )
    rec = rep.to_dict()
    rec["record"] = "local_conductance_origin"
    records.append(rec)
    lam = average_local_conductance(
        body, 1.0, delta, args.samples, stream.derive(1), trials=args.trials
    )
    records.append(
        {
            "record": "average_local_conductance",
            "sigma_sq": 1.0,
            "delta": delta,
            "samples": args.samples,
            "trials": args.trials,
            "lambda_hat": lam,
        }
    )

    if args.format == "json":
        for rec in records:
            print(json.dumps(rec))
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(["record", "field", "value"])
        for rec in records:
            name = rec.pop("record")
            for key, value in rec.items():
                writer.writerow([name, key, value])
    return 0


_DISPATCH = {
    "volume": _cmd_volume,
    "sample": _cmd_sample,
    "oracle": _cmd_oracle,
    "diagnose": _cmd_diagnose,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _DISPATCH[args.subcommand](args)
    except (ValueError, OSError) as exc:  # JSONDecodeError is a ValueError
        print(f"gaussvol: error: {exc}", file=sys.stderr)
        return 1
    except EstimationError as exc:
        print(f"gaussvol: runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
