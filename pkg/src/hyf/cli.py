"""Command line surface: estimate, detect, simulate, loss-table.

Exit codes are part of the contract so shell pipelines can branch on the
failure class:

* 0 success
* 1 usage error (bad flags, bad rate syntax, nonpositive horizon, ...)
* 2 tick-file parse error (reported with a line number)
* 3 input validation error (shared timestamps, non-monotone times, ...)
* 4 detector disagreement under ``--method all``
* 5 rejection budget exceeded while generating inputs

Tick files are CSV with the exact header ``time,price``.  The default
seed is :data:`hyf.adversary.DEFAULT_SEED`; the ``HYF_SEED`` environment
variable overrides it, an explicit ``--seed`` wins over both.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import __version__
from .adversary import (
    DEFAULT_SEED,
    AdversaryConfig,
    attach_random_walk,
    generate_inputs,
)
from .core import ObservationSeries, merge_labels, validate_series
from .errors import RejectionBudgetExceeded, ValidationError
from .estimator import hy_covariance, telescope_rows
from .montecarlo import loss_table
from .nonextant import (
    NonextantReport,
    detect_interval_rule,
    detect_label_rule,
    oracle_detect,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_DISAGREEMENT = 4
EXIT_REJECTION = 5

DEFAULT_RATE_PAIRS = "1,1;1,1/2;1,1/4;1,1/10"


class _UsageError(Exception):
    pass


class TickParseError(Exception):
    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")


class _DetectorDisagreement(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 by default; usage problems are exit 1 here
    def error(self, message):
        raise _UsageError(message)


@dataclass
class TickFile:
    path: str
    times: np.ndarray
    prices: np.ndarray


def read_tick_file(path: str) -> TickFile:
    """Parse a ``time,price`` CSV; any malformed content is a parse error."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            lines = fh.read().split("\n")
    except OSError as exc:
        raise TickParseError(path, 0, f"cannot read file: {exc}") from exc
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].rstrip("\r") != "time,price":
        raise TickParseError(path, 1, "header must be exactly 'time,price'")
    times: list[float] = []
    prices: list[float] = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.rstrip("\r").split(",")
        if len(fields) != 2:
            raise TickParseError(path, lineno, f"expected 2 fields, got {len(fields)}")
        try:
            times.append(float(fields[0]))
            prices.append(float(fields[1]))
        except ValueError:
            raise TickParseError(path, lineno, f"not a number: {line!r}") from None
    return TickFile(path, np.asarray(times, dtype=float), np.asarray(prices, dtype=float))


def write_tick_file(path: str, series: ObservationSeries) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("time,price\n")
        for t, p in zip(series.times.tolist(), series.values.tolist()):
            fh.write(f"{t!r},{p!r}\n")


def _tie_jitter(times_a: np.ndarray, times_b: np.ndarray) -> np.ndarray:
    """Deterministically nudge leg-B timestamps that collide with leg A."""
    merged = np.sort(np.concatenate([times_a, times_b]))
    gaps = np.diff(merged)
    gaps = gaps[gaps > 0]
    if gaps.size == 0:
        return times_b
    eps = 1e-9 * float(np.median(gaps))
    out = times_b.copy()
    out[np.isin(out, times_a)] += eps
    return out


def _raise_on_shared_time(ta: np.ndarray, tb: np.ndarray) -> None:
    idx = np.minimum(np.searchsorted(ta, tb), ta.size - 1)
    hits = ta[idx] == tb
    if np.any(hits):
        raise ValidationError(
            f"time {tb[hits][0]!r} appears in both files; asynchronous inputs "
            "must not share timestamps (rerun with --jitter to break ties)"
        )


def _load_pair(args) -> tuple[ObservationSeries, ObservationSeries]:
    file_a = read_tick_file(args.file_a)
    file_b = read_tick_file(args.file_b)
    times_b = file_b.times
    if getattr(args, "jitter", False):
        times_b = _tie_jitter(file_a.times, times_b)
    # a fully synchronous pair is well defined for the interval algebra;
    # a partial timestamp collision is ambiguous data and gets rejected
    if not np.array_equal(file_a.times, times_b):
        _raise_on_shared_time(file_a.times, times_b)
    s1 = validate_series(file_a.times, file_a.prices, "A")
    s2 = validate_series(times_b, file_b.prices, "B")
    return s1, s2


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("HYF_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise _UsageError(f"HYF_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _parse_rate(token: str) -> float:
    token = token.strip()
    try:
        if "/" in token:
            return float(Fraction(token))
        return float(token)
    except (ValueError, ZeroDivisionError):
        raise _UsageError(f"cannot parse rate {token!r}") from None


def _parse_rate_pairs(text: str) -> list[tuple[float, float]]:
    pairs = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise _UsageError(f"rate pair must look like 'a,b', got {chunk!r}")
        a, b = (_parse_rate(p) for p in parts)
        if a <= 0 or b <= 0:
            raise _UsageError(f"rates must be positive, got {chunk!r}")
        pairs.append((a, b))
    if not pairs:
        raise _UsageError("need at least one rate pair")
    return pairs


def _parse_horizons(text: str) -> list[float]:
    out = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            value = float(chunk)
        except ValueError:
            raise _UsageError(f"cannot parse horizon {chunk!r}") from None
        if value <= 0:
            raise _UsageError(f"horizons must be positive, got {chunk!r}")
        out.append(value)
    if not out:
        raise _UsageError("need at least one horizon")
    return out


def _emit(args, payload: dict, text_lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        for line in text_lines:
            print(line)


def _report_payload(report: NonextantReport, s1: ObservationSeries, s2: ObservationSeries) -> dict:
    loss = report.f_total / report.m if report.m > 0 else None
    return {
        "method": report.method,
        "legs": {
            "A": {
                "indices": list(report.nonextant_1),
                "times": [float(s1.times[k]) for k in report.nonextant_1],
            },
            "B": {
                "indices": list(report.nonextant_2),
                "times": [float(s2.times[k]) for k in report.nonextant_2],
            },
        },
        "f_interior": report.f_interior,
        "f_total": report.f_total,
        "m": report.m,
        "loss": loss,
    }


def _report_lines(payload: dict) -> list[str]:
    loss = payload["loss"]
    return [
        f"method {payload['method']}",
        "nonextant_A indices={} times={}".format(
            ",".join(map(str, payload["legs"]["A"]["indices"])),
            ",".join(repr(t) for t in payload["legs"]["A"]["times"]),
        ),
        "nonextant_B indices={} times={}".format(
            ",".join(map(str, payload["legs"]["B"]["indices"])),
            ",".join(repr(t) for t in payload["legs"]["B"]["times"]),
        ),
        f"f_interior {payload['f_interior']}",
        f"f_total {payload['f_total']}",
        f"overlaps {payload['m']}",
        "loss undefined" if loss is None else f"loss {loss!r}",
    ]


def _cmd_estimate(args) -> int:
    s1, s2 = _load_pair(args)
    covariance = hy_covariance(s1, s2)
    terms = telescope_rows(s1, s2)
    results = {
        "covariance": covariance,
        "overlaps": len(terms.raw_terms),
        "raw_terms": len(terms.raw_terms),
        "grouped_terms": len(terms.grouped_terms),
    }
    payload = {
        "command": "estimate",
        "inputs": {"file_a": args.file_a, "file_b": args.file_b},
        "results": results,
        "seed": None,
        "version": __version__,
    }
    _emit(args, payload, [
        f"covariance {covariance!r}",
        f"overlaps {results['overlaps']}",
        f"raw_terms {results['raw_terms']}",
        f"grouped_terms {results['grouped_terms']}",
    ])
    return EXIT_OK


def _cmd_detect(args) -> int:
    s1, s2 = _load_pair(args)
    reports: list[NonextantReport] = []
    if args.method in ("interval", "all"):
        reports.append(detect_interval_rule(s1, s2, include_boundary=args.include_boundary))
    if args.method in ("label", "all"):
        reports.append(detect_label_rule(merge_labels(s1, s2), include_boundary=args.include_boundary))
    if args.method in ("oracle", "all"):
        reports.append(oracle_detect(s1, s2, include_boundary=args.include_boundary))

    agree = all(reports[0].same_points(r) for r in reports[1:])
    payloads = [_report_payload(r, s1, s2) for r in reports]
    payload = {
        "command": "detect",
        "inputs": {
            "file_a": args.file_a,
            "file_b": args.file_b,
            "method": args.method,
            "include_boundary": args.include_boundary,
        },
        "results": {"reports": payloads, "agree": agree if args.method == "all" else None},
        "seed": None,
        "version": __version__,
    }
    lines: list[str] = []
    for p in payloads:
        lines.extend(_report_lines(p))
    if args.method == "all":
        lines.append(f"agreement {'ok' if agree else 'FAILED'}")
    _emit(args, payload, lines)
    if not agree:
        raise _DetectorDisagreement("detectors disagree; this indicates a bug")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    if args.horizon is None or args.horizon <= 0:
        raise _UsageError(f"--horizon must be positive, got {args.horizon}")
    if args.rate_a <= 0 or args.rate_b <= 0:
        raise _UsageError("--rate-a and --rate-b must be positive")
    seed = _resolve_seed(args)
    config = AdversaryConfig(
        rate_a=args.rate_a, rate_b=args.rate_b, horizon=args.horizon, seed=seed
    )
    s1, s2 = generate_inputs(config)
    s1, s2 = attach_random_walk(s1, s2, seed=seed)
    path_a = f"{args.out_prefix}_a.csv"
    path_b = f"{args.out_prefix}_b.csv"
    write_tick_file(path_a, s1)
    write_tick_file(path_b, s2)
    results = {
        "file_a": path_a,
        "file_b": path_b,
        "points_a": s1.n_points,
        "points_b": s2.n_points,
    }
    payload = {
        "command": "simulate",
        "inputs": {
            "rate_a": args.rate_a,
            "rate_b": args.rate_b,
            "horizon": args.horizon,
            "out_prefix": args.out_prefix,
        },
        "results": results,
        "seed": seed,
        "version": __version__,
    }
    _emit(args, payload, [
        f"wrote {path_a} ({s1.n_points} points)",
        f"wrote {path_b} ({s2.n_points} points)",
    ])
    return EXIT_OK


def _cmd_loss_table(args) -> int:
    if args.runs < 2:
        raise _UsageError(f"--runs must be at least 2, got {args.runs}")
    rate_pairs = _parse_rate_pairs(args.rates)
    horizons = _parse_horizons(args.horizons)
    seed = _resolve_seed(args)
    mode = "total" if args.include_boundary else "interior"
    table = loss_table(rate_pairs, horizons, args.runs, seed, boundary_mode=mode)

    cells = [
        {
            "rate_a": s.config.rate_a,
            "rate_b": s.config.rate_b,
            "horizon": s.config.horizon,
            "runs": s.runs,
            "boundary_mode": s.boundary_mode,
            "mean_loss": s.mean_loss,
            "std_loss": s.std_loss,
            "theoretical": s.theoretical,
        }
        for s in table.cells()
    ]
    payload = {
        "command": "loss-table",
        "inputs": {
            "rates": args.rates,
            "horizons": args.horizons,
            "runs": args.runs,
            "boundary_mode": mode,
        },
        "results": {"cells": cells, "theoretical": list(table.theoretical)},
        "seed": seed,
        "version": __version__,
    }

    header = ["horizon".ljust(10)] + [
        f"r={a:g},{b:g}".ljust(16) for a, b in table.rate_pairs
    ]
    lines = [
        f"loss f/m (mean ± sample std, boundary={mode}, runs={args.runs}, seed={seed})",
        "".join(header).rstrip(),
    ]
    for horizon, row in zip(table.horizons, table.rows):
        cells_txt = [f"{s.mean_loss:.3f} ± {s.std_loss:.3f}".ljust(16) for s in row]
        lines.append("".join([f"{horizon:g}".ljust(10)] + cells_txt).rstrip())
    exact = [f"{v:.6g}".ljust(16) for v in table.theoretical]
    lines.append("".join(["exact".ljust(10)] + exact).rstrip())
    _emit(args, payload, lines)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(
        prog="hyf",
        description="Asynchronous covariance estimation and cancelled-data accounting.",
    )
    parser.add_argument("--version", action="version", version=f"hyf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    estimate = sub.add_parser("estimate", help="covariance of two tick files")
    estimate.add_argument("file_a")
    estimate.add_argument("file_b")
    estimate.add_argument("--jitter", action="store_true",
                          help="break cross-file timestamp ties deterministically")
    estimate.add_argument("--json", action="store_true")
    estimate.set_defaults(func=_cmd_estimate)

    detect = sub.add_parser("detect", help="locate cancelled data points")
    detect.add_argument("file_a")
    detect.add_argument("file_b")
    detect.add_argument("--method", choices=["interval", "label", "oracle", "all"],
                        default="interval")
    detect.add_argument("--include-boundary", action="store_true")
    detect.add_argument("--jitter", action="store_true",
                        help="break cross-file timestamp ties deterministically")
    detect.add_argument("--json", action="store_true")
    detect.set_defaults(func=_cmd_detect)

    simulate = sub.add_parser("simulate", help="write a synthetic asynchronous pair")
    simulate.add_argument("--rate-a", type=float, default=1.0)
    simulate.add_argument("--rate-b", type=float, default=1.0)
    simulate.add_argument("--horizon", type=float, required=True)
    simulate.add_argument("--seed", type=int, default=None)
    simulate.add_argument("--out-prefix", required=True)
    simulate.add_argument("--json", action="store_true")
    simulate.set_defaults(func=_cmd_simulate)

    table = sub.add_parser("loss-table", help="empirical loss grid over rates and horizons")
    table.add_argument("--runs", type=int, default=1000)
    table.add_argument("--horizons", default="100,1000",
                       help="comma separated, e.g. '100,1000'")
    table.add_argument("--rates", default=DEFAULT_RATE_PAIRS,
                       help="semicolon separated pairs, e.g. '1,1;1,1/2'")
    table.add_argument("--seed", type=int, default=None)
    table.add_argument("--include-boundary", action="store_true")
    table.add_argument("--json", action="store_true")
    table.set_defaults(func=_cmd_loss_table)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"hyf: error: {exc}", file=sys.stderr)
        print("run 'hyf --help' for usage", file=sys.stderr)
        return EXIT_USAGE
    except TickParseError as exc:
        print(f"hyf: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"hyf: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except _DetectorDisagreement as exc:
        print(f"hyf: {exc}", file=sys.stderr)
        return EXIT_DISAGREEMENT
    except RejectionBudgetExceeded as exc:
        print(f"hyf: {exc}", file=sys.stderr)
        return EXIT_REJECTION


if __name__ == "__main__":
    sys.exit(main())
