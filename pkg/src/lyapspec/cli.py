"""Batch command line front end.

Thin client over the shared handler layer: parse a cocycle file,
dispatch one subcommand, emit JSON records (one object per line) or
plot-ready CSV. All numbers are natural-log.

Exit codes: 0 success, 2 validation or usage error, 3 enumeration
budget exceeded, 4 inconclusive certification (including a homoclinic
search that found no certificate).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field

from . import handlers
from .cocycle_io import load_cocycle
from .matrices import NumericError
from .words import BudgetError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_INCONCLUSIVE = 4

_CSV_COMMANDS = ("pressure", "spectrum", "lyapunov", "omega")
_REPORT_COMMANDS = ("check-typical", "check-dominated", "crosscheck")


@dataclass
class RunConfig:
    command: str
    cocycle_path: str
    q: list[float] | None = None
    alphas: list[list[float]] = field(default_factory=list)
    depth: int | None = None
    depths: list[int] | None = None
    probe_radius: float = 8.0
    probe_count: int = 16
    measure: list[float] | None = None
    family: str = "bernoulli"
    max_period: int = 2
    max_bridge: int = 3
    index: int = 1
    tol: float = 1e-8
    mode: str = "exhaustive"
    threads: int = 1
    deterministic: bool = False
    output: str | None = None
    format: str = "json"


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma list of numbers: {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma list of integers: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cocycle", required=True, metavar="FILE",
                        help="cocycle JSON file")
    common.add_argument("--threads", type=int, default=1, metavar="N",
                        help="worker threads forwarded to the engines")
    common.add_argument("--deterministic", action="store_true",
                        help="bit-reproducible reduction order")
    common.add_argument("--output", metavar="FILE",
                        help="write results here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = argparse.ArgumentParser(
        prog="lyapspec",
        description="Thermodynamic formalism for one-step matrix cocycles "
                    "(all logs natural base)",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("pressure", parents=[common],
                        help="finite-depth pressure with Gibbs gradient")
    sp.add_argument("--q", type=_float_list, required=True, metavar="a,b,...")
    sp.add_argument("--depth", type=int, metavar="N")
    sp.add_argument("--depths", type=_int_list, metavar="N1,N2,...")

    sp = sub.add_parser("spectrum", parents=[common],
                        help="entropy spectrum values via Legendre transform")
    sp.add_argument("--alpha", type=_float_list, action="append", required=True,
                    dest="alphas", metavar="a,b,...",
                    help="exponent vector; repeat for a curve")
    sp.add_argument("--depth", type=int, metavar="N")

    sp = sub.add_parser("lyapunov", parents=[common],
                        help="Lyapunov exponent vector of a Bernoulli measure")
    sp.add_argument("--measure", type=_float_list, metavar="p1,p2,...",
                    help="symbol probabilities (default uniform)")
    sp.add_argument("--depth", type=int, metavar="N")

    sp = sub.add_parser("omega", parents=[common],
                        help="exponent-range estimate from Gibbs gradients")
    sp.add_argument("--probe-radius", type=float, default=8.0, metavar="R")
    sp.add_argument("--probe-count", type=int, default=16, metavar="M")
    sp.add_argument("--depth", type=int, metavar="N")

    sp = sub.add_parser("check-typical", parents=[common],
                        help="search for a homoclinic typicality certificate")
    sp.add_argument("--max-period", type=int, default=2, metavar="P")
    sp.add_argument("--max-bridge", type=int, default=3, metavar="B")
    sp.add_argument("--tol", type=float, default=1e-8)

    sp = sub.add_parser("check-dominated", parents=[common],
                        help="certify domination of one singular value index")
    sp.add_argument("--index", type=int, default=1, metavar="i")
    sp.add_argument("--depths", type=_int_list, metavar="N1,N2,...",
                    help="word lengths for the decay fit (default 1..12)")
    sp.add_argument("--mode", choices=("exhaustive", "sampled"),
                    default="exhaustive")

    sp = sub.add_parser("crosscheck", parents=[common],
                        help="variational lower bound against the pressure")
    sp.add_argument("--q", type=_float_list, required=True, metavar="a,b,...")
    sp.add_argument("--depth", type=int, metavar="N")
    sp.add_argument("--family", choices=("bernoulli", "markov"),
                    default="bernoulli")

    return p


def parse_args(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(command=ns.command, cocycle_path=ns.cocycle)
    for name in vars(cfg):
        if hasattr(ns, name) and getattr(ns, name) is not None:
            setattr(cfg, name, getattr(ns, name))
    cfg.threads = ns.threads
    cfg.deterministic = ns.deterministic
    cfg.output = ns.output
    cfg.format = ns.format
    return cfg


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def _csv_text(command: str, records: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if command == "pressure":
        d = len(records[0]["q"])
        w.writerow(
            [f"q_{i}" for i in range(1, d + 1)]
            + ["n", "value"]
            + [f"grad_{i}" for i in range(1, d + 1)]
            + ["upper", "lower", "gap"]
        )
        for r in records:
            w.writerow(
                [repr(v) for v in r["q"]]
                + [str(r["n"]), repr(r["value"])]
                + [repr(v) for v in r["gradient"]]
                + [_fmt(r["upper"]), _fmt(r["lower"]), _fmt(r["gap"])]
            )
    elif command == "spectrum":
        d = len(records[0]["alpha"])
        w.writerow(
            [f"alpha_{i}" for i in range(1, d + 1)]
            + ["value", "status"]
            + [f"q_{i}" for i in range(1, d + 1)]
        )
        for r in records:
            w.writerow(
                [repr(v) for v in r["alpha"]]
                + [repr(r["value"]), r["status"]]
                + [repr(v) for v in r["q"]]
            )
    elif command == "lyapunov":
        r = records[0]
        d = len(r["exponents"])
        w.writerow(["n"] + [f"chi_{i}" for i in range(1, d + 1)])
        w.writerow([str(r["n"])] + [repr(v) for v in r["exponents"]])
    elif command == "omega":
        r = records[0]
        d = len(r["vertices"][0])
        w.writerow([f"alpha_{i}" for i in range(1, d + 1)])
        for v in r["vertices"]:
            w.writerow([repr(x) for x in v])
    else:
        raise ValueError(f"no CSV layout for {command}")
    return buf.getvalue()


def _emit(cfg: RunConfig, records: list[dict]) -> None:
    if cfg.format == "csv":
        text = _csv_text(cfg.command, records)
    else:
        text = "".join(json.dumps(r) + "\n" for r in records)
    if cfg.output:
        with open(cfg.output, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _dispatch(cfg: RunConfig, C) -> list[dict]:
    kw = dict(workers=cfg.threads, deterministic=cfg.deterministic)
    if cfg.command == "pressure":
        if cfg.depth is not None and cfg.depths is not None:
            raise ValueError("give --depth or --depths, not both")
        depths = cfg.depths if cfg.depths is not None else [cfg.depth or 8]
        return handlers.pressure_records(C, cfg.q, depths, **kw)
    if cfg.command == "spectrum":
        return handlers.spectrum_records(C, cfg.alphas, cfg.depth or 8, **kw)
    if cfg.command == "lyapunov":
        return [handlers.lyapunov_record(C, cfg.depth or 8, cfg.measure, **kw)]
    if cfg.command == "omega":
        return [
            handlers.omega_record(
                C,
                cfg.depth or 8,
                probe_radius=cfg.probe_radius,
                probe_count=cfg.probe_count,
                **kw,
            )
        ]
    if cfg.command == "check-typical":
        return [
            handlers.typical_record(
                C,
                max_period=cfg.max_period,
                max_bridge=cfg.max_bridge,
                tol=cfg.tol,
            )
        ]
    if cfg.command == "check-dominated":
        return [
            handlers.dominated_record(
                C,
                cfg.index,
                lengths=cfg.depths,
                mode=cfg.mode,
                workers=cfg.threads,
            )
        ]
    if cfg.command == "crosscheck":
        return [
            handlers.crosscheck_record(
                C, cfg.q, cfg.depth or 8, cfg.family, workers=cfg.threads
            )
        ]
    raise ValueError(f"unknown command {cfg.command!r}")


def run(cfg: RunConfig) -> int:
    if cfg.format == "csv" and cfg.command in _REPORT_COMMANDS:
        print(
            f"{cfg.command} emits structured reports; CSV output is not "
            "available, use --format json",
            file=sys.stderr,
        )
        return EXIT_USAGE
    try:
        C = load_cocycle(cfg.cocycle_path)
    except (OSError, ValueError) as e:
        print(str(e), file=sys.stderr)
        return EXIT_USAGE
    try:
        records = _dispatch(cfg, C)
    except BudgetError as e:
        print(str(e), file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, NumericError) as e:
        print(str(e), file=sys.stderr)
        return EXIT_USAGE
    _emit(cfg, records)
    if cfg.command in ("check-typical", "check-dominated"):
        if records[0]["verdict"] == "inconclusive":
            return EXIT_INCONCLUSIVE
    return EXIT_OK


def main(argv=None) -> int:
    return run(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
