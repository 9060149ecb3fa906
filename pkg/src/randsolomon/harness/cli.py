"""Command-line entry point: ``python -m randsolomon <command>``.

Exit status: 0 when every checked property holds, 1 on any invariant
violation (or a failed statistical or replay check), 2 on bad input.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import MASTER_SEED, PRESETS, ConfigError, ExperimentConfig, apply_overrides, defaults_text, parse_config
from .experiments import PAPER_PRE, PAPER_RAND, attack_demo, golden_stage, replay, run_experiment, uniformity

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


def _load(args: argparse.Namespace) -> ExperimentConfig:
    if args.preset:
        cfg = PRESETS[args.preset]()
    elif args.config:
        path = Path(args.config)
        cfg = parse_config(path.read_text(), origin=str(path))
    else:
        cfg = ExperimentConfig().validate()
    return apply_overrides(cfg, args.set or [])


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        Path(path).write_text(text)
    sys.stdout.write(text)


def cmd_run(args: argparse.Namespace) -> int:
    if args.print_defaults:
        sys.stdout.write(defaults_text())
        return EXIT_OK
    cfg = _load(args)
    with contextlib.ExitStack() as stack:
        sink = stack.enter_context(open(args.trace, "w")) if args.trace else None
        report = run_experiment(cfg, sink)
    if args.preset == "paper-example":
        got = golden_stage()
        pre = ",".join(b.hex().upper() for b in PAPER_PRE)
        report.notes.append(f"golden XOR stage: PRE {pre} -> {got.hex().upper()} (expected {PAPER_RAND.hex().upper()})")
        if got != PAPER_RAND:
            report.violations.append("golden XOR stage mismatch")
    _emit(report.text(), args.report)
    return EXIT_OK if report.ok else EXIT_VIOLATION


def cmd_print_defaults(args: argparse.Namespace) -> int:
    sys.stdout.write(defaults_text())
    return EXIT_OK


def cmd_uniformity(args: argparse.Namespace) -> int:
    base = ExperimentConfig(n=args.n, f=args.f, seed=args.seed, runs=args.runs)
    overrides = list(args.set or [])
    if args.strategy:
        overrides += [f"strategy={args.strategy}", f"byzantine={args.byzantine or 'auto'}"]
    cfg = apply_overrides(base.validate(), overrides)
    report = uniformity(cfg)
    _emit(report.text(), args.report)
    u = report.uniformity
    if not report.ok or (u is not None and u.passed is False):
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_attack_demo(args: argparse.Namespace) -> int:
    report = attack_demo(args.n, args.f, victims=args.victims, max_schedules=args.max_schedules)
    _emit(report.text(), args.report)
    return EXIT_OK if report.ok else EXIT_VIOLATION


def cmd_replay(args: argparse.Namespace) -> int:
    results = replay(Path(args.trace).read_text())
    bad = [r for r in results if not r.matches]
    for r in results:
        status = "identical" if r.matches else f"differs at record {r.first_diff}"
        print(f"run {r.index} (seed {r.seed}): {status}")
    print(f"\n[report]\nruns = {len(results)}\nmismatches = {len(bad)}\nstatus = {'ok' if not bad else 'fail'}")
    return EXIT_OK if not bad else EXIT_VIOLATION


def _ids(raw: str) -> list[int]:
    return [int(x) for x in raw.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="randsolomon", description="RandSolomon BFT random number generation simulator")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment from a config file")
    r.add_argument("config", nargs="?", help="key = value config file (see print-defaults)")
    r.add_argument("--preset", choices=sorted(PRESETS), help="use a built-in configuration")
    r.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key (repeatable)")
    r.add_argument("--trace", metavar="PATH", help="write the line-delimited run trace here")
    r.add_argument("--report", metavar="PATH", help="also write the report here")
    r.add_argument("--print-defaults", action="store_true", help="print the documented default config and exit")
    r.set_defaults(func=cmd_run)

    d = sub.add_parser("print-defaults", help="print the documented default config")
    d.set_defaults(func=cmd_print_defaults)

    u = sub.add_parser("uniformity", help="chi-square test of the leading output byte")
    u.add_argument("--n", type=int, default=4)
    u.add_argument("--f", type=int, default=None, help="default floor((N-1)/3)")
    u.add_argument("--runs", type=int, default=2000)
    u.add_argument("--seed", type=int, default=MASTER_SEED, help=f"master seed (default {MASTER_SEED})")
    u.add_argument("--strategy", help="give the Byzantine processes this strategy")
    u.add_argument("--byzantine", help="Byzantine ids (default: the last f)")
    u.add_argument("--set", action="append", metavar="KEY=VALUE")
    u.add_argument("--report", metavar="PATH")
    u.set_defaults(func=cmd_uniformity)

    a = sub.add_parser("attack-demo", help="divergence attack with and without retrace")
    a.add_argument("--n", type=int, default=4)
    a.add_argument("--f", type=int, default=1)
    a.add_argument("--victims", type=_ids, default=[0], help="comma-separated victim ids")
    a.add_argument("--max-schedules", type=int, default=None, help="stop after this many schedules")
    a.add_argument("--report", metavar="PATH")
    a.set_defaults(func=cmd_attack_demo)

    rp = sub.add_parser("replay", help="re-execute a trace file and compare byte-for-byte")
    rp.add_argument("trace")
    rp.set_defaults(func=cmd_replay)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
