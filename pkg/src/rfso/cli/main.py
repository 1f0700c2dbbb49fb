"""``rfso`` command line.

Exit codes: 0 success, 1 numerical or validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..asymptotics import AsymptoticValidityError
from ..numerics import NumericsError
from ..simulate import THREADS_ENV
from .commands import compute_curve, diversity_table, gap_table, run_validation, sample_values
from .config import PRESETS, ConfigError, RunConfig, load_config

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML or JSON run configuration")
    p.add_argument("--preset", choices=sorted(PRESETS), help="start from a figure preset")
    p.add_argument("--seed", type=int, help="Monte Carlo seed")
    p.add_argument("--samples", type=int, help="Monte Carlo sample count")
    p.add_argument("--methods", help="comma-separated subset of exact,approx,asymptotic,mc")
    p.add_argument("--mods", help="comma-separated modulations, e.g. bpsk,qpsk,8psk,dpsk,ncfsk")
    p.add_argument("--strategy", choices=["fixed", "channel_dependent"])
    p.add_argument("--c", type=float, help="fixed-gain constant C")
    p.add_argument("--channel", choices=["malaga", "k", "gamma_gamma"])
    for name in ("alpha", "rho", "b0", "omega", "phase-diff"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--beta", type=int)
    p.add_argument("--snr", nargs=3, type=float, metavar=("START", "STOP", "STEP"),
                   help="SNR grid in dB")
    p.add_argument("--threads", type=int, help=f"worker threads (default: ${THREADS_ENV} or auto)")


def _build_config(args) -> RunConfig:
    base = PRESETS[args.preset] if args.preset else RunConfig()
    cfg = load_config(args.config, base) if args.config else base
    mc, channel, grid = cfg.mc, cfg.channel, cfg.grid
    if args.seed is not None:
        mc = replace(mc, seed=args.seed)
    if args.samples is not None:
        mc = replace(mc, samples=args.samples)
    for attr, key in (("channel", "kind"), ("alpha", "alpha"), ("beta", "beta"), ("rho", "rho"),
                      ("b0", "b0"), ("omega", "omega"), ("phase_diff", "phase_diff")):
        value = getattr(args, attr)
        if value is not None:
            channel = replace(channel, **{key: value})
    if args.snr is not None:
        grid = replace(grid, start=args.snr[0], stop=args.snr[1], step=args.snr[2])
    updates = {"mc": mc, "channel": channel, "grid": grid}
    if args.methods is not None:
        updates["methods"] = tuple(m.strip().lower() for m in args.methods.split(",") if m.strip())
    if args.mods is not None:
        updates["modulations"] = tuple(m.strip().lower() for m in args.mods.split(",") if m.strip())
    if args.strategy is not None:
        updates["strategy"] = args.strategy
    if args.c is not None:
        updates["c"] = args.c
    if getattr(args, "out", None) is not None:
        updates["out"] = args.out
    if getattr(args, "format", None) is not None:
        updates["format"] = args.format
    return replace(cfg, **updates).validate()


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rfso", description=(
        "ASER of dual-hop RF/FSO amplify-and-forward relaying over Rayleigh and Malaga fading"))
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curve", help="ASER versus SNR table")
    _common(p)
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp from metadata")

    p = sub.add_parser("gap", help="asymptotic SNR gaps in dB")
    _common(p)
    p.add_argument("--reference", default="bpsk", help="MPSK reference scheme")
    p.add_argument("--other", help="comma-separated schemes to compare against")
    p.add_argument("--gap-strategy", choices=["fixed", "channel_dependent"],
                   help="restrict to one relay strategy")

    p = sub.add_parser("diversity", help="fitted diversity order per modulation")
    _common(p)
    p.add_argument("--window", nargs=2, type=float, default=[30.0, 40.0], metavar=("LO", "HI"))

    p = sub.add_parser("validate", help="closed form vs quadrature vs Monte Carlo")
    _common(p)
    p.add_argument("--points", default="10,20,30", help="SNR points in dB")
    p.add_argument("--mc-samples", type=int, default=200_000)
    p.add_argument("--report", help="write a JSON report here")
    p.add_argument("--tolerance-scale", type=float, default=1.0, help=argparse.SUPPRESS)

    p = sub.add_parser("sample", help="raw draws, one per line")
    _common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--what", choices=["irradiance", "snr"], default="irradiance")
    p.add_argument("--snr-db", type=float, default=20.0)
    p.add_argument("--out", help="output path (stdout when omitted)")
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_curve(args, cfg: RunConfig) -> int:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        curve, failures = compute_curve(cfg, timestamp=not args.no_timestamp, workers=args.threads)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if cfg.out:
        curve.write(cfg.out, cfg.format)
    else:
        sys.stdout.write(curve.to_json() if cfg.format == "json" else curve.to_csv())
    if failures:
        print(f"error: {failures} grid values could not be computed (written as NaN)",
              file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _cmd_gap(args, cfg: RunConfig) -> int:
    others = tuple(o.strip() for o in args.other.split(",")) if args.other else None
    explicit_channel = args.config or args.preset or args.channel or args.rho is not None
    rows = gap_table(args.gap_strategy, args.reference, others, cfg if explicit_channel else None)
    print(f"{'strategy':<18} {'reference':<9} {'other':<7} {'xi':<7} {'gap_db':>8}")
    for r in rows:
        print(f"{r.strategy:<18} {r.reference:<9} {r.other:<7} {r.variant:<7} {r.gap_db:8.4f}")
    return EXIT_OK


def _cmd_diversity(args, cfg: RunConfig) -> int:
    rows = diversity_table(cfg, tuple(args.window))
    print(f"{'modulation':<10} {'slope':>8}  note")
    for name, slope, note in rows:
        print(f"{name:<10} {slope:8.4f}  {note}")
    return EXIT_OK


def _cmd_validate(args, cfg: RunConfig) -> int:
    points = tuple(float(x) for x in args.points.split(",") if x.strip())
    checks = run_validation(cfg, points, args.mc_samples, args.tolerance_scale)
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    if args.report:
        Path(args.report).write_text(json.dumps(
            {"checks": [c.as_dict() for c in checks], "passed": failed == 0,
             "config": cfg.to_dict()}, indent=2, sort_keys=True) + "\n")
    return EXIT_OK if failed == 0 else EXIT_FAIL


def _cmd_sample(args, cfg: RunConfig) -> int:
    if args.n <= 0:
        raise ConfigError("--n must be positive")
    values = sample_values(cfg, args.n, args.what, args.snr_db)
    _emit("".join("%.17g\n" % v for v in np.asarray(values)), args.out)
    return EXIT_OK


_COMMANDS = {"curve": _cmd_curve, "gap": _cmd_gap, "diversity": _cmd_diversity,
             "validate": _cmd_validate, "sample": _cmd_sample}


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        cfg = _build_config(args)
        return _COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"rfso {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AsymptoticValidityError, NumericsError, ArithmeticError) as exc:
        print(f"rfso {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
