"""Command-line entry point: ``krylov-ssh <subcommand> [flags]``.

Exit codes: 0 success, 1 configuration error, 2 sweep finished with failed points.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .runner import (
    RECIPES,
    RUNNERS,
    ConfigError,
    ExperimentConfig,
    recipe_config,
)

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--w", type=float)
    p.add_argument("--v", type=float)
    p.add_argument("--gamma", type=_floats, help="comma-separated list")
    p.add_argument("--cells", type=_ints, help="comma-separated list")
    p.add_argument("--boundary", choices=["open", "periodic"])
    p.add_argument("--initial", help="localized:<site> or pair:<s1>,<s2>")
    p.add_argument("--tmax", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--tref", type=float)
    p.add_argument("--subsystems", type=_ints, help="comma-separated subsystem sizes in cells")
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="krylov-ssh", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("spectrum", "dispersion and numerical spectra"),
        ("evolve", "spread complexity, entropy and KIPR"),
        ("kcop", "purification complexity of Krylov subsystems"),
        ("qfi", "quantum Fisher information in state and operator pictures"),
    ]:
        _add_common(sub.add_parser(name, help=helptext))
    sw = sub.add_parser("sweep", help="run a sweep described by a config file")
    _add_common(sw)
    sw.add_argument("--kind", choices=sorted(RUNNERS), default="dynamics")
    rp = sub.add_parser("reproduce", help="run a stored figure recipe")
    rp.add_argument("figure", choices=sorted(RECIPES))
    rp.add_argument("--out")
    return parser


def config_from_args(args) -> ExperimentConfig:
    overrides = {
        "w": args.w,
        "v": args.v,
        "gamma_list": args.gamma,
        "cells_list": args.cells,
        "boundary": args.boundary,
        "initial": args.initial,
        "t_max": args.tmax,
        "dt": args.dt,
        "t_ref": args.tref,
        "subsystem_list": args.subsystems,
        "output_dir": args.out,
    }
    if args.config:
        cfg = ExperimentConfig.from_file(args.config, **overrides)
    else:
        cfg = ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})
    return cfg.validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "reproduce":
            kind, cfg = recipe_config(args.figure, args.out)
        else:
            cfg = config_from_args(args)
            kind = {"evolve": "dynamics", "sweep": getattr(args, "kind", "dynamics")}.get(args.command, args.command)
        cfg.validate()
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    result = RUNNERS[kind](cfg)
    n_fail = len(result.failed)
    print(f"{kind}: {len(result.rows)} rows, {n_fail} failed -> {result.output_dir}/manifest.json")
    return EXIT_PARTIAL if n_fail else EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
