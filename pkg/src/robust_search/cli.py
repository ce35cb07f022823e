"""Command-line entry point: one subcommand per scenario plus ``sweep``.

Exit codes: 0 on success, 2 for configuration errors, 3 when a request
exceeds what the simulator supports (e.g. a dense operator above 4096).
"""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import CapabilityError, ConfigError
from .harness.config import ExperimentConfig, load_config, parse_angle
from .harness.scenarios import run_scenario, run_sweep

SUBCOMMANDS = {
    "grover": "grover_baseline",
    "mismatch": "phase_mismatch",
    "iterative": "iterative",
    "recursive": "recursive",
    "hamiltonian": "hamiltonian",
    "nondiagonal": "nondiagonal",
    "workspace": "workspace",
    "per-target": "per_target_matching",
    "sweep": None,
}


def _targets(raw: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in raw.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad target list {raw!r}") from exc


def _angle(raw: str) -> float:
    try:
        return parse_angle(raw)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _angles(raw: str) -> tuple[float, ...]:
    return tuple(_angle(x) for x in raw.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config file (INI-style key = value)")
    common.add_argument("--seed", type=int, required=True, help="master seed (mandatory)")
    common.add_argument("--out", help="CSV output path (default: stdout)")
    common.add_argument("--n-qubits", type=int)
    common.add_argument("--targets", type=_targets, help="comma-separated target indices")
    common.add_argument("--phi", type=_angles,
                        help="target rotation angle (pi/2 style accepted); a comma list sets one angle per target")
    common.add_argument("--varphi", type=_angle, help="R0 rotation angle")
    common.add_argument("--delta-t", type=float)
    common.add_argument("--delta-0", type=float)
    common.add_argument("--levels", type=int)
    common.add_argument("--exploratory", action="store_true",
                        help="allow exploratory scenarios such as per_target_matching")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="robust-search", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def config_from_args(args) -> ExperimentConfig:
    overrides = dict(
        seed=args.seed,
        n_qubits=args.n_qubits,
        targets=args.targets,
        phi=args.phi[0] if args.phi and len(args.phi) == 1 else None,
        phi_list=args.phi if args.phi and len(args.phi) > 1 else None,
        varphi=args.varphi,
        levels=args.levels,
        output=args.out,
        exploratory=True if args.exploratory else None,
    )
    scenario = SUBCOMMANDS[args.command]
    if scenario is not None:
        overrides["scenario"] = scenario
    if args.config:
        cfg = load_config(args.config, **overrides)
    else:
        if scenario is None:
            raise ConfigError("config", "sweep needs --config with a [sweep] block")
        cfg = ExperimentConfig.from_text("", **overrides)
    return cfg.with_overrides(delta_t=args.delta_t, delta_0=args.delta_0)


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    summary_stream = sys.stderr if args.out in (None, "-") else sys.stdout
    try:
        cfg = config_from_args(args).validate()
        if args.command == "sweep":
            csv_text, summaries = run_sweep(cfg)
            _write(csv_text, cfg.output)
            summary_stream.write("\n".join(summaries))
        else:
            res = run_scenario(cfg)
            _write(res.csv(), cfg.output)
            summary_stream.write(res.summary_text())
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CapabilityError as exc:
        print(f"capability error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
