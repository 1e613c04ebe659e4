"""Command line harness.

``pcollapse run <scenario>`` executes one scenario (or ``all``) and writes
a JSON or CSV report per scenario into the output directory, rendering
the matching PNG figures alongside unless ``--no-figures`` is given.

Exit codes: 0 success, 2 configuration or usage error, 3 I/O failure,
4 soft-assertion failure under ``--strict``.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from ._version import __version__
from .figures import render_report
from .harness import SCENARIOS, ScenarioConfig, run_scenario, write_report
from .noise import NoiseConfig, read_noise_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SOFT = 4

_DEFAULT_SHOTS = 10000
_SEED_ENV = "PCOLLAPSE_SEED"


def _parse_p_grid(text: str) -> tuple[float, ...]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"--p-grid expects START:STOP:STEP, got {text!r}")
    start, stop, step = (float(x) for x in parts)
    if step <= 0:
        raise ValueError(f"--p-grid step must be positive, got {step}")
    if stop < start:
        raise ValueError(f"--p-grid stop {stop} is below start {start}")
    values = []
    k = 0
    while True:
        v = start + k * step
        if v > stop + 1e-9:
            break
        # Round away accumulated binary error so 0.1 steps land on 0.3,
        # not 0.30000000000000004.
        values.append(round(v, 12))
        k += 1
    return tuple(values)


def _parse_p_list(text: str) -> tuple[float, ...]:
    items = [part.strip() for part in text.split(",") if part.strip()]
    if not items:
        raise ValueError("--p-list must contain at least one value")
    return tuple(float(item) for item in items)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcollapse",
        description=("Simulate partial-collapse polarization measurements "
                     "and their reversal, writing data reports and figures."),
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser(
        "run", help="run one scenario (or all) and write its report")
    run_p.add_argument("scenario", choices=SCENARIOS + ("all",))
    grid = run_p.add_mutually_exclusive_group()
    grid.add_argument("--p-grid", metavar="START:STOP:STEP",
                      help="measurement strength sweep (default 0:0.9:0.1)")
    grid.add_argument("--p-list", metavar="P1,P2,...",
                      help="explicit strength values")
    run_p.add_argument("--shots", type=int, default=None, metavar="N",
                       help="counts per tomography setting; 0 uses exact "
                            "probabilities (default 10000)")
    run_p.add_argument("--seed", type=int, default=None, metavar="S",
                       help=f"base RNG seed (default 1, or ${_SEED_ENV})")
    run_p.add_argument("--noise", default="ideal", metavar="SPEC",
                       help="noise model: 'ideal', 'defaults', or a config "
                            "file path (default ideal)")
    run_p.add_argument("--settings", type=int, choices=(16, 36), default=36,
                       help="two-qubit tomography settings (default 36)")
    run_p.add_argument("--out", default="reports", metavar="DIR",
                       help="output directory (default ./reports)")
    run_p.add_argument("--format", choices=("json", "csv"), default="json",
                       help="report format (default json)")
    run_p.add_argument("--strict", action="store_true",
                       help="exit 4 when any soft assertion fails")
    run_p.add_argument("--no-figures", action="store_true",
                       help="skip PNG rendering")
    return parser


def _resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(_SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(
                f"{_SEED_ENV} must be an integer, got {env!r}") from None
    return 1


def _resolve_noise(spec: str) -> tuple[NoiseConfig, str, bool]:
    """Returns (config, label, from_file)."""
    if spec == "ideal":
        return NoiseConfig(), "ideal", False
    if spec == "defaults":
        return NoiseConfig.defaults(), "defaults", False
    return read_noise_config(Path(spec)), spec, True


def _build_config(args: argparse.Namespace) -> ScenarioConfig:
    noise, label, from_file = _resolve_noise(args.noise)
    if args.shots is not None:
        shots = args.shots
    elif from_file:
        shots = noise.shots
    else:
        shots = _DEFAULT_SHOTS
    if args.p_grid is not None:
        p_grid = _parse_p_grid(args.p_grid)
        is_default = False
    elif args.p_list is not None:
        p_grid = _parse_p_list(args.p_list)
        is_default = False
    else:
        p_grid = ScenarioConfig.__dataclass_fields__["p_grid"].default
        is_default = True
    return ScenarioConfig(
        p_grid=p_grid,
        p_grid_is_default=is_default,
        shots=shots,
        seed=_resolve_seed(args),
        noise=noise,
        noise_label=label,
        settings=args.settings,
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        cfg = _build_config(args)
    except ValueError as exc:
        print(f"pcollapse: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"pcollapse: cannot read noise config: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        reports = run_scenario(args.scenario, cfg)
    except ValueError as exc:
        print(f"pcollapse: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    failures = []
    try:
        for report in reports:
            path = write_report(report, args.out, args.format)
            line = (f"{report.scenario}: {len(report.records)} records "
                    f"-> {path} ({report.wall_time:.2f}s)")
            if not args.no_figures:
                figure_paths = render_report(report, args.out)
                names = ", ".join(p.name for p in figure_paths)
                line += f" [figures: {names}]"
            print(line)
            failures.extend(report.soft_failures())
    except OSError as exc:
        print(f"pcollapse: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO

    for check in failures:
        print(
            "pcollapse: soft check failed: "
            f"{check['name']} = {check['value']:.6g} outside "
            f"[{check['lower']:.6g}, {check['upper']:.6g}] "
            f"(reference {check['reference']:.6g})",
            file=sys.stderr,
        )
    if failures and args.strict:
        return EXIT_SOFT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
