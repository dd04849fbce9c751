"""Command-line entry point.

Usage:
    flocklab run <preset|config.json> [--seed N] [--out DIR] [--dt X]
                 [--T X] [--param key=value ...]
    flocklab list-presets
    flocklab validate <config.json>

Exit codes: 0 success, 2 configuration error, 3 runtime model error.
All state flows through flags and config files; no environment variables.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import (
    ConfigInvalidError,
    DegenerateVelocityError,
    FlocklabError,
    IoFailureError,
    NonFiniteError,
)
from .presets import list_presets, lookup
from .scenario import ScenarioConfig, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _parse_value(text: str):
    """Best-effort literal: JSON first, comma lists second, bare string last."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    if "," in text:
        return [_parse_value(part) for part in text.split(",")]
    return text


def _load_config(target: str) -> ScenarioConfig:
    if target.endswith(".json"):
        path = Path(target)
        if not path.exists():
            raise ConfigInvalidError(f"config file {target} does not exist")
        cfg = ScenarioConfig.from_json(path.read_text())
    else:
        cfg = ScenarioConfig(name=target)
    lookup(cfg.name)  # unknown presets fail before any work
    return cfg


def _apply_overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out_dir = args.out
    if args.dt is not None:
        cfg.dt = args.dt
    if args.T is not None:
        cfg.horizon_t = args.T
    for item in args.param or []:
        if "=" not in item:
            raise ConfigInvalidError(f"--param expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        cfg.params[key] = _parse_value(value)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="flocklab",
        description="Simulate and verify flocking/consensus dynamics "
                    "on temporal graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a preset or a config file")
    run_p.add_argument("target", help="preset name or path to a config.json")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--out", default=None, help="output directory")
    run_p.add_argument("--dt", type=float, default=None)
    run_p.add_argument("--T", type=float, default=None, help="horizon override")
    run_p.add_argument("--param", action="append", metavar="KEY=VALUE",
                       help="preset parameter override (repeatable)")

    sub.add_parser("list-presets", help="show the preset registry")

    val_p = sub.add_parser("validate", help="validate a config file")
    val_p.add_argument("config", help="path to a config.json")

    args = parser.parse_args(argv)

    if args.command == "list-presets":
        for name, description, detail in list_presets():
            print(f"{name}: {description}")
            print(f"    {detail}")
        return EXIT_OK

    if args.command == "validate":
        try:
            cfg = _load_config(args.config)
            cfg.validate()
        except ConfigInvalidError as err:
            print(f"invalid: {err}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"ok: {cfg.name}")
        return EXIT_OK

    try:
        cfg = _apply_overrides(_load_config(args.target), args)
    except ConfigInvalidError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        manifest = run_scenario(cfg)
    except ConfigInvalidError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegenerateVelocityError, NonFiniteError, IoFailureError) as err:
        print(f"runtime error in scenario {cfg.name!r}: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    except FlocklabError as err:
        print(f"runtime error in scenario {cfg.name!r}: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    out_dir = cfg.out_dir or f"runs/{cfg.name}"
    print(f"wrote {len(manifest.outputs)} files to {out_dir} "
          f"in {manifest.duration_s:.2f}s")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
