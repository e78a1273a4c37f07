"""Command-line entry point.

    pilotwave run CONFIG --out DIR [--seed N] [--force]
    pilotwave --list-scenarios
    pilotwave --print-defaults SCENARIO
    pilotwave --version

Exit codes: 0 run completed (manifest written), 2 bad command line or
config, 3 the scenario failed numerically, 4 output directory refused or
unwritable, 1 anything else.  On codes 1 and 3 (and 2 when the output
directory is usable) an ``error.json`` record is left in the output
directory.
"""

from __future__ import annotations

import argparse
import shutil
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .errors import ConfigError, PilotWaveError
from .files import defaults_toml, parse_config, write_error, write_record
from .scenarios import SCENARIO_IDS, run as run_scenario

EXIT_OK, EXIT_OTHER, EXIT_CONFIG, EXIT_NUMERIC, EXIT_OUTPUT = 0, 1, 2, 3, 4


def _parser():
    ap = argparse.ArgumentParser(prog="pilotwave", description="Wave-packet and pilot-wave scenario runner")
    ap.add_argument("--version", action="version", version=f"pilotwave {__version__}")
    ap.add_argument("--list-scenarios", action="store_true", help="print the scenario ids and exit")
    ap.add_argument("--print-defaults", metavar="SCENARIO", help="print a config file holding every default")
    sub = ap.add_subparsers(dest="command")
    r = sub.add_parser("run", help="run one scenario from a config file")
    r.add_argument("config", type=Path)
    r.add_argument("--out", type=Path, required=True, help="output directory")
    r.add_argument("--seed", type=int, default=None, help="override the seed in the config")
    r.add_argument("--force", action="store_true", help="allow writing into a non-empty directory")
    return ap


def _err(msg):
    print(f"pilotwave: {msg}", file=sys.stderr)


def _prepare_out(out: Path, force: bool):
    if out.exists() and not out.is_dir():
        raise FileExistsError(f"{out} exists and is not a directory")
    if out.is_dir() and any(out.iterdir()):
        if not force:
            raise FileExistsError(f"{out} is not empty (use --force to overwrite)")
        for name in ("manifest.json", "error.json"):
            (out / name).unlink(missing_ok=True)
        for sub in ("frames", "series"):
            if (out / sub).is_dir():
                shutil.rmtree(out / sub)
    out.mkdir(parents=True, exist_ok=True)


def cmd_run(args) -> int:
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    try:
        _prepare_out(args.out, args.force)
    except OSError as exc:
        _err(str(exc))
        return EXIT_OUTPUT
    try:
        cfg = parse_config(args.config)
        if args.seed is not None:
            cfg = cfg.replace(seed=args.seed)
    except ConfigError as exc:
        _err(str(exc))
        write_error(args.out, exc, EXIT_CONFIG)
        return EXIT_CONFIG
    except OSError as exc:
        _err(str(exc))
        write_error(args.out, exc, EXIT_CONFIG)
        return EXIT_CONFIG

    t0 = time.perf_counter()
    try:
        rec = run_scenario(cfg)
    except PilotWaveError as exc:
        _err(f"{cfg.scenario} failed: {type(exc).__name__}: {exc}")
        write_error(args.out, exc, EXIT_NUMERIC)
        return EXIT_NUMERIC
    except Exception as exc:  # noqa: BLE001
        _err(f"{cfg.scenario} failed: {type(exc).__name__}: {exc}")
        write_error(args.out, exc, EXIT_OTHER)
        return EXIT_OTHER
    try:
        man = write_record(rec, args.out, config_path=args.config, started=started)
    except OSError as exc:
        _err(str(exc))
        return EXIT_OUTPUT
    print(f"{cfg.scenario}: {len(man['files'])} files in {args.out} ({time.perf_counter() - t0:.1f} s)")
    return EXIT_OK


def main(argv=None) -> int:
    ap = _parser()
    args = ap.parse_args(argv)
    if args.list_scenarios:
        print("\n".join(SCENARIO_IDS))
        return EXIT_OK
    if args.print_defaults:
        try:
            sys.stdout.write(defaults_toml(args.print_defaults))
        except ConfigError as exc:
            _err(str(exc))
            return EXIT_CONFIG
        return EXIT_OK
    if args.command == "run":
        return cmd_run(args)
    ap.print_usage(sys.stderr)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
