"""Командная строка: разбор флагов, конфиг, вызов команды, вывод отчёта."""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from app import core
from app.commands import register_commands
from app.config import FORMATS, Config
from app.errors import EngineError, VerificationError
from app.instances import load_instance
from app.report import emit

logger = logging.getLogger(__name__)

COMMANDS = ("hilbert", "hpoly", "invariants", "superficial", "rr", "depth", "delta", "classify", "verify")

# флаг CLI -> поле Config
_FLAG_FIELDS = {
    "p": "p",
    "cap": "cap",
    "max_cap": "max_cap",
    "seed": "seed",
    "window": "window",
    "format": "fmt",
    "max_trials": "max_trials",
    "seeds": "seeds",
    "workers": "workers",
    "log_level": "log_level",
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mcm",
        description="Exact invariants of maximal Cohen-Macaulay modules over hypersurface rings.",
    )
    ap.add_argument("command", choices=COMMANDS, help="What to compute")
    ap.add_argument("instance", nargs="?", type=Path, help="Instance JSON file (verify without it runs the bundled corpus)")
    ap.add_argument("--p", type=int, help="Prime characteristic of the residue field (default 32003)")
    ap.add_argument("--cap", type=int, help="Truncation degree to start from (default 7)")
    ap.add_argument("--max-cap", type=int, help="Largest truncation degree before giving up (default 10)")
    ap.add_argument("--seed", type=int, help="Seed for random superficial elements (default 42 or MCM_SEED)")
    ap.add_argument("--window", type=int, help="Hilbert function window (default cap-2)")
    ap.add_argument("--format", choices=FORMATS, help="Output format (default table)")
    ap.add_argument("--max-trials", type=int, help="Random draws per superficial element (default 50)")
    ap.add_argument("--seeds", type=int, help="verify: seeds per instance for the determinism check (default 5)")
    ap.add_argument("--workers", type=int, help="verify: instances checked in parallel (default 4)")
    ap.add_argument("--log-level", choices=("DEBUG", "INFO", "WARNING", "ERROR"), help="Log level on stderr")
    return ap


def explicit_flags(args: argparse.Namespace) -> frozenset:
    return frozenset(field for flag, field in _FLAG_FIELDS.items() if getattr(args, flag) is not None)


def load_config(args: argparse.Namespace) -> Config:
    overrides = {field: getattr(args, flag) for flag, field in _FLAG_FIELDS.items()}
    return Config.from_env().with_overrides(**overrides)


async def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level or "WARNING"),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = load_config(args)
        core.explicit_flags = explicit_flags(args)
        register_commands()

        inst = None
        if args.instance is not None:
            inst = load_instance(args.instance)
            cfg = inst.tune(cfg, core.explicit_flags)

        handler = core.commands[args.command]
        report = await handler(inst, cfg)
    except VerificationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for d in exc.diffs:
            print(f"  {d['instance']}: {d['key']}: expected {d['expected']}, computed {d['computed']}", file=sys.stderr)
        return exc.exit_code
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code

    print(emit(report, cfg.fmt))
    return 0

