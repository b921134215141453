"""``epart`` command-line interface.

Exit codes: 0 success, 1 usage or configuration error, 2 computation error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .config import ConfigError, build_run_config
from .figures import COMMANDS
from .table import write_csv, write_plot_script

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="epart", description="Entanglement of particles in lattice models.")
    parser.add_argument("--version", action="version", version=f"epart {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run {name}")
        p.add_argument("--config", type=Path, help="flat key = value configuration file")
        p.add_argument("--out", help="output path prefix (CSV written to PREFIX.csv)")
        p.add_argument("--plot", action="store_true", help="also write a matplotlib script producing an SVG")
        p.add_argument("--threads", type=int, default=None, help="worker threads for the sweep")
    return parser


def resolve_threads(flag: int | None) -> int:
    env = os.environ.get("EPART_THREADS")
    if env is not None:
        try:
            value = int(env)
        except ValueError:
            raise UsageError(f"EPART_THREADS must be a positive integer, got {env!r}") from None
    else:
        value = 1 if flag is None else flag
    if value < 1:
        raise UsageError(f"thread count must be positive, got {value}")
    return value


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        threads = resolve_threads(args.threads)
        func, schema, needs_model = COMMANDS[args.command]
        text = ""
        if args.config is not None:
            try:
                text = args.config.read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from None
        cfg = build_run_config(text, schema, needs_model=needs_model)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        where = f"{args.config}: " if args.config else ""
        print(f"epart: config error: {where}{exc}", file=sys.stderr)
        return EXIT_USAGE

    prefix = args.out or cfg.output_prefix or args.command.replace("-", "_")
    start = time.perf_counter()
    try:
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                table, plot = func(cfg, pool.map)
        else:
            table, plot = func(cfg, map)
    except ConfigError as exc:
        print(f"epart: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError, MemoryError, ImportError) as exc:
        print(f"epart: computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    wall = time.perf_counter() - start

    table.metadata[:0] = [("tool", f"epart {__version__}"), ("command", args.command)] + \
        [("config", f"{k} = {v}") for k, v in cfg.echo]
    csv_path = write_csv(table, Path(prefix + ".csv"), wall_time=wall)
    print(f"wrote {csv_path} ({len(table.rows)} rows)")
    if args.plot:
        script = write_plot_script(csv_path, plot.x, plot.ys, plot.group, plot.logx)
        print(f"wrote {script}")
    return EXIT_OK


def main_entry() -> None:
    sys.exit(main())
