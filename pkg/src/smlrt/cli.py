"""Command-line interface.

    smlrt parse <file> [-D NAME=INT ...]
    smlrt db info <path>
    smlrt bench stencil --n 32 --m 32 --steps 100 --mode infer --model DIR ...
    smlrt bench options --count 1024 --depth 64 --mode collect --db DIR ...

Exit codes: 0 success, 1 validation error, 2 I/O error. Set SMLRT_LOG to
error|info|debug to control logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict

from .bench import BenchConfig, emit_report, run_options, run_stencil
from .directives import (
    DirectiveSyntaxError,
    iter_directive_chunks,
    offset_to_line_col,
    parse_directive,
    pretty_print,
)
from .errors import CorruptManifestError, IoError, SmlrtError, VersionMismatchError
from .srdb import open_db

log = logging.getLogger("smlrt")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


def _setup_logging():
    level = os.environ.get("SMLRT_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(
        level=levels.get(level, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _parse_defines(pairs):
    env = {}
    for pair in pairs or []:
        name, _, value = pair.partition("=")
        if not name or not value:
            raise SmlrtError(f"bad -D argument {pair!r}, expected NAME=INT")
        try:
            env[name] = int(value)
        except ValueError:
            raise SmlrtError(f"-D {name} needs an integer, got {value!r}") from None
    return env


def _cmd_parse(args) -> int:
    try:
        text = open(args.file, encoding="utf-8").read()
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    env = _parse_defines(args.define)
    for start, chunk in iter_directive_chunks(text):
        try:
            ast = parse_directive(chunk, env)
        except DirectiveSyntaxError as e:
            line, col = offset_to_line_col(text, start + e.offset)
            print(f"{args.file}:{line}:{col}: {e}", file=sys.stderr)
            return EXIT_VALIDATION
        except SmlrtError as e:
            line, col = offset_to_line_col(text, start)
            print(f"{args.file}:{line}:{col}: {e}", file=sys.stderr)
            return EXIT_VALIDATION
        print(pretty_print(ast))
    return EXIT_OK


def _cmd_db_info(args) -> int:
    db = open_db(args.path, "read")
    manifest = db.info()
    payload = {
        "version": manifest.version,
        "regions": [r.to_json() for r in manifest.regions],
    }
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def _parse_interleave(text: str) -> tuple[int, int]:
    a, _, s = text.partition(":")
    try:
        return int(a), int(s)
    except ValueError:
        raise SmlrtError(
            f"bad --interleave {text!r}, expected ACCURATE:SURROGATE"
        ) from None


def _cmd_bench(args) -> int:
    common = dict(
        mode=args.mode,
        steps=args.steps,
        db_path=args.db,
        model_path=args.model,
        seed=args.seed,
        dtype=args.dtype,
    )
    if args.app == "stencil":
        config = BenchConfig(
            app="stencil",
            n=args.n,
            m=args.m,
            interleave=_parse_interleave(args.interleave),
            **common,
        )
        report = run_stencil(config)
    else:
        config = BenchConfig(
            app="options",
            n_options=args.count,
            depth=args.depth,
            **common,
        )
        report = run_options(config)
    log.info("bench config: %s", asdict(config))

    if args.out:
        fmt = "csv" if args.out.endswith(".csv") else "json"
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(emit_report(report, fmt))
        except OSError as e:
            print(f"error: cannot write {args.out}: {e}", file=sys.stderr)
            return EXIT_IO
    else:
        print(emit_report(report, "text"), end="")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="smlrt", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a directive file, print canonical forms")
    p.add_argument("file")
    p.add_argument(
        "-D",
        "--define",
        action="append",
        metavar="NAME=INT",
        help="bind an integer for identifiers in concrete slice bounds",
    )
    p.set_defaults(fn=_cmd_parse)

    p = sub.add_parser("db", help="database utilities")
    dbsub = p.add_subparsers(dest="db_command", required=True)
    q = dbsub.add_parser("info", help="print the manifest of a database")
    q.add_argument("path")
    q.set_defaults(fn=_cmd_db_info)

    p = sub.add_parser("bench", help="run a mini-app benchmark")
    bsub = p.add_subparsers(dest="app", required=True)

    def add_common(b):
        b.add_argument("--steps", type=int, default=1)
        b.add_argument("--mode", choices=("collect", "infer", "predicated"),
                       default="collect")
        b.add_argument("--db", default=None)
        b.add_argument("--model", default=None)
        b.add_argument("--seed", type=int, default=0)
        b.add_argument("--dtype", choices=("f32", "f64"), default="f32")
        b.add_argument("--out", default=None,
                       help="write a .json or .csv report here")
        b.set_defaults(fn=_cmd_bench)

    b = bsub.add_parser("stencil", help="2-D Jacobi stencil")
    b.add_argument("--n", type=int, default=32)
    b.add_argument("--m", type=int, default=32)
    b.add_argument("--interleave", default="0:1", metavar="A:S",
                   help="accurate:surrogate step schedule")
    add_common(b)

    b = bsub.add_parser("options", help="American option pricing")
    b.add_argument("--count", type=int, default=1024)
    b.add_argument("--depth", type=int, default=64)
    add_common(b)

    return ap


def main(argv=None) -> int:
    _setup_logging()
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (IoError, CorruptManifestError, VersionMismatchError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except SmlrtError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
