#!/usr/bin/env python3
"""
Matroid kernels: command-line interface

Usage:
    matroid-kernels <command> <inputs...> [--k K] [--seed N] [--prime P]
                    [--output PREFIX] [--verbose]

Examples:
    matroid-kernels solve-dpc star.graph star.pairs --k 1 --seed 7
    matroid-kernels kernel-dpc g.graph g.pairs --k 2 --output out/g
    matroid-kernels compress-dpc g.graph g.pairs --k 2 --epsilon 1e-6 --output out/c
    matroid-kernels decide-compressed out/c.matroid out/c.pairs
    matroid-kernels cover-cut g.graph --sources s.set --sinks t.set
    matroid-kernels kernel-a2sat f.cnf2 --k 2 --seed 7 --output out/f
    matroid-kernels oracle dpc g.graph g.pairs --k 2
    matroid-kernels selftest --quick

Results go to stdout; the last line is always
``RESULT <answer|size> FAILPROB <bound> SEED <seed>``.  Artifacts (kernels,
witnesses, exported matroids) are written as <PREFIX><suffix> when --output
or KERNELS_OUTPUT gives a prefix.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Optional


def _check_file(path: str, label: str) -> str:
    if not Path(path).is_file():
        print(f"[matroid-kernels] ERROR: {label} file not found: {path}", file=sys.stderr)
        sys.exit(1)
    return path


def _log(msg: str) -> None:
    print(f"[matroid-kernels] {msg}", file=sys.stderr)


def _run_flags(p: argparse.ArgumentParser, k: bool = True) -> None:
    if k:
        p.add_argument("--k", type=int, required=True, help="Solution size budget")
    p.add_argument("--seed", type=int, default=None,
                   help="64-bit seed (default: KERNELS_SEED or 0)")
    p.add_argument("--prime", type=int, default=None,
                   help="Field characteristic (default: KERNELS_PRIME or 2^61-1)")


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", metavar="PREFIX", default=None,
                   help="Write artifacts to PREFIX<suffix>")
    p.add_argument("--verbose", action="store_true", help="Debug logging on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matroid-kernels",
        description="Randomized matroid toolkit and polynomial kernels for cut problems.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    for name, help_text in (
        ("solve-dpc", "exact pair cut solver"),
        ("kernel-dpc", "pair cut kernel"),
        ("compress-dpc", "pair cut compression"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("graph")
        p.add_argument("pairs")
        p.add_argument("--source", default="0", help="Source vertex id (default 0)")
        _run_flags(p)
        if name == "compress-dpc":
            p.add_argument("--epsilon", type=float, default=None,
                           help="Failure target (default: KERNELS_EPSILON or 2^-20)")
        _common_flags(p)

    p = sub.add_parser("decide-compressed", help="decide a compressed pair cut instance")
    p.add_argument("matroid")
    p.add_argument("pairs")
    _common_flags(p)

    p = sub.add_parser("cover-cut", help="cut-covering set for sources and sinks")
    p.add_argument("graph")
    p.add_argument("--sources", required=True, metavar="PATH")
    p.add_argument("--sinks", required=True, metavar="PATH")
    _run_flags(p, k=False)
    _common_flags(p)

    for name in ("cover-terminal", "cover-multiway"):
        p = sub.add_parser(name, help=f"{name.split('-')[1]} cut cover")
        p.add_argument("graph")
        p.add_argument("--terminals", required=True, metavar="PATH")
        if name == "cover-multiway":
            p.add_argument("--parts", type=int, required=True, help="Largest partition size")
        _run_flags(p, k=False)
        _common_flags(p)

    for name in ("kernel-dtmwc", "kernel-smwc"):
        p = sub.add_parser(name, help="multiway cut kernel")
        p.add_argument("graph")
        p.add_argument("terminals")
        if name == "kernel-smwc":
            p.add_argument("--parts", type=int, default=None, help="Terminal bound s (default |T|)")
        _run_flags(p)
        _common_flags(p)

    p = sub.add_parser("kernel-multicut", help="multicut kernel")
    p.add_argument("graph")
    p.add_argument("pairs")
    _run_flags(p)
    _common_flags(p)

    p = sub.add_parser("kernel-a2sat", help="Almost 2-SAT kernel")
    p.add_argument("cnf2")
    p.add_argument("--clause-form", action="store_true", help="k counts deleted clauses")
    _run_flags(p)
    _common_flags(p)

    p = sub.add_parser("reduce-vclp", help="vertex cover above LP to above matching")
    p.add_argument("graph")
    p.add_argument("--k", type=int, required=True)
    _common_flags(p)

    p = sub.add_parser("solve-2sat", help="2-SAT solver")
    p.add_argument("cnf2")
    _common_flags(p)

    p = sub.add_parser("oracle", help="brute-force answer for a small instance")
    p.add_argument("problem", choices=["dpc", "mwc", "dtmwc", "multicut", "a2sat", "vc"])
    p.add_argument("files", nargs="+")
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--source", default="0")
    _common_flags(p)

    p = sub.add_parser("selftest", help="seeded invariant sweeps against the oracles")
    p.add_argument("--quick", action="store_true", help="Small sweep counts")
    p.add_argument("--seed", type=int, default=None)
    _common_flags(p)
    return parser


_FILE_ARGS = ("graph", "pairs", "matroid", "terminals", "cnf2", "sources", "sinks")
_PASSTHROUGH = ("k", "seed", "prime", "epsilon", "parts", "source", "clause_form", "quick",
                "problem")


def _payload(args: argparse.Namespace) -> dict:
    payload = {}
    for name in _FILE_ARGS:
        value = getattr(args, name, None)
        if value is not None:
            payload[name] = _check_file(value, name)
    if getattr(args, "files", None):
        payload["files"] = [_check_file(f, "input") for f in args.files]
    for name in _PASSTHROUGH:
        value = getattr(args, name, None)
        if value is not None:
            payload[name] = value
    return payload


def _write_artifacts(prefix: Optional[str], artifacts: dict[str, str]) -> None:
    if not artifacts:
        return
    if prefix is None:
        _log(f"{len(artifacts)} artifact(s) not saved; pass --output PREFIX to keep them")
        return
    for suffix, text in artifacts.items():
        path = Path(f"{prefix}{suffix}")
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        _log(f"Wrote {path}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s",
                        force=True)

    # Defer heavy imports so --help is instant
    from kernels.errors import ContractError, FormatError, KernelsError
    from kernels.registry import dispatch_command
    from kernels.settings import get_settings

    payload = _payload(args)
    _log(f"Command : {args.command}")

    try:
        prefix = args.output if args.output is not None else get_settings().output
        result = dispatch_command(args.command, payload)
    except (FormatError, ContractError) as exc:
        _log(f"ERROR: {exc}")
        return 2
    except KernelsError as exc:
        _log(f"Fatal error: {exc}")
        return 1

    for line in result.lines:
        print(line)
    _write_artifacts(prefix, result.artifacts)
    print(result.summary_line())
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
