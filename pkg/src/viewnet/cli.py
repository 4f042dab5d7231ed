"""Command-line front end.

Exit codes: 0 consistent (or a successful parse/graph/witness command),
1 inconsistent, 2 unknown, 3 usage, input or parse errors.
"""

from __future__ import annotations

import argparse
import glob
import os
import sys
from typing import List, Optional

from . import __version__
from .checker import STRATEGIES, Verdict, check_network
from .errors import DiagnosticError, ViewNetError
from .netlang import export_dot, load, parse_view
from .structural import Bounds
from .witness import filmstrip_events

EXIT = {Verdict.CONSISTENT: 0, Verdict.INCONSISTENT: 1, Verdict.UNKNOWN: 2}
ERROR = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"viewnet: error: {message}", file=sys.stderr)
        raise SystemExit(ERROR)


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if n <= 0:
        raise argparse.ArgumentTypeError("bounds must be positive")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="viewnet", description="Consistency checking for networks of UML views.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    c = sub.add_parser("check", help="check network consistency")
    c.add_argument("project", help=".dol file, or a directory holding exactly one")
    which = c.add_mutually_exclusive_group(required=True)
    which.add_argument("--network")
    which.add_argument("--all", action="store_true")
    c.add_argument("--strategy", choices=STRATEGIES, default="incremental")
    c.add_argument("--max-objects", type=_positive, default=2)
    c.add_argument("--depth", type=_positive, default=60)
    c.add_argument("--queue-depth", type=_positive, default=2)
    c.add_argument("--max-states", type=_positive, default=100000)
    c.add_argument("--format", choices=("text", "structured"), default="text")
    c.add_argument("--witness", metavar="DIR", help="write the witness bundle here")
    c.add_argument("--witnesses", metavar="DIR", help="witness bundle to re-check (decentralized)")
    c.add_argument("--out", metavar="FILE")
    c.add_argument("--seed", type=int, default=0, help="reserved; the engines are deterministic")
    c.add_argument("--timing", action="store_true", help="include wall time in the report")

    q = sub.add_parser("parse", help="parse and validate view or .dol files")
    q.add_argument("files", nargs="+")

    g = sub.add_parser("graph", help="export the development graph as DOT")
    g.add_argument("project")
    g.add_argument("--out", metavar="FILE")

    w = sub.add_parser("witness", help="show a witness bundle")
    w.add_argument("directory")

    sub.add_parser("version", help="print the version")
    return p


def _dol_path(project: str) -> str:
    if os.path.isdir(project):
        found = sorted(glob.glob(os.path.join(project, "*.dol")))
        if len(found) != 1:
            raise ViewNetError(f"{project}: expected exactly one .dol file, found {len(found)}")
        return found[0]
    if not os.path.isfile(project):
        raise ViewNetError(f"{project}: no such file")
    return project


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _check(a) -> int:
    if a.strategy == "decentralized" and not a.witnesses:
        raise ViewNetError("the decentralized strategy needs --witnesses DIR")
    _, graph = load(_dol_path(a.project))
    b = Bounds(a.max_objects, a.depth, a.queue_depth, a.max_states)
    names = sorted(graph.networks) if a.all else [a.network]
    if not names:
        raise ViewNetError("the project declares no network")
    reports = []
    for n in names:
        wdir = a.witnesses
        if wdir and a.all:
            wdir = os.path.join(wdir, n)
        reports.append(check_network(graph, n, a.strategy, b, wdir))
    if a.format == "structured":
        import json

        docs = [r.to_dict(a.timing) for r in reports]
        text = json.dumps(docs if a.all else docs[0], sort_keys=True, indent=2) + "\n"
    else:
        text = "\n".join(r.to_text(a.timing) for r in reports)
    _emit(text, a.out)
    if a.witness:
        for r in reports:
            if r.witness is not None:
                r.witness.write(os.path.join(a.witness, r.network) if a.all else a.witness)
    verdicts = {r.verdict for r in reports}
    if Verdict.UNKNOWN in verdicts:
        return EXIT[Verdict.UNKNOWN]
    if Verdict.INCONSISTENT in verdicts:
        return EXIT[Verdict.INCONSISTENT]
    return EXIT[Verdict.CONSISTENT]


def _parse(a) -> int:
    for path in a.files:
        if path.endswith(".dol"):
            spec, graph = load(path)
            print(f"{path}: ok, {len(spec.decls)} declarations, {len(graph.nodes)} nodes, {len(graph.networks)} networks")
            continue
        if not os.path.isfile(path):
            raise ViewNetError(f"{path}: no such file")
        with open(path, encoding="utf-8") as fh:
            v = parse_view(fh.read(), path)
        print(f"{path}: ok, {type(v).__name__} {getattr(v, 'name', '')}".rstrip())
    return 0


def _graph(a) -> int:
    _, graph = load(_dol_path(a.project))
    _emit(export_dot(graph), a.out)
    return 0


def _witness(a) -> int:
    path = os.path.join(a.directory, "trace.txt")
    if not os.path.isfile(path):
        raise ViewNetError(f"{a.directory}: not a witness bundle (no trace.txt)")
    for name in ("init.od", "ts.txt"):
        f = os.path.join(a.directory, name)
        if os.path.isfile(f):
            with open(f, encoding="utf-8") as fh:
                print(f"== {name}")
                print(fh.read(), end="")
    with open(path, encoding="utf-8") as fh:
        events = filmstrip_events(fh.read())
    print("== events")
    for e in events:
        print(e)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    a = build_parser().parse_args(argv)
    try:
        if a.command == "check":
            return _check(a)
        if a.command == "parse":
            return _parse(a)
        if a.command == "graph":
            return _graph(a)
        if a.command == "witness":
            return _witness(a)
        print(f"viewnet {__version__}")
        return 0
    except DiagnosticError as e:
        for d in e.diagnostics:
            print(f"{e.source + ':' if e.source else ''}{d}", file=sys.stderr)
        return ERROR
    except (ViewNetError, OSError, ValueError) as e:
        print(f"viewnet: {e}", file=sys.stderr)
        return ERROR


def run(argv: Optional[List[str]] = None) -> int:
    """Entry point returning the exit code instead of raising SystemExit."""
    try:
        return main(argv)
    except SystemExit as e:
        return int(e.code or 0)


if __name__ == "__main__":
    raise SystemExit(main())
