"""Command-line front end: ``olnd generate|validate|list``.

Exit codes: 0 success, 1 unreadable or malformed input, 2 at least one
substation failed (layout error or, for ``validate``, a decency defect),
3 bad command-line flags or configuration.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .cime import Record, list_substations, parse_cime, query_substation
from .diagram import LayoutConfig, parse_config_text
from .emit import emit_layout_json, emit_svg
from .errors import OlndError
from .graph import build_graph
from .layout import layout_substation
from .validate import DecencyReport, corpus_report, report_json, validate

EXIT_OK, EXIT_INPUT, EXIT_FAILURES, EXIT_FLAGS = 0, 1, 2, 3
FORMATS = ("json", "svg")

log = logging.getLogger("olnd")


class _FlagError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        raise _FlagError(message)


class _LineFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        station = getattr(record, "substation", "-")
        code = getattr(record, "code", "-")
        msg = record.getMessage().replace("\n", " ")
        return f"{record.levelname} substation={station} code={code} msg={msg}"


@dataclass(frozen=True)
class RunOptions:
    input_path: Path
    substation: str | None
    output_dir: Path
    formats: tuple[str, ...]
    config: LayoutConfig
    parallelism: int


@dataclass(frozen=True)
class Outcome:
    name: str
    ok: bool
    code: str
    message: str
    warnings: tuple[str, ...] = ()
    report: dict | None = None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="olnd", description="Lay out substation one-line diagrams from CIM/E files.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in (
        ("generate", "write <substation>.layout.json and/or <substation>.svg"),
        ("validate", "lay out substations and write decency_report.json"),
        ("list", "print substation names, one per line"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--input", required=True, type=Path, help="CIM/E input file")
        if name == "list":
            continue
        p.add_argument("--substation", help="only this substation (default: all)")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--config", type=Path, help="key=value file overriding layout settings")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        if name == "generate":
            p.add_argument("--format", default="json,svg", help="comma-separated subset of json,svg")
    return parser


def write_atomic(path: Path, data: bytes) -> None:
    """Write ``data`` to a temporary file beside ``path`` and rename it into place."""
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def safe_name(name: str) -> str:
    return name.replace("/", "_").replace("\\", "_").replace("\0", "_") or "_"


def _layout(name: str, records: list[Record], config: LayoutConfig):
    graph = build_graph(records)
    return layout_substation(graph, config, name=name)


def generate_one(task) -> Outcome:
    name, records, config, formats, out_dir = task
    try:
        diagram = _layout(name, records, config)
        files = {}
        if "json" in formats:
            files[f"{safe_name(name)}.layout.json"] = emit_layout_json(diagram)
        if "svg" in formats:
            files[f"{safe_name(name)}.svg"] = emit_svg(diagram, config)
    except OlndError as exc:
        return Outcome(name, False, exc.code, str(exc))
    for fname, data in files.items():
        write_atomic(Path(out_dir) / fname, data)
    warnings = tuple(f"{w.get('code')}: {w.get('message')}" for w in diagram.warnings)
    return Outcome(name, True, "OK", f"wrote {', '.join(files)}", warnings)


def validate_one(task) -> Outcome:
    name, records, config = task
    try:
        diagram = _layout(name, records, config)
    except OlndError as exc:
        report = DecencyReport(passed=False)
        return Outcome(name, False, exc.code, str(exc), report={"error": exc.code, **report.to_dict()})
    report = validate(diagram, config)
    if report.passed:
        return Outcome(name, True, "OK", "decent", report=report.to_dict())
    msg = (
        f"{len(report.overlap_pairs)} overlaps, {len(report.dangling_endpoints)} dangling, "
        f"{len(report.out_of_region)} out of region"
    )
    return Outcome(name, False, "NotDecent", msg, report=report.to_dict())


def _run(fn, tasks: list, jobs: int) -> list[Outcome]:
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def _load(path: Path):
    try:
        data = path.read_bytes()
    except OSError as exc:
        log.error("cannot read input: %s", exc, extra={"code": "InputError"})
        return None
    try:
        return parse_cime(data)
    except (OlndError, UnicodeDecodeError) as exc:
        code = getattr(exc, "code", "InputError")
        log.error("%s: %s", path, exc, extra={"code": code})
        return None


def _options(args) -> RunOptions:
    if args.jobs < 1:
        raise _FlagError("--jobs must be at least 1")
    formats: tuple[str, ...] = FORMATS
    if getattr(args, "format", None) is not None:
        formats = tuple(f.strip() for f in args.format.split(",") if f.strip())
        if not formats or any(f not in FORMATS for f in formats):
            raise _FlagError(f"--format must be a nonempty subset of {','.join(FORMATS)}")
    config = LayoutConfig()
    if args.config is not None:
        try:
            config = parse_config_text(args.config.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise _FlagError(f"bad --config: {exc}") from None
    return RunOptions(args.input, args.substation, args.out, formats, config, args.jobs)


def _select(store, opts: RunOptions) -> list[str] | None:
    names = list_substations(store)
    if opts.substation is None:
        return names
    if opts.substation not in names:
        log.error("no such substation", extra={"substation": opts.substation, "code": "UnknownSubstation"})
        return None
    return [opts.substation]


def _report(outcomes: list[Outcome]) -> None:
    for o in outcomes:
        extra = {"substation": o.name, "code": o.code}
        for w in o.warnings:
            log.warning(w, extra={"substation": o.name, "code": w.split(":", 1)[0]})
        if o.ok:
            log.info(o.message, extra=extra)
        else:
            log.error(o.message, extra=extra)


def cmd_list(args) -> int:
    store = _load(args.input)
    if store is None:
        return EXIT_INPUT
    for name in list_substations(store):
        print(name)
    return EXIT_OK


def cmd_generate(opts: RunOptions) -> int:
    store = _load(opts.input_path)
    if store is None:
        return EXIT_INPUT
    names = _select(store, opts)
    if names is None:
        return EXIT_INPUT
    opts.output_dir.mkdir(parents=True, exist_ok=True)
    tasks = [(n, query_substation(store, n), opts.config, opts.formats, str(opts.output_dir)) for n in names]
    outcomes = _run(generate_one, tasks, opts.parallelism)
    _report(outcomes)
    return EXIT_OK if all(o.ok for o in outcomes) else EXIT_FAILURES


def cmd_validate(opts: RunOptions) -> int:
    store = _load(opts.input_path)
    if store is None:
        return EXIT_INPUT
    names = _select(store, opts)
    if names is None:
        return EXIT_INPUT
    opts.output_dir.mkdir(parents=True, exist_ok=True)
    tasks = [(n, query_substation(store, n), opts.config) for n in names]
    outcomes = _run(validate_one, tasks, opts.parallelism)
    _report(outcomes)
    pairs = [(o.name, o) for o in outcomes]
    corpus = corpus_report((name, _as_report(o)) for name, o in pairs)
    reports = {o.name: o.report for o in outcomes}
    write_atomic(opts.output_dir / "decency_report.json", report_json(corpus, reports))
    rate = "n/a" if corpus.pass_rate is None else f"{corpus.pass_rate:.4f}"
    log.info(f"{corpus.passed}/{corpus.total} decent, pass rate {rate}", extra={"code": "Summary"})
    return EXIT_OK if corpus.passed == corpus.total else EXIT_FAILURES


def _as_report(o: Outcome) -> DecencyReport:
    r = o.report or {}
    return DecencyReport(
        overlap_pairs=[tuple(p) for p in r.get("overlap_pairs", [])],
        dangling_endpoints=list(r.get("dangling_endpoints", [])),
        out_of_region=list(r.get("out_of_region", [])),
        crossing_count=int(r.get("crossing_count", 0)),
        passed=o.ok,
    )


def main(argv: list[str] | None = None) -> int:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_LineFormatter())
    log.addHandler(handler)
    log.setLevel(logging.INFO)
    log.propagate = False
    try:
        try:
            args = build_parser().parse_args(argv)
            if args.command == "list":
                return cmd_list(args)
            opts = _options(args)
        except _FlagError as exc:
            log.error(str(exc), extra={"code": "BadFlags"})
            return EXIT_FLAGS
        if args.command == "generate":
            return cmd_generate(opts)
        return cmd_validate(opts)
    finally:
        log.removeHandler(handler)


if __name__ == "__main__":
    sys.exit(main())
