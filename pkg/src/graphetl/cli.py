"""Command-line interface: convert, validate and bench subcommands.

Source specs: ``sqlite:<path>``, ``csv:<dir>``, ``jsonl:<path>@<type>``
(repeatable; several sources are chained). Sink specs: ``json:<path>``,
``cypher:<path>``, ``http:<url>`` (with ``--db``, ``--user`` and
``--password-env``). The run report is printed as JSON on stdout;
diagnostics go to stderr. Exit codes: 0 success, 1 configuration or
validation error, 2 aborted conversion.
"""

from __future__ import annotations

import argparse
import importlib.util
import json
import os
import sys
import tempfile
import time
from pathlib import Path

from . import bench as bench_mod
from .convert import GraphSink, RunConfig, run
from .dsl import link_plan, parse_schema
from .dsl.linker import LinkedPlan, check_source_columns
from .errors import ConversionAborted, GraphEtlError, SchemaSyntaxError
from .graph import PropertyGraph
from .resources import (
    ResourceIterator,
    chain,
    csv_iterator,
    jsonl_iterator,
    sqlite_iterator,
)
from .sinks import CypherScriptSink, HttpEndpoint, HttpSink, MemoryJsonSink
from .wrappers import WrapperRegistry, builtin_registry


class CliError(Exception):
    pass


def _fail(message: str) -> "CliError":
    return CliError(message)


def _parse_source(spec: str) -> ResourceIterator:
    kind, _, rest = spec.partition(":")
    if not rest:
        raise _fail(f"bad source spec {spec!r}: expected '<kind>:<path>'")
    if kind == "sqlite":
        return sqlite_iterator(rest)
    if kind == "csv":
        return csv_iterator(rest)
    if kind == "jsonl":
        path, sep, type_name = rest.rpartition("@")
        if not sep or not path or not type_name:
            raise _fail(f"bad source spec {spec!r}: expected 'jsonl:<path>@<type>'")
        return jsonl_iterator(path, type_name)
    raise _fail(f"unknown source kind {kind!r} (use sqlite:, csv: or jsonl:)")


def _build_iterator(specs: list[str]) -> ResourceIterator:
    iterators = [_parse_source(spec) for spec in specs]
    if len(iterators) == 1:
        return iterators[0]
    return chain(iterators)


def _load_registry(wrappers_path: str | None) -> WrapperRegistry:
    """Built-ins, extended by a Python file defining register(registry)."""
    registry = builtin_registry()
    if wrappers_path is None:
        return registry
    path = Path(wrappers_path)
    if not path.is_file():
        raise _fail(f"wrappers file not found: {path}")
    spec = importlib.util.spec_from_file_location(f"_graphetl_ext_{path.stem}", path)
    if spec is None or spec.loader is None:
        raise _fail(f"cannot load wrappers file: {path}")
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    hook = getattr(module, "register", None)
    if not callable(hook):
        raise _fail(f"{path} must define a register(registry) function")
    hook(registry)
    return registry


def _compile(schema_path: str, registry: WrapperRegistry) -> LinkedPlan:
    path = Path(schema_path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise _fail(f"cannot read schema: {exc}")
    try:
        plan = parse_schema(text)
    except SchemaSyntaxError as exc:
        raise _fail(exc.diagnostic(str(path)))
    try:
        return link_plan(plan, registry)
    except GraphEtlError as exc:
        raise _fail(f"error: {exc} in {path}")


class _SinkSetup:
    def __init__(self, sink: GraphSink, close=None):
        self.sink = sink
        self._close = close

    def close(self) -> None:
        if self._close is not None:
            self._close()


def _build_sink(args) -> _SinkSetup:
    spec = args.sink
    kind, _, rest = spec.partition(":")
    if kind == "json":
        if not rest:
            raise _fail("json sink needs a path: json:<path>")
        handle = open(rest, "wb")
        return _SinkSetup(MemoryJsonSink(handle), handle.close)
    if kind == "cypher":
        if not rest:
            raise _fail("cypher sink needs a path: cypher:<path>")
        handle = open(rest, "w", encoding="utf-8", newline="\n")
        return _SinkSetup(CypherScriptSink(handle), handle.close)
    if kind == "http":
        if not rest:
            raise _fail("http sink needs a URL: http:<url>")
        password = ""
        if args.password_env:
            password = os.environ.get(args.password_env, "")
            if not password:
                raise _fail(f"environment variable {args.password_env!r} is not set")
        endpoint = HttpEndpoint(rest, database=args.db, user=args.user, password=password)
        return _SinkSetup(HttpSink(endpoint, batch_size=args.batch_size))
    raise _fail(f"unknown sink kind {kind!r} (use json:, cypher: or http:)")


def _make_progress():
    state = {"phase": 0, "last_done": None}

    def callback(done, total):
        if state["last_done"] is None or done < state["last_done"]:
            state["phase"] += 1
        state["last_done"] = done
        suffix = f"/{total}" if total is not None else ""
        print(f"phase {state['phase']}: {done}{suffix}", file=sys.stderr)

    return callback


def cmd_validate(args) -> int:
    registry = _load_registry(args.wrappers)
    linked = _compile(args.schema, registry)
    problems: list[str] = []
    if args.source:
        iterator = _build_iterator(args.source)
        columns = iterator.columns()
        for entity_name in linked.entities:
            if entity_name not in columns:
                print(
                    f"warning: entity {entity_name!r} not present in the given "
                    f"source(s); column check skipped",
                    file=sys.stderr,
                )
        problems = check_source_columns(linked, columns)
    for problem in problems:
        print(f"error: {problem}", file=sys.stderr)
    if problems:
        return 1
    print(f"ok: {len(linked.entities)} entity block(s)", file=sys.stderr)
    return 0


def cmd_convert(args) -> int:
    registry = _load_registry(args.wrappers)
    linked = _compile(args.schema, registry)
    iterator = _build_iterator(args.source)
    setup = _build_sink(args)
    config = RunConfig(
        workers=args.workers,
        batch_size=args.batch_size,
        on_error=args.on_error,
        progress=_make_progress() if args.progress else None,
    )
    graph = PropertyGraph()
    try:
        report = run(linked, iterator, setup.sink, config, graph)
    except ConversionAborted as exc:
        print(f"error: conversion aborted: {exc}", file=sys.stderr)
        return 2
    finally:
        setup.close()
    print(report.to_json())
    return 0


def cmd_bench(args) -> int:
    dataset = args.dataset
    cleanup = None
    if dataset is None:
        handle = tempfile.NamedTemporaryFile(suffix=".sqlite", delete=False)
        handle.close()
        dataset = handle.name
        cleanup = lambda: os.unlink(dataset)  # noqa: E731
    try:
        truth = bench_mod.generate_dataset(
            dataset,
            commits=args.commits,
            edits=args.edits,
            rename_rate=args.rename_rate,
            seed=args.seed,
        )
        registry = bench_mod.bench_registry()
        linked = link_plan(parse_schema(bench_mod.BENCH_SCHEMA), registry)
        iterator = sqlite_iterator(dataset)
        config = RunConfig(
            workers=args.workers,
            batch_size=args.batch_size,
            on_error=args.on_error,
            progress=_make_progress() if args.progress else None,
        )
        started = time.perf_counter()
        try:
            report = run(linked, iterator, None, config, PropertyGraph())
        except ConversionAborted as exc:
            print(f"error: conversion aborted: {exc}", file=sys.stderr)
            return 2
        elapsed = time.perf_counter() - started
        payload = report.to_dict()
        payload["rows_per_second"] = round(report.resources / elapsed, 1) if elapsed else 0.0
        payload["total_seconds"] = round(elapsed, 3)
        payload["ground_truth"] = {
            "commits": truth.commits,
            "edits": truth.edits,
            "renames": truth.renames,
            "edit_type_counts": dict(sorted(truth.edit_type_counts.items())),
        }
        print(json.dumps(payload, sort_keys=True))
        return 0
    finally:
        if cleanup is not None:
            cleanup()


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--workers", type=int, default=None,
                        help="parallel transform workers (default: CPU count)")
    parser.add_argument("--batch-size", type=int, default=10000)
    parser.add_argument("--on-error", choices=("fail", "skip"), default="fail")
    parser.add_argument("--progress", action="store_true",
                        help="print per-batch progress to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphetl",
        description="Convert relational data into a property graph.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    convert = sub.add_parser("convert", help="run a conversion into a sink")
    convert.add_argument("--schema", required=True, help="conversion schema file (.d2n)")
    convert.add_argument("--source", action="append", required=True,
                         help="sqlite:<path> | csv:<dir> | jsonl:<path>@<type>")
    convert.add_argument("--sink", required=True,
                         help="json:<path> | cypher:<path> | http:<url>")
    convert.add_argument("--wrappers", default=None,
                         help="Python file defining register(registry)")
    convert.add_argument("--db", default="neo4j", help="database name for http sinks")
    convert.add_argument("--user", default="", help="user name for http sinks")
    convert.add_argument("--password-env", default=None,
                         help="environment variable holding the http password")
    _add_run_flags(convert)

    validate = sub.add_parser("validate", help="compile a schema, optionally "
                                               "checking columns against sources")
    validate.add_argument("--schema", required=True)
    validate.add_argument("--source", action="append", default=None)
    validate.add_argument("--wrappers", default=None)

    bench = sub.add_parser("bench", help="generate synthetic data and convert it")
    bench.add_argument("--commits", type=int, default=1000)
    bench.add_argument("--edits", type=int, default=10000)
    bench.add_argument("--rename-rate", type=float, default=0.1)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--dataset", default=None,
                       help="where to write the SQLite dataset (default: temp file)")
    _add_run_flags(bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"convert": cmd_convert, "validate": cmd_validate, "bench": cmd_bench}
    try:
        return handlers[args.command](args)
    except CliError as exc:
        message = str(exc)
        if not message.startswith("error:"):
            message = f"error: {message}"
        print(message, file=sys.stderr)
        return 1
    except GraphEtlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
