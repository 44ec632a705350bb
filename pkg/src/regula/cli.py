"""Command line front door: check rulesets, evaluate queries, report
missing dependencies, saturate datasets, launch the HTTP service.

Exit codes: 0 success, 1 diagnostics or evaluation failure, 2 I/O failure.
All machine-facing output (eval/deps/saturate) is JSON on stdout;
diagnostics go to stderr with file:line:col spans.
"""

from __future__ import annotations

import json
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path

import click

from .database import Database, FactKey, KeyName, parse_fact_ref
from .diagnostics import Diagnostic, DiagnosticError
from .dsl import Bundle, compile_sources
from .engine import EngineError, Session, get_fact, get_missing_dependencies, saturate
from .jsonio import (
    RawNumber,
    database_document,
    dump_database,
    encode_value,
    load_dataset,
    render_document,
)
from .schema import Schema, SchemaError, ValueType, fact_type

class CliFailure(Exception):
    def __init__(self, exit_code: int):
        self.exit_code = exit_code
        super().__init__(f"exit {exit_code}")


parse_query = parse_fact_ref


def parse_override_literal(text: str, declared: ValueType, schema: Schema):
    """Override values use DSL literal syntax (true, 3%, 12.50, Member)."""
    from .database import (
        bool_value,
        enum_value,
        int_value,
        key_value,
        money_value,
        percent_value,
        text_value,
    )

    text = text.strip()
    kind = declared.kind
    try:
        if kind == "bool":
            if text in ("true", "false"):
                return bool_value(text == "true")
            raise ValueError(f"expected true or false, got {text!r}")
        if kind == "int":
            return int_value(int(text))
        if kind in ("money", "percent"):
            if text.endswith("%"):
                value = Decimal(text[:-1]) / 100
                if kind != "percent":
                    raise ValueError("'%' literals are percent, not money")
            else:
                value = Decimal(text)
            return money_value(value) if kind == "money" else percent_value(value)
        if kind == "text":
            if text.startswith('"') and text.endswith('"') and len(text) >= 2:
                return text_value(text[1:-1])
            return text_value(text)
        if kind == "enum":
            member = text.split("::", 1)[1] if "::" in text else text
            enum_def = schema.enum(declared.name)
            if enum_def is None or member not in enum_def.members:
                raise ValueError(f"{member!r} is not a member of enum {declared.name}")
            return enum_value(declared.name, member)
        # key(R): the referenced record's top-level name
        return key_value(FactKey(declared.name, KeyName.parse(text)))
    except InvalidOperation as exc:
        raise ValueError(f"bad {kind} literal {text!r}") from exc


def _echo_diagnostics(diagnostics: list[Diagnostic]) -> None:
    for d in diagnostics:
        click.echo(str(d), err=True)


def _read_file(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        click.echo(f"error: cannot read {path}: {exc.strerror}", err=True)
        raise CliFailure(2) from exc


def _load_bundle(paths: tuple[str, ...]) -> Bundle:
    sources = [(p, _read_file(p)) for p in paths]
    try:
        return compile_sources(sources)
    except DiagnosticError as exc:
        _echo_diagnostics(exc.diagnostics)
        raise CliFailure(1) from exc


def _load_database(path: str, schema: Schema) -> Database:
    text = _read_file(path)
    try:
        return load_dataset(text, schema)
    except DiagnosticError as exc:
        _echo_diagnostics(exc.diagnostics)
        raise CliFailure(1) from exc


def _error_report(errors) -> dict:
    return {"errors": [{"code": e.code, "message": e.render()} for e in errors]}


def _resolve_query(session: Session, query: str) -> tuple[FactKey, str]:
    try:
        record_type, key_text, field_name = parse_query(query)
        key = FactKey(record_type, KeyName.parse(key_text))
        fact_type(session.schema, record_type, field_name)
    except (ValueError, SchemaError) as exc:
        click.echo(render_document({"errors": [{"code": "BadQuery", "message": str(exc)}]}), nl=False)
        raise CliFailure(1) from exc
    return key, field_name


def _apply_overrides(session: Session, overrides: tuple[str, ...]) -> None:
    for item in overrides:
        if "=" not in item:
            click.echo(f"error: bad override {item!r}; expected Type[key].field=value", err=True)
            raise CliFailure(1)
        ref, literal = item.split("=", 1)
        try:
            record_type, key_text, field_name = parse_query(ref.strip())
            key = FactKey(record_type, KeyName.parse(key_text))
            declared = fact_type(session.schema, record_type, field_name)
            value = parse_override_literal(literal, declared, session.schema)
            session.set_override(key, field_name, value)
        except (ValueError, SchemaError, EngineError) as exc:
            click.echo(f"error: override {item!r}: {exc}", err=True)
            raise CliFailure(1) from exc


@click.group()
def main() -> None:
    """Rules-as-code toolkit: check, evaluate, explain and serve rule sets."""


@main.command("check")
@click.argument("rulesets", nargs=-1, required=True)
def cmd_check(rulesets: tuple[str, ...]) -> None:
    """Parse, validate and typecheck ruleset files."""
    try:
        bundle = _load_bundle(rulesets)
    except CliFailure as exc:
        sys.exit(exc.exit_code)
    for warning in bundle.warnings:
        click.echo(f"warning: {warning}", err=True)
    click.echo("ok", err=True)


@main.command("eval")
@click.argument("ruleset")
@click.argument("data")
@click.option("--query", required=True, help='Fact to evaluate, as "Type[key].field".')
@click.option(
    "--override",
    "overrides",
    multiple=True,
    help='What-if override, as "Type[key].field=value" (DSL literal syntax).',
)
def cmd_eval(ruleset: str, data: str, query: str, overrides: tuple[str, ...]) -> None:
    """Evaluate one fact and print its value as JSON."""
    try:
        bundle = _load_bundle((ruleset,))
        db = _load_database(data, bundle.schema)
        session = Session(bundle.ruleset, db)
        _apply_overrides(session, overrides)
        key, field_name = _resolve_query(session, query)
    except CliFailure as exc:
        sys.exit(exc.exit_code)
    outcome = get_fact(session, key, field_name)
    if not outcome.ok:
        click.echo(render_document(_error_report(outcome.errors)), nl=False)
        sys.exit(1)
    click.echo(render_document(encode_value(outcome.value)), nl=False)


@main.command("deps")
@click.argument("ruleset")
@click.argument("data")
@click.option("--query", required=True, help='Target fact, as "Type[key].field".')
def cmd_deps(ruleset: str, data: str, query: str) -> None:
    """Print missing facts and scanned record types as two JSON arrays."""
    try:
        bundle = _load_bundle((ruleset,))
        db = _load_database(data, bundle.schema)
        session = Session(bundle.ruleset, db)
        key, field_name = _resolve_query(session, query)
    except CliFailure as exc:
        sys.exit(exc.exit_code)
    missing, types = get_missing_dependencies(session, key, field_name)
    # Two JSON arrays, one per line: missing facts, then scanned types.
    click.echo(json.dumps(missing))
    click.echo(json.dumps(types))


@main.command("saturate")
@click.argument("ruleset")
@click.argument("data")
@click.option("-o", "--output", required=True, help="Where to write the saturated dataset.")
def cmd_saturate(ruleset: str, data: str, output: str) -> None:
    """Compute all derivable facts; write the canonical superset document."""
    try:
        bundle = _load_bundle((ruleset,))
        db = _load_database(data, bundle.schema)
    except CliFailure as exc:
        sys.exit(exc.exit_code)
    session = Session(bundle.ruleset, db)
    result, report = saturate(session)
    try:
        Path(output).write_text(dump_database(result, bundle.schema), encoding="utf-8")
    except OSError as exc:
        click.echo(f"error: cannot write {output}: {exc.strerror}", err=True)
        sys.exit(2)
    skipped = [
        {"fact": ref, "errors": [{"code": e.code, "message": e.render()} for e in errors]}
        for ref, errors in report
    ]
    click.echo(render_document({"skipped": skipped}), nl=False)


@main.command("serve")
@click.argument("ruleset")
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data", "data_path", default=None, help="Preload into session \"default\".")
@click.option("--session-ttl", default=3600.0, show_default=True, help="Idle TTL in seconds.")
def cmd_serve(ruleset: str, port: int, host: str, data_path: str | None, session_ttl: float) -> None:
    """Run the interactive what-if HTTP service."""
    from . import service

    if not 1 <= port <= 65535:
        click.echo(f"error: port {port} out of range", err=True)
        sys.exit(2)
    try:
        bundle = _load_bundle((ruleset,))
        initial = _load_database(data_path, bundle.schema) if data_path else None
    except CliFailure as exc:
        sys.exit(exc.exit_code)
    ui_dir = Path("frontend/dist")
    app = service.create_app(
        bundle,
        initial_db=initial,
        session_ttl=session_ttl,
        ui_dir=ui_dir if ui_dir.is_dir() else None,
    )
    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
