"""HTTP API for interactive exploration: sessions over one compiled ruleset.

Each session owns an isolated database copy and its overrides; requests
within one session serialize on a per-session lock, sessions run freely in
parallel. Responses are rendered with the canonical JSON writer so equal
session states produce byte-identical bodies. Errors are always
{"errors": [{"code", "message", "span"?}]}.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from .database import Database, FactKey, KeyName, fact_id, parse_fact_ref
from .diagnostics import DiagnosticError
from .dsl import Bundle, HasRuleBinding, print_expr
from .engine import EngineError, Session, get_fact, get_missing_dependencies, saturate
from .jsonio import database_document, decode_value, encode_value, load_dataset, render_document
from .schema import KEY_FIELD, FactSort, SchemaError, fact_sort, fact_type

DEFAULT_SESSION_ID = "default"


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, span: str | None = None):
        self.status = status
        self.errors = [{"code": code, "message": message}]
        if span is not None:
            self.errors[0]["span"] = span
        super().__init__(message)


@dataclass
class SessionHandle:
    id: str
    created_at: float
    session: Session
    last_access: float = 0.0
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    def __init__(self, bundle: Bundle, ttl: float):
        self.bundle = bundle
        self.ttl = ttl
        self._lock = threading.Lock()
        self._handles: dict[str, SessionHandle] = {}

    def _purge(self, now: float) -> None:
        stale = [sid for sid, h in self._handles.items() if now - h.last_access > self.ttl]
        for sid in stale:
            del self._handles[sid]

    def create(self, db: Database, session_id: str | None = None) -> str:
        now = time.monotonic()
        with self._lock:
            self._purge(now)
            sid = session_id or uuid.uuid4().hex
            handle = SessionHandle(sid, now, Session(self.bundle.ruleset, db), last_access=now)
            self._handles[sid] = handle
            return sid

    def get(self, session_id: str) -> SessionHandle:
        now = time.monotonic()
        with self._lock:
            self._purge(now)
            handle = self._handles.get(session_id)
            if handle is None:
                raise ApiError(404, "UnknownSession", f"no session {session_id!r}")
            handle.last_access = now
            return handle


def _json(tree, status: int = 200) -> Response:
    return Response(
        content=render_document(tree), status_code=status, media_type="application/json"
    )


def _parse_body(raw: bytes):
    try:
        return json.loads(raw.decode("utf-8"), parse_float=Decimal)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ApiError(400, "InvalidJson", str(exc)) from exc


def _resolve_fact(bundle: Bundle, ref: str) -> tuple[str, str, str]:
    try:
        record_type, key_text, field_name = parse_fact_ref(ref)
        fact_type(bundle.schema, record_type, field_name)
        KeyName.parse(key_text)
    except (ValueError, SchemaError) as exc:
        raise ApiError(404, "UnknownFact", str(exc)) from exc
    return record_type, key_text, field_name


def _schema_tree(bundle: Bundle) -> dict:
    schema = bundle.schema
    records = [
        {
            "name": record.name,
            "fields": [
                {"name": f.name, "sort": f.sort.value, "type": str(f.value_type)}
                for f in record.fields
            ],
        }
        for record in sorted(schema.records, key=lambda r: r.name)
    ]
    enums = [
        {"name": e.name, "members": list(e.members)}
        for e in sorted(schema.enums, key=lambda e: e.name)
    ]
    rules = [
        {
            "record": record_type,
            "field": field_name,
            "rule": print_expr(binding.expr) if isinstance(binding, HasRuleBinding) else None,
        }
        for (record_type, field_name), binding in sorted(bundle.ruleset.rules.items())
    ]
    graph = bundle.graph
    edges = {
        "fields": [
            {"from": f"{src[0]}.{src[1]}", "to": f"{dst[0]}.{dst[1]}"}
            for src, dst in sorted(graph.field_edges)
        ],
        "types": [
            {"from": f"{src[0]}.{src[1]}", "to": record_type}
            for src, record_type in sorted(graph.type_edges)
        ],
    }
    warnings = [w.message for w in graph.warnings]
    return {"records": records, "enums": enums, "rules": rules, "edges": edges,
            "warnings": warnings}


def _fact_view(handle: SessionHandle, key: FactKey, field_name: str) -> dict:
    session = handle.session
    overridden = (key, field_name) in session.overrides
    was_stored = session.db.value_present(key, field_name)
    was_memo = (key, field_name) in session.memo_writes
    outcome = get_fact(session, key, field_name)
    deps = {"fields": outcome.deps.field_ids(), "types": outcome.deps.type_names()}
    view: dict = {"fact": fact_id(key, field_name)}
    if not outcome.ok:
        view["status"] = "error"
        view["errors"] = [{"code": e.code, "message": e.render()} for e in outcome.errors]
        view["deps"] = deps
        return view
    if overridden:
        view["status"] = "overridden"
    elif field_name == KEY_FIELD:
        view["status"] = "input"
    elif fact_sort(session.schema, key.record_type, field_name) is FactSort.INPUT:
        view["status"] = "input"
    elif was_stored and not was_memo:
        view["status"] = "input"
    else:
        view["status"] = "computed"
    view["value"] = encode_value(outcome.value)
    view["deps"] = deps
    return view


def create_app(
    bundle: Bundle,
    initial_db: Database | None = None,
    session_ttl: float = 3600.0,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="regula", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = SessionStore(bundle, session_ttl)
    app.state.store = store
    if initial_db is not None:
        store.create(initial_db, session_id=DEFAULT_SESSION_ID)

    @app.exception_handler(ApiError)
    async def handle_api_error(_request: Request, exc: ApiError) -> Response:
        return _json({"errors": exc.errors}, status=exc.status)

    @app.get("/schema")
    def schema_endpoint() -> Response:
        return _json(_schema_tree(bundle))

    @app.post("/sessions")
    async def create_session(request: Request) -> Response:
        raw = await request.body()
        try:
            db = load_dataset(raw.decode("utf-8") if raw else "{}", bundle.schema)
        except UnicodeDecodeError as exc:
            raise ApiError(400, "InvalidJson", str(exc)) from exc
        except DiagnosticError as exc:
            errors = [{"code": d.code, "message": d.message} for d in exc.diagnostics]
            return _json({"errors": errors}, status=400)
        sid = store.create(db)
        return _json({"id": sid}, status=201)

    @app.get("/sessions/{sid}/facts/{record_type}/{key_text}/{field_name}")
    def fact_endpoint(sid: str, record_type: str, key_text: str, field_name: str) -> Response:
        handle = store.get(sid)
        try:
            fact_type(bundle.schema, record_type, field_name)
            key = FactKey(record_type, KeyName.parse(key_text))
        except (SchemaError, ValueError) as exc:
            raise ApiError(404, "UnknownFact", str(exc)) from exc
        with handle.lock:
            return _json(_fact_view(handle, key, field_name))

    @app.put("/sessions/{sid}/overrides")
    async def put_override(sid: str, request: Request) -> Response:
        handle = store.get(sid)
        body = _parse_body(await request.body())
        if not isinstance(body, dict) or not isinstance(body.get("fact"), str) \
                or "value" not in body:
            raise ApiError(400, "InvalidJson", 'body must be {"fact": "...", "value": ...}')
        record_type, key_text, field_name = _resolve_fact(bundle, body["fact"])
        declared = fact_type(bundle.schema, record_type, field_name)
        if field_name == KEY_FIELD:
            raise ApiError(404, "UnknownFact", "the record key is not an overridable fact")
        try:
            value = decode_value(body["value"], declared, bundle.schema)
        except ValueError as exc:
            raise ApiError(400, "TypeMismatch", f"{body['fact']}: {exc}") from exc
        key = FactKey(record_type, KeyName.parse(key_text))
        with handle.lock:
            try:
                handle.session.set_override(key, field_name, value)
            except EngineError as exc:
                status = 404 if exc.code in ("UnknownKey", "UnknownField") else 400
                raise ApiError(status, exc.code, exc.message) from exc
        return _json({"ok": True})

    @app.delete("/sessions/{sid}/overrides/{fact_ref:path}")
    def delete_override(sid: str, fact_ref: str) -> Response:
        handle = store.get(sid)
        record_type, key_text, field_name = _resolve_fact(bundle, fact_ref)
        key = FactKey(record_type, KeyName.parse(key_text))
        with handle.lock:
            try:
                handle.session.clear_override(key, field_name)
            except EngineError as exc:
                status = 404 if exc.code in ("UnknownKey", "UnknownField") else 400
                raise ApiError(status, exc.code, exc.message) from exc
        return _json({"ok": True})

    @app.get("/sessions/{sid}/missing")
    def missing_endpoint(sid: str, fact: str) -> Response:
        handle = store.get(sid)
        record_type, key_text, field_name = _resolve_fact(bundle, fact)
        key = FactKey(record_type, KeyName.parse(key_text))
        with handle.lock:
            try:
                missing, types = get_missing_dependencies(handle.session, key, field_name)
            except EngineError as exc:
                raise ApiError(404, exc.code, exc.message) from exc
        return _json({"missing": missing, "types": types})

    @app.post("/sessions/{sid}/saturate")
    def saturate_endpoint(sid: str) -> Response:
        handle = store.get(sid)
        with handle.lock:
            result, report = saturate(handle.session)
            document = database_document(result, bundle.schema)
        skipped = [
            {"fact": ref, "errors": [{"code": e.code, "message": e.render()} for e in errors]}
            for ref, errors in report
        ]
        return _json({"document": document, "skipped": skipped})

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
