"""Dataset interchange: one flat JSON object, one member per record.

Every record object carries "type"; the remaining members are facts whose
encodings follow the schema (money as a plain decimal number, percent as a
fraction, keys as the referenced record's top-level name). Output is
canonical: members sorted (external names first, internal "#N" after),
"type" first then fields in declaration order, 2-space indent, trailing
newline, and money always printed with at least two fractional digits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal

from . import numbers
from .database import (
    Database,
    FactKey,
    FactValue,
    KeyName,
    StoredRecord,
    bool_value,
    enum_value,
    int_value,
    key_value,
    money_value,
    percent_value,
    text_value,
)
from .diagnostics import Diagnostic, DiagnosticError
from .schema import FactSort, Schema, ValueType

TYPE_MEMBER = "type"


@dataclass(frozen=True)
class RawNumber:
    """A number with a fixed textual rendering (exact decimals survive)."""

    text: str


def render_json(value, indent: int = 0) -> str:
    """Deterministic JSON rendering; dict insertion order is kept."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(value, RawNumber):
        return value.text
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Decimal):
        return numbers.format_minimal(value)
    if isinstance(value, str):
        return json.dumps(value)
    if value is None:
        return "null"
    if isinstance(value, dict):
        if not value:
            return "{}"
        members = [
            f"{inner}{json.dumps(str(k))}: {render_json(v, indent + 1)}" for k, v in value.items()
        ]
        return "{\n" + ",\n".join(members) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [f"{inner}{render_json(v, indent + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot render {type(value).__name__}")


def render_document(value) -> str:
    return render_json(value) + "\n"


def encode_value(value: FactValue):
    if value.kind == "int":
        return value.int_value
    if value.kind == "bool":
        return value.bool_value
    if value.kind == "text":
        return value.text_value
    if value.kind == "money":
        return RawNumber(numbers.format_money(value.decimal_value))
    if value.kind == "percent":
        return RawNumber(numbers.format_minimal(value.decimal_value))
    if value.kind == "enum":
        return value.member
    return value.key_value.name.render()


class _ValueError(Exception):
    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


def _decode_scalar(raw, declared: ValueType, schema: Schema) -> FactValue:
    kind = declared.kind
    if kind == "bool":
        if isinstance(raw, bool):
            return bool_value(raw)
        raise _ValueError(f"expected true/false, got {raw!r}")
    if kind == "int":
        if isinstance(raw, bool):
            raise _ValueError(f"expected an integer, got {raw!r}")
        if isinstance(raw, int):
            return int_value(raw)
        if isinstance(raw, Decimal) and raw == raw.to_integral_value():
            return int_value(int(raw))
        raise _ValueError(f"expected an integer, got {raw!r}")
    if kind == "text":
        if isinstance(raw, str):
            return text_value(raw)
        raise _ValueError(f"expected a string, got {raw!r}")
    if kind in ("money", "percent"):
        if isinstance(raw, bool) or not isinstance(raw, (int, Decimal)):
            raise _ValueError(f"expected a number, got {raw!r}")
        d = Decimal(raw)
        if not numbers.fits_precision(d):
            raise _ValueError(f"{d} exceeds 6 fractional digits")
        return money_value(d) if kind == "money" else percent_value(d)
    if kind == "enum":
        enum_def = schema.enum(declared.name)
        if not isinstance(raw, str) or enum_def is None or raw not in enum_def.members:
            raise _ValueError(f"expected a member of enum {declared.name}, got {raw!r}")
        return enum_value(declared.name, raw)
    raise AssertionError(f"not a scalar type: {declared}")


def decode_value(raw, declared: ValueType, schema: Schema) -> FactValue:
    """Decode one JSON-encoded fact value; raises ValueError on mismatch.

    Key-typed values decode to a typed key without checking that the
    referenced record exists (dangling keys surface at evaluation time).
    """
    try:
        if declared.kind == "key":
            if not isinstance(raw, str):
                raise _ValueError(f"expected a key name string, got {raw!r}")
            return key_value(FactKey(declared.name, KeyName.parse(raw)))
        return _decode_scalar(raw, declared, schema)
    except _ValueError as exc:
        raise ValueError(exc.message) from exc


def load_dataset(text: str, schema: Schema) -> Database:
    """Parse a dataset document; raises DiagnosticError with every violation.

    Two passes: records and plain facts first, then key-typed facts resolve
    against the full set of top-level names (forward references are fine).
    """
    problems: list[Diagnostic] = []

    def bad(code: str, message: str) -> None:
        problems.append(Diagnostic(code, message))

    try:
        doc = json.loads(text, parse_float=Decimal, object_pairs_hook=lambda pairs: pairs)
    except json.JSONDecodeError as exc:
        raise DiagnosticError([Diagnostic("InvalidJson", str(exc))]) from exc
    if not isinstance(doc, list):
        raise DiagnosticError([Diagnostic("InvalidJson", "top level must be a JSON object")])

    # Pass one: names, types, record shells, scalar facts.
    seen: set[str] = set()
    names: dict[str, str] = {}  # rendered name -> record type
    pending: list[tuple[FactKey, str, str, str]] = []  # key, field, target type, ref
    records: list[StoredRecord] = []
    for name, member in doc:
        if name in seen:
            bad("DuplicateTopLevelKey", f"key {name!r} appears twice")
            continue
        seen.add(name)
        try:
            key_name = KeyName.parse(name) if name else KeyName.external(name)
        except ValueError as exc:
            bad("InvalidKeyName", str(exc))
            continue
        if not isinstance(member, list):
            bad("MalformedRecord", f"{name!r} must be a JSON object")
            continue
        fields = dict()
        duplicate_fields = set()
        for fname, fvalue in member:
            if fname in fields or fname in duplicate_fields:
                bad("DuplicateField", f"{name!r} repeats field {fname!r}")
                duplicate_fields.add(fname)
                continue
            fields[fname] = fvalue
        record_type = fields.pop(TYPE_MEMBER, None)
        if not isinstance(record_type, str):
            bad("MissingTypeField", f"{name!r} has no \"type\" member")
            continue
        record_def = schema.record(record_type)
        if record_def is None:
            bad("UnknownRecordType", f"{name!r} names unknown record type {record_type!r}")
            continue

        names[name] = record_type
        key = FactKey(record_type, key_name)
        stored = StoredRecord(key)
        for fname, fvalue in fields.items():
            field_def = record_def.field_named(fname)
            if field_def is None:
                bad("UnknownField", f"{record_type} has no field {fname!r} (record {name!r})")
                continue
            declared = field_def.value_type
            if declared.kind == "key":
                if not isinstance(fvalue, str):
                    bad(
                        "ValueTypeMismatch",
                        f"{name!r}.{fname}: expected a key name string, got {fvalue!r}",
                    )
                    continue
                pending.append((key, fname, declared.name, fvalue))
                continue
            try:
                stored.values[fname] = _decode_scalar(fvalue, declared, schema)
            except _ValueError as exc:
                bad("ValueTypeMismatch", f"{name!r}.{fname}: {exc.message}")
        for field_def in record_def.fields:
            if field_def.sort is FactSort.INPUT and field_def.name not in fields:
                bad(
                    "MissingInputFact",
                    f"{name!r} is missing input fact {record_type}.{field_def.name}",
                )
        records.append(stored)

    # Pass two: key references resolve against the loaded names.
    by_key = {r.key: r for r in records}
    for key, fname, target_type, ref in pending:
        if names.get(ref) != target_type:
            bad(
                "DanglingKeyReference",
                f"{key.name.render()!r}.{fname}: no {target_type} record named {ref!r}",
            )
            continue
        by_key[key].values[fname] = key_value(FactKey(target_type, KeyName.parse(ref)))

    if problems:
        raise DiagnosticError(problems)

    db = Database(schema)
    for stored in records:
        db.insert_record(stored)
    return db


def database_document(db: Database, schema: Schema) -> dict:
    """The canonical document tree for a database (render with render_document)."""
    doc: dict = {}
    for key in sorted(db.records, key=lambda k: k.name.sort_key()):
        record = db.records[key]
        record_def = schema.record(record.record_type)
        obj: dict = {TYPE_MEMBER: record.record_type}
        for field_def in record_def.fields:
            stored = record.values.get(field_def.name)
            if stored is not None:
                obj[field_def.name] = encode_value(stored)
        doc[key.name.render()] = obj
    return doc


def dump_database(db: Database, schema: Schema) -> str:
    return render_document(database_document(db, schema))


def dataset_triples(db: Database) -> set[tuple[str, str, str]]:
    """(key, field, encoded value) triples; the superset-order for saturation."""
    out = set()
    for key, record in db.records.items():
        for fname, fvalue in record.values.items():
            encoded = encode_value(fvalue)
            if isinstance(encoded, RawNumber):
                encoded = encoded.text
            out.add((key.render(), fname, str(encoded)))
    return out
