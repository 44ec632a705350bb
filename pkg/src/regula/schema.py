"""Data model: record types, enums, field sorts and field value types.

A Schema is assembled by the DSL parser from `record` and `enum`
declarations and is immutable once validated; the type checker and the
engine answer every "what is the type/sort of this field" question here.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .diagnostics import Diagnostic, DiagnosticError, SourceSpan

KEY_FIELD = "key"

_SCALAR_KINDS = ("int", "bool", "text", "money", "percent")


@dataclass(frozen=True)
class ValueType:
    """One of int | bool | text | money | percent | enum(E) | key(R)."""

    kind: str
    name: str | None = None

    def __post_init__(self) -> None:
        if self.kind in _SCALAR_KINDS:
            if self.name is not None:
                raise ValueError(f"{self.kind} carries no name")
        elif self.kind in ("enum", "key"):
            if not self.name:
                raise ValueError(f"{self.kind} requires a name")
        else:
            raise ValueError(f"unknown type kind {self.kind!r}")

    def __str__(self) -> str:
        if self.name is not None:
            return f"{self.kind} {self.name}"
        return self.kind

    @property
    def is_numeric(self) -> bool:
        return self.kind in ("int", "money", "percent")

    @property
    def is_ordered(self) -> bool:
        return self.is_numeric


INT = ValueType("int")
BOOL = ValueType("bool")
TEXT = ValueType("text")
MONEY = ValueType("money")
PERCENT = ValueType("percent")


def enum_type(name: str) -> ValueType:
    return ValueType("enum", name)


def key_type(record: str) -> ValueType:
    return ValueType("key", record)


class FactSort(enum.Enum):
    """Input facts must be present for a record to be well formed; Optional
    facts may be absent and possibly derivable by a rule."""

    INPUT = "input"
    OPTIONAL = "optional"


@dataclass(frozen=True)
class FieldDef:
    name: str
    sort: FactSort
    value_type: ValueType
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class RecordDef:
    name: str
    fields: tuple[FieldDef, ...]
    span: SourceSpan | None = field(default=None, compare=False)

    def field_named(self, name: str) -> FieldDef | None:
        for f in self.fields:
            if f.name == name:
                return f
        return None


@dataclass(frozen=True)
class EnumDef:
    name: str
    members: tuple[str, ...]
    span: SourceSpan | None = field(default=None, compare=False)


class SchemaError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)

    @property
    def message(self) -> str:
        return self.args[0]


@dataclass(frozen=True, eq=False)
class Schema:
    """Registry of record and enum definitions, in declaration order.

    Lookups go through name maps; `validate_schema` is what enforces that
    those maps are well defined (unique names, resolvable references).
    Equality ignores declaration order: declarations may be distributed
    across files and permuted freely.
    """

    records: tuple[RecordDef, ...] = ()
    enums: tuple[EnumDef, ...] = ()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Schema):
            return NotImplemented
        return (
            {r.name: r for r in self.records} == {r.name: r for r in other.records}
            and {e.name: e for e in self.enums} == {e.name: e for e in other.enums}
        )

    __hash__ = None  # type: ignore[assignment]

    def record(self, name: str) -> RecordDef | None:
        for r in self.records:
            if r.name == name:
                return r
        return None

    def enum(self, name: str) -> EnumDef | None:
        for e in self.enums:
            if e.name == name:
                return e
        return None

    def has_record(self, name: str) -> bool:
        return self.record(name) is not None


def validate_schema(schema: Schema) -> list[Diagnostic]:
    """Check every schema invariant, returning all violations (empty = ok)."""
    out: list[Diagnostic] = []
    seen_records: set[str] = set()
    seen_enums: set[str] = set()

    for e in schema.enums:
        if e.name in seen_enums:
            out.append(Diagnostic("DuplicateEnumName", f"enum {e.name} declared twice", e.span))
        seen_enums.add(e.name)
        seen_members: set[str] = set()
        for m in e.members:
            if m in seen_members:
                out.append(
                    Diagnostic("DuplicateEnumMember", f"enum {e.name} repeats member {m}", e.span)
                )
            seen_members.add(m)

    for r in schema.records:
        if r.name in seen_records:
            out.append(Diagnostic("DuplicateRecordName", f"record {r.name} declared twice", r.span))
        seen_records.add(r.name)

        seen_fields: set[str] = set()
        for f in r.fields:
            if f.name == KEY_FIELD:
                out.append(
                    Diagnostic(
                        "ReservedFieldName",
                        f"{r.name}.{f.name}: \"key\" is implicit on every record",
                        f.span,
                    )
                )
            if f.name in seen_fields:
                out.append(
                    Diagnostic("DuplicateField", f"{r.name}.{f.name} declared twice", f.span)
                )
            seen_fields.add(f.name)

            vt = f.value_type
            if vt.kind == "enum" and schema.enum(vt.name) is None:
                out.append(
                    Diagnostic(
                        "UnknownEnumRef",
                        f"{r.name}.{f.name}: enum {vt.name} is not declared",
                        f.span,
                    )
                )
            if vt.kind == "key" and schema.record(vt.name) is None:
                out.append(
                    Diagnostic(
                        "UnknownRecordRef",
                        f"{r.name}.{f.name}: record type {vt.name} is not declared",
                        f.span,
                    )
                )
    return out


def fact_type(schema: Schema, record: str, field_name: str) -> ValueType:
    """Value type of a field; the implicit "key" field has type key(record)."""
    rec = schema.record(record)
    if rec is None:
        raise SchemaError("UnknownRecord", f"unknown record type {record}")
    if field_name == KEY_FIELD:
        return key_type(record)
    f = rec.field_named(field_name)
    if f is None:
        raise SchemaError("UnknownField", f"{record} has no field {field_name}")
    return f.value_type


def fact_sort(schema: Schema, record: str, field_name: str) -> FactSort:
    """Declared sort of a field; the key is not a fact and has no sort."""
    rec = schema.record(record)
    if rec is None:
        raise SchemaError("UnknownRecord", f"unknown record type {record}")
    if field_name == KEY_FIELD:
        raise SchemaError("KeyHasNoSort", f"{record}.key is the record key, not a fact")
    f = rec.field_named(field_name)
    if f is None:
        raise SchemaError("UnknownField", f"{record} has no field {field_name}")
    return f.sort


def ensure_valid(schema: Schema) -> Schema:
    """Raise DiagnosticError unless the schema validates; convenience for callers."""
    problems = validate_schema(schema)
    if problems:
        raise DiagnosticError(problems)
    return schema
