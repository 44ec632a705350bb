"""Heterogeneous typed record store.

Keys carry their record type, so a name collision across types can never
unify two keys; key names themselves are unique database-wide (the JSON
top level is one flat namespace). A session owns one mutable copy of a
Database; `copy()` gives an independent snapshot for scratch evaluation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal

from . import numbers
from .schema import FactSort, Schema, SchemaError, ValueType, fact_sort, fact_type


@dataclass(frozen=True)
class KeyName:
    """External (user text) or internal (generated integer) record name."""

    text: str | None = None
    serial: int | None = None

    def __post_init__(self) -> None:
        if (self.text is None) == (self.serial is None):
            raise ValueError("exactly one of text/serial")
        if self.text is not None and (not self.text or self.text.startswith("#")):
            raise ValueError("external key names are non-empty and may not start with '#'")
        if self.serial is not None and self.serial < 0:
            raise ValueError("internal key serials are non-negative")

    @property
    def is_internal(self) -> bool:
        return self.serial is not None

    def render(self) -> str:
        return f"#{self.serial}" if self.is_internal else self.text  # type: ignore[return-value]

    def sort_key(self) -> tuple:
        # External keys first (lexicographic), then internal ascending.
        if self.is_internal:
            return (1, self.serial)
        return (0, self.text)

    @staticmethod
    def external(text: str) -> "KeyName":
        return KeyName(text=text)

    @staticmethod
    def internal(serial: int) -> "KeyName":
        return KeyName(serial=serial)

    @staticmethod
    def parse(rendered: str) -> "KeyName":
        """Inverse of render(); "#N" is an internal key, anything else external."""
        if rendered.startswith("#"):
            digits = rendered[1:]
            if not digits.isdigit():
                raise ValueError(f"malformed internal key name {rendered!r}")
            return KeyName.internal(int(digits))
        return KeyName.external(rendered)


@dataclass(frozen=True)
class FactKey:
    record_type: str
    name: KeyName

    def render(self) -> str:
        return f"{self.record_type}[{self.name.render()}]"


def fact_id(key: FactKey, field_name: str) -> str:
    """Canonical fact identifier "Type[keyname].field"."""
    return f"{key.render()}.{field_name}"


_FACT_REF_RE = re.compile(r"^([A-Z][A-Za-z0-9_]*)\[(.+)\]\.([a-z][A-Za-z0-9_]*|key)$")


def parse_fact_ref(text: str) -> tuple[str, str, str]:
    """Parse "Type[keyname].field" into (record type, key name text, field)."""
    match = _FACT_REF_RE.match(text)
    if match is None:
        raise ValueError(f"bad fact reference {text!r}; expected Type[key].field")
    return match.group(1), match.group(2), match.group(3)


@dataclass(frozen=True)
class FactValue:
    """Typed payload of a fact: exactly one of the payload slots is used.

    kind is one of int/bool/text/money/percent/enum/key and decides which.
    """

    kind: str
    int_value: int | None = None
    bool_value: bool | None = None
    text_value: str | None = None
    decimal_value: Decimal | None = None
    enum_name: str | None = None
    member: str | None = None
    key_value: FactKey | None = None

    def type_of(self) -> ValueType:
        if self.kind == "enum":
            return ValueType("enum", self.enum_name)
        if self.kind == "key":
            return ValueType("key", self.key_value.record_type)  # type: ignore[union-attr]
        return ValueType(self.kind)


def int_value(v: int) -> FactValue:
    return FactValue("int", int_value=v)


def bool_value(v: bool) -> FactValue:
    return FactValue("bool", bool_value=v)


def text_value(v: str) -> FactValue:
    return FactValue("text", text_value=v)


def money_value(v: Decimal | int | str) -> FactValue:
    d = Decimal(v)
    if not numbers.fits_precision(d):
        raise ValueError(f"money value {d} exceeds 6 fractional digits")
    return FactValue("money", decimal_value=d)


def percent_value(v: Decimal | int | str) -> FactValue:
    d = Decimal(v)
    if not numbers.fits_precision(d):
        raise ValueError(f"percent value {d} exceeds 6 fractional digits")
    return FactValue("percent", decimal_value=d)


def enum_value(enum_name: str, member: str) -> FactValue:
    return FactValue("enum", enum_name=enum_name, member=member)


def key_value(key: FactKey) -> FactValue:
    return FactValue("key", key_value=key)


@dataclass
class StoredRecord:
    """A record instance: its key plus the present field values.

    Absent optional fields are simply missing from `values` (must-derive);
    input fields are always present in a well-formed record.
    """

    key: FactKey
    values: dict[str, FactValue] = field(default_factory=dict)

    @property
    def record_type(self) -> str:
        return self.key.record_type

    def copy(self) -> "StoredRecord":
        return StoredRecord(self.key, dict(self.values))


class DatabaseError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)

    @property
    def message(self) -> str:
        return self.args[0]


class Database:
    """Mapping from typed fact keys to stored records.

    Invariants: key names are unique database-wide; the name index is the
    inverse projection of the stored keys; the internal-key counter never
    re-issues a serial.
    """

    def __init__(self, schema: Schema):
        self.schema = schema
        self.records: dict[FactKey, StoredRecord] = {}
        self.name_index: dict[KeyName, FactKey] = {}
        self.next_internal = 0

    def copy(self) -> "Database":
        dup = Database(self.schema)
        dup.records = {k: rec.copy() for k, rec in self.records.items()}
        dup.name_index = dict(self.name_index)
        dup.next_internal = self.next_internal
        return dup

    def __eq__(self, other: object) -> bool:
        # Content equality; the internal counter is bookkeeping, not data.
        if not isinstance(other, Database):
            return NotImplemented
        return self.records == other.records

    def insert_record(self, rec: StoredRecord) -> None:
        if not self.schema.has_record(rec.record_type):
            raise DatabaseError("UnknownRecord", f"unknown record type {rec.record_type}")
        if rec.key.name in self.name_index:
            raise DatabaseError("DuplicateKey", f"key {rec.key.name.render()!r} already present")
        self.records[rec.key] = rec
        self.name_index[rec.key.name] = rec.key
        if rec.key.name.is_internal:
            self.next_internal = max(self.next_internal, rec.key.name.serial + 1)

    def lookup_record(self, key: FactKey) -> StoredRecord | None:
        return self.records.get(key)

    def all_keys_of_type(self, record_type: str) -> list[FactKey]:
        if not self.schema.has_record(record_type):
            raise DatabaseError("UnknownRecord", f"unknown record type {record_type}")
        keys = [k for k in self.records if k.record_type == record_type]
        keys.sort(key=lambda k: k.name.sort_key())
        return keys

    def value_present(self, key: FactKey, field_name: str) -> bool:
        rec = self.records.get(key)
        return rec is not None and field_name in rec.values

    def write_back(self, key: FactKey, field_name: str, value: FactValue) -> None:
        """Store a computed value for an optional field (memoization)."""
        rec = self.records.get(key)
        if rec is None:
            raise DatabaseError("UnknownKey", f"no record for key {key.render()}")
        try:
            sort = fact_sort(self.schema, key.record_type, field_name)
            declared = fact_type(self.schema, key.record_type, field_name)
        except SchemaError as exc:
            raise DatabaseError(exc.code, exc.message) from exc
        if sort is not FactSort.OPTIONAL:
            raise DatabaseError(
                "NotOptionalField", f"{fact_id(key, field_name)} is an input fact"
            )
        if value.type_of() != declared:
            raise DatabaseError(
                "TypeMismatch",
                f"{fact_id(key, field_name)} expects {declared}, got {value.type_of()}",
            )
        rec.values[field_name] = value

    def erase_field(self, key: FactKey, field_name: str) -> None:
        """Drop a stored optional value (memo rollback)."""
        rec = self.records.get(key)
        if rec is not None:
            rec.values.pop(field_name, None)

    def fresh_internal_key(self, record_type: str) -> FactKey:
        if not self.schema.has_record(record_type):
            raise DatabaseError("UnknownRecord", f"unknown record type {record_type}")
        key = FactKey(record_type, KeyName.internal(self.next_internal))
        self.next_internal += 1
        return key
