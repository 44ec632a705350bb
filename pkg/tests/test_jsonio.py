from __future__ import annotations

from decimal import Decimal

import pytest

from regula.database import (
    Database,
    KeyName,
    StoredRecord,
    int_value,
    key_value,
    money_value,
)
from regula.diagnostics import DiagnosticError
from regula.jsonio import (
    dump_database,
    load_dataset,
    render_document,
)

from conftest import build_bundle, ext_key, read_fixture


@pytest.fixture(scope="module")
def schema():
    return build_bundle("beps.regula").schema


def load_errors(text: str, schema) -> list:
    with pytest.raises(DiagnosticError) as err:
        load_dataset(text, schema)
    return err.value.diagnostics


def test_interchange_example_loads(schema):
    db = load_dataset(read_fixture("beps_min.json"), schema)
    assert len(db.all_keys_of_type("Entity")) == 1
    assert len(db.all_keys_of_type("Jurisdiction")) == 1
    corp = db.lookup_record(ext_key("Entity", "Corp"))
    assert corp.values["jurisdiction"] == key_value(ext_key("Jurisdiction", "Switzerland"))
    assert corp.values["fiscal_year"].int_value == 2022
    assert corp.values["stock_based_compensation"] == money_value(Decimal("12345.00"))
    swiss = db.lookup_record(ext_key("Jurisdiction", "Switzerland"))
    assert swiss.values["top_up_tax_percentage"].decimal_value == Decimal("0.03")


def test_object_without_type_member(schema):
    diagnostics = load_errors('{"X": {"fiscal_year": 2022}}', schema)
    assert [d.code for d in diagnostics] == ["MissingTypeField"]


def test_missing_input_fact(schema):
    diagnostics = load_errors('{"X": {"type": "Entity", "jurisdiction": "J"}}', schema)
    codes = sorted(d.code for d in diagnostics)
    # fiscal_year missing and the jurisdiction reference dangles
    assert codes == ["DanglingKeyReference", "MissingInputFact"]


def test_forward_references_are_allowed(schema):
    db = load_dataset(
        '{"E": {"type": "Entity", "fiscal_year": 2022, "jurisdiction": "Later"},'
        ' "Later": {"type": "Jurisdiction", "fiscal_year": 2022}}',
        schema,
    )
    e = db.lookup_record(ext_key("Entity", "E"))
    assert e.values["jurisdiction"] == key_value(ext_key("Jurisdiction", "Later"))


def test_reference_to_wrong_record_type_dangles(schema):
    diagnostics = load_errors(
        '{"E": {"type": "Entity", "fiscal_year": 2022, "jurisdiction": "F"},'
        ' "F": {"type": "Entity", "fiscal_year": 2022, "jurisdiction": "F"}}',
        schema,
    )
    assert {d.code for d in diagnostics} == {"DanglingKeyReference"}


def test_every_independent_violation_is_reported(schema):
    text = (
        '{"A": {"type": "Entity", "fiscal_year": 2022, "jurisdiction": "S",'
        ' "no_such_field": 1, "entity_type": "NotAMember"},'
        ' "B": {"fiscal_year": 2022},'
        ' "C": {"type": "Ghost"},'
        ' "S": {"type": "Jurisdiction", "fiscal_year": true}}'
    )
    diagnostics = load_errors(text, schema)
    assert sorted(d.code for d in diagnostics) == [
        "MissingTypeField",
        "UnknownField",
        "UnknownRecordType",
        "ValueTypeMismatch",
        "ValueTypeMismatch",
    ]


def test_duplicate_top_level_key(schema):
    diagnostics = load_errors(
        '{"S": {"type": "Jurisdiction", "fiscal_year": 2022},'
        ' "S": {"type": "Jurisdiction", "fiscal_year": 2023}}',
        schema,
    )
    assert [d.code for d in diagnostics] == ["DuplicateTopLevelKey"]


def test_precision_limit_on_input(schema):
    diagnostics = load_errors(
        '{"S": {"type": "Jurisdiction", "fiscal_year": 2022,'
        ' "top_up_tax_percentage": 0.1234567}}',
        schema,
    )
    assert [d.code for d in diagnostics] == ["ValueTypeMismatch"]


def test_money_accepts_up_to_six_digits_and_integers(schema):
    db = load_dataset(
        '{"S": {"type": "Jurisdiction", "fiscal_year": 2022,'
        ' "adjusted_covered_taxes": 12345, "substance_based_income_exclusion": 0.123456}}',
        schema,
    )
    swiss = db.lookup_record(ext_key("Jurisdiction", "S"))
    assert swiss.values["adjusted_covered_taxes"] == money_value(12345)
    assert swiss.values["substance_based_income_exclusion"] == money_value(
        Decimal("0.123456")
    )


def test_internal_keys_parse_and_render(schema):
    db = load_dataset(
        '{"#4": {"type": "Jurisdiction", "fiscal_year": 2022}}', schema
    )
    keys = db.all_keys_of_type("Jurisdiction")
    assert keys[0].name == KeyName.internal(4)
    assert db.next_internal == 5  # fresh keys never collide with loaded ones
    assert '"#4"' in dump_database(db, schema)


def test_malformed_internal_key_is_rejected(schema):
    diagnostics = load_errors('{"#nope": {"type": "Jurisdiction", "fiscal_year": 1}}', schema)
    assert [d.code for d in diagnostics] == ["InvalidKeyName"]


def test_dump_is_canonical(schema):
    db = load_dataset(read_fixture("beps_min.json"), schema)
    text = dump_database(db, schema)
    assert text == (
        "{\n"
        '  "Corp": {\n'
        '    "type": "Entity",\n'
        '    "fiscal_year": 2022,\n'
        '    "jurisdiction": "Switzerland",\n'
        '    "stock_based_compensation": 12345.00\n'
        "  },\n"
        '  "Switzerland": {\n'
        '    "type": "Jurisdiction",\n'
        '    "fiscal_year": 2022,\n'
        '    "top_up_tax_percentage": 0.03\n'
        "  }\n"
        "}\n"
    )


def test_dump_of_empty_database(schema):
    assert dump_database(Database(schema), schema) == "{}\n"


def test_money_serializes_minimal_beyond_two_digits(schema):
    db = Database(schema)
    db.insert_record(
        StoredRecord(
            ext_key("Jurisdiction", "S"),
            {
                "fiscal_year": int_value(1),
                "adjusted_covered_taxes": money_value(Decimal("1.2345")),
                "substance_based_income_exclusion": money_value(Decimal("7")),
            },
        )
    )
    text = dump_database(db, schema)
    assert '"adjusted_covered_taxes": 1.2345' in text
    assert '"substance_based_income_exclusion": 7.00' in text


def test_load_dump_is_identity_on_databases(schema):
    db = load_dataset(read_fixture("beps_511.json"), schema)
    again = load_dataset(dump_database(db, schema), schema)
    assert again == db


def test_dump_load_is_canonicalizing_and_idempotent(schema):
    messy = (
        '{"Z": {"type": "Jurisdiction", "fiscal_year": 2022},'
        '"A": {"type": "Jurisdiction", "adjusted_covered_taxes": 5.10000,'
        ' "fiscal_year": 2021}}'
    )
    once = dump_database(load_dataset(messy, schema), schema)
    twice = dump_database(load_dataset(once, schema), schema)
    assert once == twice
    assert once.index('"A"') < once.index('"Z"')  # sorted members
    assert '"adjusted_covered_taxes": 5.10' in once


def test_render_document_stability():
    tree = {"b": [1, Decimal("2.50")], "a": {"nested": True}}
    assert render_document(tree) == (
        "{\n"
        '  "b": [\n'
        "    1,\n"
        "    2.5\n"
        "  ],\n"
        '  "a": {\n'
        '    "nested": true\n'
        "  }\n"
        "}\n"
    )
