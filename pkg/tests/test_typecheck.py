from __future__ import annotations

import random

import pytest

from regula.diagnostics import DiagnosticError
from regula.dsl.ast import BinOp, FieldAccess, SelfRef, walk
from regula.dsl.parser import parse_ruleset
from regula.dsl.typecheck import (
    DIV_TABLE,
    MUL_TABLE,
    HasRuleBinding,
    NoRuleBinding,
    _Checker,
    typecheck_ruleset,
)
from regula.schema import BOOL, INT, MONEY, PERCENT, ValueType, key_type, validate_schema

from conftest import read_fixture


def compile_ok(source: str):
    schema, rules = parse_ruleset(source)
    assert validate_schema(schema) == []
    return schema, typecheck_ruleset(schema, rules)


def errors_of(source: str) -> list:
    schema, rules = parse_ruleset(source)
    assert validate_schema(schema) == []
    with pytest.raises(DiagnosticError) as err:
        typecheck_ruleset(schema, rules)
    return err.value.diagnostics


def test_percent_times_money_is_money():
    compile_ok(
        "record R { p: optional percent m: optional money r: optional money }"
        " rule R.r = self.p * self.m"
    )


def test_money_times_money_is_a_spanned_unit_error():
    diagnostics = errors_of(
        "record R { a: optional money b: optional money r: optional money }\n"
        "rule R.r = self.a * self.b"
    )
    assert len(diagnostics) == 1
    assert diagnostics[0].code == "UnitError"
    assert diagnostics[0].span is not None and diagnostics[0].span.start_line == 2


def test_cross_record_key_comparison_is_bool():
    # entity.jurisdiction == self.key with self : key(Jurisdiction)
    _, ruleset = compile_ok(
        "record Jurisdiction { total: optional int }\n"
        "record Entity { jurisdiction: input key Jurisdiction }\n"
        "rule Jurisdiction.total = count(all Entity e where e.jurisdiction == self.key)"
    )
    binding = ruleset.binding("Jurisdiction", "total")
    where = binding.expr.where
    assert where.ty == BOOL
    assert where.lhs.ty == key_type("Jurisdiction")
    assert where.rhs.ty == key_type("Jurisdiction")


def test_bare_zero_in_money_rule_is_money():
    _, ruleset = compile_ok(
        "record R { e: optional bool m: optional money r: optional money }"
        " rule R.r = if self.e then self.m else 0"
    )
    body = ruleset.binding("R", "r").expr
    assert body.else_branch.ty == MONEY


def test_dot_chain_through_key_typed_field():
    _, ruleset = compile_ok(
        "record Jurisdiction { top_up_tax_percentage: optional percent }\n"
        "record Entity { jurisdiction: input key Jurisdiction rate: optional percent }\n"
        "rule Entity.rate = self.jurisdiction.top_up_tax_percentage"
    )
    body = ruleset.binding("Entity", "rate").expr
    assert body.ty == PERCENT
    assert body.base.ty == key_type("Jurisdiction")


def test_rule_on_input_field_is_rejected():
    diagnostics = errors_of("record R { a: input int } rule R.a = 1")
    assert [d.code for d in diagnostics] == ["RuleOnInputField"]


def test_duplicate_rule_is_rejected():
    diagnostics = errors_of(
        "record R { a: optional int } rule R.a = 1 rule R.a = 2"
    )
    assert [d.code for d in diagnostics] == ["DuplicateRule"]


def test_unknown_targets_are_rejected():
    diagnostics = errors_of(
        "record R { a: optional int } rule R.b = 1 rule S.a = 1 rule R.key = 1"
    )
    assert sorted(d.code for d in diagnostics) == ["KeyHasNoSort", "UnknownField", "UnknownRecord"]


def test_ambiguous_fraction_literal_is_rejected():
    diagnostics = errors_of(
        "record R { a: optional bool } rule R.a = 0.5 == 0.5"
    )
    assert [d.code for d in diagnostics] == ["AmbiguousLiteral"]


def test_percent_literal_against_money_is_rejected():
    diagnostics = errors_of("record R { a: optional money } rule R.a = 3%")
    assert [d.code for d in diagnostics] == ["TypeMismatch"]


def test_if_condition_must_be_bool_no_truthiness():
    diagnostics = errors_of(
        "record R { a: optional int b: optional money } rule R.b = if self.a then 1 else 2"
    )
    assert any(d.code == "TypeMismatch" for d in diagnostics)


def test_shadowed_binder_is_rejected():
    diagnostics = errors_of(
        "record R { a: optional money b: optional int }\n"
        "rule R.b = count(all R e where e.a < sum(all R e select e.a))"
    )
    assert [d.code for d in diagnostics] == ["ShadowedBinder"]


def test_unbound_identifier_is_rejected():
    diagnostics = errors_of("record R { a: optional money } rule R.a = nowhere")
    assert [d.code for d in diagnostics] == ["UnknownVariable"]


def test_errors_accumulate_across_declarations():
    diagnostics = errors_of(
        "record R { a: optional money b: optional money }\n"
        "rule R.a = self.a * self.a\n"
        "rule R.b = missing_var"
    )
    assert sorted(d.code for d in diagnostics) == ["UnitError", "UnknownVariable"]


def test_min_max_require_ordered_any_all_require_bool():
    compile_ok(
        "record R { a: optional money m: optional money }"
        " rule R.m = min(all R e select e.a)"
    )
    diagnostics = errors_of(
        "enum E {A, B} record R { a: optional enum E m: optional money }\n"
        "rule R.m = min(all R e select e.a)"
    )
    assert any(d.code == "TypeMismatch" for d in diagnostics)
    compile_ok(
        "record R { f: optional bool g: optional bool }"
        " rule R.g = any(all R e select e.f)"
    )


def test_annotations_follow_the_closed_table_bottom_up(beps_bundle):
    # Every annotation re-derives from its children's annotations.
    for binding in beps_bundle.ruleset.rules.values():
        if not isinstance(binding, HasRuleBinding):
            continue
        for node in walk(binding.expr):
            assert node.ty is not None
            if isinstance(node, BinOp) and node.op in ("*", "/"):
                table = MUL_TABLE if node.op == "*" else DIV_TABLE
                assert table[(node.lhs.ty.kind, node.rhs.ty.kind)] == node.ty.kind
            if isinstance(node, BinOp) and node.op in ("+", "-"):
                assert node.lhs.ty == node.rhs.ty == node.ty
            if isinstance(node, BinOp) and node.op in ("==", "!=", "<", "<=", ">", ">="):
                assert node.lhs.ty == node.rhs.ty and node.ty == BOOL


def test_typecheck_is_order_independent():
    source = read_fixture("beps.regula")
    schema, rules = parse_ruleset(source)
    reference = typecheck_ruleset(schema, rules)
    rng = random.Random(7)
    for _ in range(5):
        shuffled = list(rules)
        rng.shuffle(shuffled)
        permuted = typecheck_ruleset(schema, shuffled)
        assert permuted.rules == reference.rules
        assert permuted.schema == reference.schema


def test_explicit_none_is_distinguished_from_defaulted():
    _, ruleset = compile_ok(
        "record R { a: optional money b: optional money } rule R.a = none"
    )
    assert ruleset.binding("R", "a") == NoRuleBinding(explicit=True)
    assert ruleset.binding("R", "b") == NoRuleBinding(explicit=False)


# --- the closed unit-algebra matrix -----------------------------------------

_MATRIX_SOURCE = (
    "enum E1 {A1, B1}\n"
    "enum E2 {A2}\n"
    "record R1 { u: input int }\n"
    "record R2 { u: input int }\n"
    "record M {\n"
    "  f_int: optional int\n"
    "  f_bool: optional bool\n"
    "  f_text: optional text\n"
    "  f_money: optional money\n"
    "  f_percent: optional percent\n"
    "  f_enum1: optional enum E1\n"
    "  f_enum2: optional enum E2\n"
    "  f_key1: optional key R1\n"
    "  f_key2: optional key R2\n"
    "}\n"
)

_KINDS = [
    ("int", INT),
    ("bool", BOOL),
    ("text", ValueType("text")),
    ("money", MONEY),
    ("percent", PERCENT),
    ("enum1", ValueType("enum", "E1")),
    ("enum2", ValueType("enum", "E2")),
    ("key1", key_type("R1")),
    ("key2", key_type("R2")),
]

# Expected results, written out by hand; never derived from the checker.
_ADD = {("int", "int"): "int", ("money", "money"): "money", ("percent", "percent"): "percent"}
_MUL = {
    ("int", "int"): "int",
    ("percent", "money"): "money",
    ("money", "percent"): "money",
    ("int", "money"): "money",
    ("money", "int"): "money",
    ("percent", "percent"): "percent",
    ("int", "percent"): "percent",
    ("percent", "int"): "percent",
}
_DIV = {
    ("money", "money"): "percent",
    ("money", "int"): "money",
    ("percent", "percent"): "percent",
    ("int", "int"): "int",
}
_ORDERED = {"int", "money", "percent"}
_EQUABLE = {"int", "money", "percent", "bool", "text", "enum1", "enum2", "key1", "key2"}


def _expected(op: str, left: str, right: str) -> str | None:
    if op in ("+", "-"):
        return _ADD.get((left, right))
    if op == "*":
        return _MUL.get((left, right))
    if op == "/":
        return _DIV.get((left, right))
    if op in ("and", "or"):
        return "bool" if left == right == "bool" else None
    if op in ("<", "<=", ">", ">="):
        return "bool" if left == right and left in _ORDERED else None
    # == and !=
    return "bool" if left == right and left in _EQUABLE else None


_ALL_OPS = ["+", "-", "*", "/", "==", "!=", "<", "<=", ">", ">=", "and", "or"]


@pytest.mark.parametrize("op", _ALL_OPS)
def test_unit_algebra_matrix(op):
    schema, _ = parse_ruleset(_MATRIX_SOURCE)
    assert validate_schema(schema) == []
    for left_name, left_ty in _KINDS:
        for right_name, right_ty in _KINDS:
            checker = _Checker(schema)
            expr = BinOp(
                op,
                FieldAccess(SelfRef(None), f"f_{left_name}", None),
                FieldAccess(SelfRef(None), f"f_{right_name}", None),
                None,
            )
            got = checker.infer(expr, {"self": key_type("M")})
            want = _expected(op, left_name, right_name)
            case = f"{left_name} {op} {right_name}"
            if want is None:
                assert got is None, f"{case} must be rejected"
                assert checker.problems, f"{case} must report a diagnostic"
            else:
                assert not checker.problems, f"{case}: {checker.problems}"
                assert got is not None and got.kind == want, case
