"""Type checker for rule declarations.

Bidirectional: a rule body is checked against its target field's type, so
bare numeric literals pick up money/percent from context ("else 0" in a
money rule means 0.00). Arithmetic obeys a closed unit table; violations
like money*money are UnitErrors. All errors across all declarations are
accumulated before failing.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from decimal import Decimal

from .. import numbers
from ..diagnostics import Diagnostic, DiagnosticError
from ..schema import (
    BOOL,
    INT,
    Schema,
    SchemaError,
    FactSort,
    ValueType,
    fact_sort,
    fact_type,
    key_type,
)
from .ast import (
    Aggregate,
    BinOp,
    EnumLit,
    Expr,
    FieldAccess,
    IfThenElse,
    Literal,
    Neg,
    RuleDecl,
    SelfRef,
    Var,
)

MUL_TABLE: dict[tuple[str, str], str] = {
    ("int", "int"): "int",
    ("percent", "money"): "money",
    ("money", "percent"): "money",
    ("int", "money"): "money",
    ("money", "int"): "money",
    ("percent", "percent"): "percent",
    ("int", "percent"): "percent",
    ("percent", "int"): "percent",
}

DIV_TABLE: dict[tuple[str, str], str] = {
    ("money", "money"): "percent",
    ("money", "int"): "money",
    ("percent", "percent"): "percent",
    ("int", "int"): "int",
}


@dataclass(frozen=True)
class NoRuleBinding:
    """No rule exists; `explicit` records a literal `= none` declaration."""

    explicit: bool = False


@dataclass(frozen=True)
class HasRuleBinding:
    expr: Expr


RuleBinding = NoRuleBinding | HasRuleBinding

_DEFAULT_NO_RULE = NoRuleBinding(explicit=False)


@dataclass
class TypedRuleset:
    schema: Schema
    rules: dict[tuple[str, str], RuleBinding] = dc_field(default_factory=dict)

    def binding(self, record_type: str, field_name: str) -> RuleBinding:
        return self.rules.get((record_type, field_name), _DEFAULT_NO_RULE)

    def has_rule(self, record_type: str, field_name: str) -> bool:
        return isinstance(self.binding(record_type, field_name), HasRuleBinding)


def _flexibility(expr: Expr) -> str | None:
    """Literal shape if this expression's type must come from context.

    "int" for integer-looking literals (int, money or percent), "decimal"
    for fractional ones (money or percent), None for fixed-type nodes.
    """
    if isinstance(expr, Literal) and expr.kind in ("int", "decimal"):
        return expr.kind
    if isinstance(expr, Neg):
        return _flexibility(expr.operand)
    return None


class _Checker:
    def __init__(self, schema: Schema):
        self.schema = schema
        self.problems: list[Diagnostic] = []

    def fail(self, code: str, message: str, expr: Expr) -> None:
        self.problems.append(Diagnostic(code, message, expr.span))

    # --- entry points ----------------------------------------------------

    def check(self, expr: Expr, expected: ValueType, env: dict[str, ValueType]) -> bool:
        """Annotate expr against an expected type; False if any error was reported."""
        if isinstance(expr, Literal):
            return self._check_literal(expr, expected)
        if isinstance(expr, Neg):
            if not expected.is_numeric:
                self.fail("TypeMismatch", f"negation cannot produce {expected}", expr)
                return False
            ok = self.check(expr.operand, expected, env)
            expr.ty = expected
            return ok
        if isinstance(expr, IfThenElse):
            ok = self.check(expr.cond, BOOL, env)
            ok = self.check(expr.then_branch, expected, env) and ok
            ok = self.check(expr.else_branch, expected, env) and ok
            expr.ty = expected
            return ok
        if isinstance(expr, BinOp) and expr.op in ("+", "-"):
            if not expected.is_numeric:
                self.fail("TypeMismatch", f"'{expr.op}' cannot produce {expected}", expr)
                return False
            ok = self.check(expr.lhs, expected, env)
            ok = self.check(expr.rhs, expected, env) and ok
            expr.ty = expected
            return ok
        if isinstance(expr, BinOp) and expr.op in ("*", "/"):
            got = self._infer_muldiv(expr, env, expected)
            return self._confirm(expr, got, expected)
        if isinstance(expr, Aggregate) and expr.agg in ("sum", "min", "max"):
            if not expected.is_numeric:
                self.fail("TypeMismatch", f"{expr.agg} cannot produce {expected}", expr)
                return False
            got = self._infer_aggregate(expr, env, expected)
            return self._confirm(expr, got, expected)
        got = self.infer(expr, env)
        return self._confirm(expr, got, expected)

    def _confirm(self, expr: Expr, got: ValueType | None, expected: ValueType) -> bool:
        if got is None:
            return False
        if got != expected:
            self.fail("TypeMismatch", f"expected {expected}, got {got}", expr)
            return False
        return True

    def infer(self, expr: Expr, env: dict[str, ValueType]) -> ValueType | None:
        if isinstance(expr, Literal):
            return self._infer_literal(expr)
        if isinstance(expr, SelfRef):
            expr.ty = env["self"]
            return expr.ty
        if isinstance(expr, Var):
            bound = env.get(expr.name)
            if bound is None:
                self.fail("UnknownVariable", f"unbound identifier {expr.name}", expr)
                return None
            expr.ty = bound
            return bound
        if isinstance(expr, EnumLit):
            enum_def = self.schema.enum(expr.enum_name)
            if enum_def is None:
                self.fail("UnknownEnumRef", f"enum {expr.enum_name} is not declared", expr)
                return None
            if expr.member not in enum_def.members:
                self.fail(
                    "UnknownEnumMember",
                    f"enum {expr.enum_name} has no member {expr.member}",
                    expr,
                )
                return None
            expr.ty = ValueType("enum", expr.enum_name)
            return expr.ty
        if isinstance(expr, FieldAccess):
            base = self.infer(expr.base, env)
            if base is None:
                return None
            if base.kind != "key":
                self.fail("TypeMismatch", f"cannot access a field on {base}", expr)
                return None
            try:
                expr.ty = fact_type(self.schema, base.name, expr.field_name)
            except SchemaError as exc:
                self.fail(exc.code, exc.message, expr)
                return None
            return expr.ty
        if isinstance(expr, Neg):
            got = self.infer(expr.operand, env)
            if got is None:
                return None
            if not got.is_numeric:
                self.fail("TypeMismatch", f"cannot negate {got}", expr)
                return None
            expr.ty = got
            return got
        if isinstance(expr, BinOp):
            if expr.op in ("and", "or"):
                ok = self.check(expr.lhs, BOOL, env)
                ok = self.check(expr.rhs, BOOL, env) and ok
                if not ok:
                    return None
                expr.ty = BOOL
                return BOOL
            if expr.op in ("+", "-"):
                return self._infer_addsub(expr, env)
            if expr.op in ("*", "/"):
                return self._infer_muldiv(expr, env, None)
            return self._infer_comparison(expr, env)
        if isinstance(expr, IfThenElse):
            return self._infer_if(expr, env)
        if isinstance(expr, Aggregate):
            return self._infer_aggregate(expr, env, None)
        raise TypeError(f"unknown node {type(expr).__name__}")

    # --- literals ---------------------------------------------------------

    def _check_literal(self, expr: Literal, expected: ValueType) -> bool:
        kind = expr.kind
        ok = False
        if kind == "int":
            ok = expected.kind in ("int", "money", "percent")
        elif kind == "decimal":
            ok = expected.kind in ("money", "percent")
        elif kind == "percent":
            ok = expected.kind == "percent"
        elif kind == "bool":
            ok = expected.kind == "bool"
        elif kind == "text":
            ok = expected.kind == "text"
        if not ok:
            self.fail(
                "TypeMismatch", f"{kind} literal {expr.lexeme!r} cannot have type {expected}", expr
            )
            return False
        if kind in ("int", "decimal") and expected.kind in ("money", "percent"):
            if not numbers.fits_precision(Decimal(expr.lexeme)):
                self.fail(
                    "TypeMismatch",
                    f"literal {expr.lexeme} exceeds 6 fractional digits",
                    expr,
                )
                return False
        expr.ty = expected
        return True

    def _infer_literal(self, expr: Literal) -> ValueType | None:
        if expr.kind == "int":
            expr.ty = INT  # unconstrained integer literals default to int
            return INT
        if expr.kind == "decimal":
            self.fail(
                "AmbiguousLiteral",
                f"literal {expr.lexeme} could be money or percent; no context decides",
                expr,
            )
            return None
        if expr.kind == "percent":
            if not numbers.fits_precision(Decimal(expr.lexeme) / 100):
                self.fail(
                    "TypeMismatch",
                    f"literal {expr.lexeme}% exceeds 6 fractional digits",
                    expr,
                )
                return None
            expr.ty = ValueType("percent")
            return expr.ty
        if expr.kind == "bool":
            expr.ty = BOOL
            return BOOL
        expr.ty = ValueType("text")
        return expr.ty

    # --- operators ---------------------------------------------------------

    def _infer_addsub(self, expr: BinOp, env: dict[str, ValueType]) -> ValueType | None:
        lf, rf = _flexibility(expr.lhs), _flexibility(expr.rhs)
        if lf and rf:
            if lf == rf == "int":
                ok = self.check(expr.lhs, INT, env) and self.check(expr.rhs, INT, env)
                if not ok:
                    return None
                expr.ty = INT
                return INT
            self.fail(
                "AmbiguousLiteral",
                f"operands of '{expr.op}' could be money or percent; no context decides",
                expr,
            )
            return None
        if lf or rf:
            concrete, flexible = (expr.rhs, expr.lhs) if lf else (expr.lhs, expr.rhs)
            got = self.infer(concrete, env)
            if got is None:
                return None
            if not got.is_numeric:
                self.fail("TypeMismatch", f"'{expr.op}' is not defined on {got}", expr)
                return None
            if not self.check(flexible, got, env):
                return None
            expr.ty = got
            return got
        lt = self.infer(expr.lhs, env)
        rt = self.infer(expr.rhs, env)
        if lt is None or rt is None:
            return None
        if not lt.is_numeric or not rt.is_numeric:
            bad = lt if not lt.is_numeric else rt
            self.fail("TypeMismatch", f"'{expr.op}' is not defined on {bad}", expr)
            return None
        if lt != rt:
            self.fail("UnitError", f"cannot apply '{expr.op}' to {lt} and {rt}", expr)
            return None
        expr.ty = lt
        return lt

    def _infer_muldiv(
        self, expr: BinOp, env: dict[str, ValueType], expected: ValueType | None
    ) -> ValueType | None:
        table = MUL_TABLE if expr.op == "*" else DIV_TABLE
        opname = "multiply" if expr.op == "*" else "divide"
        lf, rf = _flexibility(expr.lhs), _flexibility(expr.rhs)

        if not lf and not rf:
            lt = self.infer(expr.lhs, env)
            rt = self.infer(expr.rhs, env)
            if lt is None or rt is None:
                return None
            if not lt.is_numeric or not rt.is_numeric:
                bad = lt if not lt.is_numeric else rt
                self.fail("TypeMismatch", f"cannot {opname} with {bad}", expr)
                return None
            result = table.get((lt.kind, rt.kind))
            if result is None:
                self.fail("UnitError", f"cannot {opname} {lt} by {rt}", expr)
                return None
            expr.ty = ValueType(result)
            return expr.ty

        if lf and rf:
            if lf == rf == "int" and (expected is None or expected == INT):
                ok = self.check(expr.lhs, INT, env) and self.check(expr.rhs, INT, env)
                if not ok:
                    return None
                expr.ty = INT
                return INT
            self.fail(
                "AmbiguousLiteral",
                f"operands of '{expr.op}' are untyped literals; no context decides",
                expr,
            )
            return None

        # One side is a flexible literal: pick its type from the table row
        # that the concrete side selects, constrained by the expected result.
        lit_on_right = rf is not None
        concrete = expr.lhs if lit_on_right else expr.rhs
        flexible = expr.rhs if lit_on_right else expr.lhs
        lit_shape = rf if lit_on_right else lf
        got = self.infer(concrete, env)
        if got is None:
            return None
        if not got.is_numeric:
            self.fail("TypeMismatch", f"cannot {opname} with {got}", expr)
            return None
        candidates = []
        for (a, b), result in table.items():
            partner = b if lit_on_right else a
            anchor = a if lit_on_right else b
            if anchor != got.kind:
                continue
            if expected is not None and result != expected.kind:
                continue
            if lit_shape == "decimal" and partner == "int":
                continue
            candidates.append((partner, result))
        if not candidates:
            self.fail("UnitError", f"cannot {opname} {got} by a literal here", expr)
            return None
        partners = {p for p, _ in candidates}
        if len(partners) > 1:
            if lit_shape == "int" and "int" in partners:
                candidates = [(p, r) for p, r in candidates if p == "int"]
            else:
                self.fail(
                    "AmbiguousLiteral",
                    f"literal operand of '{expr.op}' could be any of "
                    f"{', '.join(sorted(partners))}",
                    expr,
                )
                return None
        partner, result = candidates[0]
        if not self.check(flexible, ValueType(partner), env):
            return None
        expr.ty = ValueType(result)
        return expr.ty

    def _infer_comparison(self, expr: BinOp, env: dict[str, ValueType]) -> ValueType | None:
        lf, rf = _flexibility(expr.lhs), _flexibility(expr.rhs)
        if lf and rf:
            if lf == rf == "int":
                if not (self.check(expr.lhs, INT, env) and self.check(expr.rhs, INT, env)):
                    return None
                operand = INT
            else:
                self.fail(
                    "AmbiguousLiteral",
                    f"operands of '{expr.op}' could be money or percent; no context decides",
                    expr,
                )
                return None
        elif lf or rf:
            concrete, flexible = (expr.rhs, expr.lhs) if lf else (expr.lhs, expr.rhs)
            got = self.infer(concrete, env)
            if got is None:
                return None
            if not self.check(flexible, got, env):
                return None
            operand = got
        else:
            lt = self.infer(expr.lhs, env)
            rt = self.infer(expr.rhs, env)
            if lt is None or rt is None:
                return None
            if lt != rt:
                self.fail("TypeMismatch", f"cannot compare {lt} with {rt}", expr)
                return None
            operand = lt
        if expr.op in ("<", "<=", ">", ">=") and not operand.is_ordered:
            self.fail("TypeMismatch", f"ordering is not defined on {operand}", expr)
            return None
        expr.ty = BOOL
        return BOOL

    def _infer_if(self, expr: IfThenElse, env: dict[str, ValueType]) -> ValueType | None:
        ok = self.check(expr.cond, BOOL, env)
        tf, ef = _flexibility(expr.then_branch), _flexibility(expr.else_branch)
        if tf and not ef:
            got = self.infer(expr.else_branch, env)
            if got is None or not ok:
                return None
            if not self.check(expr.then_branch, got, env):
                return None
        elif ef and not tf:
            got = self.infer(expr.then_branch, env)
            if got is None or not ok:
                return None
            if not self.check(expr.else_branch, got, env):
                return None
        else:
            got = self.infer(expr.then_branch, env)
            if got is None or not ok:
                return None
            if not self.check(expr.else_branch, got, env):
                return None
        expr.ty = got
        return got

    def _infer_aggregate(
        self, expr: Aggregate, env: dict[str, ValueType], expected: ValueType | None
    ) -> ValueType | None:
        if self.schema.record(expr.record_type) is None:
            self.fail("UnknownRecord", f"unknown record type {expr.record_type}", expr)
            return None
        if expr.binder in env:
            self.fail("ShadowedBinder", f"binder {expr.binder} shadows an enclosing name", expr)
            return None
        inner = dict(env)
        inner[expr.binder] = key_type(expr.record_type)
        ok = True
        if expr.where is not None:
            ok = self.check(expr.where, BOOL, inner)
        if expr.agg == "count":
            if not ok:
                return None
            expr.ty = INT
            return INT
        assert expr.select is not None  # grammar guarantees
        if expr.agg in ("any", "all"):
            if not (self.check(expr.select, BOOL, inner) and ok):
                return None
            expr.ty = BOOL
            return BOOL
        # sum / min / max
        if expected is not None:
            if not (self.check(expr.select, expected, inner) and ok):
                return None
            expr.ty = expected
            return expected
        got = self.infer(expr.select, inner)
        if got is None or not ok:
            return None
        if not got.is_numeric:
            self.fail("TypeMismatch", f"{expr.agg} is not defined on {got}", expr)
            return None
        expr.ty = got
        return got


def typecheck_ruleset(schema: Schema, decls: list[RuleDecl]) -> TypedRuleset:
    """Check rule declarations against a validated schema.

    Declaration order never matters: rules may be split across files and
    permuted freely. Raises DiagnosticError carrying every error found.
    """
    checker = _Checker(schema)
    rules: dict[tuple[str, str], RuleBinding] = {}
    for decl in decls:
        target = (decl.record_type, decl.field_name)
        try:
            sort = fact_sort(schema, decl.record_type, decl.field_name)
        except SchemaError as exc:
            checker.problems.append(Diagnostic(exc.code, exc.message, decl.span))
            continue
        if sort is FactSort.INPUT:
            checker.problems.append(
                Diagnostic(
                    "RuleOnInputField",
                    f"{decl.record_type}.{decl.field_name} is an input fact; rules may "
                    "only derive optional facts",
                    decl.span,
                )
            )
            continue
        if target in rules:
            checker.problems.append(
                Diagnostic(
                    "DuplicateRule",
                    f"rule for {decl.record_type}.{decl.field_name} declared twice",
                    decl.span,
                )
            )
            continue
        if decl.body is None:
            rules[target] = NoRuleBinding(explicit=True)
            continue
        expected = fact_type(schema, decl.record_type, decl.field_name)
        env = {"self": key_type(decl.record_type)}
        if checker.check(decl.body, expected, env):
            rules[target] = HasRuleBinding(decl.body)
    if checker.problems:
        raise DiagnosticError(checker.problems)
    return TypedRuleset(schema, rules)
