"""Independent oracle: a naive recursive evaluator.

Deliberately re-implements the evaluation semantics from the ground up,
with no memoization, no overrides, no dependency tracking and no error
accumulation (the first failure aborts). The engine under test must agree
with it on the value of every queryable fact of any acyclic instance.
"""

from __future__ import annotations

from decimal import ROUND_HALF_EVEN, Decimal, localcontext

from regula.database import Database, FactKey, FactValue
from regula.dsl.ast import (
    Aggregate,
    BinOp,
    EnumLit,
    Expr,
    FieldAccess,
    IfThenElse,
    Literal,
    Neg,
    SelfRef,
    Var,
)
from regula.dsl.typecheck import HasRuleBinding, TypedRuleset
from regula.schema import FactSort, Schema, fact_sort

_Q6 = Decimal("0.000001")


class OracleFailure(Exception):
    pass


def _q6(d: Decimal) -> Decimal:
    return d.quantize(_Q6, rounding=ROUND_HALF_EVEN)


def _num(v: FactValue):
    return v.int_value if v.kind == "int" else v.decimal_value


def _mk(kind: str, value) -> FactValue:
    if kind == "int":
        return FactValue("int", int_value=int(value))
    if kind == "money":
        return FactValue("money", decimal_value=Decimal(value))
    return FactValue("percent", decimal_value=Decimal(value))


def eval_fact(
    schema: Schema, ruleset: TypedRuleset, db: Database, key: FactKey, field_name: str
) -> FactValue:
    record = db.lookup_record(key)
    if record is None:
        raise OracleFailure(f"unknown key {key.render()}")
    if field_name == "key":
        return FactValue("key", key_value=key)
    stored = record.values.get(field_name)
    if stored is not None:
        return stored
    if fact_sort(schema, key.record_type, field_name) is FactSort.INPUT:
        raise OracleFailure("missing input fact")
    binding = ruleset.binding(key.record_type, field_name)
    if not isinstance(binding, HasRuleBinding):
        raise OracleFailure("missing fact and no rule")
    return eval_expr(schema, ruleset, db, key, binding.expr, {})


def eval_expr(
    schema: Schema,
    ruleset: TypedRuleset,
    db: Database,
    self_key: FactKey,
    expr: Expr,
    env: dict[str, FactKey],
) -> FactValue:
    rec = lambda e, environment=env: eval_expr(schema, ruleset, db, self_key, e, environment)

    if isinstance(expr, Literal):
        ty = expr.ty
        if expr.kind == "percent":
            return _mk("percent", Decimal(expr.lexeme) / 100)
        if ty.kind == "int":
            return _mk("int", int(expr.lexeme))
        if ty.kind in ("money", "percent"):
            return _mk(ty.kind, Decimal(expr.lexeme))
        if ty.kind == "bool":
            return FactValue("bool", bool_value=expr.lexeme == "true")
        return FactValue("text", text_value=expr.lexeme)
    if isinstance(expr, SelfRef):
        return FactValue("key", key_value=self_key)
    if isinstance(expr, Var):
        return FactValue("key", key_value=env[expr.name])
    if isinstance(expr, EnumLit):
        return FactValue("enum", enum_name=expr.enum_name, member=expr.member)
    if isinstance(expr, FieldAccess):
        base = rec(expr.base)
        return eval_fact(schema, ruleset, db, base.key_value, expr.field_name)
    if isinstance(expr, Neg):
        operand = rec(expr.operand)
        return _mk(operand.kind, -_num(operand))
    if isinstance(expr, IfThenElse):
        cond = rec(expr.cond)
        return rec(expr.then_branch if cond.bool_value else expr.else_branch)
    if isinstance(expr, BinOp):
        # No short-circuit anywhere: both operands always evaluate.
        lhs = rec(expr.lhs)
        rhs = rec(expr.rhs)
        op = expr.op
        if op == "and":
            return FactValue("bool", bool_value=bool(lhs.bool_value and rhs.bool_value))
        if op == "or":
            return FactValue("bool", bool_value=bool(lhs.bool_value or rhs.bool_value))
        if op in ("==", "!="):
            if lhs.kind in ("int", "money", "percent"):
                same = _num(lhs) == _num(rhs)
            else:
                same = lhs == rhs
            return FactValue("bool", bool_value=same if op == "==" else not same)
        if op in ("<", "<=", ">", ">="):
            a, b = _num(lhs), _num(rhs)
            result = {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]
            return FactValue("bool", bool_value=result)
        return _arith(op, lhs, rhs, expr.ty.kind)
    if isinstance(expr, Aggregate):
        keys = db.all_keys_of_type(expr.record_type)
        picked: list[FactValue] = []
        count = 0
        for key in keys:
            inner = dict(env)
            inner[expr.binder] = key
            if expr.where is not None:
                keep = rec(expr.where, inner)
                if not keep.bool_value:
                    continue
            if expr.agg == "count":
                count += 1
            else:
                picked.append(rec(expr.select, inner))
        if expr.agg == "count":
            return _mk("int", count)
        if expr.agg == "any":
            return FactValue("bool", bool_value=any(v.bool_value for v in picked))
        if expr.agg == "all":
            return FactValue("bool", bool_value=all(v.bool_value for v in picked))
        kind = expr.select.ty.kind
        if expr.agg == "sum":
            if kind == "int":
                return _mk("int", sum(v.int_value for v in picked))
            return _mk(kind, sum((v.decimal_value for v in picked), Decimal(0)))
        if not picked:
            raise OracleFailure(f"{expr.agg} of nothing")
        chosen = (min if expr.agg == "min" else max)(picked, key=_num)
        return chosen
    raise TypeError(type(expr).__name__)


def _arith(op: str, lhs: FactValue, rhs: FactValue, result_kind: str) -> FactValue:
    if lhs.kind == "int" and rhs.kind == "int":
        a, b = lhs.int_value, rhs.int_value
        if op == "+":
            return _mk("int", a + b)
        if op == "-":
            return _mk("int", a - b)
        if op == "*":
            return _mk("int", a * b)
        if b == 0:
            raise OracleFailure("divide by zero")
        with localcontext() as ctx:
            ctx.prec = 34
            q = Decimal(a) / Decimal(b)
        return _mk("int", int(q.to_integral_value(rounding=ROUND_HALF_EVEN)))
    a, b = Decimal(_num(lhs)), Decimal(_num(rhs))
    if op == "+":
        return _mk(result_kind, a + b)
    if op == "-":
        return _mk(result_kind, a - b)
    if op == "*":
        return _mk(result_kind, _q6(a * b))
    if b == 0:
        raise OracleFailure("divide by zero")
    with localcontext() as ctx:
        ctx.prec = 34
        return _mk(result_kind, _q6(a / b))
