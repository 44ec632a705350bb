"""Demand-driven rule evaluation.

Evaluation threads three effects at once: the database as mutable state
(computed facts are written back so nothing is derived twice), a grown-only
dependency set (every field access and type scan is recorded before it is
attempted), and error accumulation. Binary operators evaluate both sides
even when one fails, so one run reports every reachable missing fact;
field access through a failed base cannot continue, which is why reported
dependencies are a best-effort subset whenever data is missing.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from decimal import Decimal

from . import numbers
from .database import (
    Database,
    FactKey,
    FactValue,
    bool_value,
    fact_id,
    int_value,
    key_value,
    money_value,
    percent_value,
    text_value,
)
from .diagnostics import SourceSpan
from .dsl.ast import (
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
from .dsl.typecheck import NoRuleBinding, TypedRuleset
from .schema import KEY_FIELD, FactSort, SchemaError, fact_sort, fact_type


@dataclass(frozen=True)
class DependencySet:
    """Monoid of consulted facts and scanned record types."""

    field_deps: frozenset[tuple[FactKey, str]] = frozenset()
    type_deps: frozenset[str] = frozenset()

    def union(self, other: "DependencySet") -> "DependencySet":
        return DependencySet(
            self.field_deps | other.field_deps, self.type_deps | other.type_deps
        )

    __or__ = union

    def is_empty(self) -> bool:
        return not self.field_deps and not self.type_deps

    def field_ids(self) -> list[str]:
        return sorted(fact_id(k, f) for k, f in self.field_deps)

    def type_names(self) -> list[str]:
        return sorted(self.type_deps)


EMPTY_DEPS = DependencySet()


class EvalError:
    """Base class for evaluation errors; subclasses are value-comparable."""

    code: str

    def render(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class MissingFact(EvalError):
    key: FactKey
    field: str
    code = "MissingFact"

    def render(self) -> str:
        return f"missing fact {fact_id(self.key, self.field)}"


@dataclass(frozen=True)
class NoRuleDefined(EvalError):
    key: FactKey
    field: str
    code = "NoRuleDefined"

    def render(self) -> str:
        return f"no rule defined for {fact_id(self.key, self.field)} and no value given"


@dataclass(frozen=True)
class UnknownKey(EvalError):
    key: FactKey
    code = "UnknownKey"

    def render(self) -> str:
        return f"unknown key {self.key.render()}"


@dataclass(frozen=True)
class Cycle(EvalError):
    path: tuple[tuple[FactKey, str], ...]
    code = "Cycle"

    def render(self) -> str:
        chain = " -> ".join(fact_id(k, f) for k, f in self.path)
        return f"rule dependencies cycle: {chain}"


@dataclass(frozen=True)
class DivideByZero(EvalError):
    span: SourceSpan
    code = "DivideByZero"

    def render(self) -> str:
        return f"division by zero at {self.span}"


@dataclass(frozen=True)
class EmptyAggregate(EvalError):
    agg: str
    span: SourceSpan
    code = "EmptyAggregate"

    def render(self) -> str:
        return f"{self.agg} over no records at {self.span}"


@dataclass(frozen=True)
class EvalOutcome:
    """A value or a non-empty error list, always with the observed deps."""

    value: FactValue | None
    errors: tuple[EvalError, ...]
    deps: DependencySet

    @property
    def ok(self) -> bool:
        return not self.errors


class EngineError(Exception):
    """Misuse of the engine API (unknown record type/field, bad override)."""

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)

    @property
    def message(self) -> str:
        return self.args[0]


class _Fail(Exception):
    def __init__(self, errors: tuple[EvalError, ...]):
        self.errors = errors
        super().__init__()


def _merge(*error_lists: tuple[EvalError, ...]) -> tuple[EvalError, ...]:
    seen: dict[EvalError, None] = {}
    for errors in error_lists:
        for e in errors:
            seen.setdefault(e)
    return tuple(seen)


class Session:
    """One evaluation context: a ruleset, an owned database copy, overrides.

    Single-writer; share the immutable schema/ruleset across sessions, never
    the session itself. `rule_invocations` instruments memoization.
    """

    def __init__(self, ruleset: TypedRuleset, db: Database):
        self.schema = ruleset.schema
        self.ruleset = ruleset
        self.db = db
        self.overrides: dict[tuple[FactKey, str], FactValue] = {}
        self.in_progress: list[tuple[FactKey, str]] = []
        self.rule_invocations: Counter = Counter()
        self.memo_writes: set[tuple[FactKey, str]] = set()

    def clone(self) -> "Session":
        dup = Session(self.ruleset, self.db.copy())
        dup.overrides = dict(self.overrides)
        dup.memo_writes = set(self.memo_writes)
        return dup

    # --- what-if overrides -------------------------------------------------

    def set_override(self, key: FactKey, field_name: str, value: FactValue) -> None:
        self._check_override_target(key, field_name)
        declared = fact_type(self.schema, key.record_type, field_name)
        if value.type_of() != declared:
            raise EngineError(
                "TypeMismatch",
                f"{fact_id(key, field_name)} expects {declared}, got {value.type_of()}",
            )
        self._invalidate_memo()
        self.overrides[(key, field_name)] = value

    def clear_override(self, key: FactKey, field_name: str) -> None:
        self._check_override_target(key, field_name)
        self._invalidate_memo()
        self.overrides.pop((key, field_name), None)

    def _check_override_target(self, key: FactKey, field_name: str) -> None:
        if self.db.lookup_record(key) is None:
            raise EngineError("UnknownKey", f"unknown key {key.render()}")
        if field_name == KEY_FIELD:
            raise EngineError("UnknownField", "the record key is not an overridable fact")
        try:
            fact_type(self.schema, key.record_type, field_name)
        except SchemaError as exc:
            raise EngineError(exc.code, exc.message) from exc

    def _invalidate_memo(self) -> None:
        # Any override change rolls back every rule-computed value; simple
        # and correct, incremental invalidation is out of scope.
        for key, field_name in self.memo_writes:
            self.db.erase_field(key, field_name)
        self.memo_writes.clear()


class _Ctx:
    def __init__(self, session: Session):
        self.session = session
        self.field_deps: set[tuple[FactKey, str]] = set()
        self.type_deps: set[str] = set()

    def freeze(self) -> DependencySet:
        return DependencySet(frozenset(self.field_deps), frozenset(self.type_deps))


def _access_field(ctx: _Ctx, key: FactKey, field_name: str) -> FactValue:
    # The dependency is recorded before any attempt at resolution.
    ctx.field_deps.add((key, field_name))
    session = ctx.session

    override = session.overrides.get((key, field_name))
    if override is not None:
        return override

    record = session.db.lookup_record(key)
    if record is None:
        raise _Fail((UnknownKey(key),))
    if field_name == KEY_FIELD:
        return key_value(key)

    sort = fact_sort(session.schema, key.record_type, field_name)
    stored = record.values.get(field_name)
    if sort is FactSort.INPUT:
        if stored is None:
            raise _Fail((MissingFact(key, field_name),))
        return stored
    if stored is not None:
        return stored

    binding = session.ruleset.binding(key.record_type, field_name)
    if isinstance(binding, NoRuleBinding):
        if binding.explicit:
            raise _Fail((NoRuleDefined(key, field_name),))
        raise _Fail((MissingFact(key, field_name),))

    target = (key, field_name)
    if target in session.in_progress:
        start = session.in_progress.index(target)
        raise _Fail((Cycle(tuple(session.in_progress[start:])),))

    session.in_progress.append(target)
    session.rule_invocations[target] += 1
    try:
        value = _eval(ctx, key, binding.expr, {})
    finally:
        session.in_progress.pop()

    if not session.overrides:
        session.db.write_back(key, field_name, value)
        session.memo_writes.add(target)
    return value


def _access_all_keys_of_type(ctx: _Ctx, record_type: str) -> list[FactKey]:
    ctx.type_deps.add(record_type)
    return ctx.session.db.all_keys_of_type(record_type)


def _literal_value(expr: Literal) -> FactValue:
    ty = expr.ty
    assert ty is not None
    if expr.kind == "percent":
        return percent_value(Decimal(expr.lexeme) / 100)
    if ty.kind == "int":
        return int_value(int(expr.lexeme))
    if ty.kind == "money":
        return money_value(Decimal(expr.lexeme))
    if ty.kind == "percent":
        return percent_value(Decimal(expr.lexeme))
    if ty.kind == "bool":
        return bool_value(expr.lexeme == "true")
    return text_value(expr.lexeme)


def _numeric(v: FactValue) -> int | Decimal:
    if v.kind == "int":
        return v.int_value  # type: ignore[return-value]
    return v.decimal_value  # type: ignore[return-value]


def _compare(op: str, lhs: FactValue, rhs: FactValue) -> bool:
    if op in ("==", "!="):
        equal: bool
        if lhs.kind == "key":
            equal = lhs.key_value == rhs.key_value
        elif lhs.kind == "enum":
            equal = (lhs.enum_name, lhs.member) == (rhs.enum_name, rhs.member)
        elif lhs.kind == "bool":
            equal = lhs.bool_value == rhs.bool_value
        elif lhs.kind == "text":
            equal = lhs.text_value == rhs.text_value
        else:
            equal = _numeric(lhs) == _numeric(rhs)
        return equal if op == "==" else not equal
    a, b = _numeric(lhs), _numeric(rhs)
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def _make_numeric(kind: str, value: int | Decimal) -> FactValue:
    if kind == "int":
        return int_value(int(value))
    if kind == "money":
        return money_value(value)  # type: ignore[arg-type]
    return percent_value(value)  # type: ignore[arg-type]


def _arith(op: str, lhs: FactValue, rhs: FactValue, result_kind: str, span: SourceSpan) -> FactValue:
    if lhs.kind == "int" and rhs.kind == "int":
        a, b = lhs.int_value, rhs.int_value
        if op == "+":
            return int_value(a + b)
        if op == "-":
            return int_value(a - b)
        if op == "*":
            return int_value(a * b)
        if b == 0:
            raise _Fail((DivideByZero(span),))
        return int_value(numbers.int_div(a, b))

    a = Decimal(_numeric(lhs))
    b = Decimal(_numeric(rhs))
    if op == "+":
        return _make_numeric(result_kind, a + b)
    if op == "-":
        return _make_numeric(result_kind, a - b)
    if op == "*":
        return _make_numeric(result_kind, numbers.quantize(a * b))
    if b == 0:
        raise _Fail((DivideByZero(span),))
    return _make_numeric(result_kind, numbers.exact_div(a, b))


def _zero_of(ty_kind: str) -> FactValue:
    return _make_numeric(ty_kind, 0)


def _eval(ctx: _Ctx, self_key: FactKey, expr: Expr, env: dict[str, FactKey]) -> FactValue:
    if isinstance(expr, Literal):
        return _literal_value(expr)
    if isinstance(expr, SelfRef):
        return key_value(self_key)
    if isinstance(expr, Var):
        return key_value(env[expr.name])
    if isinstance(expr, EnumLit):
        return FactValue("enum", enum_name=expr.enum_name, member=expr.member)
    if isinstance(expr, FieldAccess):
        # Monadic: a failed base names no key, so the access cannot proceed.
        base = _eval(ctx, self_key, expr.base, env)
        return _access_field(ctx, base.key_value, expr.field_name)  # type: ignore[arg-type]
    if isinstance(expr, Neg):
        operand = _eval(ctx, self_key, expr.operand, env)
        if operand.kind == "int":
            return int_value(-operand.int_value)  # type: ignore[operator]
        return _make_numeric(operand.kind, -operand.decimal_value)  # type: ignore[operator]
    if isinstance(expr, BinOp):
        # Applicative: both operands run even if the first fails, so every
        # error (and every nameable dependency) surfaces in one pass.
        lhs_errors: tuple[EvalError, ...] = ()
        rhs_errors: tuple[EvalError, ...] = ()
        lhs = rhs = None
        try:
            lhs = _eval(ctx, self_key, expr.lhs, env)
        except _Fail as failure:
            lhs_errors = failure.errors
        try:
            rhs = _eval(ctx, self_key, expr.rhs, env)
        except _Fail as failure:
            rhs_errors = failure.errors
        if lhs_errors or rhs_errors:
            raise _Fail(_merge(lhs_errors, rhs_errors))
        assert lhs is not None and rhs is not None
        if expr.op == "and":
            return bool_value(bool(lhs.bool_value and rhs.bool_value))
        if expr.op == "or":
            return bool_value(bool(lhs.bool_value or rhs.bool_value))
        if expr.op in ("==", "!=", "<", "<=", ">", ">="):
            return bool_value(_compare(expr.op, lhs, rhs))
        assert expr.ty is not None
        return _arith(expr.op, lhs, rhs, expr.ty.kind, expr.span)
    if isinstance(expr, IfThenElse):
        cond = _eval(ctx, self_key, expr.cond, env)  # failure propagates untouched
        branch = expr.then_branch if cond.bool_value else expr.else_branch
        return _eval(ctx, self_key, branch, env)
    if isinstance(expr, Aggregate):
        return _eval_aggregate(ctx, self_key, expr, env)
    raise TypeError(f"unevaluable node {type(expr).__name__}")


def _eval_aggregate(
    ctx: _Ctx, self_key: FactKey, expr: Aggregate, env: dict[str, FactKey]
) -> FactValue:
    keys = _access_all_keys_of_type(ctx, expr.record_type)
    errors: tuple[EvalError, ...] = ()
    values: list[FactValue] = []
    count = 0
    for key in keys:
        inner = dict(env)
        inner[expr.binder] = key
        if expr.where is not None:
            try:
                keep = _eval(ctx, self_key, expr.where, inner)
            except _Fail as failure:
                errors = _merge(errors, failure.errors)
                continue
            if not keep.bool_value:
                continue
        if expr.agg == "count":
            count += 1
            continue
        try:
            values.append(_eval(ctx, self_key, expr.select, inner))  # type: ignore[arg-type]
        except _Fail as failure:
            errors = _merge(errors, failure.errors)
    if errors:
        raise _Fail(errors)

    if expr.agg == "count":
        return int_value(count)
    if expr.agg == "any":
        return bool_value(any(v.bool_value for v in values))
    if expr.agg == "all":
        return bool_value(all(v.bool_value for v in values))

    assert expr.select is not None and expr.select.ty is not None
    element_kind = expr.select.ty.kind
    if expr.agg == "sum":
        if not values:
            return _zero_of(element_kind)
        if element_kind == "int":
            return int_value(sum(v.int_value for v in values))  # type: ignore[misc]
        total = sum((v.decimal_value for v in values), Decimal(0))  # type: ignore[misc]
        return _make_numeric(element_kind, total)
    if not values:
        raise _Fail((EmptyAggregate(expr.agg, expr.span),))
    picker = min if expr.agg == "min" else max
    chosen = picker(values, key=_numeric)
    return chosen


def _validate_fact(session: Session, key: FactKey, field_name: str) -> None:
    try:
        fact_type(session.schema, key.record_type, field_name)
    except SchemaError as exc:
        raise EngineError(exc.code, exc.message) from exc


def get_fact(session: Session, key: FactKey, field_name: str) -> EvalOutcome:
    """Retrieve one fact, running rules as needed and memoizing results."""
    _validate_fact(session, key, field_name)
    session.in_progress.clear()
    ctx = _Ctx(session)
    try:
        value = _access_field(ctx, key, field_name)
    except _Fail as failure:
        return EvalOutcome(None, failure.errors, ctx.freeze())
    return EvalOutcome(value, (), ctx.freeze())


def get_missing_dependencies(
    session: Session, key: FactKey, field_name: str
) -> tuple[list[str], list[str]]:
    """Facts that must be supplied, and the record types whose population
    was consulted, for the target fact. Evaluates in a scratch copy."""
    _validate_fact(session, key, field_name)
    scratch = session.clone()
    outcome = get_fact(scratch, key, field_name)
    missing = sorted(
        {
            fact_id(e.key, e.field)
            for e in outcome.errors
            if isinstance(e, (MissingFact, NoRuleDefined))
        }
    )
    return missing, outcome.deps.type_names()


def saturate(session: Session) -> tuple[Database, list[tuple[str, tuple[EvalError, ...]]]]:
    """Compute every derivable ruled fact; returns the enriched database
    (a superset of the input) and a report of the facts that failed."""
    has_overrides = bool(session.overrides)
    work = session.clone() if has_overrides else session
    report: list[tuple[str, tuple[EvalError, ...]]] = []
    successes: list[tuple[FactKey, str, FactValue]] = []

    for record_def in sorted(session.schema.records, key=lambda r: r.name):
        ruled = [
            f.name for f in record_def.fields if session.ruleset.has_rule(record_def.name, f.name)
        ]
        if not ruled:
            continue
        for key in work.db.all_keys_of_type(record_def.name):
            for field_name in ruled:
                if (key, field_name) in session.overrides:
                    continue
                outcome = get_fact(work, key, field_name)
                if outcome.ok:
                    successes.append((key, field_name, outcome.value))  # type: ignore[arg-type]
                else:
                    report.append((fact_id(key, field_name), outcome.errors))

    if work is session:
        return session.db, report
    result = session.db.copy()
    for key, field_name, value in successes:
        if not result.value_present(key, field_name):
            result.write_back(key, field_name, value)
    return result, report
