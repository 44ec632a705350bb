"""AST for the rule language.

Nodes compare structurally; source spans never participate in equality so
a parse/print/parse round trip yields equal trees. The checker annotates
nodes in place via `ty`; a fully annotated tree is a "typed expression".
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..diagnostics import SourceSpan
from ..schema import FieldDef, ValueType


class Expr:
    """Base class for expression nodes."""

    span: SourceSpan
    ty: ValueType | None


@dataclass(eq=True)
class SelfRef(Expr):
    span: SourceSpan = field(compare=False)
    ty: ValueType | None = None


@dataclass(eq=True)
class Literal(Expr):
    """kind: int | decimal | percent | bool | text.

    The lexeme is kept verbatim for numbers ("0.50" stays "0.50"); percent
    lexemes exclude the "%" sign; text lexemes hold the decoded string.
    """

    kind: str
    lexeme: str
    span: SourceSpan = field(compare=False)
    ty: ValueType | None = None


@dataclass(eq=True)
class EnumLit(Expr):
    enum_name: str
    member: str
    span: SourceSpan = field(compare=False)
    ty: ValueType | None = None


@dataclass(eq=True)
class Var(Expr):
    name: str
    span: SourceSpan = field(compare=False)
    ty: ValueType | None = None


@dataclass(eq=True)
class FieldAccess(Expr):
    base: Expr
    field_name: str
    span: SourceSpan = field(compare=False)
    ty: ValueType | None = None


@dataclass(eq=True)
class Neg(Expr):
    operand: Expr
    span: SourceSpan = field(compare=False)
    ty: ValueType | None = None


@dataclass(eq=True)
class BinOp(Expr):
    op: str
    lhs: Expr
    rhs: Expr
    span: SourceSpan = field(compare=False)
    ty: ValueType | None = None


@dataclass(eq=True)
class IfThenElse(Expr):
    cond: Expr
    then_branch: Expr
    else_branch: Expr
    span: SourceSpan = field(compare=False)
    ty: ValueType | None = None


@dataclass(eq=True)
class Aggregate(Expr):
    """sum/min/max/any/all/count over all records of one type.

    count has no select; the others require one. The binder is in scope in
    both the where clause and the select expression.
    """

    agg: str
    record_type: str
    binder: str
    where: Expr | None
    select: Expr | None
    span: SourceSpan = field(compare=False)
    ty: ValueType | None = None


COMPARISON_OPS = ("==", "!=", "<", "<=", ">", ">=")
ARITH_OPS = ("+", "-", "*", "/")
BOOL_OPS = ("and", "or")

AGG_WITH_SELECT = ("sum", "min", "max", "any", "all")
AGG_ALL = AGG_WITH_SELECT + ("count",)


@dataclass(eq=True)
class EnumDecl:
    name: str
    members: tuple[str, ...]
    span: SourceSpan = field(compare=False)


@dataclass(eq=True)
class RecordDecl:
    name: str
    fields: tuple[FieldDef, ...]
    span: SourceSpan = field(compare=False)


@dataclass(eq=True)
class RuleDecl:
    record_type: str
    field_name: str
    body: Expr | None  # None means an explicit "none" (no rule exists)
    span: SourceSpan = field(compare=False)


Decl = EnumDecl | RecordDecl | RuleDecl


def walk(expr: Expr):
    """Yield expr and every descendant, preorder."""
    yield expr
    if isinstance(expr, FieldAccess):
        yield from walk(expr.base)
    elif isinstance(expr, Neg):
        yield from walk(expr.operand)
    elif isinstance(expr, BinOp):
        yield from walk(expr.lhs)
        yield from walk(expr.rhs)
    elif isinstance(expr, IfThenElse):
        yield from walk(expr.cond)
        yield from walk(expr.then_branch)
        yield from walk(expr.else_branch)
    elif isinstance(expr, Aggregate):
        if expr.where is not None:
            yield from walk(expr.where)
        if expr.select is not None:
            yield from walk(expr.select)
