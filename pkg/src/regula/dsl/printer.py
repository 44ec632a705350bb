"""Canonical printer: parse . print . parse is the identity on ASTs."""

from __future__ import annotations

import json

from ..schema import ValueType
from .ast import (
    Aggregate,
    BinOp,
    Decl,
    EnumDecl,
    EnumLit,
    Expr,
    FieldAccess,
    IfThenElse,
    Literal,
    Neg,
    RecordDecl,
    RuleDecl,
    SelfRef,
    Var,
)

# Binding strength, loosest first; a child prints parenthesized when its
# level is below what its context requires.
_LEVEL_IF = 0
_LEVEL_OR = 1
_LEVEL_AND = 2
_LEVEL_CMP = 3
_LEVEL_ADD = 4
_LEVEL_MUL = 5
_LEVEL_UNARY = 6
_LEVEL_ATOM = 7

_OP_LEVEL = {
    "or": _LEVEL_OR,
    "and": _LEVEL_AND,
    "==": _LEVEL_CMP,
    "!=": _LEVEL_CMP,
    "<": _LEVEL_CMP,
    "<=": _LEVEL_CMP,
    ">": _LEVEL_CMP,
    ">=": _LEVEL_CMP,
    "+": _LEVEL_ADD,
    "-": _LEVEL_ADD,
    "*": _LEVEL_MUL,
    "/": _LEVEL_MUL,
}


def _level(expr: Expr) -> int:
    if isinstance(expr, IfThenElse):
        return _LEVEL_IF
    if isinstance(expr, BinOp):
        return _OP_LEVEL[expr.op]
    if isinstance(expr, Neg):
        return _LEVEL_UNARY
    return _LEVEL_ATOM


def _print(expr: Expr, required: int) -> str:
    text = _print_node(expr)
    if _level(expr) < required:
        return f"({text})"
    return text


def _print_node(expr: Expr) -> str:
    if isinstance(expr, SelfRef):
        return "self"
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Literal):
        if expr.kind == "percent":
            return expr.lexeme + "%"
        if expr.kind == "text":
            return json.dumps(expr.lexeme)
        return expr.lexeme
    if isinstance(expr, EnumLit):
        return f"{expr.enum_name}::{expr.member}"
    if isinstance(expr, FieldAccess):
        return f"{_print(expr.base, _LEVEL_ATOM)}.{expr.field_name}"
    if isinstance(expr, Neg):
        inner = _print(expr.operand, _LEVEL_UNARY)
        # "--x" would lex as a comment; nested negation keeps its parens.
        if isinstance(expr.operand, Neg):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(expr, BinOp):
        lvl = _OP_LEVEL[expr.op]
        if lvl == _LEVEL_CMP:
            # Comparison is non-associative: both operands sit one level up.
            lhs = _print(expr.lhs, _LEVEL_ADD)
            rhs = _print(expr.rhs, _LEVEL_ADD)
        else:
            lhs = _print(expr.lhs, lvl)
            rhs = _print(expr.rhs, lvl + 1)
        return f"{lhs} {expr.op} {rhs}"
    if isinstance(expr, IfThenElse):
        cond = _print(expr.cond, _LEVEL_IF)
        then_branch = _print(expr.then_branch, _LEVEL_IF)
        else_branch = _print(expr.else_branch, _LEVEL_IF)
        return f"if {cond} then {then_branch} else {else_branch}"
    if isinstance(expr, Aggregate):
        parts = [f"{expr.agg}(all {expr.record_type} {expr.binder}"]
        if expr.where is not None:
            parts.append(f" where {_print(expr.where, _LEVEL_IF)}")
        if expr.select is not None:
            parts.append(f" select {_print(expr.select, _LEVEL_IF)}")
        parts.append(")")
        return "".join(parts)
    raise TypeError(f"unprintable node {type(expr).__name__}")


def print_expr(expr: Expr) -> str:
    return _print(expr, _LEVEL_IF)


def _print_type(vt: ValueType) -> str:
    return str(vt)


def print_decl(decl: Decl) -> str:
    if isinstance(decl, EnumDecl):
        members = ", ".join(decl.members)
        return f"enum {decl.name} {{{members}}}"
    if isinstance(decl, RecordDecl):
        lines = [f"record {decl.name} {{"]
        for f in decl.fields:
            lines.append(f"  {f.name}: {f.sort.value} {_print_type(f.value_type)}")
        lines.append("}")
        return "\n".join(lines)
    if isinstance(decl, RuleDecl):
        body = "none" if decl.body is None else print_expr(decl.body)
        return f"rule {decl.record_type}.{decl.field_name} = {body}"
    raise TypeError(f"unprintable declaration {type(decl).__name__}")


def print_ruleset(decls: list[Decl]) -> str:
    return "\n\n".join(print_decl(d) for d in decls) + "\n"
