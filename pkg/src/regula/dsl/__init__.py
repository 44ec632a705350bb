"""Rule-language front end: lexer/parser, canonical printer, type checker,
static dependency analysis, and the multi-file compile pipeline."""

from __future__ import annotations

from dataclasses import dataclass

from ..diagnostics import Diagnostic, DiagnosticError
from ..schema import Schema, validate_schema
from .ast import Decl, RuleDecl
from .deps import DependencyGraph, static_dependency_graph
from .parser import assemble_schema, parse_ruleset, parse_source
from .printer import print_decl, print_expr, print_ruleset
from .typecheck import (
    HasRuleBinding,
    NoRuleBinding,
    RuleBinding,
    TypedRuleset,
    typecheck_ruleset,
)


@dataclass(frozen=True)
class Bundle:
    """A compiled ruleset: validated schema, typed rules, dependency graph."""

    schema: Schema
    ruleset: TypedRuleset
    graph: DependencyGraph
    decls: tuple[Decl, ...]

    @property
    def warnings(self) -> tuple[Diagnostic, ...]:
        return self.graph.warnings


def compile_sources(sources: list[tuple[str, str]]) -> Bundle:
    """Parse, validate and typecheck rule sources ((filename, text) pairs).

    Files are independent modules of one ruleset: declarations merge before
    checking, so rules may live anywhere. Raises DiagnosticError with every
    problem found at the first failing stage.
    """
    decls: list[Decl] = []
    problems: list[Diagnostic] = []
    for filename, text in sources:
        file_decls, file_problems = parse_source(text, filename)
        decls.extend(file_decls)
        problems.extend(file_problems)
    if problems:
        raise DiagnosticError(problems)

    schema = assemble_schema(decls)
    schema_problems = validate_schema(schema)
    if schema_problems:
        raise DiagnosticError(schema_problems)

    rules = [d for d in decls if isinstance(d, RuleDecl)]
    ruleset = typecheck_ruleset(schema, rules)
    graph = static_dependency_graph(ruleset)
    return Bundle(schema, ruleset, graph, tuple(decls))


def compile_text(text: str, filename: str = "<input>") -> Bundle:
    return compile_sources([(filename, text)])


__all__ = [
    "Bundle",
    "DependencyGraph",
    "HasRuleBinding",
    "NoRuleBinding",
    "RuleBinding",
    "TypedRuleset",
    "assemble_schema",
    "compile_sources",
    "compile_text",
    "parse_ruleset",
    "parse_source",
    "print_decl",
    "print_expr",
    "print_ruleset",
    "static_dependency_graph",
    "typecheck_ruleset",
]
