"""Static (field-level) dependency graph over a typed ruleset.

Edge (A.f -> B.g) when A.f's rule reads field g on any key(B)-typed
expression; an aggregate over B additionally records a type-level edge.
Field-level cycles are warnings, not errors: whether the data actually
cycles is decided at evaluation time.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..diagnostics import Diagnostic
from .ast import Aggregate, FieldAccess, walk
from .typecheck import HasRuleBinding, TypedRuleset

Node = tuple[str, str]  # (record type, field)


@dataclass(frozen=True)
class DependencyGraph:
    field_edges: frozenset[tuple[Node, Node]]
    type_edges: frozenset[tuple[Node, str]]
    warnings: tuple[Diagnostic, ...]


def _cycles(nodes: set[Node], edges: set[tuple[Node, Node]]) -> list[list[Node]]:
    """Strongly connected components of size > 1, plus self-loops."""
    adjacency: dict[Node, list[Node]] = {n: [] for n in nodes}
    for src, dst in edges:
        adjacency.setdefault(src, []).append(dst)
        adjacency.setdefault(dst, [])

    index: dict[Node, int] = {}
    low: dict[Node, int] = {}
    on_stack: set[Node] = set()
    stack: list[Node] = []
    counter = [0]
    out: list[list[Node]] = []

    def strongconnect(root: Node) -> None:
        work = [(root, iter(adjacency[root]))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = low[succ] = counter[0]
                    counter[0] += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(adjacency[succ])))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                if len(component) > 1 or (node, node) in edges:
                    out.append(sorted(component))

    for node in sorted(adjacency):
        if node not in index:
            strongconnect(node)
    return out


def static_dependency_graph(ruleset: TypedRuleset) -> DependencyGraph:
    field_edges: set[tuple[Node, Node]] = set()
    type_edges: set[tuple[Node, str]] = set()
    nodes: set[Node] = set()

    for (record_type, field_name), binding in ruleset.rules.items():
        source: Node = (record_type, field_name)
        nodes.add(source)
        if not isinstance(binding, HasRuleBinding):
            continue
        for node in walk(binding.expr):
            if isinstance(node, FieldAccess):
                base_ty = node.base.ty
                if base_ty is not None and base_ty.kind == "key":
                    target: Node = (base_ty.name, node.field_name)
                    field_edges.add((source, target))
                    nodes.add(target)
            elif isinstance(node, Aggregate):
                type_edges.add((source, node.record_type))

    warnings = tuple(
        Diagnostic(
            "CyclicRuleDependencies",
            "rule dependencies form a cycle at the field level: "
            + " -> ".join(f"{r}.{f}" for r, f in component),
        )
        for component in _cycles(nodes, field_edges)
    )
    return DependencyGraph(frozenset(field_edges), frozenset(type_edges), warnings)
