"""Random acyclic instance generator for differential testing.

Emits (ruleset text, dataset text, queries). Construction guarantees the
instances typecheck and the data can never cycle: every field has a global
rank and rules only ever read strictly lower ranks; ruled fields carry a
level <= 3 and may only read ruled fields of lower level, which also keeps
the memo-free oracle's recursion shallow. Aggregates scan unruled fields.
"""

from __future__ import annotations

import random
from dataclasses import dataclass


@dataclass(frozen=True)
class GenInstance:
    seed: int
    ruleset_text: str
    dataset_text: str
    # (record type, rendered key name, field)
    queries: tuple[tuple[str, str, str], ...]


def generate(seed: int) -> GenInstance:
    rng = random.Random(seed)
    n_types = rng.randint(1, 4)
    types = [f"T{i}" for i in range(n_types)]
    fields_per_type = [rng.randint(1, 4) for _ in range(n_types)]

    def rank(i: int, j: int) -> int:
        return j * n_types + i

    # (i, j) -> sort; money fields are "m{j}"
    input_fields: set[tuple[int, int]] = set()
    all_fields: list[tuple[int, int]] = []
    for i in range(n_types):
        for j in range(fields_per_type[i]):
            all_fields.append((i, j))
            if rng.random() < 0.25:
                input_fields.add((i, j))

    optional_fields = [f for f in all_fields if f not in input_fields]
    rng.shuffle(optional_fields)
    ruled = sorted(optional_fields[: rng.randint(0, min(10, len(optional_fields)))],
                   key=lambda f: rank(*f))
    level: dict[tuple[int, int], int] = {t: min(pos + 1, 3) for pos, t in enumerate(ruled)}

    binder_counter = [0]

    def fresh_binder() -> str:
        binder_counter[0] += 1
        return f"b{binder_counter[0]}"

    def money_lit() -> str:
        return f"{rng.randint(0, 999)}.{rng.randint(0, 99):02d}"

    def readable(i: int, j: int, target_level: int) -> bool:
        if (i, j) in input_fields or (i, j) not in level:
            return True
        return level[(i, j)] < target_level

    def self_refs(i: int, j: int, target_level: int) -> list[str]:
        return [
            f"self.m{g}"
            for g in range(j)
            if g < fields_per_type[i] and readable(i, g, target_level)
        ]

    def parent_refs(i: int, j: int, target_level: int) -> list[str]:
        if i == 0:
            return []
        return [
            f"self.parent.m{g}"
            for g in range(min(j + 1, fields_per_type[i - 1]))
            if readable(i - 1, g, target_level)
        ]

    def unruled_agg_targets(j: int) -> list[tuple[int, int]]:
        return [
            (a, g)
            for (a, g) in all_fields
            if g < j and (a, g) not in level
        ]

    def any_ref(i: int, j: int, target_level: int) -> str | None:
        refs = self_refs(i, j, target_level) + parent_refs(i, j, target_level)
        return rng.choice(refs) if refs else None

    def bool_cond(i: int, j: int, target_level: int, binder: str | None, a: int | None) -> str:
        options = ["year"]
        if binder is not None and a is not None:
            readable_b = [g for g in range(fields_per_type[a]) if readable(a, g, target_level)]
            if readable_b:
                options.append("bfield")
        ref = any_ref(i, j, target_level)
        if ref is not None:
            options.append("cmp")
        pick = rng.choice(options)
        if pick == "year":
            anchor = f"{binder}.year" if binder and rng.random() < 0.5 else "self.year"
            return f"{anchor} == {rng.randint(2020, 2023)}"
        if pick == "bfield":
            g = rng.choice(readable_b)
            op = rng.choice(["<", "<=", ">", ">=", "==", "!="])
            return f"{binder}.m{g} {op} {money_lit()}"
        op = rng.choice(["<", "<=", ">", ">="])
        return f"{ref} {op} {money_lit()}"

    def sum_agg(i: int, j: int, target_level: int) -> str | None:
        targets = unruled_agg_targets(j)
        if not targets:
            return None
        a, g = rng.choice(targets)
        binder = fresh_binder()
        where = ""
        if rng.random() < 0.6:
            where = f" where {bool_cond(i, j, target_level, binder, a)}"
        return f"sum(all {types[a]} {binder}{where} select {binder}.m{g})"

    def count_agg(i: int, j: int, target_level: int) -> str:
        a = rng.randrange(n_types)
        binder = fresh_binder()
        where = ""
        if rng.random() < 0.5:
            where = f" where {binder}.year == {rng.randint(2020, 2023)}"
        return f"count(all {types[a]} {binder}{where})"

    def money_expr(depth: int, i: int, j: int, target_level: int) -> str:
        leaf_options = ["lit", "ref"]
        options = list(leaf_options)
        if depth > 0:
            options += ["add", "sub", "mulint", "mulpct", "divint", "if", "sum", "mulcount"]
        pick = rng.choice(options)
        ref = any_ref(i, j, target_level)
        if pick == "ref" and ref is not None:
            return ref
        if pick in ("add", "sub"):
            op = "+" if pick == "add" else "-"
            lhs = money_expr(depth - 1, i, j, target_level)
            rhs = money_expr(depth - 1, i, j, target_level)
            return f"({lhs} {op} {rhs})"
        if pick == "mulint" and ref is not None:
            return f"({ref} * {rng.randint(2, 5)})"
        if pick == "mulpct" and ref is not None:
            return f"({ref} * {rng.randint(1, 99)}%)"
        if pick == "divint" and ref is not None:
            return f"({ref} / {rng.randint(2, 5)})"
        if pick == "if":
            cond = bool_cond(i, j, target_level, None, None)
            then_branch = money_expr(depth - 1, i, j, target_level)
            else_branch = money_expr(depth - 1, i, j, target_level)
            return f"(if {cond} then {then_branch} else {else_branch})"
        if pick == "sum":
            agg = sum_agg(i, j, target_level)
            if agg is not None:
                return agg
        if pick == "mulcount" and ref is not None:
            return f"({ref} * {count_agg(i, j, target_level)})"
        return money_lit()

    # --- ruleset text ----------------------------------------------------

    lines: list[str] = []
    for i, t in enumerate(types):
        lines.append(f"record {t} {{")
        lines.append("  year: input int")
        if i > 0:
            lines.append(f"  parent: input key {types[i - 1]}")
        for j in range(fields_per_type[i]):
            sort = "input" if (i, j) in input_fields else "optional"
            lines.append(f"  m{j}: {sort} money")
        lines.append("}")
    for (i, j) in ruled:
        body = money_expr(2, i, j, level[(i, j)])
        lines.append(f"rule {types[i]}.m{j} = {body}")
    ruleset_text = "\n".join(lines) + "\n"

    # --- dataset text ------------------------------------------------------

    budget = rng.randint(n_types, 20)
    counts = [1] * n_types
    for _ in range(budget - n_types):
        counts[rng.randrange(n_types)] += 1

    key_counter = [0]

    def fresh_key() -> str:
        key_counter[0] += 1
        if rng.random() < 0.15:
            return f"#{key_counter[0]}"
        return f"r{key_counter[0]}"

    keys_by_type: list[list[str]] = [[] for _ in range(n_types)]
    members: list[str] = []
    for i in range(n_types):
        for _ in range(counts[i]):
            name = fresh_key()
            keys_by_type[i].append(name)
            parts = [f'    "type": "{types[i]}"', f'    "year": {rng.randint(2020, 2023)}']
            if i > 0:
                parent = rng.choice(keys_by_type[i - 1])
                parts.append(f'    "parent": "{parent}"')
            for j in range(fields_per_type[i]):
                if (i, j) in input_fields:
                    present = True
                elif (i, j) in level:
                    present = rng.random() < 0.2
                else:
                    present = rng.random() < 0.75
                if present:
                    parts.append(f'    "m{j}": {money_lit()}')
            members.append(f'  "{name}": {{\n' + ",\n".join(parts) + "\n  }")
    dataset_text = "{\n" + ",\n".join(members) + "\n}\n"

    # --- queries -----------------------------------------------------------

    queries: list[tuple[str, str, str]] = []
    for (i, j) in optional_fields:
        for name in keys_by_type[i]:
            queries.append((types[i], name, f"m{j}"))
    rng.shuffle(queries)
    queries = queries[:25]
    return GenInstance(seed, ruleset_text, dataset_text, tuple(queries))
