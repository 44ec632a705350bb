"""Lexer and recursive-descent parser for .regula rule files.

    ruleset    := decl*
    decl       := enumDecl | recordDecl | ruleDecl
    enumDecl   := "enum" UIdent "{" UIdent ("," UIdent)* "}"
    recordDecl := "record" UIdent "{" (LIdent ":" ("input"|"optional") type)* "}"
    type       := "int" | "bool" | "text" | "money" | "percent"
                | "enum" UIdent | "key" UIdent
    ruleDecl   := "rule" UIdent "." LIdent "=" ("none" | expr)
    expr       := "if" expr "then" expr "else" expr | orE
    orE        := andE ("or" andE)*
    andE       := cmpE ("and" cmpE)*
    cmpE       := addE (("=="|"!="|"<"|"<="|">"|">=") addE)?
    addE       := mulE (("+"|"-") mulE)*
    mulE       := unary (("*"|"/") unary)*
    unary      := "-" unary | postfix
    postfix    := primary ("." LIdent)*
    primary    := "self" | LIdent | literal | UIdent "::" UIdent | agg
                | "(" expr ")"
    agg        := ("sum"|"min"|"max"|"any"|"all")
                  "(" "all" UIdent LIdent ("where" expr)? "select" expr ")"
                | "count" "(" "all" UIdent LIdent ("where" expr)? ")"
    literal    := DecimalNumber "%"? | "true" | "false" | StringLit

Comments run from "--" to end of line. On a syntax error the parser skips
to the next declaration keyword, so one pass reports every bad declaration.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..diagnostics import Diagnostic, DiagnosticError, SourceSpan
from ..schema import (
    BOOL,
    INT,
    MONEY,
    PERCENT,
    TEXT,
    FactSort,
    FieldDef,
    Schema,
    EnumDef,
    RecordDef,
    ValueType,
    enum_type,
    key_type,
)
from .ast import (
    AGG_ALL,
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

KEYWORDS = frozenset(
    [
        "enum", "record", "rule", "input", "optional",
        "int", "bool", "text", "money", "percent", "key", "none",
        "if", "then", "else", "or", "and", "self",
        "sum", "min", "max", "any", "all", "count", "where", "select",
        "true", "false",
    ]
)

_PUNCT = ("::", "==", "!=", "<=", ">=", "{", "}", "(", ")", ",", ":", ".",
          "<", ">", "=", "+", "-", "*", "/", "%")

DECL_KEYWORDS = ("enum", "record", "rule")


@dataclass(frozen=True)
class Token:
    kind: str  # "uident" | "lident" | "number" | "string" | "eof" | keyword | punct
    text: str
    span: SourceSpan


class ParseError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic
        super().__init__(str(diagnostic))


def tokenize(source: str, filename: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    problems: list[Diagnostic] = []
    line, col = 1, 1
    i, n = 0, len(source)

    def span(l0: int, c0: int, l1: int, c1: int) -> SourceSpan:
        return SourceSpan(filename, l0, c0, l1, c1)

    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("--", i):
            while i < n and source[i] != "\n":
                i += 1
                col += 1
            continue
        l0, c0 = line, col
        if ch.isalpha():
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            col += j - i
            sp = span(l0, c0, line, col)
            if word in KEYWORDS:
                tokens.append(Token(word, word, sp))
            elif word[0].isupper():
                tokens.append(Token("uident", word, sp))
            else:
                tokens.append(Token("lident", word, sp))
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            word = source[i:j]
            col += j - i
            tokens.append(Token("number", word, span(l0, c0, line, col)))
            i = j
            continue
        if ch == '"':
            j = i + 1
            out: list[str] = []
            closed = False
            while j < n and source[j] != "\n":
                c = source[j]
                if c == "\\" and j + 1 < n:
                    esc = source[j + 1]
                    mapped = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}.get(esc)
                    if mapped is None:
                        problems.append(
                            Diagnostic(
                                "SyntaxError",
                                f"unknown escape \\{esc}",
                                span(line, col + (j - i), line, col + (j - i) + 2),
                            )
                        )
                        mapped = esc
                    out.append(mapped)
                    j += 2
                    continue
                if c == '"':
                    closed = True
                    j += 1
                    break
                out.append(c)
                j += 1
            col += j - i
            sp = span(l0, c0, line, col)
            if not closed:
                problems.append(Diagnostic("SyntaxError", "unterminated string literal", sp))
            else:
                tokens.append(Token("string", "".join(out), sp))
            i = j
            continue
        for p in _PUNCT:
            if source.startswith(p, i):
                col += len(p)
                tokens.append(Token(p, p, span(l0, c0, line, col)))
                i += len(p)
                break
        else:
            problems.append(
                Diagnostic("SyntaxError", f"unexpected character {ch!r}", span(l0, c0, line, col + 1))
            )
            i += 1
            col += 1
    tokens.append(Token("eof", "", span(line, col, line, col)))
    return tokens, problems


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, kind: str) -> bool:
        return self.peek().kind == kind

    def accept(self, kind: str) -> Token | None:
        if self.at(kind):
            return self.advance()
        return None

    def expect(self, kind: str, what: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            expected = what or f'"{kind}"'
            found = tok.text or tok.kind
            raise ParseError(
                Diagnostic("SyntaxError", f"expected {expected}, found {found!r}", tok.span)
            )
        return self.advance()

    def expect_field_name(self) -> Token:
        # "key" is a keyword but is readable as the implicit key pseudo-field.
        if self.at("key"):
            return self.advance()
        return self.expect("lident", "a field name")

    # --- declarations ---------------------------------------------------

    def parse_ruleset(self) -> tuple[list[Decl], list[Diagnostic]]:
        decls: list[Decl] = []
        problems: list[Diagnostic] = []
        while not self.at("eof"):
            try:
                decls.append(self.parse_decl())
            except ParseError as exc:
                problems.append(exc.diagnostic)
                self.skip_to_decl()
        return decls, problems

    def skip_to_decl(self) -> None:
        # Never stall: consume at least one token, then sync on a decl keyword.
        if not self.at("eof"):
            self.advance()
        while not self.at("eof") and self.peek().kind not in DECL_KEYWORDS:
            self.advance()

    def parse_decl(self) -> Decl:
        tok = self.peek()
        if tok.kind == "enum":
            return self.parse_enum_decl()
        if tok.kind == "record":
            return self.parse_record_decl()
        if tok.kind == "rule":
            return self.parse_rule_decl()
        found = tok.text or tok.kind
        raise ParseError(
            Diagnostic("SyntaxError", f"expected a declaration, found {found!r}", tok.span)
        )

    def parse_enum_decl(self) -> EnumDecl:
        start = self.expect("enum")
        name = self.expect("uident", "an enum name")
        self.expect("{")
        members = [self.expect("uident", "an enum member").text]
        while self.accept(","):
            members.append(self.expect("uident", "an enum member").text)
        end = self.expect("}")
        return EnumDecl(name.text, tuple(members), start.span.merge(end.span))

    def parse_record_decl(self) -> RecordDecl:
        start = self.expect("record")
        name = self.expect("uident", "a record type name")
        self.expect("{")
        fields: list[FieldDef] = []
        while self.at("lident") or self.at("key"):
            fname = self.advance()
            self.expect(":")
            if self.accept("input"):
                sort = FactSort.INPUT
            elif self.accept("optional"):
                sort = FactSort.OPTIONAL
            else:
                tok = self.peek()
                raise ParseError(
                    Diagnostic(
                        "SyntaxError",
                        f'expected "input" or "optional", found {tok.text!r}',
                        tok.span,
                    )
                )
            vt, vt_end = self.parse_type()
            fields.append(FieldDef(fname.text, sort, vt, fname.span.merge(vt_end)))
        end = self.expect("}")
        return RecordDecl(name.text, tuple(fields), start.span.merge(end.span))

    def parse_type(self) -> tuple[ValueType, SourceSpan]:
        tok = self.peek()
        simple = {"int": INT, "bool": BOOL, "text": TEXT, "money": MONEY, "percent": PERCENT}
        if tok.kind in simple:
            self.advance()
            return simple[tok.kind], tok.span
        if tok.kind == "enum":
            self.advance()
            name = self.expect("uident", "an enum name")
            return enum_type(name.text), name.span
        if tok.kind == "key":
            self.advance()
            name = self.expect("uident", "a record type name")
            return key_type(name.text), name.span
        found = tok.text or tok.kind
        raise ParseError(Diagnostic("SyntaxError", f"expected a type, found {found!r}", tok.span))

    def parse_rule_decl(self) -> RuleDecl:
        start = self.expect("rule")
        record = self.expect("uident", "a record type name")
        self.expect(".")
        fname = self.expect_field_name()
        self.expect("=")
        if self.at("none"):
            end = self.advance()
            return RuleDecl(record.text, fname.text, None, start.span.merge(end.span))
        body = self.parse_expr()
        return RuleDecl(record.text, fname.text, body, start.span.merge(body.span))

    # --- expressions ----------------------------------------------------

    def parse_expr(self) -> Expr:
        if self.at("if"):
            start = self.advance()
            cond = self.parse_expr()
            self.expect("then")
            then_branch = self.parse_expr()
            self.expect("else")
            else_branch = self.parse_expr()
            return IfThenElse(cond, then_branch, else_branch, start.span.merge(else_branch.span))
        return self.parse_or()

    def parse_or(self) -> Expr:
        left = self.parse_and()
        while self.at("or"):
            self.advance()
            right = self.parse_and()
            left = BinOp("or", left, right, left.span.merge(right.span))
        return left

    def parse_and(self) -> Expr:
        left = self.parse_cmp()
        while self.at("and"):
            self.advance()
            right = self.parse_cmp()
            left = BinOp("and", left, right, left.span.merge(right.span))
        return left

    def parse_cmp(self) -> Expr:
        left = self.parse_add()
        tok = self.peek()
        if tok.kind in ("==", "!=", "<", "<=", ">", ">="):
            self.advance()
            right = self.parse_add()
            return BinOp(tok.kind, left, right, left.span.merge(right.span))
        return left

    def parse_add(self) -> Expr:
        left = self.parse_mul()
        while self.peek().kind in ("+", "-"):
            op = self.advance()
            right = self.parse_mul()
            left = BinOp(op.kind, left, right, left.span.merge(right.span))
        return left

    def parse_mul(self) -> Expr:
        left = self.parse_unary()
        while self.peek().kind in ("*", "/"):
            op = self.advance()
            right = self.parse_unary()
            left = BinOp(op.kind, left, right, left.span.merge(right.span))
        return left

    def parse_unary(self) -> Expr:
        if self.at("-"):
            start = self.advance()
            operand = self.parse_unary()
            return Neg(operand, start.span.merge(operand.span))
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        expr = self.parse_primary()
        while self.at("."):
            self.advance()
            fname = self.expect_field_name()
            expr = FieldAccess(expr, fname.text, expr.span.merge(fname.span))
        return expr

    def parse_primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "self":
            self.advance()
            return SelfRef(tok.span)
        if tok.kind == "lident":
            self.advance()
            return Var(tok.text, tok.span)
        if tok.kind == "number":
            self.advance()
            if self.at("%"):
                end = self.advance()
                return Literal("percent", tok.text, tok.span.merge(end.span))
            kind = "decimal" if "." in tok.text else "int"
            return Literal(kind, tok.text, tok.span)
        if tok.kind == "true" or tok.kind == "false":
            self.advance()
            return Literal("bool", tok.kind, tok.span)
        if tok.kind == "string":
            self.advance()
            return Literal("text", tok.text, tok.span)
        if tok.kind == "uident":
            self.advance()
            self.expect("::")
            member = self.expect("uident", "an enum member")
            return EnumLit(tok.text, member.text, tok.span.merge(member.span))
        if tok.kind in AGG_ALL:
            return self.parse_aggregate()
        if tok.kind == "(":
            self.advance()
            expr = self.parse_expr()
            self.expect(")")
            return expr
        found = tok.text or tok.kind
        raise ParseError(
            Diagnostic("SyntaxError", f"expected an expression, found {found!r}", tok.span)
        )

    def parse_aggregate(self) -> Expr:
        head = self.advance()
        self.expect("(")
        self.expect("all")
        record = self.expect("uident", "a record type name")
        binder = self.expect("lident", "a binder name")
        where = None
        if self.accept("where"):
            where = self.parse_expr()
        select = None
        if head.kind != "count":
            self.expect("select")
            select = self.parse_expr()
        end = self.expect(")")
        return Aggregate(
            head.kind, record.text, binder.text, where, select, head.span.merge(end.span)
        )


def parse_source(source: str, filename: str = "<input>") -> tuple[list[Decl], list[Diagnostic]]:
    """Parse one file into declarations plus every syntax diagnostic found."""
    tokens, problems = tokenize(source, filename)
    parser = _Parser(tokens)
    decls, parse_problems = parser.parse_ruleset()
    return decls, problems + parse_problems


def assemble_schema(decls: list[Decl]) -> Schema:
    """Collect enum/record declarations into a Schema (not yet validated)."""
    records = tuple(
        RecordDef(d.name, d.fields, d.span) for d in decls if isinstance(d, RecordDecl)
    )
    enums = tuple(EnumDef(d.name, d.members, d.span) for d in decls if isinstance(d, EnumDecl))
    return Schema(records=records, enums=enums)


def parse_ruleset(source: str, filename: str = "<input>") -> tuple[Schema, list[RuleDecl]]:
    """Parse a single source text; raises DiagnosticError with all syntax errors."""
    decls, problems = parse_source(source, filename)
    if problems:
        raise DiagnosticError(problems)
    rules = [d for d in decls if isinstance(d, RuleDecl)]
    return assemble_schema(decls), rules
