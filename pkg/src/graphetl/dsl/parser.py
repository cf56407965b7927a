"""Parser for the conversion-schema DSL.

The grammar is line-oriented: indentation-delimited blocks (spaces only,
multiples of a detected unit), one declaration per line, declarations end
with a colon. An ENTITY block holds NODE and RELATIONSHIP templates;
template bodies hold ``+``/``-`` attribute lines. ``#`` starts a comment
outside string literals.

One tolerance: the final closing parenthesis of a declaration head may be
elided immediately before the colon, e.g. ``RELATIONSHIP(a, "T", b:``.
All other imbalances are errors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import SchemaSyntaxError
from .ast import (
    AttributeSpec,
    AttrRef,
    ConversionPlan,
    EntityPlan,
    IdentifierRef,
    Literal,
    MatchSpec,
    NodeRef,
    NodeTemplate,
    RelationshipTemplate,
    ValueExpr,
    WrapperCall,
)

_KEYWORDS = ("ENTITY", "NODE", "RELATIONSHIP", "MATCH")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUM_RE = re.compile(r"\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")
_PUNCT = "(),=:.+-"


@dataclass
class _Token:
    kind: str  # name | string | int | float | punct
    value: object
    col: int


@dataclass
class _Line:
    indent: int
    tokens: list[_Token]
    lineno: int


def _scan_line(raw: str, lineno: int) -> _Line | None:
    """Tokenize one physical line; None when blank or comment-only."""
    indent = 0
    for ch in raw:
        if ch == " ":
            indent += 1
        elif ch == "\t":
            raise SchemaSyntaxError("tab character in indentation", lineno, indent + 1)
        else:
            break
    tokens: list[_Token] = []
    i = indent
    n = len(raw)
    while i < n:
        ch = raw[i]
        col = i + 1
        if ch in " \r\n":
            i += 1
        elif ch == "#":
            break
        elif ch == '"':
            buf = []
            j = i + 1
            while True:
                if j >= n or raw[j] in "\r\n":
                    raise SchemaSyntaxError("unterminated string literal", lineno, col)
                c = raw[j]
                if c == "\\":
                    if j + 1 >= n or raw[j + 1] not in ('"', "\\"):
                        raise SchemaSyntaxError(
                            "unknown escape in string literal", lineno, j + 2
                        )
                    buf.append(raw[j + 1])
                    j += 2
                elif c == '"':
                    break
                else:
                    buf.append(c)
                    j += 1
            tokens.append(_Token("string", "".join(buf), col))
            i = j + 1
        elif ch.isdigit():
            m = _NUM_RE.match(raw, i)
            assert m is not None
            text = m.group()
            if "." in text or "e" in text or "E" in text:
                tokens.append(_Token("float", float(text), col))
            else:
                tokens.append(_Token("int", int(text), col))
            i = m.end()
        elif _NAME_RE.match(raw, i):
            m = _NAME_RE.match(raw, i)
            assert m is not None
            tokens.append(_Token("name", m.group(), col))
            i = m.end()
        elif ch in _PUNCT:
            tokens.append(_Token("punct", ch, col))
            i += 1
        else:
            raise SchemaSyntaxError(f"unexpected character {ch!r}", lineno, col)
    if not tokens:
        return None
    return _Line(indent, tokens, lineno)


class _Cursor:
    """Token stream over one logical line."""

    def __init__(self, line: _Line):
        self.tokens = line.tokens
        self.lineno = line.lineno
        self.pos = 0

    @property
    def _end_col(self) -> int:
        last = self.tokens[-1]
        width = len(str(last.value)) if last.kind != "string" else len(str(last.value)) + 2
        return last.col + width

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def at_punct(self, ch: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "punct" and tok.value == ch

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            raise SchemaSyntaxError("unexpected end of line", self.lineno, self._end_col)
        self.pos += 1
        return tok

    def expect_punct(self, ch: str, what: str | None = None) -> _Token:
        tok = self.peek()
        if tok is None or tok.kind != "punct" or tok.value != ch:
            found = "end of line" if tok is None else repr(str(tok.value))
            col = self._end_col if tok is None else tok.col
            msg = what or f"expected {ch!r}, found {found}"
            raise SchemaSyntaxError(msg, self.lineno, col)
        self.pos += 1
        return tok

    def expect_name(self, what: str = "expected a name") -> _Token:
        tok = self.peek()
        if tok is None or tok.kind != "name":
            col = self._end_col if tok is None else tok.col
            raise SchemaSyntaxError(what, self.lineno, col)
        self.pos += 1
        return tok

    def expect_end(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise SchemaSyntaxError(
                f"unexpected trailing {str(tok.value)!r}", self.lineno, tok.col
            )

    def error(self, message: str) -> SchemaSyntaxError:
        tok = self.peek()
        col = self._end_col if tok is None else tok.col
        return SchemaSyntaxError(message, self.lineno, col)


def _parse_expr(cur: _Cursor) -> ValueExpr:
    tok = cur.peek()
    if tok is None:
        raise cur.error("expected a value expression")
    if tok.kind == "string":
        cur.next()
        return Literal(tok.value)
    if tok.kind in ("int", "float"):
        cur.next()
        return Literal(tok.value)
    if tok.kind == "punct" and tok.value == "-":
        cur.next()
        num = cur.peek()
        if num is None or num.kind not in ("int", "float"):
            raise cur.error("expected a number after '-'")
        cur.next()
        return Literal(-num.value)  # type: ignore[operator]
    if tok.kind == "name":
        cur.next()
        name = str(tok.value)
        if name == "true":
            return Literal(True)
        if name == "false":
            return Literal(False)
        if cur.at_punct("."):
            cur.next()
            attr = cur.expect_name("expected an attribute name after '.'")
            return AttrRef(name, str(attr.value))
        if cur.at_punct("("):
            cur.next()
            arg = _parse_expr(cur)
            cur.expect_punct(")", f"unclosed call to {name!r}: expected ')'")
            return WrapperCall(name, arg)
        raise SchemaSyntaxError(
            f"bare name {name!r}: expected '.' or '(' after it", cur.lineno, tok.col
        )
    raise cur.error(f"unexpected {str(tok.value)!r} in value expression")


def parse_value_expr(text: str) -> ValueExpr:
    """Parse a standalone value expression (literal, dotted ref or call)."""
    line = _scan_line(text, 1)
    if line is None:
        raise SchemaSyntaxError("expected a value expression", 1, 1)
    cur = _Cursor(line)
    expr = _parse_expr(cur)
    cur.expect_end()
    return expr


def _parse_match(cur: _Cursor) -> MatchSpec:
    cur.expect_punct("(")
    labels: list[ValueExpr] = []
    conditions: list[tuple[str, ValueExpr]] = []
    while True:
        tok = cur.peek()
        if tok is None:
            raise cur.error("unbalanced parentheses: MATCH clause is not closed")
        is_condition = (
            tok.kind == "name"
            and cur.pos + 1 < len(cur.tokens)
            and cur.tokens[cur.pos + 1].kind == "punct"
            and cur.tokens[cur.pos + 1].value == "="
        )
        if is_condition:
            key = str(cur.next().value)
            cur.next()  # '='
            conditions.append((key, _parse_expr(cur)))
        else:
            if conditions:
                raise cur.error("labels must precede attribute equalities in MATCH")
            labels.append(_parse_expr(cur))
        if cur.at_punct(","):
            cur.next()
            continue
        cur.expect_punct(")", "unbalanced parentheses: MATCH clause is not closed")
        break
    if not labels:
        raise cur.error("MATCH needs at least one label")
    return MatchSpec(tuple(labels), tuple(conditions))


def _parse_node_ref(cur: _Cursor) -> NodeRef:
    tok = cur.peek()
    if tok is not None and tok.kind == "name":
        follows_call = (
            cur.pos + 1 < len(cur.tokens)
            and cur.tokens[cur.pos + 1].kind == "punct"
            and cur.tokens[cur.pos + 1].value in "(."
        )
        if tok.value == "MATCH" and follows_call:
            cur.next()
            return _parse_match(cur)
        if not follows_call:
            cur.next()
            return IdentifierRef(str(tok.value))
    raise cur.error("expected a node identifier or MATCH(...) clause")


@dataclass
class _Decl:
    kind: str  # node | relationship
    wrappers: tuple[str, ...]
    labels: tuple[ValueExpr, ...] = ()
    source: NodeRef | None = None
    rel_type: ValueExpr | None = None
    target: NodeRef | None = None
    identifier: str | None = None
    lineno: int = 0


def _close_decl_head(cur: _Cursor, open_groups: int) -> None:
    """Consume ``open_groups`` closing parens; the colon may elide them."""
    while open_groups:
        if cur.at_punct(":"):
            return  # elided final paren(s) before the colon
        cur.expect_punct(")", "unbalanced parentheses: declaration is not closed")
        open_groups -= 1


def _parse_declaration(line: _Line) -> _Decl:
    cur = _Cursor(line)
    wrappers: list[str] = []
    while True:
        tok = cur.peek()
        if tok is None or tok.kind != "name":
            raise cur.error("expected a NODE or RELATIONSHIP declaration")
        name = str(tok.value)
        if name in ("NODE", "RELATIONSHIP"):
            cur.next()
            break
        if name in ("ENTITY", "MATCH"):
            raise SchemaSyntaxError(
                f"unexpected keyword {name!r} at element position", line.lineno, tok.col
            )
        cur.next()
        cur.expect_punct("(", f"expected '(' after wrapper name {name!r}")
        wrappers.append(name)
        if len(wrappers) > 32:
            raise cur.error("wrapper nesting too deep")

    decl = _Decl(kind=name.lower(), wrappers=tuple(wrappers), lineno=line.lineno)
    cur.expect_punct("(", f"expected '(' after {name}")
    if name == "NODE":
        labels = [_parse_expr(cur)]
        while cur.at_punct(","):
            cur.next()
            labels.append(_parse_expr(cur))
        decl.labels = tuple(labels)
    else:
        decl.source = _parse_node_ref(cur)
        cur.expect_punct(",", "RELATIONSHIP needs source, type and target")
        decl.rel_type = _parse_expr(cur)
        cur.expect_punct(",", "RELATIONSHIP needs source, type and target")
        decl.target = _parse_node_ref(cur)
    _close_decl_head(cur, 1 + len(wrappers))

    tok = cur.peek()
    if tok is not None and tok.kind == "name":
        if decl.kind == "relationship":
            raise SchemaSyntaxError(
                "relationship declarations cannot take an identifier",
                line.lineno,
                tok.col,
            )
        cur.next()
        decl.identifier = str(tok.value)
    cur.expect_punct(":", "missing ':' at end of declaration")
    cur.expect_end()
    return decl


def _parse_attribute(line: _Line) -> AttributeSpec:
    cur = _Cursor(line)
    tok = cur.peek()
    if tok is None or tok.kind != "punct" or tok.value not in "+-":
        raise SchemaSyntaxError(
            "attribute line must start with '+' (primary) or '-'",
            line.lineno,
            tok.col if tok else 1,
        )
    cur.next()
    primary = tok.value == "+"
    key = cur.expect_name("expected an attribute name")
    cur.expect_punct("=", "expected '=' after attribute name")
    expr = _parse_expr(cur)
    cur.expect_end()
    return AttributeSpec(str(key.value), expr, primary, line=line.lineno)


class _BlockChecker:
    """Per-entity semantic checks: identifiers, prefixes, primaries."""

    def __init__(self, entity_name: str):
        self.entity_name = entity_name
        self.identifiers: dict[str, int] = {}

    def declare(self, identifier: str | None, lineno: int) -> None:
        if identifier is None:
            return
        if identifier in self.identifiers:
            raise SchemaSyntaxError(
                f"duplicate identifier {identifier!r} in ENTITY block", lineno, 1
            )
        self.identifiers[identifier] = lineno

    def check_prefixes(self, expr: ValueExpr, lineno: int) -> None:
        if isinstance(expr, AttrRef):
            if expr.prefix != self.entity_name and expr.prefix not in self.identifiers:
                raise SchemaSyntaxError(
                    f"unknown attribute prefix {expr.prefix!r} "
                    f"(not the entity name or a node identifier)",
                    lineno,
                    1,
                )
        elif isinstance(expr, WrapperCall):
            self.check_prefixes(expr.arg, lineno)

    def check_ref(self, ref: NodeRef, lineno: int) -> None:
        if isinstance(ref, IdentifierRef):
            if ref.name not in self.identifiers:
                raise SchemaSyntaxError(
                    f"unknown node identifier {ref.name!r}", lineno, 1
                )
        else:
            for expr in ref.labels:
                self.check_prefixes(expr, lineno)
            for _, expr in ref.conditions:
                self.check_prefixes(expr, lineno)


def _check_single_primary(attrs: list[AttributeSpec]) -> None:
    seen = False
    for spec in attrs:
        if spec.primary:
            if seen:
                raise SchemaSyntaxError(
                    "template already has a primary attribute", spec.line, 1
                )
            seen = True


def parse_schema(text: str) -> ConversionPlan:
    """Compile schema text into an (unlinked) conversion plan.

    Wrapper names are recorded but not resolved; use ``link_plan`` with a
    registry to obtain an executable plan.
    """
    lines: list[_Line] = []
    # physical lines are '\n'-separated; splitlines() would also split on
    # form feeds and unicode separators inside string literals
    for lineno, raw in enumerate(text.split("\n"), start=1):
        if raw.endswith("\r"):
            raw = raw[:-1]
        line = _scan_line(raw, lineno)
        if line is not None:
            lines.append(line)

    unit = 0
    for line in lines:
        if line.indent:
            if not unit:
                unit = line.indent
            if line.indent % unit:
                raise SchemaSyntaxError(
                    f"indentation is not a multiple of {unit} spaces",
                    line.lineno,
                    line.indent + 1,
                )

    entities: dict[str, EntityPlan] = {}
    pos = 0
    while pos < len(lines):
        header = lines[pos]
        if header.indent != 0:
            raise SchemaSyntaxError(
                "unexpected indentation: expected an ENTITY block",
                header.lineno,
                header.indent + 1,
            )
        cur = _Cursor(header)
        kw = cur.expect_name("expected ENTITY")
        if kw.value != "ENTITY":
            raise SchemaSyntaxError(
                f"unknown keyword {str(kw.value)!r}: expected ENTITY", header.lineno, kw.col
            )
        cur.expect_punct("(", "expected '(' after ENTITY")
        name_tok = cur.peek()
        if name_tok is None or name_tok.kind != "string":
            raise cur.error("ENTITY needs a quoted resource type name")
        cur.next()
        entity_name = str(name_tok.value)
        _close_decl_head(cur, 1)
        cur.expect_punct(":", "missing ':' at end of ENTITY declaration")
        cur.expect_end()
        if entity_name in entities:
            raise SchemaSyntaxError(
                f"duplicate ENTITY block for {entity_name!r}", header.lineno, 1
            )
        pos += 1
        block: list[_Line] = []
        while pos < len(lines) and lines[pos].indent > 0:
            block.append(lines[pos])
            pos += 1
        entities[entity_name] = _parse_entity_block(entity_name, block)
    return ConversionPlan(entities)


def _parse_entity_block(entity_name: str, block: list[_Line]) -> EntityPlan:
    nodes: list[NodeTemplate] = []
    rels: list[RelationshipTemplate] = []
    checker = _BlockChecker(entity_name)
    parsed: list[tuple[_Decl, list[AttributeSpec]]] = []

    if block:
        template_indent = block[0].indent
        i = 0
        while i < len(block):
            line = block[i]
            if line.indent != template_indent:
                raise SchemaSyntaxError(
                    "inconsistent indentation for declaration",
                    line.lineno,
                    line.indent + 1,
                )
            decl = _parse_declaration(line)
            i += 1
            attrs: list[AttributeSpec] = []
            attr_indent = None
            while i < len(block) and block[i].indent > template_indent:
                attr_line = block[i]
                if attr_indent is None:
                    attr_indent = attr_line.indent
                elif attr_line.indent != attr_indent:
                    raise SchemaSyntaxError(
                        "inconsistent indentation for attribute line",
                        attr_line.lineno,
                        attr_line.indent + 1,
                    )
                attrs.append(_parse_attribute(attr_line))
                i += 1
            _check_single_primary(attrs)
            checker.declare(decl.identifier, decl.lineno)
            parsed.append((decl, attrs))

    for index, (decl, attrs) in enumerate(parsed):
        for spec in attrs:
            checker.check_prefixes(spec.value, spec.line)
        if decl.kind == "node":
            for expr in decl.labels:
                checker.check_prefixes(expr, decl.lineno)
            nodes.append(
                NodeTemplate(
                    labels=decl.labels,
                    identifier=decl.identifier,
                    attributes=tuple(attrs),
                    subgraph_wrappers=decl.wrappers,
                    template_index=index,
                    line=decl.lineno,
                )
            )
        else:
            assert decl.source is not None and decl.rel_type is not None
            assert decl.target is not None
            checker.check_ref(decl.source, decl.lineno)
            checker.check_ref(decl.target, decl.lineno)
            checker.check_prefixes(decl.rel_type, decl.lineno)
            rels.append(
                RelationshipTemplate(
                    source=decl.source,
                    rel_type=decl.rel_type,
                    target=decl.target,
                    attributes=tuple(attrs),
                    subgraph_wrappers=decl.wrappers,
                    template_index=index,
                    line=decl.lineno,
                )
            )
    return EntityPlan(tuple(nodes), tuple(rels))
