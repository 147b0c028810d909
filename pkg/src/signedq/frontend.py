"""Parser for ``.cqn`` query files.

A file holds optional directives followed by a single rule::

    @semiring counting
    @default V = 1
    Q(x1, x2) :- A(x1, x2, x3), U(x3, x4), !V(x4).

``!`` negates an atom.  Lines starting with ``#`` or ``%`` are comments.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property

from .errors import (
    DuplicateAtom,
    QueryError,
    QuerySyntaxError,
    UnknownVariableInHead,
    UnsafeQuery,
)
from .hypergraph import Edge, SignedHypergraph

IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_COMMENT = re.compile(r"[#%]")
_TOKEN = re.compile(r"\s*(?:(:-)|([A-Za-z_][A-Za-z0-9_]*)|([(),.!]))")


@dataclass(frozen=True)
class Literal:
    name: str
    args: tuple
    positive: bool = True

    def pretty(self) -> str:
        return ("" if self.positive else "!") + f"{self.name}({', '.join(self.args)})"


@dataclass(frozen=True)
class Query:
    head_name: str
    head_vars: tuple
    body: tuple
    semiring: str | None = None
    defaults: tuple = ()
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        if len(set(self.head_vars)) != len(self.head_vars):
            raise QueryError(f"repeated variable in head {self.head_name}")
        seen: set = set()
        for lit in self.body:
            if lit.name in seen:
                raise DuplicateAtom(
                    f"atom {lit.name} used twice; load the data under a second name for a self-join"
                )
            seen.add(lit.name)
            if len(set(lit.args)) != len(lit.args):
                raise QueryError(f"repeated variable inside atom {lit.name}")
            if not lit.args:
                raise QueryError(f"atom {lit.name} has no arguments")
        body_vars = {v for lit in self.body for v in lit.args}
        for v in self.head_vars:
            if v not in body_vars:
                raise UnknownVariableInHead(f"head variable {v} does not occur in the body")
        guarded = {v for lit in self.body if lit.positive for v in lit.args}
        unsafe = sorted(body_vars - guarded)
        if unsafe:
            raise UnsafeQuery(f"variables {unsafe} occur in no positive atom")
        names = {lit.name for lit in self.body}
        for atom, _ in self.defaults:
            if atom not in names:
                raise QueryError(f"@default for unknown atom {atom}")

    # -- derived structure -------------------------------------------------

    @cached_property
    def variables(self) -> tuple:
        """Variables in first-occurrence order, head included."""
        order = dict.fromkeys(self.head_vars)
        for lit in self.body:
            order.update(dict.fromkeys(lit.args))
        return tuple(order)

    @cached_property
    def vertex(self) -> dict:
        return {v: i + 1 for i, v in enumerate(self.variables)}

    @property
    def free(self) -> tuple:
        return tuple(self.vertex[v] for v in self.head_vars)

    @property
    def is_full(self) -> bool:
        return set(self.head_vars) == set(self.variables)

    @property
    def semiring_name(self) -> str:
        return self.semiring or "boolean"

    @property
    def default_map(self) -> dict:
        return dict(self.defaults)

    @cached_property
    def hypergraph(self) -> SignedHypergraph:
        edges = tuple(
            Edge(i, frozenset(self.vertex[v] for v in lit.args), lit.positive, lit.name)
            for i, lit in enumerate(self.body)
        )
        return SignedHypergraph(tuple(range(1, len(self.variables) + 1)), edges)

    def literal(self, name: str) -> Literal:
        for lit in self.body:
            if lit.name == name:
                return lit
        raise KeyError(name)

    def pretty(self) -> str:
        lines = []
        if self.semiring is not None:
            lines.append(f"@semiring {self.semiring}")
        for atom, raw in self.defaults:
            lines.append(f"@default {atom} = {raw}")
        body = ", ".join(lit.pretty() for lit in self.body)
        lines.append(f"{self.head_name}({', '.join(self.head_vars)}) :- {body}.")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------


class _Lexer:
    def __init__(self, text: str, line_of: list[int], col_of: list[int]):
        self.text = text
        self.line_of = line_of
        self.col_of = col_of
        self.pos = 0

    def where(self, pos: int | None = None) -> tuple[int, int]:
        p = self.pos if pos is None else pos
        while p < len(self.text) and self.text[p].isspace():
            p += 1
        if p >= len(self.text):
            if not self.line_of:
                return 1, 1
            return self.line_of[-1], self.col_of[-1] + 1
        return self.line_of[p], self.col_of[p]

    def fail(self, message: str):
        line, col = self.where()
        raise QuerySyntaxError(message, line, col)

    def next(self) -> str | None:
        rest = self.text[self.pos:]
        if not rest.strip():
            self.pos = len(self.text)
            return None
        m = _TOKEN.match(self.text, self.pos)
        if m is None:
            self.fail(f"unexpected character {rest.strip()[0]!r}")
        self.pos = m.end()
        return m.group(1) or m.group(2) or m.group(3)

    def peek(self) -> str | None:
        save = self.pos
        tok = self.next()
        self.pos = save
        return tok

    def expect(self, tok: str) -> None:
        got = self.peek()
        if got != tok:
            self.fail(f"expected {tok!r}, found {got!r}" if got else f"expected {tok!r} before end of input")
        self.next()

    def ident(self, what: str) -> str:
        got = self.peek()
        if got is None or not IDENT.fullmatch(got):
            self.fail(f"expected {what}, found {got!r}" if got else f"expected {what} before end of input")
        self.next()
        return got


def _atom(lx: _Lexer) -> tuple[str, tuple]:
    name = lx.ident("atom name")
    lx.expect("(")
    args = []
    if lx.peek() != ")":
        args.append(lx.ident("variable"))
        while lx.peek() == ",":
            lx.next()
            args.append(lx.ident("variable"))
    lx.expect(")")
    return name, tuple(args)


def parse_query(text: str) -> Query:
    semiring = None
    defaults: list = []
    chars: list[str] = []
    line_of: list[int] = []
    col_of: list[int] = []
    rule_started = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = _COMMENT.split(line, 1)[0]
        stripped = line.strip()
        if not rule_started and not stripped:
            continue
        if not rule_started and stripped.startswith("@"):
            col = line.index("@") + 1
            parts = stripped[1:].split(None, 1)
            kind = parts[0] if parts else ""
            if kind == "semiring":
                if len(parts) < 2 or not IDENT.fullmatch(parts[1].strip()):
                    raise QuerySyntaxError("@semiring needs a name", lineno, col)
                semiring = parts[1].strip()
            elif kind == "default":
                m = re.fullmatch(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(\S.*?)\s*", parts[1] if len(parts) > 1 else "")
                if m is None:
                    raise QuerySyntaxError("expected '@default <Atom> = <value>'", lineno, col)
                defaults.append((m.group(1), m.group(2)))
            else:
                raise QuerySyntaxError(f"unknown directive @{kind}", lineno, col)
            continue
        rule_started = True
        for c, ch in enumerate(line, start=1):
            chars.append(ch)
            line_of.append(lineno)
            col_of.append(c)
        chars.append("\n")
        line_of.append(lineno)
        col_of.append(len(line) + 1)

    lx = _Lexer("".join(chars), line_of, col_of)
    if lx.peek() is None:
        raise QuerySyntaxError("missing rule", max(1, len(text.splitlines())), 1)
    head_name, head_vars = _atom(lx)
    lx.expect(":-")
    body = []
    while True:
        positive = True
        if lx.peek() == "!":
            lx.next()
            positive = False
        name, args = _atom(lx)
        body.append(Literal(name, args, positive))
        tok = lx.peek()
        if tok == ",":
            lx.next()
            continue
        lx.expect(".")
        break
    if lx.peek() is not None:
        lx.fail("unexpected text after the rule")
    return Query(head_name, head_vars, tuple(body), semiring, tuple(defaults))


def parse_file(path) -> Query:
    with open(path, encoding="utf-8") as fh:
        return parse_query(fh.read())
