"""ATLK^F formula syntax: AST, parser, canonical printer and path negation.

Grammar (whitespace-insensitive, ``#`` starts a line comment)::

    formula := iff
    iff     := impl ("<->" impl)*
    impl    := or ("->" impl)?
    or      := and ("|" and)*
    and     := unary ("&" unary)*
    unary   := "!" unary | "true" | "false" | IDENT | "(" formula ")"
             | ("EX"|"EF"|"EG"|"AX"|"AF"|"AG") unary
             | ("E"|"A") "[" formula ("U"|"W") formula "]"
             | "K" "<" IDENT ">" unary
             | ("GK"|"DK"|"CK") "<" identlist ">" unary
             | "<<" identlist ">>" pathop | "[[" identlist "]]" pathop
    pathop  := ("X"|"G"|"F") unary | "[" formula ("U"|"W") formula "]"

``F phi`` is sugar for ``[true U phi]`` and never appears in the AST.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import FormulaSyntaxError


class Formula:
    """Base class of state formulas."""

    __slots__ = ()

    def __str__(self):
        return to_text(self)


class PathForm:
    """Base class of path formulas (the argument of E, A, <<G>> and [[G]])."""

    __slots__ = ()

    def __str__(self):
        return _path_text(self)


@dataclass(frozen=True, repr=False)
class TrueConst(Formula):
    def __repr__(self):
        return "TRUE"


@dataclass(frozen=True, repr=False)
class FalseConst(Formula):
    def __repr__(self):
        return "FALSE"


TRUE = TrueConst()
FALSE = FalseConst()


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class ExistsPath(Formula):
    path: PathForm


@dataclass(frozen=True)
class ForAllPath(Formula):
    path: PathForm


@dataclass(frozen=True)
class Know(Formula):
    agent: str
    arg: Formula


@dataclass(frozen=True)
class EveryKnows(Formula):
    agents: tuple
    arg: Formula


@dataclass(frozen=True)
class DistKnows(Formula):
    agents: tuple
    arg: Formula


@dataclass(frozen=True)
class CommonKnows(Formula):
    agents: tuple
    arg: Formula


@dataclass(frozen=True)
class Exists(Formula):
    """``<<agents>> path``: the coalition can enforce ``path``."""

    agents: tuple
    path: PathForm


@dataclass(frozen=True)
class Forced(Formula):
    """``[[agents]] path``: the coalition cannot avoid ``path``."""

    agents: tuple
    path: PathForm


@dataclass(frozen=True)
class Next(PathForm):
    arg: Formula


@dataclass(frozen=True)
class Globally(PathForm):
    arg: Formula


@dataclass(frozen=True)
class Until(PathForm):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class WeakUntil(PathForm):
    left: Formula
    right: Formula


def Finally(arg):
    return Until(TRUE, arg)


Node = Union[Formula, PathForm]
KNOWLEDGE = {"GK": EveryKnows, "DK": DistKnows, "CK": CommonKnows}


def negate_path(path):
    """Rewrite ``not path`` into a path formula with negated operands.

    X is self-dual, ``not G p`` is ``[true U !p]``, and U and W are dual up
    to a swap of operands.
    """
    if isinstance(path, Next):
        return Next(Not(path.arg))
    if isinstance(path, Globally):
        return Until(TRUE, Not(path.arg))
    if isinstance(path, Until):
        a, b = Not(path.left), Not(path.right)
        return WeakUntil(b, And(a, b))
    if isinstance(path, WeakUntil):
        a, b = Not(path.left), Not(path.right)
        return Until(b, And(a, b))
    raise TypeError(f"not a path formula: {path!r}")


def path_operands(path):
    if isinstance(path, (Next, Globally)):
        return (path.arg,)
    return (path.left, path.right)


def agents_of(f):
    """All agent names mentioned in ``f``."""
    out = set()
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, Know):
            out.add(node.agent)
        elif isinstance(node, (EveryKnows, DistKnows, CommonKnows, Exists, Forced)):
            out.update(node.agents)
        for child in _children(node):
            stack.append(child)
    return out


def atoms_of(f):
    out = set()
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            out.add(node.name)
        stack.extend(_children(node))
    return out


def _children(node):
    if isinstance(node, (TrueConst, FalseConst, Atom)):
        return ()
    if isinstance(node, (Not, Know, EveryKnows, DistKnows, CommonKnows)):
        return (node.arg,)
    if isinstance(node, (And, Or, Implies, Iff)):
        return (node.left, node.right)
    if isinstance(node, (ExistsPath, ForAllPath, Exists, Forced)):
        return (node.path,)
    if isinstance(node, PathForm):
        return path_operands(node)
    raise TypeError(f"not a formula node: {node!r}")


# -- printing ---------------------------------------------------------------

_BINARY = {And: "&", Or: "|", Implies: "->", Iff: "<->"}


def to_text(f):
    """Canonical concrete syntax; ``parse_formula(to_text(f)) == f``."""
    if isinstance(f, TrueConst):
        return "true"
    if isinstance(f, FalseConst):
        return "false"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return "!" + to_text(f.arg)
    op = _BINARY.get(type(f))
    if op is not None:
        return f"({to_text(f.left)} {op} {to_text(f.right)})"
    if isinstance(f, Know):
        return f"K<{f.agent}> {to_text(f.arg)}"
    for kw, cls in KNOWLEDGE.items():
        if isinstance(f, cls):
            return f"{kw}<{','.join(f.agents)}> {to_text(f.arg)}"
    if isinstance(f, (ExistsPath, ForAllPath)):
        q = "E" if isinstance(f, ExistsPath) else "A"
        p = f.path
        if isinstance(p, Next):
            return f"{q}X {to_text(p.arg)}"
        if isinstance(p, Globally):
            return f"{q}G {to_text(p.arg)}"
        if isinstance(p, Until) and p.left == TRUE:
            return f"{q}F {to_text(p.right)}"
        return q + _path_text(p)
    if isinstance(f, Exists):
        return f"<<{','.join(f.agents)}>> {_path_text(f.path)}"
    if isinstance(f, Forced):
        return f"[[{','.join(f.agents)}]] {_path_text(f.path)}"
    raise TypeError(f"not a formula: {f!r}")


def _path_text(p):
    if isinstance(p, Next):
        return f"X {to_text(p.arg)}"
    if isinstance(p, Globally):
        return f"G {to_text(p.arg)}"
    if isinstance(p, Until):
        if p.left == TRUE:
            return f"F {to_text(p.right)}"
        return f"[{to_text(p.left)} U {to_text(p.right)}]"
    if isinstance(p, WeakUntil):
        return f"[{to_text(p.left)} W {to_text(p.right)}]"
    raise TypeError(f"not a path formula: {p!r}")


# -- lexing -----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<op><->|->|[!&|()\[\]<>,])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)

KEYWORDS = {
    "true", "false", "EX", "EF", "EG", "AX", "AF", "AG", "E", "A",
    "K", "GK", "DK", "CK", "X", "G", "F", "U", "W",
}


@dataclass(frozen=True)
class Token:
    kind: str  # "op", "kw", "ident" or "eof"
    text: str
    line: int
    column: int
    offset: int


def tokenize(text):
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        value = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "op":
            tokens.append(Token("op", value, line, pos - line_start + 1, pos))
        elif kind == "ident":
            k = "kw" if value in KEYWORDS else "ident"
            tokens.append(Token(k, value, line, pos - line_start + 1, pos))
        pos = m.end()
    tokens.append(Token("eof", "<end of input>", line, pos - line_start + 1, pos))
    return tokens


# -- parsing ----------------------------------------------------------------


class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def peek(self, k=1):
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, text):
        t = self.tok
        return t.kind in ("op", "kw") and t.text == text

    def advance(self):
        t = self.tok
        self.i += 1
        return t

    def fail(self, expected, message=None):
        t = self.tok
        raise FormulaSyntaxError(
            message or f"unexpected {t.text!r}", t.line, t.column, sorted(expected)
        )

    def expect(self, text):
        if not self.at(text):
            self.fail({text})
        return self.advance()

    def ident(self):
        if self.tok.kind != "ident":
            self.fail({"IDENT"})
        return self.advance().text

    def double(self, ch):
        # "<<", ">>", "[[" and "]]" are two adjacent single-character tokens
        t, u = self.tok, self.peek()
        return (
            t.kind == "op" and t.text == ch and u.kind == "op" and u.text == ch
            and u.offset == t.offset + 1
        )

    def parse(self):
        f = self.formula()
        if self.tok.kind != "eof":
            self.fail({"<end of input>", "<->", "->", "|", "&"})
        return f

    def formula(self):
        left = self.impl()
        while self.at("<->"):
            self.advance()
            left = Iff(left, self.impl())
        return left

    def impl(self):
        left = self.disj()
        if self.at("->"):
            self.advance()
            return Implies(left, self.impl())
        return left

    def disj(self):
        left = self.conj()
        while self.at("|"):
            self.advance()
            left = Or(left, self.conj())
        return left

    def conj(self):
        left = self.unary()
        while self.at("&"):
            self.advance()
            left = And(left, self.unary())
        return left

    UNARY_START = {
        "!", "true", "false", "IDENT", "(", "EX", "EF", "EG", "AX", "AF", "AG",
        "E", "A", "K", "GK", "DK", "CK", "<<", "[[",
    }

    def unary(self):
        t = self.tok
        if t.kind == "ident":
            self.advance()
            return Atom(t.text)
        if t.kind == "op":
            if t.text == "!":
                self.advance()
                return Not(self.unary())
            if t.text == "(":
                self.advance()
                f = self.formula()
                self.expect(")")
                return f
            if self.double("<"):
                self.i += 2
                agents = self.identlist()
                self.close_double(">")
                return Exists(agents, self.pathop())
            if self.double("["):
                self.i += 2
                agents = self.identlist()
                self.close_double("]")
                return Forced(agents, self.pathop())
            self.fail(self.UNARY_START)
        if t.kind == "kw":
            kw = t.text
            if kw == "true":
                self.advance()
                return TRUE
            if kw == "false":
                self.advance()
                return FALSE
            if kw in ("EX", "EF", "EG", "AX", "AF", "AG"):
                self.advance()
                arg = self.unary()
                path = {"X": Next, "G": Globally, "F": Finally}[kw[1]](arg)
                return ExistsPath(path) if kw[0] == "E" else ForAllPath(path)
            if kw in ("E", "A"):
                self.advance()
                path = self.bracketed()
                return ExistsPath(path) if kw == "E" else ForAllPath(path)
            if kw == "K":
                self.advance()
                self.expect("<")
                agent = self.ident()
                self.expect(">")
                return Know(agent, self.unary())
            if kw in KNOWLEDGE:
                self.advance()
                self.expect("<")
                agents = self.identlist()
                self.expect(">")
                return KNOWLEDGE[kw](agents, self.unary())
        self.fail(self.UNARY_START)

    def close_double(self, ch):
        if not self.double(ch):
            self.fail({ch * 2, ","})
        self.i += 2

    def identlist(self):
        names = [self.ident()]
        while self.at(","):
            self.advance()
            names.append(self.ident())
        return tuple(dict.fromkeys(names))

    def bracketed(self):
        self.expect("[")
        left = self.formula()
        if self.at("U"):
            self.advance()
            cls = Until
        elif self.at("W"):
            self.advance()
            cls = WeakUntil
        else:
            self.fail({"U", "W"})
        right = self.formula()
        self.expect("]")
        return cls(left, right)

    def pathop(self):
        t = self.tok
        if t.kind == "kw" and t.text in ("X", "G", "F"):
            self.advance()
            arg = self.unary()
            return {"X": Next, "G": Globally, "F": Finally}[t.text](arg)
        if self.at("["):
            return self.bracketed()
        self.fail({"X", "G", "F", "["})


def parse_formula(text):
    """Parse concrete syntax into a :class:`Formula`.

    Raises :class:`~atlkf.errors.FormulaSyntaxError` carrying the line,
    column and expected-token set of the first error.
    """
    return _Parser(text).parse()
