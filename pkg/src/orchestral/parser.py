"""Textual syntax for contracts (``.sc``) and orchestrators (``.orc``).

Contracts::

    1            success
    a.S  !a.S    input / output prefix (a trailing ``.1`` may be dropped)
    S + S        external choice of input-prefixed branches
    S (+) S      internal choice of output-prefixed branches
    rec X . S    recursion; the body extends as far as possible

Orchestrators use ``<l,r>`` actions with ``l, r`` in ``{a, !a, _}``, ``\\/``
for choice and ``1`` for the stopped orchestrator. ``.`` binds tighter than
any choice operator and ``#`` starts a comment running to end of line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from . import contracts as C
from . import orchestrators as O
from .syntax import Rec, Var

__all__ = ["SourceSpan", "ParseError", "WellFormednessError", "parse_contract",
           "parse_orchestrator", "render", "load"]


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 1

    def __str__(self):
        return f"{self.line}:{self.column}"


class ParseError(ValueError):
    def __init__(self, message, span: SourceSpan):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


class WellFormednessError(ValueError):
    """The text parsed, but the term violates well-formedness."""

    def __init__(self, violations, term=None):
        super().__init__("; ".join(map(str, violations)))
        self.violations = list(violations)
        self.term = term


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<ichoice>\(\+\))
  | (?P<ochoice>\\/)
  | (?P<ident>[A-Za-z][A-Za-z0-9_']*)
  | (?P<one>1(?![0-9]))
  | (?P<punct>[.+!()<>,_])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    span: SourceSpan


def _tokenize(src: str):
    toks = []
    pos, line, col = 0, 1, 1
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", SourceSpan(line, col, 1))
        text = m.group()
        kind = m.lastgroup
        if kind != "ws":
            if kind == "ident":
                if text == "rec":
                    kind = "rec"
                elif text[0].isupper():
                    kind = "var"
                else:
                    kind = "name"
            elif kind in ("punct", "ichoice", "ochoice", "one"):
                kind = text
            toks.append(_Tok(kind, text, SourceSpan(line, col, len(text))))
        for ch in text:
            if ch == "\n":
                line, col = line + 1, 1
            else:
                col += 1
        pos = m.end()
    toks.append(_Tok("eof", "", SourceSpan(line, col, 1)))
    return toks


class _Parser:
    def __init__(self, src):
        self.toks = _tokenize(src)
        self.i = 0

    @property
    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, what=None):
        tok = self.peek
        if kind is not None and tok.kind != kind:
            found = tok.text or "end of input"
            raise ParseError(f"expected {what or kind}, found {found!r}", tok.span)
        self.i += 1
        return tok

    def at(self, kind):
        return self.peek.kind == kind

    def done(self):
        self.take("eof", "end of input")

    def rec(self, body):
        self.take("rec")
        v = self.take("var", "recursion variable").text
        self.take(".", "'.'")
        return Rec(v, body())

    # contracts: each choice-free piece parses to (kind, value) where kind is
    # "+" / "(+)" for prefix groups, or "term" for 1, variables and rec
    def c_expr(self):
        first_tok = self.peek
        parts = [self.c_piece()]
        op = None
        while self.peek.kind in ("+", "(+)"):
            tok = self.take()
            if op is not None and tok.kind != op:
                raise ParseError("mixed '+' and '(+)' in one choice", tok.span)
            op = tok.kind
            parts.append((tok, self.c_piece()))
        if op is None:
            return parts[0][1]
        branches = []
        for i, part in enumerate(parts):
            tok, (kind, term) = (first_tok, part) if i == 0 else part
            if kind == "term":
                raise ParseError("choice branch must start with an action", tok.span)
            if kind != op:
                raise ParseError("mixed '+' and '(+)' in one choice", tok.span)
            branches.extend(term.branches)
        cls = C.ExternalChoice if op == "+" else C.InternalChoice
        return cls(tuple(branches))

    def c_piece(self):
        tok = self.peek
        if tok.kind == "1":
            self.take()
            return ("term", C.SUCCESS)
        if tok.kind == "var":
            self.take()
            return ("term", Var(tok.text))
        if tok.kind == "rec":
            return ("term", self.rec(self.c_expr))
        if tok.kind == "(":
            self.take()
            t = self.c_expr()
            self.take(")", "')'")
            if isinstance(t, C.ExternalChoice):
                return ("+", t)
            if isinstance(t, C.InternalChoice):
                return ("(+)", t)
            return ("term", t)
        output = False
        if tok.kind == "!":
            self.take()
            output = True
        name = self.take("name", "action name, '1', variable, 'rec' or '('").text
        cont = self.c_cont()
        if output:
            return ("(+)", C.InternalChoice(((name, cont),)))
        return ("+", C.ExternalChoice(((name, cont),)))

    def c_cont(self):
        if not self.at("."):
            return C.SUCCESS
        self.take()
        return self.c_piece()[1]

    # orchestrators
    def o_expr(self):
        branches = [self.o_piece()]
        while self.at("\\/"):
            self.take()
            branches.append(self.o_piece())
        if len(branches) == 1:
            return branches[0]
        flat = []
        for b in branches:
            flat.extend(b.branches if isinstance(b, O.Choice) else (b,))
        return O.Choice(tuple(flat))

    def o_piece(self):
        tok = self.peek
        if tok.kind == "1":
            self.take()
            return O.STOP
        if tok.kind == "var":
            self.take()
            return Var(tok.text)
        if tok.kind == "rec":
            return self.rec(self.o_expr)
        if tok.kind == "(":
            self.take()
            t = self.o_expr()
            self.take(")", "')'")
            return t
        if tok.kind == "<":
            m = self.o_action()
            if not self.at("."):
                return O.Prefix(m, O.STOP)
            self.take()
            return O.Prefix(m, self.o_piece())
        raise ParseError(f"expected orchestrator, found {tok.text or 'end of input'!r}", tok.span)

    def o_side(self):
        if self.at("_"):
            self.take()
            return None
        bang = False
        if self.at("!"):
            self.take()
            bang = True
        return (bang, self.take("name", "action name, '!name' or '_'").text)

    def o_action(self):
        start = self.take("<")
        left = self.o_side()
        self.take(",", "','")
        right = self.o_side()
        end = self.take(">", "'>'")
        span = SourceSpan(start.span.line, start.span.column,
                          max(1, end.span.column + 1 - start.span.column)
                          if end.span.line == start.span.line else 1)
        if left is None and right is None:
            raise ParseError("action needs at least one side", span)
        if left is None:
            bang, a = right
            return O.out_s(a) if bang else O.in_s(a)
        if right is None:
            bang, a = left
            return O.out_c(a) if bang else O.in_c(a)
        (lb, la), (rb, ra) = left, right
        if la != ra:
            raise ParseError(f"name mismatch in synchronous action: {la} vs {ra}", span)
        if lb == rb:
            raise ParseError("synchronous action needs exactly one '!'", span)
        return O.sync_r(la) if lb else O.sync_l(la)


def parse_contract(src: str, check: bool = True):
    """Parse, well-formedness check and canonicalise a session contract."""
    p = _Parser(src)
    term = p.c_expr()
    p.done()
    if check:
        bad = C.well_formed(term)
        if bad:
            raise WellFormednessError(bad, term)
    return C.canon(term)


def parse_orchestrator(src: str, check: bool = True):
    """Parse and canonicalise an orchestrator; ``check=False`` skips the direction checks."""
    p = _Parser(src)
    term = p.o_expr()
    p.done()
    if check:
        bad = O.well_formed_orch(term)
        if bad:
            raise WellFormednessError(bad, term)
    return O.canon(term)


def load(path, check: bool = True):
    """Parse a ``.sc`` or ``.orc`` file by extension."""
    from pathlib import Path
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".orc":
        return parse_orchestrator(text, check)
    return parse_contract(text, check)


def _needs_parens(t):
    if isinstance(t, Rec):
        return True
    if isinstance(t, (C.ExternalChoice, C.InternalChoice)):
        return len(t.branches) != 1
    return isinstance(t, O.Choice)


def _atom(t):
    s = render(t)
    return f"({s})" if _needs_parens(t) else s


def _then(head, cont, stop):
    return head if cont == stop else f"{head}.{_atom(cont)}"


def render(t) -> str:
    if isinstance(t, (C.Success, O.Stop)):
        return "1"
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Rec):
        return f"rec {t.var} . {render(t.body)}"
    if isinstance(t, C.ExternalChoice):
        return " + ".join(_then(a, c, C.SUCCESS) for a, c in t.branches)
    if isinstance(t, C.InternalChoice):
        return " (+) ".join(_then("!" + a, c, C.SUCCESS) for a, c in t.branches)
    if isinstance(t, O.Prefix):
        return _then(str(t.action), t.cont, O.STOP)
    if isinstance(t, O.Choice):
        return " \\/ ".join(_atom(b) for b in t.branches)
    raise TypeError(f"cannot render {t!r}")
