"""Recursive-descent parser for the STREL formula DSL.

Grammar, loosest binding first::

    phi     := conj ('|' conj)*
    conj    := binop ('&' binop)*
    binop   := unary (('U' | 'R') ival unary)*
    unary   := '!' unary
             | ('F' | 'G' | 'E' | 'somewhere' | 'everywhere') ival unary
             | 'surround' ival '(' phi ',' phi ')'
             | 'true' | 'false'
             | ident cmp num
             | '(' phi ')'
    ival    := '[' num ',' (num | 'inf') ']'
    num     := decimal | '$' ident

The single-letter operators ``F G E U R`` are keywords only when directly
followed by ``[``, so they remain usable as variable names.
"""

from __future__ import annotations

import math
import re

from .errors import FormulaSyntaxError
from .formula import (
    And,
    Atomic,
    Escape,
    Eventually,
    Everywhere,
    Formula,
    Globally,
    Not,
    Or,
    Param,
    Reach,
    Somewhere,
    Surround,
    TrueF,
    Until,
)

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<param>\$[A-Za-z_][A-Za-z0-9_]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<num>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<op>>=|<=|>|<|!|&|\||\(|\)|\[|\]|,)
    """,
    re.VERBOSE,
)

_PREFIX = {"F": Eventually, "G": Globally, "E": Escape,
           "somewhere": Somewhere, "everywhere": Everywhere}
_INFIX = {"U": Until, "R": Reach}


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, allow_singular):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.allow_singular = allow_singular

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return FormulaSyntaxError(msg, tok[2], self.text)

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            raise self.error(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok)
        return tok

    def is_keyword_op(self, names):
        kind, value, _ = self.peek()
        return kind == "ident" and value in names and self.peek(1)[1] == "["

    def number(self, allow_inf=False):
        kind, value, _ = tok = self.take()
        if kind == "num":
            return float(value)
        if kind == "param":
            return Param(value[1:])
        if kind == "ident" and value == "inf" and allow_inf:
            return math.inf
        raise self.error(f"expected a number, found {value or 'end of input'!r}", tok)

    def interval(self, temporal):
        start = self.expect("[")
        lo = self.number()
        self.expect(",")
        hi = self.number(allow_inf=True)
        self.expect("]")
        if not isinstance(lo, Param) and not isinstance(hi, Param):
            if lo < 0:
                raise self.error("interval lower bound must be >= 0", start)
            if lo > hi:
                raise self.error(f"interval [{lo}, {hi}] has lo > hi", start)
            if temporal and lo == hi and not self.allow_singular:
                raise self.error(f"singular time interval [{lo}, {hi}]", start)
        return lo, hi

    def parse(self):
        f = self.disjunction()
        if self.peek()[0] != "eof":
            raise self.error(f"unexpected {self.peek()[1]!r}")
        return f

    def disjunction(self):
        f = self.conjunction()
        while self.peek()[1] == "|":
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self):
        f = self.binop()
        while self.peek()[1] == "&":
            self.take()
            f = And(f, self.binop())
        return f

    def binop(self):
        f = self.unary()
        while self.is_keyword_op(_INFIX):
            cls = _INFIX[self.take()[1]]
            lo, hi = self.interval(temporal=cls is Until)
            f = cls(f, self.unary(), lo, hi)
        return f

    def unary(self):
        kind, value, _ = tok = self.peek()
        if value == "!":
            self.take()
            return Not(self.unary())
        if self.is_keyword_op(_PREFIX):
            cls = _PREFIX[self.take()[1]]
            lo, hi = self.interval(temporal=cls in (Eventually, Globally))
            return cls(self.unary(), lo, hi)
        if self.is_keyword_op({"surround"}):
            self.take()
            lo, hi = self.interval(temporal=False)
            self.expect("(")
            a = self.disjunction()
            self.expect(",")
            b = self.disjunction()
            self.expect(")")
            return Surround(a, b, lo, hi)
        if value == "(":
            self.take()
            f = self.disjunction()
            self.expect(")")
            return f
        if kind == "ident" and value == "true":
            self.take()
            return TrueF()
        if kind == "ident" and value == "false":
            self.take()
            return Not(TrueF())
        if kind == "ident":
            self.take()
            op = self.take()
            if op[1] not in (">", ">=", "<", "<="):
                raise self.error(f"expected a comparison after {value!r}", op)
            return Atomic(value, op[1], self.number())
        raise self.error(f"unexpected {value or 'end of input'!r}", tok)


def parse(text: str, allow_singular: bool = False) -> Formula:
    """Parse DSL text into a formula tree.

    Raises :class:`FormulaSyntaxError` (with a character position) on bad
    syntax, a singular time interval, or an interval with ``lo > hi``.
    """
    return _Parser(text, allow_singular).parse()
