"""STREL abstract syntax, printing, desugaring and parameter substitution.

Numeric slots (atomic thresholds and interval endpoints) hold either a float
or a :class:`Param`; a formula containing parameters is a parametric template
and must be instantiated before it can be monitored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Callable, Iterator, Mapping, Union

from .errors import FormulaSyntaxError, TemplateError

COMPARATORS = (">", ">=", "<", "<=")


@dataclass(frozen=True)
class Param:
    name: str

    def __str__(self):
        return f"${self.name}"


Number = Union[float, Param]


def _check_interval(lo, hi, what):
    if isinstance(lo, Param) or isinstance(hi, Param):
        return
    if math.isnan(lo) or math.isnan(hi):
        raise FormulaSyntaxError(f"{what} interval bounds must be numbers")
    if lo < 0:
        raise FormulaSyntaxError(f"{what} interval lower bound must be >= 0, got {lo}")
    if lo > hi:
        raise FormulaSyntaxError(f"{what} interval [{lo}, {hi}] has lo > hi")
    if math.isinf(lo):
        raise FormulaSyntaxError(f"{what} interval lower bound must be finite")


class Formula:
    """Base class; supports ``~f``, ``f & g`` and ``f | g`` for building trees."""

    __slots__ = ()

    def __invert__(self):
        return Not(self)

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def children(self) -> tuple["Formula", ...]:
        return tuple(getattr(self, f.name) for f in fields(self) if f.name in _CHILD_FIELDS)

    def __str__(self):
        return to_text(self)


_CHILD_FIELDS = {"arg", "left", "right"}


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class Atomic(Formula):
    var: str
    op: str
    threshold: Number

    def __post_init__(self):
        if self.op not in COMPARATORS:
            raise FormulaSyntaxError(f"unknown comparison {self.op!r}")


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
class _Timed(Formula):
    def __post_init__(self):
        _check_interval(self.lo, self.hi, "time")


@dataclass(frozen=True)
class _Spatial(Formula):
    def __post_init__(self):
        _check_interval(self.lo, self.hi, "distance")


@dataclass(frozen=True)
class Until(_Timed):
    left: Formula
    right: Formula
    lo: Number
    hi: Number


@dataclass(frozen=True)
class Eventually(_Timed):
    arg: Formula
    lo: Number
    hi: Number


@dataclass(frozen=True)
class Globally(_Timed):
    arg: Formula
    lo: Number
    hi: Number


@dataclass(frozen=True)
class Reach(_Spatial):
    left: Formula
    right: Formula
    lo: Number
    hi: Number


@dataclass(frozen=True)
class Escape(_Spatial):
    arg: Formula
    lo: Number
    hi: Number


@dataclass(frozen=True)
class Somewhere(_Spatial):
    arg: Formula
    lo: Number
    hi: Number


@dataclass(frozen=True)
class Everywhere(_Spatial):
    arg: Formula
    lo: Number
    hi: Number


@dataclass(frozen=True)
class Surround(_Spatial):
    left: Formula
    right: Formula
    lo: Number
    hi: Number


TEMPORAL = (Until, Eventually, Globally)
SPATIAL = (Reach, Escape, Somewhere, Everywhere, Surround)
CORE = (TrueF, Atomic, Not, And, Until, Reach, Escape)


# -- printing ----------------------------------------------------------------


def format_number(x: Number) -> str:
    if isinstance(x, Param):
        return str(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _ival(f, num) -> str:
    return f"[{num(f.lo)},{num(f.hi)}]"


_BINARY = (And, Or, Until, Reach)


def to_text(f: Formula, num: Callable[[Number], str] = format_number) -> str:
    """Render in the DSL accepted by :func:`strel_miner.parser.parse`.

    Binary subformulas are always parenthesized, so the output re-parses to the
    same tree.
    """

    def sub(g):
        s = to_text(g, num)
        return f"({s})" if isinstance(g, _BINARY) else s

    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, Atomic):
        return f"{f.var} {f.op} {num(f.threshold)}"
    if isinstance(f, Not):
        return f"!{sub(f.arg)}"
    if isinstance(f, And):
        return f"{sub(f.left)} & {sub(f.right)}"
    if isinstance(f, Or):
        return f"{sub(f.left)} | {sub(f.right)}"
    if isinstance(f, Until):
        return f"{sub(f.left)} U{_ival(f, num)} {sub(f.right)}"
    if isinstance(f, Reach):
        return f"{sub(f.left)} R{_ival(f, num)} {sub(f.right)}"
    if isinstance(f, Surround):
        return f"surround{_ival(f, num)}({to_text(f.left, num)}, {to_text(f.right, num)})"
    prefix = {
        Eventually: "F", Globally: "G", Escape: "E", Somewhere: "somewhere",
        Everywhere: "everywhere",
    }[type(f)]
    return f"{prefix}{_ival(f, num)} {sub(f.arg)}"


def size(f: Formula) -> int:
    """Number of operator and atom nodes."""
    return 1 + sum(size(c) for c in f.children())


# -- traversal ---------------------------------------------------------------


def walk(f: Formula) -> Iterator[Formula]:
    yield f
    for c in f.children():
        yield from walk(c)


def parameters(f: Formula) -> list[str]:
    """Parameter names in order of first appearance."""
    seen: dict[str, None] = {}
    for node in walk(f):
        for slot in ("threshold", "lo", "hi"):
            v = getattr(node, slot, None)
            if isinstance(v, Param):
                seen.setdefault(v.name, None)
    return list(seen)


def map_children(f: Formula, fn: Callable[[Formula], Formula]) -> Formula:
    kw = {name: fn(getattr(f, name)) for name in _CHILD_FIELDS if hasattr(f, name)}
    return replace(f, **kw) if kw else f


def instantiate(f: Formula, valuation: Mapping[str, float]) -> Formula:
    """Replace every parameter with its value from ``valuation``."""

    def val(x):
        if isinstance(x, Param):
            try:
                return float(valuation[x.name])
            except KeyError:
                raise TemplateError(f"no value for parameter {x.name!r}") from None
        return x

    def go(g):
        g = map_children(g, go)
        kw = {s: val(getattr(g, s)) for s in ("threshold", "lo", "hi") if hasattr(g, s)}
        return replace(g, **kw) if kw else g

    return go(f)


# -- desugaring --------------------------------------------------------------


def desugar(f: Formula) -> Formula:
    """Rewrite into the core operators: true, atoms, not, and, until, reach, escape."""
    if isinstance(f, (TrueF, Atomic)):
        return f
    if isinstance(f, Not):
        return Not(desugar(f.arg))
    if isinstance(f, And):
        return And(desugar(f.left), desugar(f.right))
    if isinstance(f, Or):
        return Not(And(Not(desugar(f.left)), Not(desugar(f.right))))
    if isinstance(f, Until):
        return Until(desugar(f.left), desugar(f.right), f.lo, f.hi)
    if isinstance(f, Eventually):
        return Until(TrueF(), desugar(f.arg), f.lo, f.hi)
    if isinstance(f, Globally):
        return Not(Until(TrueF(), Not(desugar(f.arg)), f.lo, f.hi))
    if isinstance(f, Reach):
        return Reach(desugar(f.left), desugar(f.right), f.lo, f.hi)
    if isinstance(f, Escape):
        return Escape(desugar(f.arg), f.lo, f.hi)
    if isinstance(f, Somewhere):
        return Reach(TrueF(), desugar(f.arg), f.lo, f.hi)
    if isinstance(f, Everywhere):
        return Not(Reach(TrueF(), Not(desugar(f.arg)), f.lo, f.hi))
    if isinstance(f, Surround):
        a = desugar(f.left)
        b = desugar(f.right)
        a_or_b = Not(And(Not(a), Not(b)))
        inner = And(a, Not(Reach(a, Not(a_or_b), f.lo, f.hi)))
        if not isinstance(f.hi, Param) and math.isinf(f.hi):
            # no location lies at distance >= inf, so the escape conjunct is vacuous
            return inner
        return And(inner, Not(Escape(a, f.hi, math.inf)))
    raise TypeError(f"not a formula node: {f!r}")
