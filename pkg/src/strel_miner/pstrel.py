"""Parametric STREL templates and lexicographic projection of traces.

A template is a formula whose numeric slots may hold ``$name`` parameters.
Each parameter has a polarity: ``+`` when raising it makes the formula easier
to satisfy, ``-`` when lowering it does.  The projection of a location is the
tightest satisfying valuation found by bisecting one parameter at a time in a
user-given priority order.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import ProjectionError, TemplateError
from .formula import (
    And,
    Atomic,
    Escape,
    Formula,
    Not,
    Param,
    Reach,
    TrueF,
    Until,
    desugar,
    instantiate,
    parameters,
    walk,
)
from .monitor import Monitor
from .parser import parse
from .spatial import SpatialModel
from .traces import SpatioTemporalTrace

KINDS = ("magnitude", "timing", "spatial")


def infer_polarity(formula: Formula) -> dict[str, str]:
    """Syntactic polarity of every parameter.

    Works on the desugared formula, where only atoms, negation, conjunction,
    until, reach and escape remain.  A threshold in ``x > c`` is ``-``, in
    ``x < c`` is ``+``; an interval's upper end is ``+`` and its lower end ``-``;
    negation flips.  Raises :class:`TemplateError` when a parameter occurs with
    both polarities.
    """
    found: dict[str, str] = {}

    def record(x, sign):
        if not isinstance(x, Param):
            return
        pol = "+" if sign > 0 else "-"
        if found.setdefault(x.name, pol) != pol:
            raise TemplateError(
                f"parameter {x.name!r} occurs with both polarities; template is not monotone"
            )

    def go(f, sign):
        if isinstance(f, TrueF):
            return
        if isinstance(f, Atomic):
            record(f.threshold, -sign if f.op in (">", ">=") else sign)
        elif isinstance(f, Not):
            go(f.arg, -sign)
        elif isinstance(f, And):
            go(f.left, sign)
            go(f.right, sign)
        elif isinstance(f, (Until, Reach)):
            record(f.lo, -sign)
            record(f.hi, sign)
            go(f.left, sign)
            go(f.right, sign)
        elif isinstance(f, Escape):
            record(f.lo, -sign)
            record(f.hi, sign)
            go(f.arg, sign)
        else:
            raise TypeError(f"unexpected node after desugaring: {f!r}")

    go(desugar(formula), +1)
    return found


def parameter_kinds(formula: Formula) -> dict[str, str]:
    """Classify each parameter by the slot it fills."""
    from .formula import SPATIAL, TEMPORAL

    kinds: dict[str, str] = {}

    def put(x, kind):
        if isinstance(x, Param) and kinds.setdefault(x.name, kind) != kind:
            raise TemplateError(f"parameter {x.name!r} used both as {kinds[x.name]} and {kind}")

    for node in walk(formula):
        if isinstance(node, Atomic):
            put(node.threshold, "magnitude")
        elif isinstance(node, TEMPORAL):
            put(node.lo, "timing")
            put(node.hi, "timing")
        elif isinstance(node, SPATIAL):
            put(node.lo, "spatial")
            put(node.hi, "spatial")
    return kinds


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str
    polarity: str
    lo: float | None = None
    hi: float | None = None
    delta: float | None = None

    @property
    def bounded(self) -> bool:
        return self.lo is not None and self.hi is not None

    @property
    def permissive(self) -> float:
        return self.hi if self.polarity == "+" else self.lo

    @property
    def restrictive(self) -> float:
        return self.lo if self.polarity == "+" else self.hi


@dataclass(frozen=True)
class PstrelTemplate:
    """A hole-bearing formula plus per-parameter specs and a priority order."""

    formula: Formula
    params: tuple[ParamSpec, ...]
    order: tuple[str, ...]
    text: str | None = field(default=None, compare=False)

    def __post_init__(self):
        names = [p.name for p in self.params]
        holes = parameters(self.formula)
        if sorted(names) != sorted(holes) or len(set(names)) != len(names):
            raise TemplateError(f"declared parameters {names} do not match formula holes {holes}")
        if sorted(self.order) != sorted(names):
            raise TemplateError(f"order {list(self.order)} is not a permutation of {names}")
        inferred = infer_polarity(self.formula)
        for p in self.params:
            if p.polarity not in ("+", "-"):
                raise TemplateError(f"polarity of {p.name!r} must be '+' or '-'")
            if inferred[p.name] != p.polarity:
                raise TemplateError(
                    f"declared polarity {p.polarity} of {p.name!r} contradicts inferred "
                    f"{inferred[p.name]}"
                )
            if p.bounded:
                if not (math.isfinite(p.lo) and math.isfinite(p.hi) and p.lo < p.hi):
                    raise TemplateError(f"bounds of {p.name!r} must be finite with lo < hi")
                if p.delta is not None and not (0 < p.delta < p.hi - p.lo):
                    raise TemplateError(f"delta of {p.name!r} must lie in (0, hi - lo)")
        # bounded parameters get the default resolution right away
        object.__setattr__(self, "params", tuple(
            replace(p, delta=(p.hi - p.lo) / 256.0) if p.bounded and p.delta is None else p
            for p in self.params))

    @classmethod
    def from_formula(cls, formula: Formula | str, order: Sequence[str] | None = None,
                     bounds: Mapping[str, tuple[float, float]] | None = None,
                     deltas: Mapping[str, float] | None = None) -> "PstrelTemplate":
        text = formula if isinstance(formula, str) else None
        if isinstance(formula, str):
            formula = parse(formula)
        pol = infer_polarity(formula)
        kinds = parameter_kinds(formula)
        bounds = bounds or {}
        deltas = deltas or {}
        specs = []
        for name in parameters(formula):
            lo, hi = (float(b) for b in bounds[name]) if name in bounds else (None, None)
            specs.append(ParamSpec(name, kinds[name], pol[name], lo, hi, deltas.get(name)))
        order = tuple(order) if order is not None else tuple(parameters(formula))
        return cls(formula, tuple(specs), order, text)

    @classmethod
    def from_json(cls, path) -> "PstrelTemplate":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: Mapping) -> "PstrelTemplate":
        try:
            text = raw["formula"]
            formula = parse(text)
        except KeyError:
            raise TemplateError("template needs a 'formula' entry") from None
        pol = infer_polarity(formula)
        kinds = parameter_kinds(formula)
        specs = []
        for entry in raw.get("params", [{"name": n} for n in parameters(formula)]):
            name = entry["name"]
            if name not in pol:
                raise TemplateError(f"parameter {name!r} does not occur in the formula")
            bounds = entry.get("bounds")
            lo, hi = (None, None) if bounds is None else (float(bounds[0]), float(bounds[1]))
            kind = entry.get("kind", kinds[name])
            if kind != kinds[name]:
                raise TemplateError(f"parameter {name!r} declared {kind} but used as {kinds[name]}")
            delta = entry.get("delta")
            specs.append(ParamSpec(name, kind, entry.get("polarity", pol[name]), lo, hi,
                                   None if delta is None else float(delta)))
        order = tuple(raw.get("order", [s.name for s in specs]))
        return cls(formula, tuple(specs), order, text)

    def to_dict(self) -> dict:
        from .formula import to_text

        return {
            "formula": self.text or to_text(self.formula),
            "params": [
                {"name": p.name, "kind": p.kind, "polarity": p.polarity,
                 "bounds": None if not p.bounded else [p.lo, p.hi], "delta": p.delta}
                for p in self.params
            ],
            "order": list(self.order),
        }

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.params]

    def spec(self, name: str) -> ParamSpec:
        for p in self.params:
            if p.name == name:
                return p
        raise KeyError(name)

    def instantiate(self, valuation: Mapping[str, float]) -> Formula:
        return instantiate(self.formula, valuation)

    def most_permissive(self) -> dict[str, float]:
        self._require_bounds()
        return {p.name: p.permissive for p in self.params}

    def _require_bounds(self):
        missing = [p.name for p in self.params if not p.bounded]
        if missing:
            raise TemplateError(f"parameters without bounds: {missing}; call resolve_bounds")

    def resolve_bounds(self, model: SpatialModel, trace: SpatioTemporalTrace) -> "PstrelTemplate":
        """Fill unspecified bounds and deltas from the data.

        Magnitudes span the range of the variable they compare, timing parameters
        ``[0, horizon]`` and spatial ones ``[0, diameter of the model]``.  Deltas
        default to 1/256 of the bound width.
        """
        var_of = {}
        for node in walk(self.formula):
            if isinstance(node, Atomic) and isinstance(node.threshold, Param):
                var_of.setdefault(node.threshold.name, set()).add(node.var)
        diameter = None
        specs = []
        for p in self.params:
            lo, hi = p.lo, p.hi
            if not p.bounded:
                if p.kind == "magnitude":
                    data = np.concatenate([trace.variable(v).ravel() for v in sorted(var_of[p.name])])
                    lo, hi = float(np.nanmin(data)), float(np.nanmax(data))
                elif p.kind == "timing":
                    lo, hi = 0.0, trace.horizon
                else:
                    if diameter is None:
                        diameter = model.diameter()
                    lo, hi = 0.0, diameter
                if not lo < hi:
                    raise TemplateError(
                        f"cannot derive bounds for {p.name!r}: data range is [{lo}, {hi}]"
                    )
            delta = p.delta if p.delta is not None else (hi - lo) / 256.0
            specs.append(replace(p, lo=lo, hi=hi, delta=delta))
        return replace(self, params=tuple(specs))


def _robustness(monitor: Monitor, template: PstrelTemplate, valuation, loc: int) -> float:
    return monitor.robustness(template.instantiate(valuation), loc, 0)


def project_lex(template: PstrelTemplate, model: SpatialModel, trace: SpatioTemporalTrace,
                location, monitor: Monitor | None = None) -> dict[str, float]:
    """Tightest satisfying valuation at ``location`` along the template's priority order.

    Every parameter starts at its most permissive bound.  Then, in priority
    order, its interval is bisected until narrower than its delta, keeping the
    satisfying endpoint (robustness >= 0 at time 0); that endpoint becomes its
    fixed value for the parameters that follow.
    """
    monitor = monitor or Monitor(model, trace)
    template._require_bounds()
    loc = location if isinstance(location, (int, np.integer)) else model.index_of(location)
    nu = template.most_permissive()
    rho = _robustness(monitor, template, nu, loc)
    if not rho >= 0:
        raise ProjectionError(
            f"location {model.ids[loc]!r} violates the most permissive instance (rho={rho})"
        )
    for name in template.order:
        p = template.spec(name)
        lo, hi = p.lo, p.hi
        while abs(hi - lo) >= p.delta:
            mid = 0.5 * (lo + hi)
            nu[name] = mid
            ok = _robustness(monitor, template, nu, loc) >= 0
            if ok == (p.polarity == "+"):
                hi = mid
            else:
                lo = mid
        nu[name] = hi if p.polarity == "+" else lo
    return nu


@dataclass
class Projection:
    """Per-location valuations plus the locations that could not be projected."""

    template: PstrelTemplate
    valuations: dict[str, dict[str, float]]
    failures: dict[str, str]

    def matrix(self, ids: Sequence[str] | None = None) -> np.ndarray:
        ids = list(self.valuations) if ids is None else ids
        return np.array([[self.valuations[i][n] for n in self.template.names] for i in ids])

    def write_csv(self, path, all_ids: Sequence[str]) -> None:
        names = self.template.names
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["location_id", *names, "status"])
            for lid in all_ids:
                if lid in self.valuations:
                    writer.writerow([lid, *(repr(self.valuations[lid][n]) for n in names), "ok"])
                else:
                    writer.writerow([lid, *([""] * len(names)), "unprojectable"])


def project_all(template: PstrelTemplate, model: SpatialModel,
                trace: SpatioTemporalTrace) -> Projection:
    """Project every location; unprojectable ones are recorded, not raised."""
    template._require_bounds()
    monitor = Monitor(model, trace)
    valuations, failures = {}, {}
    for k, lid in enumerate(model.ids):
        try:
            valuations[lid] = project_lex(template, model, trace, k, monitor)
        except ProjectionError as exc:
            failures[lid] = str(exc)
    return Projection(template, valuations, failures)


def read_projections_csv(path, template: PstrelTemplate) -> Projection:
    valuations, failures = {}, {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if row["status"] == "ok":
                valuations[row["location_id"]] = {n: float(row[n]) for n in template.names}
            else:
                failures[row["location_id"]] = row["status"]
    return Projection(template, valuations, failures)
