"""Boolean and quantitative monitoring of STREL formulas.

Formulas are desugared to the core operators and evaluated bottom-up over
``(location, time)`` arrays.  Boolean satisfaction reuses the quantitative
machinery with truth encoded as ``+inf`` and falsity as ``-inf``: min/max then
behave as and/or, negation as not, and an empty max as false.

Time is the discrete sample grid of the trace; a time interval ``[a, b]`` selects
the samples whose offset from ``t`` lies in it, clipped at the horizon.

Routes are walks of the spatial model.  ``l1 R[d1,d2] l2`` at ``l`` takes the max,
over walks from ``l`` and positions ``i`` on them whose prefix length lies in
``[d1, d2]``, of ``min(rho2(walk[i]), min_{j<i} rho1(walk[j]))``.  Escape follows
the same recursion with the formula playing both roles.  Weights are positive,
so walks are explored in order of increasing length and each (node, length)
state is settled once; a walk with ``k`` hops is at least ``k * w_min`` long,
which is the hop bound that makes a finite ``d2`` terminate.  For ``d2 = inf``
lengths beyond ``d1`` are collapsed into one state per node and the remaining
cyclic part is solved as a max-min fixpoint.
"""

from __future__ import annotations

import heapq
import math
from typing import Sequence

import numpy as np

from .errors import DataError, EvaluationError
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
    walk,
)
from .spatial import SpatialModel
from .traces import SpatioTemporalTrace

INF = math.inf


def hop_bound(model: SpatialModel, d2: float) -> int:
    """Smallest ``k`` with ``k * w_min > d2``: walks of ``k`` or more hops are too long.

    Falls back to the number of locations when ``d2`` is infinite or the model has
    no edges.
    """
    w_min = model.min_weight
    if math.isinf(d2) or math.isinf(w_min):
        return len(model)
    return int(math.floor(d2 / w_min)) + 1


def _offsets(lo, hi, step, n_times):
    k_lo = max(0, math.ceil(lo / step - 1e-9))
    k_hi = n_times - 1 if math.isinf(hi) else min(n_times - 1, math.floor(hi / step + 1e-9))
    return k_lo, k_hi


class Monitor:
    """Evaluator bound to one spatial model and one trace.

    The trace rows must line up with the model's locations (see
    :meth:`SpatioTemporalTrace.aligned_to`).  Instances hold no state between
    calls to :meth:`evaluate`, so one monitor may be shared across threads.
    """

    def __init__(self, model: SpatialModel, trace: SpatioTemporalTrace):
        if tuple(model.ids) != trace.location_ids:
            trace = trace.aligned_to(model)
        if np.isnan(trace.values).any():
            raise EvaluationError("trace contains missing values; clean it before monitoring")
        self.model = model
        self.trace = trace
        self.n = len(model)
        self.n_times = trace.n_times
        self.step = trace.step

    # -- public ----------------------------------------------------------

    def evaluate(
        self,
        formula: Formula,
        locations: Sequence[int] | None = None,
        times: Sequence[int] | None = None,
        boolean: bool = False,
    ) -> np.ndarray:
        """Robustness (or +/-inf truth values) as an array ``[len(locations), len(times)]``.

        ``locations`` and ``times`` are indices; they default to every location and
        to time index 0.
        """
        for node in walk(formula):
            for slot in ("threshold", "lo", "hi"):
                if isinstance(getattr(node, slot, None), Param):
                    raise EvaluationError("formula still contains parameters; instantiate it first")
        locs = np.arange(self.n) if locations is None else np.asarray(locations, dtype=int)
        tidx = np.array([0]) if times is None else np.asarray(times, dtype=int)
        if locs.size and (locs.min() < 0 or locs.max() >= self.n):
            raise EvaluationError("location index out of range")
        if tidx.size and (tidx.min() < 0 or tidx.max() >= self.n_times):
            raise EvaluationError("time index outside the trace grid")
        ctx = _EvalContext(self, boolean)
        return ctx.eval(desugar(formula), locs, tidx)

    def robustness(self, formula: Formula, location: int, time: int = 0) -> float:
        return float(self.evaluate(formula, [location], [time])[0, 0])

    def satisfies(self, formula: Formula, location: int, time: int = 0) -> bool:
        return bool(self.evaluate(formula, [location], [time], boolean=True)[0, 0] > 0)


class _EvalContext:
    def __init__(self, monitor: Monitor, boolean: bool):
        self.m = monitor
        self.boolean = boolean
        self._sp = {}

    def shortest(self, start):
        if start not in self._sp:
            self._sp[start] = self.m.model.shortest_distances(start)
        return self._sp[start]

    def eval(self, f, locs, tidx):
        if isinstance(f, TrueF):
            return np.full((len(locs), len(tidx)), INF)
        if isinstance(f, Atomic):
            try:
                x = self.m.trace.variable(f.var)[np.ix_(locs, tidx)]
            except DataError as exc:
                raise EvaluationError(str(exc)) from None
            c = f.threshold
            if self.boolean:
                holds = {">": x > c, ">=": x >= c, "<": x < c, "<=": x <= c}[f.op]
                return np.where(holds, INF, -INF)
            return x - c if f.op in (">", ">=") else c - x
        if isinstance(f, Not):
            return -self.eval(f.arg, locs, tidx)
        if isinstance(f, And):
            return np.minimum(self.eval(f.left, locs, tidx), self.eval(f.right, locs, tidx))
        if isinstance(f, Until):
            return self.until(f, locs, tidx)
        if isinstance(f, Reach):
            return self.spatial(f.left, f.right, f.lo, f.hi, locs, tidx)
        if isinstance(f, Escape):
            return self.spatial(f.arg, f.arg, f.lo, f.hi, locs, tidx)
        raise EvaluationError(f"unsupported node {type(f).__name__}")

    # -- temporal ----------------------------------------------------------

    def until(self, f, locs, tidx):
        T = self.m.n_times
        k_lo, k_hi = _offsets(f.lo, f.hi, self.m.step, T)
        out = np.full((len(locs), len(tidx)), -INF)
        if len(tidx) == 0 or k_lo > k_hi:
            return out
        t0 = int(tidx.min())
        t1 = min(T - 1, int(tidx.max()) + k_hi)
        span = np.arange(t0, t1 + 1)
        r2 = self.eval(f.right, locs, span)
        left_true = isinstance(f.left, TrueF)
        r1 = None if left_true else self.eval(f.left, locs, span)
        prefix = np.full((len(locs), len(tidx)), INF)
        for k in range(k_hi + 1):
            idx = tidx + k
            valid = idx <= t1
            if not valid.any():
                break
            col = np.clip(idx, t0, t1) - t0
            if k >= k_lo:
                cand = np.minimum(r2[:, col], prefix)
                out = np.where(valid, np.maximum(out, cand), out)
            if r1 is not None:
                prefix = np.minimum(prefix, r1[:, col])
        return out

    # -- spatial -----------------------------------------------------------

    def spatial(self, left, right, d1, d2, locs, tidx):
        everyone = np.arange(self.m.n)
        r2 = self.eval(right, everyone, tidx)
        left_true = isinstance(left, TrueF)
        if left is right:
            r1 = r2
        else:
            r1 = np.full_like(r2, INF) if left_true else self.eval(left, everyone, tidx)
        out = np.empty((len(locs), len(tidx)))
        for a, start in enumerate(locs):
            if left_true and d1 == 0:
                dist = self.shortest(int(start))
                mask = np.isfinite(dist) & (dist <= d2)
                out[a] = r2[mask].max(axis=0)
            else:
                out[a] = self._walks(int(start), d1, d2, r1, r2)
        return out

    def _walks(self, start, d1, d2, r1, r2):
        model = self.m.model
        nt = r1.shape[1]
        best = np.full(nt, -INF)
        saturate = math.isinf(d2)
        sat = np.full((self.m.n, nt), -INF)  # walks already longer than d1 (d2 = inf only)
        states = {}
        heap = []

        def push(node, length, prefix):
            if saturate and length >= d1:
                np.maximum(sat[node], prefix, out=sat[node])
                return
            if length > d2:
                return
            key = (length, node)
            if key in states:
                np.maximum(states[key], prefix, out=states[key])
            else:
                states[key] = prefix.copy()
                heapq.heappush(heap, key)

        push(start, 0.0, np.full(nt, INF))
        while heap:
            length, node = key = heapq.heappop(heap)
            prefix = states.pop(key)
            if length >= d1:
                np.maximum(best, np.minimum(r2[node], prefix), out=best)
            ext = np.minimum(prefix, r1[node])
            for nb, w in model.neighbors(node):
                push(nb, length + w, ext)

        if saturate:
            changed = True
            while changed:
                changed = False
                for node in range(self.m.n):
                    ext = np.minimum(sat[node], r1[node])
                    if not (ext > -INF).any():
                        continue
                    for nb, _ in model.neighbors(node):
                        upd = np.maximum(sat[nb], ext)
                        if (upd != sat[nb]).any():
                            sat[nb] = upd
                            changed = True
            np.maximum(best, np.minimum(r2, sat).max(axis=0), out=best)
        return best


def _resolve(model, trace, location, time):
    loc = location if isinstance(location, (int, np.integer)) else model.index_of(location)
    tix = 0 if time is None else trace.time_index(time)
    return int(loc), tix


def robustness(formula: Formula, model: SpatialModel, trace: SpatioTemporalTrace,
               location, time: float | None = None) -> float:
    """Quantitative satisfaction of ``formula`` at one location and time.

    ``location`` is an id or an index; ``time`` is a timestamp on the trace grid
    (default: the first sample).
    """
    mon = Monitor(model, trace)
    loc, tix = _resolve(model, mon.trace, location, time)
    return mon.robustness(formula, loc, tix)


def satisfies(formula: Formula, model: SpatialModel, trace: SpatioTemporalTrace,
              location, time: float | None = None) -> bool:
    mon = Monitor(model, trace)
    loc, tix = _resolve(model, mon.trace, location, time)
    return mon.satisfies(formula, loc, tix)
