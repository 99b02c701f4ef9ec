"""Spatio-temporal traces: loading, cleaning and a synthetic food-court generator."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, DataError
from .spatial import EARTH_RADIUS_M, Location, SpatialModel

_MISSING = {"", "na", "nan", "null", "none"}


@dataclass(frozen=True, eq=False)
class SpatioTemporalTrace:
    """Uniformly sampled multivariate series, one per location.

    ``values`` has shape ``(n_locations, n_times, n_variables)``; NaN marks a
    missing cell.
    """

    location_ids: tuple[str, ...]
    variables: tuple[str, ...]
    times: np.ndarray
    values: np.ndarray
    time_unit: str = "min"

    def __post_init__(self):
        # private copies, so freezing them never touches the caller's arrays
        times = np.array(self.times, dtype=float)
        values = np.array(self.values, dtype=float)
        if values.shape != (len(self.location_ids), len(times), len(self.variables)):
            raise DataError(f"values shape {values.shape} does not match ids/times/variables")
        if len(set(self.location_ids)) != len(self.location_ids):
            raise DataError("duplicate location ids in trace")
        if len(times) > 1:
            steps = np.diff(times)
            if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
                raise DataError("timestamps must form a strictly increasing uniform grid")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "location_ids", tuple(self.location_ids))
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def n_times(self) -> int:
        return len(self.times)

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 1.0

    @property
    def horizon(self) -> float:
        return float(self.times[-1] - self.times[0]) if len(self.times) else 0.0

    def time_index(self, t: float) -> int:
        k = (t - self.times[0]) / self.step
        idx = int(round(k))
        if not (0 <= idx < self.n_times) or not math.isclose(k, idx, abs_tol=1e-9):
            raise DataError(f"time {t} is not on the trace grid")
        return idx

    def variable(self, name: str) -> np.ndarray:
        try:
            v = self.variables.index(name)
        except ValueError:
            raise DataError(f"variable {name!r} not present in trace") from None
        return self.values[:, :, v]

    def missing_fraction(self) -> np.ndarray:
        return np.isnan(self.values).reshape(len(self.location_ids), -1).mean(axis=1)

    def aligned_to(self, model: SpatialModel) -> "SpatioTemporalTrace":
        """Reorder rows to the model's location order; every model location must be present."""
        if tuple(model.ids) == self.location_ids:
            return self
        pos = {lid: k for k, lid in enumerate(self.location_ids)}
        missing = [lid for lid in model.ids if lid not in pos]
        if missing:
            raise DataError(f"trace has no data for locations {missing}")
        order = [pos[lid] for lid in model.ids]
        return SpatioTemporalTrace(
            tuple(model.ids), self.variables, self.times, self.values[order], self.time_unit
        )

    def subset(self, location_ids: Sequence[str]) -> "SpatioTemporalTrace":
        pos = {lid: k for k, lid in enumerate(self.location_ids)}
        order = [pos[lid] for lid in location_ids]
        return SpatioTemporalTrace(
            tuple(location_ids), self.variables, self.times, self.values[order], self.time_unit
        )


def _parse_cell(raw: str, where: str) -> float:
    text = raw.strip()
    if text.lower() in _MISSING:
        return math.nan
    try:
        return float(text)
    except ValueError:
        raise DataError(f"{where}: unparseable cell {raw!r}") from None


def load_traces(path, locations: Sequence[Location] | SpatialModel, time_unit: str = "min"):
    """Load a long-format CSV with columns ``location_id,time,<var1>,...``.

    Rows may appear in any order.  Absent (location, time) rows and empty/``NA``
    cells become missing values.
    """
    if isinstance(locations, SpatialModel):
        locations = locations.locations
    ids = [loc.id for loc in locations]
    known = set(ids)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["location_id", "time"] or len(header) < 3:
            raise DataError(f"{path}: header must be location_id,time,<variables...>")
        variables = [h.strip() for h in header[2:]]
        rows = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} columns")
            lid = row[0]
            if lid not in known:
                raise DataError(f"{path}:{lineno}: unknown location id {lid!r}")
            t = _parse_cell(row[1], f"{path}:{lineno}")
            if math.isnan(t):
                raise DataError(f"{path}:{lineno}: missing time")
            key = (lid, t)
            if key in rows:
                raise DataError(f"{path}:{lineno}: duplicate row for {lid!r} at time {t}")
            rows[key] = [_parse_cell(c, f"{path}:{lineno}") for c in row[2:]]
    times = np.array(sorted({t for _, t in rows}), dtype=float)
    if len(times) == 0:
        raise DataError(f"{path}: no data rows")
    t_index = {t: k for k, t in enumerate(times)}
    values = np.full((len(ids), len(times), len(variables)), np.nan)
    l_index = {lid: k for k, lid in enumerate(ids)}
    for (lid, t), cells in rows.items():
        values[l_index[lid], t_index[t]] = cells
    return SpatioTemporalTrace(tuple(ids), tuple(variables), times, values, time_unit)


def write_traces_csv(path, trace: SpatioTemporalTrace) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["location_id", "time", *trace.variables])
        for k, lid in enumerate(trace.location_ids):
            for ti, t in enumerate(trace.times):
                cells = ["" if math.isnan(v) else repr(float(v)) for v in trace.values[k, ti]]
                writer.writerow([lid, repr(float(t)), *cells])


def _fill_nearest(series: np.ndarray) -> np.ndarray:
    present = np.flatnonzero(~np.isnan(series))
    if present.size == len(series):
        return series
    idx = np.arange(len(series))
    right = np.searchsorted(present, idx)  # first present index >= idx
    left = np.clip(right - 1, 0, present.size - 1)
    right = np.clip(right, 0, present.size - 1)
    dl = np.abs(idx - present[left])
    dr = np.abs(present[right] - idx)
    pick = np.where(dl <= dr, present[left], present[right])
    return series[pick]


def clean(trace: SpatioTemporalTrace, missing_frac_threshold: float = 0.15):
    """Drop locations with too many gaps, then fill the rest from the nearest sample.

    Returns ``(cleaned_trace, dropped_ids)``.  A location is dropped when its
    missing fraction is strictly greater than the threshold.  Remaining gaps take
    the nearest present value in time; on equal distance the earlier one wins.
    """
    frac = trace.missing_fraction()
    keep = [k for k, f in enumerate(frac) if f <= missing_frac_threshold]
    kept = set(keep)
    dropped = [lid for k, lid in enumerate(trace.location_ids) if k not in kept]
    if not keep:
        raise DataError("all locations dropped by the missing-value filter")
    values = trace.values[keep].copy()
    for a in range(values.shape[0]):
        for v in range(values.shape[2]):
            col = values[a, :, v]
            if np.isnan(col).all():
                raise DataError(
                    f"location {trace.location_ids[keep[a]]!r} has no data for "
                    f"{trace.variables[v]!r}"
                )
            values[a, :, v] = _fill_nearest(col)
    cleaned = SpatioTemporalTrace(
        tuple(trace.location_ids[k] for k in keep), trace.variables, trace.times, values,
        trace.time_unit,
    )
    return cleaned, dropped


# -- synthetic food court ----------------------------------------------------


@dataclass
class FoodCourtConfig:
    """Parameters of the food-court crowd simulation.

    Regions form a ``rows x cols`` grid of square cells, numbered row-major.
    Times are in minutes.
    """

    rows: int = 4
    cols: int = 5
    cell_size_m: float = 15.0
    entrance: int = 0
    popular: tuple[int, ...] = (7, 14, 18)
    customers: int = 500
    horizon_min: int = 240
    p_popular: float = 0.8
    decision_period_min: int = 10
    speed_m_s: float = 1.4
    origin_lat: float = 34.0522
    origin_lon: float = -118.2437

    def __post_init__(self):
        self.popular = tuple(int(p) for p in self.popular)
        n = self.rows * self.cols
        if self.rows < 1 or self.cols < 1:
            raise ConfigError("grid needs at least one row and one column")
        for idx in (self.entrance, *self.popular):
            if not 0 <= idx < n:
                raise ConfigError(f"region index {idx} outside 0..{n - 1}")
        if len(set(self.popular)) != len(self.popular) or not self.popular:
            raise ConfigError("popular regions must be distinct and non-empty")
        if self.customers < 0 or self.horizon_min < 1 or self.decision_period_min < 1:
            raise ConfigError("customers >= 0, horizon >= 1 and decision period >= 1 required")
        if not 0.0 <= self.p_popular <= 1.0:
            raise ConfigError("p_popular must be a probability")

    @classmethod
    def from_json(cls, path) -> "FoodCourtConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        try:
            return cls(**raw)
        except TypeError as exc:
            raise ConfigError(f"{path}: {exc}") from None

    def to_dict(self) -> dict:
        return asdict(self)


def _region_centers(cfg: FoodCourtConfig) -> np.ndarray:
    r, c = np.divmod(np.arange(cfg.rows * cfg.cols), cfg.cols)
    return np.column_stack([(c + 0.5) * cfg.cell_size_m, (r + 0.5) * cfg.cell_size_m])


def food_court_locations(cfg: FoodCourtConfig) -> list[Location]:
    """Region centers, placed on the sphere around the configured origin."""
    lat0 = math.radians(cfg.origin_lat)
    out = []
    for k, (x, y) in enumerate(_region_centers(cfg)):
        lat = cfg.origin_lat + math.degrees(y / EARTH_RADIUS_M)
        lon = cfg.origin_lon + math.degrees(x / (EARTH_RADIUS_M * math.cos(lat0)))
        name = "entrance" if k == cfg.entrance else ("popular" if k in cfg.popular else None)
        out.append(Location(f"R{k:02d}", lat, lon, name))
    return out


def generate_food_court(cfg: FoodCourtConfig | None = None, seed: int = 0):
    """Simulate customers walking between regions; returns ``(locations, trace)``.

    Everyone starts at the entrance at t=0.  Every decision period each customer
    draws a destination: one of the popular regions with probability
    ``p_popular``, otherwise a uniformly drawn non-popular region (which may be
    where they already stand).  They then walk straight toward its center at
    ``speed_m_s``.  Occupancy (variable ``numPeople``) is sampled every minute.
    """
    cfg = cfg or FoodCourtConfig()
    rng = np.random.default_rng(seed)
    n_regions = cfg.rows * cfg.cols
    centers = _region_centers(cfg)
    others = np.array([k for k in range(n_regions) if k not in cfg.popular])
    popular = np.array(cfg.popular)
    step_m = cfg.speed_m_s * 60.0

    pos = np.repeat(centers[[cfg.entrance]], cfg.customers, axis=0)
    dest = pos.copy()
    counts = np.zeros((n_regions, cfg.horizon_min + 1))
    for t in range(cfg.horizon_min + 1):
        if cfg.customers:
            col = np.clip((pos[:, 0] // cfg.cell_size_m).astype(int), 0, cfg.cols - 1)
            row = np.clip((pos[:, 1] // cfg.cell_size_m).astype(int), 0, cfg.rows - 1)
            counts[:, t] = np.bincount(row * cfg.cols + col, minlength=n_regions)
        if t % cfg.decision_period_min == 0:
            to_popular = rng.random(cfg.customers) < cfg.p_popular
            pick_pop = popular[rng.integers(len(popular), size=cfg.customers)]
            pick_other = (
                others[rng.integers(len(others), size=cfg.customers)] if others.size else pick_pop
            )
            dest = centers[np.where(to_popular, pick_pop, pick_other)]
        delta = dest - pos
        dist = np.hypot(delta[:, 0], delta[:, 1])
        frac = np.divide(np.minimum(step_m, dist), dist, out=np.zeros_like(dist), where=dist > 0)
        pos = pos + delta * frac[:, None]

    locations = food_court_locations(cfg)
    trace = SpatioTemporalTrace(
        tuple(loc.id for loc in locations),
        ("numPeople",),
        np.arange(cfg.horizon_min + 1, dtype=float),
        counts[:, :, None],
        "min",
    )
    return locations, trace
