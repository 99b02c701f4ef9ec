"""Weighted spatial models over geolocated nodes.

Four constructions are provided: the complete graph, the delta-connectivity
graph, the minimum spanning tree and the alpha-enhanced minimum spanning
graph.  Edge weights are great-circle (haversine) distances in meters.
"""

from __future__ import annotations

import csv
import heapq
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DataError

EARTH_RADIUS_M = 6_371_000.0


@dataclass(frozen=True)
class Location:
    id: str
    lat: float
    lon: float
    name: str | None = None

    def __post_init__(self):
        if not (-90.0 <= self.lat <= 90.0):
            raise DataError(f"latitude out of range for {self.id!r}: {self.lat}")
        if not (-180.0 <= self.lon <= 180.0):
            raise DataError(f"longitude out of range for {self.id!r}: {self.lon}")


def haversine(a: Location, b: Location) -> float:
    """Great-circle distance between two locations, in meters."""
    phi1, phi2 = math.radians(a.lat), math.radians(b.lat)
    d_phi = phi2 - phi1
    d_lam = math.radians(b.lon - a.lon)
    h = math.sin(d_phi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(d_lam / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def _check_ids(locations: Sequence[Location]) -> tuple[Location, ...]:
    locations = tuple(locations)
    seen = set()
    for loc in locations:
        if loc.id in seen:
            raise DataError(f"duplicate location id {loc.id!r}")
        seen.add(loc.id)
    return locations


def _positive_weight(locations, i, j) -> float:
    w = haversine(locations[i], locations[j])
    if not w > 0:
        raise DataError(
            f"locations {locations[i].id!r} and {locations[j].id!r} share coordinates"
        )
    return w


@dataclass(frozen=True, eq=False)
class SpatialModel:
    """Immutable weighted location graph.

    ``edges`` maps an ordered pair ``(i, j)`` of location indices to the edge
    weight in meters.  A symmetric model stores both directions.
    """

    locations: tuple[Location, ...]
    edges: Mapping[tuple[int, int], float]
    symmetric: bool = True
    _adj: tuple = field(init=False, repr=False)
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.locations)
        edges = dict(self.edges)
        adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for (i, j), w in sorted(edges.items()):
            if i == j:
                raise DataError(f"self-loop on location index {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise DataError(f"edge ({i}, {j}) references a missing location")
            if not (w > 0 and math.isfinite(w)):
                raise DataError(f"edge ({i}, {j}) has invalid weight {w}")
            if self.symmetric and edges.get((j, i)) != w:
                raise DataError(f"edge ({i}, {j}) has no matching reverse edge")
            adj[i].append((j, float(w)))
        object.__setattr__(self, "locations", _check_ids(self.locations))
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_adj", tuple(tuple(a) for a in adj))
        object.__setattr__(self, "_index", {loc.id: k for k, loc in enumerate(self.locations)})

    @classmethod
    def from_undirected(cls, locations, pairs: Iterable[tuple[int, int, float]]):
        edges = {}
        for i, j, w in pairs:
            edges[(i, j)] = w
            edges[(j, i)] = w
        return cls(tuple(locations), edges, symmetric=True)

    def __len__(self):
        return len(self.locations)

    @property
    def ids(self) -> list[str]:
        return [loc.id for loc in self.locations]

    def index_of(self, location_id) -> int:
        try:
            return self._index[location_id]
        except KeyError:
            raise DataError(f"unknown location id {location_id!r}") from None

    def neighbors(self, i: int) -> tuple[tuple[int, float], ...]:
        return self._adj[i]

    def undirected_edges(self) -> list[tuple[int, int, float]]:
        """Edges with ``i < j`` (for a symmetric model each edge appears once)."""
        if self.symmetric:
            return [(i, j, w) for (i, j), w in sorted(self.edges.items()) if i < j]
        return [(i, j, w) for (i, j), w in sorted(self.edges.items())]

    @property
    def n_edges(self) -> int:
        """Number of directed edges."""
        return len(self.edges)

    @property
    def min_weight(self) -> float:
        return min(self.edges.values()) if self.edges else math.inf

    def shortest_distances(self, source: int) -> np.ndarray:
        """Single-source shortest route distances (Dijkstra)."""
        dist = np.full(len(self), math.inf)
        dist[source] = 0.0
        heap = [(0.0, source)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for v, w in self._adj[u]:
                nd = d + w
                if nd < dist[v]:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        return dist

    def distance_matrix(self) -> np.ndarray:
        return np.vstack([self.shortest_distances(i) for i in range(len(self))])

    def diameter(self) -> float:
        """Largest finite induced distance (0 for an edgeless model)."""
        d = self.distance_matrix()
        finite = d[np.isfinite(d)]
        return float(finite.max()) if finite.size else 0.0


def induced_distance(model: SpatialModel, i: int, j: int) -> float:
    """Minimum route distance from location ``i`` to ``j``; ``inf`` if unreachable."""
    n = len(model)
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"location index out of range: ({i}, {j})")
    if i == j:
        return 0.0
    return float(model.shortest_distances(i)[j])


def isolated_nodes(model: SpatialModel) -> tuple[int, list[str]]:
    ids = [loc.id for k, loc in enumerate(model.locations) if not model.neighbors(k)]
    return len(ids), ids


def build_full(locations: Sequence[Location]) -> SpatialModel:
    locations = _check_ids(locations)
    n = len(locations)
    if n < 1:
        raise ConfigError("at least one location is required")
    pairs = [(i, j, _positive_weight(locations, i, j)) for i in range(n) for j in range(i + 1, n)]
    return SpatialModel.from_undirected(locations, pairs)


def build_delta(locations: Sequence[Location], delta: float) -> SpatialModel:
    """Connect every pair closer than ``delta`` meters."""
    if not delta > 0:
        raise ConfigError(f"delta must be positive, got {delta}")
    locations = _check_ids(locations)
    n = len(locations)
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            w = haversine(locations[i], locations[j])
            if w < delta:
                pairs.append((i, j, _positive_weight(locations, i, j)))
    return SpatialModel.from_undirected(locations, pairs)


def _prim(locations) -> list[tuple[int, int, float]]:
    # O(n^2) Prim on the complete haversine graph; ties go to the smallest index.
    n = len(locations)
    in_tree = [False] * n
    best = [math.inf] * n
    parent = [-1] * n
    best[0] = 0.0
    tree = []
    for _ in range(n):
        u = min((k for k in range(n) if not in_tree[k]), key=lambda k: (best[k], k))
        in_tree[u] = True
        if parent[u] >= 0:
            tree.append((min(parent[u], u), max(parent[u], u), best[u]))
        for v in range(n):
            if not in_tree[v]:
                w = _positive_weight(locations, u, v)
                if w < best[v]:
                    best[v] = w
                    parent[v] = u
    return tree


def build_mst(locations: Sequence[Location]) -> SpatialModel:
    locations = _check_ids(locations)
    if len(locations) < 1:
        raise ConfigError("at least one location is required")
    return SpatialModel.from_undirected(locations, _prim(locations))


def build_enhanced_msg(locations: Sequence[Location], alpha: float) -> SpatialModel:
    """MST plus a direct edge for every pair whose route distance exceeds ``alpha`` times
    their haversine distance.

    Pairs are scanned with ``i < j`` in index order, and route distances are taken in
    the graph as it grows.
    """
    if not alpha > 1:
        raise ConfigError(f"alpha must be > 1, got {alpha}")
    locations = _check_ids(locations)
    n = len(locations)
    if n < 1:
        raise ConfigError("at least one location is required")
    edges: dict[tuple[int, int], float] = {}
    for i, j, w in _prim(locations):
        edges[(i, j)] = edges[(j, i)] = w
    for i in range(n):
        model = SpatialModel(locations, edges)
        dist = model.shortest_distances(i)
        for j in range(i + 1, n):
            direct = haversine(locations[i], locations[j])
            if dist[j] > alpha * direct:
                w = _positive_weight(locations, i, j)
                edges[(i, j)] = edges[(j, i)] = w
                model = SpatialModel(locations, edges)
                dist = model.shortest_distances(i)
    return SpatialModel(locations, edges)


def build_model(locations: Sequence[Location], strategy: str, **params) -> SpatialModel:
    """Dispatch on a strategy name: ``full``, ``delta``, ``mst`` or ``enhanced_msg``."""
    if strategy == "full":
        return build_full(locations)
    if strategy == "delta":
        if "delta" not in params:
            raise ConfigError("strategy 'delta' requires a 'delta' value")
        return build_delta(locations, float(params["delta"]))
    if strategy == "mst":
        return build_mst(locations)
    if strategy == "enhanced_msg":
        if "alpha" not in params:
            raise ConfigError("strategy 'enhanced_msg' requires an 'alpha' value")
        return build_enhanced_msg(locations, float(params["alpha"]))
    raise ConfigError(f"unknown model strategy {strategy!r}")


# -- I/O ---------------------------------------------------------------------


def read_locations_csv(path) -> list[Location]:
    """Read ``id,lat,lon[,name]`` rows."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"id", "lat", "lon"} - set(reader.fieldnames or ())
        if missing:
            raise DataError(f"{path}: missing columns {sorted(missing)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                lat, lon = float(row["lat"]), float(row["lon"])
            except (TypeError, ValueError):
                raise DataError(f"{path}:{lineno}: unparseable coordinates") from None
            out.append(Location(row["id"], lat, lon, row.get("name") or None))
    _check_ids(out)
    return out


def write_locations_csv(path, locations: Sequence[Location]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "lat", "lon", "name"])
        for loc in locations:
            writer.writerow([loc.id, repr(loc.lat), repr(loc.lon), loc.name or ""])


def to_geojson(model: SpatialModel, labels: Mapping[str, int] | None = None) -> dict:
    """FeatureCollection with one Point per location and one LineString per edge."""
    features = []
    for loc in model.locations:
        props = {"id": loc.id}
        if loc.name:
            props["name"] = loc.name
        if labels is not None and loc.id in labels:
            props["cluster"] = int(labels[loc.id])
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [loc.lon, loc.lat]},
            "properties": props,
        })
    for i, j, w in model.undirected_edges():
        a, b = model.locations[i], model.locations[j]
        features.append({
            "type": "Feature",
            "geometry": {"type": "LineString", "coordinates": [[a.lon, a.lat], [b.lon, b.lat]]},
            "properties": {"source": a.id, "target": b.id, "weight_m": w},
        })
    return {"type": "FeatureCollection", "features": features}


def write_geojson(path, model: SpatialModel, labels=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_geojson(model, labels), fh, indent=1)
        fh.write("\n")


def read_geojson(path) -> SpatialModel:
    """Inverse of :func:`write_geojson`: Points become locations, LineStrings edges."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        locs, pairs = [], []
        for feat in raw["features"]:
            props = feat.get("properties", {})
            if feat["geometry"]["type"] == "Point":
                lon, lat = feat["geometry"]["coordinates"][:2]
                locs.append(Location(str(props["id"]), float(lat), float(lon), props.get("name")))
            elif feat["geometry"]["type"] == "LineString":
                pairs.append((str(props["source"]), str(props["target"]), float(props["weight_m"])))
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: not a spatial-model GeoJSON ({exc})") from None
    index = {loc.id: k for k, loc in enumerate(locs)}
    try:
        return SpatialModel.from_undirected(locs, [(index[a], index[b], w) for a, b, w in pairs])
    except KeyError as exc:
        raise DataError(f"{path}: edge refers to unknown location {exc}") from None
