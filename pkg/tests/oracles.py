"""Independent brute-force references used by the test-suite.

Nothing here imports the code paths it checks: routes are enumerated
explicitly, derived operators are evaluated from their own definitions, and
graphs/linkage/splits are searched exhaustively.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from strel_miner import formula as F

INF = math.inf


# -- spatial ---------------------------------------------------------------


def haversine_ref(lat1, lon1, lat2, lon2, radius=6371000.0):
    # atan2 form, deliberately different from the library's asin form
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return radius * 2 * math.atan2(math.sqrt(a), math.sqrt(1 - a))


def floyd_warshall(n, weighted_edges):
    d = [[INF] * n for _ in range(n)]
    for i in range(n):
        d[i][i] = 0.0
    for i, j, w in weighted_edges:
        d[i][j] = min(d[i][j], w)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return d


def simple_path_distance(n, adj, i, j):
    """Shortest distance by enumerating every simple path (exponential)."""
    best = INF

    def dfs(u, seen, acc):
        nonlocal best
        if u == j:
            best = min(best, acc)
            return
        for v, w in adj[u]:
            if v not in seen:
                dfs(v, seen | {v}, acc + w)

    dfs(i, {i}, 0.0)
    return best


def min_spanning_tree_weight(n, weight):
    """Minimum total weight over all spanning trees, by enumerating edge subsets."""
    if n == 1:
        return 0.0
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    best = INF
    for subset in itertools.combinations(pairs, n - 1):
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        ok = True
        for i, j in subset:
            ri, rj = find(i), find(j)
            if ri == rj:
                ok = False
                break
            parent[ri] = rj
        if ok:
            best = min(best, sum(weight(i, j) for i, j in subset))
    return best


# -- STREL semantics ----------------------------------------------------------


def walk_classes(adj, start, max_len):
    """Every walk from ``start`` of length <= max_len, up to the information the
    semantics reads from it: (end node, set of nodes strictly before the end, length).

    Walks are extended one edge at a time; two walks with the same triple are
    interchangeable for every later extension, so each triple is expanded once.
    """
    seen = set()
    frontier = [(start, frozenset(), 0.0)]
    while frontier:
        nxt = []
        for state in frontier:
            if state in seen:
                continue
            seen.add(state)
            node, before, length = state
            for v, w in adj[node]:
                if length + w <= max_len:
                    nxt.append((v, before | {node}, length + w))
        frontier = nxt
    return seen


class OracleMonitor:
    """Direct transcription of the STREL semantics on walks, with memoisation.

    ``adj[i]`` lists ``(j, w)``; ``data[var]`` is an ``[n_locations, n_times]``
    array on a unit-step grid.
    """

    def __init__(self, adj, data, step=1.0):
        self.adj = adj
        self.data = data
        self.n = len(adj)
        self.T = next(iter(data.values())).shape[1]
        self.step = step
        self.memo = {}
        ws = [w for a in adj for _, w in a]
        self.w_max = max(ws) if ws else 0.0
        self._positions = {}

    def effective_upper(self, d1, d2):
        """Finite stand-in for an infinite upper bound.

        If a walk ends at position i >= 1 with length >= d1, a walk of equal or
        better value exists that is at most max(d1 + 2 w_max, (n - 1) w_max) long:
        take a simple path to the same end through the same prefix nodes and, if
        it is too short, bounce on the first edge of the original walk.
        """
        if not math.isinf(d2):
            return d2
        return d1 + (self.n + 1) * self.w_max

    def window(self, t, lo, hi):
        return [u for u in range(t, self.T) if lo <= (u - t) * self.step <= hi]

    def positions(self, l, d1, d2):
        """(end node, nodes visited before it) for walks from l with length in [d1, d2]."""
        key = (l, d1, d2)
        if key not in self._positions:
            upper = self.effective_upper(d1, d2)
            self._positions[key] = sorted(
                {(end, before) for end, before, length in walk_classes(self.adj, l, upper)
                 if d1 <= length},
                key=lambda p: (p[0], sorted(p[1])),
            )
        return self._positions[key]

    def rho(self, f, l, t):
        key = (f, l, t)
        if key in self.memo:
            return self.memo[key]
        v = self._rho(f, l, t)
        self.memo[key] = v
        return v

    def _rho(self, f, l, t):
        r = self.rho
        if isinstance(f, F.TrueF):
            return INF
        if isinstance(f, F.Atomic):
            x = float(self.data[f.var][l, t])
            return x - f.threshold if f.op in (">", ">=") else f.threshold - x
        if isinstance(f, F.Not):
            return -r(f.arg, l, t)
        if isinstance(f, F.And):
            return min(r(f.left, l, t), r(f.right, l, t))
        if isinstance(f, F.Or):
            return max(r(f.left, l, t), r(f.right, l, t))
        if isinstance(f, F.Until):
            best = -INF
            for u in self.window(t, f.lo, f.hi):
                pre = min([r(f.left, l, s) for s in range(t, u)], default=INF)
                best = max(best, min(r(f.right, l, u), pre))
            return best
        if isinstance(f, F.Eventually):
            return max([r(f.arg, l, u) for u in self.window(t, f.lo, f.hi)], default=-INF)
        if isinstance(f, F.Globally):
            return min([r(f.arg, l, u) for u in self.window(t, f.lo, f.hi)], default=INF)
        if isinstance(f, F.Reach):
            best = -INF
            for end, before in self.positions(l, f.lo, f.hi):
                pre = min([r(f.left, j, t) for j in before], default=INF)
                best = max(best, min(r(f.right, end, t), pre))
            return best
        if isinstance(f, F.Escape):
            best = -INF
            for end, before in self.positions(l, f.lo, f.hi):
                best = max(best, min(r(f.arg, j, t) for j in before | {end}))
            return best
        if isinstance(f, F.Somewhere):
            return max([r(f.arg, end, t) for end, _ in self.positions(l, f.lo, f.hi)],
                       default=-INF)
        if isinstance(f, F.Everywhere):
            return min([r(f.arg, end, t) for end, _ in self.positions(l, f.lo, f.hi)],
                       default=INF)
        if isinstance(f, F.Surround):
            a, b = f.left, f.right
            bad = F.Not(F.Or(a, b))
            v = min(r(a, l, t), -r(F.Reach(a, bad, f.lo, f.hi), l, t))
            if not math.isinf(f.hi):
                v = min(v, -r(F.Escape(a, f.hi, INF), l, t))
            return v
        raise TypeError(f)


# -- clustering / trees -------------------------------------------------------


def complete_linkage_merges(points):
    """Naive complete linkage returning (members_a, members_b, height) per merge.

    Cluster distance is recomputed from the raw points every step.
    """
    pts = np.asarray(points, dtype=float)
    clusters = [frozenset([i]) for i in range(len(pts))]
    merges = []
    while len(clusters) > 1:
        best = None
        for a, b in itertools.combinations(range(len(clusters)), 2):
            d = max(
                float(np.sqrt(((pts[i] - pts[j]) ** 2).sum()))
                for i in clusters[a] for j in clusters[b]
            )
            if best is None or d < best[0]:
                best = (d, a, b)
        d, a, b = best
        merges.append((clusters[a], clusters[b], d))
        merged = clusters[a] | clusters[b]
        clusters = [c for k, c in enumerate(clusters) if k not in (a, b)] + [merged]
    return merges


def silhouette_ref(points, labels):
    pts = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    n = len(pts)
    s = []
    for i in range(n):
        own = [j for j in range(n) if labels[j] == labels[i] and j != i]
        if not own:
            s.append(0.0)
            continue
        dist = lambda j: math.dist(pts[i], pts[j])  # noqa: E731
        a = sum(dist(j) for j in own) / len(own)
        b = min(
            sum(dist(j) for j in range(n) if labels[j] == c) / sum(labels == c)
            for c in set(labels.tolist()) if c != labels[i]
        )
        s.append((b - a) / max(a, b) if max(a, b) > 0 else 0.0)
    return sum(s) / n


def gini(labels):
    if len(labels) == 0:
        return 0.0
    _, counts = np.unique(labels, return_counts=True)
    p = counts / counts.sum()
    return 1.0 - float((p ** 2).sum())


def best_split_exhaustive(X, y):
    """Lowest weighted-Gini axis split over every midpoint, ties to (feature, threshold)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    best = None
    for f in range(X.shape[1]):
        vals = sorted(set(X[:, f].tolist()))
        for lo, hi in zip(vals, vals[1:]):
            t = (lo + hi) / 2
            left, right = y[X[:, f] < t], y[X[:, f] >= t]
            score = (len(left) * gini(left) + len(right) * gini(right)) / len(y)
            cand = (score, f, t)
            if best is None or cand < best:
                best = cand
    return best
