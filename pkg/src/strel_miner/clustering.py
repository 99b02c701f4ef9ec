"""Complete-linkage agglomerative clustering of parameter valuations."""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Merge:
    """One dendrogram step: clusters ``a`` and ``b`` (a < b) join as ``new`` at ``height``."""

    a: int
    b: int
    new: int
    height: float
    size: int


@dataclass
class ClusterAssignment:
    ids: list[str]
    labels: np.ndarray  # values 1..k, aligned with ids
    k: int
    merges: list[Merge]

    def as_dict(self) -> dict[str, int]:
        return {i: int(c) for i, c in zip(self.ids, self.labels)}


def normalize(points, warn: bool = True) -> np.ndarray:
    """Min-max scale every column to [0, 1]; constant columns are dropped."""
    X = np.asarray(points, dtype=float)
    if X.ndim != 2:
        raise ConfigError("points must be a 2-D array")
    lo, hi = X.min(axis=0), X.max(axis=0)
    keep = hi > lo
    if warn and not keep.all():
        warnings.warn(
            f"dropping zero-variance dimensions {np.flatnonzero(~keep).tolist()} before clustering",
            stacklevel=2,
        )
    return (X[:, keep] - lo[keep]) / (hi[keep] - lo[keep])


def _pairwise(X):
    diff = X[:, None, :] - X[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=-1))


def linkage(points) -> list[Merge]:
    """Full complete-linkage dendrogram on Euclidean distances.

    Leaves carry ids ``0..n-1`` and the ``m``-th merge creates id ``n + m``.  Among
    equally close pairs the one with the smallest ``(id, id)`` pair merges first.
    """
    X = np.asarray(points, dtype=float)
    n = len(X)
    D = _pairwise(X)
    np.fill_diagonal(D, np.inf)
    slot_id = np.arange(n)  # cluster id held by each matrix slot
    alive = np.ones(n, dtype=bool)
    size = np.ones(n, dtype=int)
    merges = []
    for m in range(n - 1):
        sub = np.where(alive[:, None] & alive[None, :], D, np.inf)
        h = sub.min()
        ii, jj = np.nonzero(sub == h)
        pairs = sorted({tuple(sorted((int(slot_id[i]), int(slot_id[j])))) for i, j in zip(ii, jj)})
        a, b = pairs[0]
        sa, sb = int(np.flatnonzero(slot_id == a)[0]), int(np.flatnonzero(slot_id == b)[0])
        merges.append(Merge(a, b, n + m, float(h), int(size[sa] + size[sb])))
        # complete linkage: the farthest pair decides
        row = np.maximum(D[sa], D[sb])
        D[sa, :] = row
        D[:, sa] = row
        D[sa, sa] = np.inf
        alive[sb] = False
        slot_id[sa] = n + m
        size[sa] += size[sb]
    return merges


def cut(merges: Sequence[Merge], n: int, k: int) -> np.ndarray:
    """Labels ``1..k`` after replaying the first ``n - k`` merges.

    Labels are numbered by the smallest point index in each cluster.
    """
    members = {i: [i] for i in range(n)}
    for mg in merges[: n - k]:
        members[mg.new] = members.pop(mg.a) + members.pop(mg.b)
    groups = sorted(members.values(), key=min)
    labels = np.empty(n, dtype=int)
    for lab, g in enumerate(groups, start=1):
        labels[g] = lab
    return labels


def _prepare(points, normalization):
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if not np.isfinite(X).all():
        raise ConfigError("points must be finite")
    return normalize(X) if normalization else X


def ahc_complete(points, k: int, normalization: bool = True,
                 ids: Sequence[str] | None = None) -> ClusterAssignment:
    """Cluster ``points`` (rows) into ``k`` groups by complete linkage."""
    X = _prepare(points, normalization)
    n = len(X)
    if not 1 <= k <= n:
        raise ConfigError(f"k must lie in 1..{n}, got {k}")
    merges = linkage(X)
    ids = [str(i) for i in range(n)] if ids is None else list(ids)
    return ClusterAssignment(ids, cut(merges, n, k), k, merges)


def silhouette(points, labels) -> float:
    """Mean silhouette coefficient; points alone in their cluster score 0."""
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    labels = np.asarray(labels)
    uniq = np.unique(labels)
    if len(uniq) < 2:
        raise ConfigError("silhouette needs at least two clusters")
    D = _pairwise(X)
    onehot = labels[:, None] == uniq[None, :]
    counts = onehot.sum(axis=0)
    sums = D @ onehot  # [n, clusters] summed distance to each cluster
    own = np.searchsorted(uniq, labels)
    own_count = counts[own]
    a = np.divide(sums[np.arange(len(X)), own], own_count - 1,
                  out=np.zeros(len(X)), where=own_count > 1)
    means = sums / counts
    means[np.arange(len(X)), own] = np.inf
    b = means.min(axis=1)
    denom = np.maximum(a, b)
    s = np.divide(b - a, denom, out=np.zeros(len(X)), where=denom > 0)
    s[own_count == 1] = 0.0
    return float(s.mean())


def choose_k(points, kmin: int = 2, kmax: int = 10,
             normalization: bool = True) -> tuple[int, dict[int, float]]:
    """Number of clusters in ``[kmin, kmax]`` with the best silhouette (ties: smallest k).

    Returns the chosen ``k`` and the score for every candidate.
    """
    X = _prepare(points, normalization)
    n = len(X)
    if not 2 <= kmin <= kmax <= n:
        raise ConfigError(f"need 2 <= kmin <= kmax <= {n}, got [{kmin}, {kmax}]")
    merges = linkage(X)
    scores = {k: silhouette(X, cut(merges, n, k)) for k in range(kmin, kmax + 1)}
    best = max(scores.values())
    return min(k for k, s in scores.items() if s == best), scores


def write_clusters_csv(path, assignment: ClusterAssignment) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["location_id", "cluster"])
        for lid, lab in zip(assignment.ids, assignment.labels):
            writer.writerow([lid, int(lab)])


def write_silhouette_json(path, scores: dict[int, float], chosen: int, fixed: bool = False) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"chosen_k": chosen, "fixed": fixed,
                   "scores": {str(k): v for k, v in sorted(scores.items())}}, fh, indent=2)
