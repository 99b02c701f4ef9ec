"""Decision trees over parameter valuations, their hyperboxes, and cluster formulas.

Splits are axis-aligned: a sample goes left when ``x[f] < t`` and right when
``x[f] >= t``.  Every root-to-leaf path is therefore a half-open box, and the
leaves tile the parameter space without overlap.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError
from .formula import Param, format_number, size, to_text
from .pstrel import PstrelTemplate

_TIE = 1e-12


@dataclass
class Node:
    label: int
    n_samples: int
    depth: int
    feature: int | None = None
    threshold: float | None = None
    left: "Node | None" = None
    right: "Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass
class DecisionTree:
    root: Node
    n_features: int
    max_depth: int | None

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty(len(X), dtype=int)
        for r, x in enumerate(X):
            node = self.root
            while not node.is_leaf:
                node = node.left if x[node.feature] < node.threshold else node.right
            out[r] = node.label
        return out

    def leaves(self) -> list[Node]:
        out, stack = [], [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node)
            else:
                stack += [node.right, node.left]
        return out

    @property
    def n_leaves(self) -> int:
        return len(self.leaves())

    @property
    def depth(self) -> int:
        return max(leaf.depth for leaf in self.leaves())

    def to_dict(self, names: Sequence[str] | None = None) -> dict:
        def enc(node):
            if node.is_leaf:
                return {"leaf": True, "label": node.label, "n_samples": node.n_samples}
            return {
                "leaf": False,
                "feature": node.feature,
                "parameter": None if names is None else names[node.feature],
                "threshold": node.threshold,
                "n_samples": node.n_samples,
                "left": enc(node.left),
                "right": enc(node.right),
            }

        return {"n_features": self.n_features, "max_depth": self.max_depth, "root": enc(self.root)}

    @classmethod
    def from_dict(cls, raw: Mapping) -> "DecisionTree":
        def dec(d, depth):
            if d["leaf"]:
                return Node(int(d["label"]), int(d["n_samples"]), depth)
            return Node(0, int(d["n_samples"]), depth, int(d["feature"]), float(d["threshold"]),
                        dec(d["left"], depth + 1), dec(d["right"], depth + 1))

        return cls(dec(raw["root"], 0), int(raw["n_features"]), raw["max_depth"])


def _majority(y) -> int:
    vals, counts = np.unique(y, return_counts=True)
    return int(vals[np.argmax(counts)])  # unique() sorts, argmax takes the first max


def _impurity_mass(counts) -> float:
    """``n * gini`` for a vector of class counts."""
    n = counts.sum()
    return 0.0 if n == 0 else float(n - (counts ** 2).sum() / n)


def best_split(X, y) -> tuple[float, int, float] | None:
    """``(n * weighted gini, feature, threshold)`` of the best midpoint split, or None."""
    classes, yi = np.unique(y, return_inverse=True)
    n = len(y)
    best = None
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        onehot = np.zeros((n, len(classes)))
        onehot[np.arange(n), yi[order]] = 1.0
        left = np.cumsum(onehot, axis=0)
        total = left[-1]
        cuts = np.flatnonzero(xs[1:] > xs[:-1])  # split after position c
        for c in cuts:
            lc = left[c]
            score = _impurity_mass(lc) + _impurity_mass(total - lc)
            if best is None or score < best[0] - _TIE:
                best = (score, f, 0.5 * (xs[c] + xs[c + 1]))
    return best


def fit_tree(points, labels, max_depth: int | None = None) -> DecisionTree:
    """Greedy CART with Gini impurity.

    Candidate thresholds are midpoints of consecutive distinct values.  Ties go
    to the lowest feature, then the lowest threshold.  A node becomes a leaf when
    pure, at ``max_depth``, or when no split lowers the impurity; its label is the
    majority label (ties: smallest label).
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(labels).astype(int)
    if len(X) == 0 or len(X) != len(y):
        raise ConfigError("need at least one point and one label per point")

    def grow(idx, depth):
        node = Node(_majority(y[idx]), len(idx), depth)
        if len(np.unique(y[idx])) == 1 or (max_depth is not None and depth >= max_depth):
            return node
        split = best_split(X[idx], y[idx])
        parent = _impurity_mass(np.unique(y[idx], return_counts=True)[1])
        if split is None or split[0] >= parent - _TIE:
            return node
        _, f, t = split
        mask = X[idx, f] < t
        node.feature, node.threshold = f, float(t)
        node.left = grow(idx[mask], depth + 1)
        node.right = grow(idx[~mask], depth + 1)
        return node

    return DecisionTree(grow(np.arange(len(X)), 0), X.shape[1], max_depth)


def kfold_cv(points, labels, depth: int | None, K: int = 5, seed: int = 0) -> float:
    """Mean held-out accuracy over ``K`` shuffled folds."""
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(labels).astype(int)
    if not 2 <= K <= len(X):
        raise ConfigError(f"K must lie in 2..{len(X)}, got {K}")
    perm = np.random.default_rng(seed).permutation(len(X))
    accs = []
    for fold in np.array_split(perm, K):
        train = np.setdiff1d(perm, fold)
        tree = fit_tree(X[train], y[train], depth)
        accs.append(float((tree.predict(X[fold]) == y[fold]).mean()))
    return float(np.mean(accs))


@dataclass
class PruneResult:
    tree: DecisionTree | None
    depth: int | None
    cv_accuracy: dict[int, float]


def prune_search(points, labels, N: int = 10, K: int = 5, acc_threshold: float = 0.90,
                 seed: int = 0) -> PruneResult:
    """Smallest depth in ``1..N`` whose cross-validated accuracy exceeds the threshold.

    The returned tree is refit at that depth on all points; ``tree`` is None when
    no depth qualifies.
    """
    if N < 1:
        raise ConfigError("N must be >= 1")
    scores = {}
    for d in range(1, N + 1):
        scores[d] = kfold_cv(points, labels, d, K, seed)
        if scores[d] > acc_threshold:
            return PruneResult(fit_tree(points, labels, d), d, scores)
    return PruneResult(None, None, scores)


# -- boxes --------------------------------------------------------------------


@dataclass
class HyperBox:
    """Axis-aligned box ``[lo, hi]`` per parameter.

    ``lo_cut[i]`` / ``hi_cut[i]`` mark sides that come from a tree threshold; the
    other sides are template bounds and do not constrain membership.
    """

    label: int
    lo: np.ndarray
    hi: np.ndarray
    lo_cut: np.ndarray
    hi_cut: np.ndarray

    def contains(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        ok = np.ones(len(X), dtype=bool)
        for i in range(len(self.lo)):
            if self.lo_cut[i]:
                ok &= X[:, i] >= self.lo[i]
            if self.hi_cut[i]:
                ok &= X[:, i] < self.hi[i]
        return ok


def _bounds(template: PstrelTemplate):
    template._require_bounds()
    return (np.array([p.lo for p in template.params], dtype=float),
            np.array([p.hi for p in template.params], dtype=float))


def paths_to_boxes(tree: DecisionTree, template: PstrelTemplate) -> dict[int, list[HyperBox]]:
    """Group the leaf boxes of ``tree`` by label, keeping the tightest bound per side."""
    lo0, hi0 = _bounds(template)
    if tree.n_features != len(lo0):
        raise ConfigError("tree and template disagree on the number of parameters")
    out: dict[int, list[HyperBox]] = {}

    def go(node, lo, hi, lo_cut, hi_cut):
        if node.is_leaf:
            assert (lo <= hi).all(), "empty region on a tree path"
            out.setdefault(node.label, []).append(HyperBox(node.label, lo, hi, lo_cut, hi_cut))
            return
        f, t = node.feature, node.threshold
        h, hc = hi.copy(), hi_cut.copy()
        if not hi_cut[f] or t < hi[f]:
            h[f], hc[f] = t, True
        go(node.left, lo, h, lo_cut, hc)
        lw, lc = lo.copy(), lo_cut.copy()
        if not lo_cut[f] or t > lo[f]:
            lw[f], lc[f] = t, True
        go(node.right, lw, hi, lc, hi_cut)

    k = len(lo0)
    go(tree.root, lo0.copy(), hi0.copy(), np.zeros(k, bool), np.zeros(k, bool))
    return dict(sorted(out.items()))


@dataclass(frozen=True)
class Literal:
    """``phi(values)`` or its negation."""

    negated: bool
    values: tuple[float, ...]


def box_literals(box: HyperBox, template: PstrelTemplate) -> list[Literal]:
    """Most-permissive corner plus one negated literal per threshold-derived restrictive side.

    The corner literal is omitted when it equals the template's globally most
    permissive instance, which every projected location satisfies.
    """
    plus = np.array([p.polarity == "+" for p in template.params])
    corner = np.where(plus, box.hi, box.lo)
    glob = np.array([template.most_permissive()[n] for n in template.names])
    lits = []
    if not np.array_equal(corner, glob):
        lits.append(Literal(False, tuple(float(v) for v in corner)))
    for i in range(len(corner)):
        restrictive_cut = box.lo_cut[i] if plus[i] else box.hi_cut[i]
        if restrictive_cut:
            moved = corner.copy()
            moved[i] = box.lo[i] if plus[i] else box.hi[i]
            lits.append(Literal(True, tuple(float(v) for v in moved)))
    return lits


def number_formatter(delta: float):
    """Print numbers at the resolution implied by ``delta`` (two extra digits)."""
    decimals = max(0, 2 - math.floor(math.log10(delta)))

    def fmt(x):
        if isinstance(x, float) and math.isinf(x):
            return "inf"
        s = f"{x:.{decimals}f}"
        if "." in s:
            s = s.rstrip("0").rstrip(".")
        return "0" if s in ("-0", "") else s

    return fmt


def _formatters(template):
    return [number_formatter(p.delta) for p in template.params]


def literal_text(lit: Literal, template: PstrelTemplate) -> str:
    fmts = _formatters(template)
    body = "φ(" + ", ".join(f(v) for f, v in zip(fmts, lit.values)) + ")"
    return ("¬" if lit.negated else "") + body


def literal_formula(lit: Literal, template: PstrelTemplate) -> str:
    """Literal expanded to DSL text, parameters printed at template resolution."""
    fmts = dict(zip(template.names, _formatters(template)))
    values = dict(zip(template.names, lit.values))

    def num(x):
        if isinstance(x, Param):
            return fmts[x.name](values[x.name])
        return format_number(x)

    text = to_text(template.formula, num)
    return f"!({text})" if lit.negated else f"({text})"


def box_to_formula(box: HyperBox, template: PstrelTemplate) -> str:
    """Box formula in parameter form, e.g. ``¬φ(17.09, 2100) ∧ ¬φ(50, 1000.98)``."""
    lits = box_literals(box, template)
    return " ∧ ".join(literal_text(lit, template) for lit in lits) if lits else "true"


@dataclass
class ClusterFormula:
    label: int
    boxes: list[HyperBox]
    literals: list[list[Literal]] = field(default_factory=list)
    param_text: str = ""
    dsl_text: str = ""

    @property
    def n_boxes(self) -> int:
        return len(self.boxes)

    def contains(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.any([b.contains(X) for b in self.boxes], axis=0)


def cluster_formulas(tree: DecisionTree, template: PstrelTemplate) -> dict[int, ClusterFormula]:
    """One disjunction of box conjunctions per leaf label."""
    out = {}
    for label, boxes in paths_to_boxes(tree, template).items():
        lits = [box_literals(b, template) for b in boxes]
        param_parts, dsl_parts = [], []
        for ls in lits:
            if not ls:
                param_parts.append("true")
                dsl_parts.append("true")
                continue
            param_parts.append(" ∧ ".join(literal_text(lit, template) for lit in ls))
            dsl_parts.append(" & ".join(literal_formula(lit, template) for lit in ls))
        wrap = len(boxes) > 1
        param_text = " ∨ ".join(f"({p})" if wrap else p for p in param_parts)
        dsl_text = " | ".join(f"({p})" if wrap else p for p in dsl_parts)
        out[label] = ClusterFormula(label, boxes, lits, param_text, dsl_text)
    return out


def formula_length(cf: ClusterFormula, template: PstrelTemplate) -> int:
    """Node count of the cluster formula, counting each literal's template as ``|phi|``."""
    phi = size(template.formula)
    total = 0
    for ls in cf.literals:
        total += sum(phi + lit.negated for lit in ls) + max(len(ls) - 1, 0)
    return total + max(len(cf.literals) - 1, 0)


def write_tree_json(path, tree: DecisionTree, names: Sequence[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(tree.to_dict(names), fh, indent=2)


def write_formula_report(path, formulas: Mapping[int, ClusterFormula],
                         template: PstrelTemplate) -> None:
    lines = [f"template: {template.text or to_text(template.formula)}",
             f"parameters: {', '.join(template.names)}", ""]
    for label, cf in formulas.items():
        lines.append(f"[cluster {label}]  boxes: {cf.n_boxes}")
        for b in cf.boxes:
            fmts = _formatters(template)
            parts = [f"{n} in [{f(lo)}, {f(hi)}]"
                     for n, f, lo, hi in zip(template.names, fmts, b.lo, b.hi)]
            lines.append("  box: " + ", ".join(parts))
        lines.append("  parameter form: " + cf.param_text)
        lines.append("  formula: " + cf.dsl_text)
        lines.append("")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
