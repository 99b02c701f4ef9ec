import json

import numpy as np
import pytest

from oracles import best_split_exhaustive
from randgen import (
    BSS_LABELS,
    BSS_POINTS,
    BSS_TEMPLATE,
    overlap_dataset,
    random_box_dataset,
)
from strel_miner.boxtree import (
    DecisionTree,
    box_literals,
    box_to_formula,
    cluster_formulas,
    fit_tree,
    formula_length,
    kfold_cv,
    number_formatter,
    paths_to_boxes,
    prune_search,
    write_formula_report,
    write_tree_json,
)
from strel_miner.errors import ConfigError
from strel_miner.formula import walk
from strel_miner.parser import parse
from strel_miner.pstrel import PstrelTemplate

UNIT_TEMPLATES = {
    1: "F[0,$a] x > 0",
    2: "F[0,$a] x > $c",
    3: "somewhere[0,$s](F[0,$a] x > $c)",
}


def unit_template(d):
    text = UNIT_TEMPLATES[d]
    names = [p for p in ("s", "a", "c") if "$" + p in text]
    return PstrelTemplate.from_formula(text, bounds={n: (0, 1) for n in names})


def bss_template():
    return PstrelTemplate.from_formula(BSS_TEMPLATE, order=["d", "tau"],
                                       bounds={"tau": (0, 50), "d": (0, 2100)})


# -- tree fitting -----------------------------------------------------------------------


def test_pure_labels_give_single_leaf():
    tree = fit_tree([[1.0, 2.0], [3.0, 4.0]], [2, 2])
    assert tree.root.is_leaf and tree.root.label == 2 and tree.depth == 0


def test_root_split_matches_exhaustive_search():
    rng = np.random.default_rng(0)
    checked = 0
    for _ in range(200):
        X, y = random_box_dataset(rng)
        X = np.round(X, 1)  # repeated values exercise the distinct-value midpoints
        ref = best_split_exhaustive(X, y)
        tree = fit_tree(X, y, max_depth=1)
        if tree.root.is_leaf:
            # no split, or none that lowers the impurity
            parent = 1.0 - sum((np.mean(y == c)) ** 2 for c in np.unique(y))
            assert ref is None or ref[0] >= parent - 1e-12
            continue
        assert (tree.root.feature, tree.root.threshold) == pytest.approx((ref[1], ref[2]))
        checked += 1
    assert checked > 100


def test_unpruned_tree_fits_training_data_exactly():
    rng = np.random.default_rng(1)
    for _ in range(100):
        X, y = random_box_dataset(rng)
        assert (fit_tree(X, y).predict(X) == y).all()


def test_majority_tie_goes_to_smallest_label():
    tree = fit_tree([[0.0], [0.0], [0.0], [0.0]], [3, 2, 3, 2])
    assert tree.root.is_leaf and tree.root.label == 2


def test_max_depth_is_respected():
    rng = np.random.default_rng(2)
    X, y = rng.uniform(size=(80, 2)), rng.integers(1, 4, 80)
    for d in (1, 2, 3):
        assert fit_tree(X, y, d).depth <= d


def test_fit_errors():
    with pytest.raises(ConfigError):
        fit_tree(np.empty((0, 2)), [])
    with pytest.raises(ConfigError):
        fit_tree([[1.0]], [1, 2])


# -- cross-validation and pruning -------------------------------------------------------


def test_kfold_on_identical_points_is_perfect():
    assert kfold_cv(np.ones((20, 2)), [4] * 20, None) == 1.0


def test_kfold_random_labels_near_majority_rate():
    rng = np.random.default_rng(3)
    X = rng.uniform(size=(300, 2))
    y = (rng.random(300) < 0.7).astype(int) + 1
    acc = kfold_cv(X, y, 1, K=5, seed=0)
    assert abs(acc - 0.7) < 0.1


def test_kfold_is_deterministic_and_checks_k():
    X, y = overlap_dataset()
    assert kfold_cv(X, y, 2, seed=5) == kfold_cv(X, y, 2, seed=5)
    with pytest.raises(ConfigError):
        kfold_cv(X, y, 2, K=1)


def test_prune_picks_depth_one_for_separable_data():
    X = [[0.0], [0.1], [0.2], [0.3], [0.4], [1.0], [1.1], [1.2], [1.3], [1.4]]
    y = [1] * 5 + [2] * 5
    res = prune_search(X, y, N=5, K=5)
    assert res.depth == 1 and res.tree.n_leaves == 2 and res.cv_accuracy == {1: 1.0}


def test_prune_with_zero_threshold_stops_at_depth_one():
    X, y = overlap_dataset()
    assert prune_search(X, y, acc_threshold=0.0).depth == 1


def test_prune_reports_none_when_unreachable():
    rng = np.random.default_rng(4)
    X, y = rng.uniform(size=(40, 2)), rng.integers(1, 3, 40)
    res = prune_search(X, y, N=3, acc_threshold=0.99)
    assert res.tree is None and res.depth is None and set(res.cv_accuracy) == {1, 2, 3}
    with pytest.raises(ConfigError):
        prune_search(X, y, N=0)


def test_pruning_shrinks_overlap_dataset():
    X, y = overlap_dataset()
    t = overlap_template()
    assert len([b for bs in paths_to_boxes(fit_tree(X, y), t).values() for b in bs]) >= 8
    res = prune_search(X, y, N=10, K=5, acc_threshold=0.9)
    assert res.tree.n_leaves <= 4 and res.cv_accuracy[res.depth] > 0.9


def test_refit_tree_reaches_the_threshold_when_a_depth_qualifies():
    rng = np.random.default_rng(9)
    found = 0
    for seed in range(12):
        X, y = overlap_dataset(seed=seed)
        for thr in (0.7, 0.8, 0.9):
            res = prune_search(X, y, acc_threshold=thr, seed=int(rng.integers(100)))
            if res.tree is not None:
                assert (res.tree.predict(X) == y).mean() >= thr
                found += 1
    assert found > 20


def overlap_template():
    return PstrelTemplate.from_formula("F[0,$a] x > $c", bounds={"a": (-1, 2), "c": (-1, 2)})


# -- boxes ------------------------------------------------------------------------------


def test_path_boxes_keep_tightest_bounds():
    # x0 >= 3, then x0 >= 5, then x1 < 2 on the right-right-left path
    X = [[0, 0], [4, 0], [6, 1], [6, 3]]
    tree = fit_tree(X, [1, 2, 3, 1])
    t = PstrelTemplate.from_formula("F[0,$a] x > $c", bounds={"a": (0, 10), "c": (0, 4)})
    boxes = paths_to_boxes(tree, t)
    box3 = boxes[3][0]
    assert box3.lo.tolist() == [5.0, 0.0] and box3.hi.tolist() == [10.0, 2.0]
    assert box3.lo_cut.tolist() == [True, False] and box3.hi_cut.tolist() == [False, True]
    assert sum(len(b) for b in boxes.values()) == tree.n_leaves


def test_boxes_tile_the_parameter_space():
    rng = np.random.default_rng(5)
    for _ in range(5):
        X, y = random_box_dataset(rng)
        d = X.shape[1]
        t = unit_template(d)
        tree = fit_tree(X, y)
        boxes = [b for bs in paths_to_boxes(tree, t).values() for b in bs]
        Q = rng.uniform(size=(100_000, d))
        member = np.array([b.contains(Q) for b in boxes])
        assert (member.sum(axis=0) == 1).all()
        labels = np.array([b.label for b in boxes])[member.argmax(axis=0)]
        assert (labels == tree.predict(Q)).all()


def test_literal_count_is_bounded():
    rng = np.random.default_rng(6)
    for _ in range(100):
        X, y = random_box_dataset(rng)
        t = unit_template(X.shape[1])
        for bs in paths_to_boxes(fit_tree(X, y), t).values():
            for b in bs:
                assert len(box_literals(b, t)) <= len(t.params) + 1


def test_full_domain_box_is_true():
    t = unit_template(2)
    tree = fit_tree([[0.5, 0.5]], [1])
    (box,) = paths_to_boxes(tree, t)[1]
    assert box_literals(box, t) == [] and box_to_formula(box, t) == "true"
    assert cluster_formulas(tree, t)[1].param_text == "true"


# -- formulas ---------------------------------------------------------------------------


def test_bss_cluster_formulas():
    # [PAPER] BSS scatter fixture: red, orange and green cluster formulas
    t = bss_template()
    tree = fit_tree(BSS_POINTS, BSS_LABELS)
    cf = cluster_formulas(tree, t)
    assert cf[3].param_text == "¬φ(17.09, 2100) ∧ ¬φ(50, 1000.98)"
    assert cf[2].param_text == "φ(50, 1000.98) ∧ ¬φ(17.09, 1000.98)"
    assert cf[1].param_text == "φ(17.09, 2100)"
    for c in cf.values():
        parse(c.dsl_text)
        assert c.contains(BSS_POINTS).tolist() == [lab == c.label for lab in BSS_LABELS]
    assert cf[1].dsl_text.startswith("(G[0,3]") and "17.09" in cf[1].dsl_text


def test_dsl_literal_instantiates_template():
    t = bss_template()
    cf = cluster_formulas(fit_tree(BSS_POINTS, BSS_LABELS), t)
    first = cf[1].dsl_text
    assert parse(first) == t.instantiate({"tau": 17.09, "d": 2100.0})


def test_number_formatting():
    fmt = number_formatter(50 / 256)
    assert fmt(17.09) == "17.09" and fmt(50.0) == "50" and fmt(-0.0001) == "0"
    assert number_formatter(8.2)(1000.975) in ("1000.97", "1000.98")
    assert number_formatter(0.001)(float("inf")) == "inf"


def test_formula_length_counts_literals_and_connectives():
    t = bss_template()
    cf = cluster_formulas(fit_tree(BSS_POINTS, BSS_LABELS), t)
    phi = len(list(walk(t.formula)))
    assert formula_length(cf[1], t) == phi
    assert formula_length(cf[3], t) == 2 * (phi + 1) + 1


def test_multi_box_cluster_is_a_disjunction():
    X = [[0.1, 0.1], [0.5, 0.5], [0.9, 0.9]]
    t = unit_template(2)
    cf = cluster_formulas(fit_tree(X, [1, 2, 1]), t)
    assert cf[1].n_boxes == 2
    assert cf[1].param_text.count(" ∨ ") == 1 and cf[1].param_text.startswith("(")
    parse(cf[1].dsl_text)
    assert cf[1].contains(X).tolist() == [True, False, True]


def test_tree_json_and_report(tmp_path):
    t = bss_template()
    tree = fit_tree(BSS_POINTS, BSS_LABELS)
    p = tmp_path / "tree.json"
    write_tree_json(p, tree, t.names)
    raw = json.loads(p.read_text())
    assert raw["root"]["parameter"] in t.names
    back = DecisionTree.from_dict(raw)
    assert (back.predict(BSS_POINTS) == tree.predict(BSS_POINTS)).all()
    assert back.to_dict(t.names) == raw

    r = tmp_path / "formulas.txt"
    write_formula_report(r, cluster_formulas(tree, t), t)
    text = r.read_text()
    assert "[cluster 3]" in text and "¬φ(17.09, 2100) ∧ ¬φ(50, 1000.98)" in text


def test_tree_and_template_must_agree():
    with pytest.raises(ConfigError):
        paths_to_boxes(fit_tree([[0.0], [1.0]], [1, 2]), unit_template(2))
