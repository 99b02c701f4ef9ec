import json
import warnings

import numpy as np
import pytest

from oracles import complete_linkage_merges, silhouette_ref
from strel_miner.clustering import (
    ahc_complete,
    choose_k,
    cut,
    linkage,
    normalize,
    silhouette,
    write_clusters_csv,
    write_silhouette_json,
)
from strel_miner.errors import ConfigError


def member_sets(merges, n):
    members = {i: frozenset([i]) for i in range(n)}
    out = []
    for m in merges:
        a, b = members.pop(m.a), members.pop(m.b)
        members[m.new] = a | b
        out.append(({a, b}, m.height, m.size))
    return out


def partition(labels):
    groups = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), set()).add(i)
    return {frozenset(g) for g in groups.values()}


def blobs(rng, centers, n_each, scale):
    return np.vstack([rng.normal(c, scale, size=(n_each, len(c))) for c in centers])


# -- linkage --------------------------------------------------------------------------


def test_linkage_matches_naive_oracle():
    rng = np.random.default_rng(0)
    for _ in range(60):
        n, d = int(rng.integers(2, 12)), int(rng.integers(1, 4))
        X = rng.uniform(0, 10, size=(n, d))
        ours = member_sets(linkage(X), n)
        ref = complete_linkage_merges(X)
        assert len(ours) == len(ref) == n - 1
        for (pair, h, size), (a, b, href) in zip(ours, ref):
            assert pair == {a, b}
            assert h == pytest.approx(href, rel=1e-12)
            assert size == len(a | b)


def test_linkage_agrees_with_scipy():
    from scipy.cluster.hierarchy import linkage as sp_linkage

    rng = np.random.default_rng(1)
    for _ in range(20):
        X = rng.normal(size=(int(rng.integers(3, 25)), 2))
        ours = np.array([m.height for m in linkage(X)])
        assert np.allclose(ours, sp_linkage(X, method="complete")[:, 2], rtol=1e-12)


def test_heights_never_decrease():
    rng = np.random.default_rng(2)
    for _ in range(40):
        h = [m.height for m in linkage(rng.normal(size=(int(rng.integers(2, 30)), 3)))]
        assert all(x <= y for x, y in zip(h, h[1:]))


def test_ties_merge_smallest_id_pair_first():
    # four corners of a unit square: every side is a tie at distance 1
    X = [[0, 0], [1, 0], [0, 1], [1, 1]]
    m = linkage(X)
    assert (m[0].a, m[0].b, m[0].new) == (0, 1, 4)
    assert (m[1].a, m[1].b, m[1].new) == (2, 3, 5)
    assert (m[2].a, m[2].b) == (4, 5)


# -- cutting ----------------------------------------------------------------------------


def test_extreme_k():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(7, 2))
    assert ahc_complete(X, 7).labels.tolist() == [1, 2, 3, 4, 5, 6, 7]
    assert ahc_complete(X, 1).labels.tolist() == [1] * 7
    with pytest.raises(ConfigError):
        ahc_complete(X, 0)
    with pytest.raises(ConfigError):
        ahc_complete(X, 8)


def test_two_triads():
    X = [[0, 0], [10, 10], [0.1, 0], [10, 10.2], [0, 0.1], [10.1, 10]]
    res = ahc_complete(X, 2, normalization=False, ids=list("abcdef"))
    assert res.labels.tolist() == [1, 2, 1, 2, 1, 2]
    assert res.as_dict() == {"a": 1, "b": 2, "c": 1, "d": 2, "e": 1, "f": 2}


def test_labels_are_numbered_by_first_member():
    X = [[10], [0], [10.1], [0.1]]
    assert ahc_complete(X, 2, normalization=False).labels.tolist() == [1, 2, 1, 2]


def test_partition_invariant_under_permutation():
    rng = np.random.default_rng(4)
    for _ in range(30):
        n = int(rng.integers(3, 15))
        X = rng.uniform(size=(n, 2))
        k = int(rng.integers(1, n + 1))
        base = partition(ahc_complete(X, k).labels)
        perm = rng.permutation(n)
        shuffled = ahc_complete(X[perm], k).labels
        # row i of the shuffled set is original point perm[i]
        assert {frozenset(int(perm[i]) for i in g) for g in partition(shuffled)} == base


def test_cut_is_nested():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(12, 2))
    merges = linkage(X)
    for k in range(1, 12):
        fine, coarse = partition(cut(merges, 12, k + 1)), partition(cut(merges, 12, k))
        assert all(any(f <= c for c in coarse) for f in fine)


# -- normalisation ------------------------------------------------------------------------


def test_normalisation_makes_scaling_irrelevant():
    rng = np.random.default_rng(6)
    X = rng.uniform(size=(15, 2))
    Y = X * [1000.0, 0.01] + [5.0, -3.0]
    for k in (2, 3, 4):
        assert ahc_complete(X, k).labels.tolist() == ahc_complete(Y, k).labels.tolist()


def test_normalisation_range_and_constant_columns():
    X = np.array([[1.0, 5.0, 2.0], [3.0, 5.0, 4.0], [2.0, 5.0, 8.0]])
    with pytest.warns(UserWarning, match="zero-variance"):
        Z = normalize(X)
    assert Z.shape == (3, 2)
    assert Z.min(axis=0).tolist() == [0.0, 0.0] and Z.max(axis=0).tolist() == [1.0, 1.0]
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        normalize(X[:, [0, 2]])


def test_bad_points_rejected():
    with pytest.raises(ConfigError):
        ahc_complete([[0.0], [np.nan]], 1)


# -- silhouette ---------------------------------------------------------------------------


def test_silhouette_matches_reference_and_sklearn():
    from sklearn.metrics import silhouette_score

    rng = np.random.default_rng(7)
    for _ in range(40):
        n = int(rng.integers(4, 30))
        X = rng.normal(size=(n, 2))
        k = int(rng.integers(2, min(n, 6)))
        labels = ahc_complete(X, k, normalization=False).labels
        ours = silhouette(X, labels)
        assert ours == pytest.approx(silhouette_ref(X, labels), abs=1e-12)
        assert ours == pytest.approx(silhouette_score(X, labels), abs=1e-12)


def test_silhouette_of_separated_blobs_is_high():
    rng = np.random.default_rng(8)
    X = blobs(rng, [(0, 0), (10, 0)], 25, 0.3)
    labels = ahc_complete(X, 2).labels
    assert silhouette(X, labels) > 0.9


def test_silhouette_of_identical_points_is_not_positive():
    X = np.ones((6, 2))
    assert silhouette(X, [1, 1, 1, 2, 2, 2]) <= 0.0
    with pytest.raises(ConfigError):
        silhouette(X, [1] * 6)


def test_choose_k_finds_three_blobs(tmp_path):
    rng = np.random.default_rng(9)
    X = blobs(rng, [(0, 0), (8, 0), (4, 7)], 20, 0.4)
    k, scores = choose_k(X, 2, 8)
    assert k == 3
    assert set(scores) == set(range(2, 9))
    assert scores[3] == max(scores.values())
    with pytest.raises(ConfigError):
        choose_k(X, 1, 4)
    with pytest.raises(ConfigError):
        choose_k(X[:3], 2, 5)

    p = tmp_path / "sil.json"
    write_silhouette_json(p, scores, k)
    raw = json.loads(p.read_text())
    assert raw["chosen_k"] == 3 and raw["fixed"] is False and len(raw["scores"]) == 7


def test_clusters_csv(tmp_path):
    res = ahc_complete([[0.0], [0.1], [5.0]], 2, ids=["x", "y", "z"])
    p = tmp_path / "c.csv"
    write_clusters_csv(p, res)
    assert p.read_text() == "location_id,cluster\nx,1\ny,1\nz,2\n"
