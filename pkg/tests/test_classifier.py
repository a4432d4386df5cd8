import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from satotate.classifier import (
    Dataset,
    NBModel,
    confusion_matrix,
    evaluate,
    learning_curve,
    matthews_phi,
    predict,
    predict_many,
    report_from_confusion,
    split,
    train,
)

# five-way real-curve confusion matrix (rows true): one class-3 case predicted as class 5
REFERENCE_M = np.array(
    [
        [24, 0, 0, 0, 0],
        [0, 9, 0, 0, 0],
        [0, 0, 3, 0, 1],
        [0, 0, 0, 17, 0],
        [0, 0, 0, 0, 17],
    ]
)


def blobs(n=100, d=3, sep=10.0, seed=0, k=2):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(sep * c, 1.0, (n, d)) for c in range(k)])
    y = np.repeat([f"c{c}" for c in range(k)], n)
    return Dataset(X, y)


# ------------------------------------------------------------------- data


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.zeros((3, 2)), ["a", "b"])
    with pytest.raises(ValueError):
        Dataset(np.array([[np.nan], [1.0]]), ["a", "b"])
    with pytest.raises(ValueError):
        Dataset(np.zeros((2, 0)), ["a", "b"])


# ------------------------------------------------------------------ split


def test_split_sizes_5000():
    X = np.arange(5000.0)[:, None]
    y = np.repeat(["a", "b"], 2500)
    tr, va = split(Dataset(X, y), 0.2, seed=3)
    assert len(tr) == 1000 and len(va) == 4000
    for c in ("a", "b"):
        assert np.sum(tr.labels == c) == 500


def test_split_partition_and_determinism():
    ds = blobs(n=37, seed=1)
    tr, va = split(ds, 0.2, seed=9)
    both = np.concatenate([tr.features[:, 0], va.features[:, 0]])
    assert sorted(both) == sorted(ds.features[:, 0])
    tr2, va2 = split(ds, 0.2, seed=9)
    assert np.array_equal(tr.features, tr2.features) and np.array_equal(va.labels, va2.labels)


def test_split_small_class_kept_in_training():
    ds = Dataset(np.arange(6.0)[:, None], ["a", "a", "a", "a", "a", "b"])
    with pytest.warns(UserWarning):
        tr, va = split(ds, 0.2, seed=0)
    assert "b" in tr.labels and "b" not in va.labels


@pytest.mark.parametrize("f", [0, 1, -0.1, 1.5])
def test_split_fraction_validation(f):
    with pytest.raises(ValueError):
        split(blobs(), f, seed=0)


# ------------------------------------------------------------------ train


def test_constant_features_separate_via_floor():
    X = np.array([[0.0, 1.0]] * 5 + [[3.0, -1.0]] * 5)
    y = ["a"] * 5 + ["b"] * 5
    model = train(Dataset(X, y))
    assert model.variance_floor > 0 and np.all(model.variances >= model.variance_floor)
    labels, _ = predict_many(model, X)
    assert labels == y


def test_priors_balanced_and_sum_to_one():
    model = train(blobs(n=50, k=4))
    assert np.allclose(model.priors, 0.25) and math.isclose(model.priors.sum(), 1.0)


def test_training_row_permutation_bit_identical():
    ds = blobs(n=40, seed=4)
    perm = np.random.default_rng(0).permutation(len(ds))
    a = train(ds)
    b = train(ds.subset(perm))
    assert a.means.tobytes() == b.means.tobytes()
    assert a.variances.tobytes() == b.variances.tobytes()
    k1 = train(ds, "kde")
    k2 = train(ds.subset(perm), "kde")
    assert k1.log_density.tobytes() == k2.log_density.tobytes()


def test_single_class_degenerate():
    model = train(Dataset(np.ones((4, 2)), ["a"] * 4))
    assert model.degenerate
    assert predict(model, [1.0, 1.0])[0] == "a"


def test_unknown_likelihood():
    with pytest.raises(ValueError):
        train(blobs(), "laplace")


# ---------------------------------------------------------------- predict


@pytest.mark.parametrize("likelihood", ["gaussian", "kde"])
def test_posterior_sums_to_one(likelihood):
    ds = blobs(n=60, d=4, sep=1.0, seed=2, k=3)
    model = train(ds, likelihood)
    _, post = predict_many(model, ds.features)
    assert np.all(np.abs(post.sum(axis=1) - 1) <= 1e-12)
    _, d = predict(model, ds.features[0])
    assert abs(sum(d.values()) - 1) <= 1e-12


def test_point_at_class_mean_wins():
    ds = blobs(n=50, sep=2.0, seed=3)
    model = train(ds)
    # force shared variances so the comparison is symmetric
    model.variances[:] = model.variances.mean(axis=0)
    for k, c in enumerate(model.classes):
        assert predict(model, model.means[k])[0] == c


def test_predict_dimension_mismatch():
    model = train(blobs(d=3))
    with pytest.raises(ValueError):
        predict(model, [1.0, 2.0])
    with pytest.raises(ValueError):
        predict(model, np.zeros((2, 3)))


def test_label_permutation_equivariance():
    ds = blobs(n=40, d=2, sep=1.5, seed=5, k=3)
    rename = {"c0": "z", "c1": "a", "c2": "m"}
    ds2 = Dataset(ds.features, [rename[c] for c in ds.labels])
    p1, _ = predict_many(train(ds), ds.features)
    p2, _ = predict_many(train(ds2), ds.features)
    assert [rename[c] for c in p1] == p2


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from(["gaussian", "kde"]))
def test_column_permutation_invariance(seed, likelihood):
    ds = blobs(n=30, d=5, sep=1.0, seed=seed % 1000)
    perm = np.random.default_rng(seed).permutation(5)
    m1 = train(ds, likelihood)
    m2 = train(Dataset(ds.features[:, perm], ds.labels), likelihood)
    test = np.random.default_rng(seed + 1).normal(0.5, 1.5, (50, 5))
    j1 = predict_many(m1, test)[1]
    j2 = predict_many(m2, test[:, perm])[1]
    assert np.allclose(j1, j2, rtol=1e-9, atol=1e-12)
    # labels agree wherever the decision is not a floating-point tie
    l1, _ = predict_many(m1, test)
    l2, _ = predict_many(m2, test[:, perm])
    clear = np.abs(j1[:, 0] - j1[:, 1]) > 1e-9
    assert np.array_equal(np.array(l1)[clear], np.array(l2)[clear])


def _gaussian_posterior_bruteforce(X, y, point):
    """Direct evaluation of the NB posterior of class 'a' at ``point``."""
    X = np.asarray(X)
    y = np.asarray(y)
    floor = 1e-9 * X.var(axis=0).max()
    logs = {}
    for c in ("a", "b"):
        Xc = X[y == c]
        mu, var = Xc.mean(axis=0), Xc.var(axis=0) + floor
        ll = math.log(len(Xc) / len(X))
        for j in range(X.shape[1]):
            ll += -0.5 * math.log(2 * math.pi * var[j]) - (point[j] - mu[j]) ** 2 / (2 * var[j])
        logs[c] = ll
    m = max(logs.values())
    return math.exp(logs["a"] - m) / sum(math.exp(v - m) for v in logs.values())


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 2), st.integers(6, 20))
def test_decision_boundary_matches_grid_oracle(seed, d, n):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(0, 1, (n // 2, d)), rng.normal(1.5, 0.7, (n - n // 2, d))])
    y = ["a"] * (n // 2) + ["b"] * (n - n // 2)
    model = train(Dataset(X, y))
    axes = [np.linspace(-3, 4, 41)] * d
    grid = np.array(np.meshgrid(*axes)).reshape(d, -1).T
    labels, post = predict_many(model, grid)
    for pt, lab, pr in zip(grid, labels, post):
        want = _gaussian_posterior_bruteforce(X, y, pt)
        assert pr[0] == pytest.approx(want, abs=1e-9)
        if abs(want - 0.5) > 1e-9:
            assert lab == ("a" if want > 0.5 else "b")


@pytest.mark.parametrize("likelihood", ["gaussian", "kde"])
def test_json_round_trip_bit_identical(likelihood):
    ds = blobs(n=30, d=3, sep=1.0, seed=6, k=3)
    model = train(Dataset(ds.features, ds.labels, ["p2", "p3", "p5"]), likelihood)
    again = NBModel.from_json(model.to_json())
    assert again.feature_names == ["p2", "p3", "p5"]
    test = np.random.default_rng(1).normal(5, 6, (40, 3))
    a, pa = predict_many(model, test)
    b, pb = predict_many(again, test)
    assert a == b and pa.tobytes() == pb.tobytes()


def test_kde_handles_atoms():
    # class "atom" is exactly 0 half the time; both classes have mean 0, variance near 1
    rng = np.random.default_rng(0)
    n, d = 400, 20
    atom = np.where(rng.random((n, d)) < 0.5, 0.0, rng.normal(0, 1.4, (n, d)))
    cont = rng.normal(0, 1.0, (n, d))
    ds = Dataset(np.vstack([atom, cont]), ["atom"] * n + ["cont"] * n)
    tr, va = split(ds, 0.5, seed=0)
    assert evaluate(train(tr, "kde"), va).accuracy > 0.97


# --------------------------------------------------------------- metrics


def test_perfect_confusion():
    r = report_from_confusion(np.diag([5, 3, 2]), ["a", "b", "c"])
    assert r.accuracy == 1.0 and r.phi == 1.0


def test_reference_confusion_matrix():
    r = report_from_confusion(REFERENCE_M, list("12345"))
    assert r.accuracy == pytest.approx(70 / 71)
    assert r.accuracy == pytest.approx(0.9859, abs=1e-4)
    assert r.phi == pytest.approx(0.9814, abs=2e-3)
    assert r.confusion.sum(axis=1).tolist() == [24, 9, 4, 17, 17]


def test_constant_predictor_phi_zero():
    C = confusion_matrix(["a"] * 5 + ["b"] * 5, ["a"] * 10, ["a", "b"])
    r = report_from_confusion(C, ["a", "b"])
    assert r.accuracy == 0.5 and r.phi == 0.0


def test_binary_phi_matches_textbook():
    tp, fn, fp, tn = 40, 10, 5, 45
    want = (tp * tn - fp * fn) / math.sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn))
    assert matthews_phi([[tp, fn], [fp, tn]]) == pytest.approx(want)


@settings(max_examples=200)
@given(st.integers(2, 5).flatmap(lambda k: st.lists(st.lists(st.integers(0, 20), min_size=k, max_size=k), min_size=k, max_size=k)))
def test_phi_range_and_diagonal(rows):
    C = np.array(rows)
    phi = matthews_phi(C)
    assert -1.0 <= phi <= 1.0
    offdiag = C.sum() - np.trace(C)
    all_present = np.all(np.diag(C) > 0)
    if offdiag == 0 and all_present:
        assert phi == pytest.approx(1.0)
    if phi == pytest.approx(1.0) and C.sum():
        assert offdiag == 0


def test_evaluate_validation():
    model = train(blobs())
    with pytest.raises(ValueError):
        evaluate(model, Dataset(np.zeros((1, 3)), ["zzz"]))
    r = evaluate(model, blobs(seed=9))
    assert r.accuracy == 1.0 and r.phi == pytest.approx(1.0)
    assert r.confusion.sum(axis=1).tolist() == [100, 100]
    d = r.to_dict()
    assert set(d) == {"accuracy", "phi", "classes", "confusion", "per_class_precision_recall"}


def test_empty_confusion_rejected():
    with pytest.raises(ValueError):
        report_from_confusion(np.zeros((2, 2), dtype=int), ["a", "b"])


# ---------------------------------------------------------- learning curve


def test_learning_curve_full_width_matches_evaluate():
    ds = blobs(n=50, d=6, sep=0.6, seed=7)
    pts = learning_curve(ds, [6], seed=3)
    tr, va = split(ds, 0.2, 3)
    r = evaluate(train(tr), va)
    assert pts[0].accuracy == r.accuracy and pts[0].phi == r.phi


def test_learning_curve_repeats_and_width():
    ds = blobs(n=50, d=6, sep=0.6, seed=7)
    pts = learning_curve(ds, [1, 3], seed=0, repeats=4, width=2)
    assert [p.size for p in pts] == [1, 3]
    assert all(p.accuracy_std >= 0 for p in pts)
    with pytest.raises(ValueError):
        learning_curve(ds, [4], width=2)
    with pytest.raises(ValueError):
        learning_curve(ds, [0])


def test_learning_curve_rises():
    ds = blobs(n=100, d=30, sep=0.4, seed=8)
    pts = learning_curve(ds, [1, 30], seed=0)
    assert pts[1].accuracy > pts[0].accuracy


def test_no_warnings_on_regular_split():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        split(blobs(), 0.2, seed=0)
