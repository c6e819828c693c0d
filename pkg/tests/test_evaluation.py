import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from dropout_miner.arff import AttributeDecl, Dataset
from dropout_miner.evaluation import (
    BadK,
    ConfusionMatrix,
    EmptyClass,
    cross_validate,
    format_metrics_csv,
    format_metrics_text,
    precision_recall,
    stratified_folds,
)
from dropout_miner.naive_bayes import TrainConfig, UnknownTarget

YN = AttributeDecl("Dropout", ("Yes", "No"))
AB = AttributeDecl("x", ("a", "b"))
REPORTED = ConfusionMatrix(("Yes", "No"), ((121, 10), (11, 23)))


def labelled(counts, extra_missing=0):
    """Dataset with ``counts[c]`` rows of class ``c``; the predictor mirrors the class."""
    rows = []
    for c, n in enumerate(counts):
        rows += [(c, c)] * n
    rows += [(0, None)] * extra_missing
    return Dataset("t", (AB, YN), rows)


def test_even_split_one_of_each_per_fold():
    d = labelled([5, 5])
    plan = stratified_folds(d, "Dropout", 5, seed=9)
    for f in range(5):
        classes = sorted(d.instances[i][1] for i in plan.test_indices(f))
        assert classes == [0, 1]


def test_plan_is_deterministic():
    d = labelled([13, 7])
    assert stratified_folds(d, "Dropout", 4, 3) == stratified_folds(d, "Dropout", 4, 3)
    assert stratified_folds(d, "Dropout", 4, 3) != stratified_folds(d, "Dropout", 4, 4)


@pytest.mark.parametrize("k", [1, 0, 11])
def test_bad_k(k):
    with pytest.raises(BadK):
        stratified_folds(labelled([5, 5]), "Dropout", k, 1)


def test_no_labelled_rows():
    with pytest.raises(EmptyClass):
        stratified_folds(labelled([0, 0], extra_missing=4), "Dropout", 2, 1)


def test_unknown_target():
    with pytest.raises(UnknownTarget):
        stratified_folds(labelled([3, 3]), "Outcome", 2, 1)


def test_missing_targets_are_left_out():
    d = labelled([4, 4], extra_missing=3)
    plan = stratified_folds(d, "Dropout", 4, 1)
    assert plan.assignment[-3:] == (None, None, None)
    assert sum(plan.fold_sizes()) == 8


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 25), min_size=1, max_size=4), st.integers(2, 12), st.integers(0, 2 ** 64 - 1))
def test_stratification_invariants(counts, k, seed):
    d = Dataset("t", (AttributeDecl("y", tuple(f"c{i}" for i in range(len(counts)))),),
                [(c,) for c, n in enumerate(counts) for _ in range(n)])
    if sum(counts) == 0:
        with pytest.raises(EmptyClass):
            stratified_folds(d, "y", k, seed)
        return
    if sum(counts) < k:
        with pytest.raises(BadK):
            stratified_folds(d, "y", k, seed)
        return
    plan = stratified_folds(d, "y", k, seed)
    # partition: each row exactly once
    assert all(f is not None and 0 <= f < k for f in plan.assignment)
    sizes = plan.fold_sizes()
    assert max(sizes) - min(sizes) <= 1
    for c in range(len(counts)):
        per = Counter(f for f, row in zip(plan.assignment, d.instances) if row[0] == c)
        per_fold = [per.get(f, 0) for f in range(k)]
        assert max(per_fold) - min(per_fold) <= 1


def test_separable_toy_is_perfect():
    cm, acc = cross_validate(labelled([12, 8]), "Dropout", 4, 1)
    assert acc == 1.0
    assert cm.counts == ((12, 0), (0, 8))


@pytest.mark.parametrize("k, seed", [(2, 1), (3, 99), (5, 7), (10, 0)])
def test_pooled_total_is_eligible_count(k, seed):
    rng = random.Random(k * 1000 + seed)
    rows = [(rng.randrange(2), rng.choice([0, 1, None])) for _ in range(40)]
    d = Dataset("t", (AB, YN), rows)
    eligible = sum(1 for r in rows if r[1] is not None)
    cm, acc = cross_validate(d, "Dropout", k, seed, TrainConfig())
    assert cm.total == eligible
    assert acc == cm.trace / eligible


def test_cross_validate_repeatable():
    rng = random.Random(5)
    d = Dataset("t", (AB, YN), [(rng.randrange(2), rng.randrange(2)) for _ in range(60)])
    assert cross_validate(d, "Dropout", 10, 3) == cross_validate(d, "Dropout", 10, 3)


# --------------------------------------------------------------------------
# metrics

def test_reported_matrix_metrics():
    metrics, acc = precision_recall(REPORTED)
    assert [m.label for m in metrics] == ["Yes", "No"]
    assert metrics[0].precision == 121 / 132
    assert metrics[0].recall == 121 / 131
    assert metrics[1].precision == 23 / 33
    assert metrics[1].recall == 23 / 34
    assert [round(x, 3) for m in metrics for x in (m.precision, m.recall)] == [0.917, 0.924, 0.697, 0.676]
    assert acc == pytest.approx(144 / 165)
    assert round(acc, 4) == 0.8727


def test_identity_matrix():
    metrics, acc = precision_recall(ConfusionMatrix(("a", "b", "c"), ((1, 0, 0), (0, 1, 0), (0, 0, 1))))
    assert all(m.precision == 1.0 and m.recall == 1.0 for m in metrics)
    assert acc == 1.0


def test_undefined_precision_is_not_zero():
    metrics, _ = precision_recall(ConfusionMatrix(("a", "b"), ((3, 0), (2, 0))))
    assert metrics[1].precision is None
    assert metrics[1].recall == 0.0


def test_empty_matrix():
    metrics, acc = precision_recall(ConfusionMatrix(("a",), ((0,),)))
    assert acc is None
    assert metrics[0].precision is None and metrics[0].recall is None


@given(st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(0, 50), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_metric_identities(grid):
    cm = ConfusionMatrix(tuple(f"c{i}" for i in range(len(grid))), tuple(map(tuple, grid)))
    metrics, acc = precision_recall(cm)
    total = sum(map(sum, grid))
    for i, m in enumerate(metrics):
        row = sum(grid[i])
        assert m.recall == (grid[i][i] / row if row else None)
    assert acc == (sum(grid[i][i] for i in range(len(grid))) / total if total else None)
    if len(grid) == 2 and total:
        tp, fn, fp, tn = grid[0][0], grid[0][1], grid[1][0], grid[1][1]
        assert acc == (tp + tn) / total


def test_matrix_addition_is_order_independent():
    a = ConfusionMatrix(("x", "y"), ((1, 2), (3, 4)))
    b = ConfusionMatrix(("x", "y"), ((5, 0), (0, 5)))
    assert a + b == b + a == ConfusionMatrix(("x", "y"), ((6, 2), (3, 9)))


def test_text_format():
    text = format_metrics_text(REPORTED)
    assert "actual \\ predicted     Yes      No" in text
    assert "Yes                    121      10" in text
    assert "Yes       0.917     0.924" in text
    assert "No        0.697     0.676" in text
    assert text.endswith("accuracy 0.873\n")


def test_csv_format():
    assert format_metrics_csv(REPORTED) == (
        "metric,actual,predicted,value\n"
        "count,Yes,Yes,121\n"
        "count,Yes,No,10\n"
        "count,No,Yes,11\n"
        "count,No,No,23\n"
        "precision,Yes,,0.916667\n"
        "precision,No,,0.696970\n"
        "recall,Yes,,0.923664\n"
        "recall,No,,0.676471\n"
        "accuracy,,,0.872727\n"
    )


def test_csv_marks_undefined():
    text = format_metrics_csv(ConfusionMatrix(("a", "b"), ((3, 0), (2, 0))))
    assert "precision,b,,NA\n" in text
