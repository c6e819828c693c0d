"""Stratified k-fold cross-validation, confusion matrices and per-class metrics."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional, Sequence

from .arff import Dataset
from .naive_bayes import NonNominalTarget, TrainConfig, UnknownTarget, predict, train
from .prng import XorShift64Star

__all__ = [
    "FoldPlan",
    "ConfusionMatrix",
    "ClassMetrics",
    "BadK",
    "EmptyClass",
    "stratified_folds",
    "cross_validate",
    "precision_recall",
    "format_metrics_text",
    "format_metrics_csv",
]


class BadK(ValueError):
    pass


class EmptyClass(ValueError):
    pass


@dataclass(frozen=True)
class FoldPlan:
    """Fold index per instance; ``None`` marks rows left out (missing target)."""

    k: int
    seed: int
    assignment: tuple[Optional[int], ...]

    def test_indices(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.assignment) if f == fold]

    def train_indices(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.assignment) if f is not None and f != fold]

    def fold_sizes(self) -> list[int]:
        sizes = [0] * self.k
        for f in self.assignment:
            if f is not None:
                sizes[f] += 1
        return sizes


@dataclass(frozen=True)
class ConfusionMatrix:
    labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]  # rows = actual, columns = predicted

    @classmethod
    def from_pairs(cls, labels: Sequence[str], pairs) -> "ConfusionMatrix":
        index = {label: i for i, label in enumerate(labels)}
        grid = [[0] * len(labels) for _ in labels]
        for actual, predicted in pairs:
            grid[index[actual]][index[predicted]] += 1
        return cls(tuple(labels), tuple(tuple(r) for r in grid))

    @property
    def total(self) -> int:
        return sum(sum(r) for r in self.counts)

    @property
    def trace(self) -> int:
        return sum(self.counts[i][i] for i in range(len(self.labels)))

    @property
    def accuracy(self) -> Optional[float]:
        total = self.total
        return self.trace / total if total else None

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.labels != other.labels:
            raise ValueError("cannot add confusion matrices over different labels")
        return ConfusionMatrix(self.labels, tuple(
            tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(self.counts, other.counts)))


@dataclass(frozen=True)
class ClassMetrics:
    """Precision and recall for one class; ``None`` where the ratio is 0/0."""

    label: str
    precision: Optional[float]
    recall: Optional[float]


def _eligible_by_class(d: Dataset, target: str) -> tuple[int, dict[int, list[int]]]:
    try:
        t = d.attribute_index(target)
    except KeyError:
        raise UnknownTarget(f"target attribute {target!r} is not in the dataset") from None
    if not d.attributes[t].is_nominal:
        raise NonNominalTarget(f"target attribute {target!r} is numeric")
    groups: dict[int, list[int]] = {}
    for i, row in enumerate(d.instances):
        if row[t] is not None:
            groups.setdefault(row[t], []).append(i)
    return t, groups


def stratified_folds(d: Dataset, target: str, k: int, seed: int) -> FoldPlan:
    """Assign each instance with a known target to one of ``k`` folds.

    Per class (in declared value order) the instance indices are shuffled with
    the shared xorshift64* stream seeded by ``seed``; the shuffled classes are
    then concatenated and dealt round-robin, position ``p`` going to fold
    ``p mod k``. That keeps overall and per-class fold sizes within one of
    each other.
    """
    _, groups = _eligible_by_class(d, target)
    eligible = sum(len(g) for g in groups.values())
    if not groups:
        raise EmptyClass(f"no instance has a known {target!r} value")
    if k < 2 or k > eligible:
        raise BadK(f"k must lie in [2, {eligible}], got {k}")

    rng = XorShift64Star(seed)
    assignment: list[Optional[int]] = [None] * len(d.instances)
    position = 0
    for y in sorted(groups):
        members = list(groups[y])
        rng.shuffle(members)
        for i in members:
            assignment[i] = position % k
            position += 1
    return FoldPlan(k, seed, tuple(assignment))


def cross_validate(d: Dataset, target: str, k: int = 10, seed: int = 1,
                   cfg: Optional[TrainConfig] = None) -> tuple[ConfusionMatrix, float]:
    """Pooled confusion matrix and accuracy over a stratified k-fold run."""
    plan = stratified_folds(d, target, k, seed)
    t = d.attribute_index(target)
    labels = d.attributes[t].values
    pooled = ConfusionMatrix.from_pairs(labels, ())
    for fold in range(k):
        model = train(d.subset(plan.train_indices(fold)), target, cfg)
        pairs = []
        for i in plan.test_indices(fold):
            row = d.instances[i]
            pairs.append((labels[row[t]], predict(model, row).predicted))
        pooled = pooled + ConfusionMatrix.from_pairs(labels, pairs)
    return pooled, pooled.accuracy


def precision_recall(cm: ConfusionMatrix) -> tuple[list[ClassMetrics], Optional[float]]:
    n = len(cm.labels)
    metrics = []
    for c, label in enumerate(cm.labels):
        tp = cm.counts[c][c]
        col = sum(cm.counts[r][c] for r in range(n))
        row = sum(cm.counts[c])
        metrics.append(ClassMetrics(label, tp / col if col else None, tp / row if row else None))
    return metrics, cm.accuracy


# --------------------------------------------------------------------------
# output formats

def _fixed(x: Optional[float], places: int) -> str:
    return "NA" if x is None else f"{x:.{places}f}"


def format_metrics_text(cm: ConfusionMatrix) -> str:
    """Aligned confusion matrix, per-class table and accuracy, 3 decimals."""
    metrics, acc = precision_recall(cm)
    head = "actual \\ predicted"
    w = max([len(head)] + [len(l) for l in cm.labels])
    cw = max([7] + [len(l) for l in cm.labels] + [len(str(v)) for r in cm.counts for v in r])
    lines = ["Confusion matrix", head.ljust(w) + "".join(" " + l.rjust(cw) for l in cm.labels)]
    for label, row in zip(cm.labels, cm.counts):
        lines.append(label.ljust(w) + "".join(" " + str(v).rjust(cw) for v in row))
    lines.append("")
    lw = max([5] + [len(m.label) for m in metrics])
    lines.append(f"{'class'.ljust(lw)} {'precision':>9} {'recall':>9}")
    for m in metrics:
        lines.append(f"{m.label.ljust(lw)} {_fixed(m.precision, 3):>9} {_fixed(m.recall, 3):>9}")
    lines.append("")
    lines.append(f"accuracy {_fixed(acc, 3)}")
    return "\n".join(lines) + "\n"


def format_metrics_csv(cm: ConfusionMatrix) -> str:
    """Long-form CSV with header ``metric,actual,predicted,value``.

    ``count`` rows hold the matrix cells; ``precision`` and ``recall`` rows
    name their class in ``actual`` and leave ``predicted`` empty; a final
    ``accuracy`` row leaves both empty. Ratios carry 6 decimals, ``NA`` when
    undefined.
    """
    metrics, acc = precision_recall(cm)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["metric", "actual", "predicted", "value"])
    for a, row in zip(cm.labels, cm.counts):
        for p, v in zip(cm.labels, row):
            w.writerow(["count", a, p, v])
    for m in metrics:
        w.writerow(["precision", m.label, "", _fixed(m.precision, 6)])
    for m in metrics:
        w.writerow(["recall", m.label, "", _fixed(m.recall, 6)])
    w.writerow(["accuracy", "", "", _fixed(acc, 6)])
    return buf.getvalue()
