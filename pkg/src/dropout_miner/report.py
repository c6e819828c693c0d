"""High-potential attribute values and ranked at-risk lists from a trained model."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional, Union

from .arff import Dataset
from .naive_bayes import CategoricalTable, NaiveBayesModel, predict

__all__ = [
    "HighPotentialVariable",
    "RiskEntry",
    "SchemaMismatch",
    "high_potential",
    "at_risk_list",
    "high_potential_text",
    "high_potential_csv",
    "risk_list_text",
    "risk_list_csv",
]


class SchemaMismatch(ValueError):
    pass


@dataclass(frozen=True)
class HighPotentialVariable:
    attribute: str
    value: str
    probability: float


@dataclass(frozen=True)
class RiskEntry:
    row_id: Union[int, str]
    risk: float
    predicted: str


def high_potential(m: NaiveBayesModel, cls: str, threshold: float = 0.5) -> list[HighPotentialVariable]:
    """Nominal predictor values whose ``P(value | cls)`` is strictly above
    ``threshold``, most probable first. Numeric predictors never qualify."""
    if not 0 <= threshold < 1:
        raise ValueError(f"threshold must lie in [0, 1), got {threshold!r}")
    summary = m.class_summary(cls)
    found = []
    for a_pos, (attr, cond) in enumerate(zip(m.predictor_attributes, summary.conditionals)):
        if not isinstance(cond, CategoricalTable):
            continue
        for v_pos, p in enumerate(cond.probs):
            if p > threshold:
                found.append((-p, a_pos, v_pos, HighPotentialVariable(attr.name, attr.values[v_pos], p)))
    found.sort(key=lambda t: t[:3])
    return [t[3] for t in found]


def _column_map(m: NaiveBayesModel, d: Dataset) -> list[int]:
    """Dataset column holding each model predictor, checked for type agreement."""
    positions = {a.name: i for i, a in enumerate(d.attributes)}
    cols = []
    for attr in m.predictor_attributes:
        if attr.name not in positions:
            raise SchemaMismatch(f"dataset has no column {attr.name!r}")
        found = d.attributes[positions[attr.name]]
        if found.kind != attr.kind:
            raise SchemaMismatch(f"column {attr.name!r} is {found.kind}, the model expects {attr.kind}")
        if found.values != attr.values:
            raise SchemaMismatch(f"column {attr.name!r} declares different nominal values than the model")
        cols.append(positions[attr.name])
    extra = set(positions) - {a.name for a in m.predictor_attributes} - {m.target_attribute}
    if extra:
        raise SchemaMismatch(f"dataset has columns the model does not know: {', '.join(sorted(extra))}")
    return cols


def at_risk_list(m: NaiveBayesModel, d: Dataset, risk_class: str,
                 top_n: Optional[int] = None, ids=None) -> list[RiskEntry]:
    """Score every row and rank by the posterior of ``risk_class``.

    Columns are matched to the model by name; the target column may be
    present and is ignored. Ties keep row order. ``ids`` optionally replaces
    the 0-based row indices in the output.
    """
    m.class_summary(risk_class)
    if top_n is not None and top_n < 0:
        raise ValueError("top_n must be non-negative")
    cols = _column_map(m, d)
    if ids is not None and len(ids) != len(d.instances):
        raise ValueError("ids must name every row")
    scored = []
    for i, row in enumerate(d.instances):
        post = predict(m, [row[c] for c in cols])
        scored.append((i, post.probability(risk_class), post.predicted))
    scored.sort(key=lambda t: -t[1])
    if top_n is not None:
        scored = scored[:top_n]
    return [RiskEntry(ids[i] if ids is not None else i, risk, pred) for i, risk, pred in scored]


# --------------------------------------------------------------------------
# output formats

def high_potential_text(entries: list[HighPotentialVariable]) -> str:
    aw = max([9] + [len(e.attribute) for e in entries])
    vw = max([5] + [len(e.value) for e in entries])
    lines = [f"{'attribute'.ljust(aw)} {'value'.ljust(vw)} probability"]
    for e in entries:
        lines.append(f"{e.attribute.ljust(aw)} {e.value.ljust(vw)} {e.probability:11.4f}")
    return "\n".join(lines) + "\n"


def high_potential_csv(entries: list[HighPotentialVariable]) -> str:
    """Header ``attribute,value,probability``; probability to 6 decimals."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["attribute", "value", "probability"])
    for e in entries:
        w.writerow([e.attribute, e.value, f"{e.probability:.6f}"])
    return buf.getvalue()


def risk_list_text(entries: list[RiskEntry]) -> str:
    rw = max([3] + [len(str(e.row_id)) for e in entries])
    lines = [f"{'rank':>4} {'row'.rjust(rw)} {'risk':>8} predicted"]
    for rank, e in enumerate(entries, start=1):
        lines.append(f"{rank:>4} {str(e.row_id).rjust(rw)} {e.risk:8.4f} {e.predicted}")
    return "\n".join(lines) + "\n"


def risk_list_csv(entries: list[RiskEntry]) -> str:
    """Header ``rank,row,risk,predicted``; rank is 1-based, risk 6 decimals."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "row", "risk", "predicted"])
    for rank, e in enumerate(entries, start=1):
        w.writerow([rank, e.row_id, f"{e.risk:.6f}", e.predicted])
    return buf.getvalue()
