"""
Naive Bayes over nominal and numeric attributes.

Class priors are training frequencies. A nominal attribute's likelihood is the
additively smoothed count ratio ``(count + alpha) / (n_class + alpha * |values|)``,
where ``n_class`` counts the class's non-missing cells for that attribute; with
``alpha = 0`` this is the plain ratio. A numeric attribute is a per-class
normal density with the sample mean and the ``n - 1`` standard deviation,
floored at ``sqrt(variance_floor)``.

Scoring happens in log space and posteriors are normalised with log-sum-exp.
Missing cells are skipped, both when fitting an attribute and when scoring it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence, Union

from .arff import AttributeDecl, Dataset

__all__ = [
    "TrainConfig",
    "CategoricalTable",
    "GaussianParams",
    "ClassSummary",
    "NaiveBayesModel",
    "Posterior",
    "NaiveBayesError",
    "UnknownTarget",
    "NonNominalTarget",
    "EmptyTraining",
    "InstanceArityMismatch",
    "UnknownClass",
    "ArityMismatch",
    "CellDomainError",
    "NonPositiveSigma",
    "ModelFormatError",
    "UnsupportedVersion",
    "ParseError",
    "train",
    "gaussian_density",
    "log_gaussian_density",
    "logsumexp",
    "log_joint",
    "predict",
    "serialize_model",
    "deserialize_model",
]

SQRT_2PI = math.sqrt(2.0 * math.pi)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
FORMAT_VERSION = "nbmodel v1"


class NaiveBayesError(ValueError):
    pass


class UnknownTarget(NaiveBayesError):
    pass


class NonNominalTarget(NaiveBayesError):
    pass


class EmptyTraining(NaiveBayesError):
    pass


class InstanceArityMismatch(NaiveBayesError):
    pass


class UnknownClass(NaiveBayesError):
    pass


class ArityMismatch(NaiveBayesError):
    pass


class CellDomainError(NaiveBayesError):
    pass


class NonPositiveSigma(NaiveBayesError):
    pass


class ModelFormatError(ValueError):
    pass


class UnsupportedVersion(ModelFormatError):
    pass


class ParseError(ModelFormatError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


@dataclass(frozen=True)
class TrainConfig:
    smoothing_alpha: float = 1.0
    variance_floor: float = 1e-9
    missing_policy: str = "ignore-cell"

    def __post_init__(self):
        if not (self.smoothing_alpha >= 0 and math.isfinite(self.smoothing_alpha)):
            raise ValueError(f"smoothing_alpha must be a finite value >= 0, got {self.smoothing_alpha!r}")
        if not (self.variance_floor > 0 and math.isfinite(self.variance_floor)):
            raise ValueError(f"variance_floor must be a finite value > 0, got {self.variance_floor!r}")
        if self.missing_policy != "ignore-cell":
            raise ValueError(f"unsupported missing_policy {self.missing_policy!r}")


@dataclass(frozen=True)
class CategoricalTable:
    counts: tuple[int, ...]
    probs: tuple[float, ...]

    @cached_property
    def log_probs(self) -> tuple[float, ...]:
        return tuple(math.log(p) if p > 0 else -math.inf for p in self.probs)


@dataclass(frozen=True)
class GaussianParams:
    """Normal fit of one numeric attribute within one class.

    ``n == 0`` means the class never observed the attribute; such a fit is
    skipped at scoring time instead of contributing an arbitrary density.
    """

    mu: float
    sigma: float
    n: int


Conditional = Union[CategoricalTable, GaussianParams]


@dataclass(frozen=True)
class ClassSummary:
    label: str
    prior: float
    count: int
    conditionals: tuple[Conditional, ...]


@dataclass(frozen=True)
class NaiveBayesModel:
    target_attribute: str
    target_index: int
    predictor_attributes: tuple[AttributeDecl, ...]
    classes: tuple[ClassSummary, ...]
    config: TrainConfig
    training_total: int

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(c.label for c in self.classes)

    def class_summary(self, label: str) -> ClassSummary:
        for c in self.classes:
            if c.label == label:
                return c
        raise UnknownClass(f"class {label!r} is not in the model (known: {', '.join(self.labels)})")

    def predictor_index(self, name: str) -> int:
        for i, a in enumerate(self.predictor_attributes):
            if a.name == name:
                return i
        raise KeyError(name)


@dataclass(frozen=True)
class Posterior:
    labels: tuple[str, ...]
    log_joint: tuple[float, ...]
    posteriors: tuple[float, ...]
    predicted: str

    def probability(self, label: str) -> float:
        try:
            return self.posteriors[self.labels.index(label)]
        except ValueError:
            raise UnknownClass(f"class {label!r} is not in the model") from None


# --------------------------------------------------------------------------
# densities

def gaussian_density(x: float, mu: float, sigma: float) -> float:
    if not sigma > 0:
        raise NonPositiveSigma(f"sigma must be positive, got {sigma!r}")
    z = (x - mu) / sigma
    return math.exp(-0.5 * z * z) / (SQRT_2PI * sigma)


def log_gaussian_density(x: float, mu: float, sigma: float) -> float:
    if not sigma > 0:
        raise NonPositiveSigma(f"sigma must be positive, got {sigma!r}")
    z = (x - mu) / sigma
    return -0.5 * z * z - math.log(sigma) - _HALF_LOG_2PI


def logsumexp(values: Sequence[float]) -> float:
    top = max(values)
    if top == -math.inf:
        return -math.inf
    return top + math.log(math.fsum(math.exp(v - top) for v in values))


# --------------------------------------------------------------------------
# training

def _fit_categorical(values: list[int], size: int, alpha: float) -> CategoricalTable:
    counts = [0] * size
    for v in values:
        counts[v] += 1
    total = len(values)
    denom = total + alpha * size
    if denom == 0:
        # alpha = 0 and no observations: nothing to go on, fall back to uniform
        probs = tuple(1.0 / size for _ in counts)
    else:
        probs = tuple((c + alpha) / denom for c in counts)
    return CategoricalTable(tuple(counts), probs)


def _fit_gaussian(values: list[float], variance_floor: float) -> GaussianParams:
    n = len(values)
    floor_sigma = math.sqrt(variance_floor)
    if n == 0:
        return GaussianParams(0.0, floor_sigma, 0)
    mu = math.fsum(values) / n
    if n < 2:
        return GaussianParams(mu, floor_sigma, n)
    var = math.fsum((v - mu) ** 2 for v in values) / (n - 1)
    sigma = math.sqrt(var) if var >= variance_floor else floor_sigma
    return GaussianParams(mu, sigma, n)


def train(d: Dataset, target: str, cfg: Optional[TrainConfig] = None) -> NaiveBayesModel:
    """Fit a model predicting ``target`` from every other attribute of ``d``.

    Rows whose target is missing are ignored. Classes are kept in the target's
    declared value order, restricted to values that occur in the data.
    """
    cfg = cfg or TrainConfig()
    try:
        t = d.attribute_index(target)
    except KeyError:
        raise UnknownTarget(f"target attribute {target!r} is not in the dataset") from None
    target_decl = d.attributes[t]
    if not target_decl.is_nominal:
        raise NonNominalTarget(f"target attribute {target!r} is numeric")

    width = len(d.attributes)
    predictors = tuple(a for i, a in enumerate(d.attributes) if i != t)
    columns = [i for i in range(width) if i != t]

    by_class: dict[int, list[tuple]] = {}
    for r, row in enumerate(d.instances):
        if len(row) != width:
            raise InstanceArityMismatch(f"instance {r} has {len(row)} cells, expected {width}")
        y = row[t]
        if y is None:
            continue
        if not 0 <= y < len(target_decl.values):
            raise CellDomainError(f"instance {r}: target index {y!r} out of range")
        by_class.setdefault(y, []).append(row)

    total = sum(len(rows) for rows in by_class.values())
    if total == 0:
        raise EmptyTraining("no instances with a known target value")

    classes = []
    for y in sorted(by_class):
        rows = by_class[y]
        conds = []
        for col, attr in zip(columns, predictors):
            observed = [row[col] for row in rows if row[col] is not None]
            if attr.is_nominal:
                size = len(attr.values)
                for v in observed:
                    if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v < size:
                        raise CellDomainError(f"attribute {attr.name!r}: cell {v!r} is not a valid index")
                conds.append(_fit_categorical(observed, size, cfg.smoothing_alpha))
            else:
                conds.append(_fit_gaussian([float(v) for v in observed], cfg.variance_floor))
        classes.append(ClassSummary(target_decl.values[y], len(rows) / total, len(rows), tuple(conds)))

    return NaiveBayesModel(
        target_attribute=target,
        target_index=t,
        predictor_attributes=predictors,
        classes=tuple(classes),
        config=cfg,
        training_total=total,
    )


# --------------------------------------------------------------------------
# scoring

def _predictor_cells(m: NaiveBayesModel, row: Sequence) -> Sequence:
    n = len(m.predictor_attributes)
    if len(row) == n:
        return row
    if len(row) == n + 1:
        return tuple(row[:m.target_index]) + tuple(row[m.target_index + 1:])
    raise ArityMismatch(f"row has {len(row)} cells; model expects {n} predictors (optionally plus the target)")


def _class_log_joint(m: NaiveBayesModel, cls: ClassSummary, cells: Sequence) -> float:
    terms = [math.log(cls.prior)]
    for v, attr, cond in zip(cells, m.predictor_attributes, cls.conditionals):
        if v is None:
            continue
        if attr.is_nominal:
            if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v < len(attr.values):
                raise CellDomainError(f"attribute {attr.name!r}: cell {v!r} is not a valid index")
            terms.append(cond.log_probs[v])
        else:
            if cond.n == 0:
                continue
            terms.append(log_gaussian_density(float(v), cond.mu, cond.sigma))
    return math.fsum(terms) if -math.inf not in terms else -math.inf


def log_joint(m: NaiveBayesModel, c: str, row: Sequence) -> float:
    """``log P(c) + sum_k log P(x_k | c)`` with missing cells skipped."""
    cls = m.class_summary(c)
    return _class_log_joint(m, cls, _predictor_cells(m, row))


def predict(m: NaiveBayesModel, row: Sequence) -> Posterior:
    cells = _predictor_cells(m, row)
    lj = [_class_log_joint(m, cls, cells) for cls in m.classes]
    best = max(range(len(lj)), key=lambda i: (lj[i], -i))
    norm = logsumexp(lj)
    if norm == -math.inf:
        # every class has a zero likelihood (possible only with alpha = 0)
        post = tuple(1.0 / len(lj) for _ in lj)
    else:
        post = tuple(math.exp(v - norm) for v in lj)
    return Posterior(m.labels, tuple(lj), post, m.classes[best].label)


# --------------------------------------------------------------------------
# nbmodel v1 text format

def _real(x: float) -> str:
    return "%.17g" % x


def _reals(xs) -> str:
    return "[" + ",".join(_real(x) for x in xs) + "]"


def _str(s: str) -> str:
    return json.dumps(s)


def serialize_model(m: NaiveBayesModel) -> str:
    """Render ``m`` in the line-oriented ``nbmodel v1`` format (see README)."""
    out = [
        FORMAT_VERSION,
        f"target={_str(m.target_attribute)}",
        f"target_index={m.target_index}",
        f"training_total={m.training_total}",
        f"smoothing_alpha={_real(m.config.smoothing_alpha)}",
        f"variance_floor={_real(m.config.variance_floor)}",
        f"missing_policy={m.config.missing_policy}",
        f"predictors={len(m.predictor_attributes)}",
    ]
    for a in m.predictor_attributes:
        if a.is_nominal:
            out.append(f"predictor={_str(a.name)} nominal {json.dumps(list(a.values))}")
        else:
            out.append(f"predictor={_str(a.name)} numeric")
    out.append(f"classes={len(m.classes)}")
    for c in m.classes:
        out.append(f"class={_str(c.label)}")
        out.append(f"prior={_real(c.prior)}")
        out.append(f"count={c.count}")
        for a, cond in zip(m.predictor_attributes, c.conditionals):
            if isinstance(cond, CategoricalTable):
                counts = "[" + ",".join(str(k) for k in cond.counts) + "]"
                out.append(f"cond={_str(a.name)} counts={counts} probs={_reals(cond.probs)}")
            else:
                out.append(f"cond={_str(a.name)} mu={_real(cond.mu)} sigma={_real(cond.sigma)} n={cond.n}")
    out.append("end")
    return "\n".join(out) + "\n"


class _Reader:
    def __init__(self, text: str):
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        self.lines = lines
        self.pos = 0

    @property
    def lineno(self) -> int:
        return self.pos

    def fail(self, message: str):
        raise ParseError(self.lineno, message)

    def next(self) -> str:
        if self.pos >= len(self.lines):
            raise ParseError(self.pos + 1, "unexpected end of model file")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def field(self, key: str) -> str:
        line = self.next()
        k, sep, v = line.partition("=")
        if not sep or k != key:
            self.fail(f"expected '{key}=...', got {line!r}")
        return v

    def json_prefix(self, text: str):
        """Decode one JSON value at the start of ``text``; return (value, rest)."""
        try:
            value, end = json.JSONDecoder().raw_decode(text)
        except json.JSONDecodeError as exc:
            self.fail(f"bad JSON value: {exc.msg}")
        return value, text[end:]

    def string(self, text: str) -> tuple[str, str]:
        value, rest = self.json_prefix(text)
        if not isinstance(value, str):
            self.fail("expected a quoted string")
        return value, rest

    def real(self, text: str) -> float:
        try:
            x = float(text)
        except ValueError:
            self.fail(f"not a number: {text!r}")
        if not math.isfinite(x):
            self.fail(f"not a finite number: {text!r}")
        return x

    def integer(self, text: str, minimum: int = 0) -> int:
        if not (text.isascii() and text.isdigit()):
            self.fail(f"not a non-negative integer: {text!r}")
        k = int(text)
        if k < minimum:
            self.fail(f"expected an integer >= {minimum}, got {k}")
        return k

    def keyed(self, text: str, key: str) -> tuple[str, str]:
        # "key=value rest..." -> (value, rest)
        text = text.lstrip(" ")
        if not text.startswith(key + "="):
            self.fail(f"expected '{key}='")
        body = text[len(key) + 1:]
        head, _, rest = body.partition(" ")
        return head, rest


def _reals_list(r: _Reader, text: str, size: int) -> tuple[float, ...]:
    value, rest = r.json_prefix(text)
    if rest.strip() or not isinstance(value, list) or len(value) != size:
        r.fail(f"expected a list of {size} numbers")
    out = []
    for x in value:
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            r.fail("list holds a non-number")
        out.append(float(x))
    return tuple(out)


def deserialize_model(s: str) -> NaiveBayesModel:
    r = _Reader(s)
    header = r.next()
    if header != FORMAT_VERSION:
        if header.startswith("nbmodel "):
            raise UnsupportedVersion(f"unsupported model format {header!r}")
        r.fail(f"not an nbmodel file (first line {header!r})")

    target, rest = r.string(r.field("target"))
    if rest:
        r.fail("trailing text after target")
    target_index = r.integer(r.field("target_index"))
    training_total = r.integer(r.field("training_total"), minimum=1)
    alpha = r.real(r.field("smoothing_alpha"))
    floor = r.real(r.field("variance_floor"))
    policy = r.field("missing_policy")
    try:
        cfg = TrainConfig(alpha, floor, policy)
    except ValueError as exc:
        r.fail(str(exc))

    n_pred = r.integer(r.field("predictors"))
    if target_index > n_pred:
        r.fail("target_index exceeds the attribute count")
    predictors = []
    for _ in range(n_pred):
        name, rest = r.string(r.field("predictor"))
        rest = rest.strip()
        if rest == "numeric":
            predictors.append(AttributeDecl(name, None))
        elif rest.startswith("nominal "):
            values, tail = r.json_prefix(rest[len("nominal "):])
            if tail or not isinstance(values, list) or not values \
                    or not all(isinstance(v, str) for v in values) or len(set(values)) != len(values):
                r.fail("nominal values must be a non-empty list of distinct strings")
            predictors.append(AttributeDecl(name, tuple(values)))
        else:
            r.fail(f"unknown predictor kind {rest!r}")
    if len({a.name for a in predictors} | {target}) != n_pred + 1:
        r.fail("attribute names must be distinct")

    n_classes = r.integer(r.field("classes"), minimum=1)
    classes = []
    for _ in range(n_classes):
        label, rest = r.string(r.field("class"))
        if rest:
            r.fail("trailing text after class label")
        prior = r.real(r.field("prior"))
        if not 0 < prior <= 1:
            r.fail(f"prior must lie in (0, 1], got {prior!r}")
        count = r.integer(r.field("count"), minimum=1)
        conds = []
        for a in predictors:
            name, rest = r.string(r.field("cond"))
            if name != a.name:
                r.fail(f"expected conditional for {a.name!r}, got {name!r}")
            if a.is_nominal:
                counts_text, rest = r.keyed(rest, "counts")
                counts, tail = r.json_prefix(counts_text)
                if tail or not isinstance(counts, list) or len(counts) != len(a.values) \
                        or not all(isinstance(k, int) and not isinstance(k, bool) and k >= 0 for k in counts):
                    r.fail(f"expected {len(a.values)} non-negative integer counts")
                rest = rest.lstrip(" ")
                if not rest.startswith("probs="):
                    r.fail("expected 'probs='")
                probs = _reals_list(r, rest[len("probs="):], len(a.values))
                if any(not 0 <= p <= 1 for p in probs):
                    r.fail("probabilities must lie in [0, 1]")
                conds.append(CategoricalTable(tuple(counts), probs))
            else:
                mu_text, rest = r.keyed(rest, "mu")
                sigma_text, rest = r.keyed(rest, "sigma")
                n_text, rest = r.keyed(rest, "n")
                if rest:
                    r.fail("trailing text after gaussian parameters")
                sigma = r.real(sigma_text)
                if not sigma > 0:
                    r.fail("sigma must be positive")
                conds.append(GaussianParams(r.real(mu_text), sigma, r.integer(n_text)))
        classes.append(ClassSummary(label, prior, count, tuple(conds)))
    if len({c.label for c in classes}) != len(classes):
        r.fail("class labels must be distinct")

    if r.next() != "end":
        r.fail("expected 'end'")
    if r.pos != len(r.lines):
        raise ParseError(r.pos + 1, "unexpected text after 'end'")

    return NaiveBayesModel(
        target_attribute=target,
        target_index=target_index,
        predictor_attributes=tuple(predictors),
        classes=tuple(classes),
        config=cfg,
        training_total=training_total,
    )
