"""
Seeded synthetic student cohorts.

A cohort draws ``Dropout`` from a Bernoulli prior and then every other student
variable independently from a per-class categorical distribution, which is
exactly the generative story Naive Bayes assumes. The default cohort pins the
seven reference high-potential values for the ``Yes`` class and spreads the
rest of each attribute's mass uniformly; every other distribution is uniform.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping

from .arff import Dataset
from .prng import MASK64, XorShift64Star
from .schema import STUDENT_VARIABLES, TARGET, builtin_schema

__all__ = [
    "CohortSpec",
    "SpecFormatError",
    "HIGH_POTENTIAL_YES",
    "DEFAULT_PRIOR",
    "PREDICTORS",
    "default_spec",
    "generate",
    "bayes_optimal_accuracy",
    "dump_spec",
    "load_spec",
    "describe_spec",
]

# (attribute, value, P(value | Dropout=Yes))
HIGH_POTENTIAL_YES = (
    ("Sex", "Male", 0.68),
    ("SSG", "E", 0.6623),
    ("Atype", "Direct", 0.6),
    ("Med", "Hindi", 0.76),
    ("LLoc", "Village", 0.55),
    ("MQual", "elementary", 0.50),
    ("MOcc", "Service", 0.52),
)

# 121 + 10 of 165 students carry Dropout=Yes
DEFAULT_PRIOR = 131 / 165

PREDICTORS = tuple((name, values) for _, name, values in STUDENT_VARIABLES if name != TARGET)
CLASSES = ("Yes", "No")

SPEC_VERSION = "cohortspec v1"


class SpecFormatError(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class CohortSpec:
    """``conditionals[label][k]`` is the distribution of predictor ``k`` given
    the class, over that predictor's values in schema order."""

    n: int
    class_prior: float  # P(Dropout = Yes)
    conditionals: Mapping[str, tuple[tuple[float, ...], ...]]
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0 < self.class_prior < 1:
            raise ValueError(f"class_prior must lie in (0, 1), got {self.class_prior!r}")
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if set(self.conditionals) != set(CLASSES):
            raise ValueError(f"conditionals must cover exactly the classes {CLASSES}")
        fixed = {}
        for label in CLASSES:
            dists = tuple(tuple(float(p) for p in dist) for dist in self.conditionals[label])
            if len(dists) != len(PREDICTORS):
                raise ValueError(f"class {label!r}: expected {len(PREDICTORS)} distributions")
            for (name, values), dist in zip(PREDICTORS, dists):
                if len(dist) != len(values):
                    raise ValueError(f"{label}/{name}: expected {len(values)} probabilities")
                if any(not (0 <= p <= 1) for p in dist) or abs(math.fsum(dist) - 1) > 1e-12:
                    raise ValueError(f"{label}/{name}: not a probability distribution")
            fixed[label] = dists
        object.__setattr__(self, "conditionals", fixed)

    def probability(self, label: str, attribute: str, value: str) -> float:
        for k, (name, values) in enumerate(PREDICTORS):
            if name == attribute:
                return self.conditionals[label][k][values.index(value)]
        raise KeyError(attribute)

    def class_probabilities(self) -> dict[str, float]:
        return {"Yes": self.class_prior, "No": 1.0 - self.class_prior}


def _uniform(size: int) -> tuple[float, ...]:
    return tuple(1.0 / size for _ in range(size))


def default_spec(n: int, seed: int) -> CohortSpec:
    pinned = {attr: (value, p) for attr, value, p in HIGH_POTENTIAL_YES}
    yes, no = [], []
    for name, values in PREDICTORS:
        no.append(_uniform(len(values)))
        if name in pinned:
            value, p = pinned[name]
            rest = (1.0 - p) / (len(values) - 1)
            yes.append(tuple(p if v == value else rest for v in values))
        else:
            yes.append(_uniform(len(values)))
    return CohortSpec(n, DEFAULT_PRIOR, {"Yes": tuple(yes), "No": tuple(no)}, seed)


def _draw(rng: XorShift64Star, dist: tuple[float, ...]) -> int:
    u = rng.random()
    acc = 0.0
    for i, p in enumerate(dist):
        acc += p
        if u < acc:
            return i
    # rounding left u above the last partial sum
    return max(i for i, p in enumerate(dist) if p > 0)


def generate(spec: CohortSpec) -> Dataset:
    """Sample ``spec.n`` rows over the built-in schema (``Dropout`` last).

    Per row: one uniform draw picks the class (``Yes`` when below the prior),
    then one draw per predictor, in schema order, by inverse CDF.
    """
    rng = XorShift64Star(spec.seed)
    schema = builtin_schema()
    target = schema[-1]
    rows = []
    for _ in range(spec.n):
        label = "Yes" if rng.random() < spec.class_prior else "No"
        cells = tuple(_draw(rng, dist) for dist in spec.conditionals[label])
        rows.append(cells + (target.index_of(label),))
    return Dataset("drop", tuple(schema), tuple(rows))


def bayes_optimal_accuracy(spec: CohortSpec, max_cells: int = 10_000_000) -> float:
    """Exact accuracy of the MAP rule under ``spec``'s own distributions.

    Attributes whose distribution is the same in every class cancel from the
    decision and integrate to one, so the sum runs only over the joint values
    of the attributes that differ between classes.
    """
    priors = spec.class_probabilities()
    informative = [k for k in range(len(PREDICTORS))
                   if len({spec.conditionals[c][k] for c in CLASSES}) > 1]
    cells = math.prod(len(PREDICTORS[k][1]) for k in informative)
    if cells > max_cells:
        raise ValueError(f"{cells} joint cells exceed the enumeration budget of {max_cells}")
    total = []
    for combo in itertools.product(*(range(len(PREDICTORS[k][1])) for k in informative)):
        best = 0.0
        for c in CLASSES:
            p = priors[c]
            for k, v in zip(informative, combo):
                p *= spec.conditionals[c][k][v]
            best = max(best, p)
        total.append(best)
    return math.fsum(total)


# --------------------------------------------------------------------------
# cohortspec v1 text format

def dump_spec(spec: CohortSpec) -> str:
    """``key=value`` lines: version, n, seed, class_prior, then one
    ``dist.<class>.<attribute>=p1,p2,...`` line per class and predictor,
    reals to 17 significant digits."""
    out = [SPEC_VERSION, f"n={spec.n}", f"seed={spec.seed}", f"class_prior={spec.class_prior:.17g}"]
    for label in CLASSES:
        for (name, _), dist in zip(PREDICTORS, spec.conditionals[label]):
            out.append(f"dist.{label}.{name}=" + ",".join(f"{p:.17g}" for p in dist))
    return "\n".join(out) + "\n"


def load_spec(text: str) -> CohortSpec:
    lines = text.split("\n")
    if not lines or lines[0].strip() != SPEC_VERSION:
        raise SpecFormatError(1, f"expected {SPEC_VERSION!r}")
    scalars: dict[str, str] = {}
    dists: dict[tuple[str, str], tuple[float, ...]] = {}
    known = {name for name, _ in PREDICTORS}
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise SpecFormatError(lineno, "expected key=value")
        if key.startswith("dist."):
            parts = key.split(".")
            if len(parts) != 3 or parts[1] not in CLASSES or parts[2] not in known:
                raise SpecFormatError(lineno, f"unknown distribution key {key!r}")
            if (parts[1], parts[2]) in dists:
                raise SpecFormatError(lineno, f"duplicate key {key!r}")
            try:
                dists[parts[1], parts[2]] = tuple(float(p) for p in value.split(","))
            except ValueError:
                raise SpecFormatError(lineno, "probabilities must be numbers") from None
        elif key in ("n", "seed", "class_prior"):
            if key in scalars:
                raise SpecFormatError(lineno, f"duplicate key {key!r}")
            scalars[key] = value.strip()
        else:
            raise SpecFormatError(lineno, f"unknown key {key!r}")
    for key in ("n", "seed", "class_prior"):
        if key not in scalars:
            raise SpecFormatError(0, f"missing {key!r}")
    conditionals = {}
    for label in CLASSES:
        per = []
        for name, _ in PREDICTORS:
            if (label, name) not in dists:
                raise SpecFormatError(0, f"missing dist.{label}.{name}")
            per.append(dists[label, name])
        conditionals[label] = tuple(per)
    try:
        return CohortSpec(int(scalars["n"]), float(scalars["class_prior"]), conditionals, int(scalars["seed"]))
    except ValueError as exc:
        raise SpecFormatError(0, str(exc)) from None


def describe_spec(spec: CohortSpec) -> list[str]:
    """Human-readable notes on a cohort, one line each, no trailing newline."""
    lines = [
        f"synthetic cohort: n={spec.n} seed={spec.seed}",
        f"P(Dropout=Yes) = {spec.class_prior:.6f}",
    ]
    for label in CLASSES:
        for (name, values), dist in zip(PREDICTORS, spec.conditionals[label]):
            if len(set(dist)) == 1:
                continue
            parts = ", ".join(f"{v}={p:.4f}" for v, p in zip(values, dist))
            lines.append(f"P({name} | Dropout={label}): {parts}")
    lines.append("all distributions not listed are uniform; attributes independent given Dropout")
    return lines
