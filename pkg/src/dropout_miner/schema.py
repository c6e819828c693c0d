"""Student variables, their closed value sets, and record <-> row conversion."""

from __future__ import annotations

import enum
from dataclasses import dataclass, fields
from typing import Iterable

from .arff import AttributeDecl, Dataset

__all__ = [
    "GradeBand",
    "StudentRecord",
    "DomainViolation",
    "OutOfRange",
    "STUDENT_VARIABLES",
    "TARGET",
    "grade_from_percentage",
    "builtin_schema",
    "student_to_row",
    "row_to_student",
    "students_to_dataset",
]


class DomainViolation(ValueError):
    pass


class OutOfRange(ValueError):
    pass


class GradeBand(str, enum.Enum):
    O = "O"
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"
    F = "F"


# lower bound of each band, percent; F covers everything below 40
_BAND_FLOORS = (
    (90.0, GradeBand.O),
    (80.0, GradeBand.A),
    (70.0, GradeBand.B),
    (60.0, GradeBand.C),
    (50.0, GradeBand.D),
    (40.0, GradeBand.E),
)

_GRADES = tuple(b.value for b in GradeBand)
_QUALIFICATIONS = ("no-education", "elementary", "secondary", "UG", "PG", "Ph.D.", "NA")

# (record field, file attribute name, allowed values), in file column order
STUDENT_VARIABLES: tuple[tuple[str, str, tuple[str, ...]], ...] = (
    ("branch", "Branch", ("CS", "IT", "ME")),
    ("sex", "Sex", ("Male", "Female")),
    ("cat", "Cat", ("Unreserved", "OBC", "SC", "ST")),
    ("hsg", "HSG", _GRADES),
    ("ssg", "SSG", _GRADES),
    ("atype", "Atype", ("UPSEE", "Direct")),
    ("med", "Med", ("Hindi", "English")),
    ("lloc", "LLoc", ("Village", "Town", "Tahseel", "District")),
    ("hos", "Hos", ("Yes", "No")),
    ("fsize", "FSize", ("1", "2", "3", ">3")),
    ("fstat", "FStat", ("Joint", "Individual")),
    ("fain", "FAIn", ("BPL", "poor", "medium", "high")),
    ("fqual", "FQual", _QUALIFICATIONS),
    ("mqual", "MQual", _QUALIFICATIONS),
    ("focc", "FOcc", ("Service", "Business", "Agriculture", "Retired", "NA")),
    ("mocc", "MOcc", ("HW", "Service", "Retired", "NA")),
    ("dropout", "Dropout", ("Yes", "No")),
)

TARGET = "Dropout"

# long forms used only when printing
DISPLAY_NAMES = {("MOcc", "HW"): "House-wife (HW)"}


def grade_from_percentage(p: float) -> GradeBand:
    """Band an aggregate percentage; bands are half-open, e.g. A is [80, 90)."""
    if not 0 <= p <= 100:
        raise OutOfRange(f"percentage must lie in [0, 100], got {p!r}")
    for floor, band in _BAND_FLOORS:
        if p >= floor:
            return band
    return GradeBand.F


def builtin_schema() -> list[AttributeDecl]:
    return [AttributeDecl(name, values) for _, name, values in STUDENT_VARIABLES]


@dataclass(frozen=True)
class StudentRecord:
    branch: str
    sex: str
    cat: str
    hsg: GradeBand
    ssg: GradeBand
    atype: str
    med: str
    lloc: str
    hos: str
    fsize: str
    fstat: str
    fain: str
    fqual: str
    mqual: str
    focc: str
    mocc: str
    dropout: str

    def __post_init__(self):
        for fname, attr, allowed in STUDENT_VARIABLES:
            value = getattr(self, fname)
            if fname in ("hsg", "ssg"):
                try:
                    object.__setattr__(self, fname, GradeBand(value))
                except ValueError:
                    raise DomainViolation(f"{attr}: {value!r} is not a grade band") from None
            elif value not in allowed:
                raise DomainViolation(f"{attr}: {value!r} not in {{{', '.join(allowed)}}}")


_FIELD_ORDER = tuple(f.name for f in fields(StudentRecord))
assert _FIELD_ORDER == tuple(v[0] for v in STUDENT_VARIABLES)


def student_to_row(s: StudentRecord) -> tuple[int, ...]:
    row = []
    for fname, _, allowed in STUDENT_VARIABLES:
        value = getattr(s, fname)
        if isinstance(value, GradeBand):
            value = value.value
        row.append(allowed.index(value))
    return tuple(row)


def row_to_student(row) -> StudentRecord:
    if len(row) != len(STUDENT_VARIABLES):
        raise DomainViolation(f"expected {len(STUDENT_VARIABLES)} cells, got {len(row)}")
    kwargs = {}
    for cell, (fname, attr, allowed) in zip(row, STUDENT_VARIABLES):
        if isinstance(cell, bool) or not isinstance(cell, int) or not 0 <= cell < len(allowed):
            raise DomainViolation(f"{attr}: cell {cell!r} is not an index into {len(allowed)} values")
        kwargs[fname] = allowed[cell]
    return StudentRecord(**kwargs)


def students_to_dataset(students: Iterable[StudentRecord], relation: str = "drop") -> Dataset:
    return Dataset(relation, tuple(builtin_schema()), tuple(student_to_row(s) for s in students))
