"""
Reader and writer for the subset of ARFF used as the pipeline's data files.

Accepted grammar::

    % comment lines (first non-blank char is '%') may appear anywhere
    @relation <name>
    @attribute <name> {v1, v2, ...}      nominal, one or more distinct values
    @attribute <name> numeric
    @data
    v1, 3.25, ?                          one instance per line, '?' = missing

Keywords are case-insensitive, names and nominal values are case-sensitive.
Whitespace around every token is dropped and blank lines are ignored. A token
wrapped in single quotes keeps its spaces and commas verbatim; inside quotes
the escapes ``\\\\``, ``\\'``, ``\\n``, ``\\r`` and ``\\t`` are recognised. A
quoted ``'?'`` is the literal value ``?``, not a missing cell.

Cells are held as plain Python values: ``int`` (0-based index into the
attribute's nominal values), ``float`` (numeric) or ``None`` (missing).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

__all__ = [
    "AttributeDecl",
    "Dataset",
    "ArffError",
    "ArffSyntaxError",
    "MalformedHeader",
    "ArityMismatch",
    "UndeclaredNominal",
    "NonNumericCell",
    "parse_arff",
    "write_arff",
    "validate",
]

_NUMBER = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?\Z")
_UNESCAPE = {"\\": "\\", "'": "'", "n": "\n", "r": "\r", "t": "\t"}
_ESCAPE = {"\\": "\\\\", "'": "\\'", "\n": "\\n", "\r": "\\r", "\t": "\\t"}
_SPECIAL = set(",'\"%{}\\")


@dataclass(frozen=True)
class AttributeDecl:
    """A column declaration; ``values`` is ``None`` for numeric attributes."""

    name: str
    values: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if self.values is not None and not isinstance(self.values, tuple):
            object.__setattr__(self, "values", tuple(self.values))

    @classmethod
    def nominal(cls, name: str, values: Sequence[str]) -> "AttributeDecl":
        return cls(name, tuple(values))

    @classmethod
    def numeric(cls, name: str) -> "AttributeDecl":
        return cls(name, None)

    @property
    def is_nominal(self) -> bool:
        return self.values is not None

    @property
    def kind(self) -> str:
        return "nominal" if self.is_nominal else "numeric"

    def index_of(self, value: str) -> int:
        if self.values is None:
            raise TypeError(f"attribute {self.name!r} is numeric")
        return self.values.index(value)


@dataclass(frozen=True)
class Dataset:
    relation: str
    attributes: tuple[AttributeDecl, ...]
    instances: tuple[tuple, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "instances", tuple(tuple(r) for r in self.instances))

    def attribute_index(self, name: str) -> int:
        for i, a in enumerate(self.attributes):
            if a.name == name:
                return i
        raise KeyError(name)

    def attribute_names(self) -> list[str]:
        return [a.name for a in self.attributes]

    def subset(self, indices: Sequence[int]) -> "Dataset":
        rows = self.instances
        return Dataset(self.relation, self.attributes, tuple(rows[i] for i in indices))

    def __len__(self) -> int:
        return len(self.instances)


class ArffError(ValueError):
    """Base class for parse failures; ``line`` is 1-based (0 = whole file)."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class ArffSyntaxError(ArffError):
    pass


class MalformedHeader(ArffError):
    pass


class ArityMismatch(ArffError):
    def __init__(self, line: int, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(line, f"row has {got} cells, expected {expected}")


class UndeclaredNominal(ArffError):
    def __init__(self, line: int, attr: str, token: str):
        self.attr = attr
        self.token = token
        super().__init__(line, f"value {token!r} is not declared for attribute {attr!r}")


class NonNumericCell(ArffError):
    def __init__(self, line: int, attr: str, token: str):
        self.attr = attr
        self.token = token
        super().__init__(line, f"{token!r} is not a finite number (attribute {attr!r})")


# --------------------------------------------------------------------------
# tokenizing

def _skip_ws(text: str, i: int) -> int:
    while i < len(text) and text[i].isspace():
        i += 1
    return i


def _read_quoted(text: str, i: int, lineno: int) -> tuple[str, int]:
    # text[i] is the opening quote; returns (value, index after closing quote)
    out = []
    i += 1
    while i < len(text):
        c = text[i]
        if c == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            out.append(_UNESCAPE.get(nxt, "\\" + nxt))
            i += 2
        elif c == "'":
            return "".join(out), i + 1
        else:
            out.append(c)
            i += 1
    raise ArffSyntaxError(lineno, "unterminated quoted token")


def _split_list(text: str, lineno: int) -> list[tuple[str, bool]]:
    """Split a comma-separated list into ``(token, was_quoted)`` pairs."""
    tokens = []
    i = 0
    n = len(text)
    while True:
        i = _skip_ws(text, i)
        if i < n and text[i] == "'":
            value, i = _read_quoted(text, i, lineno)
            i = _skip_ws(text, i)
            if i < n and text[i] != ",":
                raise ArffSyntaxError(lineno, f"unexpected text after quoted token: {text[i:]!r}")
            tokens.append((value, True))
        else:
            j = text.find(",", i)
            if j < 0:
                j = n
            tokens.append((text[i:j].strip(), False))
            i = j
        if i >= n:
            return tokens
        i += 1


def _read_name(text: str, lineno: int, stop_at_brace: bool) -> tuple[str, str]:
    """Read one name token from the start of ``text``; return (name, rest)."""
    text = text.lstrip()
    if text.startswith("'"):
        name, i = _read_quoted(text, 0, lineno)
        return name, text[i:]
    i = 0
    while i < len(text) and not text[i].isspace() and not (stop_at_brace and text[i] == "{"):
        i += 1
    return text[:i], text[i:]


def _needs_quotes(s: str) -> bool:
    if s == "" or s == "?" or s[0] == "@":
        return True
    return any(c.isspace() or c in _SPECIAL for c in s)


def _quote(s: str) -> str:
    if not _needs_quotes(s):
        return s
    return "'" + "".join(_ESCAPE.get(c, c) for c in s) + "'"


# --------------------------------------------------------------------------
# parsing

def _parse_attribute(rest: str, lineno: int) -> AttributeDecl:
    name, rest = _read_name(rest, lineno, stop_at_brace=True)
    if not name:
        raise MalformedHeader(lineno, "attribute name is empty")
    spec = rest.strip()
    if spec.startswith("{"):
        if not spec.endswith("}"):
            raise MalformedHeader(lineno, f"unterminated nominal list for {name!r}")
        inner = spec[1:-1]
        if not inner.strip():
            raise MalformedHeader(lineno, f"nominal attribute {name!r} declares no values")
        values = []
        for token, quoted in _split_list(inner, lineno):
            if not token and not quoted:
                raise MalformedHeader(lineno, f"empty value in nominal list of {name!r}")
            if token in values:
                raise MalformedHeader(lineno, f"duplicate value {token!r} in {name!r}")
            values.append(token)
        return AttributeDecl(name, tuple(values))
    if spec.lower() == "numeric":
        return AttributeDecl(name, None)
    raise MalformedHeader(lineno, f"unsupported type {spec!r} for attribute {name!r}")


def _parse_cell(token: str, quoted: bool, attr: AttributeDecl, lookup, lineno: int):
    if token == "?" and not quoted:
        return None
    if lookup is not None:
        try:
            return lookup[token]
        except KeyError:
            raise UndeclaredNominal(lineno, attr.name, token) from None
    if _NUMBER.match(token):
        value = float(token)
        if math.isfinite(value):
            return value
    raise NonNumericCell(lineno, attr.name, token)


def parse_arff(text: str) -> Dataset:
    """Parse ARFF text into a :class:`Dataset`, raising an :class:`ArffError`
    subclass located at the offending line."""
    relation = None
    attributes: list[AttributeDecl] = []
    names: set[str] = set()
    lookups: list[Optional[dict]] = []
    rows = []
    in_data = False

    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue

        if in_data:
            tokens = _split_list(line, lineno)
            if len(tokens) != len(attributes):
                raise ArityMismatch(lineno, len(attributes), len(tokens))
            rows.append(tuple(
                _parse_cell(tok, q, attr, lk, lineno)
                for (tok, q), attr, lk in zip(tokens, attributes, lookups)
            ))
            continue

        parts = stripped.split(None, 1)
        keyword = parts[0].lower()
        rest = parts[1] if len(parts) > 1 else ""
        if keyword == "@relation":
            if relation is not None:
                raise MalformedHeader(lineno, "duplicate @relation")
            if not rest:
                raise MalformedHeader(lineno, "@relation needs a name")
            relation, tail = _read_name(rest, lineno, stop_at_brace=False)
            if tail.strip():
                raise MalformedHeader(lineno, f"unexpected text after relation name: {tail.strip()!r}")
        elif keyword == "@attribute":
            if relation is None:
                raise MalformedHeader(lineno, "@attribute before @relation")
            attr = _parse_attribute(rest, lineno)
            if attr.name in names:
                raise MalformedHeader(lineno, f"duplicate attribute name {attr.name!r}")
            names.add(attr.name)
            attributes.append(attr)
            lookups.append({v: i for i, v in enumerate(attr.values)} if attr.is_nominal else None)
        elif keyword == "@data":
            if relation is None:
                raise MalformedHeader(lineno, "@data before @relation")
            if not attributes:
                raise MalformedHeader(lineno, "no @attribute declarations before @data")
            if rest:
                raise MalformedHeader(lineno, f"unexpected text after @data: {rest!r}")
            in_data = True
        else:
            raise MalformedHeader(lineno, f"expected a header declaration, got {stripped[:40]!r}")

    if relation is None:
        raise MalformedHeader(0, "missing @relation")
    if not in_data:
        raise MalformedHeader(0, "missing @data")
    return Dataset(relation, tuple(attributes), tuple(rows))


# --------------------------------------------------------------------------
# writing

def _format_cell(value, attr: AttributeDecl) -> str:
    if value is None:
        return "?"
    if attr.is_nominal:
        return _quote(attr.values[value])
    return repr(float(value))


def write_arff(d: Dataset) -> str:
    """Render ``d`` in the accepted grammar; the output re-parses to ``d``."""
    out = [f"@relation {_quote(d.relation)}", ""]
    for a in d.attributes:
        if a.is_nominal:
            spec = "{" + ",".join(_quote(v) for v in a.values) + "}"
        else:
            spec = "numeric"
        out.append(f"@attribute {_quote(a.name)} {spec}")
    out.append("")
    out.append("@data")
    for row in d.instances:
        out.append(",".join(_format_cell(v, a) for v, a in zip(row, d.attributes)))
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# validation

def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def validate(d: Dataset) -> list[str]:
    """List every broken Dataset invariant; empty means the dataset is valid.

    Each entry reads ``<rule>: row <i|->, attribute <name|->: <detail>``.
    """
    problems = []
    seen: set[str] = set()
    for a in d.attributes:
        if not isinstance(a.name, str) or not a.name:
            problems.append(f"EmptyName: row -, attribute {a.name!r}: attribute name must be a non-empty string")
        elif a.name in seen:
            problems.append(f"DuplicateAttribute: row -, attribute {a.name!r}: name declared more than once")
        seen.add(a.name)
        if a.is_nominal:
            if not a.values:
                problems.append(f"EmptyValues: row -, attribute {a.name!r}: nominal attribute has no values")
            if len(set(a.values)) != len(a.values):
                problems.append(f"DuplicateValue: row -, attribute {a.name!r}: nominal values repeat")

    width = len(d.attributes)
    for i, row in enumerate(d.instances):
        if len(row) != width:
            problems.append(f"ArityMismatch: row {i}, attribute -: {len(row)} cells for {width} attributes")
            continue
        for v, a in zip(row, d.attributes):
            if v is None:
                continue
            if a.is_nominal:
                if not isinstance(v, int) or isinstance(v, bool):
                    problems.append(f"CellKind: row {i}, attribute {a.name!r}: nominal cell {v!r} is not an index")
                elif not 0 <= v < len(a.values):
                    problems.append(
                        f"NominalRange: row {i}, attribute {a.name!r}: index {v} outside 0..{len(a.values) - 1}")
            elif not _is_number(v):
                problems.append(f"CellKind: row {i}, attribute {a.name!r}: numeric cell {v!r} is not a number")
            elif not math.isfinite(v):
                problems.append(f"NonFinite: row {i}, attribute {a.name!r}: {v!r}")
    return problems
