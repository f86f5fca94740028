"""Character tables: parsing the CTBL-1 format, validation, and class-function algebra.

Conventions: class 0 is the identity class, character 0 is the trivial
character, and all indices are 0-based in file order.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from importlib import resources
from math import gcd
from pathlib import Path
from typing import Sequence

from sct.cyclotomic import Cyclotomic, CyclotomicSyntaxError, cyc_sum, parse, serialize

FORMAT = "CTBL-1"


class TableError(ValueError):
    """Malformed or invalid character table input."""


@dataclass(frozen=True)
class ClassFunction:
    """Values f(g_j) on the conjugacy classes, in class order."""

    values: tuple[Cyclotomic, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(_cyc(v) for v in self.values))

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, j: int) -> Cyclotomic:
        return self.values[j]

    def __iter__(self):
        return iter(self.values)

    def __add__(self, other: ClassFunction) -> ClassFunction:
        _check_len(self, other)
        return ClassFunction(tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other: ClassFunction) -> ClassFunction:
        _check_len(self, other)
        return ClassFunction(tuple(a - b for a, b in zip(self.values, other.values)))

    def scale(self, c) -> ClassFunction:
        return ClassFunction(tuple(v * c for v in self.values))

    def __mul__(self, other: ClassFunction) -> ClassFunction:
        _check_len(self, other)
        return ClassFunction(tuple(a * b for a, b in zip(self.values, other.values)))

    def __pow__(self, k: int) -> ClassFunction:
        return ClassFunction(tuple(v**k for v in self.values))

    def __str__(self) -> str:
        return "(" + ", ".join(serialize(v) for v in self.values) + ")"


def _cyc(v) -> Cyclotomic:
    return v if isinstance(v, Cyclotomic) else Cyclotomic(v)


def _check_len(f: ClassFunction, g: ClassFunction) -> None:
    if len(f) != len(g):
        raise ValueError(f"class function length mismatch: {len(f)} != {len(g)}")


@dataclass(frozen=True)
class CharacterTable:
    name: str
    order: int
    exponent: int
    class_sizes: tuple[int, ...]
    values: tuple[tuple[Cyclotomic, ...], ...] = field(repr=False)

    @property
    def k(self) -> int:
        return len(self.class_sizes)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(int(row[0].rational()) for row in self.values)

    @cached_property
    def is_rational(self) -> bool:
        return all(v.is_rational() for row in self.values for v in row)

    @cached_property
    def int_values(self) -> tuple[tuple[int, ...], ...] | None:
        """The table as plain integers when every value is rational, else None."""
        if not self.is_rational:
            return None
        return tuple(tuple(int(v.rational()) for v in row) for row in self.values)

    def character(self, i: int) -> ClassFunction:
        return ClassFunction(self.values[i])

    def ones(self) -> ClassFunction:
        return ClassFunction((Cyclotomic(1),) * self.k)

    def zeros(self) -> ClassFunction:
        return ClassFunction((Cyclotomic(0),) * self.k)

    def indicator(self, j: int) -> ClassFunction:
        """Indicator function of conjugacy class j."""
        return ClassFunction(tuple(Cyclotomic(int(m == j)) for m in range(self.k)))

    def regular_character(self) -> ClassFunction:
        return self.indicator(0).scale(self.order)

    def to_json(self) -> dict:
        return {
            "format": FORMAT,
            "name": self.name,
            "order": self.order,
            "exponent": self.exponent,
            "class_sizes": list(self.class_sizes),
            "characters": [[serialize(v) for v in row] for row in self.values],
        }

    @cached_property
    def digest(self) -> str:
        """sha256 of the canonical JSON form; identifies the table in checkpoints."""
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def inner_product(t: CharacterTable, f: ClassFunction, g: ClassFunction) -> Cyclotomic:
    """(1/|G|) * sum_j |K_j| f(g_j) conj(g(g_j))."""
    if len(f) != t.k or len(g) != t.k:
        raise ValueError(f"class functions must have length {t.k}")
    total = cyc_sum(f[j] * g[j].conjugate() * t.class_sizes[j] for j in range(t.k))
    return total * Fraction(1, t.order)


def dual_coefficients(t: CharacterTable, f: ClassFunction) -> tuple[Cyclotomic, ...]:
    """Coordinates c_i of f in the basis chi_i(1) * chi_i."""
    if len(f) != t.k:
        raise ValueError(f"class function must have length {t.k}")
    return tuple(
        inner_product(t, f, t.character(i)) * Fraction(1, t.degrees[i]) for i in range(t.k)
    )


def reconstruct(t: CharacterTable, coeffs: Sequence[Cyclotomic]) -> ClassFunction:
    """Inverse of dual_coefficients: sum_i c_i chi_i(1) chi_i."""
    out = t.zeros()
    for i, c in enumerate(coeffs):
        if c:
            out = out + t.character(i).scale(c * t.degrees[i])
    return out


def pointwise(t: CharacterTable, f: ClassFunction, g: ClassFunction) -> ClassFunction:
    if len(f) != t.k or len(g) != t.k:
        raise ValueError(f"class functions must have length {t.k}")
    return f * g


# --- parsing and validation ---------------------------------------------------


def parse_ctbl(text: str) -> CharacterTable:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TableError(f"syntax error: {exc}") from None
    return table_from_json(data)


def table_from_json(data) -> CharacterTable:
    if not isinstance(data, dict):
        raise TableError("syntax error: top level must be a JSON object")
    if data.get("format") != FORMAT:
        raise TableError(f"syntax error: format must be {FORMAT!r}, got {data.get('format')!r}")
    for key in ("name", "order", "exponent", "class_sizes", "characters"):
        if key not in data:
            raise TableError(f"syntax error: missing field {key!r}")
    name = data["name"]
    if not isinstance(name, str):
        raise TableError("syntax error: name must be a string")
    order, exponent = data["order"], data["exponent"]
    for label, v in (("order", order), ("exponent", exponent)):
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise TableError(f"syntax error: {label} must be a positive integer")
    sizes = data["class_sizes"]
    if not isinstance(sizes, list) or not all(isinstance(s, int) and not isinstance(s, bool) for s in sizes):
        raise TableError("syntax error: class_sizes must be a list of integers")
    rows = data["characters"]
    k = len(sizes)
    if not isinstance(rows, list) or len(rows) != k or any(
        not isinstance(r, list) or len(r) != k for r in rows
    ):
        raise TableError(f"matrix not square of size k={k}")
    values = []
    for i, row in enumerate(rows):
        parsed = []
        for j, s in enumerate(row):
            if not isinstance(s, str):
                raise TableError(f"syntax error: value [{i}][{j}] must be a string")
            try:
                parsed.append(parse(s))
            except CyclotomicSyntaxError as exc:
                raise TableError(f"syntax error in value [{i}][{j}]: {exc}") from None
        values.append(tuple(parsed))
    t = CharacterTable(name, order, exponent, tuple(sizes), tuple(values))
    validate(t)
    return t


def validate(t: CharacterTable) -> None:
    """Check every table invariant exactly; raise TableError naming the first failure."""
    k = t.k
    if k == 0:
        raise TableError("matrix not square of size k=0: table is empty")
    if any(s < 1 for s in t.class_sizes):
        raise TableError("class size check failed: class sizes must be positive")
    if t.class_sizes[0] != 1:
        raise TableError("class size check failed: class 0 must be the identity (size 1)")
    if sum(t.class_sizes) != t.order:
        raise TableError(f"class size check failed: sizes sum to {sum(t.class_sizes)}, order is {t.order}")
    if any(t.order % s for s in t.class_sizes):
        raise TableError("class size check failed: class sizes must divide the group order")
    if any(v != 1 for v in t.values[0]):
        raise TableError("row 0 must be the trivial character (all ones)")
    for i, row in enumerate(t.values):
        d = row[0]
        if not d.is_integer() or d.rational() <= 0:
            raise TableError(f"degree check failed: chi_{i}(1) = {d} is not a positive integer")
    for i, row in enumerate(t.values):
        for j, v in enumerate(row):
            if t.exponent % v.conductor:
                raise TableError(
                    f"conductor check failed: value [{i}][{j}] has conductor {v.conductor} "
                    f"not dividing exponent {t.exponent}"
                )
    _check_orthogonality(t)


def _check_orthogonality(t: CharacterTable) -> None:
    k, order, sizes = t.k, t.order, t.class_sizes
    ints = t.int_values
    if ints is not None:
        rows = ints
        conj = ints
        zero = 0
    else:
        rows = t.values
        conj = tuple(tuple(v.conjugate() for v in row) for row in t.values)
        zero = Cyclotomic(0)
    for i in range(k):
        for l in range(i, k):
            s = sum((sizes[j] * rows[i][j] * conj[l][j] for j in range(k)), zero)
            if s != (order if i == l else 0):
                raise TableError(f"class/row orthogonality violated for characters {i}, {l}")
    for j in range(k):
        for m in range(j, k):
            s = sum((rows[i][j] * conj[i][m] for i in range(k)), zero)
            expected = order // sizes[j] if j == m else 0
            if s != expected:
                raise TableError(f"column orthogonality violated for classes {j}, {m}")


def load_table(path: str | Path) -> CharacterTable:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise TableError(f"cannot read {path}: {exc.strerror}") from None
    return parse_ctbl(text)


FIXTURES = ("trivial", "z2", "z3", "z4", "z5", "z6", "s3", "d4", "q8", "a4", "s4", "a5", "s7", "sp6_2")


def fixture(name: str) -> CharacterTable:
    """One of the bundled tables, e.g. ``fixture("sp6_2")``."""
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}")
    text = resources.files("sct").joinpath("tables", f"{name}.ctbl").read_text(encoding="utf-8")
    return parse_ctbl(text)


def units_mod(n: int) -> list[int]:
    return [a for a in range(1, n + 1) if gcd(a, n) == 1]
