"""Exact arithmetic in cyclotomic fields.

Elements are stored in the power basis of Q(zeta_n) reduced modulo the n-th
cyclotomic polynomial, always at the smallest conductor n that contains them.
That makes the representation canonical, so ``==`` is structural.
"""
from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache, reduce
from math import gcd
from typing import Union

Number = Union[int, Fraction, "Cyclotomic"]


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def _prime_factors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


@lru_cache(maxsize=None)
def phi(n: int) -> int:
    result = n
    for p in _prime_factors(n):
        result -= result // p
    return result


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n, lowest degree first."""
    # x^n - 1 divided by Phi_d for every proper divisor d of n
    num = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            num = _exact_div(num, list(cyclotomic_polynomial(d)))
    return tuple(num)


def _exact_div(num: list[int], den: list[int]) -> list[int]:
    num = num[:]
    q = [0] * (len(num) - len(den) + 1)
    for i in range(len(q) - 1, -1, -1):
        c = num[i + len(den) - 1]  # den is monic
        q[i] = c
        if c:
            for j, d in enumerate(den):
                num[i + j] -= c * d
    return q


@lru_cache(maxsize=None)
def _power_table(n: int) -> tuple[tuple[int, ...], ...]:
    """Row e holds the coordinates of zeta_n**e in the power basis, 0 <= e < n."""
    f = phi(n)
    poly = cyclotomic_polynomial(n)
    rows = []
    cur = [1] + [0] * (f - 1)
    for _ in range(n):
        rows.append(tuple(cur))
        # multiply by x, then eliminate x**f using the monic relation
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            cur = [c - top * poly[i] for i, c in enumerate(cur)]
    return tuple(rows)


def _from_exponents(n: int, terms: dict[int, Fraction]) -> list[Fraction]:
    """Reduce a sum of c * zeta_n**e (e taken mod n) to power-basis coordinates."""
    table = _power_table(n)
    out = [Fraction(0)] * phi(n)
    for e, c in terms.items():
        if not c:
            continue
        row = table[e % n]
        for i, r in enumerate(row):
            if r:
                out[i] += c * r
    return out


def _solve_left(rows: list[list[Fraction]]) -> tuple[list[int], list[list[Fraction]]]:
    """For a full-row-rank r x c matrix, pick r pivot columns and invert that square block."""
    r = len(rows)
    # gaussian elimination on the transpose finds independent columns
    cols = list(zip(*rows))
    pivots: list[int] = []
    basis: list[tuple[list[Fraction], int]] = []
    for j, col in enumerate(cols):
        v = [Fraction(x) for x in col]
        for b, lead in basis:
            if v[lead]:
                f = v[lead] / b[lead]
                v = [x - f * y for x, y in zip(v, b)]
        lead = next((i for i, x in enumerate(v) if x), None)
        if lead is not None:
            basis.append((v, lead))
            pivots.append(j)
            if len(pivots) == r:
                break
    square = [[Fraction(rows[i][j]) for j in pivots] for i in range(r)]
    return pivots, _invert(square)


def _invert(m: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(m)
    aug = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next(i for i in range(col, n) if aug[i][col])
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col]:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[col])]
    return [row[n:] for row in aug]


@lru_cache(maxsize=None)
def _descent(d: int, n: int):
    """Embedding data for Q(zeta_d) inside Q(zeta_n), d | n."""
    step = n // d
    table = _power_table(n)
    emb = [list(map(Fraction, table[i * step])) for i in range(phi(d))]
    pivots, inv = _solve_left(emb)
    return emb, pivots, inv


def _try_descend(n: int, coeffs: list[Fraction], d: int) -> list[Fraction] | None:
    emb, pivots, inv = _descent(d, n)
    sub = [coeffs[j] for j in pivots]
    cand = [sum((sub[r] * inv[r][c] for r in range(len(sub))), Fraction(0)) for c in range(len(sub))]
    back = [Fraction(0)] * len(coeffs)
    for c, row in zip(cand, emb):
        if c:
            for i, x in enumerate(row):
                if x:
                    back[i] += c * x
    return cand if back == coeffs else None


def _canonical_conductor(n: int) -> int:
    return n // 2 if n % 4 == 2 else n


def _minimize(n: int, coeffs: list[Fraction]) -> tuple[int, list[Fraction]]:
    if n == 1:
        return n, coeffs
    if not any(coeffs[1:]):
        return 1, [coeffs[0]]
    changed = True
    while changed and n > 1:
        changed = False
        for p in _prime_factors(n):
            d = _canonical_conductor(n // p)
            if d == n:
                continue
            got = _try_descend(n, coeffs, d)
            if got is not None:
                n, coeffs = d, got
                changed = True
                break
    return n, coeffs


class Cyclotomic:
    """An element of Q(zeta_n) in canonical form.

    ``conductor`` is minimal and ``coeffs`` maps exponent e to the rational
    coefficient of zeta_n**e (nonzero entries only).
    """

    __slots__ = ("_n", "_c", "_hash")

    def __init__(self, value: int | Fraction = 0):
        self._n = 1
        self._c = (Fraction(value),)
        self._hash = None

    @classmethod
    def _make(cls, n: int, coeffs: list[Fraction], minimize: bool = True) -> Cyclotomic:
        if minimize:
            n, coeffs = _minimize(n, coeffs)
        obj = cls.__new__(cls)
        obj._n = n
        obj._c = tuple(coeffs)
        obj._hash = None
        return obj

    @classmethod
    def root(cls, n: int, e: int = 1) -> Cyclotomic:
        """zeta_n ** e with zeta_n = exp(2 pi i / n)."""
        if n < 1:
            raise ValueError(f"E({n}): root order must be positive")
        m = _canonical_conductor(n)
        if m != n:
            # zeta_{2m} = -zeta_m**((m+1)/2) for odd m
            r = cls.root(m, e * ((m + 1) // 2))
            return -r if e % 2 else r
        return cls._make(n, _from_exponents(n, {e % n: Fraction(1)}))

    @classmethod
    def from_exponents(cls, n: int, terms: dict[int, int | Fraction]) -> Cyclotomic:
        """Build sum(c * zeta_n**e). ``n`` need not be a canonical conductor."""
        out = cls(0)
        for e, c in terms.items():
            if c:
                out = out + cls.root(n, e) * c
        return out

    # --- accessors -------------------------------------------------------

    @property
    def conductor(self) -> int:
        return self._n

    @property
    def coeffs(self) -> dict[int, Fraction]:
        return {e: c for e, c in enumerate(self._c) if c}

    def is_rational(self) -> bool:
        return self._n == 1

    def is_integer(self) -> bool:
        return self._n == 1 and self._c[0].denominator == 1

    def rational(self) -> Fraction:
        if self._n != 1:
            raise ValueError(f"{self} is not rational")
        return self._c[0]

    def is_zero(self) -> bool:
        return self._n == 1 and not self._c[0]

    def __bool__(self) -> bool:
        return not self.is_zero()

    # --- arithmetic ------------------------------------------------------

    def _lift(self, n: int) -> list[Fraction]:
        if n == self._n:
            return list(self._c)
        step = n // self._n
        return _from_exponents(n, {e * step: c for e, c in enumerate(self._c) if c})

    @staticmethod
    def _coerce(other) -> Cyclotomic | None:
        if isinstance(other, Cyclotomic):
            return other
        if isinstance(other, (int, Fraction)):
            return Cyclotomic(other)
        return None

    def __add__(self, other: Number) -> Cyclotomic:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self._n == 1 and other._n == 1:
            return Cyclotomic(self._c[0] + other._c[0])
        n = _lcm(self._n, other._n)
        return Cyclotomic._make(n, [a + b for a, b in zip(self._lift(n), other._lift(n))])

    __radd__ = __add__

    def __neg__(self) -> Cyclotomic:
        return Cyclotomic._make(self._n, [-c for c in self._c], minimize=False)

    def __sub__(self, other: Number) -> Cyclotomic:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Number) -> Cyclotomic:
        return (-self) + other

    def __mul__(self, other: Number) -> Cyclotomic:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other._n == 1:
            s = other._c[0]
            if not s:
                return Cyclotomic(0)
            return Cyclotomic._make(self._n, [c * s for c in self._c], minimize=False)
        if self._n == 1:
            return other * self
        n = _lcm(self._n, other._n)
        a, b = self._lift(n), other._lift(n)
        prod: dict[int, Fraction] = {}
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        prod[i + j] = prod.get(i + j, 0) + x * y
        return Cyclotomic._make(n, _from_exponents(n, prod))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> Cyclotomic:
        if k < 0:
            return self.inverse() ** (-k)
        result, base = Cyclotomic(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self) -> Cyclotomic:
        """Multiplicative inverse via the product of the nontrivial Galois conjugates."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        if self._n == 1:
            return Cyclotomic(1 / self._c[0])
        others = Cyclotomic(1)
        for k in range(2, self._n):
            if gcd(k, self._n) == 1:
                others = others * self.galois(k)
        norm = (self * others).rational()
        return others * (1 / norm)

    def __truediv__(self, other: Number) -> Cyclotomic:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other: Number) -> Cyclotomic:
        return Cyclotomic(other) * self.inverse()

    # --- Galois action ----------------------------------------------------

    def galois(self, k: int) -> Cyclotomic:
        """Image under the automorphism zeta_n -> zeta_n**k."""
        n = self._n
        if gcd(k, n) != 1:
            raise ValueError(f"galois exponent {k} is not coprime to conductor {n}")
        if n == 1:
            return self
        terms = {(e * k) % n: c for e, c in enumerate(self._c) if c}
        # the automorphism fixes the conductor, no descent needed
        return Cyclotomic._make(n, _from_exponents(n, terms), minimize=False)

    def conjugate(self) -> Cyclotomic:
        return self.galois(-1)

    def is_real(self) -> bool:
        return self == self.conjugate()

    def classify(self) -> str | Fraction:
        """``Fraction`` value if rational, else ``"real"`` or ``"complex"``."""
        if self._n == 1:
            return self._c[0]
        return "real" if self.is_real() else "complex"

    # --- comparison / hashing ----------------------------------------------

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self._n == other._n and self._c == other._c

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._c[0]) if self._n == 1 else hash((self._n, self._c))
        return self._hash

    def __repr__(self) -> str:
        return f"Cyclotomic({str(self)!r})"

    def __str__(self) -> str:
        return serialize(self)


def _fmt_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def serialize(a: Cyclotomic) -> str:
    """GAP-style ``E(n)`` text; coefficients may be rational (``p/q``)."""
    n = a.conductor
    parts = []
    for e, c in sorted(a.coeffs.items()):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if e == 0:
            body = _fmt_coeff(mag)
        else:
            root = f"E({n})" if e == 1 else f"E({n})^{e}"
            body = root if mag == 1 else f"{_fmt_coeff(mag)}*{root}"
        parts.append((sign, body))
    if not parts:
        return "0"
    text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        text += sign + body
    return text


class CyclotomicSyntaxError(ValueError):
    def __init__(self, text: str, pos: int, msg: str):
        super().__init__(f"{msg} at position {pos} in {text!r}")
        self.text = text
        self.pos = pos


_WS = re.compile(r"\s*")
_COEFF = re.compile(r"(\d+)(?:\s*/\s*(\d+))?")
_ROOT = re.compile(r"E\(\s*(-?\d+)\s*\)(?:\s*\^\s*(\d+))?")


class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self) -> None:
        self.pos = _WS.match(self.text, self.pos).end()

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos : self.pos + 1]

    def match(self, rx: re.Pattern):
        self.skip()
        m = rx.match(self.text, self.pos)
        if m:
            self.pos = m.end()
        return m

    def fail(self, msg: str):
        raise CyclotomicSyntaxError(self.text, self.pos, msg)


def _parse_root(cur: _Cursor) -> Cyclotomic:
    at = cur.pos
    m = cur.match(_ROOT)
    if not m:
        cur.fail("expected E(n)")
    n = int(m.group(1))
    if n < 1:
        raise CyclotomicSyntaxError(cur.text, at, f"E({n}) needs a positive root order")
    return Cyclotomic.root(n, int(m.group(2) or 1))


def _parse_term(cur: _Cursor) -> Cyclotomic:
    m = cur.match(_COEFF)
    if m is None:
        return _parse_root(cur)
    den = int(m.group(2) or 1)
    if den == 0:
        cur.fail("zero denominator")
    coeff = Fraction(int(m.group(1)), den)
    if cur.peek() == "*":
        cur.pos += 1
        return _parse_root(cur) * coeff
    return Cyclotomic(coeff)


def parse(text: str) -> Cyclotomic:
    """Parse a value such as ``2``, ``-E(3)^2`` or ``1+2*E(5)-E(5)^4``.

    Whitespace is ignored. Coefficients may be written ``p/q``.
    """
    cur = _Cursor(text)
    sign = 1
    if cur.peek() == "-":
        cur.pos += 1
        sign = -1
    if not cur.peek():
        cur.fail("empty value")
    total = _parse_term(cur) * sign
    while cur.peek():
        op = cur.peek()
        if op not in "+-":
            cur.fail("expected '+' or '-'")
        cur.pos += 1
        if not cur.peek():
            cur.fail("dangling operator")
        term = _parse_term(cur)
        total = total + term if op == "+" else total - term
    return total


E = Cyclotomic.root


def cyc_sum(values) -> Cyclotomic:
    return reduce(lambda a, b: a + b, values, Cyclotomic(0))
