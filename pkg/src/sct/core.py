"""Wedderburn sums, filtrations, the good/bad test, and supercharacter theory axioms.

Character subsets are handled internally as bitmasks over character indices
(bit i set means chi_i is in the set). Public functions accept any iterable of
indices; the ``*_mask`` helpers are the hot paths used by the search code.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from operator import mul
from typing import Iterable, Sequence

from sct.chartab import CharacterTable, ClassFunction, units_mod


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def members(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


# --- partitions -----------------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    """Disjoint nonempty blocks over the ground set {0, ..., n-1}, sorted by least member.

    Used both for character partitions and class partitions. ``full`` tells
    whether the blocks cover the whole ground set.
    """

    blocks: tuple[frozenset[int], ...]
    n: int

    def __post_init__(self):
        blocks = tuple(sorted((frozenset(b) for b in self.blocks), key=min_or_raise))
        seen: set[int] = set()
        for b in blocks:
            if any(i < 0 or i >= self.n for i in b):
                raise ValueError(f"block {sorted(b)} has an index outside 0..{self.n - 1}")
            if seen & b:
                raise ValueError("blocks are not pairwise disjoint")
            seen |= b
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_masks(cls, masks: Iterable[int], n: int) -> Partition:
        return cls(tuple(frozenset(members(m)) for m in masks), n)

    @classmethod
    def singletons(cls, n: int) -> Partition:
        return cls(tuple(frozenset([i]) for i in range(n)), n)

    @property
    def full(self) -> bool:
        return sum(len(b) for b in self.blocks) == self.n

    @property
    def masks(self) -> tuple[int, ...]:
        return tuple(mask_of(b) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def __contains__(self, block) -> bool:
        return frozenset(block) in self.blocks

    def block_of(self, i: int) -> frozenset[int]:
        for b in self.blocks:
            if i in b:
                return b
        raise KeyError(i)

    def as_lists(self) -> list[list[int]]:
        return [sorted(b) for b in self.blocks]

    def __str__(self) -> str:
        return "|".join(",".join(map(str, sorted(b))) for b in self.blocks)


def min_or_raise(block: frozenset[int]) -> int:
    if not block:
        raise ValueError("partition blocks must be nonempty")
    return min(block)


IrrPartition = Partition
ClassPartition = Partition


def parse_blocks(text: str, n: int) -> Partition:
    """``"1,2|3"`` -> Partition with blocks {1,2} and {3}."""
    blocks = []
    for part in text.split("|"):
        part = part.strip()
        if not part:
            raise ValueError(f"empty block in {text!r}")
        blocks.append(frozenset(int(x) for x in part.split(",")))
    return Partition(tuple(blocks), n)


def refines(p: Partition, q: Partition) -> bool:
    """True iff every block of q is a union of blocks of p (p is finer than q)."""
    if p.n != q.n:
        raise ValueError(f"ground sets differ: {p.n} != {q.n}")
    if not (p.full and q.full):
        raise ValueError("refines() needs full partitions")
    return all(any(b <= c for c in q.blocks) for b in p.blocks)


# --- per-table arithmetic kernel ----------------------------------------------------


class _Kernel:
    """Precomputed rows for one table.

    Entries are plain ints when the table is rational, Cyclotomic otherwise,
    so the same code serves both; the int case is what makes big sweeps fast.
    """

    def __init__(self, t: CharacterTable):
        self.k = t.k
        self.order = t.order
        self.degrees = t.degrees
        self.rational = t.is_rational
        rows = t.int_values if self.rational else t.values
        self.rows = rows
        self.wedderburn = tuple(tuple(d * v for v in row) for d, row in zip(self.degrees, rows))
        if self.rational:
            conj = rows
        else:
            conj = tuple(tuple(v.conjugate() for v in row) for row in rows)
        self.weighted = tuple(
            tuple(s * v for s, v in zip(t.class_sizes, row)) for row in conj
        )

    def sigma(self, idx: Sequence[int]) -> list:
        if len(idx) == 1:
            return list(self.wedderburn[idx[0]])
        return [sum(col) for col in zip(*(self.wedderburn[i] for i in idx))]

    def witness(self, idx: Sequence[int], modulus: int | None = None):
        """First (chi, psi, k) separating members of idx in powers 2..k, else None.

        With ``modulus`` the comparison is done on residues, so a reported
        witness is a genuine inequality but ``None`` is only probable.
        """
        if len(idx) < 2:
            return None
        sigma = self.sigma(idx)
        m = idx[0]
        rest = idx[1:]
        dm = self.degrees[m]
        weighted, degrees = self.weighted, self.degrees
        if modulus is not None:
            sigma = [s % modulus for s in sigma]
        power = sigma
        for k in range(2, self.k + 1):
            if modulus is None:
                power = list(map(mul, power, sigma))
                sm = sum(map(mul, weighted[m], power))
                for i in rest:
                    si = sum(map(mul, weighted[i], power))
                    if dm * si != degrees[i] * sm:
                        return (m, i, k)
            else:
                power = [a * b % modulus for a, b in zip(power, sigma)]
                sm = sum(map(mul, weighted[m], power)) % modulus
                for i in rest:
                    si = sum(map(mul, weighted[i], power)) % modulus
                    if (dm * si - degrees[i] * sm) % modulus:
                        return (m, i, k)
        return None

    def class_keys(self, sigmas: Sequence[Sequence]) -> list[tuple]:
        return [tuple(s[j] for s in sigmas) for j in range(self.k)]

    def filtration_masks(self, sigmas: Sequence[Sequence]) -> list[int]:
        """Character blocks of the filtration generated by the given sigma vectors."""
        keys = self.class_keys(sigmas)
        groups: dict[tuple, list[int]] = {}
        for j, key in enumerate(keys):
            groups.setdefault(key, []).append(j)
        # the generated algebra is spanned by indicators of the level sets of
        # the generators, except the level set where all of them vanish
        zero = tuple(0 for _ in sigmas)
        blocks = [cls for key, cls in groups.items() if key != zero]
        char_keys: dict[tuple, int] = {}
        for i in range(self.k):
            row = self.weighted[i]
            d = self.degrees[i]
            key = tuple(_ratio(sum(row[j] for j in b), d) for b in blocks)
            char_keys[key] = char_keys.get(key, 0) | (1 << i)
        return sorted(char_keys.values(), key=_lowbit)

    def class_partition_masks(self, sigmas: Sequence[Sequence]) -> list[int]:
        groups: dict[tuple, int] = {}
        for j, key in enumerate(self.class_keys(sigmas)):
            groups[key] = groups.get(key, 0) | (1 << j)
        return sorted(groups.values(), key=_lowbit)


def _ratio(v, d: int):
    if isinstance(v, int):
        return Fraction(v, d)
    return v * Fraction(1, d)


def _lowbit(mask: int) -> int:
    return (mask & -mask).bit_length()


@lru_cache(maxsize=64)
def kernel(t: CharacterTable) -> _Kernel:
    return _Kernel(t)


# --- Wedderburn sums and the good/bad test -----------------------------------------


def _indices(t: CharacterTable, X: Iterable[int]) -> list[int]:
    idx = sorted(set(X))
    if not idx:
        raise ValueError("character subset must be nonempty")
    if idx[0] < 0 or idx[-1] >= t.k:
        raise IndexError(f"character index out of range 0..{t.k - 1}: {idx}")
    return idx


def wedderburn_sum(t: CharacterTable, X: Iterable[int]) -> ClassFunction:
    """sigma_X = sum over chi in X of chi(1) * chi."""
    return ClassFunction(tuple(kernel(t).sigma(_indices(t, X))))


class Status(str, Enum):
    GOOD = "good"
    BAD = "bad"
    PROBABLY_GOOD = "probably_good"


@dataclass(frozen=True)
class Verdict:
    status: Status
    witness: tuple[int, int, int] | None = None

    @property
    def good(self) -> bool:
        return self.status is Status.GOOD

    @property
    def bad(self) -> bool:
        return self.status is Status.BAD

    def __str__(self) -> str:
        if self.witness is None:
            return self.status.value
        chi, psi, k = self.witness
        return f"bad (witness: chars {chi},{psi} at power k={k})"


def is_good(t: CharacterTable, X: Iterable[int]) -> Verdict:
    """Decide whether X is a block of its own filtration.

    Compares the dual coefficients of chi(1)chi, for chi in X, in every power
    sigma_X**k with 2 <= k <= number of classes. The first differing pair is
    returned as the witness (least member, other member, k).
    """
    w = kernel(t).witness(_indices(t, X))
    return Verdict(Status.GOOD) if w is None else Verdict(Status.BAD, w)


def is_good_mask(t: CharacterTable, mask: int) -> Verdict:
    return is_good(t, members(mask))


def is_good_modular(t: CharacterTable, X: Iterable[int], primes: Sequence[int]) -> Verdict:
    """Residue version of is_good for integer tables.

    A BAD verdict is certain. PROBABLY_GOOD must be confirmed with is_good.
    """
    if not t.is_rational:
        raise ValueError(f"modular test needs a rational table; {t.name} is not")
    if not primes:
        raise ValueError("at least one prime is required")
    for p in primes:
        if t.order % p == 0 or any(d % p == 0 for d in t.degrees):
            raise ValueError(f"prime {p} divides the group order or a degree")
    modulus = 1
    for p in primes:
        modulus *= p
    # agreement modulo the product is agreement modulo every prime (CRT)
    w = kernel(t).witness(_indices(t, X), modulus)
    return Verdict(Status.PROBABLY_GOOD) if w is None else Verdict(Status.BAD, w)


# --- filtrations and supercharacter theories --------------------------------------


def _blocks_of(t: CharacterTable, P) -> list[list[int]]:
    blocks = P.blocks if isinstance(P, Partition) else P
    out = [_indices(t, b) for b in blocks]
    seen = 0
    for b in out:
        m = mask_of(b)
        if seen & m:
            raise ValueError("blocks are not pairwise disjoint")
        seen |= m
    return out


def filtration(t: CharacterTable, P) -> Partition:
    """The partition of Irr(G) cut out by the algebra generated by {sigma_X : X in P}.

    chi ~ psi iff chi(1)chi and psi(1)psi have equal coefficients in every
    element of that algebra. P may be a partial partition.
    """
    kern = kernel(t)
    sigmas = [kern.sigma(b) for b in _blocks_of(t, P)]
    return Partition.from_masks(kern.filtration_masks(sigmas), t.k)


def class_partition_from(t: CharacterTable, P: Partition) -> tuple[Partition, bool]:
    """Group classes on which every sigma_X (X in P) agrees.

    Returns the class partition and whether its block count equals len(P).
    """
    if not P.full:
        raise ValueError("class_partition_from needs a full partition")
    kern = kernel(t)
    sigmas = [kern.sigma(sorted(b)) for b in P.blocks]
    masks = kern.class_partition_masks(sigmas)
    return Partition.from_masks(masks, t.k), len(masks) == len(P)


@dataclass(frozen=True)
class SuperTheory:
    chars: Partition
    classes: Partition

    def to_json(self) -> dict:
        return {"chars": self.chars.as_lists(), "classes": self.classes.as_lists()}

    def __str__(self) -> str:
        return f"chars {self.chars} / classes {self.classes}"


class NotASuperTheory(ValueError):
    def __init__(self, axiom: str):
        super().__init__(axiom)
        self.axiom = axiom


def supertheory(t: CharacterTable, P: Partition) -> SuperTheory:
    """Pair P with its class partition, or raise NotASuperTheory naming the failed axiom."""
    if P.n != t.k or not P.full:
        raise ValueError("supertheory() needs a full partition of the characters")
    if frozenset([0]) not in P.blocks:
        raise NotASuperTheory("{1_G} not a singleton")
    classes, _ = class_partition_from(t, P)
    if frozenset([0]) not in classes.blocks:
        raise NotASuperTheory("{1} not a class block")
    if len(classes) != len(P):
        raise NotASuperTheory(
            f"|X| != |K|: {len(P)} character blocks but {len(classes)} class blocks"
        )
    return SuperTheory(P, classes)


def is_supertheory(t: CharacterTable, P: Partition) -> bool:
    try:
        supertheory(t, P)
    except NotASuperTheory:
        return False
    return True


def check_axioms(t: CharacterTable, theory: SuperTheory) -> list[str]:
    """Recheck all four axioms from scratch; returns the list of violations."""
    problems = []
    chars, classes = theory.chars, theory.classes
    if not (chars.full and classes.full and chars.n == t.k and classes.n == t.k):
        problems.append("partitions are not full")
    if len(chars) != len(classes):
        problems.append("|X| != |K|")
    if frozenset([0]) not in classes.blocks:
        problems.append("{1} not a class block")
    if frozenset([0]) not in chars.blocks:
        problems.append("{1_G} not a singleton")
    for X in chars.blocks:
        sigma = wedderburn_sum(t, X)
        for K in classes.blocks:
            if len({sigma[j] for j in K}) != 1:
                problems.append(f"sigma_{sorted(X)} not constant on classes {sorted(K)}")
    return problems


def m_theory(t: CharacterTable) -> SuperTheory:
    return supertheory(t, Partition.singletons(t.k))


def M_theory(t: CharacterTable) -> SuperTheory:
    blocks = [frozenset([0])]
    if t.k > 1:
        blocks.append(frozenset(range(1, t.k)))
    return supertheory(t, Partition(tuple(blocks), t.k))


def _orbits(k: int, images: Iterable[list[int]]) -> Partition:
    parent = list(range(k))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for img in images:
        for i, j in enumerate(img):
            a, b = find(i), find(j)
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[int, set[int]] = {}
    for i in range(k):
        groups.setdefault(find(i), set()).add(i)
    return Partition(tuple(frozenset(g) for g in groups.values()), k)


def _row_images(t: CharacterTable, a: int) -> list[int]:
    lookup = {row: i for i, row in enumerate(t.values)}
    out = []
    for i, row in enumerate(t.values):
        image = tuple(v.galois(a) for v in row)
        if image not in lookup:
            raise ValueError(f"table invalid: Galois image of row {i} under {a} matches no row")
        out.append(lookup[image])
    return out


def conjugation_partition(t: CharacterTable) -> Partition:
    """Orbits of complex conjugation on Irr(G)."""
    return _orbits(t.k, [_row_images(t, -1)])


def galois_partition(t: CharacterTable) -> Partition:
    """Orbits of Gal(Q(G)/Q) on Irr(G), acting through zeta -> zeta**a for a coprime to the exponent."""
    if t.is_rational:
        return Partition.singletons(t.k)
    return _orbits(t.k, (_row_images(t, a) for a in units_mod(t.exponent) if a != 1))


def table_rationality(t: CharacterTable) -> str:
    """"rational", "real" or "neither"."""
    if t.is_rational:
        return "rational"
    if all(v.is_real() for row in t.values for v in row):
        return "real"
    return "neither"
