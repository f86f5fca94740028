"""Search engines: good-set sweeps and enumeration of supercharacter theories.

Sweeps only look at subsets of the nonprincipal characters {1, ..., k-1}; the
trivial character is a singleton block of every theory.
"""
from __future__ import annotations

import itertools
import json
import os
import time
from math import comb
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence

from sympy import prevprime

from sct.chartab import CharacterTable, table_from_json
from sct.core import (
    Partition,
    SuperTheory,
    is_good,
    kernel,
    m_theory,
    mask_of,
    members,
    supertheory,
    NotASuperTheory,
    M_theory,
)

DEFAULT_PRIMES = (4611686018427387847, 4611686018427387817)  # the two largest primes below 2**62
ORACLE_MAX_K = 12
CHECKPOINT_CHUNK = 1 << 20
CHUNK = 4096

Progress = Callable[[int, int], None]


# --- reports ------------------------------------------------------------------------


@dataclass
class SweepReport:
    table: str
    scope: dict
    tested: int = 0
    bad: int = 0
    good: int = 0
    good_sets: list[list[int]] = field(default_factory=list)
    primes: list[int] | None = None
    workers: int = 1
    elapsed: float = 0.0

    def to_json(self, timing: bool = False) -> dict:
        out = {
            "table": self.table,
            "scope": self.scope,
            "tested": self.tested,
            "bad": self.bad,
            "good": self.good,
            "good_sets": self.good_sets,
            "primes": self.primes,
        }
        if timing:
            out["workers"] = self.workers
            out["elapsed"] = round(self.elapsed, 3)
        return out


@dataclass
class TheoryList:
    table: str
    theories: list[SuperTheory]

    @property
    def count(self) -> int:
        return len(self.theories)

    def partitions(self) -> list[tuple[tuple[int, ...], ...]]:
        return [_canon(th.chars) for th in self.theories]

    def to_json(self) -> dict:
        return {
            "table": self.table,
            "count": self.count,
            "theories": [th.to_json() for th in self.theories],
        }


@dataclass
class VerifyReport:
    sweep: SweepReport
    m_differs_from_M: bool

    @property
    def passed(self) -> bool:
        return self.m_differs_from_M and self.sweep.good == 0

    def to_json(self, timing: bool = False) -> dict:
        out = self.sweep.to_json(timing)
        out["m_differs_from_M"] = self.m_differs_from_M
        out["result"] = "PASS" if self.passed else "FAIL"
        return out


def _canon(p: Partition) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(sorted(b)) for b in p.blocks)


def _sorted_theories(theories: Iterable[SuperTheory]) -> list[SuperTheory]:
    return sorted(theories, key=lambda th: (len(th.chars), _canon(th.chars)))


# --- primes ---------------------------------------------------------------------


def choose_primes(t: CharacterTable, count: int = 2) -> list[int]:
    """The default primes, skipping any that divide |G| or a degree."""
    numbers = [t.order, *t.degrees]
    out: list[int] = []
    p = DEFAULT_PRIMES[0]
    while len(out) < count:
        if all(x % p for x in numbers):
            out.append(p)
        p = prevprime(p)
    return out


# --- sampling -----------------------------------------------------------------------

_M64 = (1 << 64) - 1


def splitmix64(seed: int) -> Iterator[int]:
    """SplitMix64 (Steele, Lea, Flood 2014): 64-bit state, 64-bit outputs."""
    state = seed & _M64
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _M64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
        yield z ^ (z >> 31)


def sample_masks(k: int, n: int, seed: int) -> Iterator[int]:
    """n random proper non-singleton subsets of {1..k-1}, as character bitmasks.

    Each draw takes the top k-1 bits of consecutive SplitMix64 outputs
    (concatenated when k-1 > 64) and rejects sizes below 2 or equal to k-1.
    Draws are independent, so repeats are possible.
    """
    bits = k - 1
    if bits < 3:
        raise ValueError("sampling needs at least 3 nonprincipal characters")
    words = -(-bits // 64)
    rng = splitmix64(seed)
    produced = 0
    while produced < n:
        value = 0
        for _ in range(words):
            value = (value << 64) | next(rng)
        value >>= words * 64 - bits
        size = value.bit_count()
        if 2 <= size < bits:
            produced += 1
            yield value << 1


# --- sweep workers ------------------------------------------------------------------

_worker_table: CharacterTable | None = None


def _init_worker(table_json: dict) -> None:
    global _worker_table
    _worker_table = table_from_json(table_json)


def _check_masks(t: CharacterTable, masks: Iterable[int], modulus: int | None) -> tuple[int, list[int]]:
    kern = kernel(t)
    tested = 0
    good = []
    for mask in masks:
        tested += 1
        idx = members(mask)
        if modulus is not None and kern.witness(idx, modulus) is not None:
            continue
        if kern.witness(idx) is None:
            good.append(mask)
    return tested, good


def _range_masks(lo: int, hi: int, bits: int) -> Iterator[int]:
    """Character masks for compact masks lo..hi-1 with 2 <= size < bits."""
    for c in range(lo, hi):
        if 2 <= c.bit_count() < bits:
            yield c << 1


def _run_task(task) -> tuple[int, list[int]]:
    kind, payload, modulus = task
    t = _worker_table
    if kind == "range":
        lo, hi, bits = payload
        return _check_masks(t, _range_masks(lo, hi, bits), modulus)
    return _check_masks(t, payload, modulus)


def _chunks(it: Iterable[int], size: int) -> Iterator[list[int]]:
    it = iter(it)
    while True:
        block = list(itertools.islice(it, size))
        if not block:
            return
        yield block


def _execute(
    t: CharacterTable,
    tasks: Iterable[tuple],
    workers: int,
    on_result: Callable[[tuple, tuple[int, list[int]]], None],
) -> None:
    """Run tasks in order; results are delivered in task order whatever the schedule."""
    global _worker_table
    if workers <= 1:
        saved = _worker_table
        _worker_table = t
        try:
            for task in tasks:
                on_result(task, _run_task(task))
        finally:
            _worker_table = saved
        return
    with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(t.to_json(),)) as pool:
        pending: list = []
        tasks = iter(tasks)
        # bounded look-ahead keeps memory flat on long sweeps
        for task in itertools.islice(tasks, 4 * workers):
            pending.append((task, pool.submit(_run_task, task)))
        while pending:
            task, fut = pending.pop(0)
            on_result(task, fut.result())
            nxt = next(tasks, None)
            if nxt is not None:
                pending.append((nxt, pool.submit(_run_task, nxt)))


def default_workers() -> int:
    env = os.environ.get("SCT_THREADS")
    if env:
        return max(1, int(env))
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1))


def _modulus(t: CharacterTable, modular: bool) -> tuple[int | None, list[int] | None]:
    if not (modular and t.is_rational):
        return None, None
    primes = choose_primes(t)
    modulus = 1
    for p in primes:
        modulus *= p
    return modulus, primes


def _sized_masks(k: int, min_size: int, max_size: int) -> Iterator[int]:
    nonprincipal = range(1, k)
    for size in range(min_size, max_size + 1):
        for combo in itertools.combinations(nonprincipal, size):
            if size == k - 1:
                continue  # the full nonprincipal set is the M(G) block
            yield mask_of(combo)


def _sweep(
    t: CharacterTable,
    scope: dict,
    tasks: Iterable[tuple],
    total: int,
    primes: list[int] | None,
    workers: int,
    progress: Progress | None,
    on_chunk: Callable[[tuple, SweepReport], None] | None = None,
    report: SweepReport | None = None,
) -> SweepReport:
    start = time.perf_counter()
    if report is None:
        report = SweepReport(t.name, scope, primes=primes)
    report.workers = workers
    found: list[int] = [mask_of(s) for s in report.good_sets]

    def on_result(task, result):
        tested, good = result
        report.tested += tested
        report.good += len(good)
        report.bad += tested - len(good)
        found.extend(good)
        report.good_sets = [members(m) for m in sorted(set(found), key=_set_key)]
        if on_chunk is not None:
            on_chunk(task, report)
        if progress is not None:
            progress(report.tested, total)

    _execute(t, tasks, workers, on_result)
    report.good_sets = [members(m) for m in sorted(set(found), key=_set_key)]
    report.elapsed += time.perf_counter() - start
    return report


def _set_key(mask: int) -> tuple[int, list[int]]:
    return (mask.bit_count(), members(mask))


def good_sets(
    t: CharacterTable,
    min_size: int,
    max_size: int,
    modular: bool = False,
    workers: int = 1,
    progress: Progress | None = None,
) -> SweepReport:
    """Test every subset of {1..k-1} with size in [min_size, max_size], except the whole set."""
    if not 2 <= min_size <= max_size <= t.k - 1:
        raise ValueError(f"need 2 <= min_size <= max_size <= {t.k - 1}, got {min_size}..{max_size}")
    modulus, primes = _modulus(t, modular)
    total = sum(comb(t.k - 1, s) for s in range(min_size, max_size + 1) if s != t.k - 1)
    scope = {"kind": "sizes", "sizes": [min_size, max_size], "index_range": [1, t.k - 1]}
    tasks = (("masks", chunk, modulus) for chunk in _chunks(_sized_masks(t.k, min_size, max_size), CHUNK))
    return _sweep(t, scope, tasks, total, primes, workers, progress)


# --- verify that only m(G) and M(G) exist --------------------------------------------


@dataclass(frozen=True)
class Sizes:
    lo: int
    hi: int


@dataclass(frozen=True)
class Sample:
    n: int
    seed: int = 0


@dataclass(frozen=True)
class Full:
    checkpoint: str | Path | None = None
    chunk: int = CHECKPOINT_CHUNK


def verify_exactly_two(
    t: CharacterTable,
    scope: Sizes | Sample | Full,
    modular: bool | None = None,
    workers: int = 1,
    progress: Progress | None = None,
) -> VerifyReport:
    """Check m(G) != M(G) and that every proper non-singleton subset in scope is bad.

    ``modular`` defaults to False for Sizes and True for Sample and Full
    (rational tables only; any probable good set is rechecked exactly).
    """
    if t.k < 3:
        raise ValueError("verify_exactly_two needs at least 3 characters")
    distinct = _canon(m_theory(t).chars) != _canon(M_theory(t).chars)
    if modular is None:
        modular = not isinstance(scope, Sizes)
    modulus, primes = _modulus(t, modular)
    bits = t.k - 1
    if isinstance(scope, Sizes):
        if not 2 <= scope.lo <= scope.hi <= bits:
            raise ValueError(f"sizes must satisfy 2 <= a <= b <= {bits}")
        hi = min(scope.hi, bits - 1)
        sc = {"kind": "sizes", "sizes": [scope.lo, scope.hi], "index_range": [1, bits]}
        total = sum(comb(bits, s) for s in range(scope.lo, hi + 1))
        tasks = (("masks", c, modulus) for c in _chunks(_sized_masks(t.k, scope.lo, hi), CHUNK))
        report = _sweep(t, sc, tasks, total, primes, workers, progress)
    elif isinstance(scope, Sample):
        if scope.n < 0:
            raise ValueError("sample size must be nonnegative")
        sc = {"kind": "sample", "n": scope.n, "seed": scope.seed, "index_range": [1, bits]}
        tasks = (("masks", c, modulus) for c in _chunks(sample_masks(t.k, scope.n, scope.seed), CHUNK))
        report = _sweep(t, sc, tasks, scope.n, primes, workers, progress)
    elif isinstance(scope, Full):
        report = _full_sweep(t, scope, modulus, primes, workers, progress)
    else:
        raise ValueError(f"invalid scope {scope!r}")
    return VerifyReport(report, distinct)


def _full_sweep(t, scope: Full, modulus, primes, workers, progress) -> SweepReport:
    bits = t.k - 1
    end = 1 << bits
    sc = {"kind": "full", "index_range": [1, bits]}
    total = (1 << bits) - bits - 2
    report = SweepReport(t.name, sc, primes=primes)
    lo = 0
    path = Path(scope.checkpoint) if scope.checkpoint else None
    if path is not None and path.exists():
        lo, report = read_checkpoint(path, t, report)
    step = scope.chunk

    def tasks():
        for a in range(lo, end, step):
            yield ("range", (a, min(a + step, end), bits), modulus)

    def on_chunk(task, rep):
        if path is not None:
            _, hi, _ = task[1]
            write_checkpoint(path, t, (hi - 1) << 1, rep)

    return _sweep(t, sc, tasks(), total, primes, workers, progress, on_chunk, report)


def write_checkpoint(path: Path, t: CharacterTable, last_mask: int, report: SweepReport) -> None:
    """Three lines: table digest, last completed character bitmask, counters (JSON)."""
    counters = {
        "tested": report.tested,
        "bad": report.bad,
        "good": report.good,
        "good_sets": report.good_sets,
        "elapsed": round(report.elapsed, 3),
    }
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(f"{t.digest}\n{last_mask}\n{json.dumps(counters, sort_keys=True)}\n")
    os.replace(tmp, path)


class CheckpointError(ValueError):
    pass


def read_checkpoint(path: Path, t: CharacterTable, report: SweepReport) -> tuple[int, SweepReport]:
    lines = path.read_text().splitlines()
    if len(lines) != 3:
        raise CheckpointError(f"{path}: expected 3 lines, found {len(lines)}")
    if lines[0].strip() != t.digest:
        raise CheckpointError(f"{path}: checkpoint belongs to a different table")
    try:
        last = int(lines[1])
        counters = json.loads(lines[2])
    except ValueError as exc:
        raise CheckpointError(f"{path}: {exc}") from None
    report.tested = counters["tested"]
    report.bad = counters["bad"]
    report.good = counters["good"]
    report.good_sets = counters["good_sets"]
    report.elapsed = counters.get("elapsed", 0.0)
    return (last >> 1) + 1, report


# --- theory enumeration -------------------------------------------------------------


def set_partitions(items: Sequence[int]) -> Iterator[list[list[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in set_partitions(rest):
        yield [[first]] + p
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1 :]


def _oracle(t: CharacterTable) -> list[SuperTheory]:
    if t.k > ORACLE_MAX_K:
        raise ValueError(f"oracle mode is limited to {ORACLE_MAX_K} characters; table has {t.k}")
    out = []
    for blocks in set_partitions(list(range(1, t.k))):
        P = Partition(tuple(frozenset(b) for b in [[0], *blocks]), t.k)
        try:
            out.append(supertheory(t, P))
        except NotASuperTheory:
            pass
    return out


def _pruned(t: CharacterTable, start: list[int]) -> list[SuperTheory]:
    """Backtrack over good blocks, keeping every chosen block inside its filtration.

    The block holding the least unplaced character must sit inside that
    character's block of the current filtration, since every theory extending
    the chosen blocks refines it.
    """
    kern = kernel(t)
    full = (1 << t.k) - 1
    sigmas: dict[int, list] = {}
    verdicts: dict[int, bool] = {}

    def sigma(mask: int) -> list:
        s = sigmas.get(mask)
        if s is None:
            s = sigmas[mask] = kern.sigma(members(mask))
        return s

    def good(mask: int) -> bool:
        v = verdicts.get(mask)
        if v is None:
            v = verdicts[mask] = kern.witness(members(mask)) is None
        return v

    def closed(blocks: list[int]) -> list[int] | None:
        F = kern.filtration_masks([sigma(b) for b in blocks])
        fset = set(F)
        return F if all(b in fset for b in blocks) else None

    found: list[SuperTheory] = []

    def rec(blocks: list[int], F: list[int], remaining: int) -> None:
        if not remaining:
            P = Partition.from_masks(blocks, t.k)
            try:
                found.append(supertheory(t, P))
            except NotASuperTheory:
                pass
            return
        r = remaining & -remaining
        home = next(b for b in F if b & r)
        space = home & remaining & ~r
        sub = space
        while True:
            B = sub | r
            if good(B):
                nb = blocks + [B]
                F2 = closed(nb)
                if F2 is not None:
                    rec(nb, F2, remaining & ~B)
            if not sub:
                break
            sub = (sub - 1) & space

    if any(not good(b) for b in start):
        return []
    F0 = closed(start)
    if F0 is None:
        return []
    used = 0
    for b in start:
        used |= b
    rec(list(start), F0, full & ~used)
    return found


def enumerate_theories(t: CharacterTable, mode: str = "pruned") -> TheoryList:
    """All supercharacter theories of the table.

    ``oracle`` filters every set partition with {0} as a block (k <= 12);
    ``pruned`` backtracks over good blocks with filtration pruning.
    """
    if mode == "oracle":
        theories = _oracle(t)
    elif mode == "pruned":
        theories = _pruned(t, [1])
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return TheoryList(t.name, _sorted_theories(theories))


def count_theories(t: CharacterTable) -> int:
    return enumerate_theories(t, "pruned").count


def extend_block(t: CharacterTable, X: Iterable[int]) -> TheoryList:
    """Every theory whose character partition has X as a block."""
    idx = sorted(set(X))
    if not idx or idx[0] < 1 or idx[-1] >= t.k:
        raise ValueError(f"X must be a nonempty subset of 1..{t.k - 1}")
    verdict = is_good(t, idx)
    if not verdict.good:
        raise ValueError(f"X = {idx} is bad ({verdict}); it cannot be a block of any theory")
    return TheoryList(t.name, _sorted_theories(_pruned(t, [1, mask_of(idx)])))
