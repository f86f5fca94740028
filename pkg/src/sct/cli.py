"""``sct`` command line.

Exit status: 0 success/PASS, 1 verification FAIL, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

from sct.chartab import TableError, load_table
from sct.core import (
    conjugation_partition,
    filtration,
    galois_partition,
    is_good,
    parse_blocks,
    table_rationality,
)
from sct.enumeration import (
    CheckpointError,
    Full,
    Sample,
    Sizes,
    count_theories,
    default_workers,
    enumerate_theories,
    extend_block,
    good_sets,
    verify_exactly_two,
)


class UsageError(Exception):
    pass


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print(text)


def _index_list(text: str) -> list[int]:
    try:
        out = sorted({int(x) for x in text.split(",") if x.strip()})
    except ValueError:
        raise UsageError(f"bad index list {text!r}; expected e.g. 1,2,5") from None
    if not out:
        raise UsageError("index list is empty")
    return out


def _check_range(t, idx: list[int]) -> None:
    if idx[0] < 0 or idx[-1] >= t.k:
        raise UsageError(f"indices must lie in 0..{t.k - 1}")


class _Progress:
    """Throttled progress lines on stderr."""

    def __init__(self, enabled: bool, every: float = 2.0):
        self.enabled = enabled
        self.every = every
        self.last = 0.0

    def __call__(self, done: int, total: int) -> None:
        now = time.monotonic()
        if self.enabled and (now - self.last >= self.every or done >= total):
            self.last = now
            pct = 100.0 * done / total if total else 100.0
            print(f"  {done}/{total} subsets ({pct:.1f}%)", file=sys.stderr, flush=True)


def _timing(report) -> None:
    print(f"[{report.tested} subsets in {report.elapsed:.2f}s on {report.workers} worker(s)]",
          file=sys.stderr)


# --- subcommands ------------------------------------------------------------------


def cmd_validate(args, t) -> int:
    payload = {"table": t.name, "valid": True, "order": t.order, "classes": t.k,
               "degrees": list(t.degrees), "digest": t.digest}
    _emit(args, payload, f"{t.name}: valid character table, |G| = {t.order}, {t.k} classes")
    return 0


def cmd_is_good(args, t) -> int:
    idx = _index_list(args.set)
    _check_range(t, idx)
    v = is_good(t, idx)
    payload = {"table": t.name, "set": idx, "verdict": v.status.value,
               "witness": None if v.witness is None else dict(zip(("chi", "psi", "k"), v.witness))}
    _emit(args, payload, str(v))
    return 0


def cmd_filtration(args, t) -> int:
    P = parse_blocks(args.blocks, t.k)
    F = filtration(t, P)
    payload = {"table": t.name, "blocks": P.as_lists(), "filtration": F.as_lists()}
    _emit(args, payload, str(F))
    return 0


def cmd_good_sets(args, t) -> int:
    rep = good_sets(t, args.min_size, args.max_size, modular=args.modular,
                    workers=args.threads, progress=_Progress(not args.quiet))
    _timing(rep)
    text = f"{t.name}: tested {rep.tested}, bad {rep.bad}, good {rep.good}"
    if rep.good_sets:
        text += "\n" + "\n".join("  good: " + ",".join(map(str, s)) for s in rep.good_sets)
    _emit(args, rep.to_json(), text)
    return 0


def _theories_text(lst) -> str:
    lines = [f"{lst.table}: {lst.count} supercharacter theor{'y' if lst.count == 1 else 'ies'}"]
    lines += [f"  {th}" for th in lst.theories]
    return "\n".join(lines)


def cmd_theories(args, t) -> int:
    lst = enumerate_theories(t, "oracle" if args.oracle else "pruned")
    _emit(args, lst.to_json(), _theories_text(lst))
    return 0


def cmd_count(args, t) -> int:
    n = count_theories(t)
    _emit(args, {"table": t.name, "count": n}, str(n))
    return 0


def cmd_verify_two(args, t) -> int:
    if args.sizes is not None:
        try:
            a, b = (int(x) for x in args.sizes.split(","))
        except ValueError:
            raise UsageError("--sizes expects A,B") from None
        scope = Sizes(a, b)
    elif args.sample is not None:
        scope = Sample(args.sample, args.seed)
    else:
        scope = Full(args.checkpoint)
    modular = None if args.modular is None else args.modular
    rep = verify_exactly_two(t, scope, modular=modular, workers=args.threads,
                             progress=_Progress(not args.quiet))
    _timing(rep.sweep)
    s = rep.sweep
    verdict = "PASS" if rep.passed else "FAIL"
    text = f"{verdict}: {t.name}, {s.tested} subsets tested, {s.bad} bad, {s.good} good"
    if not rep.m_differs_from_M:
        text += " (m(G) = M(G))"
    if s.good_sets:
        text += "\n" + "\n".join("  good: " + ",".join(map(str, g)) for g in s.good_sets)
    _emit(args, rep.to_json(), text)
    return 0 if rep.passed else 1


def cmd_extend(args, t) -> int:
    idx = _index_list(args.set)
    _check_range(t, idx)
    lst = extend_block(t, idx)
    payload = lst.to_json()
    payload["block"] = idx
    _emit(args, payload, _theories_text(lst))
    return 0


def cmd_classify(args, t) -> int:
    kind = table_rationality(t)
    conj = conjugation_partition(t)
    gal = galois_partition(t)
    payload = {"table": t.name, "rationality": kind,
               "conjugation_partition": conj.as_lists(), "galois_partition": gal.as_lists()}
    _emit(args, payload, f"{t.name}: {kind}\n  conjugation orbits: {conj}\n  Galois orbits: {gal}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="character table in CTBL-1 format")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    sweep = argparse.ArgumentParser(add_help=False)
    sweep.add_argument("--threads", type=int, default=None,
                       help="worker processes (default: $SCT_THREADS or all CPUs)")
    sweep.add_argument("--quiet", action="store_true", help="no progress on stderr")

    parser = argparse.ArgumentParser(prog="sct", description="Supercharacter theory tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="parse and validate a table").set_defaults(func=cmd_validate)

    p = sub.add_parser("is-good", parents=[common], help="good/bad test for one subset")
    p.add_argument("--set", required=True, help="comma-separated character indices")
    p.set_defaults(func=cmd_is_good)

    p = sub.add_parser("filtration", parents=[common], help="filtration of a partial partition")
    p.add_argument("--blocks", required=True, help='blocks such as "1,2|3,4"')
    p.set_defaults(func=cmd_filtration)

    p = sub.add_parser("good-sets", parents=[common, sweep], help="sweep subsets by size")
    p.add_argument("--min-size", type=int, required=True)
    p.add_argument("--max-size", type=int, required=True)
    p.add_argument("--modular", action="store_true", help="residue fast path (rational tables)")
    p.set_defaults(func=cmd_good_sets)

    p = sub.add_parser("theories", parents=[common], help="enumerate supercharacter theories")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--oracle", action="store_true", help="filter all set partitions (k <= 12)")
    mode.add_argument("--pruned", action="store_true", help="filtration-pruned backtracking (default)")
    p.set_defaults(func=cmd_theories)

    sub.add_parser("count", parents=[common], help="number of supercharacter theories").set_defaults(func=cmd_count)

    p = sub.add_parser("verify-two", parents=[common, sweep], help="check that only m(G) and M(G) exist")
    scope = p.add_mutually_exclusive_group(required=True)
    scope.add_argument("--sizes", help="A,B: all subsets with A <= size <= B")
    scope.add_argument("--sample", type=int, help="N random subsets")
    scope.add_argument("--full", action="store_true", help="every proper non-singleton subset")
    p.add_argument("--seed", type=int, default=0, help="seed for --sample")
    p.add_argument("--checkpoint", help="resumable progress file for --full")
    arith = p.add_mutually_exclusive_group()
    arith.add_argument("--modular", dest="modular", action="store_true", default=None,
                       help="residue fast path (default for --sample and --full)")
    arith.add_argument("--exact", dest="modular", action="store_false",
                       help="exact arithmetic only (default for --sizes)")
    p.set_defaults(func=cmd_verify_two)

    p = sub.add_parser("extend", parents=[common], help="theories containing a given block")
    p.add_argument("--set", required=True, help="comma-separated character indices")
    p.set_defaults(func=cmd_extend)

    sub.add_parser("classify", parents=[common], help="rationality and orbit partitions").set_defaults(func=cmd_classify)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "threads", None) is None and hasattr(args, "threads"):
        args.threads = default_workers()
    if getattr(args, "checkpoint", None) and not getattr(args, "full", False):
        print("sct: error: --checkpoint requires --full", file=sys.stderr)
        return 2
    try:
        t = load_table(args.file)
        return args.func(args, t)
    except (TableError, CheckpointError, UsageError, ValueError, IndexError) as exc:
        print(f"sct: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
