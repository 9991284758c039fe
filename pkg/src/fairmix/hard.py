"""Two-player submodular instances that encode set intersection.

For half-count p there are r = C(2p, p)/2 ways to split the 2p items into
equal halves (first, second) with item 1 pinned to the first half.  Each
player carries an r-bit string; her value for a bundle depends only on its
size, except that exactly-half bundles matching a split side her string
flags are worth one extra unit.  Player 1 flags first halves, player 2
flags second halves.

The size bands are 3|S| below the half size and 3p at or above it, with
unflagged halves at 3p - 1.  When the strings share a flagged index, giving
each player her flagged side of that split is envy-free and efficient with
full welfare 6p; when they are disjoint, every certified deterministic
outcome stays at or below 6p - 1.  Deciding between the cases is deciding
set intersection, which is what makes the family a stress test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .envy import check_envy_free, check_pareto_efficient
from .errors import EnumerationLimitError, MalformedInstanceError
from .model import (
    Instance,
    MixedAllocation,
    all_partitions_allocation_set,
)

SPLIT_BUDGET = 10_000
SUBMODULAR_ITEM_CAP = 12


def split_count(p):
    """r = C(2p, p) / 2, the number of halves containing item 1."""
    return math.comb(2 * p, p) // 2


@dataclass(frozen=True)
class SplitFamily:
    """All equal bipartitions of {1..2p}, first side containing item 1."""

    p: int
    splits: tuple

    def __len__(self):
        return len(self.splits)

    def __iter__(self):
        return iter(self.splits)

    def __getitem__(self, j):
        return self.splits[j]


@dataclass(frozen=True)
class DisjointnessInput:
    """Half-count p plus one r-bit string per player."""

    p: int
    x1: tuple
    x2: tuple

    def __post_init__(self):
        if self.p < 1:
            raise MalformedInstanceError(f"half-count must be positive, got {self.p}")
        r = split_count(self.p)
        for name, bits in (("x1", self.x1), ("x2", self.x2)):
            bits = tuple(int(b) for b in bits)
            if len(bits) != r:
                raise MalformedInstanceError(
                    f"{name} has {len(bits)} bits, expected r = {r} for p = {self.p}"
                )
            if any(b not in (0, 1) for b in bits):
                raise MalformedInstanceError(f"{name} contains a non-bit entry")
            object.__setattr__(self, name, bits)

    @property
    def r(self):
        return split_count(self.p)

    def shares_flagged_index(self):
        return any(a and b for a, b in zip(self.x1, self.x2))


def enumerate_splits(p, budget=SPLIT_BUDGET):
    """All p-subsets of {1..2p} containing item 1, lexicographic, with complements."""
    if p < 1:
        raise MalformedInstanceError(f"half-count must be positive, got {p}")
    r = split_count(p)
    if r > budget:
        raise EnumerationLimitError(f"{r} splits exceed the budget of {budget}")
    full = (1 << (2 * p)) - 1
    splits = []
    for rest in combinations(range(1, 2 * p), p - 1):
        first = 1
        for item in rest:
            first |= 1 << item
        splits.append((first, full ^ first))
    return SplitFamily(p, tuple(splits))


def hard_utility_tables(inp, splits=None):
    """Raw (unnormalized) bundle tables for both players."""
    splits = splits or enumerate_splits(inp.p)
    p = inp.p
    m = 2 * p
    tables = []
    for bits, side in ((inp.x1, 0), (inp.x2, 1)):
        flagged = {splits[j][side] for j in range(len(bits)) if bits[j]}
        table = {}
        for mask in range(1 << m):
            size = bin(mask).count("1")
            if size < p:
                value = 3 * size
            elif size > p or mask in flagged:
                value = 3 * p
            else:
                value = 3 * p - 1
            table[mask] = Fraction(value)
        tables.append(table)
    return tables


def build_hard_instance(inp, budget=None):
    """Two-player instance over all partitions of the 2p items.

    Utilities are stored raw in the profile's original slot; the instance
    itself carries the rescaled values every solver path expects.
    """
    kwargs = {"budget": budget} if budget is not None else {}
    allocations = all_partitions_allocation_set(2, 2 * inp.p, **kwargs)
    return Instance.build(hard_utility_tables(inp), allocations)


def check_submodular(values, m, max_items=SUBMODULAR_ITEM_CAP):
    """Exhaustive diminishing-returns check over one player's bundle table.

    Tests u(X + e) - u(X) >= u(Y + e) - u(Y) for every X within Y and e
    outside Y.  Scans e ascending, then Y ascending, so the first violation
    is deterministic.  Returns (True, None) or (False, (X, Y, e)).
    """
    if m > max_items:
        raise EnumerationLimitError(f"m = {m} exceeds the exhaustive-check cap of {max_items}")
    for mask in range(1 << m):
        if mask not in values:
            raise MalformedInstanceError(f"table lacks a value for bundle mask {mask}")
    for e in range(m):
        bit = 1 << e
        for y in range(1 << m):
            if y & bit:
                continue
            upper = values[y | bit] - values[y]
            x = y
            while True:
                if values[x | bit] - values[x] < upper:
                    return False, (x, y, e)
                if x == 0:
                    break
                x = (x - 1) & y
    return True, None


def check_monotone(values, m):
    """True when adding any single item never lowers value."""
    for e in range(m):
        bit = 1 << e
        for mask in range(1 << m):
            if not mask & bit and values[mask | bit] < values[mask]:
                return False, (mask, e)
    return True, None


@dataclass(frozen=True)
class CertifiedOutcome:
    kind: str  # "deterministic" | "split_lottery"
    bundles: tuple | None
    split_index: int | None
    welfare: Fraction


@dataclass(frozen=True)
class DichotomyReport:
    p: int
    x1: tuple
    x2: tuple
    intersecting: bool
    target_welfare: Fraction
    certified: tuple
    dichotomy_holds: bool
    flagged_mixed: tuple


def _raw_welfare(p, inst):
    total = Fraction(0)
    for i in range(inst.n):
        for j, q in enumerate(p.p):
            if q:
                total += q * inst.raw_value(i, inst.allocations[j].bundles[i])
    return total


def verify_welfare_dichotomy(inp, max_p=3):
    """Certify every full deterministic outcome and split lottery, then compare.

    Shared flagged index: some certified outcome must reach welfare 6p and
    all certified ones must equal it.  No shared index: every certified
    deterministic outcome must stay at or below 6p - 1; lotteries above that
    line are reported in ``flagged_mixed`` rather than failing the check,
    since the dichotomy's case analysis is deterministic.
    """
    if inp.p > max_p:
        raise EnumerationLimitError(
            f"exhaustive certification is capped at p = {max_p}, got {inp.p}"
        )
    splits = enumerate_splits(inp.p)
    inst = build_hard_instance(inp)
    k = len(inst.allocations)
    m = 2 * inp.p
    full = (1 << m) - 1

    candidates = []
    for s1 in range(1 << m):
        bundles = (s1, full ^ s1)
        j = inst.allocations.index[bundles]
        candidates.append(("deterministic", bundles, None, MixedAllocation.point_mass(k, j)))
    half = Fraction(1, 2)
    for idx, (t1, t2) in enumerate(splits):
        ja = inst.allocations.index[(t1, t2)]
        jb = inst.allocations.index[(t2, t1)]
        candidates.append(
            ("split_lottery", None, idx, MixedAllocation.from_support(k, {ja: half, jb: half}))
        )

    certified = []
    for kind, bundles, idx, p in candidates:
        if not check_envy_free(p, inst).ok:
            continue
        if not check_pareto_efficient(p, inst).ok:
            continue
        certified.append(
            CertifiedOutcome(kind=kind, bundles=bundles, split_index=idx, welfare=_raw_welfare(p, inst))
        )

    target = Fraction(6 * inp.p)
    intersecting = inp.shares_flagged_index()
    deterministic = [c for c in certified if c.kind == "deterministic"]
    flagged_mixed = ()
    if intersecting:
        holds = bool(certified) and all(c.welfare == target for c in certified)
    else:
        holds = all(c.welfare <= target - 1 for c in deterministic)
        flagged_mixed = tuple(
            c for c in certified if c.kind == "split_lottery" and c.welfare > target - 1
        )
    return DichotomyReport(
        p=inp.p,
        x1=inp.x1,
        x2=inp.x2,
        intersecting=intersecting,
        target_welfare=target,
        certified=tuple(certified),
        dichotomy_holds=holds,
        flagged_mixed=flagged_mixed,
    )
