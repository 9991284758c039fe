"""Deterministic instance builders shared across test modules."""

import random
from fractions import Fraction

from fairmix.model import Instance, all_partitions_allocation_set


def additive_table(item_values):
    """Expand per-item values into a dense bundle table."""
    m = len(item_values)
    table = {}
    for mask in range(1 << m):
        total = Fraction(0)
        for idx in range(m):
            if mask >> idx & 1:
                total += item_values[idx]
        table[mask] = total
    return table


def random_additive_instance(rng, n=None, m=None, grid=12):
    """Instance with additive utilities from a bounded rational grid."""
    if n is None:
        n = rng.choice([2, 3])
    if m is None:
        m = rng.choice([2, 3, 4])
    raw = []
    for _ in range(n):
        items = [Fraction(rng.randint(0, grid), rng.choice([1, 2, 3])) for _ in range(m)]
        raw.append(additive_table(items))
    return Instance.build(raw, all_partitions_allocation_set(n, m))


def random_table_instance(rng, n=None, m=None, grid=12):
    """Instance with an arbitrary (non-additive) bundle table per player."""
    if n is None:
        n = rng.choice([2, 3])
    if m is None:
        m = rng.choice([2, 3])
    raw = []
    for _ in range(n):
        table = {mask: Fraction(rng.randint(0, grid)) for mask in range(1 << m)}
        raw.append(table)
    return Instance.build(raw, all_partitions_allocation_set(n, m))


def seeded_rng(seed):
    return random.Random(seed)
