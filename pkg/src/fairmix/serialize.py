"""JSON and DOT serialization for instances, lotteries, and certificates.

Conventions, chosen so files survive bit-exact round trips and stay
readable next to worked examples:

* rationals are always ``"num/den"`` strings, never floats;
* players and items are numbered from 1 in files (library APIs use
  0-based indices); utility tables key bundles by bitmask with bit i-1
  standing for item i;
* allocations are written as per-player bundle lists, never as indices
  into a particular ordering, so files are portable across closures.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .envy import is_acyclic
from .errors import MalformedInstanceError
from .model import (
    AllocationSet,
    Instance,
    MixedAllocation,
    PureAllocation,
    all_partitions_allocation_set,
    normalize_utilities,
    swap_closure,
)

MAX_ITEMS = 24


def format_rational(q):
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(value):
    """Accept 'num/den' strings (or bare integers); reject floats and 1/0."""
    from .model import as_fraction

    return as_fraction(value)


def mask_to_items(mask):
    """Bitmask to sorted 1-based item list."""
    items = []
    g = 0
    while mask:
        if mask & 1:
            items.append(g + 1)
        mask >>= 1
        g += 1
    return items


def items_to_mask(items, m):
    mask = 0
    for item in items:
        if not isinstance(item, int) or isinstance(item, bool) or not 1 <= item <= m:
            raise MalformedInstanceError(f"item {item!r} outside 1..{m}")
        bit = 1 << (item - 1)
        if mask & bit:
            raise MalformedInstanceError(f"item {item} listed twice in one bundle")
        mask |= bit
    return mask


def _require(condition, field, detail):
    if not condition:
        raise MalformedInstanceError(f"field {field!r}: {detail}")


def _parse_allocation_entry(entry, n, m, field):
    _require(isinstance(entry, list) and len(entry) == n, field, f"expected {n} bundles")
    for bundle in entry:
        _require(isinstance(bundle, list), field, "bundles must be item lists")
    return PureAllocation(tuple(items_to_mask(bundle, m) for bundle in entry))


def load_instance(data, strict=False, warn=None):
    """Build an Instance from the documented JSON shape.

    Explicit allocation lists are closed under pairwise swaps on load;
    ``warn`` (a callable taking a message) fires when the closure added
    allocations, and ``strict`` turns that situation into an error.
    """
    _require(isinstance(data, dict), "$", "instance must be a JSON object")
    allowed = {"n", "m", "utilities", "allocations"}
    for key in data:
        _require(key in allowed, key, "unknown field")
    for key in allowed:
        _require(key in data, key, "missing field")
    n, m = data["n"], data["m"]
    _require(isinstance(n, int) and not isinstance(n, bool) and n >= 1, "n", "need an integer >= 1")
    _require(
        isinstance(m, int) and not isinstance(m, bool) and 0 <= m <= MAX_ITEMS,
        "m",
        f"need an integer in 0..{MAX_ITEMS}",
    )

    spec = data["allocations"]
    if spec == "all_partitions":
        aset = all_partitions_allocation_set(n, m)
    else:
        _require(isinstance(spec, list) and spec, "allocations", "need 'all_partitions' or a non-empty list")
        listed = [
            _parse_allocation_entry(entry, n, m, f"allocations[{j}]") for j, entry in enumerate(spec)
        ]
        aset = swap_closure(listed)
        if len(aset) > len(AllocationSet(listed)):
            message = (
                f"allocation list was not swap-closed; closure grew it from "
                f"{len(AllocationSet(listed))} to {len(aset)} allocations"
            )
            if strict:
                raise MalformedInstanceError(f"field 'allocations': {message}")
            if warn is not None:
                warn(message)

    util = data["utilities"]
    _require(isinstance(util, dict), "utilities", "must be an object with a 'type' tag")
    kind = util.get("type")
    if kind == "table":
        rows = util.get("values")
        _require(isinstance(rows, list) and len(rows) == n, "utilities.values", f"need one table per player ({n})")
        raw = []
        for i, row in enumerate(rows):
            field = f"utilities.values[{i}]"
            _require(isinstance(row, list), field, "need a list of [mask, value] pairs")
            table = {}
            for pair in row:
                _require(isinstance(pair, list) and len(pair) == 2, field, "entries are [mask, value] pairs")
                mask, value = pair
                _require(
                    isinstance(mask, int) and not isinstance(mask, bool) and 0 <= mask < (1 << m),
                    field,
                    f"bundle mask {mask!r} outside 0..{(1 << m) - 1}",
                )
                _require(mask not in table, field, f"duplicate bundle mask {mask}")
                table[mask] = parse_rational(value)
            raw.append(table)
    elif kind == "additive":
        rows = util.get("items")
        _require(isinstance(rows, list) and len(rows) == n, "utilities.items", f"need one item list per player ({n})")
        raw = []
        needed = aset.bundles_seen() | {0}
        for i, row in enumerate(rows):
            field = f"utilities.items[{i}]"
            _require(isinstance(row, list) and len(row) == m, field, f"need {m} item values")
            per_item = [parse_rational(v) for v in row]
            table = {}
            for mask in needed:
                table[mask] = sum(
                    (per_item[g] for g in range(m) if mask >> g & 1), Fraction(0)
                )
            raw.append(table)
    else:
        raise MalformedInstanceError(f"field 'utilities.type': expected 'table' or 'additive', got {kind!r}")

    return Instance(n=n, m=m, utilities=normalize_utilities(raw), allocations=aset)


def dump_instance(inst):
    """Inverse of load_instance; writes the raw (pre-rescale) utility tables."""
    k_full = (inst.n + 1) ** inst.m
    allocations: object
    if len(inst.allocations) == k_full and set(inst.allocations) == set(
        all_partitions_allocation_set(inst.n, inst.m)
    ):
        allocations = "all_partitions"
    else:
        allocations = [
            [mask_to_items(b) for b in a.bundles] for a in inst.allocations
        ]
    values = []
    for i in range(inst.n):
        table = inst.utilities.raw_values[i]
        values.append([[mask, format_rational(q)] for mask, q in sorted(table.items())])
    return {
        "n": inst.n,
        "m": inst.m,
        "utilities": {"type": "table", "values": values},
        "allocations": allocations,
    }


def dump_mixed_allocation(p, inst):
    support = []
    for j in p.support():
        bundles = inst.allocations[j].bundles
        support.append(
            {
                "bundles": [mask_to_items(b) for b in bundles],
                "probability": format_rational(p.p[j]),
            }
        )
    return {"support": support}


def load_mixed_allocation(data, inst):
    """Resolve a support-form lottery against the instance's allocation set."""
    if isinstance(data, dict) and "support" not in data and "p" in data:
        data = data["p"]  # accept a whole solve result
    _require(isinstance(data, dict) and isinstance(data.get("support"), list), "support", "need a support list")
    probs = {}
    for entry, field in ((e, f"support[{j}]") for j, e in enumerate(data["support"])):
        _require(isinstance(entry, dict), field, "entries are objects")
        _require("bundles" in entry and "probability" in entry, field, "need bundles and probability")
        allocation = _parse_allocation_entry(entry["bundles"], inst.n, inst.m, field)
        j = inst.allocations.index.get(allocation.bundles)
        _require(j is not None, field, f"allocation {entry['bundles']} is not in the instance's set")
        _require(j not in probs, field, "allocation listed twice")
        probs[j] = parse_rational(entry["probability"])
    return MixedAllocation.from_support(len(inst.allocations), probs)


def dump_certificate(cert, inst):
    witness = None
    if cert.ef.witness is not None:
        i, h, margin = cert.ef.witness
        witness = {"envious": i + 1, "envied": h + 1, "margin": format_rational(margin)}
    dominator = None
    if cert.pe.dominator is not None:
        dominator = dump_mixed_allocation(cert.pe.dominator, inst)
    gains = None
    if cert.pe.gains is not None:
        gains = [format_rational(g) for g in cert.pe.gains]
    residual = None
    if cert.fixed_point_residual is not None:
        residual = format_rational(cert.fixed_point_residual)
    return {
        "ok": cert.ok,
        "ef": {"ok": cert.ef.ok, "witness": witness},
        "pe": {"ok": cert.pe.ok, "dominator": dominator, "gains": gains},
        "fixed_point_residual": residual,
    }


def dump_solve_result(state, cert, inst, wall_time):
    return {
        "p": dump_mixed_allocation(state.p, inst),
        "w": [format_rational(x) for x in state.w.w],
        "certificate": dump_certificate(cert, inst),
        "iterations": state.iteration,
        "wall_time": wall_time,
    }


def dump_trace_record(rec, inst):
    return {
        "iteration": rec.iteration,
        "w": [format_rational(x) for x in rec.w],
        "support": [
            [mask_to_items(b) for b in inst.allocations[j].bundles] for j in rec.support
        ],
        "residual": format_rational(rec.residual),
        "nu": [format_rational(x) for x in rec.nu],
    }


def dump_dichotomy_report(report):
    def entry(c):
        return {
            "kind": c.kind,
            "bundles": None if c.bundles is None else [mask_to_items(b) for b in c.bundles],
            "split_index": None if c.split_index is None else c.split_index + 1,
            "welfare": format_rational(c.welfare),
        }

    return {
        "p": report.p,
        "x1": list(report.x1),
        "x2": list(report.x2),
        "intersecting": report.intersecting,
        "target_welfare": format_rational(report.target_welfare),
        "certified": [entry(c) for c in report.certified],
        "dichotomy_holds": report.dichotomy_holds,
        "flagged_mixed": [entry(c) for c in report.flagged_mixed],
    }


def envy_graph_to_dot(graph):
    """Envy graph as DOT, players numbered from 1, margins as edge labels."""
    acyclic, cycle = is_acyclic(graph)
    lines = ["digraph envy_graph {"]
    if acyclic:
        lines.append("  // acyclic: true")
    else:
        walk = " -> ".join(str(i + 1) for i in cycle)
        lines.append(f"  // acyclic: false (cycle: {walk} -> {cycle[0] + 1})")
    for i in range(graph.n):
        lines.append(f"  {i + 1};")
    for i, h, margin in graph.edges:
        lines.append(f'  {i + 1} -> {h + 1} [label="{format_rational(margin)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def dumps(obj):
    """Stable pretty JSON used by every CLI command."""
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"
