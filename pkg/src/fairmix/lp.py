"""Exact rational linear programming and truncated-simplex projection.

A dense two-phase simplex over fractions.Fraction with Bland's rule, sized
for desk-scale problems (tens of rows, hundreds of columns).  Correctness is
the only design goal: every optimal result is re-checked by substitution, and
status answers carry no tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    EmptyDomainError,
    EngineInvariantError,
    MalformedLpError,
    PreconditionError,
)
from .model import as_fraction

RELATIONS = ("<=", "=", ">=")

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """Maximize objective . x over rows (a, rel, b) and per-variable bounds.

    ``objective=None`` asks for feasibility only.  ``bounds`` holds one
    (lower, upper) pair per variable with None for an absent bound; when the
    field itself is None every variable defaults to (0, None).
    """

    objective: tuple | None
    constraints: tuple = ()
    bounds: tuple | None = None

    def __post_init__(self):
        obj = None
        if self.objective is not None:
            obj = tuple(as_fraction(c) for c in self.objective)
        rows = []
        for row, rel, rhs in self.constraints:
            if rel not in RELATIONS:
                raise MalformedLpError(f"unknown relation {rel!r}")
            rows.append((tuple(as_fraction(a) for a in row), rel, as_fraction(rhs)))
        nv = None
        if obj is not None:
            nv = len(obj)
        elif self.bounds is not None:
            nv = len(self.bounds)
        elif rows:
            nv = len(rows[0][0])
        if nv is None:
            raise MalformedLpError("cannot infer the variable count from an empty program")
        for row, _, _ in rows:
            if len(row) != nv:
                raise MalformedLpError(f"constraint row has {len(row)} entries, expected {nv}")
        if self.bounds is None:
            bounds = ((Fraction(0), None),) * nv
        else:
            if len(self.bounds) != nv:
                raise MalformedLpError(f"{len(self.bounds)} bound pairs for {nv} variables")
            bounds = tuple(
                (
                    None if lo is None else as_fraction(lo),
                    None if hi is None else as_fraction(hi),
                )
                for lo, hi in self.bounds
            )
        object.__setattr__(self, "objective", obj)
        object.__setattr__(self, "constraints", tuple(rows))
        object.__setattr__(self, "bounds", bounds)

    @property
    def num_vars(self):
        return len(self.bounds)


@dataclass(frozen=True)
class LpResult:
    status: str
    solution: tuple | None = None
    objective_value: Fraction | None = None


def _pivot(tab, rhs, basis, r, c):
    piv = tab[r][c]
    inv = 1 / piv
    tab[r] = [a * inv for a in tab[r]]
    rhs[r] = rhs[r] * inv
    for i in range(len(tab)):
        if i == r:
            continue
        f = tab[i][c]
        if f:
            row_r = tab[r]
            row_i = tab[i]
            tab[i] = [a - f * b for a, b in zip(row_i, row_r)]
            rhs[i] = rhs[i] - f * rhs[r]
    basis[r] = c


def _simplex(tab, rhs, basis, cost):
    """Minimize cost.x on a tableau in canonical form; Bland's rule.

    Returns ("optimal", value) or ("unbounded", None).  Mutates in place.
    """
    m = len(tab)
    ncols = len(cost)
    while True:
        dual = [cost[basis[i]] for i in range(m)]
        enter = -1
        for j in range(ncols):
            r = cost[j]
            for i in range(m):
                if dual[i] and tab[i][j]:
                    r -= dual[i] * tab[i][j]
            if r < 0:
                enter = j
                break
        if enter < 0:
            value = sum(dual[i] * rhs[i] for i in range(m))
            return OPTIMAL, value
        leave = -1
        best = None
        for i in range(m):
            a = tab[i][enter]
            if a > 0:
                ratio = rhs[i] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            return UNBOUNDED, None
        _pivot(tab, rhs, basis, leave, enter)


def _substitute(bounds):
    """Shift every variable into the nonnegative orthant.

    Returns (exprs, ncols, extra_rows) where exprs[i] = (const, ((col, sign), ...))
    reconstructs x_i from the shifted columns, and extra_rows carries upper
    bounds that survive as explicit constraints.
    """
    exprs = []
    extra_rows = []
    col = 0
    for lo, hi in bounds:
        if lo is not None:
            exprs.append((lo, ((col, Fraction(1)),)))
            if hi is not None:
                extra_rows.append(({col: Fraction(1)}, "<=", hi - lo))
            col += 1
        elif hi is not None:
            exprs.append((hi, ((col, Fraction(-1)),)))
            col += 1
        else:
            exprs.append((Fraction(0), ((col, Fraction(1)), (col + 1, Fraction(-1)))))
            col += 2
    return exprs, col, extra_rows


def _verify(lp, x):
    for i, (lo, hi) in enumerate(lp.bounds):
        if lo is not None and x[i] < lo:
            raise EngineInvariantError(f"solution violates lower bound on x{i}")
        if hi is not None and x[i] > hi:
            raise EngineInvariantError(f"solution violates upper bound on x{i}")
    for row, rel, rhs in lp.constraints:
        lhs = sum(a * v for a, v in zip(row, x))
        ok = lhs <= rhs if rel == "<=" else lhs >= rhs if rel == ">=" else lhs == rhs
        if not ok:
            raise EngineInvariantError(f"solution violates constraint {rel} {rhs}")


def solve_lp(lp):
    """Exact two-phase simplex; the returned solution re-verifies by substitution."""
    if not isinstance(lp, LinearProgram):
        raise MalformedLpError(f"expected LinearProgram, got {type(lp).__name__}")
    for lo, hi in lp.bounds:
        if lo is not None and hi is not None and hi < lo:
            return LpResult(INFEASIBLE)

    exprs, ncols, extra_rows = _substitute(lp.bounds)

    std_rows = []
    for row, rel, rhs in lp.constraints:
        acc = {}
        shift = Fraction(0)
        for i, a in enumerate(row):
            if not a:
                continue
            const, terms = exprs[i]
            shift += a * const
            for c, sign in terms:
                acc[c] = acc.get(c, Fraction(0)) + a * sign
        std_rows.append((acc, rel, rhs - shift))
    std_rows.extend(extra_rows)

    oriented = []
    for acc, rel, rhs in std_rows:
        if rhs < 0:
            acc = {c: -a for c, a in acc.items()}
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
            rhs = -rhs
        oriented.append((acc, rel, rhs))

    m = len(oriented)
    n_slack = sum(1 for _, rel, _ in oriented if rel != "=")
    n_art = sum(1 for _, rel, _ in oriented if rel != "<=")
    art_start = ncols + n_slack
    total = art_start + n_art

    tab = []
    rhs_col = []
    basis = []
    slack_at = ncols
    art_at = art_start
    for acc, rel, rhs in oriented:
        row = [Fraction(0)] * total
        for c, a in acc.items():
            row[c] = a
        if rel == "<=":
            row[slack_at] = Fraction(1)
            basis.append(slack_at)
            slack_at += 1
        elif rel == ">=":
            row[slack_at] = Fraction(-1)
            slack_at += 1
            row[art_at] = Fraction(1)
            basis.append(art_at)
            art_at += 1
        else:
            row[art_at] = Fraction(1)
            basis.append(art_at)
            art_at += 1
        tab.append(row)
        rhs_col.append(rhs)

    if n_art:
        phase1 = [Fraction(0)] * art_start + [Fraction(1)] * n_art
        status, value = _simplex(tab, rhs_col, basis, phase1)
        if status != OPTIMAL:
            raise EngineInvariantError("phase-1 objective is bounded below by zero")
        if value > 0:
            return LpResult(INFEASIBLE)
        drop = []
        for i in range(m):
            if basis[i] >= art_start:
                for j in range(art_start):
                    if tab[i][j]:
                        _pivot(tab, rhs_col, basis, i, j)
                        break
                else:
                    drop.append(i)
        if drop:
            keep = [i for i in range(m) if i not in drop]
            tab = [tab[i] for i in keep]
            rhs_col = [rhs_col[i] for i in keep]
            basis = [basis[i] for i in keep]
            m = len(tab)
        tab = [row[:art_start] for row in tab]

    cost2 = [Fraction(0)] * art_start
    if lp.objective is not None:
        for i, c in enumerate(lp.objective):
            if not c:
                continue
            for col, sign in exprs[i][1]:
                cost2[col] -= c * sign
    status, _ = _simplex(tab, rhs_col, basis, cost2)
    if status == UNBOUNDED:
        return LpResult(UNBOUNDED)

    shifted = [Fraction(0)] * art_start
    for i in range(m):
        shifted[basis[i]] = rhs_col[i]
    x = []
    for const, terms in exprs:
        v = const
        for col, sign in terms:
            v += sign * shifted[col]
        x.append(v)
    x = tuple(x)
    _verify(lp, x)
    value = Fraction(0)
    if lp.objective is not None:
        value = sum(c * v for c, v in zip(lp.objective, x))
    return LpResult(OPTIMAL, x, value)


def project_onto_truncated_simplex(y, epsilon):
    """Euclidean projection onto {x : sum x = 1, x_i >= epsilon}.

    Active-set iteration: clamp violators to the floor, re-center the rest by
    a common shift, repeat.  The clamp set only grows, so at most n rounds.
    The KKT system is audited exactly before returning.
    """
    y = tuple(as_fraction(v) for v in y)
    n = len(y)
    if n == 0:
        raise PreconditionError("cannot project an empty vector")
    eps = as_fraction(epsilon)
    if eps <= 0:
        raise PreconditionError(f"floor must be positive, got {eps}")
    if eps > Fraction(1, n):
        raise EmptyDomainError(f"floor {eps} exceeds 1/{n}; the truncated simplex is empty")
    total = sum(y)
    if total != 1:
        raise PreconditionError(f"input sums to {total}, expected exactly 1")

    clamped = set()
    while True:
        free = [i for i in range(n) if i not in clamped]
        if not free:
            raise EngineInvariantError("clamp set swallowed every coordinate")
        lam = (1 - eps * len(clamped) - sum(y[i] for i in free)) / len(free)
        violators = [i for i in free if y[i] + lam < eps]
        if not violators:
            break
        clamped.update(violators)

    x = tuple(eps if i in clamped else y[i] + lam for i in range(n))
    for i in range(n):
        if i in clamped:
            if y[i] + lam > eps:
                raise EngineInvariantError("negative multiplier on a clamped coordinate")
        elif x[i] < eps:
            raise EngineInvariantError("free coordinate fell below the floor")
        if x[i] > max(y[i], eps):
            raise EngineInvariantError("projection exceeded the max{y_i, eps} bound")
    if sum(x) != 1:
        raise EngineInvariantError("projection does not sum to one")
    return x
