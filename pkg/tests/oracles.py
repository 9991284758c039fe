"""Independent brute-force oracles used to validate the solver kernels.

Nothing here shares code with the package internals beyond the public data
types: projections are re-derived by enumerating all clamp patterns, LPs by
enumerating candidate vertices, and domination by direct 2D geometry.
"""

from fractions import Fraction
from itertools import combinations

from fairmix.model import expected_utility


def project_by_pattern_enumeration(y, eps):
    """Exact projection onto {sum = 1, x >= eps} by trying all 2^n clamp sets.

    Every KKT-stationary point of the quadratic appears among the candidates,
    so the feasible candidate at minimum squared distance is the projection.
    """
    y = [Fraction(v) for v in y]
    eps = Fraction(eps)
    n = len(y)
    best = None
    best_d = None
    for pattern in range(1 << n):
        clamped = [i for i in range(n) if pattern >> i & 1]
        free = [i for i in range(n) if not pattern >> i & 1]
        if not free:
            if eps * n != 1:
                continue
            x = (eps,) * n
        else:
            lam = (1 - eps * len(clamped) - sum(y[i] for i in free)) / len(free)
            x = tuple(eps if i in clamped else y[i] + lam for i in range(n))
            if any(v < eps for v in x):
                continue
        d = sum((a - b) ** 2 for a, b in zip(x, y))
        if best_d is None or d < best_d:
            best, best_d = x, d
    return best


def solve_square(rows, rhs):
    """Gaussian elimination over Fractions; None when the system is singular."""
    n = len(rhs)
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col]), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        scale = aug[col][col]
        aug[col] = [v / scale for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
    return [aug[r][n] for r in range(n)]


def satisfies(lp, x):
    for i, (lo, hi) in enumerate(lp.bounds):
        if lo is not None and x[i] < lo:
            return False
        if hi is not None and x[i] > hi:
            return False
    for row, rel, rhs in lp.constraints:
        lhs = sum(a * v for a, v in zip(row, x))
        if rel == "<=" and lhs > rhs:
            return False
        if rel == ">=" and lhs < rhs:
            return False
        if rel == "=" and lhs != rhs:
            return False
    return True


def brute_force_lp_max(lp):
    """Maximum of the objective over all vertices of the feasible region.

    Sound for pointed bounded regions (every optimum sits at a vertex, and
    every vertex solves some square subsystem of active constraints).
    Returns (value, x) or None when no vertex is feasible.
    """
    n = lp.num_vars
    eqs = [(tuple(row), rhs) for row, rel, rhs in lp.constraints]
    for i, (lo, hi) in enumerate(lp.bounds):
        unit = tuple(Fraction(1 if j == i else 0) for j in range(n))
        if lo is not None:
            eqs.append((unit, lo))
        if hi is not None:
            eqs.append((unit, hi))
    best = None
    for combo in combinations(range(len(eqs)), n):
        x = solve_square([eqs[i][0] for i in combo], [eqs[i][1] for i in combo])
        if x is None or not satisfies(lp, x):
            continue
        val = Fraction(0)
        if lp.objective is not None:
            val = sum(c * v for c, v in zip(lp.objective, x))
        if best is None or val > best[0]:
            best = (val, tuple(x))
    return best


def find_dominating_vertex_or_pair(p, inst):
    """Search point masses and two-allocation mixtures for a domination witness.

    Complete for two players: the feasible expected-utility vectors form a
    polygon (the convex hull of the pure outcomes), and any dominating region
    that is nonempty contains either a polygon vertex or a point on an edge.
    Returns a dominating probability vector or None.
    """
    n = inst.n
    k = len(inst.allocations)
    current = [expected_utility(p, i, i, inst) for i in range(n)]
    own = [[inst.value(i, inst.allocations[j].bundles[i]) for j in range(k)] for i in range(n)]

    def dominates(point):
        return all(a >= b for a, b in zip(point, current)) and any(
            a > b for a, b in zip(point, current)
        )

    for j in range(k):
        if dominates([own[i][j] for i in range(n)]):
            vec = [Fraction(0)] * k
            vec[j] = Fraction(1)
            return tuple(vec)
    if n != 2:
        raise ValueError("pair search is only complete for two players")
    for j1 in range(k):
        for j2 in range(j1 + 1, k):
            lo, hi = Fraction(0), Fraction(1)
            feasible = True
            for i in range(n):
                coef = own[i][j1] - own[i][j2]
                need = current[i] - own[i][j2]
                if coef > 0:
                    lo = max(lo, need / coef)
                elif coef < 0:
                    hi = min(hi, need / coef)
                elif need > 0:
                    feasible = False
                    break
            if not feasible or lo > hi:
                continue
            for alpha in (lo, (lo + hi) / 2, hi):
                point = [alpha * own[i][j1] + (1 - alpha) * own[i][j2] for i in range(n)]
                if dominates(point):
                    vec = [Fraction(0)] * k
                    vec[j1] = alpha
                    vec[j2] = 1 - alpha
                    return tuple(vec)
    return None
