"""Exact simplex kernel against hand cases and the vertex-enumeration oracle."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairmix.errors import MalformedLpError
from fairmix.lp import INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, LpResult, solve_lp
from oracles import brute_force_lp_max, satisfies

F = Fraction


def test_simplex_vertex():
    lp = LinearProgram(objective=(1, 0), constraints=((((1, 1)), "=", 1),))
    res = solve_lp(lp)
    assert res.status == OPTIMAL
    assert res.solution == (F(1), F(0))
    assert res.objective_value == F(1)


def test_contradictory_rows_infeasible():
    lp = LinearProgram(
        objective=None,
        constraints=(((1,), ">=", 2), ((1,), "<=", 1)),
    )
    assert solve_lp(lp).status == INFEASIBLE


def test_separable_box_optimum():
    lp = LinearProgram(
        objective=(1, 1),
        constraints=(((1, 0), "<=", F(1, 3)), ((0, 1), "<=", F(1, 2))),
    )
    res = solve_lp(lp)
    assert res.status == OPTIMAL
    assert res.objective_value == F(5, 6)


def test_unbounded():
    lp = LinearProgram(objective=(1,), constraints=())
    assert solve_lp(lp).status == UNBOUNDED


def test_free_variable():
    lp = LinearProgram(
        objective=(-1,),
        constraints=(((1,), ">=", 3),),
        bounds=((None, None),),
    )
    res = solve_lp(lp)
    assert res.status == OPTIMAL
    assert res.solution == (F(3),)
    assert res.objective_value == F(-3)


def test_negative_rhs_orientation():
    lp = LinearProgram(objective=(-1,), constraints=(((-1,), "<=", -2),))
    res = solve_lp(lp)
    assert res.status == OPTIMAL
    assert res.solution == (F(2),)


def test_upper_bound_only():
    lp = LinearProgram(objective=(1,), bounds=((0, F(5, 2)),))
    res = solve_lp(lp)
    assert res.status == OPTIMAL
    assert res.objective_value == F(5, 2)


def test_negative_lower_bound():
    lp = LinearProgram(objective=(-1,), bounds=((-3, None),))
    res = solve_lp(lp)
    assert res.status == OPTIMAL
    assert res.solution == (F(-3),)


def test_crossed_bounds_infeasible():
    lp = LinearProgram(objective=(1,), bounds=((2, 1),))
    assert solve_lp(lp).status == INFEASIBLE


def test_redundant_equalities():
    lp = LinearProgram(
        objective=(1, 0),
        constraints=(((1, 1), "=", 1), ((1, 1), "=", 1), ((2, 2), "=", 2)),
    )
    res = solve_lp(lp)
    assert res.status == OPTIMAL
    assert res.objective_value == F(1)


def test_degenerate_pivoting_terminates():
    # Beale's cycling example; value cross-checked against the vertex oracle
    lp = LinearProgram(
        objective=(F(3, 4), -150, F(1, 50), -6),
        constraints=(
            ((F(1, 4), -60, F(-1, 25), 9), "<=", 0),
            ((F(1, 2), -90, F(-1, 50), 3), "<=", 0),
            ((0, 0, 1, 0), "<=", 1),
        ),
        bounds=((0, 10), (0, 10), (0, 10), (0, 10)),
    )
    res = solve_lp(lp)
    value, _ = brute_force_lp_max(lp)
    assert res.status == OPTIMAL
    assert res.objective_value == value == F(1, 20)


def test_dimension_mismatch():
    with pytest.raises(MalformedLpError):
        LinearProgram(objective=(1, 2), constraints=(((1,), "<=", 1),))


def test_unknown_relation():
    with pytest.raises(MalformedLpError):
        LinearProgram(objective=(1,), constraints=(((1,), "<", 1),))


def test_empty_program_rejected():
    with pytest.raises(MalformedLpError):
        LinearProgram(objective=None)


small_fraction = st.fractions(min_value=-3, max_value=3, max_denominator=4)


@given(
    n=st.integers(2, 3),
    rows=st.data(),
)
@settings(max_examples=40, deadline=None)
def test_random_box_lps_match_vertex_oracle(n, rows):
    # feasibility anchored at the all-ones point inside the [0,2] box
    anchor = (F(1),) * n
    n_le = rows.draw(st.integers(0, 3))
    n_eq = rows.draw(st.integers(0, 1))
    constraints = []
    for _ in range(n_le):
        row = tuple(rows.draw(small_fraction) for _ in range(n))
        slack = rows.draw(st.fractions(min_value=0, max_value=2, max_denominator=4))
        constraints.append((row, "<=", sum(a * v for a, v in zip(row, anchor)) + slack))
    for _ in range(n_eq):
        row = tuple(rows.draw(small_fraction) for _ in range(n))
        constraints.append((row, "=", sum(a * v for a, v in zip(row, anchor))))
    objective = tuple(rows.draw(st.integers(-3, 3)) for _ in range(n))
    lp = LinearProgram(
        objective=objective,
        constraints=tuple(constraints),
        bounds=((0, 2),) * n,
    )
    res = solve_lp(lp)
    assert res.status == OPTIMAL
    assert satisfies(lp, res.solution)
    value, _ = brute_force_lp_max(lp)
    assert res.objective_value == value
