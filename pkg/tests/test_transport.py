from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from kmsharp.bounds import build_d_table
from kmsharp.errors import ConstructionError, PreconditionError
from kmsharp.schedule import StepSchedule
from kmsharp.transport import (TransportPlan, TransportProblem, closed_form_plan, crossing_pairs,
                               inside_out, plan_cost, simplify_plan, solve_exact,
                               verify_no_crossing)

from conftest import lp_value

F = Fraction
HALF = StepSchedule.const(F(1, 2))


def _solve_square(A, b):
    """Gaussian elimination over Fractions; None when singular."""
    n = len(A)
    M = [[Fraction(x) for x in row] + [Fraction(b[i])] for i, row in enumerate(A)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return None
        M[c], M[piv] = M[piv], M[c]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c] / M[c][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [M[i][n] / M[i][i] for i in range(n)]


def vertex_min(p):
    """Minimum cost over the vertices of the transport polytope, by enumeration."""
    m, n = p.m, p.n
    arcs = [(i, j) for i in range(m + 1) for j in range(n + 1)]
    rows = [[1 if a[0] == i else 0 for a in arcs] for i in range(m + 1)]
    cols = [[1 if a[1] == j else 0 for a in arcs] for j in range(n + 1)]
    A = rows + cols[1:]  # one column constraint is redundant
    b = list(p.supplies) + list(p.demands[1:])
    best, best_plans = None, []
    for basis in combinations(range(len(arcs)), len(A)):
        sol = _solve_square([[A[r][k] for k in basis] for r in range(len(A))], b)
        if sol is None or any(x < 0 for x in sol):
            continue
        z = TransportPlan(m, n)
        for k, x in zip(basis, sol):
            z[arcs[k]] = x
        if not z.is_feasible(p):
            continue
        c = plan_cost(z, p.costs)
        if best is None or c < best:
            best, best_plans = c, [z]
        elif c == best:
            best_plans.append(z)
    return best, best_plans


class LineCosts:
    """``|x_a - x_b|`` for points on a line, indices starting at -1."""

    def __init__(self, xs):
        self.xs = xs

    def get(self, a, b):
        return abs(self.xs[a + 1] - self.xs[b + 1])


class Table:
    def __init__(self, values):
        self.values = values

    def get(self, a, b):
        return self.values[(min(a, b), max(a, b))] if a != b else 0


def problem(alpha, m, n, N=None):
    s = StepSchedule.const(F(alpha))
    d = build_d_table(s, max(N or n, 1), "lp", "exact")
    return TransportProblem.build(s, d, m, n)


# ---------------------------------------------------------------- solve_exact

def test_solve_exact_01():
    p = problem("1/2", 0, 1)
    z, u = solve_exact(p)
    assert plan_cost(z, p.costs) == F(1, 2)
    assert z.entries == {(0, 0): F(1, 2), (0, 1): F(1, 2)}
    assert u.values == (0, 1)


@pytest.mark.parametrize("n", [0, 1, 3, 5])
def test_solve_exact_diagonal(n):
    p = problem("3/5", n, n)
    z, _ = solve_exact(p)
    assert plan_cost(z, p.costs) == 0
    assert all(i == j for (i, j), _ in z.positive())


@pytest.mark.parametrize("alpha", ["1/2", "3/5", "3/10", "9/10"])
@pytest.mark.parametrize("m, n", [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)])
def test_solve_exact_matches_vertex_enumeration(alpha, m, n):
    p = problem(alpha, m, n)
    best, _ = vertex_min(p)
    z, _ = solve_exact(p)
    assert plan_cost(z, p.costs) == best
    if (alpha, m, n) == ("1/2", 1, 2):
        assert best == F(3, 8)


def _check_dual(p, z, u):
    m, n = p.m, p.n
    assert u[0] == 0
    for i in range(m + 1):
        for j in range(n + 1):
            if i != j:
                assert u[j] - u[i] <= p.cost(i, j)
    for (i, j), v in z.positive():
        assert u[j] - u[i] == p.cost(i, j)
    # duality: primal cost equals dual objective
    dual = sum(p.demands[j] * u[j] for j in range(n + 1)) - sum(p.supplies[i] * u[i] for i in range(m + 1))
    assert dual == plan_cost(z, p.costs)


schedules = st.lists(st.fractions(min_value=F(1, 20), max_value=F(19, 20), max_denominator=40),
                     min_size=2, max_size=6)


@given(schedules)
@settings(max_examples=25, deadline=None)
def test_solve_exact_complementary_and_lp(alphas):
    s = StepSchedule.explicit(alphas)
    N = len(alphas)
    d = build_d_table(s, N, "lp", "exact")
    for n in range(N + 1):
        for m in range(n + 1):
            p = TransportProblem.build(s, d, m, n)
            z, u = solve_exact(p)
            assert z.is_feasible(p) and z.is_simple(p)
            _check_dual(p, z, u)
            assert plan_cost(inside_out(p), d) == plan_cost(z, d)
            assert abs(float(plan_cost(z, d)) - lp_value(s, d, m, n)) < 1e-9


def test_solve_exact_float_mode():
    s = StepSchedule.const(0.37)
    d = build_d_table(s, 10, "inside_out", "float")
    for m, n in [(0, 10), (3, 9), (5, 6)]:
        p = TransportProblem.build(s, d, m, n, "float")
        z, u = solve_exact(p)
        assert z.is_feasible(p, 1e-12)
        assert abs(plan_cost(z, d) - lp_value(s, d, m, n)) < 1e-10
        assert abs(plan_cost(z, d) - plan_cost(inside_out(p), d)) < 1e-12


# ---------------------------------------------------------------- inside_out / closed form

def test_inside_out_half():
    p = problem("1/2", 1, 2)
    z = inside_out(p)
    assert z.entries == {(0, 0): F(1, 4), (1, 1): F(1, 4), (1, 2): F(1, 4), (0, 2): F(1, 4)}
    assert plan_cost(z, p.costs) == F(3, 8)
    assert verify_no_crossing(z)


def test_inside_out_six_tenths():
    p = problem("3/5", 1, 2)
    z = inside_out(p)
    assert z.entries == {(0, 0): F(4, 25), (1, 1): F(6, 25), (1, 2): F(9, 25), (0, 2): F(6, 25)}
    assert plan_cost(z, p.costs) == F(456, 1000)
    assert closed_form_plan(p).entries == z.entries


def test_inside_out_diagonal():
    p = problem("3/10", 4, 4)
    z = inside_out(p)
    assert plan_cost(z, p.costs) == 0 and z.entries == {(i, i): p.demands[i] for i in range(5)}


def test_closed_form_costs():
    assert plan_cost(closed_form_plan(problem("1/2", 1, 2)), problem("1/2", 1, 2).costs) == F(3, 8)
    p = problem("1/2", 2, 3)
    assert plan_cost(closed_form_plan(p), p.costs) == F(5, 16)


@pytest.mark.parametrize("alpha", ["1/2", "5/8", "4/5", "19/20"])
def test_closed_form_equals_inside_out(alpha):
    s = StepSchedule.const(F(alpha))
    d = build_d_table(s, 8, "inside_out", "exact")
    for n in range(9):
        for m in range(n + 1):
            p = TransportProblem.build(s, d, m, n)
            assert closed_form_plan(p).entries == inside_out(p).entries


def test_closed_form_precondition():
    p = problem("2/5", 1, 2)
    with pytest.raises(PreconditionError):
        closed_form_plan(p)


# ---------------------------------------------------------------- simplify

def test_simplify_fixed_point():
    p = problem("1/2", 1, 2)
    z = inside_out(p)
    assert simplify_plan(z, p).entries == z.entries


def test_simplify_optimal_non_simple():
    s = HALF
    costs = LineCosts([0, 1, 2])
    p = TransportProblem.build(s, costs, 1, 2)
    z = TransportPlan(1, 2, {(0, 0): F(1, 4), (0, 1): F(1, 4), (1, 2): F(1, 2)})
    best, plans = vertex_min(p)
    assert z.is_feasible(p) and not z.is_simple(p)
    assert plan_cost(z, costs) == best == F(3, 4)
    out = simplify_plan(z, p)
    assert out[0, 0] == F(1, 4) and out[1, 1] == F(1, 4)
    assert out.is_feasible(p) and out.is_simple(p)
    assert plan_cost(out, costs) == best


def test_simplify_feasible_non_optimal_input():
    # feasible but not optimal (cost 7/8 against the optimum 3/8)
    p = problem("1/2", 1, 2)
    z = TransportPlan(1, 2, {(0, 1): F(1, 4), (1, 0): F(1, 4), (0, 2): F(1, 4), (1, 2): F(1, 4)})
    assert z.is_feasible(p)
    assert plan_cost(z, p.costs) == F(7, 8)
    out = simplify_plan(z, p)
    assert out.is_feasible(p) and out.is_simple(p)
    assert out[0, 0] == F(1, 4) and out[1, 1] == F(1, 4)
    assert plan_cost(out, p.costs) <= plan_cost(z, p.costs)


def test_simplify_detects_non_metric():
    costs = Table({(-1, 0): F(1), (-1, 1): F(10), (0, 1): F(1)})
    p = TransportProblem.build(HALF, costs, 1, 2)
    z = TransportPlan(1, 2, {(0, 0): F(1, 4), (0, 1): F(1, 4), (1, 2): F(1, 2)})
    with pytest.raises(ConstructionError):
        simplify_plan(z, p)


@given(schedules)
@settings(max_examples=20, deadline=None)
def test_simplify_optimal_plans(alphas):
    s = StepSchedule.explicit(alphas)
    N = len(alphas)
    d = build_d_table(s, N, "lp", "exact")
    for m in range(N):
        p = TransportProblem.build(s, d, m, N)
        z, _ = solve_exact(p)
        # push mass off the diagonal along a cost-neutral loop when possible
        out = simplify_plan(z, p)
        assert out.is_simple(p) and plan_cost(out, d) == plan_cost(z, d)


# ---------------------------------------------------------------- no-crossing

def test_crossing_detected():
    z = TransportPlan(1, 3, {(0, 2): F(1, 2), (1, 3): F(1, 2)})
    assert not verify_no_crossing(z)
    assert crossing_pairs(z) == [((0, 2), (1, 3))]


def test_diagonal_has_no_crossing():
    z = TransportPlan(3, 3, {(i, i): F(1, 4) for i in range(4)})
    assert verify_no_crossing(z)


def test_nested_is_not_crossing():
    z = TransportPlan(1, 3, {(0, 3): F(1, 2), (1, 2): F(1, 2)})
    assert verify_no_crossing(z)


def test_plan_cost_examples():
    p = problem("1/2", 0, 1)
    assert plan_cost(TransportPlan(0, 1, {(0, 0): F(1, 2), (0, 1): F(1, 2)}), p.costs) == F(1, 2)
    assert plan_cost(TransportPlan(2, 2, {(i, i): F(1, 3) for i in range(3)}), p.costs) == 0


def test_half_12_optimum_is_unique_and_simple():
    # every optimal vertex of the (1, 2) problem at alpha = 1/2 is the simple plan
    p = problem("1/2", 1, 2)
    best, plans = vertex_min(p)
    assert best == F(3, 8)
    assert {tuple(sorted(z.entries.items())) for z in plans} == {tuple(sorted(inside_out(p).entries.items()))}
