"""Building the bound tables d_mn and c_mn and checking their structure.

d_mn is the optimal transport cost between the averaging weights of iterates
m and n, with costs read from earlier entries of the same table.  c_mn uses
the product coupling instead and is therefore an upper bound.
"""
from fractions import Fraction

from kmsharp import (StepSchedule, TransportProblem, build_c_table, build_d_table, check_four_point,
                     check_metric, check_monotone, inside_out, solve_exact, tables_agree)

# %% exact tables for the classical step 1/2
half = StepSchedule.const(Fraction(1, 2))
d = build_d_table(half, 9, "inside_out", "exact")
c = build_c_table(half, 9, "exact")
print("d_01, d_02, d_12 =", d.get(0, 1), d.get(0, 2), d.get(1, 2))
print("d_89 / alpha =", d.get(8, 9) / Fraction(1, 2))
print("c_89 - d_89 =", c.get(8, 9) - d.get(8, 9))

# %% the three solution methods give the same table
for method in ("lp", "closed_form"):
    other = build_d_table(half, 9, method, "exact")
    print(f"inside_out vs {method}: identical = {tables_agree(d, other)[0]}")

# %% one transport problem in detail
p = TransportProblem.build(half, d, 1, 2)
plan, u = solve_exact(p)
print("greedy plan (1,2):", dict(inside_out(p).positive()))
print("potentials (1,2):", u.values)

# %% structural properties on a step below 1/2, where no closed form exists
low = build_d_table(StepSchedule.const(Fraction(3, 10)), 15, "inside_out", "exact")
for check in (check_metric, check_monotone, check_four_point):
    rep = check(low)
    print(f"{rep.name:10s} passed={rep.passed} checked={rep.checked}")
