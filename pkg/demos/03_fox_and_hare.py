"""The fox-and-hare chain: d_mn as an escape probability.

From state (m, n) the chain jumps along the arcs of an optimal transport
plan.  Arcs on the diagonal end the race (fox), arcs out of node 0 let the
hare escape, and all others move to (i-1, j-1).  The escape probability
equals d_mn for optimal plans and c_mn for product plans.
"""
from fractions import Fraction

from kmsharp import (FoxHareChain, StepSchedule, build_c_table, build_d_table, coupling_bound,
                     plan_difference_row, simulation_report)

s = StepSchedule.const(Fraction(3, 5))
d = build_d_table(s, 12, "closed_form", "exact")
c = build_c_table(s, 12, "exact")

# %% transition rows and exact escape probabilities
chain_d, chain_c = FoxHareChain("D", s, d), FoxHareChain("C", s, d)
print("D row at (2,4):", chain_d.row((2, 4)).probs)
print("escape from (5,8): D =", chain_d.absorption_h(5, 8), "= d_58:", chain_d.absorption_h(5, 8) == d.get(5, 8))
print("escape from (5,8): C =", chain_c.absorption_h(5, 8), "= c_58:", chain_c.absorption_h(5, 8) == c.get(5, 8))

# %% a reproducible Monte Carlo check
print(simulation_report("D", 5, 8, s, d, samples=10**6, seed=42).to_json())

# %% the two chains differ little per step, which bounds c - d
_, gam = plan_difference_row(5, 8, Fraction(3, 5))
print("total variation between rows at (5,8):", gam, "<= 4(1-alpha)^2 =", 4 * Fraction(2, 5) ** 2)
print("c_58 - d_58 =", c.get(5, 8) - d.get(5, 8), "<= bound", coupling_bound(Fraction(3, 5), 5))
