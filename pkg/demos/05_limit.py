"""kappa~_n through its integral form and the approach to 1/sqrt(pi).

Along theta_n = 1 - ln n / n the value kappa~_n(theta_n) tends to
1/sqrt(pi); the gap bound 4 n^{3/2} (1-theta)^{5/2} / sqrt(theta) controls
how far the sharp kappa_n can sit below it.
"""
import math

from kmsharp import StepSchedule, build_c_table, kappa_tilde_integral, kappa_tilde_n, limit_diagnostics

# %% the integral agrees with the c-table recursion
c = build_c_table(StepSchedule.const(0.85), 301)
for n in (1, 10, 100, 300):
    print(f"n={n}: integral {kappa_tilde_integral(0.85, n):.12f}  table {kappa_tilde_n(c, 0.85, n):.12f}")

# %% approach to the limit
for t in limit_diagnostics([10**2, 10**3, 10**4, 10**5, 10**6]):
    print(f"n={t.n:>7d} theta={t.theta:.8f} kappa~={t.kappa_tilde_at_theta:.6f} "
          f"gap to 1/sqrt(pi)={t.distance_to_limit:.6f} bound={t.gap_bound:.5f}")
print("1/sqrt(pi) =", 1 / math.sqrt(math.pi))
