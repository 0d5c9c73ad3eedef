"""An orbit on which every bound d_mn is attained.

Dual potentials of the transport problems define images y^k, and the
averaged iterates x^k satisfy ||x^m - x^n||_inf = d_mn for all m < n <= N.
"""
from fractions import Fraction

from kmsharp import StepSchedule, build_d_table, tight_orbit

s = StepSchedule.const(Fraction(3, 4))
d = build_d_table(s, 10, "inside_out", "exact")
orbit, report = tight_orbit(s, d)
print(report.as_dict())

# %% coordinate (m, n) carries the whole distance between x^m and x^n
for m, n in [(0, 1), (2, 7), (9, 10)]:
    q = orbit.coordinate((m, n))
    print(f"x^{n} - x^{m} at coordinate ({m},{n}) = {orbit.x[n, q] - orbit.x[m, q]}  d = {d.get(m, n)}")

print(orbit.to_csv().splitlines()[:5])
