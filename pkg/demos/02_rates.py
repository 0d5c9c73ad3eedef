"""Rate constants: kappa_n, kappa~_n and gamma(alpha).

kappa_n(alpha) = sqrt(n alpha (1-alpha)) d_{n,n+1} / alpha scales the bound
on the fixed-point residual; gamma(alpha) is its supremum over n divided by
sqrt(alpha (1-alpha)).
"""
import math
from fractions import Fraction

from kmsharp import gamma, gamma_sweep, poly_d89, rate_points
from kmsharp.rates import GAMMA_HALF

# %% kappa curves at the four step sizes of the reference curves
for alpha in (0.5, 0.65, 0.85, 0.99):
    pts = rate_points(alpha, 300)
    print(f"alpha={alpha}: kappa_1={pts[0].kappa:.7f} kappa_300={pts[-1].kappa:.7f} "
          f"kappa~_300={pts[-1].kappa_tilde:.6f}")
print("1/sqrt(pi) =", 1 / math.sqrt(math.pi))

# %% the sharp constant at alpha = 1/2 and a slightly better step
g = gamma(0.5)
print(f"gamma(0.5) = {g.value:.10f} at n={g.argmax_n} (closed form {GAMMA_HALF:.10f})")
print("d_89/alpha at 1/2 from the polynomial:", poly_d89(Fraction(1, 2)))
print(f"gamma(0.48121) = {gamma(0.48121).value:.7f}")

# %% a coarse sweep of gamma over alpha
for r in gamma_sweep([0.2, 0.35, 0.45, 0.5, 0.6, 0.8], N_max=128):
    print(f"alpha={r.alpha:.2f} gamma={r.value:.6f} argmax={r.argmax_n} saturated={r.saturated}")
