"""Rate constants derived from the bound tables.

``kappa_n = sqrt(n alpha (1-alpha)) d_{n,n+1} / alpha`` and its analogue
``kappa~_n`` with ``c``; ``gamma(alpha) = sup_n sqrt(n) d_{n,n+1} / alpha``
over a finite horizon; an integral representation of ``kappa~_n``; the
approach of ``kappa~_n(theta_n)`` to ``1/sqrt(pi)``; and the degree-28
polynomial giving ``d_{8,9}(alpha)/alpha`` for ``alpha >= 1/2``.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence

import numpy as np
from scipy import integrate

from .bounds import DistanceTable, build_c_table, build_d_table
from .errors import DomainError, NumericalError, PreconditionError
from .numeric import NumericMode, Scalar, to_float
from .schedule import StepSchedule

INV_SQRT_PI = 1.0 / math.sqrt(math.pi)
KAPPA_INF_HALF = math.sqrt(2.0 / (3.0 * math.pi))
GAMMA_HALF = 46302245 * math.sqrt(2.0) / 2**26
INTEGRAL_EPSABS = 1e-11
INTEGRAL_MAX_ERROR = 1e-10

# d_{8,9}(alpha)/alpha = sum_k POLY_D89[k] alpha^k
POLY_D89 = (1, -8, 64, -448, 2835, -16008, 79034, -334908, 1201873, -3622324, 9129380,
            -19214722, 33796129, -49776610, 61566687, -64152608, 56488500, -42133404,
            26651679, -14288252, 6472429, -2462126, 778478, -201354, 41584, -6604, 758, -56, 2)


@dataclass(frozen=True)
class RatePoint:
    n: int
    alpha: float
    kappa: float
    kappa_tilde: float


@dataclass(frozen=True)
class GammaResult:
    alpha: float
    value: float
    argmax_n: int
    N_max: int
    saturated: bool


@dataclass(frozen=True)
class ThetaDiagnostic:
    n: int
    theta: float
    kappa_tilde_at_theta: float
    gap_bound: float

    @property
    def distance_to_limit(self) -> float:
        return abs(self.kappa_tilde_at_theta - INV_SQRT_PI)


def _constant_alpha(t: DistanceTable, alpha) -> float:
    s = t.schedule
    if s is not None:
        if not s.constant:
            raise PreconditionError("rate constants need a constant step schedule")
        if alpha is not None and abs(float(s.steps[0]) - float(alpha)) > 1e-15:
            raise DomainError(f"alpha {alpha} does not match the table's schedule {s.literal()}")
        return float(s.steps[0])
    if alpha is None:
        raise DomainError("alpha is required for a table without a schedule")
    return float(alpha)


def _scaled(t: DistanceTable, alpha, n: int) -> float:
    if n < 1:
        raise DomainError("n must be >= 1")
    if t.N < n + 1:
        raise DomainError(f"table horizon {t.N} is too small for n={n} (needs {n + 1})")
    a = _constant_alpha(t, alpha)
    return math.sqrt(n * a * (1.0 - a)) * to_float(t.get(n, n + 1)) / a


def kappa_n(d: DistanceTable, alpha, n: int) -> float:
    """``sqrt(n alpha (1-alpha)) d_{n,n+1} / alpha``."""
    return _scaled(d, alpha, n)


def kappa_tilde_n(c: DistanceTable, alpha, n: int) -> float:
    """``sqrt(n alpha (1-alpha)) c_{n,n+1} / alpha``."""
    return _scaled(c, alpha, n)


def fast_d_table(alpha, N: int) -> DistanceTable:
    """Float ``d`` table for a constant step, using the quadratic recurrence when it applies."""
    s = StepSchedule.const(alpha)
    method = "closed_form" if Fraction(alpha) >= Fraction(1, 2) else "inside_out"
    return build_d_table(s, N, method, NumericMode.FLOAT)


def rate_points(alpha, N: int) -> List[RatePoint]:
    """``kappa_n`` and ``kappa~_n`` for ``n = 1..N``."""
    d = fast_d_table(alpha, N + 1)
    c = build_c_table(StepSchedule.const(alpha), N + 1, NumericMode.FLOAT)
    a = float(alpha)
    return [RatePoint(n, a, kappa_n(d, alpha, n), kappa_tilde_n(c, alpha, n)) for n in range(1, N + 1)]


def kappa_tilde_integral(alpha: float, n: int) -> float:
    """Integral form of ``kappa~_n(alpha)``.

    ``(1/pi) int_0^L sqrt(1/s - 1/L) (1 - s/n)^n ds`` with ``L = 4 n alpha (1-alpha)``,
    evaluated after ``s = t^2`` as ``(2/pi) int_0^sqrt(L) sqrt(1 - t^2/L) (1 - t^2/n)^n dt``.
    Raises :class:`NumericalError` when the reported error exceeds ``1e-10``.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if n < 1:
        raise DomainError("n must be >= 1")
    L = 4.0 * n * alpha * (1.0 - alpha)
    root = math.sqrt(L)

    def f(t):
        u = t * t
        if u >= n:
            return 0.0
        return math.sqrt(max(0.0, 1.0 - u / L)) * math.exp(n * math.log1p(-u / n))

    # (1 - t^2/n)^n <= exp(-t^2): everything past t = 10 is below 1e-43
    cut = min(root, 10.0)
    total, err = 0.0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            pieces = [(0.0, cut)] + ([(cut, root)] if root > cut else [])
            for lo, hi in pieces:
                val, e = integrate.quad(f, lo, hi, epsabs=INTEGRAL_EPSABS, epsrel=0.0, limit=200)
                total += val
                err += e
        except integrate.IntegrationWarning as exc:
            raise NumericalError(f"quadrature failed for alpha={alpha}, n={n}: {exc}") from exc
    err *= 2.0 / math.pi
    if err > INTEGRAL_MAX_ERROR:
        raise NumericalError(f"quadrature error {err:.3e} exceeds {INTEGRAL_MAX_ERROR} "
                             f"for alpha={alpha}, n={n}")
    return 2.0 / math.pi * total


def gamma(alpha, N_max: int = 512, d: Optional[DistanceTable] = None) -> GammaResult:
    """``max_{1 <= n <= N_max} sqrt(n) d_{n,n+1} / alpha`` with its argmax.

    ``saturated`` is set when the maximum sits at ``N_max``, in which case the
    true supremum may be larger.
    """
    if N_max < 1:
        raise DomainError("N_max must be >= 1")
    if d is None:
        d = fast_d_table(alpha, N_max + 1)
    elif d.N < N_max + 1:
        raise DomainError(f"table horizon {d.N} is too small for N_max={N_max}")
    a = _constant_alpha(d, alpha)
    sup = np.array([to_float(v) for v in d.superdiagonal()[1 : N_max + 1]])
    vals = np.sqrt(np.arange(1, N_max + 1)) * sup / a
    k = int(np.argmax(vals))
    return GammaResult(float(alpha), float(vals[k]), k + 1, N_max, k + 1 == N_max)


def _gamma_task(args):
    alpha, N_max = args
    return gamma(alpha, N_max)


def gamma_sweep(alpha_grid: Sequence, N_max: int = 512, threads: int = 1) -> List[GammaResult]:
    """``gamma`` on each grid point; ``threads > 1`` spreads points over processes."""
    for a in alpha_grid:
        if not 0.0 < float(a) < 1.0:
            raise DomainError(f"grid value {a} outside (0, 1)")
    tasks = [(a, N_max) for a in alpha_grid]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_gamma_task, tasks))
    return [_gamma_task(t) for t in tasks]


def alpha_grid(start: float, stop: float, step: float) -> List[float]:
    """Inclusive decimal grid, rounded to the step's precision."""
    if step <= 0 or stop < start:
        raise DomainError("grid needs step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    digits = max(0, -int(math.floor(math.log10(step))) + 2)
    return [round(start + k * step, digits) for k in range(count)]


def theta(n: int) -> float:
    return 1.0 - math.log(n) / n


def gap_bound(n: int, alpha: float) -> float:
    """``4 n^{3/2} (1-alpha)^{5/2} / sqrt(alpha)``, a bound on ``|kappa~_n - kappa_n|`` style gaps."""
    return 4.0 * n**1.5 * (1.0 - alpha) ** 2.5 / math.sqrt(alpha)


def limit_diagnostics(n_list: Iterable[int]) -> List[ThetaDiagnostic]:
    """``kappa~_n`` at ``theta_n = 1 - ln n / n`` together with the gap bound."""
    out = []
    for n in n_list:
        if n < 2:
            raise DomainError("limit diagnostics need n >= 2")
        th = theta(n)
        out.append(ThetaDiagnostic(n, th, kappa_tilde_integral(th, n), gap_bound(n, th)))
    return out


def poly_d89(alpha: Scalar) -> Scalar:
    """Horner evaluation of the polynomial equal to ``d_{8,9}(alpha)/alpha`` for ``alpha >= 1/2``.

    Exact for :class:`~fractions.Fraction` input.
    """
    if alpha < Fraction(1, 2):
        raise PreconditionError("the polynomial is valid only for alpha >= 1/2")
    if alpha > 1:
        raise DomainError("alpha must be <= 1")
    acc = 0 * alpha
    for coef in reversed(POLY_D89):
        acc = acc * alpha + coef
    return acc


def _fmt(x: float) -> str:
    return repr(float(x))


def rates_to_csv(points: Sequence[RatePoint], comment: Optional[str] = None) -> str:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "alpha", "kappa", "kappa_tilde"])
    for p in points:
        w.writerow([p.n, _fmt(p.alpha), _fmt(p.kappa), _fmt(p.kappa_tilde)])
    return buf.getvalue()


def gamma_to_csv(results: Sequence[GammaResult], comment: Optional[str] = None) -> str:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "gamma", "argmax_n", "saturated"])
    for r in results:
        w.writerow([_fmt(r.alpha), _fmt(r.value), r.argmax_n, str(r.saturated).lower()])
    return buf.getvalue()


def limit_to_csv(diags: Sequence[ThetaDiagnostic], comment: Optional[str] = None) -> str:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "theta", "kappa_tilde", "distance_to_limit", "gap_bound"])
    for t in diags:
        w.writerow([t.n, _fmt(t.theta), _fmt(t.kappa_tilde_at_theta), _fmt(t.distance_to_limit),
                    _fmt(t.gap_bound)])
    return buf.getvalue()
