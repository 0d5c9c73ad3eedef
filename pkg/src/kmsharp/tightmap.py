"""A worst-case orbit that attains every recursive bound.

For each pair ``(m, n)`` with ``m < n <= N`` take the min-cost-flow potentials
``u^{mn}`` (shifted to ``u_0 = 0`` and extended by ``u_j = u_n`` for
``j > n``).  The images ``y^k = (u^{mn}_{k+1})_{(m,n)}`` and the averaged
iterates ``x^k = (1 - alpha_k) x^{k-1} + alpha_k y^{k-1}`` from ``x^0 = 0``
then satisfy ``||x^m - x^n||_inf = d_mn`` on the coordinates ``Q_N``.

With potentials normalised by ``u_0 = 0`` and ``u_j - u_i = d_{i-1,j-1}`` on
shipped arcs, coordinate ``(m, n)`` moves upward: ``x^n - x^m = d_mn`` there.

Only the orbit is built; extending ``x^k -> y^k`` to a nonexpansive map of the
whole cube is not attempted.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .bounds import DistanceTable, PropertyReport
from .errors import ConstructionError, DomainError
from .numeric import NumericMode, Scalar, format_scalar
from .schedule import StepSchedule
from .transport import DualPotentials, TransportPlan, TransportProblem, solve_exact

Pair = Tuple[int, int]

FLOAT_TOL = 1e-10


def pair_index(N: int) -> List[Pair]:
    """``Q_N = {(m, n): 0 <= m < n <= N}`` in lexicographic order."""
    return [(m, n) for m in range(N) for n in range(m + 1, N + 1)]


@dataclass
class PotentialFamily:
    N: int
    mode: NumericMode
    potentials: Dict[Pair, DualPotentials]
    plans: Dict[Pair, TransportPlan] = field(repr=False)

    def u(self, m: int, n: int, j: int) -> Scalar:
        return self.potentials[(m, n)][j]


def _tol(mode: NumericMode):
    return 0 if mode is NumericMode.EXACT else FLOAT_TOL


def build_potentials(s: StepSchedule, d: DistanceTable, N: Optional[int] = None) -> PotentialFamily:
    """Potentials for every pair of ``Q_N`` with all construction checks.

    Raises :class:`ConstructionError` when a potential vector leaves ``[0, 1]``,
    violates ``|u_j - u_i| <= d_{i-1,j-1}`` (extension included), or is not
    tight on a positive arc of its plan.
    """
    N = d.N if N is None else N
    if N > d.N:
        raise DomainError(f"horizon {N} beyond table horizon {d.N}")
    mode = d.mode
    tol = _tol(mode)
    pots, plans = {}, {}
    for m, n in pair_index(N):
        p = TransportProblem.build(s, d, m, n, mode)
        plan, u = solve_exact(p)
        if u[0] != 0:
            raise ConstructionError(f"u_0 = {u[0]} for pair ({m}, {n})")
        if any(x < -tol or x > 1 + tol for x in u.values):
            raise ConstructionError(f"potentials for ({m}, {n}) leave [0, 1]")
        for (i, j), z in plan.positive():
            if abs((u[j] - u[i]) - p.cost(i, j)) > tol:
                raise ConstructionError(f"arc ({i}, {j}) of pair ({m}, {n}) is not tight")
        if not any(z > 0 and abs(u[j] - 1) <= tol for (i, j), z in plan.positive() if i == 0 and j > 0):
            raise ConstructionError(f"no arc from source 0 reaches potential 1 for ({m}, {n})")
        for i in range(N + 1):
            for j in range(N + 1):
                if u[j] - u[i] > d.get(i - 1, j - 1) + tol:
                    raise ConstructionError(f"potentials for ({m}, {n}) infeasible on ({i}, {j})")
        pots[(m, n)] = u
        plans[(m, n)] = plan
    return PotentialFamily(N, mode, pots, plans)


@dataclass
class Orbit:
    """Iterates ``x[0..N]`` and images ``y[0..N-1]`` over the coordinates ``pairs``."""

    N: int
    pairs: List[Pair]
    x: np.ndarray
    y: np.ndarray
    family: PotentialFamily = field(repr=False)

    def coordinate(self, pair: Pair) -> int:
        return self.pairs.index(pair)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "m", "n", "x_value"])
        for k in range(self.N + 1):
            for q, (m, n) in enumerate(self.pairs):
                w.writerow([k, m, n, format_scalar(self.x[k, q])])
        return buf.getvalue()


def build_orbit(s: StepSchedule, pf: PotentialFamily, N: Optional[int] = None) -> Orbit:
    N = pf.N if N is None else N
    if N > pf.N:
        raise DomainError(f"horizon {N} beyond potential family horizon {pf.N}")
    mode = pf.mode
    pairs = pair_index(N)
    y = mode.array((N, len(pairs)))
    for q, (m, n) in enumerate(pairs):
        for k in range(N):
            y[k, q] = pf.u(m, n, k + 1)
    x = mode.array((N + 1, len(pairs)))
    for k in range(1, N + 1):
        a = s.alpha(k, mode)
        x[k] = (1 - a) * x[k - 1] + a * y[k - 1]
    return Orbit(N, pairs, x, y, pf)


def _sup_norm(v) -> Scalar:
    return max(abs(t) for t in v) if len(v) else 0


def verify_isometry(orbit: Orbit, d: DistanceTable) -> PropertyReport:
    """Check the orbit identities.

    For every pair ``m < n``: ``||x^m - x^n|| <= d_mn``, coordinate ``(m, n)``
    attains it (``x^n - x^m = d_mn`` there), hence equality.  For ``0 <= i < j <= N-1``:
    ``||y^i - y^j|| <= d_ij`` with equality whenever some plan ships along arc
    ``(i+1, j+1)``; the plan of pair ``(j, j+1)`` must be the explicit one
    ``z_kk = pi_k^{j+1}``, ``z_{k,j+1} = pi_k^j - pi_k^{j+1}``.
    """
    rep = PropertyReport("isometry", orbit.N)
    tol = _tol(d.mode)
    x, y = orbit.x, orbit.y
    worst = 0
    for k in range(orbit.N + 1):
        if any(v < -tol or v > 1 + tol for v in x[k]):
            rep.violations.append(("range", k, k))
    for q, (m, n) in enumerate(orbit.pairs):
        dmn = d.get(m, n)
        norm = _sup_norm(x[m] - x[n])
        pinned = x[n, q] - x[m, q]
        rep.checked += 1
        if norm - dmn > tol:
            rep.violations.append(("above_bound", m, n))
        if abs(pinned - dmn) > tol:
            rep.violations.append(("coordinate", m, n))
        if abs(norm - dmn) > tol:
            rep.violations.append(("norm", m, n))
        worst = max(worst, abs(norm - dmn), abs(pinned - dmn))

    witnessed = set()
    for (m, n), plan in orbit.family.plans.items():
        if n > orbit.N:
            continue
        for (i, j), z in plan.positive():
            if i != j and i >= 1:
                witnessed.add((i - 1, j - 1))
    s = d.schedule
    for j in range(orbit.N):
        if s is None or (j, j + 1) not in orbit.family.plans:
            continue
        plan = orbit.family.plans[(j, j + 1)]
        p = TransportProblem.build(s, d, j, j + 1, d.mode)
        for k in range(j + 1):
            if abs(plan[k, k] - p.demands[k]) > tol or abs(plan[k, j + 1] - (p.supplies[k] - p.demands[k])) > tol:
                rep.violations.append(("explicit_plan", j, j + 1))
                break
    pair_count = 0
    for i in range(orbit.N):
        for j in range(i + 1, orbit.N):
            dij = d.get(i, j)
            norm = _sup_norm(y[i] - y[j])
            pair_count += 1
            if norm - dij > tol:
                rep.violations.append(("image_above_bound", i, j))
            if (i, j) in witnessed and abs(norm - dij) > tol:
                rep.violations.append(("image_equality", i, j))
            elif (i, j) in witnessed:
                worst = max(worst, abs(norm - dij))
    rep.worst_violation = worst
    rep.checked += pair_count
    rep.note = f"max deviation {float(worst):.3e}; witnessed image pairs {len(witnessed & set((i, j) for i in range(orbit.N) for j in range(i + 1, orbit.N)))}/{pair_count}"
    return rep


def tight_orbit(s: StepSchedule, d: DistanceTable, N: Optional[int] = None) -> Tuple[Orbit, PropertyReport]:
    """Potentials, orbit and isometry report in one call."""
    pf = build_potentials(s, d, N)
    orbit = build_orbit(s, pf)
    return orbit, verify_isometry(orbit, d)
