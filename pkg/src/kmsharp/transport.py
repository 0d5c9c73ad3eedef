"""Bipartite transport between consecutive weight vectors.

For ``m <= n`` the problem ships the supplies ``pi^m`` (sources ``0..m``) to the
demands ``pi^n`` (destinations ``0..n``) with unit cost ``d_{i-1, j-1}`` on arc
``(i, j)``.  Costs are read from a distance table through its ``get(a, b)``
accessor, so any object exposing that method (including a table under
construction) can be used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, Tuple

import numpy as np

from .errors import ConstructionError, DomainError, InfeasibleError, PreconditionError
from .numeric import NumericMode, Scalar
from .schedule import StepSchedule, weights

Arc = Tuple[int, int]


@dataclass(frozen=True)
class TransportProblem:
    m: int
    n: int
    supplies: np.ndarray
    demands: np.ndarray
    costs: object = field(repr=False)
    schedule: StepSchedule = field(default=None, repr=False)

    @classmethod
    def build(cls, s: StepSchedule, costs, m: int, n: int, mode=NumericMode.EXACT) -> "TransportProblem":
        """Problem ``(m, n)`` for schedule ``s`` with costs from ``costs``."""
        if not 0 <= m <= n:
            raise DomainError(f"need 0 <= m <= n, got ({m}, {n})")
        mode = NumericMode.parse(mode)
        return cls(m, n, weights(s, m, mode), weights(s, n, mode), costs, s)

    @property
    def exact(self) -> bool:
        return self.supplies.dtype == object

    @property
    def zero(self) -> Scalar:
        return Fraction(0) if self.exact else 0.0

    def cost(self, i: int, j: int) -> Scalar:
        return self.costs.get(i - 1, j - 1)

    def check_balance(self) -> None:
        diff = sum(self.supplies) - sum(self.demands)
        if (diff != 0) if self.exact else abs(diff) > 1e-12:
            raise InfeasibleError(f"total supply and demand differ by {diff}")


@dataclass
class TransportPlan:
    """Sparse plan ``z[i, j]`` for sources ``0..m`` and destinations ``0..n``."""

    m: int
    n: int
    entries: Dict[Arc, Scalar] = field(default_factory=dict)

    def __getitem__(self, arc: Arc) -> Scalar:
        return self.entries.get(arc, 0)

    def __setitem__(self, arc: Arc, value: Scalar) -> None:
        if value == 0:
            self.entries.pop(arc, None)
        else:
            self.entries[arc] = value

    def positive(self) -> Iterator[Tuple[Arc, Scalar]]:
        for arc in sorted(self.entries):
            if self.entries[arc] > 0:
                yield arc, self.entries[arc]

    def copy(self) -> "TransportPlan":
        return TransportPlan(self.m, self.n, dict(self.entries))

    def row_sums(self) -> list:
        out = [0] * (self.m + 1)
        for (i, _), v in self.entries.items():
            out[i] += v
        return out

    def col_sums(self) -> list:
        out = [0] * (self.n + 1)
        for (_, j), v in self.entries.items():
            out[j] += v
        return out

    def is_feasible(self, p: TransportProblem, tol: float = 1e-12) -> bool:
        """Membership in the polytope of plans with marginals ``pi^m`` and ``pi^n``."""
        if any(v < 0 for v in self.entries.values()):
            return False
        pairs = list(zip(self.row_sums(), p.supplies)) + list(zip(self.col_sums(), p.demands))
        if p.exact:
            return all(a == b for a, b in pairs)
        return all(abs(a - b) <= tol for a, b in pairs)

    def is_simple(self, p: TransportProblem) -> bool:
        """``z_ii = pi_i^n`` for every source ``i``."""
        for i in range(self.m + 1):
            a, b = self[i, i], p.demands[i]
            if (a != b) if p.exact else abs(a - b) > 1e-12:
                return False
        return True

    def as_array(self) -> np.ndarray:
        exact = any(isinstance(v, Fraction) for v in self.entries.values())
        out = NumericMode.EXACT.array((self.m + 1, self.n + 1)) if exact else np.zeros((self.m + 1, self.n + 1))
        for (i, j), v in self.entries.items():
            out[i, j] = v
        return out


@dataclass(frozen=True)
class DualPotentials:
    """Node potentials ``u_0..u_n`` normalized to ``u_0 = 0``."""

    values: tuple

    @property
    def n(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, j: int) -> Scalar:
        # constant extension beyond n
        return self.values[min(j, self.n)]

    def __len__(self) -> int:
        return len(self.values)


def plan_cost(z: TransportPlan, costs) -> Scalar:
    """``sum_ij z_ij d_{i-1, j-1}``."""
    total = 0
    for (i, j), v in z.entries.items():
        if i != j:
            total += v * costs.get(i - 1, j - 1)
    return total


def _positive(x, eps) -> bool:
    return x > eps


def solve_exact(p: TransportProblem) -> Tuple[TransportPlan, DualPotentials]:
    """Optimal plan and complementary potentials for problem ``p``.

    Solves the residual min-cost flow on the complete graph over nodes
    ``0..n``: node ``i <= m`` supplies ``pi_i^m - pi_i^n`` and node ``j > m``
    demands ``pi_j^n``.  Successive shortest paths with node potentials
    (Dijkstra on reduced costs) keep every residual arc at nonnegative reduced
    cost, so the final potentials are dual feasible and tight on every arc
    carrying flow.  The flow is then decomposed into source-to-sink paths and
    each path is replaced by its direct arc; tightness makes the replacement
    cost-neutral.  Adding the diagonal ``z_ii = pi_i^n`` gives a plan for the
    bipartite problem with the same cost, which is therefore optimal there too.

    Ties are broken by node index.
    """
    p.check_balance()
    m, n = p.m, p.n
    exact = p.exact
    eps = 0 if exact else 1e-15
    zero = p.zero
    size = n + 1

    C = [[zero if i == j else p.cost(i, j) for j in range(size)] for i in range(size)]
    excess = [p.supplies[i] - p.demands[i] for i in range(m + 1)] + [-p.demands[j] for j in range(m + 1, size)]
    initial = list(excess)
    flow = [[zero] * size for _ in range(size)]
    pot = [zero] * size

    while any(e < -eps for e in excess):
        dist = [None] * size
        prev = [-1] * size
        done = [False] * size
        for v in range(size):
            if excess[v] > eps:
                dist[v] = zero
        for _ in range(size):
            u, best = -1, None
            for v in range(size):
                if not done[v] and dist[v] is not None and (best is None or dist[v] < best):
                    u, best = v, dist[v]
            if u < 0:
                break
            done[u] = True
            for v in range(size):
                if v == u or done[v]:
                    continue
                arc = -C[v][u] if flow[v][u] > eps else C[u][v]
                nd = best + arc + pot[u] - pot[v]
                if not exact and nd < best:
                    nd = best
                if dist[v] is None or nd < dist[v]:
                    dist[v] = nd
                    prev[v] = u
        target = None
        for v in range(size):
            if excess[v] < -eps and (target is None or dist[v] < dist[target]):
                target = v
        if target is None or dist[target] is None:
            raise InfeasibleError("no augmenting path")
        for v in range(size):
            pot[v] += dist[v]

        path = [target]
        while prev[path[-1]] >= 0:
            path.append(prev[path[-1]])
        path.reverse()
        source = path[0]
        amount = min(excess[source], -excess[target])
        for a, b in zip(path, path[1:]):
            if flow[b][a] > eps:
                amount = min(amount, flow[b][a])
        for a, b in zip(path, path[1:]):
            if flow[b][a] > eps:
                flow[b][a] -= amount
                if not exact and flow[b][a] <= eps:
                    flow[b][a] = zero
            else:
                flow[a][b] += amount
        excess[source] -= amount
        excess[target] += amount
        if not exact:
            for v in (source, target):
                if abs(excess[v]) <= 1e-15:
                    excess[v] = zero

    plan = TransportPlan(m, n)
    for i in range(m + 1):
        plan[i, i] = p.demands[i]
    remaining = [initial[i] for i in range(m + 1)]
    absorb = [zero] * (m + 1) + [-initial[j] for j in range(m + 1, size)]
    for s in range(m + 1):
        while remaining[s] > eps:
            path = [s]
            v = s
            while not (v > m and absorb[v] > eps):
                nxt = next((w for w in range(size) if flow[v][w] > eps), None)
                if nxt is None:
                    if v > m or not exact:
                        break
                    raise ConstructionError(f"flow decomposition stuck at node {v}")
                path.append(nxt)
                v = nxt
            amount = remaining[s]
            if v > m:
                amount = min(amount, absorb[v])
            for a, b in zip(path, path[1:]):
                amount = min(amount, flow[a][b])
            if amount <= eps:
                break
            for a, b in zip(path, path[1:]):
                flow[a][b] -= amount
            remaining[s] -= amount
            absorb[v] -= amount
            plan[s, v] = plan[s, v] + amount

    u = tuple(x - pot[0] for x in pot)
    return plan, DualPotentials(u)


def inside_out(p: TransportProblem) -> TransportPlan:
    """Greedy plan: pin the diagonal, then fill demands ``m+1..n`` from the
    closest source with residual supply, moving from ``m`` down to ``0``."""
    m, n = p.m, p.n
    plan = TransportPlan(m, n)
    residual = []
    for i in range(m + 1):
        plan[i, i] = p.demands[i]
        residual.append(p.supplies[i] - p.demands[i])
    tol = 0 if p.exact else 1e-15
    i = m
    for j in range(m + 1, n + 1):
        need = p.demands[j]
        while need > tol:
            while i >= 0 and residual[i] <= tol:
                i -= 1
            if i < 0:
                if p.exact or need > 1e-12:
                    raise InfeasibleError("supplies exhausted before demands")
                break
            take = min(need, residual[i])
            plan[i, j] = plan[i, j] + take
            residual[i] -= take
            need -= take
    return plan


def closed_form_plan(p: TransportProblem) -> TransportPlan:
    """The inside-out plan written out for schedules with every step >= 1/2.

    Node ``m`` covers all of ``m+1..n-1``; every source then sends its remainder
    to ``n``.
    """
    m, n = p.m, p.n
    s = p.schedule
    if s is None:
        raise PreconditionError("closed form needs the problem's schedule")
    if n >= 1 and s.min_step(n) < Fraction(1, 2):
        raise PreconditionError("closed form requires every step alpha_k >= 1/2")
    plan = TransportPlan(m, n)
    for i in range(m + 1):
        plan[i, i] = p.demands[i]
    if m == n:
        return plan
    for j in range(m + 1, n):
        plan[m, j] = p.demands[j]
    for i in range(m):
        plan[i, n] = p.supplies[i] - p.demands[i]
    plan[m, n] = p.supplies[m] - sum(p.demands[m:n])
    return plan


def simplify_plan(z: TransportPlan, p: TransportProblem) -> TransportPlan:
    """Move mass onto the diagonal without raising the cost.

    While some ``z_ii < pi_i^n`` (smallest such ``i``), pick a source ``j != i``
    shipping into ``i`` and the smallest destination ``k != i`` served by
    ``i``, and shift ``eps = min(z_ji, z_ik)`` from ``(j, i), (i, k)`` onto
    ``(i, i), (j, k)``.  By the triangle inequality each shift is cost
    non-increasing; a shift that raises the cost means the cost table is not a
    metric and raises :class:`ConstructionError`.
    """
    m = z.m
    out = z.copy()
    exact = p.exact
    tol = 0 if exact else 1e-15
    guard = 0
    limit = 4 * (m + 1) ** 2 * (z.n + 1) + 16
    while True:
        i = next((i for i in range(m + 1) if p.demands[i] - out[i, i] > tol), None)
        if i is None:
            break
        j = next((j for j in range(m + 1) if j != i and out[j, i] > tol), None)
        k = next((k for k in range(z.n + 1) if k != i and out[i, k] > tol), None)
        if j is None or k is None:
            if not exact:
                out[i, i] = p.demands[i]
                continue
            raise ConstructionError(f"plan is not feasible at source {i}")
        eps = min(out[j, i], out[i, k])
        delta = p.cost(j, k) - p.cost(j, i) - p.cost(i, k)
        if delta > (0 if exact else 1e-12):
            raise ConstructionError(f"transfer at (i={i}, j={j}, k={k}) raises the cost by {eps * delta}")
        out[i, i] = out[i, i] + eps
        out[j, i] = out[j, i] - eps
        out[i, k] = out[i, k] - eps
        out[j, k] = out[j, k] + eps
        if not exact:
            for arc in ((j, i), (i, k)):
                if abs(out[arc]) <= tol:
                    out[arc] = 0
        guard += 1
        if guard > limit:
            raise ConstructionError("simplification did not terminate")
    return out


def verify_no_crossing(z: TransportPlan) -> bool:
    """True iff no positive arcs ``(i, j)``, ``(k, l)`` with ``i < k < j < l``."""
    arcs = [arc for arc, _ in z.positive()]
    for i, j in arcs:
        for k, l in arcs:
            if i < k < j < l:
                return False
    return True


def crossing_pairs(z: TransportPlan) -> list:
    arcs = [arc for arc, _ in z.positive()]
    return [((i, j), (k, l)) for i, j in arcs for k, l in arcs if i < k < j < l]
