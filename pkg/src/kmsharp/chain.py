"""The fox-and-hare absorbing chains behind the recursive bounds.

From a transient state ``(m, n)`` with ``m < n`` the chain jumps to
``(i-1, j-1)`` with probability ``z_ij`` of a transport plan for problem
``(m, n)``.  Diagonal targets collapse into the capture state ``f`` and
targets ``(-1, k)`` into the escape state ``h``.  With optimal simple plans
(chain ``D``) the escape probability from ``(m, n)`` is ``d_mn``; with the
product plans (chain ``C``) it is ``c_mn``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple, Union

import numpy as np

from .bounds import DistanceTable
from .errors import DomainError, PreconditionError
from .numeric import NumericMode, Scalar
from .schedule import StepSchedule
from .transport import TransportPlan, TransportProblem, closed_form_plan, simplify_plan, solve_exact

HARE = "h"
FOX = "f"

State = Union[Tuple[int, int], str]

GENERATOR = "numpy.random.PCG64"


class ChainKind(enum.Enum):
    D = "D"
    C = "C"

    @classmethod
    def parse(cls, value) -> "ChainKind":
        if isinstance(value, ChainKind):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise DomainError(f"unknown chain kind {value!r}") from None


@dataclass(frozen=True)
class TransitionRow:
    source: State
    probs: Dict[State, Scalar]

    def total(self) -> Scalar:
        return sum(self.probs.values())


def collapse(i: int, j: int) -> State:
    """Chain state reached through plan arc ``(i, j)``."""
    if i == j:
        return FOX
    if i == 0:
        return HARE
    return (i - 1, j - 1)


def product_plan(p: TransportProblem) -> TransportPlan:
    """Diagonal ``pi_i^n`` plus ``pi_i^m pi_j^n`` from every source to every ``j > m``."""
    plan = TransportPlan(p.m, p.n)
    for i in range(p.m + 1):
        plan[i, i] = p.demands[i]
        for j in range(p.m + 1, p.n + 1):
            plan[i, j] = p.supplies[i] * p.demands[j]
    return plan


def optimal_simple_plan(p: TransportProblem) -> TransportPlan:
    """Closed-form plan when every step is >= 1/2, else the simplified min-cost-flow plan."""
    s = p.schedule
    if p.n >= 1 and s.min_step(p.n) >= Fraction(1, 2):
        return closed_form_plan(p)
    plan, _ = solve_exact(p)
    return simplify_plan(plan, p)


class FoxHareChain:
    """Chain of the given kind for schedule ``s``, with costs from table ``d``.

    Rows are generated on demand and cached; no transition matrix is formed.
    """

    def __init__(self, kind, s: StepSchedule, d: DistanceTable):
        self.kind = ChainKind.parse(kind)
        self.schedule = s
        self.table = d
        self.mode = d.mode
        self._plans: Dict[Tuple[int, int], TransportPlan] = {}
        self._rows: Dict[Tuple[int, int], TransitionRow] = {}
        self._absorb: Dict[Tuple[int, int], Scalar] = {}

    def plan(self, m: int, n: int) -> TransportPlan:
        key = (m, n)
        if key not in self._plans:
            p = TransportProblem.build(self.schedule, self.table, m, n, self.mode)
            self._plans[key] = optimal_simple_plan(p) if self.kind is ChainKind.D else product_plan(p)
        return self._plans[key]

    def row(self, state: State) -> TransitionRow:
        if state in (HARE, FOX):
            return TransitionRow(state, {state: self.mode.one})
        m, n = state
        if not 0 <= m < n:
            raise DomainError(f"({m}, {n}) is not a transient state")
        if n > self.table.N:
            raise DomainError(f"state ({m}, {n}) beyond table horizon {self.table.N}")
        if state not in self._rows:
            probs: Dict[State, Scalar] = {}
            for (i, j), v in self.plan(m, n).positive():
                target = collapse(i, j)
                probs[target] = probs.get(target, 0) + v
            self._rows[state] = TransitionRow(state, probs)
        return self._rows[state]

    def absorption_h(self, m: int, n: int) -> Scalar:
        """Probability of reaching ``h`` from ``(m, n)``; 0 on the diagonal."""
        if m == n:
            return self.mode.zero
        if m > n:
            m, n = n, m
        if m < 0:
            raise DomainError("states start at index 0")
        key = (m, n)
        if key in self._absorb:
            return self._absorb[key]
        total = self.mode.zero
        for target, prob in self.row(key).probs.items():
            if target == HARE:
                total += prob
            elif target != FOX:
                total += prob * self.absorption_h(*target)
        self._absorb[key] = total
        return total

    def _sampler(self, state):
        """Inverse-CDF table over the row's plan arcs in (i, j) order."""
        arcs = list(self.plan(*state).positive())
        probs = np.array([float(v) for _, v in arcs])
        cdf = np.cumsum(probs)
        cdf /= cdf[-1]
        targets = [collapse(i, j) for (i, j), _ in arcs]
        return cdf, targets

    def simulate(self, m: int, n: int, samples: int, seed: int, shards: int = 1) -> Tuple[float, float]:
        """Monte Carlo estimate of the escape probability and its standard error.

        Shard ``k`` draws from ``PCG64(seed + k)``; shard sizes differ by at
        most one, so results depend only on ``(samples, seed, shards)``.
        """
        if samples < 1:
            raise DomainError("samples must be >= 1")
        if m == n:
            return 0.0, 0.0
        sizes = [samples // shards + (1 if k < samples % shards else 0) for k in range(shards)]
        cache = {}
        escaped = 0
        for k, size in enumerate(sizes):
            if size:
                escaped += self._run_shard((m, n), size, np.random.Generator(np.random.PCG64(seed + k)), cache)
        p_hat = escaped / samples
        return p_hat, math.sqrt(p_hat * (1.0 - p_hat) / samples)

    def _run_shard(self, start, size, rng, cache) -> int:
        # all trajectories advance together; the chain absorbs within m steps
        states = {start: size}
        escaped = 0
        while states:
            nxt: Dict[State, int] = {}
            for state in sorted(states):
                count = states[state]
                if state not in cache:
                    cache[state] = self._sampler(state)
                cdf, targets = cache[state]
                picks = np.searchsorted(cdf, rng.random(count), side="right")
                picks = np.minimum(picks, len(targets) - 1)
                hits = np.bincount(picks, minlength=len(targets))
                for t, h in zip(targets, hits.tolist()):
                    if not h:
                        continue
                    if t == HARE:
                        escaped += h
                    elif t != FOX:
                        nxt[t] = nxt.get(t, 0) + h
            states = nxt
        return escaped


def transition_row(kind, m: int, n: int, s: StepSchedule, d: DistanceTable) -> TransitionRow:
    return FoxHareChain(kind, s, d).row((m, n))


def absorption_h(kind, m: int, n: int, s: StepSchedule, d: DistanceTable) -> Scalar:
    return FoxHareChain(kind, s, d).absorption_h(m, n)


@dataclass
class SimulationReport:
    state: Tuple[int, int]
    kind: str
    alpha: Optional[float]
    samples: int
    seed: int
    estimate: float
    stderr: float
    exact: float
    z_score: Optional[float]
    generator: str = GENERATOR
    shards: int = 1
    schedule: str = ""

    def to_json(self) -> str:
        out = asdict(self)
        out["state"] = list(self.state)
        return json.dumps(out, indent=2)


def simulate(kind, m: int, n: int, s: StepSchedule, d: DistanceTable, samples: int, seed: int,
             shards: int = 1) -> Tuple[float, float]:
    """``(estimate, stderr)`` of the escape probability from ``(m, n)``."""
    return FoxHareChain(kind, s, d).simulate(m, n, samples, seed, shards)


def simulation_report(kind, m: int, n: int, s: StepSchedule, d: DistanceTable, samples: int,
                      seed: int, shards: int = 1) -> SimulationReport:
    """Simulate and compare with the exact escape probability."""
    chain = FoxHareChain(kind, s, d)
    est, se = chain.simulate(m, n, samples, seed, shards)
    exact = float(chain.absorption_h(m, n))
    z = (est - exact) / se if se > 0 else (0.0 if est == exact else None)
    alpha = float(s.steps[0]) if s.constant else None
    return SimulationReport((m, n), chain.kind.value, alpha, samples, seed, est, se, exact, z,
                            GENERATOR, shards, s.literal())


# ---------------------------------------------------------------- plan differences

def _check_half(alpha) -> None:
    if not Fraction(1, 2) <= alpha < 1:
        raise PreconditionError("needs a constant step 1/2 <= alpha < 1")


def plan_difference_row(m: int, n: int, alpha) -> Tuple[Dict[Tuple[int, int], Scalar], Scalar]:
    """``|z_ij - z~_ij|`` for ``1 <= i <= m < j <= n`` and their sum ``Gamma(m, n)``.

    Uses the closed forms for a constant step ``alpha >= 1/2``:

    * ``alpha^2 beta^{m-i+n-j}`` for ``i < m``, ``j < n``
    * ``alpha beta^{m-i+1} (1 - beta^{n-m-1})`` for ``i < m``, ``j = n``
    * ``alpha beta^{n-j+1}`` for ``i = m``, ``j < n``
    * ``beta^2 (1 - beta^{n-m-1})`` for ``i = m``, ``j = n``
    """
    _check_half(alpha)
    if not 0 <= m < n:
        raise DomainError(f"need 0 <= m < n, got ({m}, {n})")
    beta = 1 - alpha
    pw = [beta ** 0]
    for _ in range(n + 1):
        pw.append(pw[-1] * beta)
    tail = 1 - pw[n - m - 1]
    a2 = alpha * alpha
    entries = {}
    for i in range(1, m + 1):
        for j in range(m + 1, n + 1):
            if i < m and j < n:
                v = a2 * pw[m - i + n - j]
            elif i < m:
                v = alpha * pw[m - i + 1] * tail
            elif j < n:
                v = alpha * pw[n - j + 1]
            else:
                v = pw[2] * tail
            entries[(i, j)] = v
    return entries, sum(entries.values(), 0 * alpha)


def plan_difference_direct(m: int, n: int, alpha) -> Tuple[Dict[Tuple[int, int], Scalar], Scalar]:
    """Same quantities computed from the two plans themselves."""
    _check_half(alpha)
    mode = NumericMode.EXACT if isinstance(alpha, Fraction) else NumericMode.FLOAT
    s = StepSchedule.const(alpha)
    p = TransportProblem.build(s, _NoCosts(), m, n, mode)
    z = closed_form_plan(p)
    zt = product_plan(p)
    entries = {(i, j): abs(z[i, j] - zt[i, j]) for i in range(1, m + 1) for j in range(m + 1, n + 1)}
    return entries, sum(entries.values(), mode.zero)


class _NoCosts:
    def get(self, a, b):
        raise DomainError("costs are not needed here")


def coupling_bound(alpha, m: int) -> Scalar:
    """``4 m (1 - alpha)^2``, the bound on ``c_mn - d_mn``."""
    _check_half(alpha)
    return 4 * m * (1 - alpha) ** 2
