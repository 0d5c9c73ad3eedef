"""Triangular tables of the recursive bounds ``d_mn`` and ``c_mn``.

Both tables are indexed by ``-1 <= m, n <= N`` with the boundary values
``x_{-1,-1} = 0`` and ``x_{-1,k} = x_{k,-1} = 1``.  Entries are stored in a
full symmetric array with a one-slot offset, so the cost of arc ``(i, j)`` in
problem ``(m, n)``, namely ``d_{i-1,j-1}``, is simply ``values[i, j]``.

Cells are filled column by column: every cell of column ``n`` reads only
columns ``< n``.
"""

from __future__ import annotations

import csv
import io
import time
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np
from scipy.signal import lfilter

from .errors import ConstructionError, DomainError, HorizonError, PreconditionError
from .numeric import FLOAT_NOISE, NumericMode, Scalar, format_scalar, parse_scalar
from .schedule import StepSchedule, weight_matrix, weights
from .transport import TransportProblem, plan_cost, solve_exact

METHODS = ("lp", "inside_out", "closed_form")

# exact builds beyond this horizon get slow (denominators grow with depth)
EXACT_PRACTICAL_HORIZON = 40


@dataclass
class DistanceTable:
    """Recursive bounds up to horizon ``N``; ``kind`` is ``"d"`` or ``"c"``."""

    N: int
    mode: NumericMode
    values: np.ndarray = field(repr=False)
    method: str = "inside_out"
    kind: str = "d"
    schedule: Optional[StepSchedule] = None
    seconds: float = 0.0

    def get(self, m: int, n: int) -> Scalar:
        if not (-1 <= m <= self.N and -1 <= n <= self.N):
            raise HorizonError(f"({m}, {n}) outside table horizon {self.N}")
        return self.values[m + 1, n + 1]

    __call__ = get

    def __getitem__(self, mn: Tuple[int, int]) -> Scalar:
        return self.get(*mn)

    def __setitem__(self, mn: Tuple[int, int], value: Scalar) -> None:
        m, n = mn
        self.values[m + 1, n + 1] = value
        self.values[n + 1, m + 1] = value

    def copy(self) -> "DistanceTable":
        return DistanceTable(self.N, self.mode, self.values.copy(), self.method, self.kind, self.schedule)

    def to_float(self) -> "DistanceTable":
        return DistanceTable(self.N, NumericMode.FLOAT, self.values.astype(np.float64), self.method,
                             self.kind, self.schedule, self.seconds)

    def cells(self):
        """``(m, n, value)`` for ``-1 <= m <= n <= N`` in row-major order."""
        for m in range(-1, self.N + 1):
            for n in range(m, self.N + 1):
                yield m, n, self.get(m, n)

    def superdiagonal(self) -> np.ndarray:
        """``d_{n, n+1}`` for ``n = 0..N-1``."""
        v = self.values
        return np.array([v[n + 1, n + 2] for n in range(self.N)], dtype=v.dtype)


# a table of c_mn has the same shape and accessors
CTable = DistanceTable


def _empty(N: int, mode: NumericMode) -> np.ndarray:
    V = mode.array((N + 2, N + 2), 1)
    V[0, 0] = mode.zero
    for k in range(N + 2):
        V[k, k] = mode.zero
    return V


def residual_demands(s: StepSchedule, m: int, n: int, mode=NumericMode.EXACT) -> np.ndarray:
    """``pi_j^n - pi_j^m`` for ``j = 0..n`` (``pi_j^m = 0`` for ``j > m``)."""
    if not 0 <= m <= n:
        raise DomainError(f"need 0 <= m <= n, got ({m}, {n})")
    out = weights(s, n, mode).copy()
    out[: m + 1] -= weights(s, m, mode)
    return out


# ---------------------------------------------------------------- cell kernels

def _inside_out_cell_exact(V, W, m, n):
    residual = [W[m, i] - W[n, i] for i in range(m + 1)]
    total = 0
    i = m
    for j in range(m + 1, n + 1):
        need = W[n, j]
        while need > 0:
            while residual[i] == 0:
                i -= 1
            take = need if need < residual[i] else residual[i]
            total += take * V[i, j]
            residual[i] -= take
            need -= take
    return total


def _inside_out_cell_float(V, W, m, n):
    # monotone coupling of the residual supplies (ordered m..0) with the
    # demands m+1..n, evaluated on the merged cumulative-mass breakpoints
    r = (W[m, : m + 1] - W[n, : m + 1])[::-1]
    A = np.cumsum(r)
    B = np.cumsum(W[n, m + 1 : n + 1])
    t = np.sort(np.concatenate((A, B)))
    lengths = np.diff(t, prepend=0.0)
    mid = t - 0.5 * lengths
    si = np.minimum(np.searchsorted(A, mid, side="right"), m)
    dj = np.minimum(np.searchsorted(B, mid, side="right"), n - m - 1)
    return float(np.dot(lengths, V[m - si, m + 1 + dj]))


def _closed_form_cell(V, W, m, n):
    total = 0
    for j in range(m + 1, n):
        total += W[n, j] * V[m, j]
    for i in range(m):
        total += (W[m, i] - W[n, i]) * V[i, n]
    total += (W[m, m] - sum(W[n, m:n])) * V[m, n]
    return total


def _closed_form_cell_float(V, W, m, n):
    total = float(np.dot(W[n, m + 1 : n], V[m, m + 1 : n]))
    total += float(np.dot(W[m, :m] - W[n, :m], V[:m, n]))
    total += (W[m, m] - W[n, m:n].sum()) * V[m, n]
    return total


class _Costs:
    """Cost accessor over a table array under construction."""

    def __init__(self, V):
        self.V = V

    def get(self, a, b):
        return self.V[a + 1, b + 1]


def _lp_cell(V, s, m, n, mode):
    p = TransportProblem.build(s, _Costs(V), m, n, mode)
    plan, _ = solve_exact(p)
    return plan_cost(plan, p.costs)


def _closed_form_recurrence(alpha: float, N: int) -> np.ndarray:
    """All ``d_mn`` for a constant step ``alpha >= 1/2`` in ``O(N^2)``.

    With ``pi_j^n = alpha beta^{n-j}`` the three sums of the closed-form plan
    obey first-order recurrences: one in ``n`` (carried across columns) and one
    in ``m`` (a linear filter within a column).
    """
    beta = 1.0 - alpha
    V = _empty(N, NumericMode.FLOAT)
    diag = np.full(N + 1, alpha)  # pi_m^m
    diag[0] = 1.0
    S = np.zeros(N + 1)
    for n in range(1, N + 1):
        if n >= 2:
            S[: n - 1] = beta * S[: n - 1] + alpha * beta * V[: n - 1, n - 1]
        S[n - 1] = 0.0
        m = np.arange(n)
        col = V[:n, n]
        x = beta * diag[: n - 1] * col[: n - 1]
        T = np.concatenate(([0.0], lfilter([1.0], [1.0, -beta], x))) if n > 1 else np.zeros(1)
        bpow = beta ** (n - m)
        term2 = (1.0 - bpow) * T
        term3 = (diag[:n] - (beta - bpow * (1.0 - diag[:n]))) * col
        d = S[:n] + term2 + term3
        V[1 : n + 1, n + 1] = d
        V[n + 1, 1 : n + 1] = d
    return V


# ---------------------------------------------------------------- builders

def build_d_table(s: StepSchedule, N: int, method: str = "inside_out", mode=NumericMode.FLOAT,
                  cross_check: Optional[bool] = None, recurrence: Optional[bool] = None) -> DistanceTable:
    """Table of ``d_mn`` for ``-1 <= m <= n <= N``.

    ``method`` selects how each transport problem is solved: ``"lp"`` (exact
    min-cost flow), ``"inside_out"`` (greedy, default) or ``"closed_form"``
    (requires every step >= 1/2).  All three give the same table.

    ``cross_check`` compares each inside-out cell against the min-cost flow
    optimum and raises :class:`ConstructionError` on a mismatch.  By default it
    is on for exact builds of schedules with some step below 1/2, where the
    greedy's optimality is not covered by the closed form.

    ``recurrence`` enables the ``O(N^2)`` path for constant float schedules
    with ``method="closed_form"`` (default: on for those).
    """
    mode = NumericMode.parse(mode)
    if method not in METHODS:
        raise DomainError(f"unknown method {method!r}; expected one of {METHODS}")
    if N < 0:
        raise DomainError("horizon must be >= 0")
    s.check_horizon(N)
    low = N >= 1 and s.min_step(N) < Fraction(1, 2)
    if method == "closed_form" and low:
        raise PreconditionError("closed_form requires every step alpha_k >= 1/2")
    if mode is NumericMode.EXACT and N > EXACT_PRACTICAL_HORIZON:
        warnings.warn(f"exact build to N={N} may be slow; practical horizon is about "
                      f"{EXACT_PRACTICAL_HORIZON}", ResourceWarning, stacklevel=2)
    if cross_check is None:
        cross_check = mode is NumericMode.EXACT and low and method == "inside_out"

    start = time.perf_counter()
    if recurrence is None:
        recurrence = method == "closed_form" and s.constant and mode is NumericMode.FLOAT
    if recurrence:
        if not (s.constant and mode is NumericMode.FLOAT and method == "closed_form"):
            raise PreconditionError("the recurrence path needs a constant float closed_form build")
        V = _closed_form_recurrence(float(s.steps[0]), N)
    else:
        W = weight_matrix(s, N, mode)
        V = _empty(N, mode)
        exact = mode is NumericMode.EXACT
        for n in range(1, N + 1):
            for m in range(n):
                if method == "lp":
                    val = _lp_cell(V, s, m, n, mode)
                elif method == "closed_form":
                    val = _closed_form_cell(V, W, m, n) if exact else _closed_form_cell_float(V, W, m, n)
                else:
                    val = _inside_out_cell_exact(V, W, m, n) if exact else _inside_out_cell_float(V, W, m, n)
                    if cross_check:
                        ref = _lp_cell(V, s, m, n, mode)
                        if (ref != val) if exact else abs(ref - val) > 1e-12:
                            raise ConstructionError(
                                f"inside-out cost {val} differs from the optimum {ref} at ({m}, {n})")
                V[m + 1, n + 1] = val
                V[n + 1, m + 1] = val
    return DistanceTable(N, mode, V, method, "d", s, time.perf_counter() - start)


def build_c_table(s: StepSchedule, N: int, mode=NumericMode.FLOAT) -> DistanceTable:
    """Table of ``c_mn`` from the product plans ``pi_i^m pi_j^n`` off the diagonal."""
    mode = NumericMode.parse(mode)
    if N < 0:
        raise DomainError("horizon must be >= 0")
    s.check_horizon(N)
    start = time.perf_counter()
    W = weight_matrix(s, N, mode)
    V = _empty(N, mode)
    for n in range(1, N + 1):
        if mode is NumericMode.FLOAT:
            M = V[: n + 1, : n + 1] * W[n, : n + 1][None, :]
            R = np.cumsum(M[:, ::-1], axis=1)[:, ::-1]
            col = np.einsum("mi,im->m", W[:n, :n], R[:n, 1 : n + 1])
        else:
            col = []
            for m in range(n):
                total = 0
                for i in range(m + 1):
                    inner = 0
                    for j in range(m + 1, n + 1):
                        inner += W[n, j] * V[i, j]
                    total += W[m, i] * inner
                col.append(total)
        for m in range(n):
            V[m + 1, n + 1] = col[m]
            V[n + 1, m + 1] = col[m]
    return DistanceTable(N, mode, V, "product", "c", s, time.perf_counter() - start)


# ---------------------------------------------------------------- property checks

@dataclass
class PropertyReport:
    name: str
    horizon: int
    worst_violation: Scalar = 0
    violations: List[tuple] = field(default_factory=list)
    checked: int = 0
    note: str = ""

    @property
    def passed(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "property": self.name,
            "horizon": self.horizon,
            "passed": self.passed,
            "checked": self.checked,
            "worst_violation": format_scalar(self.worst_violation),
            "violations": [list(v) for v in self.violations[:50]],
            "violation_count": len(self.violations),
            "note": self.note,
        }


def _tolerance(t: DistanceTable):
    return 0 if t.mode is NumericMode.EXACT else FLOAT_NOISE


def _collect(report: PropertyReport, excess: np.ndarray, mask: np.ndarray, tol, index) -> None:
    """Record every masked position where ``excess > tol``."""
    bad = mask & (excess > tol)
    report.checked += int(mask.sum())
    if bad.any():
        worst = max(excess[bad].tolist())
        if worst > report.worst_violation:
            report.worst_violation = worst
        report.violations.extend(index(tuple(int(x) for x in pos)) for pos in np.argwhere(bad))


def check_metric(t: DistanceTable) -> PropertyReport:
    """Triangle inequality over all triples and ``d_mn > 0`` for ``m != n``."""
    rep = PropertyReport("metric", t.N)
    V = t.values
    size = t.N + 2
    tol = _tolerance(t)
    full = np.ones((size, size), dtype=bool)
    for p in range(size):
        excess = V - (V[:, p][:, None] + V[p, :][None, :])
        _collect(rep, excess, full, tol, lambda pos, p=p: ("triangle", pos[0] - 1, p - 1, pos[1] - 1))
    # positivity off the diagonal, zero on it
    off = ~np.eye(size, dtype=bool)
    zero_bad = off & (V <= tol)
    rep.violations.extend(("zero", int(a) - 1, int(b) - 1) for a, b in np.argwhere(zero_bad))
    rep.violations.extend(("diagonal", k - 1, k - 1) for k in range(size) if V[k, k] != 0)
    return rep


def check_monotone(t: DistanceTable) -> PropertyReport:
    """``n -> d_mn`` non-increasing for ``n <= m`` and non-decreasing for ``n >= m``."""
    rep = PropertyReport("monotone", t.N)
    V = t.values
    size = t.N + 2
    tol = _tolerance(t)
    step = V[:, 1:] - V[:, :-1]  # step[a, b] = V[a, b+1] - V[a, b]
    rows = np.arange(size)[:, None]
    cols = np.arange(size - 1)[None, :]
    up = cols >= rows
    _collect(rep, -step, up, tol, lambda pos: ("increasing", pos[0] - 1, pos[1] - 1, pos[1]))
    _collect(rep, step, ~up, tol, lambda pos: ("decreasing", pos[0] - 1, pos[1] - 1, pos[1]))
    return rep


def check_four_point(t: DistanceTable) -> PropertyReport:
    """``d_il + d_kj <= d_ij + d_kl`` for ``0 <= i <= k <= j <= l <= N``, plus
    the adjacent form ``d_{m,n+1} + d_{m+1,n} <= d_mn + d_{m+1,n+1}``."""
    rep = PropertyReport("four_point", t.N)
    N = t.N
    D = t.values[1:, 1:]  # D[a, b] = d_ab for a, b >= 0
    tol = _tolerance(t)
    idx = np.arange(N + 1)
    for i in range(N + 1):
        for k in range(i, N + 1):
            # rows index j, columns index l, both restricted to >= k
            Di, Dk = D[i, k:], D[k, k:]
            excess = (Di[None, :] + Dk[:, None]) - (Di[:, None] + Dk[None, :])
            mask = idx[k:][None, :] >= idx[k:][:, None]
            _collect(rep, excess, mask, tol, lambda pos, i=i, k=k: ("quadruple", i, k, pos[0] + k, pos[1] + k))
    if N >= 1:
        excess = (D[:-1, 1:] + D[1:, :-1]) - (D[:-1, :-1] + D[1:, 1:])
        mm = idx[:-1, None]
        nn = idx[None, :-1]
        _collect(rep, excess, nn > mm, tol, lambda pos: ("adjacent", pos[0], pos[1]))
    return rep


def check_cd_gap(d: DistanceTable, c: DistanceTable, alpha) -> PropertyReport:
    """``0 <= c_mn - d_mn <= 4 m (1 - alpha)^2`` for ``0 <= m <= n <= N``."""
    s = d.schedule
    if s is not None and not s.constant:
        raise PreconditionError("gap bound needs a constant schedule")
    if alpha < Fraction(1, 2) or alpha >= 1:
        raise PreconditionError("gap bound needs 1/2 <= alpha < 1")
    N = min(d.N, c.N)
    rep = PropertyReport("cd_gap", N)
    tol = 0 if (d.mode is NumericMode.EXACT and c.mode is NumericMode.EXACT) else FLOAT_NOISE
    beta = d.mode.convert(1 - alpha) if d.mode is NumericMode.EXACT else 1.0 - float(alpha)
    for m in range(N + 1):
        bound = 4 * m * beta * beta
        for n in range(m, N + 1):
            gap = c.get(m, n) - d.get(m, n)
            rep.checked += 1
            if -gap > tol:
                rep.violations.append(("negative", m, n))
                rep.worst_violation = max(rep.worst_violation, -gap)
            if gap - bound > tol:
                rep.violations.append(("above_bound", m, n))
                rep.worst_violation = max(rep.worst_violation, gap - bound)
    return rep


def tables_agree(a: DistanceTable, b: DistanceTable, atol: float = 1e-12) -> Tuple[bool, Scalar]:
    """Entrywise agreement: exact equality for two exact tables, ``atol`` otherwise."""
    N = min(a.N, b.N)
    A = a.values[: N + 2, : N + 2]
    B = b.values[: N + 2, : N + 2]
    if a.mode is NumericMode.EXACT and b.mode is NumericMode.EXACT:
        diff = max(abs(x - y) for x, y in zip(A.ravel(), B.ravel()))
        return diff == 0, diff
    diff = float(np.max(np.abs(A.astype(float) - B.astype(float))))
    return diff <= atol, diff


# ---------------------------------------------------------------- CSV

def table_to_csv(t: DistanceTable, comment: Optional[str] = None) -> str:
    buf = io.StringIO()
    sched = t.schedule.literal() if t.schedule is not None else "unknown"
    buf.write(f"# kind={t.kind} schedule={sched} N={t.N} mode={t.mode.value} method={t.method}")
    if comment:
        buf.write(" " + comment)
    buf.write("\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "n", "value"])
    for m, n, v in t.cells():
        w.writerow([m, n, format_scalar(v)])
    return buf.getvalue()


def write_table_csv(t: DistanceTable, path, comment: Optional[str] = None) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(table_to_csv(t, comment))


def read_table_csv(path) -> DistanceTable:
    """Load a table written by :func:`write_table_csv`.

    The mode is exact when every value is an integer or ``p/q`` literal.
    """
    meta = {}
    rows = []
    with open(path, newline="") as fh:
        lines = []
        for line in fh:
            if line.startswith("#"):
                for tok in line[1:].split():
                    key, _, val = tok.partition("=")
                    meta[key] = val
            elif line.strip():
                lines.append(line)
    reader = csv.DictReader(lines)
    for row in reader:
        rows.append((int(row["m"]), int(row["n"]), row["value"].strip()))
    exact = all("." not in v and "e" not in v.lower() for _, _, v in rows)
    mode = NumericMode.EXACT if exact else NumericMode.FLOAT
    N = max(n for _, n, _ in rows)
    V = _empty(N, mode)
    for m, n, v in rows:
        x = parse_scalar(v, mode)
        V[m + 1, n + 1] = x
        V[n + 1, m + 1] = x
    sched = None
    if meta.get("schedule") not in (None, "unknown"):
        sched = StepSchedule.parse(meta["schedule"])
    return DistanceTable(N, mode, V, meta.get("method", "inside_out"), meta.get("kind", "d"), sched)
