"""Step sequences and the averaging weights they induce.

With the convention that the zeroth step equals 1, iterate ``n`` of the KM
scheme is the average of the images with weights

    pi_i^n = alpha_i * prod_{k=i+1}^{n} (1 - alpha_k),   i = 0..n,

which sum to one.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, HorizonError, ParseError
from .numeric import NumericMode, Scalar, parse_scalar


def _check_step(a) -> None:
    if not 0 < a < 1:
        raise DomainError(f"step {a} outside the open interval (0, 1)")


@dataclass(frozen=True)
class StepSchedule:
    """Either a constant step ``alpha`` or an explicit finite list ``alpha_1..alpha_H``.

    ``alpha(0)`` is always 1.  Values are stored as given (Fraction or float)
    and converted to the requested mode on use.
    """

    steps: tuple
    constant: bool

    @classmethod
    def const(cls, alpha) -> "StepSchedule":
        if isinstance(alpha, str):
            alpha = parse_scalar(alpha, NumericMode.EXACT)
        _check_step(alpha)
        return cls((alpha,), True)

    @classmethod
    def explicit(cls, alphas: Sequence) -> "StepSchedule":
        vals = tuple(parse_scalar(a, NumericMode.EXACT) if isinstance(a, str) else a for a in alphas)
        if not vals:
            raise DomainError("explicit schedule needs at least one step")
        for a in vals:
            _check_step(a)
        return cls(vals, False)

    @classmethod
    def parse(cls, text: str) -> "StepSchedule":
        """Parse the literal forms ``const:0.5`` and ``list:0.5,0.6,0.7``."""
        kind, sep, body = str(text).partition(":")
        if not sep:
            raise ParseError(f"schedule literal needs a 'const:' or 'list:' prefix: {text!r}")
        kind = kind.strip().lower()
        try:
            if kind == "const":
                return cls.const(parse_scalar(body, NumericMode.EXACT))
            if kind == "list":
                return cls.explicit([parse_scalar(t, NumericMode.EXACT) for t in body.split(",")])
        except DomainError as exc:
            raise ParseError(str(exc)) from exc
        raise ParseError(f"unknown schedule kind {kind!r}")

    @property
    def horizon(self) -> Optional[int]:
        """Largest valid step index, ``None`` for constant schedules."""
        return None if self.constant else len(self.steps)

    def check_horizon(self, n: int) -> None:
        if n < 0:
            raise DomainError(f"negative index {n}")
        if not self.constant and n > len(self.steps):
            raise HorizonError(f"index {n} beyond schedule horizon {len(self.steps)}")

    def alpha(self, k: int, mode: NumericMode | str = NumericMode.EXACT) -> Scalar:
        mode = NumericMode.parse(mode)
        if k == 0:
            return mode.one
        self.check_horizon(k)
        return mode.convert(self.steps[0] if self.constant else self.steps[k - 1])

    def min_step(self, n: Optional[int] = None):
        """Smallest ``alpha_k`` for ``1 <= k <= n`` (whole schedule if ``n`` is None)."""
        if self.constant:
            return self.steps[0]
        return min(self.steps if n is None else self.steps[:max(n, 1)])

    def literal(self) -> str:
        from .numeric import format_scalar

        if self.constant:
            return f"const:{format_scalar(self.steps[0])}"
        return "list:" + ",".join(format_scalar(a) for a in self.steps)

    def __str__(self) -> str:
        return self.literal()


def extend_weights(w: np.ndarray, alpha_next) -> np.ndarray:
    """Weights at ``n + 1`` from the weights at ``n`` and the next step."""
    _check_step(alpha_next)
    out = np.empty(len(w) + 1, dtype=w.dtype)
    out[:-1] = w * (1 - alpha_next)
    out[-1] = alpha_next
    return out


def weights(s: StepSchedule, n: int, mode: NumericMode | str = NumericMode.EXACT) -> np.ndarray:
    """The probability vector ``(pi_0^n, ..., pi_n^n)``.

    Exact mode returns an object array of Fractions whose sum is exactly 1.

    >>> weights(StepSchedule.const(Fraction(1, 2)), 2).tolist()
    [Fraction(1, 4), Fraction(1, 4), Fraction(1, 2)]
    """
    mode = NumericMode.parse(mode)
    s.check_horizon(n)
    w = mode.array(1, 1)
    for k in range(1, n + 1):
        w = extend_weights(w, s.alpha(k, mode))
    return w


def weight_matrix(s: StepSchedule, N: int, mode: NumericMode | str = NumericMode.EXACT) -> np.ndarray:
    """Lower-triangular array ``W[n, i] = pi_i^n`` for ``0 <= i <= n <= N``."""
    mode = NumericMode.parse(mode)
    s.check_horizon(N)
    W = mode.array((N + 1, N + 1), 0)
    W[0, 0] = mode.one
    for n in range(1, N + 1):
        W[n, : n + 1] = extend_weights(W[n - 1, :n], s.alpha(n, mode))
    return W
