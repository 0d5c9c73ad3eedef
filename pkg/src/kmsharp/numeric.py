"""Scalars in two arithmetic modes.

Exact mode carries every quantity as a :class:`fractions.Fraction`; float mode
uses IEEE-754 binary64.  A computation fixes one mode up front and every value
of a table shares it.
"""

from __future__ import annotations

import enum
import re
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import ParseError

Scalar = Union[Fraction, float]

_DECIMAL = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_RATIO = re.compile(r"^[+-]?\d+/\d+$")

# relative tolerance for float-mode equality tests
FLOAT_RTOL = 1e-12
# absolute slack below which float-mode property violations count as rounding noise
FLOAT_NOISE = 1e-12


class NumericMode(enum.Enum):
    EXACT = "exact"
    FLOAT = "float"

    @classmethod
    def parse(cls, value: "NumericMode | str") -> "NumericMode":
        if isinstance(value, NumericMode):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParseError(f"unknown numeric mode {value!r}") from None

    @property
    def dtype(self):
        return object if self is NumericMode.EXACT else np.float64

    def convert(self, x) -> Scalar:
        """Coerce ``x`` into this mode.

        Floats entering exact mode go through their shortest decimal repr, so
        ``0.6`` becomes ``3/5`` rather than the binary expansion of 0.6.
        """
        if self is NumericMode.FLOAT:
            return float(x)
        if isinstance(x, Fraction):
            return x
        if isinstance(x, (int, np.integer)):
            return Fraction(int(x))
        if isinstance(x, (float, np.floating)):
            return Fraction(repr(float(x)))
        if isinstance(x, str):
            return parse_scalar(x, self)
        return Fraction(x)

    @property
    def zero(self) -> Scalar:
        return Fraction(0) if self is NumericMode.EXACT else 0.0

    @property
    def one(self) -> Scalar:
        return Fraction(1) if self is NumericMode.EXACT else 1.0

    def array(self, shape, fill=0):
        """Array of the given shape holding ``fill`` converted to this mode."""
        if self is NumericMode.FLOAT:
            return np.full(shape, float(fill))
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(fill))
        return out


def mode_of(x) -> NumericMode:
    """Mode a single value belongs to."""
    return NumericMode.EXACT if isinstance(x, (Fraction, int)) else NumericMode.FLOAT


def to_float(x: Scalar) -> float:
    """Nearest binary64 to ``x`` (round half to even).

    ``float(Fraction)`` divides the integers with correct rounding, so no
    intermediate error is introduced.
    """
    return float(x)


def parse_scalar(text: str, mode: NumericMode | str = NumericMode.EXACT) -> Scalar:
    """Parse a finite decimal (``"0.48121"``) or a ratio (``"46302245/67108864"``)."""
    mode = NumericMode.parse(mode)
    s = str(text).strip()
    if _RATIO.match(s):
        num, den = s.split("/")
        if int(den) == 0:
            raise ParseError(f"zero denominator in {text!r}")
        value = Fraction(int(num), int(den))
    elif _DECIMAL.match(s):
        if mode is NumericMode.FLOAT:
            return float(s)
        value = Fraction(s)
    else:
        raise ParseError(f"not a decimal or p/q literal: {text!r}")
    return value if mode is NumericMode.EXACT else float(value)


def format_scalar(x: Scalar) -> str:
    """Text form used in CSV output: ``p/q`` for exact values, ``repr`` for floats."""
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def is_close(a: Scalar, b: Scalar, rtol: float = FLOAT_RTOL, atol: float = 0.0) -> bool:
    """Exact equality for two Fractions, relative-tolerance comparison otherwise."""
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    a, b = float(a), float(b)
    return abs(a - b) <= max(atol, rtol * max(abs(a), abs(b)))
