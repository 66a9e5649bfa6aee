"""Numeric backends: exact rationals for verification, tolerant floats for scale.

All LP data is stored exactly as ``Fraction`` values.  A solver run picks one
of two numeric modes:

* ``RATIONAL`` -- every comparison is exact; zero means zero.
* ``FLOAT`` -- data is materialized as float64 and comparisons use
  scale-aware tolerances derived from a single base tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction

RATIONAL = "rational"
FLOAT = "float"

NUMERIC_MODES = (RATIONAL, FLOAT)


def as_fraction(value) -> Fraction:
    """Convert ints, Fractions, decimal strings, 'p/q' strings or floats to Fraction.

    Decimal text (including exponents) converts to the exact rational of the
    printed decimal, so parsed inputs are bit-reproducible.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # exact rational of the shortest decimal repr, not of the binary float
        return Fraction(Decimal(repr(value)))
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, _, den = text.partition("/")
            return Fraction(int(num), int(den))
        try:
            return Fraction(Decimal(text))
        except InvalidOperation as exc:
            raise ValueError(f"not a number: {value!r}") from exc
    raise TypeError(f"cannot convert {type(value).__name__} to Fraction")


def fraction_str(value) -> str:
    """Render a scalar as 'p/q', a plain integer, or a float repr."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def decimal_str(value: Fraction) -> str:
    """Exact decimal text for a Fraction whose denominator is 2^a * 5^b.

    Falls back to the float repr (lossy) for non-terminating rationals.
    """
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return repr(float(value))
    shift = max(twos, fives)
    scaled = value.numerator * (2 ** (shift - twos)) * (5 ** (shift - fives))
    text = str(abs(scaled)).rjust(shift + 1, "0")
    sign = "-" if scaled < 0 else ""
    if shift == 0:
        return sign + text
    return f"{sign}{text[:-shift]}.{text[-shift:]}"


@dataclass(frozen=True)
class Tolerances:
    """Scale-aware thresholds used by float-mode comparisons.

    ``x_zero`` decides degeneracy of primal values (relative to max |b|),
    ``c_zero`` decides negativity of reduced costs (relative to max |c|), and
    ``pivot`` guards divisions by tableau entries.
    """

    base: float = 1e-9
    x_zero: float = 1e-9
    c_zero: float = 1e-9
    pivot: float = 1e-9

    @classmethod
    def for_lp(cls, b, c, base: float = 1e-9) -> "Tolerances":
        b_scale = max((abs(float(v)) for v in b), default=0.0)
        c_scale = max((abs(float(v)) for v in c), default=0.0)
        return cls(
            base=base,
            x_zero=base * (1.0 + b_scale),
            c_zero=base * (1.0 + c_scale),
            pivot=base,
        )


def is_zero(value, numeric: str, tol: float = 0.0) -> bool:
    if numeric == RATIONAL:
        return value == 0
    return abs(value) <= tol
