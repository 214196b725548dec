"""Exact arithmetic in Q(tau), tau the golden ratio (root of x^2 - x - 1).

All exponents that appear in the witness bounds and in g, C are elements of
this field, so they are reduced exactly before any numerical evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .certified_reals import RationalInterval, algebraic, enclosure, precision_cap

TAU_REAL = algebraic((-1, -1, 1), 1, 2)


def tau_enclosure(precision_bits: int) -> RationalInterval:
    return enclosure(TAU_REAL, min(precision_bits, precision_cap()))


@dataclass(frozen=True)
class GoldenNumber:
    """``a + b*tau`` with rational a, b."""

    a: Fraction
    b: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    @classmethod
    def coerce(cls, x) -> GoldenNumber:
        return x if isinstance(x, GoldenNumber) else cls(Fraction(x))

    def is_rational(self) -> bool:
        return self.b == 0

    def __add__(self, other):
        o = GoldenNumber.coerce(other)
        return GoldenNumber(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return GoldenNumber(-self.a, -self.b)

    def __sub__(self, other):
        return self + (-GoldenNumber.coerce(other))

    def __rsub__(self, other):
        return GoldenNumber.coerce(other) - self

    def __mul__(self, other):
        o = GoldenNumber.coerce(other)
        # tau^2 = tau + 1
        bb = self.b * o.b
        return GoldenNumber(self.a * o.a + bb, self.a * o.b + self.b * o.a + bb)

    __rmul__ = __mul__

    def conjugate(self) -> GoldenNumber:
        # tau -> 1 - tau
        return GoldenNumber(self.a + self.b, -self.b)

    def norm(self) -> Fraction:
        return self.a * self.a + self.a * self.b - self.b * self.b

    def __truediv__(self, other):
        o = GoldenNumber.coerce(other)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(tau)")
        c = self * o.conjugate()
        return GoldenNumber(c.a / n, c.b / n)

    def __rtruediv__(self, other):
        return GoldenNumber.coerce(other) / self

    def __eq__(self, other):
        try:
            o = GoldenNumber.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b))

    def enclosure(self, precision_bits: int) -> RationalInterval:
        """Enclosure of width <= 2**-precision_bits."""
        if self.b == 0:
            return RationalInterval.point(self.a)
        extra = abs(self.b.numerator).bit_length() + 1
        return tau_enclosure(precision_bits + extra) * self.b + self.a

    def __float__(self):
        return float(self.enclosure(64).mid)

    def __repr__(self):
        return f"GoldenNumber({self.a} + {self.b}*tau)"


TAU = GoldenNumber(0, 1)
ONE = GoldenNumber(1)
