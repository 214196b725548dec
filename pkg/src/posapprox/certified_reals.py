"""Exact input reals and certified interval evaluation.

Every real in the library is a :class:`CertifiedReal` that can be asked for a
rational enclosure of width at most ``2**-p``.  Comparisons are decided by
refining enclosures until they separate; if the precision cap is reached the
comparison raises :class:`PrecisionExhausted` instead of guessing.
"""

from __future__ import annotations

import contextlib
import contextvars
import enum
import functools
import math
import os
import re
from dataclasses import dataclass
from decimal import ROUND_CEILING, ROUND_FLOOR, Context, Decimal
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import gmpy2
import mpmath

from .errors import DescriptorError, IntervalTooWide, PrecisionExhausted

START_BITS = 128
DEFAULT_CAP = 65536
CAP_ENV_VAR = "POSAPPROX_PRECISION_CAP"

_cap: contextvars.ContextVar[int | None] = contextvars.ContextVar("precision_cap", default=None)


def precision_cap() -> int:
    cap = _cap.get()
    if cap is not None:
        return cap
    env = os.environ.get(CAP_ENV_VAR)
    return int(env) if env else DEFAULT_CAP


@contextlib.contextmanager
def precision_limit(bits: int):
    """Temporarily set the precision cap (in bits) for the current context."""
    if bits < START_BITS:
        raise ValueError(f"precision cap must be at least {START_BITS} bits")
    token = _cap.set(bits)
    try:
        yield
    finally:
        _cap.reset(token)


def precision_schedule(start: int = START_BITS) -> Iterator[int]:
    """Yield start, 2*start, ... up to and including the cap."""
    cap = precision_cap()
    p = min(start, cap)
    while True:
        yield p
        if p >= cap:
            return
        p = min(2 * p, cap)


# ---------------------------------------------------------------------------
# Rational intervals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RationalInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = Fraction(self.lo), Fraction(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x) -> RationalInterval:
        x = Fraction(x)
        return cls(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def is_exact(self) -> bool:
        return self.lo == self.hi

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def subset_of(self, other: RationalInterval) -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def intersect(self, other: RationalInterval) -> RationalInterval:
        return RationalInterval(max(self.lo, other.lo), min(self.hi, other.hi))

    def __add__(self, other):
        o = _as_interval(other)
        return RationalInterval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return RationalInterval(-self.hi, -self.lo)

    def __sub__(self, other):
        o = _as_interval(other)
        return RationalInterval(self.lo - o.hi, self.hi - o.lo)

    def __rsub__(self, other):
        return _as_interval(other) - self

    def __mul__(self, other):
        o = _as_interval(other)
        if o.is_exact():
            c = o.lo
            return RationalInterval(min(self.lo * c, self.hi * c), max(self.lo * c, self.hi * c))
        prods = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return RationalInterval(min(prods), max(prods))

    __rmul__ = __mul__

    def reciprocal(self) -> RationalInterval:
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("interval contains zero")
        return RationalInterval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        return self * _as_interval(other).reciprocal()

    def __rtruediv__(self, other):
        return _as_interval(other) * self.reciprocal()

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RationalInterval(Fraction(0), max(-self.lo, self.hi))

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers")
        if n % 2 == 1:
            return RationalInterval(self.lo**n, self.hi**n)
        a = abs(self)
        return RationalInterval(a.lo**n, a.hi**n)

    def __repr__(self):
        return f"[{float(self.lo):.17g}, {float(self.hi):.17g}]"


def _as_interval(x) -> RationalInterval:
    if isinstance(x, RationalInterval):
        return x
    return RationalInterval.point(x)


def fraction_to_decimal(x: Fraction, digits: int = 30, *, round_up: bool = False) -> str:
    """Decimal string for ``x`` rounded toward -inf (or +inf) at ``digits`` significant digits."""
    ctx = Context(prec=digits, rounding=ROUND_CEILING if round_up else ROUND_FLOOR)
    x = Fraction(x)
    d = ctx.divide(Decimal(x.numerator), Decimal(x.denominator))
    return format(d, "f") if abs(d.adjusted()) < 25 else str(d)


# ---------------------------------------------------------------------------
# Certified reals
# ---------------------------------------------------------------------------


def _poly_sign_at(coeffs: Sequence[int], x: Fraction) -> int:
    """Exact sign of ``sum c_i x^i`` at a rational point."""
    n, d = x.numerator, x.denominator
    deg = len(coeffs) - 1
    # homogeneous Horner: value * d^deg = sum c_i n^i d^(deg-i)
    acc = coeffs[deg]
    dpow = 1
    for i in range(deg - 1, -1, -1):
        dpow *= d
        acc = acc * n + coeffs[i] * dpow
    return (acc > 0) - (acc < 0)


class Kind(enum.Enum):
    RATIONAL = "rat"
    ALGEBRAIC = "alg"
    DECIMAL = "dec"


@dataclass(frozen=True)
class CertifiedReal:
    """A real number given by an exact descriptor.

    Use the constructors :func:`rational`, :func:`algebraic`,
    :func:`decimal_literal` or :func:`parse_descriptor` instead of building
    instances directly.
    """

    kind: Kind
    value: Fraction | None = None  # rational value or decimal centre
    coeffs: tuple[int, ...] = ()
    lo: Fraction | None = None
    hi: Fraction | None = None
    error: Fraction | None = None  # decimal literals only
    text: str = ""  # original decimal digits
    err_exp: int = 0

    def enclosure(self, precision_bits: int) -> RationalInterval:
        return enclosure(self, precision_bits)

    def describe(self) -> str:
        if self.kind is Kind.RATIONAL:
            v = self.value
            return f"rat:{v.numerator}/{v.denominator}"
        if self.kind is Kind.ALGEBRAIC:
            cs = ",".join(str(c) for c in self.coeffs)
            return f"alg:{cs}@[{_frac_str(self.lo)},{_frac_str(self.hi)}]"
        return f"dec:{self.text}e{self.err_exp}"

    def float_approx(self) -> tuple[float, float]:
        """Return ``(f, err)`` with ``|f - x| <= err``; for cheap screening only."""
        if self.kind is Kind.DECIMAL:
            iv = RationalInterval(self.value - self.error, self.value + self.error)
        else:
            iv = enclosure(self, 80)
        f = float(iv.mid)
        err = float(iv.width) + abs(f) * 2.0**-52 + 2.0**-1000
        return f, err

    def __str__(self):
        return self.describe()


def _frac_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def rational(p: int, q: int = 1) -> CertifiedReal:
    return CertifiedReal(Kind.RATIONAL, value=Fraction(p, q))


def algebraic(coeffs: Sequence[int], lo, hi) -> CertifiedReal:
    """Real root of ``c0 + c1 x + ... + cn x^n`` isolated in ``[lo, hi]``.

    The interval must contain exactly one real root, strictly inside.
    """
    coeffs = tuple(int(c) for c in coeffs)
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
    lo, hi = Fraction(lo), Fraction(hi)
    if len(coeffs) < 2:
        raise DescriptorError("polynomial must have degree >= 1")
    if not lo < hi:
        raise DescriptorError("isolating interval must satisfy lo < hi")
    s_lo, s_hi = _poly_sign_at(coeffs, lo), _poly_sign_at(coeffs, hi)
    if s_lo == 0 or s_hi == 0:
        raise DescriptorError("root lies on an endpoint of the isolating interval")
    if s_lo == s_hi:
        raise DescriptorError("no sign change on the isolating interval")
    if _count_roots(coeffs, lo, hi) != 1:
        raise DescriptorError("isolating interval contains more than one root")
    return CertifiedReal(Kind.ALGEBRAIC, coeffs=coeffs, lo=lo, hi=hi)


@functools.lru_cache(maxsize=256)
def _count_roots(coeffs: tuple[int, ...], lo: Fraction, hi: Fraction) -> int:
    import sympy

    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed(coeffs)), x)
    return int(poly.count_roots(sympy.Rational(lo.numerator, lo.denominator),
                                sympy.Rational(hi.numerator, hi.denominator)))


def decimal_literal(digits: str, err_exp: int) -> CertifiedReal:
    """Decimal value known only up to ``10**err_exp``."""
    try:
        value = Fraction(Decimal(digits))
    except Exception as exc:
        raise DescriptorError(f"bad decimal digits {digits!r}") from exc
    return CertifiedReal(Kind.DECIMAL, value=value, error=Fraction(10) ** err_exp, text=digits,
                         err_exp=err_exp)


_RAT_RE = re.compile(r"^rat:(-?\d+)(?:/(\d+))?$")
_ALG_RE = re.compile(r"^alg:(-?\d+(?:,-?\d+)*)@\[(-?\d+(?:/\d+)?),(-?\d+(?:/\d+)?)\]$")
_DEC_RE = re.compile(r"^dec:(-?\d+(?:\.\d*)?)e(-?\d+)$")


def parse_descriptor(text: str) -> CertifiedReal:
    """Parse ``rat:p/q``, ``alg:c0,...,cn@[lo,hi]`` or ``dec:<digits>e<err_exp>``."""
    s = text.strip().replace(" ", "")
    if m := _RAT_RE.match(s):
        q = int(m.group(2)) if m.group(2) else 1
        if q == 0:
            raise DescriptorError("zero denominator")
        return rational(int(m.group(1)), q)
    if m := _ALG_RE.match(s):
        coeffs = [int(c) for c in m.group(1).split(",")]
        return algebraic(coeffs, Fraction(m.group(2)), Fraction(m.group(3)))
    if m := _DEC_RE.match(s):
        return decimal_literal(m.group(1), int(m.group(2)))
    raise DescriptorError(f"cannot parse real descriptor {text!r}")


def enclosure(x: CertifiedReal, precision_bits: int) -> RationalInterval:
    """Interval of width <= 2**-precision_bits containing ``x``."""
    if precision_bits < 1:
        raise ValueError("precision_bits must be positive")
    if precision_bits > precision_cap():
        raise PrecisionExhausted(f"requested {precision_bits} bits exceeds cap {precision_cap()}")
    return _raw_enclosure(x, precision_bits)


def _raw_enclosure(x: CertifiedReal, precision_bits: int) -> RationalInterval:
    # no cap check: internal guard bits may exceed the cap slightly
    if x.kind is Kind.RATIONAL:
        return RationalInterval.point(x.value)
    if x.kind is Kind.DECIMAL:
        if 2 * x.error > Fraction(1, 2**precision_bits):
            raise PrecisionExhausted(
                f"decimal literal known to +-{float(x.error):.3g}, cannot meet 2^-{precision_bits}")
        return RationalInterval(x.value - x.error, x.value + x.error)
    return _algebraic_enclosure(x.coeffs, x.lo, x.hi, precision_bits)


def _mp_poly(coeffs, x):
    acc = mpmath.mpf(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _mp_dpoly(coeffs, x):
    acc = mpmath.mpf(0)
    for i in range(len(coeffs) - 1, 0, -1):
        acc = acc * x + i * coeffs[i]
    return acc


@functools.lru_cache(maxsize=4096)
def _algebraic_enclosure(coeffs: tuple[int, ...], lo: Fraction, hi: Fraction, p: int) -> RationalInterval:
    s_lo = _poly_sign_at(coeffs, lo)
    if p <= 48:
        return _bisect(coeffs, lo, hi, s_lo, p)
    # Newton guess from the half-precision enclosure, then an exact sign check
    base = _algebraic_enclosure(coeffs, lo, hi, p // 2)
    a, b = base.lo, base.hi
    if a == b:
        return base
    with mpmath.workprec(p + 64):
        x = (mpmath.mpf(a.numerator) / a.denominator + mpmath.mpf(b.numerator) / b.denominator) / 2
        for _ in range(100):
            d = _mp_dpoly(coeffs, x)
            if d == 0:
                break
            step = _mp_poly(coeffs, x) / d
            x -= step
            if abs(step) < mpmath.ldexp(1, -p - 8):
                break
        k = int(mpmath.floor(mpmath.ldexp(x, p)))
    for kk in (k, k - 1, k + 1):
        iv = _verify_cell(coeffs, a, b, kk, p)
        if iv is not None:
            return iv
    return _bisect(coeffs, a, b, _poly_sign_at(coeffs, a), p)


def _verify_cell(coeffs, a: Fraction, b: Fraction, k: int, p: int) -> RationalInterval | None:
    c_lo = max(a, Fraction(k, 1 << p))
    c_hi = min(b, Fraction(k + 1, 1 << p))
    if c_lo > c_hi:
        return None
    sl, sh = _poly_sign_at(coeffs, c_lo), _poly_sign_at(coeffs, c_hi)
    if sl == 0:
        return RationalInterval.point(c_lo)
    if sh == 0:
        return RationalInterval.point(c_hi)
    if sl != sh:
        return RationalInterval(c_lo, c_hi)
    return None


def _bisect(coeffs, lo: Fraction, hi: Fraction, s_lo: int, p: int) -> RationalInterval:
    target = Fraction(1, 1 << p)
    while hi - lo > target:
        mid = (lo + hi) / 2
        s = _poly_sign_at(coeffs, mid)
        if s == 0:
            return RationalInterval.point(mid)
        if s == s_lo:
            lo = mid
        else:
            hi = mid
    return RationalInterval(lo, hi)


# ---------------------------------------------------------------------------
# Certified operations
# ---------------------------------------------------------------------------


def dist_nearest_int(v: RationalInterval) -> RationalInterval:
    """Enclosure of ``||xi||`` (distance to the nearest integer) for xi in ``v``."""
    if v.width >= Fraction(1, 4):
        raise IntervalTooWide(f"interval of width {float(v.width):.3g} is too wide; refine first")
    k_lo = math.floor(v.lo + Fraction(1, 2))
    k_hi = math.floor(v.hi + Fraction(1, 2))
    if k_lo == k_hi:
        d_lo, d_hi = abs(v.lo - k_lo), abs(v.hi - k_lo)
        if v.lo <= k_lo <= v.hi:
            return RationalInterval(Fraction(0), max(d_lo, d_hi))
        return RationalInterval(min(d_lo, d_hi), max(d_lo, d_hi))
    d_lo = v.lo - math.floor(v.lo)
    d_lo = min(d_lo, 1 - d_lo)
    d_hi = v.hi - math.floor(v.hi)
    d_hi = min(d_hi, 1 - d_hi)
    return RationalInterval(min(d_lo, d_hi), Fraction(1, 2))


def eval_linear_form(m0: int, m1: int, m2: int, a1: CertifiedReal, a2: CertifiedReal,
                     precision_bits: int) -> RationalInterval:
    """Enclosure of ``m0 + m1*a1 + m2*a2`` with width <= 2**-precision_bits."""
    if precision_bits > precision_cap():
        raise PrecisionExhausted(f"requested {precision_bits} bits exceeds cap {precision_cap()}")
    acc = RationalInterval.point(m0)
    for m, a in ((m1, a1), (m2, a2)):
        if m:
            q = precision_bits + 2 + abs(m).bit_length()
            acc = acc + _raw_enclosure(a, q) * m
    return acc


def form_distance(m1: int, m2: int, a1: CertifiedReal, a2: CertifiedReal) -> Callable[[int], RationalInterval]:
    """Refinable enclosure source for ``||m1*a1 + m2*a2||``."""
    return lambda p: dist_nearest_int(eval_linear_form(0, m1, m2, a1, a2, p))


class Ordering(enum.Enum):
    LESS = "LESS"
    GREATER = "GREATER"


def certified_compare(v: Callable[[int], RationalInterval], threshold=0) -> Ordering:
    """Decide ``value < threshold`` by refining the enclosure source ``v``.

    ``v`` maps a precision in bits to an enclosure; it is re-queried with a
    doubling schedule until the enclosure lies strictly on one side.
    """
    t = Fraction(threshold)
    last = None
    for p in precision_schedule():
        iv = v(p)
        if iv.hi < t:
            return Ordering.LESS
        if iv.lo > t:
            return Ordering.GREATER
        if iv.is_exact():
            # exact equality: refinement cannot help
            break
        last = iv
    raise PrecisionExhausted(
        f"could not separate value from {t} (last enclosure {last}); inputs may be rationally dependent")


def certified_less(v: Callable[[int], RationalInterval], threshold=0) -> bool:
    return certified_compare(v, threshold) is Ordering.LESS


def difference(a: Callable[[int], RationalInterval], b: Callable[[int], RationalInterval]):
    return lambda p: a(p) - b(p)


# ---------------------------------------------------------------------------
# Real powers
# ---------------------------------------------------------------------------


def _to_mpfr(x: Fraction):
    # rounded according to the active gmpy2 context
    return gmpy2.mpfr(gmpy2.mpq(x.numerator, x.denominator))


def _mpfr_to_fraction(x) -> Fraction:
    n, d = x.as_integer_ratio()
    return Fraction(int(n), int(d))


def rpow(base, exponent, precision_bits: int) -> RationalInterval:
    """Certified enclosure of ``base ** exponent`` for a positive base interval.

    Both arguments may be rationals or :class:`RationalInterval`.  Integer
    exponents given exactly are evaluated in exact arithmetic.
    """
    base, exponent = _as_interval(base), _as_interval(exponent)
    if base.lo <= 0:
        raise ValueError("rpow needs a strictly positive base")
    if exponent.is_exact() and exponent.lo.denominator == 1:
        n = int(exponent.lo)
        if n >= 0:
            return RationalInterval(base.lo**n, base.hi**n)
        return RationalInterval(base.hi**n, base.lo**n)
    prec = precision_bits + 32
    down = gmpy2.context(gmpy2.get_context(), precision=prec, round=gmpy2.RoundDown)
    up = gmpy2.context(gmpy2.get_context(), precision=prec, round=gmpy2.RoundUp)
    with down:
        log_lo = gmpy2.log(_to_mpfr(base.lo))
        e_lo = _to_mpfr(exponent.lo)
    with up:
        log_hi = gmpy2.log(_to_mpfr(base.hi))
        e_hi = _to_mpfr(exponent.hi)
    # exponent endpoints: outward-rounded [e_lo, e_hi]; log endpoints: [log_lo, log_hi]
    with down:
        t_lo = min(e_lo * log_lo, e_lo * log_hi, e_hi * log_lo, e_hi * log_hi)
        r_lo = gmpy2.exp(t_lo)
    with up:
        t_hi = max(e_lo * log_lo, e_lo * log_hi, e_hi * log_lo, e_hi * log_hi)
        r_hi = gmpy2.exp(t_hi)
    return RationalInterval(_mpfr_to_fraction(r_lo), _mpfr_to_fraction(r_hi))
