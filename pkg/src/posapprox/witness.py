"""Positive integer witnesses (x1, x2) near consecutive best approximations.

The searches here are constructive counterparts of existence arguments:

* ``lemma1_search`` finds integer points of the parallelepiped
  ``|a1 x1 + a2 x2 + y| <= zeta_nu, |x1 - x2| <= M_{nu+1}, |x1 + x2| <= R_nu``
  by LLL-reducing the lattice that maps it onto the unit cube.
* ``lemma2_search`` finds points of the planar lattice spanned by two
  consecutive best approximations inside a disc in the positive quadrant.

The corollaries and ``theorem3_dispatch`` pick the applicable search and
attach a :class:`BoundCertificate` whose every inequality is decided by
certified interval comparison.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .best_approx import BestApproximation, BestApproxSequence, d_nu, det_condition, zeta_source
from .certified_reals import (
    START_BITS,
    CertifiedReal,
    Ordering,
    RationalInterval,
    certified_compare,
    difference,
    enclosure,
    form_distance,
    fraction_to_decimal,
    precision_schedule,
    rpow,
)
from .errors import (
    DetConditionFailed,
    Inapplicable,
    PrecisionExhausted,
    PreconditionNotCertified,
    SearchFailed,
)
from .golden import TAU, GoldenNumber
from .lattice import lattice_points_in_disc, short_vectors

Source = Callable[[int], RationalInterval]


class WitnessSource(enum.Enum):
    LEMMA1 = "LEMMA1"
    COR1 = "COR1"
    COR2 = "COR2"
    LEMMA2 = "LEMMA2"
    COR3 = "COR3"


class BoundKind(enum.Enum):
    CASE_I = "I"
    CASE_II = "II"
    LEMMA1 = "LEMMA1"
    LEMMA2 = "LEMMA2"


# ---------------------------------------------------------------------------
# Certified checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    """One certified inequality ``lhs <= rhs`` (or ``<``), stored as ``lhs - rhs``."""

    name: str
    source: Source = field(repr=False, compare=False)
    strict: bool = False
    bits: int = 0
    holds: bool = False

    def at(self, precision_bits: int) -> bool:
        """Re-decide at a fixed precision without refinement."""
        iv = self.source(precision_bits)
        return iv.hi < 0 if self.strict else iv.hi <= 0


def decide(name: str, source: Source, strict: bool = False) -> Check:
    """Decide ``source <= 0`` (``< 0`` if strict) by refinement."""
    last = None
    for p in precision_schedule():
        iv = source(p)
        if iv.hi < 0 or (not strict and iv.hi <= 0):
            return Check(name, source, strict, p, True)
        if iv.lo > 0 or (strict and iv.lo >= 0 and iv.is_exact()):
            return Check(name, source, strict, p, False)
        if iv.is_exact():
            break
        last = iv
    raise PrecisionExhausted(f"cannot decide {name} (last enclosure {last})")


def exact_check(name: str, lhs, rhs, strict: bool = False) -> Check:
    diff = Fraction(lhs) - Fraction(rhs)
    return decide(name, lambda p: RationalInterval.point(diff), strict)


@dataclass(frozen=True)
class BoundCertificate:
    bound_kind: BoundKind
    rhs: Fraction  # rational lower bound of the value bound's right-hand side
    holds: bool
    checks: tuple[Check, ...] = ()
    chain: tuple[Check, ...] = ()  # proof-chain inequalities, informational

    @property
    def bits(self) -> int:
        return max((c.bits for c in self.checks), default=START_BITS)

    def revalidate(self, precision_bits: int | None = None) -> bool:
        """Re-decide every check at a fixed precision (default: twice the certifying one)."""
        p = precision_bits or 2 * self.bits
        return all(c.at(p) == c.holds for c in self.checks)


def _certificate(kind: BoundKind, checks: list[Check], value_bound: Check, rhs_src: Source,
                 chain: list[Check] = ()) -> BoundCertificate:
    rhs = rhs_src(value_bound.bits).lo
    return BoundCertificate(kind, rhs, all(c.holds for c in checks), tuple(checks), tuple(chain))


@dataclass(frozen=True)
class WitnessPoint:
    x1: int
    x2: int
    value: RationalInterval  # enclosure of ||a1 x1 + a2 x2||
    source: WitnessSource
    nu: int
    certificate: BoundCertificate
    coefficients: tuple[int, int] | None = None  # (lambda_nu, lambda_{nu+1}) for planar-lattice points
    method: str = "lemma1-body"

    @property
    def height(self) -> int:
        return max(self.x1, self.x2)

    def to_json(self, case: str | None = None, dispatch_nu: int | None = None) -> dict:
        kind = self.certificate.bound_kind
        return {
            "nu": self.nu if dispatch_nu is None else dispatch_nu,
            "case": case or kind.value,
            "source": self.source.value,
            "x": [self.x1, self.x2],
            "value_hi": fraction_to_decimal(self.value.hi, 30, round_up=True),
            "bound_rhs": fraction_to_decimal(self.certificate.rhs, 30),
            "holds": self.certificate.holds,
            "method": self.method,
        }


# ---------------------------------------------------------------------------
# Context
# ---------------------------------------------------------------------------


def _pow_source(base: int, exponent: GoldenNumber) -> Source:
    return lambda p: rpow(Fraction(base), exponent.enclosure(p), p)


def _mul(*sources: Source) -> Source:
    def src(p):
        acc = sources[0](p)
        for s in sources[1:]:
            acc = acc * s(p)
        return acc
    return src


def _const(x) -> Source:
    iv = RationalInterval.point(x)
    return lambda p: iv


@dataclass(frozen=True)
class NuContext:
    """Consecutive best approximations around index ``nu`` plus the input reals."""

    alpha1: CertifiedReal
    alpha2: CertifiedReal
    nu: int
    window: tuple[tuple[int, BestApproximation], ...]

    @classmethod
    def from_sequence(cls, seq: BestApproxSequence, nu: int, before: int = 1, after: int = 3) -> NuContext:
        lo, hi = max(1, nu - before), min(len(seq), nu + after)
        if not 1 <= nu <= len(seq):
            raise IndexError(f"nu={nu} outside the sequence")
        return cls(seq.alpha1, seq.alpha2, nu, tuple((j, seq[j]) for j in range(lo, hi + 1)))

    def shifted(self, k: int) -> NuContext:
        return NuContext(self.alpha1, self.alpha2, self.nu + k, self.window)

    def has(self, j: int) -> bool:
        return any(i == j for i, _ in self.window)

    def bm(self, j: int) -> BestApproximation:
        for i, b in self.window:
            if i == j:
                return b
        raise PreconditionNotCertified(f"best approximation {j} not available around nu={self.nu}")

    def M(self, j: int) -> int:
        return self.bm(j).M

    def zeta(self, j: int) -> Source:
        return zeta_source(self.bm(j), self.alpha1, self.alpha2)

    def value(self, x1: int, x2: int) -> Source:
        return form_distance(x1, x2, self.alpha1, self.alpha2)

    # derived quantities ----------------------------------------------------

    def r_source(self) -> Source:
        z, Mn = self.zeta(self.nu), self.M(self.nu + 1)
        return lambda p: Fraction(2, Mn) / z(p)

    def a_source(self) -> Source:
        """A_nu = M_nu^(1/tau) / 120, with 1/tau = tau - 1."""
        return _mul(_pow_source(self.M(self.nu), TAU - 1), _const(Fraction(1, 120)))

    def gap_threshold(self) -> Source:
        """A_nu * M_{nu+1}^(-tau/(tau-1)), with tau/(tau-1) = tau + 1."""
        return _mul(self.a_source(), _pow_source(self.M(self.nu + 1), -(TAU + 1)))

    def case2_height_bound(self) -> Source:
        """240 * M_{nu+1}^tau * M_nu^(-1/tau)."""
        return _mul(_const(240), _pow_source(self.M(self.nu + 1), TAU), _pow_source(self.M(self.nu), 1 - TAU))

    def case2_value_bound(self, height: int) -> Source:
        """24^tau * M_nu^((1-tau)/tau) * height^(-tau), with (1-tau)/tau = tau - 2."""
        return _mul(_pow_source(24, TAU), _pow_source(self.M(self.nu), TAU - 2), _pow_source(height, -TAU))


def r_nu(ctx: NuContext, precision_bits: int = START_BITS) -> RationalInterval:
    """Enclosure of R_nu = 2 / (M_{nu+1} zeta_nu); certifies R_nu > M_{nu+1}."""
    src = ctx.r_source()
    Mn = ctx.M(ctx.nu + 1)
    if certified_compare(src, Mn) is not Ordering.GREATER:
        raise PreconditionNotCertified(f"R_nu <= M_(nu+1) at nu={ctx.nu}")
    return src(precision_bits)


# ---------------------------------------------------------------------------
# Lemma 1: parallelepiped search
# ---------------------------------------------------------------------------


def _alpha_approx(a: CertifiedReal, bits: int) -> tuple[Fraction, Fraction]:
    try:
        iv = enclosure(a, bits)
    except PrecisionExhausted:
        iv = RationalInterval(a.value - a.error, a.value + a.error)
    return iv.mid, iv.width / 2


def _value_order(ctx: NuContext):
    """Tie-break: smaller height, then smaller certified value, then lexicographic."""
    def cmp(p, q):
        hp, hq = max(p), max(q)
        if hp != hq:
            return -1 if hp < hq else 1
        if p == q:
            return 0
        o = certified_compare(difference(ctx.value(*p), ctx.value(*q)), 0)
        return -1 if o is Ordering.LESS else 1
    return functools.cmp_to_key(cmp)


def _positive(x1: int, x2: int) -> tuple[int, int] | None:
    if x1 < 0 and x2 < 0:
        x1, x2 = -x1, -x2
    if x1 > 0 and x2 > 0:
        return x1, x2
    return None


def parallelepiped_points(ctx: NuContext) -> list[tuple[int, int]]:
    """Projections (x1, x2) of a superset of the nonzero integer points of the Lemma 1 body."""
    nu = ctx.nu
    Mn = ctx.M(nu + 1)
    z = ctx.zeta(nu)(START_BITS)
    if z.lo <= 0:
        raise PrecisionExhausted("zeta_nu enclosure not positive")
    zeta_hi = z.hi
    R_hi = Fraction(2) / (Mn * z.lo)
    bits = 64 + math.ceil(R_hi).bit_length() + math.ceil(1 / z.lo).bit_length()
    t1, e1 = _alpha_approx(ctx.alpha1, bits)
    t2, e2 = _alpha_approx(ctx.alpha2, bits)
    eta = R_hi * (e1 + e2) / zeta_hi
    basis = [
        [t1 / zeta_hi, Fraction(1, Mn), 1 / R_hi],
        [t2 / zeta_hi, Fraction(-1, Mn), 1 / R_hi],
        [1 / zeta_hi, Fraction(0), Fraction(0)],
    ]
    bound = (1 + eta) ** 2 + 2
    pts = set()
    for x1, x2, _y in short_vectors(basis, bound):
        pts.add((x1, x2))
        pts.add((-x1, -x2))
    return sorted(pts)


def lemma1_candidates(ctx: NuContext) -> list[tuple[int, int]]:
    """All positive (x1, x2) of the Lemma 1 body with ||a.x|| < zeta_nu, in tie-break order."""
    nu = ctx.nu
    Mn = ctx.M(nu + 1)
    zsrc = ctx.zeta(nu)
    xi = ctx.bm(nu).xi
    excluded = {xi, (-xi[0], -xi[1])}
    out = set()
    for x1, x2 in parallelepiped_points(ctx):
        pos = _positive(x1, x2)
        if pos is None or pos in excluded or (x1, x2) in excluded:
            continue
        x1, x2 = pos
        if abs(x1 - x2) > Mn:
            continue
        # x1 + x2 <= R_nu  <=>  zeta_nu <= 2 / ((x1 + x2) M_{nu+1})
        if certified_compare(zsrc, Fraction(2, (x1 + x2) * Mn)) is Ordering.GREATER:
            continue
        if certified_compare(difference(ctx.value(x1, x2), zsrc), 0) is Ordering.GREATER:
            continue
        out.add((x1, x2))
    return sorted(out, key=_value_order(ctx))


def _lemma1_checks(ctx: NuContext, x1: int, x2: int) -> list[Check]:
    nu = ctx.nu
    Mn = ctx.M(nu + 1)
    h = max(x1, x2)
    zsrc = ctx.zeta(nu)
    return [
        exact_check("x1 > 0", 0, x1, strict=True),
        exact_check("x2 > 0", 0, x2, strict=True),
        exact_check("M_(nu+1) <= max", Mn, h),
        decide("max <= R_nu", lambda p: h - ctx.r_source()(p)),
        decide("||a.x|| < zeta_nu", difference(ctx.value(x1, x2), zsrc), strict=True),
    ]


def lemma1_search(ctx: NuContext) -> WitnessPoint:
    cands = lemma1_candidates(ctx)
    if not cands:
        raise SearchFailed(f"no integer point in the Lemma 1 body at nu={ctx.nu}")
    x1, x2 = cands[0]
    checks = _lemma1_checks(ctx, x1, x2)
    if not all(c.holds for c in checks):
        raise SearchFailed(f"point {(x1, x2)} fails {[c.name for c in checks if not c.holds]}")
    cert = _certificate(BoundKind.LEMMA1, checks, checks[-1], ctx.zeta(ctx.nu))
    return WitnessPoint(x1, x2, ctx.value(x1, x2)(START_BITS), WitnessSource.LEMMA1, ctx.nu, cert)


# ---------------------------------------------------------------------------
# Corollaries 1 and 2
# ---------------------------------------------------------------------------


def _require(name: str, ordering_wanted: Ordering, src: Source, threshold=0) -> None:
    try:
        got = certified_compare(src, threshold)
    except PrecisionExhausted as exc:
        raise PreconditionNotCertified(f"{name}: undecided ({exc})") from exc
    if got is not ordering_wanted:
        raise PreconditionNotCertified(f"{name} does not hold")


def case1_checks(ctx: NuContext, x1: int, x2: int) -> tuple[list[Check], Check, Source]:
    """Checks for M' <= max <= 4M' and ||a.x|| <= 16 max^-2, where M' = M_{nu+1}."""
    Mn = ctx.M(ctx.nu + 1)
    h = max(x1, x2)
    rhs = Fraction(16, h * h)
    value_check = decide("||a.x|| <= 16 max^-2", difference(ctx.value(x1, x2), _const(rhs)))
    checks = [
        exact_check("x1 > 0", 0, x1, strict=True),
        exact_check("x2 > 0", 0, x2, strict=True),
        exact_check("M_(nu+1) <= max", Mn, h),
        exact_check("max <= 4 M_(nu+1)", h, 4 * Mn),
        value_check,
    ]
    return checks, value_check, _const(rhs)


def box_candidates(ctx: NuContext, h_lo: int, h_hi: int, c: Fraction) -> list[tuple[int, int]]:
    """Positive (x1, x2) with h_lo <= max <= h_hi that may satisfy ||a.x|| <= c max^-2.

    Superset by construction (exact lattice enumeration of an enlarged box);
    the caller certifies each point.
    """
    eps_hi = c / (h_lo * h_lo)
    bits = 64 + h_hi.bit_length() + math.ceil(1 / eps_hi).bit_length()
    t1, e1 = _alpha_approx(ctx.alpha1, bits)
    t2, e2 = _alpha_approx(ctx.alpha2, bits)
    eta = h_hi * (e1 + e2) / eps_hi
    basis = [
        [t1 / eps_hi, Fraction(1, h_hi), Fraction(0)],
        [t2 / eps_hi, Fraction(0), Fraction(1, h_hi)],
        [1 / eps_hi, Fraction(0), Fraction(0)],
    ]
    f1, f2 = float(t1), float(t2)
    out = set()
    for x1, x2, _y in short_vectors(basis, (1 + eta) ** 2 + 2):
        pos = _positive(x1, x2)
        if pos is None or not h_lo <= max(pos) <= h_hi:
            continue
        v = pos[0] * f1 + pos[1] * f2
        if abs(v - round(v)) > float(c) / max(pos) ** 2 * (1 + 1e-6) + 1e-9:
            continue
        out.add(pos)
    return sorted(out, key=lambda x: (max(x), x))


def corollary1_point(ctx: NuContext) -> WitnessPoint:
    """Lemma 1 point when zeta_nu >= (8 M_{nu+1}^2)^-1, certified against 16 max^-2.

    The Lemma 1 body only guarantees max <= (R_nu + M_{nu+1}) / 2 <= 8.5 M_{nu+1};
    when no body point meets max <= 4 M_{nu+1}, the box M_{nu+1} <= max <= 4 M_{nu+1}
    is searched directly for a point with ||a.x|| <= 16 max^-2.
    """
    Mn = ctx.M(ctx.nu + 1)
    _require("zeta_nu >= 1/(8 M_(nu+1)^2)", Ordering.GREATER, ctx.zeta(ctx.nu), Fraction(1, 8 * Mn * Mn))
    cands = lemma1_candidates(ctx)
    if not cands:
        raise SearchFailed(f"no integer point in the Lemma 1 body at nu={ctx.nu}")
    method = "lemma1-body"
    chosen = _first_certified(ctx, cands)
    if chosen is None:
        method = "box"
        chosen = _first_certified(ctx, box_candidates(ctx, Mn, 4 * Mn, Fraction(16)))
    if chosen is None:
        # report the tie-break winner with its failing certificate
        method = "lemma1-body"
        x1, x2 = cands[0]
        chosen = (x1, x2) + case1_checks(ctx, x1, x2)
    x1, x2, checks, value_check, rhs_src = chosen
    h = max(x1, x2)
    chain = [
        decide("||a.x|| < zeta_nu", difference(ctx.value(x1, x2), ctx.zeta(ctx.nu)), strict=True),
        decide("zeta_nu <= M_(nu+1)^-2", difference(ctx.zeta(ctx.nu), _const(Fraction(1, Mn * Mn)))),
        exact_check("M_(nu+1)^-2 <= 16 max^-2", Fraction(1, Mn * Mn), Fraction(16, h * h)),
    ]
    cert = _certificate(BoundKind.CASE_I, checks, value_check, rhs_src, chain)
    return WitnessPoint(x1, x2, ctx.value(x1, x2)(START_BITS), WitnessSource.COR1, ctx.nu, cert,
                        method=method)


def _first_certified(ctx: NuContext, cands: list[tuple[int, int]]):
    """First point in tie-break order whose case I certificate holds."""
    passing = []
    for x1, x2 in cands:
        if passing and max(x1, x2) > max(passing[0][:2]):
            break
        checks, value_check, rhs_src = case1_checks(ctx, x1, x2)
        if all(c.holds for c in checks):
            passing.append((x1, x2, checks, value_check, rhs_src))
    if not passing:
        return None
    order = _value_order(ctx)
    return min(passing, key=lambda t: order(t[:2]))


def case2_checks(ctx: NuContext, x1: int, x2: int, strict_value: bool = False):
    """Checks for max <= 240 M'^tau M^(-1/tau) and ||a.x|| <= 24^tau M^((1-tau)/tau) max^-tau."""
    h = max(x1, x2)
    hb = ctx.case2_height_bound()
    vb = ctx.case2_value_bound(h)
    value_check = decide("||a.x|| <= 24^tau M_nu^((1-tau)/tau) max^-tau",
                         difference(ctx.value(x1, x2), vb), strict=strict_value)
    checks = [
        exact_check("x1 > 0", 0, x1, strict=True),
        exact_check("x2 > 0", 0, x2, strict=True),
        decide("max <= 240 M_(nu+1)^tau M_nu^(-1/tau)", lambda p: h - hb(p)),
        value_check,
    ]
    return checks, value_check, vb


def corollary2_point(ctx: NuContext) -> WitnessPoint:
    """Lemma 1 point when zeta_nu >= A_nu M_{nu+1}^(-tau^2)."""
    nu = ctx.nu
    Mn = ctx.M(nu + 1)
    _require("zeta_nu >= A_nu M_(nu+1)^(-tau^2)", Ordering.GREATER,
             difference(ctx.zeta(nu), ctx.gap_threshold()))
    cands = lemma1_candidates(ctx)
    if not cands:
        raise SearchFailed(f"no integer point in the Lemma 1 body at nu={nu}")
    x1, x2 = cands[0]
    h = max(x1, x2)
    checks, value_check, vb = case2_checks(ctx, x1, x2)
    checks.insert(2, exact_check("M_(nu+1) <= max", Mn, h))
    a_src = ctx.a_source()
    chain = [
        decide("max <= R_nu", lambda p: h - ctx.r_source()(p)),
        decide("R_nu <= 2 A_nu^-1 M_(nu+1)^tau",
               lambda p: ctx.r_source()(p) - _pow_source(Mn, TAU)(p) * 2 / a_src(p)),
    ]
    cert = _certificate(BoundKind.CASE_II, checks, value_check, vb, chain)
    return WitnessPoint(x1, x2, ctx.value(x1, x2)(START_BITS), WitnessSource.COR2, nu, cert)


# ---------------------------------------------------------------------------
# Lemma 2: planar lattice search
# ---------------------------------------------------------------------------


def disc_candidates(xi_nu, xi_next, M_nu: int, D: int):
    """Lattice points of <xi_nu, xi_next> in the disc of radius 4D/M centred at (5D/M, 5D/M).

    Returned as ``[((x1, x2), (l_nu, l_next)), ...]`` sorted by (max, point).
    """
    c = Fraction(5 * D, M_nu)
    r2 = Fraction(16 * D * D, M_nu * M_nu)
    pts = lattice_points_in_disc(xi_nu, xi_next, (c, c), r2)
    return sorted(pts, key=lambda t: (max(t[0]), t[0]))


def lemma2_preconditions(ctx: NuContext) -> None:
    nu = ctx.nu
    b0, b1, b2 = ctx.bm(nu - 1), ctx.bm(nu), ctx.bm(nu + 1)
    if not det_condition(b0, b1, b2):
        raise PreconditionNotCertified(f"determinant of m_(nu-1), m_nu, m_(nu+1) vanishes at nu={nu}")
    Mp, M, Mn = b0.M, b1.M, b2.M
    _require("zeta_nu <= 1/(8 M_(nu-1) M_(nu+1))", Ordering.LESS, ctx.zeta(nu), Fraction(1, 8 * Mp * Mn))
    _require("zeta_(nu+1) <= 1/(8 M_(nu-1) M_nu)", Ordering.LESS, ctx.zeta(nu + 1), Fraction(1, 8 * Mp * M))


def lemma2_search(ctx: NuContext) -> WitnessPoint:
    nu = ctx.nu
    lemma2_preconditions(ctx)
    b1, b2 = ctx.bm(nu), ctx.bm(nu + 1)
    M, Mn = b1.M, b2.M
    D = d_nu(b1, b2)
    if 2 * D < M * M:
        raise PreconditionNotCertified(f"D_nu = {D} < M_nu^2 / 2 at nu={nu}")
    cands = disc_candidates(b1.xi, b2.xi, M, D)
    cands = [(x, lam) for x, lam in cands if x[0] > 0 and x[1] > 0]
    if not cands:
        raise SearchFailed(f"no lattice point in the disc at nu={nu}")
    best_h = max(cands[0][0])
    tied = [t for t in cands if max(t[0]) == best_h]
    order = _value_order(ctx)
    (x1, x2), lam = min(tied, key=lambda t: order(t[0]))
    checks = lemma2_checks(ctx, x1, x2, lam, D)
    cert = _certificate(BoundKind.LEMMA2, checks, checks[-1], _lemma2_value_bound(ctx))
    if not cert.holds:
        raise SearchFailed(f"point {(x1, x2)} fails {[c.name for c in checks if not c.holds]}")
    return WitnessPoint(x1, x2, ctx.value(x1, x2)(START_BITS), WitnessSource.LEMMA2, nu, cert, lam,
                        method="disc")


def _lemma2_value_bound(ctx: NuContext) -> Source:
    M, Mn = ctx.M(ctx.nu), ctx.M(ctx.nu + 1)
    z = ctx.zeta(ctx.nu)
    return lambda p: z(p) * Fraction(40 * Mn, M)


def lemma2_checks(ctx: NuContext, x1: int, x2: int, lam: tuple[int, int], D: int) -> list[Check]:
    M, Mn = ctx.M(ctx.nu), ctx.M(ctx.nu + 1)
    c = Fraction(5 * D, M)
    dist2 = (x1 - c) ** 2 + (x2 - c) ** 2
    return [
        exact_check("x1 > 0", 0, x1, strict=True),
        exact_check("x2 > 0", 0, x2, strict=True),
        exact_check("2 D_nu >= M_nu^2", M * M, 2 * D),
        exact_check("|x - centre|^2 <= (4 D_nu / M_nu)^2", dist2, Fraction(16 * D * D, M * M)),
        exact_check("|lambda_nu| <= 20 M_(nu+1) / M_nu", abs(lam[0]) * M, 20 * Mn),
        exact_check("|lambda_(nu+1)| <= 20", abs(lam[1]), 20),
        exact_check("max <= 20 M_(nu+1)", max(x1, x2), 20 * Mn),
        decide("||a.x|| < 40 M_(nu+1) M_nu^-1 zeta_nu",
               difference(ctx.value(x1, x2), _lemma2_value_bound(ctx)), strict=True),
    ]


def corollary3_point(ctx: NuContext) -> WitnessPoint:
    """Lemma 2 point when zeta_nu < A_nu M_{nu+1}^(-tau^2), certified against the 24^tau bound."""
    nu = ctx.nu
    _require("zeta_nu < A_nu M_(nu+1)^(-tau^2)", Ordering.LESS,
             difference(ctx.zeta(nu), ctx.gap_threshold()))
    w = lemma2_search(ctx)
    x1, x2 = w.x1, w.x2
    checks, value_check, vb = case2_checks(ctx, x1, x2, strict_value=True)
    chain = list(w.certificate.checks[2:]) + [
        decide("40 M_(nu+1) M_nu^-1 zeta_nu <= 24^tau M_nu^((1-tau)/tau) max^-tau",
               difference(_lemma2_value_bound(ctx), vb)),
    ]
    cert = _certificate(BoundKind.CASE_II, checks, value_check, vb, chain)
    return WitnessPoint(x1, x2, w.value, WitnessSource.COR3, nu, cert, w.coefficients, method="disc")


# ---------------------------------------------------------------------------
# Case dispatcher
# ---------------------------------------------------------------------------


def theorem3_dispatch(ctx: NuContext) -> WitnessPoint:
    """Witness for index nu: case I from nu+1 if zeta_{nu+1} >= (8 M_{nu+2}^2)^-1, else case II."""
    nu = ctx.nu
    for j in (nu - 1, nu, nu + 1, nu + 2):
        if not ctx.has(j):
            raise Inapplicable(f"best approximation {j} not available for nu={nu}")
    if not det_condition(ctx.bm(nu - 1), ctx.bm(nu), ctx.bm(nu + 1)):
        raise DetConditionFailed(f"determinant vanishes at nu={nu}")
    M_prev, M, M_next2 = ctx.M(nu - 1), ctx.M(nu), ctx.M(nu + 2)
    if certified_compare(ctx.zeta(nu + 1), Fraction(1, 8 * M_next2 * M_next2)) is Ordering.GREATER:
        return corollary1_point(ctx.shifted(1))
    # zeta_{nu+1} < (8 M_{nu+2}^2)^-1 <= (8 M_{nu-1} M_nu)^-1
    if certified_compare(ctx.zeta(nu + 1), Fraction(1, 8 * M_prev * M)) is not Ordering.LESS:
        raise Inapplicable(f"zeta_(nu+1) <= 1/(8 M_(nu-1) M_nu) fails at nu={nu}")
    if certified_compare(difference(ctx.zeta(nu), ctx.gap_threshold()), 0) is Ordering.GREATER:
        return corollary2_point(ctx)
    try:
        return corollary3_point(ctx)
    except PreconditionNotCertified as exc:
        raise Inapplicable(str(exc)) from exc


def applicable_indices(seq: BestApproxSequence) -> list[int]:
    """Indices nu with nu-1 >= 1, nu+2 <= len and a nonzero determinant."""
    return [nu for nu in range(2, len(seq) - 1) if det_condition(seq[nu - 1], seq[nu], seq[nu + 1])]
