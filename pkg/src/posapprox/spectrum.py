"""End-to-end verification of the exponent bound

    ||a1 x1 + a2 x2|| * max(x1, x2)^g(gamma) <= C(Gamma)

along the witnesses produced by :func:`theorem3_dispatch`, for pairs that
satisfy ``||a1 m1 + a2 m2|| >= Gamma / max(|m1|, |m2|)^gamma``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .best_approx import enumerate_best_approximations, screen_batch, screening_error
from .certified_reals import (
    START_BITS,
    CertifiedReal,
    Ordering,
    RationalInterval,
    certified_compare,
    form_distance,
    fraction_to_decimal,
    rpow,
)
from .errors import (
    DetConditionFailed,
    DiophantineConditionViolated,
    Inapplicable,
    NoApplicableNu,
    PrecisionExhausted,
    PreconditionNotCertified,
    SearchFailed,
)
from .golden import TAU, GoldenNumber
from .witness import BoundKind, NuContext, WitnessPoint, applicable_indices, decide, theorem3_dispatch

log = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
TWO_18 = 2**18


# ---------------------------------------------------------------------------
# Constants g(gamma), C(Gamma)
# ---------------------------------------------------------------------------


def _check_gamma(gamma) -> Fraction:
    gamma = Fraction(gamma)
    if gamma < 2:
        raise ValueError(f"gamma must be >= 2, got {gamma}")
    return gamma


def g_exact(gamma) -> GoldenNumber:
    """g(gamma) = tau + (2 tau - 2) / (tau^2 gamma - 2) as an exact element of Q(tau)."""
    gamma = _check_gamma(gamma)
    return TAU + (2 * TAU - 2) / (TAU * TAU * gamma - 2)


def g_of_gamma(gamma, precision_bits: int = START_BITS) -> RationalInterval:
    return g_exact(gamma).enclosure(precision_bits)


def c_exponent(gamma) -> GoldenNumber:
    """(tau - tau^2) / (tau^2 gamma - 2), which reduces to -1 / (tau^2 gamma - 2)."""
    gamma = _check_gamma(gamma)
    return (TAU - TAU * TAU) / (TAU * TAU * gamma - 2)


def c_of_gamma(Gamma, gamma, precision_bits: int = START_BITS) -> RationalInterval:
    """Enclosure of C(Gamma) = 2^18 Gamma^((tau - tau^2)/(tau^2 gamma - 2)), width <= 2^-p."""
    Gamma = Fraction(Gamma)
    if not 0 < Gamma < 1:
        raise ValueError(f"Gamma must lie in (0, 1), got {Gamma}")
    e = c_exponent(gamma)
    target = Fraction(1, 2**precision_bits)
    p = precision_bits + 24
    while True:
        iv = rpow(Gamma, e.enclosure(p), p) * TWO_18
        if iv.width <= target:
            return iv
        p *= 2


def _power_source(base: int, exponent: GoldenNumber):
    if exponent.is_rational() and exponent.a.denominator == 1:
        exact = Fraction(base) ** int(exponent.a)
        return lambda p: RationalInterval.point(exact)
    return lambda p: rpow(Fraction(base), exponent.enclosure(p), p)


@dataclass(frozen=True)
class SpectrumParams:
    Gamma: Fraction
    gamma: Fraction
    g_enclosure: RationalInterval
    C_enclosure: RationalInterval

    @classmethod
    def make(cls, Gamma, gamma, precision_bits: int = START_BITS) -> SpectrumParams:
        Gamma, gamma = Fraction(Gamma), _check_gamma(gamma)
        return cls(Gamma, gamma, g_of_gamma(gamma, precision_bits), c_of_gamma(Gamma, gamma, precision_bits))

    @property
    def g(self) -> GoldenNumber:
        return g_exact(self.gamma)

    def C_source(self):
        return lambda p: c_of_gamma(self.Gamma, self.gamma, p)

    def to_json(self) -> dict:
        return {
            "Gamma": _frac_json(self.Gamma),
            "gamma": _frac_json(self.gamma),
            "g_lo": fraction_to_decimal(self.g_enclosure.lo, 30),
            "g_hi": fraction_to_decimal(self.g_enclosure.hi, 30, round_up=True),
            "g_exact": _golden_json(self.g),
            "C_lo": fraction_to_decimal(self.C_enclosure.lo, 30),
            "C_hi": fraction_to_decimal(self.C_enclosure.hi, 30, round_up=True),
        }


def _frac_json(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _golden_json(x: GoldenNumber) -> str:
    return f"{_frac_json(x.a)} + {_frac_json(x.b)}*tau" if x.b else _frac_json(x.a)


# ---------------------------------------------------------------------------
# Diophantine condition up to a cutoff
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BadlyApproxResult:
    gamma: Fraction
    height_bound: int
    certified_Gamma_H: Fraction  # rational lower bound of Gamma_H
    Gamma_H: RationalInterval  # enclosure of the minimum
    argmin: tuple[int, int]
    violations: tuple[tuple[int, int, RationalInterval], ...] = ()

    def to_json(self) -> dict:
        return {
            "height_bound": self.height_bound,
            "gamma": _frac_json(self.gamma),
            "certified_Gamma_H": _frac_json(self.certified_Gamma_H),
            "Gamma_H_lo": fraction_to_decimal(self.Gamma_H.lo, 30),
            "Gamma_H_hi": fraction_to_decimal(self.Gamma_H.hi, 30, round_up=True),
            "argmin": list(self.argmin),
            "violations": [[m1, m2, fraction_to_decimal(v.hi, 30, round_up=True)]
                           for m1, m2, v in self.violations],
        }


def _scaled_source(m1: int, m2: int, a1, a2, gamma: Fraction):
    h = max(abs(m1), abs(m2))
    dist = form_distance(m1, m2, a1, a2)
    hp = _power_source(h, GoldenNumber(gamma))
    return lambda p: dist(p) * hp(p)


def badly_approx_check(a1: CertifiedReal, a2: CertifiedReal, gamma, height_bound: int,
                       Gamma=None, batch: int = 256) -> BadlyApproxResult:
    """Certified min of ||a1 m1 + a2 m2|| * max(|m1|,|m2|)^gamma over 0 < max <= height_bound.

    With ``Gamma`` given, also lists every certified violation of the lower bound.
    """
    gamma = _check_gamma(gamma)
    if height_bound < 1:
        raise ValueError("height_bound must be >= 1")
    fa1, fa2 = a1.float_approx(), a2.float_approx()
    fg = float(gamma)
    shells = []
    best_upper = math.inf
    for h0 in range(1, height_bound + 1, batch):
        h1 = min(h0 + batch, height_bound + 1)
        n1, n2, d, starts = screen_batch(h0, h1, fa1[0], fa2[0])
        heights = np.maximum(np.abs(n1), np.abs(n2)).astype(np.float64)
        hg = heights**fg
        scaled = d * hg
        eps = (heights * (fa1[1] + fa2[1]) + (heights * (abs(fa1[0]) + abs(fa2[0])) + 1) * 2.0**-50)
        margin = eps * hg * (1 + 2.0**-30) + scaled * 2.0**-40
        best_upper = min(best_upper, float(np.min(scaled + margin)))
        shells.append((n1, n2, scaled, margin))
    cands = []
    viol_cands = []
    G = float(Fraction(Gamma)) if Gamma is not None else None
    for n1, n2, scaled, margin in shells:
        idx = np.nonzero(scaled - margin <= best_upper)[0]
        cands.extend((int(n1[i]), int(n2[i])) for i in idx)
        if G is not None:
            idx = np.nonzero(scaled - margin < G * (1 + 2.0**-40))[0]
            viol_cands.extend((int(n1[i]), int(n2[i])) for i in idx)
    encl = [(m, _scaled_source(*m, a1, a2, gamma)(START_BITS)) for m in cands]
    lo = min(iv.lo for _, iv in encl)
    hi = min(iv.hi for _, iv in encl)
    argmin = min(encl, key=lambda t: (t[1].hi, t[0]))[0]
    if lo <= 0:
        raise PrecisionExhausted("Gamma_H enclosure is not positive; inputs may be rationally dependent")
    certified = Fraction(fraction_to_decimal(lo, 20))
    violations = []
    if Gamma is not None:
        Gamma = Fraction(Gamma)
        for m in viol_cands:
            src = _scaled_source(*m, a1, a2, gamma)
            if certified_compare(src, Gamma) is Ordering.LESS:
                violations.append((m[0], m[1], src(START_BITS)))
    return BadlyApproxResult(gamma, height_bound, certified, RationalInterval(lo, hi), argmin, tuple(violations))


# ---------------------------------------------------------------------------
# Full run
# ---------------------------------------------------------------------------


@dataclass
class WitnessRecord:
    nu: int
    case: str
    witness: WitnessPoint
    lhs: RationalInterval  # enclosure of ||a.x|| * max^g
    holds: bool
    revalidated: bool
    case_checks: dict[str, bool]
    tau_product_hi: Fraction  # ||a.x|| * max^tau, observed decay

    def to_json(self, C_lo: Fraction) -> dict:
        w = self.witness
        return {
            "nu": self.nu,
            "case": self.case,
            "source": w.source.value,
            "method": w.method,
            "x": [w.x1, w.x2],
            "value_hi": fraction_to_decimal(w.value.hi, 30, round_up=True),
            "bound_rhs": fraction_to_decimal(w.certificate.rhs, 30),
            "certificate_holds": w.certificate.holds,
            "lhs_hi": fraction_to_decimal(self.lhs.hi, 30, round_up=True),
            "C_lo": fraction_to_decimal(C_lo, 30),
            "holds": self.holds,
            "revalidated": self.revalidated,
            "case_checks": self.case_checks,
            "tau_product_hi": fraction_to_decimal(self.tau_product_hi, 20, round_up=True),
        }


@dataclass
class RunReport:
    alpha1: str
    alpha2: str
    params: SpectrumParams
    gamma_mode: str  # "supplied" or "empirical"
    height_bound: int
    best_approx_count: int
    diophantine: BadlyApproxResult
    minkowski_chain: list[tuple[int, bool]]
    entries: list[WitnessRecord] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)
    g_equals_two: bool | None = None

    @property
    def all_hold(self) -> bool:
        return bool(self.entries) and all(e.holds for e in self.entries) and not self.failures

    def to_json(self) -> dict:
        C_lo = self.params.C_enclosure.lo
        return {
            "schema_version": SCHEMA_VERSION,
            "inputs": {"alpha1": self.alpha1, "alpha2": self.alpha2},
            "params": self.params.to_json(),
            "gamma_mode": self.gamma_mode,
            "hypothesis_note": ("Gamma verified only for heights <= height_bound"
                                if self.gamma_mode == "empirical" else
                                "supplied Gamma checked for heights <= height_bound"),
            "height_bound": self.height_bound,
            "best_approx_count": self.best_approx_count,
            "diophantine": self.diophantine.to_json(),
            "minkowski_chain": [{"nu": nu, "holds": ok} for nu, ok in self.minkowski_chain],
            "g_equals_two": self.g_equals_two,
            "witnesses": [e.to_json(C_lo) for e in self.entries],
            "failures": self.failures,
            "all_hold": self.all_hold,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["nu", "case", "x1", "x2", "value_hi", "lhs_hi", "C_lo", "holds"])
        C_lo = fraction_to_decimal(self.params.C_enclosure.lo, 30)
        for e in self.entries:
            w.writerow([e.nu, e.case, e.witness.x1, e.witness.x2,
                        fraction_to_decimal(e.witness.value.hi, 30, round_up=True),
                        fraction_to_decimal(e.lhs.hi, 30, round_up=True), C_lo, e.holds])
        return buf.getvalue()


def _case_checks(w: WitnessPoint, ctx: NuContext, params: SpectrumParams) -> dict[str, bool]:
    """Checks used to pass from the witness bound to the exponent bound."""
    out = {}
    C = params.C_source()
    if w.certificate.bound_kind is BoundKind.CASE_I:
        out["C(Gamma) >= 16"] = decide("C >= 16", lambda p: 16 - C(p)).holds
        out["g(gamma) <= 2"] = decide("g <= 2", lambda p: params.g.enclosure(p) - 2).holds
        return out
    # 240^(-2tau/k) Gamma^(tau^2/k) max^(2tau/k) <= M_nu, with k = tau^2 gamma - 2
    k = TAU * TAU * params.gamma - 2
    e1, e2 = 2 * TAU / k, TAU * TAU / k
    h, M = w.height, ctx.M(ctx.nu)
    lhs = lambda p: (rpow(Fraction(240), (-e1).enclosure(p), p) * rpow(params.Gamma, e2.enclosure(p), p)
                     * rpow(Fraction(h), e1.enclosure(p), p))
    out["substitution chain <= M_nu"] = decide("chain", lambda p: lhs(p) - M).holds
    return out


def evaluate_witness(nu: int, w: WitnessPoint, ctx: NuContext, params: SpectrumParams) -> WitnessRecord:
    value = ctx.value(w.x1, w.x2)
    hg = _power_source(w.height, params.g)
    lhs = lambda p: value(p) * hg(p)
    check = decide("||a.x|| max^g <= C(Gamma)", lambda p: lhs(p) - params.C_source()(p))
    revalidated = w.certificate.revalidate() and check.at(2 * check.bits) == check.holds
    tau_prod = (value(START_BITS) * _power_source(w.height, TAU)(START_BITS)).hi
    return WitnessRecord(nu, w.certificate.bound_kind.value, w, lhs(START_BITS), check.holds and w.certificate.holds,
                         revalidated, _case_checks(w, ctx, params), tau_prod)


def minkowski_chain(seq, Gamma: Fraction, gamma: Fraction) -> list[tuple[int, bool]]:
    """Certify Gamma M_nu^-gamma <= M_{nu+1}^-2 for consecutive best approximations."""
    out = []
    g = GoldenNumber(gamma)
    for nu in range(1, len(seq)):
        M, Mn = seq[nu].M, seq[nu + 1].M
        pw = _power_source(M, -g)
        out.append((nu, decide("chain", lambda p, pw=pw, Mn=Mn: pw(p) * Gamma - Fraction(1, Mn * Mn)).holds))
    return out


def theorem2_run(a1: CertifiedReal, a2: CertifiedReal, Gamma, gamma, height_bound: int) -> RunReport:
    """Enumerate, dispatch every applicable nu, and certify the exponent bound per witness.

    ``Gamma=None`` selects empirical mode: Gamma is replaced by a certified
    lower bound of the minimum up to ``height_bound``.  Raises
    :class:`NoApplicableNu` (with the partial report attached as ``.report``)
    if no index satisfies the determinant condition.
    """
    gamma = _check_gamma(gamma)
    if Gamma is None:
        dioph = badly_approx_check(a1, a2, gamma, height_bound)
        Gamma, mode = dioph.certified_Gamma_H, "empirical"
    else:
        Gamma, mode = Fraction(Gamma), "supplied"
        dioph = badly_approx_check(a1, a2, gamma, height_bound, Gamma)
        if dioph.violations:
            m1, m2, _ = dioph.violations[0]
            raise DiophantineConditionViolated(
                f"{len(dioph.violations)} violations of the lower bound, first at ({m1}, {m2})")
    params = SpectrumParams.make(Gamma, gamma)
    seq = enumerate_best_approximations(a1, a2, height_bound)
    report = RunReport(a1.describe(), a2.describe(), params, mode, height_bound, len(seq), dioph,
                       minkowski_chain(seq, Gamma, gamma))
    if gamma == 2:
        report.g_equals_two = params.g == GoldenNumber(2) and params.g_enclosure.contains(2)
    indices = applicable_indices(seq)
    for nu in indices:
        ctx = NuContext.from_sequence(seq, nu)
        try:
            w = theorem3_dispatch(ctx)
        except (Inapplicable, SearchFailed, PreconditionNotCertified, DetConditionFailed) as exc:
            report.failures.append({"nu": nu, "error": type(exc).__name__, "message": str(exc)})
            continue
        rec = evaluate_witness(nu, w, ctx, params)
        report.entries.append(rec)
        if not rec.holds:
            report.failures.append({"nu": nu, "error": "BoundNotCertified",
                                    "message": f"witness {(w.x1, w.x2)} does not certify its bounds"})
    if not indices:
        exc = NoApplicableNu(f"no index nu with nonzero determinant among {len(seq)} best approximations")
        exc.report = report
        raise exc
    return report
