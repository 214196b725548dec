"""Best approximations of the linear form m0 + m1*a1 + m2*a2.

The enumeration scans integer vectors shell by shell (all ``(n1, n2)`` with
``max(|n1|, |n2|) = h``) and keeps the running minimum of ``||n1*a1 + n2*a2||``.
Each shell is screened in float64 with a rigorous error margin; only shells
whose screened minimum may beat the current record are decided with
certified comparisons.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .certified_reals import (
    CertifiedReal,
    Ordering,
    RationalInterval,
    certified_compare,
    difference,
    eval_linear_form,
    fraction_to_decimal,
    precision_schedule,
)
from .errors import PrecisionExhausted

log = logging.getLogger(__name__)

ZETA_BITS = 128


@dataclass(frozen=True)
class BestApproximation:
    nu: int
    m0: int
    m1: int
    m2: int
    zeta: RationalInterval  # enclosure of |zeta(m)|

    @property
    def M(self) -> int:
        return max(abs(self.m1), abs(self.m2))

    @property
    def m(self) -> tuple[int, int, int]:
        return (self.m0, self.m1, self.m2)

    @property
    def xi(self) -> tuple[int, int]:
        return (self.m1, self.m2)

    def to_json(self, digits: int = 30) -> dict:
        return {
            "nu": self.nu,
            "m": [self.m0, self.m1, self.m2],
            "M": self.M,
            "zeta_lo": fraction_to_decimal(self.zeta.lo, digits),
            "zeta_hi": fraction_to_decimal(self.zeta.hi, digits, round_up=True),
        }


@dataclass(frozen=True)
class BestApproxSequence:
    alpha1: CertifiedReal
    alpha2: CertifiedReal
    items: tuple[BestApproximation, ...]
    height_bound: int

    def __len__(self):
        return len(self.items)

    def __iter__(self) -> Iterator[BestApproximation]:
        return iter(self.items)

    def __getitem__(self, nu: int) -> BestApproximation:
        """1-based access: ``seq[nu]`` is the nu-th best approximation."""
        if not 1 <= nu <= len(self.items):
            raise IndexError(f"no best approximation with index {nu}")
        return self.items[nu - 1]

    def zeta_source(self, nu: int):
        return zeta_source(self[nu], self.alpha1, self.alpha2)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(bm.to_json()) + "\n" for bm in self.items)


def zeta_source(bm: BestApproximation, a1: CertifiedReal, a2: CertifiedReal):
    """Refinable enclosure source for ``zeta`` of a best approximation."""
    m0, m1, m2 = bm.m
    return lambda p: abs(eval_linear_form(m0, m1, m2, a1, a2, p))


def _nearest_m0(n1: int, n2: int, a1: CertifiedReal, a2: CertifiedReal) -> int:
    """Certified nearest integer to -(n1*a1 + n2*a2)."""
    for p in precision_schedule():
        s = eval_linear_form(0, n1, n2, a1, a2, p)
        k_lo = math.floor(s.lo + Fraction(1, 2))
        k_hi = math.floor(s.hi + Fraction(1, 2))
        if k_lo == k_hi and not (s.is_exact() and s.lo - math.floor(s.lo) == Fraction(1, 2)):
            return -k_lo
        if s.is_exact():
            break
    raise PrecisionExhausted(f"cannot round {n1}*a1 + {n2}*a2 to a unique nearest integer")


def _abs_form(m0, n1, n2, a1, a2):
    return lambda p: abs(eval_linear_form(m0, n1, n2, a1, a2, p))


def half_shell(h: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectors with max(|n1|,|n2|) = h and first nonzero coordinate positive (4h of them)."""
    j = np.arange(-h, h + 1, dtype=np.int64)
    top = np.arange(0, h, dtype=np.int64)
    bottom = np.arange(1, h, dtype=np.int64)
    n1 = np.concatenate([np.full(j.size, h, dtype=np.int64), top, bottom])
    n2 = np.concatenate([j, np.full(top.size, h, dtype=np.int64), np.full(bottom.size, -h, dtype=np.int64)])
    return n1, n2


def screen_batch(h0: int, h1: int, f1: float, f2: float):
    """Float distances ``||n1*f1 + n2*f2||`` for all half shells h0 <= h < h1."""
    parts1, parts2, starts = [], [], []
    total = 0
    for h in range(h0, h1):
        a, b = half_shell(h)
        parts1.append(a)
        parts2.append(b)
        starts.append(total)
        total += a.size
    n1 = np.concatenate(parts1)
    n2 = np.concatenate(parts2)
    x = n1 * f1 + n2 * f2
    d = np.abs(x - np.rint(x))
    return n1, n2, d, np.asarray(starts, dtype=np.int64)


def screening_error(h: int, fa1, fa2) -> float:
    """Upper bound on |float distance - true distance| for vectors of height h."""
    (f1, e1), (f2, e2) = fa1, fa2
    return h * (e1 + e2) + (h * (abs(f1) + abs(f2)) + 1) * 2.0**-50


def _certified_min(cands: list[tuple[int, int]], a1, a2):
    """Certified argmin of ||n1*a1 + n2*a2|| over a small candidate list."""
    best = None
    for n1, n2 in cands:
        m0 = _nearest_m0(n1, n2, a1, a2)
        src = _abs_form(m0, n1, n2, a1, a2)
        if best is None:
            best = (n1, n2, m0, src)
            continue
        if certified_compare(difference(src, best[3]), 0) is Ordering.LESS:
            best = (n1, n2, m0, src)
    return best


def enumerate_best_approximations(a1: CertifiedReal, a2: CertifiedReal, height_bound: int,
                                  batch: int = 256) -> BestApproxSequence:
    """All best approximations with height ``M <= height_bound``, in increasing M."""
    if height_bound < 1:
        raise ValueError("height_bound must be >= 1")
    fa1, fa2 = a1.float_approx(), a2.float_approx()
    items: list[BestApproximation] = []
    record_src = None
    record_hi = math.inf  # float upper bound for the current record
    for h0 in range(1, height_bound + 1, batch):
        h1 = min(h0 + batch, height_bound + 1)
        n1, n2, d, starts = screen_batch(h0, h1, fa1[0], fa2[0])
        mins = np.minimum.reduceat(d, starts)
        ends = np.append(starts[1:], d.size)
        for off, h in enumerate(range(h0, h1)):
            eps = screening_error(h, fa1, fa2)
            dmin = float(mins[off])
            if dmin - eps > record_hi:
                continue
            s, e = int(starts[off]), int(ends[off])
            local = d[s:e]
            idx = np.nonzero(local - eps <= dmin + eps)[0]
            cands = [(int(n1[s + i]), int(n2[s + i])) for i in idx]
            c1, c2, m0, src = _certified_min(cands, a1, a2)
            if record_src is not None and certified_compare(difference(src, record_src), 0) is Ordering.GREATER:
                continue
            # new record: must be certifiably positive
            certified_compare(src, 0)
            zeta = src(ZETA_BITS)
            items.append(BestApproximation(len(items) + 1, m0, c1, c2, zeta))
            record_src = src
            record_hi = float(zeta.hi) * (1 + 2.0**-40)
            log.debug("best approximation nu=%d m=%s", len(items), (m0, c1, c2))
    return BestApproxSequence(a1, a2, tuple(items), height_bound)


def minkowski_check(seq: BestApproxSequence) -> list[tuple[int, bool]]:
    """Certify zeta_nu * M_{nu+1}^2 <= 1 for each consecutive pair."""
    out = []
    for k in range(1, len(seq)):
        M_next = seq[k + 1].M
        src = seq.zeta_source(k)
        out.append((k, certified_compare(src, Fraction(1, M_next * M_next)) is Ordering.LESS))
    return out


def det_condition(bm1: BestApproximation, bm2: BestApproximation, bm3: BestApproximation) -> bool:
    return det3(bm1.m, bm2.m, bm3.m) != 0


def det3(r1, r2, r3) -> int:
    (a, b, c), (d, e, f), (g, h, i) = r1, r2, r3
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


def d_nu(bm2: BestApproximation, bm3: BestApproximation) -> int:
    """|m1,nu * m2,nu+1 - m2,nu * m1,nu+1|, the covolume of the projected pair."""
    return abs(bm2.m1 * bm3.m2 - bm2.m2 * bm3.m1)
