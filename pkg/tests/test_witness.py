from fractions import Fraction

import mpmath
import pytest
from conftest import PAIRS
from oracles import mp_value, nearest_dist

from posapprox import (
    BestApproximation,
    BoundKind,
    Inapplicable,
    NuContext,
    PreconditionNotCertified,
    RationalInterval,
    WitnessSource,
    enumerate_best_approximations,
    lemma1_search,
    lemma2_search,
    parse_descriptor,
    r_nu,
    rational,
    theorem3_dispatch,
)
from posapprox.golden import TAU, GoldenNumber
from posapprox.witness import (
    applicable_indices,
    corollary1_point,
    corollary2_point,
    corollary3_point,
    disc_candidates,
    lemma1_candidates,
    lemma2_preconditions,
)

# Lemma 1 body points at nu=3 have max 75 > 4 * M_3 = 68 for this pair; the
# case I point has to come from the direct box search.
BOX_PAIR = ("alg:224999999999422,-510000000000000,289000000000000@[15000024021/17000000000,937501513/1062500000]",
            "alg:-5,0,1@[1,4]")


def ctx_for(name_or_pair, height, nu):
    descs = PAIRS[name_or_pair] if isinstance(name_or_pair, str) else name_or_pair
    a1, a2 = (parse_descriptor(d) for d in descs)
    seq = enumerate_best_approximations(a1, a2, height)
    return NuContext.from_sequence(seq, nu)


def mp_pair(ctx):
    return mp_value(ctx.alpha1), mp_value(ctx.alpha2)


def mp_zeta(ctx, j):
    x1, x2 = mp_pair(ctx)
    b = ctx.bm(j)
    return abs(b.m0 + b.m1 * x1 + b.m2 * x2)


def mp_bounds_hold(ctx, w):
    """Re-derive the printed bounds for a witness in mpmath, independently of the library."""
    with mpmath.workdps(60):
        tau = (1 + mpmath.sqrt(5)) / 2
        x1, x2 = mp_pair(ctx)
        value = nearest_dist(w.x1 * x1 + w.x2 * x2)
        h = max(w.x1, w.x2)
        if w.x1 <= 0 or w.x2 <= 0:
            return False
        if w.certificate.bound_kind is BoundKind.CASE_I:
            Mn = ctx.M(w.nu + 1)
            return Mn <= h <= 4 * Mn and value <= 16 / mpmath.mpf(h) ** 2
        M, Mn = ctx.M(w.nu), ctx.M(w.nu + 1)
        return (h <= 240 * mpmath.power(Mn, tau) * mpmath.power(M, -1 / tau)
                and value <= mpmath.power(24, tau) * mpmath.power(M, (1 - tau) / tau) * mpmath.power(h, -tau))


# --- exact exponent identities --------------------------------------------------


def test_golden_identities():
    assert TAU * TAU == TAU + 1
    assert 1 / TAU == TAU - 1
    assert TAU / (TAU - 1) == TAU + 1 == TAU * TAU
    assert (1 - TAU) / TAU == TAU - 2
    assert TAU - TAU * TAU == GoldenNumber(-1)


def mp_inside(iv, x, digits=55):
    return iv.lo - Fraction(1, 10**(digits - 5)) <= Fraction(mpmath.nstr(x, digits)) <= iv.hi + Fraction(1, 10**(digits - 5))


def test_a_nu_and_height_bound_constants():
    ctx = ctx_for("cbrt", 200, 4)
    M, Mn = ctx.M(4), ctx.M(5)
    with mpmath.workdps(70):
        tau = (1 + mpmath.sqrt(5)) / 2
        A = mpmath.power(M, 1 / tau) / 120
        assert mp_inside(ctx.a_source()(200), A)
        # 2 A^-1 M'^tau, written with the printed constant 240 M^(-1/tau) M'^tau
        assert mp_inside(ctx.case2_height_bound()(200), 2 / A * mpmath.power(Mn, tau))
        assert mp_inside(ctx.gap_threshold()(200), A * mpmath.power(Mn, -tau / (tau - 1)))
        assert mp_inside(ctx.case2_value_bound(50)(200),
                         mpmath.power(24, tau) * mpmath.power(M, (1 - tau) / tau) * mpmath.power(50, -tau))


# --- R_nu ---------------------------------------------------------------------------


def test_r_nu_exact_rational():
    a1, a2 = rational(1, 8), parse_descriptor(PAIRS["sqrt"][0])
    window = ((1, BestApproximation(1, 0, 1, 0, None)), (2, BestApproximation(2, 0, 2, 1, None)))
    ctx = NuContext(a1, a2, 1, window)
    assert r_nu(ctx) == RationalInterval.point(8)


def test_r_nu_against_oracle():
    ctx = ctx_for("sqrt", 50, 1)
    iv = r_nu(ctx, 100)
    with mpmath.workdps(50):
        truth = 2 / (ctx.M(2) * mp_zeta(ctx, 1))
        assert iv.lo <= Fraction(mpmath.nstr(truth, 45)) + Fraction(1, 10**40)
        assert Fraction(mpmath.nstr(truth, 45)) - Fraction(1, 10**40) <= iv.hi
    assert iv.lo > ctx.M(2)


# --- Lemma 1 ------------------------------------------------------------------------


def brute_force_lemma1(ctx):
    """Exhaustive scan of the positive part of the Lemma 1 body, with the same tie-break."""
    nu = ctx.nu
    Mn = ctx.M(nu + 1)
    xi = ctx.bm(nu).xi
    with mpmath.workdps(60):
        x1, x2 = mp_pair(ctx)
        zeta = mp_zeta(ctx, nu)
        R = 2 / (Mn * zeta)
        found = []
        for a in range(1, int(R) + 1):
            for b in range(max(1, a - Mn), min(a + Mn, int(R) - a) + 1):
                if (a, b) == xi or a + b > R:
                    continue
                v = nearest_dist(a * x1 + b * x2)
                if v < zeta:
                    found.append((max(a, b), v, (a, b)))
    found.sort()
    return [p for _, _, p in found]


@pytest.mark.parametrize("name", ["sqrt", "cbrt"])
def test_lemma1_matches_brute_force(name):
    seq_ctx = [ctx_for(name, 400, nu) for nu in range(1, 8)]
    for ctx in seq_ctx:
        if not ctx.has(ctx.nu + 1):
            continue
        oracle = brute_force_lemma1(ctx)
        assert lemma1_candidates(ctx) == oracle
        assert oracle, f"empty body at nu={ctx.nu}"
        w = lemma1_search(ctx)
        assert (w.x1, w.x2) == oracle[0]


def test_lemma1_remark_and_sandwich_cbrt():
    a1, a2 = (parse_descriptor(d) for d in PAIRS["cbrt"])
    seq = enumerate_best_approximations(a1, a2, 5000)
    for nu in range(1, 11):
        ctx = NuContext.from_sequence(seq, nu)
        w = lemma1_search(ctx)
        assert w.x1 > 0 and w.x2 > 0
        assert max(w.x1, w.x2) >= ctx.M(nu + 1)
        assert max(w.x1, w.x2) <= r_nu(ctx).lo
        assert w.certificate.holds and w.certificate.revalidate()


# --- Corollary 1 ------------------------------------------------------------------


def test_corollary1_precondition_failure():
    a1, a2 = (parse_descriptor(d) for d in PAIRS["near_rational"])
    seq = enumerate_best_approximations(a1, a2, 2000)
    # find an index where zeta_nu < 1/(8 M_{nu+1}^2), decided in mpmath
    with mpmath.workdps(40):
        x1, x2 = mp_value(a1), mp_value(a2)
        small = [nu for nu in range(1, len(seq))
                 if abs(seq[nu].m0 + seq[nu].m1 * x1 + seq[nu].m2 * x2) < mpmath.mpf(1) / (8 * seq[nu + 1].M ** 2)]
    assert small
    with pytest.raises(PreconditionNotCertified):
        corollary1_point(NuContext.from_sequence(seq, small[0]))


def test_corollary1_first_qualifying_sqrt():
    a1, a2 = (parse_descriptor(d) for d in PAIRS["sqrt"])
    seq = enumerate_best_approximations(a1, a2, 500)
    for nu in range(1, len(seq)):
        ctx = NuContext.from_sequence(seq, nu)
        try:
            w = corollary1_point(ctx)
        except PreconditionNotCertified:
            continue
        break
    assert w.source is WitnessSource.COR1 and w.certificate.bound_kind is BoundKind.CASE_I
    assert w.certificate.holds
    assert w.certificate.revalidate(200)
    assert all(c.holds for c in w.certificate.chain)
    assert mp_bounds_hold(ctx, w)


def test_corollary1_chain_arithmetic():
    # max = 4 M' makes 16 max^-2 = M'^-2 exactly
    Mn = 37
    assert Fraction(16, (4 * Mn) ** 2) == Fraction(1, Mn * Mn)


def test_corollary1_box_fallback():
    ctx = ctx_for(BOX_PAIR, 200, 3)
    body = lemma1_candidates(ctx)
    assert body and all(max(p) > 4 * ctx.M(4) for p in body)
    w = corollary1_point(ctx)
    assert w.method == "box"
    assert w.certificate.holds and w.certificate.revalidate()
    assert mp_bounds_hold(ctx, w)


# --- Corollary 2 / Lemma 2 / Corollary 3 on the near-rational pair ---------------


def test_corollary2_near_rational():
    ctx = ctx_for("near_rational", 100, 2)
    w = corollary2_point(ctx)
    assert w.source is WitnessSource.COR2 and w.certificate.bound_kind is BoundKind.CASE_II
    assert (w.x1, w.x2) == (5, 6)
    assert w.certificate.holds and w.certificate.revalidate()
    assert all(c.holds for c in w.certificate.chain)
    assert mp_bounds_hold(ctx, w)


def test_lemma2_toy_lattice():
    pts = disc_candidates((1, 0), (0, 1), 1, 1)
    assert ((5, 5), (5, 5)) in pts
    assert all(x > 0 and y > 0 for (x, y), _ in pts)


def test_lemma2_near_rational():
    ctx = ctx_for("near_rational", 100, 3)
    w = lemma2_search(ctx)
    b1, b2 = ctx.bm(3), ctx.bm(4)
    M, Mn = b1.M, b2.M
    D = abs(b1.m1 * b2.m2 - b1.m2 * b2.m1)
    assert 2 * D >= M * M
    c = Fraction(5 * D, M)
    assert (w.x1 - c) ** 2 + (w.x2 - c) ** 2 <= Fraction(16 * D * D, M * M)
    l1, l2 = w.coefficients
    assert (w.x1, w.x2) == (l1 * b1.m1 + l2 * b2.m1, l1 * b1.m2 + l2 * b2.m2)
    assert abs(l1) * M <= 20 * Mn and abs(l2) <= 20
    assert max(w.x1, w.x2) <= 20 * Mn
    with mpmath.workdps(50):
        x1, x2 = mp_pair(ctx)
        assert nearest_dist(w.x1 * x1 + w.x2 * x2) < 40 * mpmath.mpf(Mn) / M * mp_zeta(ctx, 3)


def test_corollary3_near_rational():
    ctx = ctx_for("near_rational", 100, 3)
    w = corollary3_point(ctx)
    assert w.source is WitnessSource.COR3 and (w.x1, w.x2) == (15, 12)
    assert w.certificate.holds and w.certificate.revalidate()
    assert all(c.holds for c in w.certificate.chain)
    assert mp_bounds_hold(ctx, w)


def test_lemma2_rejects_zero_determinant():
    # indices 1, 2, 3 of the cube-root sequence are linearly dependent
    ctx = ctx_for("cbrt", 200, 2)
    with pytest.raises(PreconditionNotCertified, match="determinant"):
        lemma2_preconditions(ctx)
    with pytest.raises(PreconditionNotCertified):
        corollary3_point(ctx)


# --- dispatcher ----------------------------------------------------------------------


CBRT_DISPATCH = [
    (3, "I", (5, 8)), (4, "I", (24, 3)), (5, "I", (18, 38)), (6, "I", (42, 41)), (8, "I", (60, 79)),
    (9, "I", (1, 100)), (10, "I", (161, 99)), (11, "I", (484, 397)), (12, "I", (62, 279)),
]


def test_dispatch_cbrt_recorded(seq_cache):
    seq = seq_cache("cbrt", 5000)
    got = []
    for nu in applicable_indices(seq):
        if seq[nu + 2].M > 5000:
            continue
        ctx = NuContext.from_sequence(seq, nu)
        w = theorem3_dispatch(ctx)
        assert w.certificate.holds and w.certificate.revalidate()
        assert mp_bounds_hold(ctx, w)
        got.append((nu, w.certificate.bound_kind.value, (w.x1, w.x2)))
    assert got[: len(CBRT_DISPATCH)] == CBRT_DISPATCH


def test_dispatch_near_rational_reaches_case_two():
    a1, a2 = (parse_descriptor(d) for d in PAIRS["near_rational"])
    seq = enumerate_best_approximations(a1, a2, 2000)
    out = {nu: theorem3_dispatch(NuContext.from_sequence(seq, nu)) for nu in applicable_indices(seq)}
    assert out[2].source is WitnessSource.COR2
    assert out[3].source is WitnessSource.COR3
    for w in out.values():
        assert w.certificate.holds and w.certificate.revalidate()


def test_dispatch_needs_neighbours():
    ctx = ctx_for("sqrt", 100, 1)
    with pytest.raises(Inapplicable):
        theorem3_dispatch(ctx)
