"""Small-dimensional lattice kernels in exact rational arithmetic.

``lll_reduce`` and ``short_vectors`` enumerate integer points of a body
described as ``{z : |B z|_2^2 <= bound}``.  Floating point is used only to
bound enumeration ranges, and every range is widened so the result is a
superset; membership is then decided exactly.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

Vector = list[Fraction]


def _dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def _gram_schmidt(basis: list[Vector]):
    n = len(basis)
    star: list[Vector] = []
    norms: list[Fraction] = []
    mu = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        v = list(basis[i])
        for j in range(i):
            mu[i][j] = _dot(basis[i], star[j]) / norms[j]
            v = [a - mu[i][j] * b for a, b in zip(v, star[j])]
        star.append(v)
        norms.append(_dot(v, v))
    return star, norms, mu


def lll_reduce(basis: list[Vector], delta: Fraction = Fraction(3, 4)):
    """LLL-reduce linearly independent rational vectors.

    Returns ``(reduced, transform)`` where ``reduced[i] = sum_j transform[i][j] * basis[j]``
    and ``transform`` is unimodular.
    """
    b = [list(map(Fraction, v)) for v in basis]
    n = len(b)
    u = [[int(i == j) for j in range(n)] for i in range(n)]
    _, norms, mu = _gram_schmidt(b)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                u[k] = [x - q * y for x, y in zip(u[k], u[j])]
                _, norms, mu = _gram_schmidt(b)
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            u[k], u[k - 1] = u[k - 1], u[k]
            _, norms, mu = _gram_schmidt(b)
            k = max(k - 1, 1)
    return b, u


def short_vectors(basis: list[Vector], bound: Fraction) -> list[tuple[int, ...]]:
    """All nonzero integer ``z`` with ``|sum z_i basis_i|^2 <= bound``.

    Returned as coefficient tuples with respect to the *given* basis, one
    representative per pair ``{z, -z}`` (first nonzero coefficient positive).
    """
    reduced, u = lll_reduce(basis)
    n = len(reduced)
    _, norms, mu = _gram_schmidt(reduced)
    fnorms = [float(x) for x in norms]
    fmu = [[float(x) for x in row] for row in mu]
    fbound = float(bound) * (1 + 1e-9) + 1e-300
    found: set[tuple[int, ...]] = set()
    coeffs = [0] * n

    def recurse(level: int, partial: float):
        centre = -sum(fmu[j][level] * coeffs[j] for j in range(level + 1, n))
        rem = fbound - partial
        if rem < 0:
            return
        half = math.sqrt(rem / fnorms[level])
        # +-1 widening keeps the scan a superset despite rounding
        for z in range(math.floor(centre - half) - 1, math.ceil(centre + half) + 2):
            t = (z - centre) ** 2 * fnorms[level]
            if partial + t > fbound * (1 + 1e-9):
                continue
            coeffs[level] = z
            if level == 0:
                _accept()
            else:
                recurse(level - 1, partial + t)
        coeffs[level] = 0

    def _accept():
        if not any(coeffs):
            return
        v = [Fraction(0)] * len(reduced[0])
        for c, vec in zip(coeffs, reduced):
            if c:
                v = [a + c * b for a, b in zip(v, vec)]
        if _dot(v, v) > bound:
            return
        z = tuple(sum(coeffs[i] * u[i][j] for i in range(n)) for j in range(n))
        found.add(canonical_sign(z))

    recurse(n - 1, 0.0)
    return sorted(found)


def canonical_sign(z: Sequence[int]) -> tuple[int, ...]:
    for c in z:
        if c:
            return tuple(z) if c > 0 else tuple(-x for x in z)
    return tuple(z)


def gauss_reduce(b1: Sequence[int], b2: Sequence[int]):
    """Lagrange-Gauss reduction of a planar integer basis.

    Returns ``(r1, r2, t)`` with ``r_i = t[i][0]*b1 + t[i][1]*b2`` and
    ``|r1| <= |r2|``, ``|<r1,r2>| <= |r1|^2 / 2``.
    """
    u, v = list(b1), list(b2)
    tu, tv = [1, 0], [0, 1]

    def n2(w):
        return w[0] * w[0] + w[1] * w[1]

    if n2(u) > n2(v):
        u, v, tu, tv = v, u, tv, tu
    while True:
        q = round(Fraction(u[0] * v[0] + u[1] * v[1], n2(u)))
        v = [v[0] - q * u[0], v[1] - q * u[1]]
        tv = [tv[0] - q * tu[0], tv[1] - q * tu[1]]
        if n2(v) >= n2(u):
            return u, v, (tuple(tu), tuple(tv))
        u, v, tu, tv = v, u, tv, tu


def lattice_points_in_disc(b1: Sequence[int], b2: Sequence[int], centre: Sequence[Fraction],
                           radius_sq: Fraction) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Points ``l1*b1 + l2*b2`` with squared distance to ``centre`` at most ``radius_sq``.

    Returns ``[((x1, x2), (l1, l2)), ...]`` sorted by point.
    """
    r1, r2, t = gauss_reduce(b1, b2)
    cx, cy = Fraction(centre[0]), Fraction(centre[1])
    det = r1[0] * r2[1] - r1[1] * r2[0]
    if det == 0:
        raise ValueError("degenerate basis")
    # coordinates of the centre in the reduced basis
    c1 = (cx * r2[1] - cy * r2[0]) / det
    c2 = (r1[0] * cy - r1[1] * cx) / det
    n1 = r1[0] ** 2 + r1[1] ** 2
    mu = Fraction(r1[0] * r2[0] + r1[1] * r2[1], n1)
    star2 = Fraction(det * det, n1)
    rad = float(radius_sq)
    out = []
    half2 = math.sqrt(rad / float(star2))
    for z2 in range(math.floor(float(c2) - half2) - 1, math.ceil(float(c2) + half2) + 2):
        centre1 = float(c1 - (z2 - c2) * mu)
        rem = rad - (z2 - float(c2)) ** 2 * float(star2)
        if rem < -1e-9 * (rad + 1):
            continue
        half1 = math.sqrt(max(rem, 0.0) / n1)
        for z1 in range(math.floor(centre1 - half1) - 1, math.ceil(centre1 + half1) + 2):
            x = (z1 * r1[0] + z2 * r2[0], z1 * r1[1] + z2 * r2[1])
            if (x[0] - cx) ** 2 + (x[1] - cy) ** 2 <= radius_sq:
                lam = (z1 * t[0][0] + z2 * t[1][0], z1 * t[0][1] + z2 * t[1][1])
                out.append((x, lam))
    out.sort()
    return out
