"""Rational maps of the sphere given by numerator/denominator coefficients."""

from __future__ import annotations

import cmath
import math

import numpy as np
from numpy.polynomial import polynomial as P

from gasketforge.polynomials import RootFindingError, degree, horner, root_clusters, trim
from gasketforge.sphere import FINITE, INF, INFINITY, SpherePoint

COMMON_ROOT_TOL = 1e-10


class RationalMap:
    """f = num/den, stored dense low-to-high and padded to a common length.

    The reversed arrays give the map in the w = 1/z chart:
    f(1/w) = num_rev(w) / den_rev(w).
    """

    def __init__(self, numerator, denominator, check: bool = True):
        num = trim(numerator)
        den = trim(denominator)
        if not np.any(den):
            raise ValueError("denominator is identically zero")
        if not np.any(num):
            raise ValueError("numerator is identically zero")
        d = max(len(num), len(den)) - 1
        if d < 1:
            raise ValueError("constant map")
        self.degree = d
        self.num = np.zeros(d + 1, dtype=complex)
        self.den = np.zeros(d + 1, dtype=complex)
        self.num[: len(num)] = num
        self.den[: len(den)] = den
        self.num_rev = self.num[::-1].copy()
        self.den_rev = self.den[::-1].copy()
        for arr in (self.num, self.den, self.num_rev, self.den_rev):
            arr.setflags(write=False)
        if check:
            self._check_coprime()

    def _check_coprime(self):
        if degree(self.num) < 1 or degree(self.den) < 1:
            return
        num_roots = [z for z, _ in root_clusters(self.num)]
        den_roots = [z for z, _ in root_clusters(self.den)]
        for a in num_roots:
            for b in den_roots:
                if abs(a - b) <= COMMON_ROOT_TOL * max(1.0, abs(a)):
                    raise ValueError(f"numerator and denominator share the root {a}")

    def __repr__(self):
        return f"RationalMap(num={self.num.tolist()}, den={self.den.tolist()})"

    def _parts(self, p: SpherePoint):
        if p.chart == FINITE:
            return self.num, self.den
        return self.num_rev, self.den_rev

    def __call__(self, p):
        if not isinstance(p, SpherePoint):
            p = SpherePoint.from_complex(p)
        return eval_map(self, p)


def eval_map(f: RationalMap, p: SpherePoint) -> SpherePoint:
    """f(p), returned in the chart where the coordinate has modulus <= 1."""
    p = p.normalized()
    a, b = f._parts(p)
    n = horner(a, p.value)
    m = horner(b, p.value)
    if abs(n) <= abs(m):
        return SpherePoint(FINITE, n / m)
    return SpherePoint(INF, m / n)


def derivative_z(f: RationalMap, p: SpherePoint) -> complex:
    """Derivative in the chart of ``p`` (not normalized).

    Finite chart: f'(z).  Infinity chart: d/dw of 1/f(1/w).  A pole of the
    derivative gives ``complex(inf)`` instead of raising.
    """
    a, b = f._parts(p)
    u = p.value
    n, dn = horner(a, u), horner(P.polyder(a), u)
    m, dm = horner(b, u), horner(P.polyder(b), u)
    if p.chart == FINITE:
        top, bottom = dn * m - n * dm, m * m
    else:
        top, bottom = dm * n - m * dn, n * n
    if bottom == 0:
        return complex(math.inf, 0.0)
    return top / bottom


def local_degree_at_infinity(f: RationalMap) -> int:
    """Local degree of f at infinity (1 when infinity is not critical)."""
    return 2 * f.degree - 1 - degree(_critical_numerator(f))


def _critical_numerator(f: RationalMap) -> np.ndarray:
    return trim(P.polysub(P.polymul(P.polyder(f.num), f.den), P.polymul(f.num, P.polyder(f.den))))


def critical_points(f: RationalMap) -> list[tuple[SpherePoint, int]]:
    """Critical points with multiplicity (local degree - 1).

    Finite ones are roots of num'den - num den', which already includes
    multiple poles; whatever is missing from the 2d - 2 total sits at
    infinity.
    """
    crit = _critical_numerator(f)
    out: list[tuple[SpherePoint, int]] = []
    if degree(crit) >= 1:
        try:
            clusters = root_clusters(crit)
        except RootFindingError as exc:
            raise RootFindingError(f"critical-point polynomial {crit.tolist()}: {exc}") from exc
        out = [(SpherePoint.from_complex(z), k) for z, k in clusters]
    at_inf = 2 * f.degree - 2 - max(degree(crit), 0)
    if at_inf > 0:
        out.append((INFINITY, at_inf))
    return out


def critical_orbit(f: RationalMap, c: SpherePoint, steps: int) -> list[SpherePoint]:
    if steps < 1:
        raise ValueError("steps must be >= 1")
    orbit = [c.normalized()]
    for _ in range(steps):
        orbit.append(eval_map(f, orbit[-1]))
    return orbit


def beta_fixed_point(c: complex) -> tuple[complex, complex]:
    """beta fixed point of z**2 + c and its other preimage -beta."""
    beta = (1 + cmath.sqrt(1 - 4 * complex(c))) / 2
    return beta, -beta
