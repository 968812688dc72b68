import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gasketforge.families import MapFamily, sextic_coefficients
from gasketforge.maps import (
    RationalMap,
    beta_fixed_point,
    critical_orbit,
    critical_points,
    derivative_z,
    eval_map,
    local_degree_at_infinity,
)
from gasketforge.sphere import FINITE, INF, INFINITY, SpherePoint, chordal

S = SpherePoint.from_complex


def test_ushiki_finite_orbit(ushiki):
    f = ushiki.rational_map()
    assert abs(f(-2 / 3).to_complex() - 4 / 3) <= 1e-12
    assert abs(f(4 / 3).to_complex() - 4 / 3) <= 1e-12


def test_mcmullen_fixed_point(mcmullen33):
    f = mcmullen33.rational_map()
    r = 1 / math.sqrt(2)
    assert abs(f(r).to_complex() - r) <= 1e-12


def test_pole_maps_to_infinity(ushiki):
    f = ushiki.rational_map()
    assert f(0j).is_infinity


def test_rejects_common_factor():
    with pytest.raises(ValueError):
        RationalMap([-1, 0, 1], [1, 1])  # (z-1)(z+1)/(z+1)


def test_derivatives():
    r = 1 / math.sqrt(2)
    f = MapFamily.mcmullen(3, 3, 1 / 8).rational_map()
    assert abs(derivative_z(f, S(r))) < 1e-12
    q = MapFamily.quadratic(0).rational_map()
    assert derivative_z(q, S(1)) == pytest.approx(2)


def test_ushiki_multiplier_against_finite_difference(ushiki):
    f = ushiki.rational_map()
    z, h = 4 / 3, 1e-6
    fd = (f(z + h).to_complex() - f(z - h).to_complex()) / (2 * h)
    d = derivative_z(f, SpherePoint(FINITE, z))
    assert d == pytest.approx(3, abs=1e-12)
    assert abs(d - fd) <= 1e-6


def test_mcmullen_critical_points(mcmullen33):
    pts = critical_points(mcmullen33.rational_map())
    finite = [c.to_complex() for c, _ in pts if not c.is_infinity and abs(c.to_complex()) > 1e-9]
    assert len(finite) == 6
    for z in finite:
        assert abs(z) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert any(c.is_infinity for c, _ in pts)
    assert any(abs(c.to_complex()) < 1e-12 for c, _ in pts if not c.is_infinity)
    assert sum(k for _, k in pts) == 2 * 6 - 2


def test_siegel_critical_points():
    fam = MapFamily.siegel((math.sqrt(5) - 1) / 2)
    pts = sorted((c.to_complex() for c, _ in critical_points(fam.rational_map())), key=abs)
    lam = fam["lam"]
    assert len(pts) == 2
    assert min(abs(p - 1) for p in pts) < 1e-12
    assert min(abs(p - lam) for p in pts) < 1e-12


def test_ushiki_critical_points(ushiki):
    pts = critical_points(ushiki.rational_map())
    finite = [c.to_complex() for c, _ in pts if not c.is_infinity]
    real = [z for z in finite if abs(z.imag) < 1e-12]
    assert real == [pytest.approx(-2 / 3)]
    for k in (1, -1):
        assert min(abs(z - (-2 / 3) * cmath.exp(k * 2j * cmath.pi / 3)) for z in finite) < 1e-12
    # infinity is superattracting of local degree 2
    assert local_degree_at_infinity(ushiki.rational_map()) == 2


def test_fixed_b_double_critical_point():
    f = MapFamily.sextic_fixed_b(0.3).rational_map()
    c = 4 + 3 * math.sqrt(2)
    mult = [k for p, k in critical_points(f) if not p.is_infinity and abs(p.to_complex() - c) < 1e-6]
    assert mult == [2]


@settings(max_examples=25, deadline=None)
@given(st.complex_numbers(min_magnitude=0.3, max_magnitude=3, allow_nan=False, allow_infinity=False)
       .filter(lambda e: abs(e - 1) > 0.1 and abs(e - 4) > 0.1 and abs(e + 0.5) > 0.1))
def test_sextic_critical_orbit_of_b(eta):
    fam = MapFamily.sextic(eta)
    f = fam.rational_map()
    _, b = sextic_coefficients(eta)
    orbit = critical_orbit(f, S(b), 3)
    assert abs(orbit[1].to_complex()) <= 1e-9 * max(1, abs(b)) ** 6
    assert chordal(orbit[2], INFINITY) <= 1e-9
    assert chordal(orbit[3], INFINITY) <= 1e-9


def test_siegel_finite_critical_orbit():
    fam = MapFamily.siegel((math.sqrt(5) - 1) / 2)
    lam = fam["lam"]
    orbit = critical_orbit(fam.rational_map(), S(1), 2)
    assert abs(orbit[1].to_complex() - (1 + lam) / 2) <= 1e-12
    assert chordal(orbit[2], INFINITY) <= 1e-12
    # evaluated at the critical value itself, the pole is hit exactly
    assert fam.rational_map()(S((1 + lam) / 2)).is_infinity


def test_quadratic_zero_fixed():
    orbit = critical_orbit(MapFamily.quadratic(0).rational_map(), S(0), 2)
    assert all(p.to_complex() == 0 for p in orbit)


@pytest.mark.parametrize("c, beta", [(0.25, 0.5), (0, 1), (-1, (1 + math.sqrt(5)) / 2)])
def test_beta_fixed_point(c, beta):
    b, mb = beta_fixed_point(c)
    assert b == pytest.approx(beta, abs=1e-12)
    assert mb == pytest.approx(-beta, abs=1e-12)
    assert abs(b * b + c - b) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.complex_numbers(min_magnitude=0.05, max_magnitude=20, allow_nan=False, allow_infinity=False))
def test_charts_agree(z):
    """Evaluating through the w = 1/z chart gives the same sphere point."""
    f = MapFamily.mcmullen(2, 1, -16 / 27).rational_map()
    a = eval_map(f, SpherePoint(FINITE, z))
    b = eval_map(f, SpherePoint(INF, 1 / z))
    assert chordal(a, b) <= 1e-9


def test_derivative_at_infinity_in_w_chart():
    # quadratic z^2: in the w chart w -> w^2, derivative 0 at w = 0
    q = MapFamily.quadratic(0).rational_map()
    assert derivative_z(q, INFINITY) == 0
