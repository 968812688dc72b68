import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gasketforge.families import (
    GOLDEN_THETA,
    MapFamily,
    format_complex,
    parse_complex,
    parse_family,
    sextic_coefficients,
    siegel_finite_orbit_lambda,
)


@pytest.mark.parametrize("text, value", [
    ("1", 1 + 0j), ("-0.6+0i", -0.6 + 0j), ("2i", 2j), ("-1.5e-3-2.25i", -1.5e-3 - 2.25j), (".5", 0.5),
])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("text", ["", "1 + 2i", "abc", "1+2j", "1+i"])
def test_parse_complex_rejects(text):
    with pytest.raises(ValueError):
        parse_complex(text)


@given(st.complex_numbers(allow_nan=False, allow_infinity=False))
def test_format_round_trip(z):
    assert parse_complex(format_complex(z)) == z


def test_descriptor_round_trip():
    for fam in (MapFamily.mcmullen(3, 3, 1 / 8), MapFamily.sextic(0.7 + 1.5j), MapFamily.siegel(GOLDEN_THETA),
                MapFamily.quadratic(-1), MapFamily.basilica(0.3j), MapFamily.sextic_fixed_b(0.01)):
        assert parse_family(fam.descriptor()) == fam


def test_parse_aliases_and_defaults():
    fam = parse_family("mcmullen:m=2,n=1,λ=-0.5")
    assert fam["lam"] == -0.5
    sieg = parse_family("siegel")
    assert sieg["theta"] == GOLDEN_THETA
    assert sieg["lam"] == siegel_finite_orbit_lambda(GOLDEN_THETA)


def test_free_parameter_may_be_omitted_on_request():
    with pytest.raises(ValueError):
        parse_family("mcmullen:m=3,n=3")
    fam = parse_family("mcmullen:m=3,n=3", require_param=False)
    assert fam.free_parameter == "lam"


@pytest.mark.parametrize("text", [
    "nope:x=1", "mcmullen:m=1,n=1,lambda=1", "mcmullen:m=2,n=1,lambda=0", "sextic:eta=1",
    "sextic:eta=4", "siegel:theta=1.5", "quadratic:q=1", "mcmullen:m=2,n",
])
def test_invalid_descriptors(text):
    with pytest.raises(ValueError):
        parse_family(text)


def test_symbolic_degree():
    assert MapFamily.mcmullen(3, 3, 0.125).symbolic_degree == 6
    assert MapFamily.sextic(2j).rational_map().degree == 6


def test_sextic_coefficients_match_closed_form():
    eta = 0.68771873 + 1.49006605j
    a, b = sextic_coefficients(eta)
    assert a == pytest.approx(eta * (eta - 4) ** 3 / (27 * (eta - 1) ** 6))
    assert b == pytest.approx(eta * (1 + 2 * eta) / (4 - eta))


def test_siegel_lambda_formula():
    lam = siegel_finite_orbit_lambda(GOLDEN_THETA)
    assert lam == pytest.approx(4 * complex(math.cos(-2 * math.pi * GOLDEN_THETA),
                                            math.sin(-2 * math.pi * GOLDEN_THETA)) - 1)
