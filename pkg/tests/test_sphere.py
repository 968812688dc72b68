import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gasketforge.sphere import FINITE, INF, INFINITY, SpherePoint, chordal

finite_complex = st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False)


def test_from_complex_normalizes_large_values():
    p = SpherePoint.from_complex(4 + 0j)
    assert p.chart == INF
    assert p.value == 0.25


def test_infinity_round_trip():
    assert SpherePoint.from_complex(complex(math.inf, 0)).is_infinity
    assert INFINITY.to_complex().real == math.inf


def test_unknown_chart_rejected():
    with pytest.raises(ValueError):
        SpherePoint(2, 0j)


def test_chordal_zero_to_infinity_is_diameter():
    assert chordal(SpherePoint(FINITE, 0j), INFINITY) == pytest.approx(2.0)


@given(finite_complex)
def test_chordal_independent_of_chart(z):
    p = SpherePoint(FINITE, z)
    q = p.normalized()
    origin = SpherePoint(FINITE, 0.5 + 0.25j)
    assert chordal(p, origin) == pytest.approx(chordal(q, origin), abs=1e-12)


@given(finite_complex, finite_complex)
def test_chordal_symmetric_and_bounded(a, b):
    p, q = SpherePoint.from_complex(a), SpherePoint.from_complex(b)
    d = chordal(p, q)
    assert 0 <= d <= 2 + 1e-12
    assert d == pytest.approx(chordal(q, p), abs=1e-12)


@given(finite_complex)
def test_normalized_value_within_unit_disk(z):
    assert abs(SpherePoint(FINITE, z).normalized().value) <= 1.0
