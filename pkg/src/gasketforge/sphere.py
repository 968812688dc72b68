"""Points of the Riemann sphere stored in one of two affine charts.

``FINITE`` holds z directly, ``INF`` holds w = 1/z.  Normalized points keep
``|value| <= CHART_SWITCH`` so that polynomial evaluation never overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

FINITE = 0
INF = 1
CHART_SWITCH = 1.0

_CHART_NAMES = {FINITE: "finite", INF: "infinity"}


@dataclass(frozen=True)
class SpherePoint:
    chart: int
    value: complex

    def __post_init__(self):
        if self.chart not in (FINITE, INF):
            raise ValueError(f"unknown chart {self.chart!r}")
        object.__setattr__(self, "value", complex(self.value))

    @classmethod
    def from_complex(cls, z: complex) -> "SpherePoint":
        z = complex(z)
        if cmath_isinf(z):
            return INFINITY
        return cls(FINITE, z).normalized()

    @property
    def is_infinity(self) -> bool:
        return self.chart == INF and self.value == 0

    def normalized(self) -> "SpherePoint":
        """Same point, in the chart where ``|value| <= CHART_SWITCH``."""
        if abs(self.value) <= CHART_SWITCH:
            return self
        return SpherePoint(1 - self.chart, 1.0 / self.value)

    def in_chart(self, chart: int) -> complex:
        """Coordinate in ``chart``; ``inf`` when the point is that chart's pole."""
        if chart == self.chart:
            return self.value
        if self.value == 0:
            return complex(math.inf, 0.0)
        return 1.0 / self.value

    def to_complex(self) -> complex:
        return self.in_chart(FINITE)

    def __repr__(self):
        return f"SpherePoint({_CHART_NAMES[self.chart]}, {self.value!r})"


INFINITY = SpherePoint(INF, 0j)


def cmath_isinf(z: complex) -> bool:
    return math.isinf(z.real) or math.isinf(z.imag)


def chordal(p: SpherePoint, q: SpherePoint) -> float:
    """Chordal distance on the sphere of diameter 2 (so the maximum is 2)."""
    a, b = p.value, q.value
    if p.chart == q.chart:
        return 2 * abs(a - b) / math.sqrt((1 + abs(a) ** 2) * (1 + abs(b) ** 2))
    # z = a in one chart, w = b in the other: |z - 1/w| scaled by |w|
    return 2 * abs(a * b - 1) / math.sqrt((1 + abs(a) ** 2) * (1 + abs(b) ** 2))
