"""Julia sets, parameter planes and gasket checks for a handful of rational families."""

__version__ = "0.1.0"

from gasketforge.sphere import SpherePoint, INFINITY, chordal
from gasketforge.maps import (
    RationalMap,
    beta_fixed_point,
    critical_orbit,
    critical_points,
    derivative_z,
    eval_map,
)
from gasketforge.families import MapFamily, parse_family

__all__ = [
    "INFINITY",
    "MapFamily",
    "RationalMap",
    "SpherePoint",
    "beta_fixed_point",
    "chordal",
    "critical_orbit",
    "critical_points",
    "derivative_z",
    "eval_map",
    "parse_family",
]
