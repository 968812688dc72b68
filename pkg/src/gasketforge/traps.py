"""Automatic trap construction for a family: attracting cycles, infinity, Siegel disk."""

from __future__ import annotations

import cmath
import logging
import math

import numpy as np

from gasketforge import _kernels as K
from gasketforge.maps import critical_points, eval_map
from gasketforge.orbits import (
    PARABOLIC_RADIUS,
    Q_MAX,
    Trap,
    TrapSet,
    classify_multiplier,
    escape_radius,
    escape_trap,
    find_cycles,
    infinity_superattracting,
    map_arrays,
    orbit_derivative,
    trap_boundary,
    trap_contains,
    traps_overlap,
)
from gasketforge.sphere import INF, SpherePoint

log = logging.getLogger(__name__)

INVARIANCE_SAMPLES = 64
SIEGEL_TRAP_FRACTION = 0.2
SIEGEL_BOUNDARY_POINTS = 1_000_000
SIEGEL_TABLE_SIZE = 1 << 16


class NoBasinError(ValueError):
    pass


def _maps_into(f, t: Trap, target: Trap, steps: int, slack: float) -> bool:
    shrunk = Trap(target.center, target.radius * slack, target.basin_id, target.kind)
    for p in trap_boundary(t, INVARIANCE_SAMPLES):
        img = p
        for _ in range(steps):
            img = eval_map(f, img)
        if not trap_contains(shrunk, img):
            return False
    return True


def _cycle_traps(f, cyc, basin_id, kind, existing, slack, r0=0.5):
    """One disk per cycle point, shrunk until f^p maps each into itself."""
    r = r0
    for _ in range(60):
        traps = [Trap(p, r, basin_id, kind) for p in cyc.points]
        ok = all(_maps_into(f, t, t, cyc.period, slack) for t in traps)
        ok = ok and not any(traps_overlap(a, b) for a in traps for b in existing)
        ok = ok and not any(traps_overlap(a, b) for i, a in enumerate(traps) for b in traps[i + 1 :])
        if ok:
            return traps
        r *= 0.7
    raise NoBasinError(f"could not fit an invariant trap around cycle {cyc.points}")


def siegel_boundary(f, n_points: int = SIEGEL_BOUNDARY_POINTS):
    """Orbit of the critical value on the boundary of the Siegel disk at infinity.

    The critical point on the boundary is the one whose orbit does not fall
    into the disk centre; its orbit is dense in the boundary.
    """
    arrs = map_arrays(f)
    best = None
    for c, _ in critical_points(f):
        if c.chart == INF and c.value == 0:
            continue
        ch, v = c.chart, complex(c.value)
        hit = False
        for _ in range(8):
            ch, v, _d = K.apply_map(*arrs, ch, v)
            if ch == INF and abs(v) < 1e-9:
                hit = True
                break
        if not hit:
            best = c
            break
    if best is None:
        raise NoBasinError("both critical points fall into the Siegel centre")
    return K.orbit_w(*arrs, best.chart, complex(best.value), n_points)


def siegel_table(pts: np.ndarray, size: int = SIEGEL_TABLE_SIZE) -> np.ndarray:
    """Polar profile of the boundary: smallest radius per angular bin, empty
    bins filled by periodic linear interpolation."""
    ang = np.angle(pts) % (2 * math.pi)
    idx = np.minimum((ang / (2 * math.pi) * size).astype(int), size - 1)
    table = np.full(size, np.inf)
    np.minimum.at(table, idx, np.abs(pts))
    filled = np.isfinite(table)
    if filled.sum() < size // 2:
        raise NoBasinError("critical orbit does not wind around the Siegel centre")
    x = np.nonzero(filled)[0]
    return np.interp(np.arange(size), x, table[x], period=size)


def siegel_trap(f, theta: float, basin_id: int, mode: str = "boundary", fraction: float = SIEGEL_TRAP_FRACTION) -> Trap:
    """Trap around the Siegel centre at infinity (w-chart origin).

    ``mode="disk"``: round disk of radius ``fraction`` times the distance to
    the nearest finite critical value.  ``mode="boundary"``: the star-shaped
    region cut out by the critical orbit on the disk boundary.
    """
    centre = SpherePoint(INF, 0j)
    if mode == "disk":
        cvs = []
        for c, _ in critical_points(f):
            img = eval_map(f, c)
            if img.chart == INF and img.value == 0:
                continue
            w = img.in_chart(INF)
            if cmath.isfinite(w):
                cvs.append(abs(w))
        r = fraction * min(cvs)
        return Trap(centre, r, basin_id, "siegel-trap")
    pts = siegel_boundary(f)
    table = siegel_table(pts)
    return Trap(centre, float(table.min()), basin_id, "siegel-trap", table=table)


def validate_siegel_trap(f, t: Trap, steps: int = 200) -> bool:
    """Samples inside the trap must stay near it: 1.5 r for the disk, 1.05 x profile otherwise."""
    grow = 1.5 if t.table is None else 1.05
    table = None if t.table is None else t.table * grow
    loose = Trap(t.center, t.radius * grow, t.basin_id, t.kind, table=table)
    for p in trap_boundary(t, INVARIANCE_SAMPLES):
        q = SpherePoint(p.chart, t.center.value + 0.9 * (p.value - t.center.value))
        for _ in range(steps):
            q = eval_map(f, q)
            if not trap_contains(loose, q):
                return False
    return True


def build_traps(family, max_period: int = 16, slack: float = 1.0, siegel_mode: str = "boundary",
                siegel_fraction: float = SIEGEL_TRAP_FRACTION):
    """TrapSet plus legend {basin_id: (kind, representative point)} for a family."""
    f = family.rational_map()
    traps: list[Trap] = []
    legend: dict[int, tuple[str, SpherePoint]] = {}
    next_id = 1
    esc_r = None
    if infinity_superattracting(f):
        esc_r = escape_radius(family)
        t = escape_trap(esc_r, next_id)
        traps.append(t)
        legend[next_id] = ("superattracting", SpherePoint(INF, 0j))
        next_id += 1
    if family.kind == "siegel":
        t = siegel_trap(f, family["theta"], next_id, siegel_mode, siegel_fraction)
        if not validate_siegel_trap(f, t):
            raise NoBasinError("Siegel trap failed the forward-invariance check")
        traps.append(t)
        legend[next_id] = ("siegel-trap", SpherePoint(INF, 0j))
        next_id += 1

    seeds = [c for c, _ in critical_points(f)]
    has_parabolic = False
    for cyc in find_cycles(f, max_period, seeds):
        if any(trap_contains(t, p) for t in traps for p in cyc.points):
            continue
        kind, q = classify_multiplier(cyc.multiplier, Q_MAX)
        if kind in ("superattracting", "attracting"):
            new = _cycle_traps(f, cyc, next_id, kind, traps, slack)
        elif kind == "parabolic":
            has_parabolic = True
            new = [Trap(p, PARABOLIC_RADIUS, next_id, "parabolic-target", q=q * cyc.period) for p in cyc.points]
        else:
            continue
        traps.extend(new)
        legend[next_id] = (kind, cyc.points[0])
        next_id += 1
    if not traps:
        raise NoBasinError(f"no classifiable basin for {family.descriptor()}")
    ts = TrapSet(traps)
    ts.check_disjoint()
    return ts, legend, {"escape_radius": esc_r, "has_parabolic": has_parabolic}
