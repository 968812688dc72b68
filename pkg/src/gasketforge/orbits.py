"""Single orbits: escape/trap classification, periodic cycles and their multipliers."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from gasketforge import _kernels as K
from gasketforge.maps import RationalMap, critical_points
from gasketforge.polynomials import degree
from gasketforge.sphere import FINITE, INF, SpherePoint, chordal

TOL_SUPER = 1e-9
TOL_UNIT = 1e-6
TOL_ROOT = 1e-6
Q_MAX = 64
BURN_IN = 1000
DETECT_TOL = 1e-8
REFINE_TOL = 1e-12
RETURN_TOL = 1e-12
PARABOLIC_RADIUS = 1e-3
SEED_TOL = 0.1
MULTIPLE_ROOT = 1e-2  # |multiplier - 1| below this gets the double-root polish

TRAP_KINDS = {
    "attracting": K.ATTRACTING,
    "superattracting": K.ATTRACTING,
    "parabolic-target": K.PARABOLIC,
    "siegel-trap": K.SIEGEL,
    "escape": K.ESCAPE,
}


@dataclass(frozen=True)
class Trap:
    center: SpherePoint
    radius: float
    basin_id: int
    kind: str
    q: int = 1
    # boundary radius of a star-shaped trap, sampled at equally spaced angles
    table: np.ndarray | None = field(default=None, compare=False, repr=False)


@dataclass
class TrapSet:
    traps: list[Trap] = field(default_factory=list)

    def __iter__(self):
        return iter(self.traps)

    def __len__(self):
        return len(self.traps)

    def arrays(self):
        """Flat arrays in the layout the kernels expect."""
        n = len(self.traps)
        width = max([len(t.table) for t in self.traps if t.table is not None] + [1])
        table = np.zeros((n, width))
        for i, t in enumerate(self.traps):
            if t.table is not None:
                table[i, : len(t.table)] = t.table
        return (
            np.array([t.center.chart for t in self.traps], dtype=np.int64),
            np.array([t.center.value for t in self.traps], dtype=np.complex128),
            np.array([t.radius for t in self.traps], dtype=np.float64),
            np.array([t.basin_id for t in self.traps], dtype=np.int64),
            np.array([TRAP_KINDS[t.kind] for t in self.traps], dtype=np.int64),
            np.array([t.q for t in self.traps], dtype=np.int64),
            table,
        )

    def check_disjoint(self, samples: int = 256):
        for i, a in enumerate(self.traps):
            for b in self.traps[i + 1 :]:
                if traps_overlap(a, b, samples):
                    raise ValueError(f"traps {a} and {b} overlap")


def trap_contains(t: Trap, p: SpherePoint) -> bool:
    u = p.in_chart(t.center.chart)
    if not cmath.isfinite(u):
        return False
    d = u - t.center.value
    if t.table is not None:
        return abs(d) < K.siegel_radius(t.table, math.atan2(d.imag, d.real))
    return abs(d) < t.radius


def trap_boundary(t: Trap, samples: int) -> list[SpherePoint]:
    out = []
    for k in range(samples):
        a = 2 * math.pi * k / samples
        r = t.radius if t.table is None else K.siegel_radius(t.table, a)
        out.append(SpherePoint(t.center.chart, t.center.value + r * cmath.exp(1j * a)))
    return out


def traps_overlap(a: Trap, b: Trap, samples: int = 256) -> bool:
    if trap_contains(a, b.center) or trap_contains(b, a.center):
        return True
    return any(trap_contains(b, p) for p in trap_boundary(a, samples)) or any(
        trap_contains(a, p) for p in trap_boundary(b, samples)
    )


@dataclass(frozen=True)
class OrbitOutcome:
    verdict: str  # "escaped" | "trapped" | "undecided"
    step: int
    basin_id: int
    final: SpherePoint
    iterations: int
    reason: str = ""


_REASONS = {
    K.UNDECIDED: "budget",
    K.STRADDLE: "straddles-julia",
    K.PINNED: "on-repelling-cycle",
}


def map_arrays(f: RationalMap):
    return f.num, f.den, f.num_rev, f.den_rev


def critical_arrays(f: RationalMap):
    """Critical points listed in every chart that can hold them (|value| <= 2)."""
    charts, values = [], []
    for c, _ in critical_points(f):
        for chart in (FINITE, INF):
            if c.is_infinity:
                ok, val = chart == INF, 0j
            else:
                z = c.to_complex()
                if chart == FINITE:
                    ok, val = abs(z) <= 2.0, z
                else:
                    ok, val = z != 0 and abs(z) >= 0.5, (1.0 / z if z != 0 else 0j)
            if ok:
                charts.append(chart)
                values.append(val)
    return np.array(charts, dtype=np.int64), np.array(values, dtype=np.complex128)


def iterate_classify(
    f: RationalMap,
    z0: SpherePoint,
    traps: TrapSet | None,
    max_iter: int,
    escape_radius: float | None = None,
    pixel_radius: float = 0.0,
    kappa: float = 1.0,
) -> OrbitOutcome:
    """Follow one orbit; the first verdict reached wins.

    ``escape_radius`` adds an escape trap |z| > R when ``traps`` has none.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    traps = TrapSet(list(traps) if traps is not None else [])
    if escape_radius is not None:
        if escape_radius < 2:
            raise ValueError("escape_radius must be >= 2")
        if not any(t.kind == "escape" for t in traps):
            traps.traps.append(escape_trap(escape_radius, basin_id=_next_id(traps)))
    if not isinstance(z0, SpherePoint):
        z0 = SpherePoint.from_complex(z0)
    code, basin, step, fc, fv = K.classify_point(
        z0.chart, complex(z0.value), float(pixel_radius), *map_arrays(f), *critical_arrays(f),
        *_trap_arrays(traps),
        int(max_iter), float(kappa), RETURN_TOL,
    )
    final = SpherePoint(int(fc), complex(fv))
    if code == K.ESCAPED:
        return OrbitOutcome("escaped", step, basin, final, step)
    if code == K.TRAPPED:
        return OrbitOutcome("trapped", step, basin, final, step)
    return OrbitOutcome("undecided", step, 0, final, step, _REASONS[code])


def _trap_arrays(traps: TrapSet):
    if len(traps) == 0:
        return (
            np.zeros(0, np.int64), np.zeros(0, np.complex128), np.zeros(0), np.zeros(0, np.int64),
            np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros((0, 1)),
        )
    return traps.arrays()


def _next_id(traps: TrapSet) -> int:
    return max([t.basin_id for t in traps] + [0]) + 1


def escape_trap(radius: float, basin_id: int) -> Trap:
    return Trap(SpherePoint(INF, 0j), 1.0 / radius, basin_id, "escape")


# ----------------------------------------------------------------------------
# escape radii


def infinity_superattracting(f: RationalMap) -> bool:
    return degree(f.num) >= degree(f.den) + 2


def certified_escape_radius(f: RationalMap) -> float:
    """R with |f(z)| >= 2|z| whenever |z| >= R.

    For |z| = r >= 1 and deg num >= deg den + 2:
    |f(z)| >= r (|p_d| r - sum_{k<d} |p_k|) / sum |q_k|.
    """
    if not infinity_superattracting(f):
        raise ValueError("infinity is not a superattracting fixed point of this map")
    dp = degree(f.num)
    top = abs(f.num[dp])
    lower = float(np.sum(np.abs(f.num[:dp])))
    den_sum = float(np.sum(np.abs(f.den)))
    return max(2.0, (2 * den_sum + lower) / top)


def escape_radius(family) -> float:
    f = family.rational_map()
    if family.kind == "mcmullen":
        m = family["m"]
        return max(2.0, (2 + abs(family["lam"])) ** (1.0 / (m - 1)))
    if family.kind in ("sextic", "sextic_b"):
        from gasketforge.families import FIXED_B, sextic_coefficients

        if family.kind == "sextic":
            a, b = sextic_coefficients(family["eta"])
        else:
            a, b = family["a"], FIXED_B
        nominal = max(2.0, 2 * (1 + abs(a) * (1 + abs(b)) ** 6))
        # the nominal radius is not outward for small |a|; never go below the certified one
        return max(nominal, certified_escape_radius(f))
    return certified_escape_radius(f)


def escape_is_sound(f: RationalMap, radius: float, samples: int = 10_000, seed: int = 0) -> bool:
    """Spot check |f(z)| > |z| on random points beyond ``radius``."""
    rng = np.random.default_rng(seed)
    r = radius * np.exp(rng.uniform(0, math.log(1e6), samples))
    ang = rng.uniform(0, 2 * math.pi, samples)
    w = 1 / (r * np.exp(1j * ang))
    for wi in w:
        c, v, _ = K.apply_map(*map_arrays(f), 1, complex(wi))
        if c == FINITE and abs(v) <= 1:
            return False
        if c == INF and not abs(v) < abs(wi):
            return False
    return True


# ----------------------------------------------------------------------------
# cycles


@dataclass(frozen=True)
class Cycle:
    points: tuple[SpherePoint, ...]
    period: int
    multiplier: complex

    def __iter__(self):
        return iter((list(self.points), self.period, self.multiplier))


def orbit_derivative(f: RationalMap, p: SpherePoint, steps: int):
    """f^steps(p) and the derivative of the iterate, expressed in p's chart."""
    arrs = map_arrays(f)
    c, v, d = p.chart, complex(p.value), 1 + 0j
    for _ in range(steps):
        c, v, dd = K.apply_map(*arrs, c, v)
        d *= dd
    if c != p.chart:
        if v == 0:
            return None, complex(math.inf)
        d = d * (-1 / (v * v))
        v = 1 / v
    return v, d


def _burn(f, p: SpherePoint, n: int) -> SpherePoint:
    arrs = map_arrays(f)
    c, v = p.chart, complex(p.value)
    for _ in range(n):
        c, v, _ = K.apply_map(*arrs, c, v)
    return SpherePoint(int(c), complex(v))


def _refine(f, p: SpherePoint, period: int, max_newton: int = 100):
    """Newton on f^p(u) - u in the chart of ``p``."""
    u = complex(p.value)
    chart = p.chart
    for _ in range(max_newton):
        img, d = orbit_derivative(f, SpherePoint(chart, u), period)
        if img is None:
            return None
        g = img - u
        dg = d - 1
        if abs(g) <= REFINE_TOL:
            if abs(dg) < MULTIPLE_ROOT:
                u = _polish_double(f, chart, u, period)
            return SpherePoint(chart, u).normalized()
        if dg == 0 or not cmath.isfinite(dg):
            return None
        u = u - g / dg
        if not cmath.isfinite(u):
            return None
        if abs(u) > 4:
            chart, u = 1 - chart, 1 / u
    img, _ = orbit_derivative(f, SpherePoint(chart, u), period)
    if img is not None and abs(img - u) <= REFINE_TOL:
        return SpherePoint(chart, u).normalized()
    return None


def _polish_double(f, chart: int, u: complex, period: int, max_steps: int = 60) -> complex:
    """Newton with doubled steps for a fixed point of f^p of multiplicity two
    (multiplier near 1), where plain Newton only converges linearly."""
    best, best_g = u, abs(orbit_derivative(f, SpherePoint(chart, u), period)[0] - u)
    for _ in range(max_steps):
        img, d = orbit_derivative(f, SpherePoint(chart, u), period)
        if img is None or d == 1:
            break
        step = 2 * (img - u) / (d - 1)
        if not cmath.isfinite(step) or step == 0:
            break
        u = u - step
        img, _ = orbit_derivative(f, SpherePoint(chart, u), period)
        if img is None:
            break
        g = abs(img - u)
        if g >= best_g:
            break
        best, best_g = u, g
    return best


def cycle_from_point(f: RationalMap, p: SpherePoint, period: int) -> Cycle:
    pts = [p.normalized()]
    for _ in range(period - 1):
        pts.append(_burn(f, pts[-1], 1))
    _, mult = orbit_derivative(f, pts[0], period)
    return Cycle(tuple(pts), period, mult)


def _same_cycle(a: Cycle, b: Cycle, tol: float = DETECT_TOL) -> bool:
    if a.period != b.period:
        return False
    return all(min(chordal(p, q) for q in b.points) <= tol for p in a.points)


def find_cycles(
    f: RationalMap,
    max_period: int,
    seeds,
    burn_in: int = BURN_IN,
    diagnostics: list | None = None,
) -> list[Cycle]:
    """Cycles reached from ``seeds`` after a burn-in, refined by Newton."""
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    found: list[Cycle] = []
    for seed in seeds:
        if not isinstance(seed, SpherePoint):
            seed = SpherePoint.from_complex(seed)
        z = _burn(f, seed.normalized(), burn_in)
        dists = []
        w = z
        for p in range(1, max_period + 1):
            w = _burn(f, w, 1)
            dists.append(chordal(w, z))
        close = [p + 1 for p, d in enumerate(dists) if d < DETECT_TOL]
        period = close[0] if close else int(np.argmin(dists)) + 1
        candidates = [(z, period)]
        # a seed already sitting near a cycle is refined in place too; burn-in
        # alone never lands on a repelling cycle
        own = _return_distances(f, seed.normalized(), max_period)
        if min(own) < SEED_TOL:
            candidates.append((seed.normalized(), int(np.argmin(own)) + 1))
        for start, per in candidates:
            refined = _refine(f, start, per)
            if refined is None:
                if diagnostics is not None:
                    diagnostics.append({"seed": seed, "period": per, "reason": "newton diverged"})
                continue
            cyc = _primitive(f, cycle_from_point(f, refined, per))
            if not any(_same_cycle(cyc, c) for c in found):
                found.append(cyc)
    found.sort(key=lambda c: (c.period, _point_key(min(c.points, key=_point_key))))
    return found


def _return_distances(f, p: SpherePoint, max_period: int) -> list[float]:
    out = []
    w = p
    for _ in range(max_period):
        w = _burn(f, w, 1)
        out.append(chordal(w, p))
    return out


def _primitive(f, cyc: Cycle) -> Cycle:
    """Reduce a cycle found at period p to its exact period."""
    for q in range(1, cyc.period):
        if cyc.period % q == 0 and chordal(cyc.points[q % cyc.period], cyc.points[0]) <= DETECT_TOL:
            return cycle_from_point(f, cyc.points[0], q)
    return cyc


def _point_key(p: SpherePoint):
    z = p.to_complex()
    if not cmath.isfinite(z):
        return (math.inf, 0.0)
    return (round(z.real, 9), round(z.imag, 9))


def classify_multiplier(
    m: complex, q_max: int = Q_MAX, tol0: float = TOL_SUPER, tol1: float = TOL_UNIT, tol_root: float = TOL_ROOT
) -> tuple[str, int | None]:
    """("superattracting" | "attracting" | "parabolic" | "irrationally-indifferent" | "repelling", q)."""
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    a = abs(m)
    if a <= tol0:
        return "superattracting", None
    if a < 1 - tol1:
        return "attracting", None
    if a > 1 + tol1:
        return "repelling", None
    turn = (cmath.phase(m) / (2 * math.pi)) % 1.0
    for q in range(1, q_max + 1):
        p = round(turn * q)
        if abs(m - cmath.exp(2j * math.pi * p / q)) <= tol_root:
            return "parabolic", q
    return "irrationally-indifferent", None
