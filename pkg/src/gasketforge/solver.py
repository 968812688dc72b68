"""Newton's method in one complex parameter for critical-orbit relations.

A relation f^{k+p}(c) = f^k(c) is differentiated with respect to the family
parameter by running the orbit on dual numbers.  McMullen maps are solved in
the critical point c itself (lambda = (m/n) c^{m+n}), which keeps every
iterate single-valued near the negative real axis.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from gasketforge.dual import DualComplex, polyval
from gasketforge.families import FIXED_B, MapFamily, format_complex, sextic_coefficients
from gasketforge.maps import critical_points, eval_map
from gasketforge.orbits import orbit_derivative
from gasketforge.sphere import SpherePoint, chordal

MAX_DEPTH = 64
DERIV_FLOOR = 1e-14
DAMPING_HALVINGS = 8
MATCH_TOL = 1e-6
STRICT_TOL = 1e-8
DISTINCT_TOL = 1e-6
MULTIPLIER_TOL = 1e-8
POLE_RATIO = 1e-300


class SolverError(RuntimeError):
    kind = "solver"

    def __init__(self, message: str, trace: list | None = None):
        super().__init__(message)
        self.trace = trace or []


class DerivativeCollapse(SolverError):
    kind = "derivative-collapse"


class Divergence(SolverError):
    kind = "divergence"


class DegeneratePeriodic(SolverError):
    kind = "degenerate-periodic"


class PoleError(SolverError):
    kind = "pole"


@dataclass(frozen=True)
class OrbitCondition:
    """f^{k+p}(c) = f^k(c) for the critical point picked by ``critical``.

    ``critical`` is ``"auto"`` (the candidate with the smallest residual at the
    seed) or an index into :func:`critical_candidates`.
    """

    family: MapFamily
    k: int
    p: int
    critical: int | str = "auto"
    max_depth: int = MAX_DEPTH

    def __post_init__(self):
        if self.k < 0 or self.p < 1:
            raise ValueError("need preperiod k >= 0 and period p >= 1")
        if self.k + self.p > self.max_depth:
            raise ValueError(f"k + p exceeds the maximum depth {self.max_depth}")
        if self.critical != "auto" and not isinstance(self.critical, int):
            raise ValueError("critical selector must be 'auto' or an integer index")


# --- family parametrizations --------------------------------------------------
#
# Each family is described in a solver variable t.  ``coeffs(t)`` returns dual
# (num, den) coefficient lists, ``crits(t)`` the free critical points as dual
# numbers, and ``to_param``/``from_param`` convert between t and the family's
# own parameter.


@dataclass
class _Param:
    coeffs: object
    crits: object
    to_param: object
    from_param: object  # family parameter -> list of t values (one per branch)
    dparam: object  # d(param)/dt at t


def _mcmullen(fam: MapFamily) -> _Param:
    m, n = fam["m"], fam["n"]
    d = m + n

    def lam(t):
        return (m / n) * t ** d

    def coeffs(t):
        num = [lam(t)] + [0] * (d - 1) + [1]
        den = [0] * n + [1]
        return num, den

    def from_param(value):
        root = cmath.exp(cmath.log(n * complex(value) / m) / d)
        ts = [root * cmath.exp(2j * math.pi * j / d) for j in range(d)]
        return sorted(ts, key=lambda z: (round(z.real, 12), round(z.imag, 12)))

    return _Param(
        coeffs=coeffs,
        crits=lambda t: [t],
        to_param=lambda t: complex(lam(DualComplex.lift(t)).value),
        from_param=from_param,
        dparam=lambda t: (m / n) * d * complex(t) ** (d - 1),
    )


def _sextic(fam: MapFamily) -> _Param:
    def coeffs(t):
        a, b = sextic_coefficients(t)
        return _sextic_num(a, b), [0, 0, 0, 0, 1]

    return _Param(
        coeffs=coeffs,
        crits=lambda t: [2 * (1 + 2 * t) / (t - 4)],
        to_param=complex,
        from_param=lambda v: [complex(v)],
        dparam=lambda t: 1,
    )


def _sextic_num(a, b):
    # a (z-1)^3 (z-b)^3 expanded, ascending powers
    one = [-1, 3, -3, 1]  # (z-1)^3
    bb = [-(b ** 3), 3 * b ** 2, -3 * b, 1]  # (z-b)^3
    out = [0] * 7
    for i, x in enumerate(one):
        for j, y in enumerate(bb):
            out[i + j] = out[i + j] + x * y
    return [a * c for c in out]


def _free_crits(fam: MapFamily, exclude) -> list[complex]:
    pts = []
    for cp, _ in critical_points(fam.rational_map()):
        if cp.is_infinity:
            continue
        z = cp.to_complex()
        if all(abs(z - e) > 1e-8 for e in exclude):
            pts.append(z)
    return pts


def _sextic_b(fam: MapFamily) -> _Param:
    # with b fixed the critical points do not move with a
    crit = _free_crits(fam, (0.0, 1.0, FIXED_B))
    return _Param(
        coeffs=lambda t: (_sextic_num(t, FIXED_B), [0, 0, 0, 0, 1]),
        crits=lambda t: [DualComplex.lift(c) for c in crit],
        to_param=complex,
        from_param=lambda v: [complex(v)],
        dparam=lambda t: 1,
    )


def _quadratic(fam: MapFamily) -> _Param:
    return _Param(
        coeffs=lambda t: ([t, 0, 1], [1]),
        crits=lambda t: [DualComplex.lift(0)],
        to_param=complex,
        from_param=lambda v: [complex(v)],
        dparam=lambda t: 1,
    )


def _basilica(fam: MapFamily) -> _Param:
    return _Param(
        coeffs=lambda t: ([t], [0, 2, 1]),
        crits=lambda t: [DualComplex.lift(-1)],
        to_param=complex,
        from_param=lambda v: [complex(v)],
        dparam=lambda t: 1,
    )


def _siegel(fam: MapFamily) -> _Param:
    e = cmath.exp(2j * math.pi * fam["theta"])

    def coeffs(t):
        s = (1 + t) / 2
        return [-t, 0, 1], [-(e * s), e]

    return _Param(
        coeffs=coeffs,
        crits=lambda t: [DualComplex.lift(1), DualComplex.lift(t)],
        to_param=complex,
        from_param=lambda v: [complex(v)],
        dparam=lambda t: 1,
    )


_PARAMS = {
    "mcmullen": _mcmullen,
    "sextic": _sextic,
    "sextic_b": _sextic_b,
    "quadratic": _quadratic,
    "basilica": _basilica,
    "siegel": _siegel,
}


def _param(fam: MapFamily) -> _Param:
    return _PARAMS[fam.kind](fam)


# --- orbit evaluation ---------------------------------------------------------


def _apply(num, den, z: DualComplex) -> DualComplex:
    """f(z) on duals; large |z| goes through the reversed coefficients."""
    d = max(len(num), len(den)) - 1
    num = list(num) + [0] * (d + 1 - len(num))
    den = list(den) + [0] * (d + 1 - len(den))
    if abs(z.value) <= 1:
        top, bot = polyval(num, z), polyval(den, z)
    else:
        w = 1 / z
        top, bot = polyval(num[::-1], w), polyval(den[::-1], w)
    if abs(bot.value) <= POLE_RATIO * max(abs(top.value), 1e-300) or bot.value == 0:
        raise PoleError("orbit escaped to pole")
    return top / bot


def _residual(param: _Param, t: DualComplex, k: int, p: int, which: int) -> DualComplex:
    num, den = param.coeffs(t)
    crits = param.crits(t)
    z = DualComplex.lift(crits[which])
    orbit = [z]
    for _ in range(k + p):
        z = _apply(num, den, z)
        orbit.append(z)
    return orbit[k + p] - orbit[k]


def critical_candidates(family: MapFamily) -> int:
    """Number of selectable critical points for the family."""
    p = _param(family)
    t = p.from_param(family[family.free_parameter])[0]
    return len(p.crits(DualComplex.lift(t)))


def _choose(param: _Param, cond: OrbitCondition, ts: list[complex]) -> tuple[complex, int]:
    """Branch of the solver variable and critical index for a family parameter."""
    n_crit = len(param.crits(DualComplex.lift(ts[0])))
    if cond.critical != "auto":
        idx = int(cond.critical)
        if not 0 <= idx < n_crit * len(ts):
            raise ValueError(f"critical index {idx} out of range (0..{n_crit * len(ts) - 1})")
        return ts[idx // n_crit], idx % n_crit
    best = None
    for ti, t in enumerate(ts):
        for j in range(n_crit):
            try:
                r = abs(_residual(param, DualComplex.lift(t), cond.k, cond.p, j).value)
            except (PoleError, ZeroDivisionError, OverflowError):
                continue
            if not math.isfinite(r):
                continue
            if best is None or r < best[0] - 1e-15 * max(1.0, best[0]):
                best = (r, t, j)
    if best is None:
        raise PoleError("orbit escaped to pole for every critical point")
    return best[1], best[2]


def eval_condition(cond: OrbitCondition, param) -> DualComplex:
    """G(param) = f^{k+p}(c) - f^k(c) with dG/dparam."""
    P = _param(cond.family)
    t, which = _choose(P, cond, P.from_param(param))
    g = _residual(P, DualComplex.variable(t), cond.k, cond.p, which)
    return DualComplex(g.value, g.deriv / P.dparam(t))


# --- Newton -------------------------------------------------------------------


@dataclass
class SolveResult:
    family: MapFamily
    k: int
    p: int
    seed: complex
    param: complex
    residual: float
    steps: int
    strict: bool
    critical_point: complex
    critical_index: int
    trace: list = field(default_factory=list)
    multiplier: complex | None = None
    reference: complex | None = None
    near_reference: bool | None = None
    preperiod: int | None = None  # minimal values observed at the solution
    period: int | None = None

    @property
    def quadratic(self) -> bool | None:
        """Last Newton step cut the residual by at least 10x (None if no step was taken)."""
        if len(self.trace) < 2 or self.trace[-2][1] == 0:
            return None
        return self.trace[-1][1] <= 0.1 * self.trace[-2][1]

    def to_record(self) -> dict:
        rec = {
            "family": self.family.descriptor(),
            "k": self.k,
            "p": self.p,
            "seed": format_complex(self.seed),
            "param": format_complex(self.param),
            "residual": float(f"{self.residual:.17g}"),
            "steps": self.steps,
            "strict": self.strict,
            "critical_point": format_complex(self.critical_point),
            "preperiod": self.preperiod,
            "period": self.period,
            "quadratic_convergence": self.quadratic,
        }
        if self.multiplier is not None:
            rec["multiplier_abs"] = float(f"{abs(self.multiplier):.17g}")
        if self.reference is not None:
            rec["reference"] = format_complex(self.reference)
            rec["near_reference"] = bool(self.near_reference)
            rec["note"] = (
                f"matches reference to {MATCH_TOL:g}" if self.near_reference
                else f"differs from reference by {abs(self.param - self.reference):.3g}"
            )
        return rec


def _newton(P: _Param, t: complex, k: int, p: int, which: int, tol: float, max_newton: int):
    trace = []
    g = _residual(P, DualComplex.variable(t), k, p, which)
    for step in range(max_newton + 1):
        r = abs(g.value)
        trace.append((t, r))
        if r <= tol:
            return t, r, step, trace
        if step == max_newton:
            break
        if not math.isfinite(r) or abs(g.deriv) < DERIV_FLOOR:
            raise DerivativeCollapse(
                f"|dG/dparam| = {abs(g.deriv):.3g} below {DERIV_FLOOR:g} at {format_complex(t)}", trace)
        delta = g.value / g.deriv
        h = 1.0
        for _ in range(DAMPING_HALVINGS + 1):
            cand = t - h * delta
            try:
                gc = _residual(P, DualComplex.variable(cand), k, p, which)
                if math.isfinite(abs(gc.value)) and abs(gc.value) < r:
                    break
            except (PoleError, ZeroDivisionError, OverflowError):
                gc = None
            h *= 0.5
        if gc is None:
            raise PoleError("orbit escaped to pole during Newton", trace)
        if cand == t:
            # the step vanished in rounding: the residual is at its floor
            break
        t, g = cand, gc
    raise Divergence(
        f"no convergence to {tol:g} within {max_newton} Newton steps (residual {trace[-1][1]:.3g})", trace)


def _solve(cond: OrbitCondition, seed, tol: float, max_newton: int):
    if tol <= 0:
        raise ValueError("tol must be positive")
    P = _param(cond.family)
    seed = complex(seed)
    fam = cond.family.with_param(seed)  # validates admissibility
    t0, which = _choose(P, OrbitCondition(fam, cond.k, cond.p, cond.critical, cond.max_depth), P.from_param(seed))
    t, r, steps, trace = _newton(P, t0, cond.k, cond.p, which, tol, max_newton)
    param = P.to_param(t)
    crit = complex(P.crits(DualComplex.lift(t))[which].value)
    return param, r, steps, trace, crit, which


def solve_preperiodic(cond: OrbitCondition, seed, tol: float = 1e-12, max_newton: int = 100,
                      reference=None) -> SolveResult:
    """Newton on f^{k+p}(c) = f^k(c).

    The relation also holds when the orbit closes up earlier than (k, p); the
    result then carries the minimal preperiod and period actually observed and
    strictness is checked against those.  A periodic critical point is an error.
    """
    param, r, steps, trace, crit, which = _solve(cond, seed, tol, max_newton)
    fam = cond.family.with_param(param)
    k_min, p_min = minimal_preperiod(fam, crit, cond.k, cond.p)
    if cond.k >= 1 and k_min == 0:
        raise DegeneratePeriodic(
            f"degenerate: periodic (critical point {format_complex(crit)} lies on the cycle)", trace)
    strict = verify_strict_preperiodicity(fam, crit, k_min, p_min)
    res = SolveResult(fam, cond.k, cond.p, complex(seed), param, r, steps, strict, crit, which, trace,
                      preperiod=k_min, period=p_min)
    _mark_reference(res, reference)
    return res


def solve_supercycle(family: MapFamily, p: int, critical: int | str = "auto", seed=None,
                     tol: float = 1e-12, max_newton: int = 100, reference=None) -> SolveResult:
    """Parameter where a critical point has period ``p``."""
    if seed is None:
        seed = family[family.free_parameter]
    cond = OrbitCondition(family, 0, p, critical)
    param, r, steps, trace, crit, which = _solve(cond, seed, tol, max_newton)
    fam = family.with_param(param)
    _, p_min = minimal_preperiod(fam, crit, 0, p)
    res = SolveResult(fam, 0, p, complex(seed), param, r, steps, False, crit, which, trace,
                      multiplier=cycle_multiplier(fam, crit, p), preperiod=0, period=p_min)
    if abs(res.multiplier) > MULTIPLIER_TOL:
        raise SolverError(f"cycle multiplier {abs(res.multiplier):.3g} exceeds {MULTIPLIER_TOL:g}", trace)
    _mark_reference(res, reference)
    return res


def _mark_reference(res: SolveResult, reference):
    if reference is not None:
        res.reference = complex(reference)
        res.near_reference = abs(res.param - res.reference) <= MATCH_TOL


def cycle_multiplier(family: MapFamily, z0, p: int) -> complex:
    """Multiplier of f^p at z0, in z0's own chart (a chart-independent number on a cycle)."""
    _, d = orbit_derivative(family.rational_map(), SpherePoint.from_complex(z0), p)
    return d


def _orbit(f, c, n):
    pts = [SpherePoint.from_complex(c)]
    for _ in range(n):
        pts.append(eval_map(f, pts[-1]))
    return pts


def _gap(a: SpherePoint, b: SpherePoint) -> float:
    """|a - b| for finite points, chordal distance when either is infinite."""
    if a.is_infinity or b.is_infinity:
        return chordal(a, b)
    za, zb = a.to_complex(), b.to_complex()
    if math.isinf(abs(za)) or math.isinf(abs(zb)):
        return chordal(a, b)
    return abs(za - zb)


def minimal_preperiod(family: MapFamily, c, k: int, p: int) -> tuple[int, int]:
    """Smallest (j, q) with j <= k, q | p and f^{j+q}(c) = f^j(c) to 1e-6.

    Returns (k, p) unchanged when nothing smaller closes up.
    """
    orbit = _orbit(family.rational_map(), c, k + p)
    for q in (d for d in range(1, p + 1) if p % d == 0):
        for j in range(k + 1):
            if _gap(orbit[j + q], orbit[j]) <= DISTINCT_TOL:
                return j, q
    return k, p


def verify_strict_preperiodicity(family: MapFamily, c, k: int, p: int) -> bool:
    """True iff f^{k+p}(c) = f^k(c) (to 1e-8) and no earlier j < k repeats (to 1e-6).

    Orbits through infinity are compared in the chordal metric.
    """
    if k < 1:
        return False
    orbit = _orbit(family.rational_map(), c, k + p)
    if _gap(orbit[k + p], orbit[k]) > STRICT_TOL:
        return False
    return not any(_gap(orbit[j + p], orbit[j]) <= DISTINCT_TOL for j in range(k))
