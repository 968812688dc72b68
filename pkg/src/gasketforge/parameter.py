"""Parameter planes: does the free critical orbit escape to infinity?"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from gasketforge import _kernels as K
from gasketforge.families import FIXED_B, MapFamily
from gasketforge.orbits import RETURN_TOL, map_arrays
from gasketforge.raster import Window, _run_blocks, worker_count

DEFAULT_BUDGET = 2000

# verdict codes stored in ParamGrid.verdicts (and as GLB1 labels)
EXCLUDED = 0
ESCAPING = 1
NON_ESCAPING = 2

_KIND = {"mcmullen": 0, "sextic": 1, "sextic_b": 2, "quadratic": 3}
_SEXTIC_B_CRIT = 4 + 3 * math.sqrt(2)  # double root of the critical equation when b is fixed


@njit(cache=True, nogil=True)
def _certified_radius(num, den, d):
    top = abs(num[d])
    lower = 0.0
    for k in range(d):
        lower += abs(num[k])
    s = 0.0
    for k in range(den.shape[0]):
        s += abs(den[k])
    return max(2.0, (2.0 * s + lower) / top)


@njit(cache=True, nogil=True)
def _sextic_num(a, b, num):
    one = np.array([-1.0, 3.0, -3.0, 1.0]) + 0j
    bb = np.empty(4, np.complex128)
    bb[0] = -(b * b * b)
    bb[1] = 3 * b * b
    bb[2] = -3 * b
    bb[3] = 1
    for i in range(7):
        num[i] = 0
    for i in range(4):
        for j in range(4):
            num[i + j] += a * one[i] * bb[j]


@njit(cache=True, nogil=True)
def _setup(kind, m, n, p, num, den):
    """Fill num/den for parameter p; returns (ok, critical point, escape radius)."""
    for k in range(num.shape[0]):
        num[k] = 0
        den[k] = 0
    if kind == 0:
        if p == 0:
            return False, 0j, 0.0
        d = m + n
        num[0] = p
        num[d] = 1
        den[n] = 1
        c = np.exp(np.log(n * p / m) / d)
        return True, c, max(2.0, (2 + abs(p)) ** (1.0 / (m - 1)))
    if kind == 1:
        if p == 0 or p == 1 or p == 4 or p == -0.5:
            return False, 0j, 0.0
        e1 = (p - 1) ** 6
        a = p * (p - 4) ** 3 / (27 * e1)
        b = p * (1 + 2 * p) / (4 - p)
        _sextic_num(a, b, num)
        den[4] = 1
        if a == 0:
            return False, 0j, 0.0
        nominal = max(2.0, 2 * (1 + abs(a) * (1 + abs(b)) ** 6))
        return True, 2 * (1 + 2 * p) / (p - 4), max(nominal, _certified_radius(num, den, 6))
    if kind == 2:
        if p == 0:
            return False, 0j, 0.0
        b = FIXED_B + 0j
        _sextic_num(p, b, num)
        den[4] = 1
        nominal = max(2.0, 2 * (1 + abs(p) * (1 + abs(b)) ** 6))
        return True, _SEXTIC_B_CRIT + 0j, max(nominal, _certified_radius(num, den, 6))
    # quadratic
    num[0] = p
    num[2] = 1
    den[0] = 1
    return True, 0j, _certified_radius(num, den, 2)


@njit(cache=True, nogil=True)
def _escape_from(kind, m, n, p, num, den, num_rev, den_rev, max_iter, return_tol):
    ok, c, radius = _setup(kind, m, n, p, num, den)
    if not ok:
        return EXCLUDED, 0
    deg = num.shape[0] - 1
    for k in range(deg + 1):
        num_rev[k] = num[deg - k]
        den_rev[k] = den[deg - k]
    chart = 0
    v = c
    if abs(v) > 1.0:
        chart = 1
        v = 1.0 / v
    # step 1 is the critical value
    chart, v, _ = K.apply_map(num, den, num_rev, den_rev, chart, v)
    escaped, step = K.escape_orbit(chart, v, num, den, num_rev, den_rev, 1.0 / radius,
                                   max_iter - 1, return_tol)
    if escaped:
        return ESCAPING, step + 1
    return NON_ESCAPING, 0


@njit(cache=True, nogil=True)
def _param_rows(row0, row1, cols, rows, cx, cy, width, height, kind, m, n, deg,
                max_iter, return_tol, verdicts, steps):
    num = np.zeros(deg + 1, np.complex128)
    den = np.zeros(deg + 1, np.complex128)
    num_rev = np.zeros(deg + 1, np.complex128)
    den_rev = np.zeros(deg + 1, np.complex128)
    dx = width / cols
    dy = height / rows
    for j in range(row0, row1):
        y = cy + 0.5 * height - (j + 0.5) * dy
        for i in range(cols):
            x = cx - 0.5 * width + (i + 0.5) * dx
            code, step = _escape_from(kind, m, n, complex(x, y), num, den, num_rev, den_rev,
                                      max_iter, return_tol)
            verdicts[j * cols + i] = code
            steps[j * cols + i] = step


def _kind_args(family: MapFamily):
    if family.kind not in _KIND:
        raise ValueError(f"no parameter-plane escape test for family {family.kind!r}")
    kind = _KIND[family.kind]
    if family.kind == "mcmullen":
        m, n = family["m"], family["n"]
        return kind, m, n, m + n
    return kind, 0, 0, 6 if kind in (1, 2) else 2


def escapes(family: MapFamily, max_iter: int = DEFAULT_BUDGET, escape_radius: float | None = None):
    """Escape test for the free critical orbit at the family's current parameter.

    Returns ("escaping" | "non-escaping", step), step 0 when the orbit never
    escapes within ``max_iter``.  ``escape_radius`` overrides the family's
    default radius (it is raised to that default if smaller).
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    kind, m, n, deg = _kind_args(family)
    p = complex(family[family.free_parameter])
    num = np.zeros(deg + 1, np.complex128)
    den = np.zeros(deg + 1, np.complex128)
    ok, c, radius = _setup(kind, m, n, p, num, den)
    if not ok:
        raise ValueError(f"parameter {p} is excluded for {family.kind}")
    if escape_radius is not None:
        radius = max(radius, float(escape_radius))
    arrs = map_arrays(family.rational_map())
    chart, v = (0, complex(c)) if abs(c) <= 1 else (1, 1 / complex(c))
    chart, v, _ = K.apply_map(*arrs, chart, v)
    escaped, step = K.escape_orbit(chart, v, *arrs, 1.0 / radius, int(max_iter) - 1, RETURN_TOL)
    return ("escaping", int(step) + 1) if escaped else ("non-escaping", 0)


@dataclass
class ParamGrid:
    cols: int
    rows: int
    window: Window
    verdicts: np.ndarray  # uint32: 0 excluded, 1 escaping, 2 non-escaping
    steps: np.ndarray  # uint32 escape step, 0 = never within budget
    max_iter: int
    family: str = ""
    meta: dict = field(default_factory=dict)

    def as_array(self, layer: str = "verdicts") -> np.ndarray:
        return getattr(self, layer).reshape(self.rows, self.cols)

    @property
    def escaping_fraction(self) -> float:
        return float(np.mean(self.verdicts == ESCAPING))


def render_parameter_plane(family: MapFamily, window: Window, cols: int, rows: int,
                           max_iter: int = DEFAULT_BUDGET, workers: int | None = None) -> ParamGrid:
    """Escape verdict at every cell centre of ``window`` in the parameter plane."""
    if cols < 2 or rows < 2:
        raise ValueError("cols and rows must be >= 2")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if window.chart != "finite":
        raise ValueError("parameter windows live in the finite chart")
    kind, m, n, deg = _kind_args(family)
    total = cols * rows
    verdicts = np.zeros(total, np.uint32)
    steps = np.zeros(total, np.uint32)

    def work(r0, r1):
        _param_rows(r0, r1, cols, rows, window.center.real, window.center.imag, window.width,
                    window.height, kind, m, n, deg, int(max_iter), RETURN_TOL, verdicts, steps)

    _run_blocks(rows, worker_count(workers), work)
    if not np.any(verdicts != EXCLUDED):
        raise ValueError("window contains only excluded parameters")
    return ParamGrid(cols, rows, window, verdicts, steps, int(max_iter), family.descriptor(),
                     {"excluded": int(np.sum(verdicts == EXCLUDED))})
