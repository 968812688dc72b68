"""Numba kernels shared by the orbit engine, the dynamical renderer and the parameter plane.

A point is (chart, value) with chart 0 = z, 1 = w = 1/z.  All kernels are
pure per point, so any partition of a grid gives bit-identical output.
"""

import math

import numpy as np
from numba import njit

# trap kinds
ATTRACTING = 0
PARABOLIC = 1
SIEGEL = 2
ESCAPE = 3

# verdict codes
UNDECIDED = 0
ESCAPED = 1
TRAPPED = 2
STRADDLE = 3  # cell straddles the Julia set at trap entry
PINNED = 4  # orbit sits on a (numerically) repelling cycle

# the first-order cell radius is replaced by a sampled image bound whenever a
# critical point lies within CRIT_REACH radii of the cell centre
CRIT_REACH = 4.0
DISK_SAMPLES = 32


@njit(cache=True, nogil=True)
def horner2(c, u):
    """p(u) and p'(u)."""
    p = 0j
    dp = 0j
    for k in range(c.shape[0] - 1, -1, -1):
        dp = dp * u + p
        p = p * u + c[k]
    return p, dp


@njit(cache=True, nogil=True)
def apply_map(num, den, num_rev, den_rev, chart, v):
    """Image of (chart, v) and d(out)/d(in) in the respective charts."""
    if chart == 0:
        n, dn = horner2(num, v)
        m, dm = horner2(den, v)
    else:
        n, dn = horner2(num_rev, v)
        m, dm = horner2(den_rev, v)
    if abs(n) <= abs(m):
        # m != 0 here: num and den never vanish together
        return 0, n / m, (dn * m - n * dm) / (m * m)
    return 1, m / n, (dm * n - m * dn) / (n * n)


@njit(cache=True, nogil=True)
def disk_image_radius(num, den, num_rev, den_rev, chart, v, r, out_chart, out_v):
    """Radius about f(v) of the image of the disk |u - v| <= r, bounded by
    the largest displacement over DISK_SAMPLES boundary points (maximum
    principle).  Returns inf if a sample leaves the output chart's unit disk
    by more than a factor of two."""
    best = 0.0
    for k in range(DISK_SAMPLES):
        a = 2.0 * math.pi * k / DISK_SAMPLES
        c, w, _ = apply_map(num, den, num_rev, den_rev, chart, v + r * complex(math.cos(a), math.sin(a)))
        if c != out_chart:
            if abs(w) < 0.5:
                return np.inf
            w = 1.0 / w
        d = abs(w - out_v)
        if d > best:
            best = d
    return best


@njit(cache=True, nogil=True)
def chordal(c1, v1, c2, v2):
    a1 = abs(v1)
    a2 = abs(v2)
    if c1 == c2:
        d = abs(v1 - v2)
    else:
        d = abs(v1 * v2 - 1.0)
    return 2.0 * d / math.sqrt((1.0 + a1 * a1) * (1.0 + a2 * a2))


@njit(cache=True, nogil=True)
def siegel_radius(table, angle):
    """Boundary radius of a star-shaped trap, linearly interpolated in angle."""
    t = table.shape[0]
    x = (angle % (2 * math.pi)) / (2 * math.pi) * t
    i = int(math.floor(x))
    f = x - i
    i = i % t
    j = (i + 1) % t
    return (1.0 - f) * table[i] + f * table[j]


@njit(cache=True, nogil=True)
def classify_point(chart, v, pix_r, num, den, num_rev, den_rev, c_chart, c_value,
                   t_chart, t_center, t_radius, t_basin, t_kind, t_q, t_table,
                   max_iter, kappa, return_tol):
    """Iterate one point until it is trapped, escapes, pins, or runs out of budget.

    Returns (code, basin, step, chart, value).  ``pix_r`` > 0 switches on the
    cell test: at trap entry the cell's inscribed disk pushed forward by the
    orbit must fit within ``kappa`` times the trap scale, otherwise
    the cell is reported as STRADDLE.  The pushed-forward radius is first
    order except near the critical points ``(c_chart, c_value)``, where the
    image of the disk is bounded by sampling its boundary.
    """
    ntrap = t_chart.shape[0]
    rho = pix_r
    if abs(v) > 1.0:
        rho = pix_r / (abs(v) * abs(v))
        chart = 1 - chart
        v = 1.0 / v

    # distance history for parabolic traps
    hist_len = 1
    for t in range(ntrap):
        if t_kind[t] == PARABOLIC and 16 * t_q[t] + 1 > hist_len:
            hist_len = 16 * t_q[t] + 1
    hist = np.empty((ntrap, hist_len))

    saved_chart = chart
    saved_v = v
    power = 1
    lam = 0

    for step in range(max_iter + 1):
        for t in range(ntrap):
            tc = t_chart[t]
            if tc == chart:
                u = v
                r_here = rho
                ok = True
            elif v != 0:
                u = 1.0 / v
                r_here = rho / (abs(v) * abs(v))
                ok = True
            else:
                u = 0j
                r_here = 0.0
                ok = False
            if not ok:
                if t_kind[t] == PARABOLIC:
                    hist[t, step % hist_len] = np.inf
                continue
            dist = abs(u - t_center[t])
            kind = t_kind[t]
            if kind == SIEGEL:
                rb = siegel_radius(t_table[t], math.atan2((u - t_center[t]).imag, (u - t_center[t]).real))
                inside = dist < rb
                scale = rb - dist
            elif kind == PARABOLIC:
                hist[t, step % hist_len] = dist
                span = 16 * t_q[t]
                inside = False
                if dist < t_radius[t] and step >= span:
                    inside = dist < hist[t, (step - span) % hist_len]
                scale = t_radius[t]
            else:
                inside = dist < t_radius[t]
                scale = t_radius[t]
            if inside:
                if pix_r > 0.0:
                    if not (r_here <= kappa * scale):
                        return STRADDLE, 0, step, chart, v
                if kind == ESCAPE:
                    return ESCAPED, t_basin[t], step, chart, v
                return TRAPPED, t_basin[t], step, chart, v
        if step == max_iter:
            break
        if step > 0 and chordal(chart, v, saved_chart, saved_v) < return_tol:
            return PINNED, 0, step, chart, v
        lam += 1
        if lam == power:
            saved_chart = chart
            saved_v = v
            power *= 2
            lam = 0
        nc, nv, d = apply_map(num, den, num_rev, den_rev, chart, v)
        if pix_r > 0.0:
            near = False
            if rho < 0.25:
                for k in range(c_chart.shape[0]):
                    if c_chart[k] == chart and abs(c_value[k] - v) < CRIT_REACH * rho:
                        near = True
                        break
            if near:
                rho = max(rho * abs(d), disk_image_radius(num, den, num_rev, den_rev, chart, v, rho, nc, nv))
            else:
                rho = rho * abs(d)
        chart = nc
        v = nv
    return UNDECIDED, 0, max_iter, chart, v


@njit(cache=True, nogil=True)
def render_rows(row0, row1, cols, rows, cx, cy, width, height, win_chart, cell_test,
                num, den, num_rev, den_rev, c_chart, c_value,
                t_chart, t_center, t_radius, t_basin, t_kind, t_q, t_table,
                max_iter, kappa, return_tol, labels, iters, codes):
    dx = width / cols
    dy = height / rows
    pix_r = 0.5 * min(dx, dy) if cell_test else 0.0  # radius of the inscribed disk
    for j in range(row0, row1):
        y = cy + 0.5 * height - (j + 0.5) * dy
        for i in range(cols):
            x = cx - 0.5 * width + (i + 0.5) * dx
            code, basin, step, fc, fv = classify_point(
                win_chart, complex(x, y), pix_r, num, den, num_rev, den_rev, c_chart, c_value,
                t_chart, t_center, t_radius, t_basin, t_kind, t_q, t_table,
                max_iter, kappa, return_tol)
            k = j * cols + i
            labels[k] = basin
            iters[k] = step
            codes[k] = code


@njit(cache=True, nogil=True)
def escape_orbit(chart, v, num, den, num_rev, den_rev, inv_radius, max_iter, return_tol):
    """Escape test used by the parameter plane.

    Returns (escaped, step).  An orbit that numerically returns to itself is
    settled as non-escaping on the spot.
    """
    if abs(v) > 1.0:
        chart = 1 - chart
        v = 1.0 / v
    saved_chart = chart
    saved_v = v
    power = 1
    lam = 0
    for step in range(max_iter + 1):
        if chart == 1 and abs(v) < inv_radius:
            return True, step
        if step == max_iter:
            break
        if step > 0 and chordal(chart, v, saved_chart, saved_v) < return_tol:
            return False, 0
        lam += 1
        if lam == power:
            saved_chart = chart
            saved_v = v
            power *= 2
            lam = 0
        chart, v, d = apply_map(num, den, num_rev, den_rev, chart, v)
    return False, 0


@njit(cache=True, nogil=True)
def orbit_w(num, den, num_rev, den_rev, chart, v, n):
    """n successive images of (chart, v), as w = 1/z coordinates."""
    out = np.empty(n, dtype=np.complex128)
    for k in range(n):
        chart, v, d = apply_map(num, den, num_rev, den_rev, chart, v)
        out[k] = v if chart == 1 else 1.0 / v
    return out
