"""Dense complex polynomials, low-to-high coefficient order."""

from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as P

CLUSTER_TOL = 1e-7
RESIDUAL_TOL = 1e-9


class RootFindingError(RuntimeError):
    pass


def trim(coeffs, tol: float = 0.0) -> np.ndarray:
    c = np.asarray(coeffs, dtype=complex)
    nz = np.nonzero(np.abs(c) > tol)[0]
    if len(nz) == 0:
        return np.zeros(1, dtype=complex)
    return c[: nz[-1] + 1].copy()


def degree(coeffs) -> int:
    return len(trim(coeffs)) - 1


def horner(coeffs, z):
    acc = 0j
    for a in reversed(coeffs):
        acc = acc * z + a
    return acc


def _newton_polish(c, dc, z, iters=8):
    for _ in range(iters):
        fz = horner(c, z)
        dz = horner(dc, z)
        if dz == 0:
            break
        step = fz / dz
        z_new = z - step
        if abs(horner(c, z_new)) >= abs(fz):
            break
        z = z_new
    return z


def _sort_key(z: complex):
    return (round(z.real, 12), round(z.imag, 12))


def root_clusters(coeffs, cluster_tol: float = CLUSTER_TOL) -> list[tuple[complex, int]]:
    """Roots merged into (root, multiplicity) pairs.

    Eigenvalues of the companion matrix split a k-fold root into a ring of
    radius ~eps**(1/k); members within ``cluster_tol`` (relative to the root
    size) are merged and the merged root is refined as a simple root of the
    (k-1)-th derivative.
    """
    c = trim(coeffs)
    if len(c) < 2:
        raise RootFindingError(f"polynomial {c.tolist()} has no roots")
    raw = P.polyroots(c)
    if not np.all(np.isfinite(raw)):
        raise RootFindingError(f"companion eigenvalues did not converge for {c.tolist()}")
    dc = P.polyder(c)
    raw = [_newton_polish(c, dc, complex(r)) for r in raw]

    # single-linkage clustering
    n = len(raw)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            scale = max(1.0, abs(raw[i]), abs(raw[j]))
            if abs(raw[i] - raw[j]) <= cluster_tol * scale:
                parent[find(i)] = find(j)
    groups: dict[int, list[complex]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(raw[i])

    out = []
    for members in groups.values():
        k = len(members)
        z = complex(np.mean(members))
        if k > 1:
            dk = P.polyder(c, k - 1)
            z = _newton_polish(dk, P.polyder(dk), z, iters=20)
        out.append((complex(z), k))
    out.sort(key=lambda t: _sort_key(t[0]))
    return out


def poly_roots(coeffs) -> list[complex]:
    """All complex roots with multiplicity, sorted by (Re, Im)."""
    c = trim(coeffs)
    if len(c) < 2:
        raise RootFindingError(f"polynomial {c.tolist()} has degree < 1")
    roots = []
    for z, k in root_clusters(c):
        roots.extend([z] * k)
    bound = RESIDUAL_TOL * np.max(np.abs(c))
    for z in roots:
        r = scaled_residual(c, z)
        if r > bound:
            raise RootFindingError(
                f"root {z} of {c.tolist()} has residual {r:.3e} "
                f"after {len(c) - 1} eigenvalues and Newton polishing"
            )
    return sorted(roots, key=_sort_key)


def scaled_residual(coeffs, z: complex) -> float:
    """|p(z)|, or |z**-d p(z)| (the reversed polynomial at 1/z) when |z| > 1."""
    c = np.asarray(coeffs, dtype=complex)
    if abs(z) <= 1:
        return abs(horner(c, z))
    return abs(horner(c[::-1], 1 / z))
