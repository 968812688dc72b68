"""Raster-level check of the generalized Sierpinski gasket conditions.

Complementary components are 4-connected runs of equal nonzero basin label.
The four conditions become: no holes (Jordan heuristic), at most N contact
clusters per touching pair, no triple points, connected contact graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import ndimage
from scipy.spatial import cKDTree

from gasketforge.raster import LabeledGrid, Window

MIN_AREA_FRACTION = 5e-5
TOUCH_RADIUS = 2

_EIGHT = np.ones((3, 3), dtype=bool)


@njit(cache=True)
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@njit(cache=True)
def _two_pass(labels):
    rows, cols = labels.shape
    out = np.zeros((rows, cols), dtype=np.int64)
    parent = np.zeros(rows * cols + 1, dtype=np.int64)
    nxt = 1
    for r in range(rows):
        for c in range(cols):
            b = labels[r, c]
            if b == 0:
                continue
            up = out[r - 1, c] if r > 0 and labels[r - 1, c] == b else 0
            left = out[r, c - 1] if c > 0 and labels[r, c - 1] == b else 0
            if up == 0 and left == 0:
                parent[nxt] = nxt
                out[r, c] = nxt
                nxt += 1
            elif up == 0:
                out[r, c] = left
            elif left == 0:
                out[r, c] = up
            else:
                a = _find(parent, up)
                d = _find(parent, left)
                if a < d:
                    parent[d] = a
                elif d < a:
                    parent[a] = d
                out[r, c] = min(a, d)
    # dense ids in row-major first-encounter order
    remap = np.zeros(nxt, dtype=np.int64)
    count = 0
    for r in range(rows):
        for c in range(cols):
            p = out[r, c]
            if p == 0:
                continue
            root = _find(parent, p)
            if remap[root] == 0:
                count += 1
                remap[root] = count
            out[r, c] = remap[root]
    return out, count


@dataclass
class Component:
    id: int
    area: int
    basin: int
    bbox: tuple[int, int, int, int]  # row0, col0, row1, col1 (exclusive)
    holes: int
    touches_border: bool


@dataclass
class ComponentMap:
    ids: np.ndarray  # (rows, cols) int, 0 = Julia/undecided
    components: dict[int, Component]
    window: Window | None = None

    @property
    def shape(self):
        return self.ids.shape


def _holes(mask: np.ndarray) -> int:
    """Bounded 8-connected regions of the complement of ``mask`` (1-cell padded)."""
    padded = np.pad(~mask, 1, constant_values=True)
    lab, n = ndimage.label(padded, structure=_EIGHT)
    outside = np.unique(np.concatenate([lab[0], lab[-1], lab[:, 0], lab[:, -1]]))
    return int(n - np.count_nonzero(outside))


def label_components(grid) -> ComponentMap:
    """4-connected components of equal nonzero label, ids in row-major first-encounter order."""
    if isinstance(grid, LabeledGrid):
        arr, window = grid.as_array(), grid.window
    else:
        arr, window = np.asarray(grid), None
    ids, count = _two_pass(np.ascontiguousarray(arr, dtype=np.int64))
    comps: dict[int, Component] = {}
    if count:
        slices = ndimage.find_objects(ids)
        areas = np.bincount(ids.ravel(), minlength=count + 1)
        rows, cols = ids.shape
        for k, sl in enumerate(slices, start=1):
            sub = ids[sl] == k
            r0, r1, c0, c1 = sl[0].start, sl[0].stop, sl[1].start, sl[1].stop
            first = np.argmax(sub.ravel())
            basin = int(arr[sl].ravel()[first])
            border = r0 == 0 or c0 == 0 or r1 == rows or c1 == cols
            comps[k] = Component(k, int(areas[k]), basin, (r0, c0, r1, c1), _holes(sub), border)
    return ComponentMap(ids, comps, window)


@dataclass
class Edge:
    a: int
    b: int
    clusters: int
    centroids: list[tuple[float, float]]  # (x, y) = (col, row)


@dataclass
class ContactGraph:
    nodes: dict[int, int]  # retained component id -> area
    edges: list[Edge]
    triple_points: list[tuple[int, int]]  # (x, y)
    touch_radius: int
    min_area: int

    def edge(self, a: int, b: int) -> Edge | None:
        a, b = min(a, b), max(a, b)
        for e in self.edges:
            if (e.a, e.b) == (a, b):
                return e
        return None


def default_min_area(cells: int) -> int:
    return max(1, int(math.ceil(MIN_AREA_FRACTION * cells)))


def _offsets(t: int):
    for dy in range(-t, t + 1):
        for dx in range(-t, t + 1):
            if (dy, dx) > (0, 0):  # one of each +/- pair
                yield dy, dx


def _shift(a: np.ndarray, dy: int, dx: int, fill=0):
    """out[r, c] = a[r + dy, c + dx] (fill outside)."""
    out = np.full_like(a, fill)
    rows, cols = a.shape
    rs = slice(max(0, -dy), min(rows, rows - dy))
    cs = slice(max(0, -dx), min(cols, cols - dx))
    rs2 = slice(rs.start + dy, rs.stop + dy)
    cs2 = slice(cs.start + dx, cs.stop + dx)
    out[rs, cs] = a[rs2, cs2]
    return out


def _clusters(points: np.ndarray, link: float) -> list[np.ndarray]:
    """Single-linkage clusters (Euclidean distance <= link)."""
    n = len(points)
    parent = np.arange(n)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in cKDTree(points).query_pairs(link + 1e-9):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(n)])
    return [points[roots == r] for r in np.unique(roots)]


def build_contact_graph(cm: ComponentMap, touch_radius: int = TOUCH_RADIUS, min_area: int | None = None) -> ContactGraph:
    """Edges between retained components that come within ``touch_radius``
    (Chebyshev) of each other across Julia cells only."""
    if touch_radius < 1:
        raise ValueError("touch_radius must be >= 1")
    if min_area is None:
        min_area = default_min_area(cm.ids.size)
    keep = {k: c.area for k, c in cm.components.items() if c.area >= min_area}
    lut = np.zeros(max(cm.components, default=0) + 1, dtype=np.int64)
    for k in keep:
        lut[k] = k
    ids = lut[cm.ids]  # discarded components count as Julia cells
    rows, cols = ids.shape
    rr, cc = np.mgrid[0:rows, 0:cols]

    pairs: dict[tuple[int, int], list[np.ndarray]] = {}
    for dy, dx in _offsets(touch_radius):
        other = _shift(ids, dy, dx)
        hit = (ids != 0) & (other != 0) & (ids != other)
        steps = max(abs(dy), abs(dx))
        for s in range(1, steps):
            my, mx = round(s * dy / steps), round(s * dx / steps)
            hit &= _shift(ids, my, mx, fill=1) == 0
        if not hit.any():
            continue
        a, b = ids[hit], other[hit]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        mid = np.stack([cc[hit] + dx / 2, rr[hit] + dy / 2], axis=1)
        for key in set(zip(lo.tolist(), hi.tolist())):
            sel = (lo == key[0]) & (hi == key[1])
            pairs.setdefault(key, []).append(mid[sel])

    edges = []
    for (a, b) in sorted(pairs):
        pts = np.unique(np.concatenate(pairs[(a, b)]), axis=0)
        groups = _clusters(pts, 2 * touch_radius)
        cents = sorted((float(g[:, 0].mean()), float(g[:, 1].mean())) for g in groups)
        edges.append(Edge(a, b, len(groups), cents))

    triples = _triple_points(ids, touch_radius)
    return ContactGraph(keep, edges, triples, touch_radius, min_area)


def _triple_points(ids: np.ndarray, t: int) -> list[tuple[int, int]]:
    """Centres (clustered) of (2t+1)^2 windows meeting >= 3 retained components."""
    rows, cols = ids.shape
    found = []
    strip = 64
    for r0 in range(0, rows, strip):
        r1 = min(rows, r0 + strip)
        lo, hi = max(0, r0 - t), min(rows, r1 + t)
        block = ids[lo:hi]
        stack = np.stack([_shift(block, dy, dx) for dy in range(-t, t + 1) for dx in range(-t, t + 1)])
        stack.sort(axis=0)
        distinct = (stack[0] != 0).astype(np.int64) + np.count_nonzero(
            (np.diff(stack, axis=0) != 0) & (stack[1:] != 0), axis=0
        )
        ys, xs = np.nonzero(distinct[r0 - lo : r0 - lo + (r1 - r0)] >= 3)
        found.extend(zip((xs).tolist(), (ys + r0).tolist()))
    if not found:
        return []
    groups = _clusters(np.array(found, dtype=float), 2 * t)
    return sorted((int(round(g[:, 0].mean())), int(round(g[:, 1].mean()))) for g in groups)


class NothingToCheck(ValueError):
    pass


@dataclass
class GasketReport:
    components: list[dict]
    edges: list[dict]
    triple_points: list[tuple[int, int]]
    verdicts: dict
    passed: bool
    params: dict
    notes: list[str] = field(default_factory=list)

    def to_dict(self):
        return {
            "components": self.components,
            "edges": self.edges,
            "triple_points": [list(p) for p in self.triple_points],
            "verdicts": self.verdicts,
            "pass": self.passed,
            "params": self.params,
            "notes": self.notes,
        }


def _connected(nodes, edges) -> bool:
    nodes = list(nodes)
    if not nodes:
        return False
    adj = {n: set() for n in nodes}
    for e in edges:
        adj[e.a].add(e.b)
        adj[e.b].add(e.a)
    seen = {nodes[0]}
    stack = [nodes[0]]
    while stack:
        for m in adj[stack.pop()]:
            if m not in seen:
                seen.add(m)
                stack.append(m)
    return len(seen) == len(nodes)


def check_gasket(cg: ContactGraph, cm: ComponentMap, N: int) -> GasketReport:
    if N < 1:
        raise ValueError("N must be >= 1")
    if len(cg.nodes) < 2:
        raise NothingToCheck("nothing to check: fewer than 2 retained components")
    comps = []
    jordan = True
    for k in sorted(cg.nodes):
        c = cm.components[k]
        # a border component is the one through the point at the far side of
        # the chart: on the sphere it is a disk iff exactly one hole remains
        holes = max(c.holes - 1, 0) if c.touches_border else c.holes
        jordan &= holes == 0
        comps.append({"id": k, "area": c.area, "holes": holes, "basin": c.basin,
                      "border": c.touches_border})
    max_contacts = max((e.clusters for e in cg.edges), default=0)
    verdicts = {
        "jordan_heuristic": bool(jordan),
        "max_pair_contacts": int(max_contacts),
        "pair_contacts_ok": bool(max_contacts <= N),
        "triple_point_free": not cg.triple_points,
        "contact_graph_connected": _connected(cg.nodes, cg.edges),
    }
    passed = (verdicts["jordan_heuristic"] and verdicts["pair_contacts_ok"]
              and verdicts["triple_point_free"] and verdicts["contact_graph_connected"])
    return GasketReport(
        comps,
        [{"a": e.a, "b": e.b, "clusters": e.clusters, "centroids": [list(p) for p in e.centroids]} for e in cg.edges],
        list(cg.triple_points),
        verdicts,
        bool(passed),
        {"N": N, "touch_radius": cg.touch_radius, "min_area": cg.min_area},
        ["jordan_heuristic counts holes only; pixels cannot certify Jordan domains",
         "contact counts are clusters of touching cell pairs, not exact boundary points"],
    )


def verify_grid(grid, N: int, touch_radius: int = TOUCH_RADIUS, min_area: int | None = None) -> GasketReport:
    cm = label_components(grid)
    return check_gasket(build_contact_graph(cm, touch_radius, min_area), cm, N)


def synth_gasket(depth: int, size: int, margin: float = 0.0) -> LabeledGrid:
    """Rasterized Sierpinski gasket after ``depth`` removal rounds.

    Outer complement is basin 1; every removed middle triangle gets its own id
    (2, 3, ... in breadth-first order); gasket cells are 0.  A cell belongs to
    a region only if its centre is at least ``margin`` cells inside it.
    """
    if depth < 1 or size < 64:
        raise ValueError("need depth >= 1 and size >= 64")
    side = 0.9 * size
    h = side * math.sqrt(3) / 2
    x0 = (size - side) / 2
    y_base = size - (size - h) / 2  # row coordinate of the base (rows grow downward)
    outer = [(x0, y_base), (x0 + side, y_base), (x0 + side / 2, y_base - h)]

    labels = np.zeros((size, size), dtype=np.uint32)
    yy, xx = np.mgrid[0:size, 0:size] + 0.5

    def inside(tri, xs, ys, m):
        # signed distances to each edge, positive inside
        d = []
        for i in range(3):
            (ax, ay), (bx, by) = tri[i], tri[(i + 1) % 3]
            cx, cy = tri[(i + 2) % 3]
            nx, ny = by - ay, -(bx - ax)
            norm = math.hypot(nx, ny)
            s = ((xs - ax) * nx + (ys - ay) * ny) / norm
            if (cx - ax) * nx + (cy - ay) * ny < 0:
                s = -s
            d.append(s)
        return (d[0] > m) & (d[1] > m) & (d[2] > m), d

    _, dist = inside(outer, xx, yy, 0.0)
    labels[(dist[0] < -margin) | (dist[1] < -margin) | (dist[2] < -margin)] = 1

    legend = {1: ("outer", None)}
    next_id = 2
    level = [outer]
    for _ in range(depth):
        nxt = []
        for a, b, c in level:
            ab = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
            bc = ((b[0] + c[0]) / 2, (b[1] + c[1]) / 2)
            ca = ((c[0] + a[0]) / 2, (c[1] + a[1]) / 2)
            mid = [ab, bc, ca]
            xs = [p[0] for p in mid]
            ys = [p[1] for p in mid]
            r0, r1 = max(0, int(min(ys)) - 1), min(size, int(max(ys)) + 2)
            c0, c1 = max(0, int(min(xs)) - 1), min(size, int(max(xs)) + 2)
            inn, _ = inside(mid, xx[r0:r1, c0:c1], yy[r0:r1, c0:c1], margin)
            labels[r0:r1, c0:c1][inn] = next_id
            legend[next_id] = ("removed", None)
            next_id += 1
            nxt.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c)])
        level = nxt
    return LabeledGrid(size, size, Window(0j, float(size), float(size)), labels.reshape(-1), legend)
