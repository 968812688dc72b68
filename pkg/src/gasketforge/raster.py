"""Dynamical-plane rasters: basin labels per cell, Julia mask, symmetry check."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from gasketforge import _kernels as K
from gasketforge.orbits import RETURN_TOL, critical_arrays, map_arrays
from gasketforge.sphere import FINITE, INF, SpherePoint
from gasketforge.traps import build_traps

ROW_BLOCK = 8


@dataclass(frozen=True)
class Window:
    center: complex = 0j
    width: float = 4.0
    height: float = 4.0
    chart: str = "finite"  # "infinity": coordinates are w = 1/z

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        for v in (self.width, self.height):
            if not (math.isfinite(v) and v > 0):
                raise ValueError("window width and height must be finite and positive")
        if self.chart not in ("finite", "infinity"):
            raise ValueError(f"unknown chart {self.chart!r}")

    @property
    def chart_id(self) -> int:
        return FINITE if self.chart == "finite" else INF

    def cell_center(self, col: float, row: float, cols: int, rows: int) -> complex:
        x = self.center.real - self.width / 2 + (col + 0.5) * self.width / cols
        y = self.center.imag + self.height / 2 - (row + 0.5) * self.height / rows
        return complex(x, y)

    def cell_of(self, z: complex, cols: int, rows: int) -> tuple[int, int]:
        """(col, row) of the cell containing window coordinate ``z``."""
        col = int(math.floor((z.real - (self.center.real - self.width / 2)) / self.width * cols))
        row = int(math.floor((self.center.imag + self.height / 2 - z.imag) / self.height * rows))
        return col, row

    def to_dict(self):
        return {"center": [self.center.real, self.center.imag], "width": self.width,
                "height": self.height, "chart": self.chart}

    @classmethod
    def from_dict(cls, d):
        c = d["center"]
        return cls(complex(c[0], c[1]), float(d["width"]), float(d["height"]), d.get("chart", "finite"))


@dataclass
class RenderConfig:
    max_iter: int | None = None  # None: 20000, or 100000 when a parabolic target exists
    cell_test: bool = True
    kappa: float = 1.0
    supersample: bool = False
    max_period: int = 16
    invariance_slack: float = 1.0
    siegel_mode: str = "boundary"
    siegel_fraction: float = 0.2
    workers: int | None = None

    def to_dict(self):
        return asdict(self)


@dataclass
class LabeledGrid:
    cols: int
    rows: int
    window: Window
    labels: np.ndarray  # uint32, row-major, top row first
    legend: dict = field(default_factory=dict)  # basin id -> (kind, representative SpherePoint)
    iters: np.ndarray | None = None
    codes: np.ndarray | None = None

    def __post_init__(self):
        self.labels = np.ascontiguousarray(self.labels, dtype=np.uint32).reshape(-1)
        if self.labels.size != self.cols * self.rows:
            raise ValueError("labels length must equal cols * rows")
        missing = set(np.unique(self.labels).tolist()) - {0} - set(self.legend)
        if missing:
            raise ValueError(f"labels {sorted(missing)} are not in the legend")

    def as_array(self) -> np.ndarray:
        return self.labels.reshape(self.rows, self.cols)

    @classmethod
    def from_array(cls, arr, window: Window | None = None, legend: dict | None = None) -> "LabeledGrid":
        arr = np.asarray(arr)
        rows, cols = arr.shape
        if legend is None:
            legend = {int(k): ("synthetic", None) for k in np.unique(arr) if k != 0}
        return cls(cols, rows, window or Window(0j, float(cols), float(rows)), arr.reshape(-1), legend)


def worker_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("GASKETFORGE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_blocks(rows: int, workers: int, fn):
    blocks = [(r, min(r + ROW_BLOCK, rows)) for r in range(0, rows, ROW_BLOCK)]
    if workers == 1:
        for b in blocks:
            fn(*b)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(lambda b: fn(*b), blocks))


def render_traps(f, traps, window: Window, cols: int, rows: int, cfg: RenderConfig, max_iter: int):
    """Classify every cell centre against ``traps``; returns (labels, iters, codes)."""
    n = cols * rows
    labels = np.zeros(n, dtype=np.int64)
    iters = np.zeros(n, dtype=np.int64)
    codes = np.zeros(n, dtype=np.int64)
    arrs = map_arrays(f) + critical_arrays(f)
    tarr = traps.arrays()

    def work(r0, r1):
        K.render_rows(r0, r1, cols, rows, window.center.real, window.center.imag,
                      window.width, window.height, window.chart_id, cfg.cell_test,
                      *arrs, *tarr, max_iter, cfg.kappa, RETURN_TOL, labels, iters, codes)

    _run_blocks(rows, worker_count(cfg.workers), work)
    return labels, iters, codes


def render_dynamical(family, window: Window, cols: int, rows: int, cfg: RenderConfig | None = None) -> LabeledGrid:
    if cols < 2 or rows < 2:
        raise ValueError("cols and rows must be >= 2")
    cfg = cfg or RenderConfig()
    traps, legend, info = build_traps(family, cfg.max_period, cfg.invariance_slack,
                                      cfg.siegel_mode, cfg.siegel_fraction)
    max_iter = cfg.max_iter
    if max_iter is None:
        max_iter = 100_000 if info["has_parabolic"] else 20_000
    f = family.rational_map()
    if not cfg.supersample:
        labels, iters, codes = render_traps(f, traps, window, cols, rows, cfg, max_iter)
    else:
        fine = Window(window.center, window.width, window.height, window.chart)
        lab2, it2, code2 = render_traps(f, traps, fine, 2 * cols, 2 * rows, cfg, max_iter)
        lab2 = lab2.reshape(2 * rows, 2 * cols)
        quad = np.stack([lab2[0::2, 0::2], lab2[0::2, 1::2], lab2[1::2, 0::2], lab2[1::2, 1::2]])
        agree = np.all(quad == quad[0], axis=0)
        labels = np.where(agree, quad[0], 0).reshape(-1)
        iters = it2.reshape(2 * rows, 2 * cols)[0::2, 0::2].reshape(-1)
        code2 = code2.reshape(2 * rows, 2 * cols)
        codes = np.where(agree, code2[0::2, 0::2], K.STRADDLE).reshape(-1)
    return LabeledGrid(cols, rows, window, labels.astype(np.uint32), legend,
                       iters.astype(np.int32), codes.astype(np.uint8))


def julia_mask(grid: LabeledGrid) -> np.ndarray:
    """Cells labelled 0, plus cells with a 4-neighbour carrying a different nonzero label."""
    a = grid.as_array()
    mask = a == 0
    for sl_a, sl_b in (
        ((slice(None), slice(1, None)), (slice(None), slice(None, -1))),
        ((slice(1, None), slice(None)), (slice(None, -1), slice(None))),
    ):
        x, y = a[sl_a], a[sl_b]
        diff = (x != y) & (x != 0) & (y != 0)
        mask[sl_a] |= diff
        mask[sl_b] |= diff
    return mask


def rotational_symmetry_check(grid: LabeledGrid, order: int, use_labels: bool = False) -> float:
    """Fraction of cells whose Julia bit (or label) differs from the cell at
    the rotation by 2*pi/order about the window centre (nearest cell).

    Cells whose rotated position falls outside the window are skipped.
    """
    if order < 2:
        raise ValueError("order must be >= 2")
    w = grid.window
    if w.center != 0 or w.width != w.height or grid.cols != grid.rows:
        raise ValueError("symmetry check needs a square window centred at 0")
    data = grid.as_array() if use_labels else julia_mask(grid)
    n = grid.cols
    idx = (np.arange(n) + 0.5) - n / 2
    x, y = np.meshgrid(idx, -idx)
    z = (x + 1j * y) * np.exp(2j * math.pi / order)
    col = np.floor(z.real + n / 2).astype(int)
    row = np.floor(n / 2 - z.imag).astype(int)
    ok = (col >= 0) & (col < n) & (row >= 0) & (row < n)
    rotated = data[row[ok], col[ok]]
    return float(np.mean(rotated != data[ok]))
