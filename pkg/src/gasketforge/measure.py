"""Box-counting dimension of masks and the undecided-area ladder."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

DEFAULT_SCALES = (1, 2, 4, 8, 16, 32)


@dataclass
class DimensionEstimate:
    scales: list[int]
    counts: list[int]
    slope: float
    intercept: float
    r2: float

    def to_dict(self):
        return {"scales": self.scales, "counts": self.counts, "dimension": self.slope,
                "intercept": self.intercept, "r2": self.r2}


def box_counts(mask: np.ndarray, scales) -> list[int]:
    mask = np.asarray(mask, dtype=bool)
    rows, cols = mask.shape
    out = []
    for s in scales:
        if rows % s or cols % s:
            raise ValueError(f"scale {s} does not divide the {rows}x{cols} grid")
        blocks = mask.reshape(rows // s, s, cols // s, s).any(axis=(1, 3))
        out.append(int(blocks.sum()))
    return out


def box_dimension(mask, scales=DEFAULT_SCALES) -> DimensionEstimate:
    """Least-squares slope of log N(s) against log(1/s)."""
    mask = np.asarray(mask, dtype=bool)
    scales = [int(s) for s in scales]
    if len(scales) < 4:
        raise ValueError("need at least 4 scales")
    if any(b <= a for a, b in zip(scales, scales[1:])) or scales[0] < 1:
        raise ValueError("scales must be positive and strictly increasing")
    if not mask.any():
        raise ValueError("empty mask")
    counts = box_counts(mask, scales)
    x = np.log(1.0 / np.asarray(scales, dtype=float))
    y = np.log(np.asarray(counts, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return DimensionEstimate(scales, counts, float(slope), float(intercept), r2)


@dataclass
class LadderRow:
    resolution: int
    budget: int
    undecided: float


def undecided_fraction(grid) -> float:
    return float(np.mean(grid.labels == 0))


def undecided_area_ladder(family, window, resolutions, iter_budgets, cfg=None, render=None) -> list[LadderRow]:
    """Fraction of label-0 cells for each (resolution, budget) pair.

    ``render`` defaults to :func:`gasketforge.raster.render_dynamical`; the
    traps are rebuilt per rung, which is deterministic.
    """
    from dataclasses import replace

    from gasketforge.raster import RenderConfig, render_dynamical

    resolutions = [int(r) for r in resolutions]
    iter_budgets = [int(b) for b in iter_budgets]
    for seq in (resolutions, iter_budgets):
        if any(b < a for a, b in zip(seq, seq[1:])):
            raise ValueError("resolutions and budgets must be nondecreasing")
    render = render or render_dynamical
    cfg = cfg or RenderConfig()
    rows = []
    for res in resolutions:
        for budget in iter_budgets:
            grid = render(family, window, res, res, replace(cfg, max_iter=budget))
            rows.append(LadderRow(res, budget, undecided_fraction(grid)))
    return rows


def ladder_csv(rows: list[LadderRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["resolution", "budget", "undecided_fraction"])
    for r in rows:
        w.writerow([r.resolution, r.budget, f"{r.undecided:.17g}"])
    return buf.getvalue()
