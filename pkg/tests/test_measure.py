import math

import numpy as np
import pytest

from gasketforge.families import MapFamily
from gasketforge.gasket import synth_gasket
from gasketforge.measure import box_counts, box_dimension, ladder_csv, undecided_area_ladder
from gasketforge.raster import LabeledGrid, RenderConfig, Window


def test_full_square_dimension_two():
    est = box_dimension(np.ones((1024, 1024), bool))
    assert est.slope == pytest.approx(2.0, abs=0.01)


def test_line_dimension_one():
    mask = np.zeros((1024, 1024), bool)
    mask[512, :] = True
    assert box_dimension(mask).slope == pytest.approx(1.0, abs=0.05)


def test_box_counts_exact():
    mask = np.zeros((8, 8), bool)
    mask[0, 0] = mask[7, 7] = True
    assert box_counts(mask, [1, 2, 4, 8]) == [2, 2, 2, 1]


def test_gasket_fixture_dimension():
    grid = synth_gasket(6, 1024)
    est = box_dimension(grid.as_array() == 0)
    assert est.slope == pytest.approx(math.log(3) / math.log(2), abs=0.05)
    assert est.r2 >= 0.98


def test_dimension_errors():
    with pytest.raises(ValueError):
        box_dimension(np.zeros((64, 64), bool))
    with pytest.raises(ValueError):
        box_dimension(np.ones((64, 64), bool), scales=[1, 2, 4])
    with pytest.raises(ValueError):
        box_dimension(np.ones((64, 64), bool), scales=[1, 4, 2, 8])
    with pytest.raises(ValueError):
        box_counts(np.ones((10, 10), bool), [3])


def test_dimension_in_range_for_random_masks():
    rng = np.random.default_rng(0)
    for p in (0.01, 0.2, 0.9):
        est = box_dimension(rng.random((256, 256)) < p)
        assert 0.0 <= est.slope <= 2.0


def test_ladder_is_monotone_along_budgets(ushiki):
    rows = undecided_area_ladder(ushiki, Window(0j, 4.0, 4.0), [64, 128], [1, 2, 4, 8, 100])
    for res in (64, 128):
        fr = [r.undecided for r in rows if r.resolution == res]
        assert all(b <= a for a, b in zip(fr, fr[1:]))
        assert fr[0] > fr[-1]


def test_ladder_all_fatou_toy_grid():
    def render(family, window, cols, rows, cfg):
        return LabeledGrid.from_array(np.ones((rows, cols), np.uint32), window)

    rows = undecided_area_ladder(None, Window(), [16, 32], [10, 20], render=render)
    assert [r.undecided for r in rows] == [0.0] * 4


def test_ladder_rejects_decreasing_inputs(ushiki):
    with pytest.raises(ValueError):
        undecided_area_ladder(ushiki, Window(), [64, 32], [10])
    with pytest.raises(ValueError):
        undecided_area_ladder(ushiki, Window(), [64], [10, 5])


def test_ladder_csv():
    from gasketforge.measure import LadderRow

    text = ladder_csv([LadderRow(64, 10, 0.25), LadderRow(64, 20, 0.1)])
    assert text.splitlines() == ["resolution,budget,undecided_fraction", "64,10,0.25",
                                 "64,20,0.10000000000000001"]


def test_ladder_passes_config_through(ushiki):
    seen = []

    def render(family, window, cols, rows, cfg):
        seen.append((cols, cfg.max_iter, cfg.cell_test))
        return LabeledGrid.from_array(np.ones((rows, cols), np.uint32), window)

    undecided_area_ladder(ushiki, Window(), [8], [3, 5], RenderConfig(cell_test=False), render=render)
    assert seen == [(8, 3, False), (8, 5, False)]
