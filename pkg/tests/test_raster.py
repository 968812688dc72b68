import math

import numpy as np
import pytest

from gasketforge.families import GOLDEN_THETA, MapFamily
from gasketforge.measure import box_dimension
from gasketforge.raster import (
    LabeledGrid,
    RenderConfig,
    Window,
    julia_mask,
    render_dynamical,
    rotational_symmetry_check,
    worker_count,
)

W4 = Window(0j, 4.0, 4.0)


def _label_at(grid, z):
    col, row = grid.window.cell_of(z, grid.cols, grid.rows)
    return int(grid.as_array()[row, col])


def test_window_cell_round_trip():
    w = Window(0.5 - 1j, 3.0, 2.0)
    for col, row in [(0, 0), (10, 3), (63, 31)]:
        assert w.cell_of(w.cell_center(col, row, 64, 32), 64, 32) == (col, row)
    assert Window.from_dict(w.to_dict()) == w
    with pytest.raises(ValueError):
        Window(0j, -1.0, 1.0)
    with pytest.raises(ValueError):
        Window(0j, 1.0, 1.0, "north")


def test_pole_pixel_gets_infinity_basin(ushiki):
    g = render_dynamical(ushiki, W4, 64, 64)
    inf_id = [k for k, (kind, p) in g.legend.items() if p.is_infinity]
    # z = 0 sits on a cell corner for an even grid; every touching cell is in the basin
    for z in (1e-3 + 1e-3j, -1e-3 + 1e-3j, 1e-3 - 1e-3j, -1e-3 - 1e-3j):
        assert _label_at(g, z) == inf_id[0]


def test_superattracting_pixel_label(mcmullen33):
    g = render_dynamical(mcmullen33, W4, 64, 64)
    label = _label_at(g, 1 / math.sqrt(2))
    kind, p = g.legend[label]
    assert kind == "superattracting"
    assert abs(p.to_complex() - 1 / math.sqrt(2)) < 1e-9


def test_repelling_fixed_point_pixel_is_undecided(ushiki):
    # odd grid centred on 4/3, so one cell centre is the fixed point itself
    g = render_dynamical(ushiki, Window(4 / 3, 0.1, 0.1), 65, 65)
    assert g.as_array()[32, 32] == 0


def test_julia_mask_trivial_grids():
    one = LabeledGrid.from_array(np.ones((8, 8), np.uint32))
    assert not julia_mask(one).any()
    halves = np.ones((6, 8), np.uint32)
    halves[:, 4:] = 2
    mask = julia_mask(LabeledGrid.from_array(halves))
    expected = np.zeros_like(mask)
    expected[:, 3:5] = True
    assert np.array_equal(mask, expected)


def test_symmetry_check_detects_asymmetric_blob():
    arr = np.ones((64, 64), np.uint32)
    arr[2:30, 34:62] = 0
    g = LabeledGrid.from_array(arr, Window(0j, 4.0, 4.0))
    assert rotational_symmetry_check(g, 2) > 0.2


def test_symmetry_check_preconditions():
    g = LabeledGrid.from_array(np.ones((8, 8), np.uint32), Window(1j, 4.0, 4.0))
    with pytest.raises(ValueError):
        rotational_symmetry_check(g, 2)
    g = LabeledGrid.from_array(np.ones((8, 8), np.uint32), Window(0j, 4.0, 4.0))
    with pytest.raises(ValueError):
        rotational_symmetry_check(g, 1)


def test_raster_rotation_floor_on_a_disk():
    """Nearest-cell rotation of a perfect disk already mismatches on about a
    third of its boundary cells; render mismatches are judged against this."""
    n = 512
    idx = np.arange(n) + 0.5 - n / 2
    x, y = np.meshgrid(idx, -idx)
    disk = np.where(x * x + y * y < 150**2, 1, 2).astype(np.uint32)
    g = LabeledGrid.from_array(disk, Window(0j, 4.0, 4.0))
    boundary = julia_mask(g).sum()
    ratio = rotational_symmetry_check(g, 6) * n * n / boundary
    assert 0.2 < ratio < 0.5


def test_order_two_symmetry_exact(mcmullen33):
    g = render_dynamical(mcmullen33, Window(0j, 3.0, 3.0), 128, 128)
    assert rotational_symmetry_check(g, 2) == 0.0


def test_legend_must_cover_labels():
    with pytest.raises(ValueError):
        LabeledGrid(2, 2, W4, np.array([0, 1, 2, 1]), {1: ("x", None)})


def test_worker_counts_give_identical_labels(ushiki):
    base = render_dynamical(ushiki, W4, 96, 80, RenderConfig(workers=1))
    for w in (3, 8):
        other = render_dynamical(ushiki, W4, 96, 80, RenderConfig(workers=w))
        assert np.array_equal(base.labels, other.labels)


def test_worker_count_environment(monkeypatch):
    monkeypatch.setenv("GASKETFORGE_THREADS", "3")
    assert worker_count() == 3
    assert worker_count(5) == 5


def test_budget_monotonicity(ushiki):
    """Raising the budget only turns 0 into nonzero; nonzero labels never change."""
    prev = None
    for budget in (1, 2, 4, 8, 64):
        lab = render_dynamical(ushiki, W4, 96, 96, RenderConfig(max_iter=budget)).labels
        if prev is not None:
            decided = prev != 0
            assert np.array_equal(lab[decided], prev[decided])
            assert np.count_nonzero(lab) >= np.count_nonzero(prev)
        prev = lab


def test_cell_test_only_adds_undecided_cells(ushiki):
    with_test = render_dynamical(ushiki, W4, 128, 128).labels
    centres = render_dynamical(ushiki, W4, 128, 128, RenderConfig(cell_test=False)).labels
    decided = with_test != 0
    assert np.array_equal(with_test[decided], centres[decided])
    assert np.count_nonzero(with_test == 0) > np.count_nonzero(centres == 0)


def test_supersample_is_stricter(ushiki):
    plain = render_dynamical(ushiki, W4, 64, 64).labels
    fine = render_dynamical(ushiki, W4, 64, 64, RenderConfig(supersample=True)).labels
    assert np.count_nonzero(fine == 0) >= np.count_nonzero(plain == 0) * 0.5
    assert set(np.unique(fine)) <= set(np.unique(plain)) | {0}


def test_infinity_chart_window_for_siegel():
    fam = MapFamily.siegel(GOLDEN_THETA)
    g = render_dynamical(fam, Window(0j, 4.0, 4.0, "infinity"), 96, 96)
    kinds = {kind for kind, _ in g.legend.values()}
    assert kinds == {"siegel-trap"}
    # the window centre is z = infinity, inside the rotation domain
    assert g.as_array()[48, 48] != 0


def test_ushiki_mask_dimension_between_one_and_two(ushiki):
    g = render_dynamical(ushiki, W4, 512, 512)
    est = box_dimension(julia_mask(g))
    assert 1.0 < est.slope < 2.0
