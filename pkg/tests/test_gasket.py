import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import ndimage

from gasketforge.gasket import (
    NothingToCheck,
    build_contact_graph,
    check_gasket,
    default_min_area,
    label_components,
    synth_gasket,
    verify_grid,
)

FOUR = ndimage.generate_binary_structure(2, 1)


def disks(size, specs, background=0):
    """Label grid with filled disks (cx, cy, r, label) on ``background``."""
    yy, xx = np.mgrid[0:size, 0:size] + 0.5
    arr = np.full((size, size), background, np.uint32)
    for cx, cy, r, lab in specs:
        arr[(xx - cx) ** 2 + (yy - cy) ** 2 < r * r] = lab
    return arr


def test_single_label_one_component():
    cm = label_components(np.ones((16, 16), np.uint32))
    assert len(cm.components) == 1
    assert cm.components[1].holes == 0 and cm.components[1].touches_border


def test_separated_squares_two_components():
    arr = np.ones((10, 21), np.uint32)
    arr[:, 10] = 0
    assert len(label_components(arr).components) == 2


def test_annulus_has_one_hole():
    arr = disks(40, [(20, 20, 15, 1), (20, 20, 7, 0)])
    cm = label_components(arr)
    assert len(cm.components) == 1
    assert cm.components[1].holes == 1


def test_components_respect_basin_labels():
    arr = np.ones((8, 8), np.uint32)
    arr[:, 4:] = 2
    cm = label_components(arr)
    assert sorted(c.basin for c in cm.components.values()) == [1, 2]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_labelling_matches_scipy(seed, n_labels):
    rng = np.random.default_rng(seed)
    arr = rng.integers(0, n_labels + 1, size=(24, 31)).astype(np.uint32)
    cm = label_components(arr)
    expected = sum(ndimage.label(arr == lab, structure=FOUR)[1] for lab in range(1, n_labels + 1))
    assert len(cm.components) == expected
    # every component is one basin and 4-connected
    for k, comp in cm.components.items():
        cells = cm.ids == k
        assert np.all(arr[cells] == comp.basin)
        assert ndimage.label(cells, structure=FOUR)[1] == 1
        assert comp.area == int(cells.sum())


def test_tangent_disks_one_contact():
    arr = disks(100, [(30, 50, 20, 1), (70.5, 50, 20, 2)])
    cg = build_contact_graph(label_components(arr), min_area=10)
    assert len(cg.edges) == 1
    assert cg.edges[0].clusters == 1
    assert cg.triple_points == []


def test_distant_disks_no_contact():
    arr = disks(100, [(20, 50, 10, 1), (80, 50, 10, 2)])
    cg = build_contact_graph(label_components(arr), min_area=10)
    assert cg.edges == []


def test_three_disks_report_triple_point():
    # three disks pushed together until their gaps meet in one small region
    arr = disks(120, [(42, 50, 19, 1), (78, 50, 19, 2), (60, 80.5, 19, 3)])
    cg = build_contact_graph(label_components(arr), touch_radius=3, min_area=10)
    assert cg.triple_points


def test_triple_point_fails_check():
    arr = disks(120, [(42, 50, 19, 1), (78, 50, 19, 2), (60, 80.5, 19, 3)])
    rep = verify_grid(arr, N=5, touch_radius=3, min_area=10)
    assert not rep.verdicts["triple_point_free"]
    assert not rep.passed


def test_disconnected_contact_graph_fails():
    arr = disks(100, [(20, 50, 10, 1), (80, 50, 10, 2)])
    rep = verify_grid(arr, N=3, min_area=10)
    assert not rep.verdicts["contact_graph_connected"]
    assert not rep.passed


def test_nothing_to_check():
    with pytest.raises(NothingToCheck):
        verify_grid(np.ones((16, 16), np.uint32), N=3)


def test_bad_arguments():
    cm = label_components(np.ones((8, 8), np.uint32))
    with pytest.raises(ValueError):
        build_contact_graph(cm, touch_radius=0)
    with pytest.raises(ValueError):
        check_gasket(build_contact_graph(cm), cm, 0)
    with pytest.raises(ValueError):
        synth_gasket(0, 128)


def test_default_min_area():
    assert default_min_area(1024 * 1024) == 53
    assert default_min_area(10) == 1


def test_synth_depth_one():
    grid = synth_gasket(1, 512)
    cm = label_components(grid)
    assert len(cm.components) == 2
    cg = build_contact_graph(cm)
    assert len(cg.edges) == 1 and cg.edges[0].clusters == 3


@pytest.mark.parametrize("depth", [1, 2, 3, 4])
def test_synth_component_count(depth):
    grid = synth_gasket(depth, 512)
    assert len(label_components(grid).components) == 1 + sum(3**j for j in range(depth))


def test_synth_gasket_passes_with_connected_graph():
    rep = verify_grid(synth_gasket(4, 1024), N=3)
    assert rep.passed
    assert rep.verdicts["contact_graph_connected"]
    assert rep.verdicts["max_pair_contacts"] == 3


def test_report_serialisation():
    rep = verify_grid(synth_gasket(2, 256), N=3).to_dict()
    assert set(rep) >= {"components", "edges", "triple_points", "verdicts", "pass", "params", "notes"}
    assert rep["params"]["N"] == 3
