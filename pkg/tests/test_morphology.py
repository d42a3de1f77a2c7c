import numpy as np
import pytest

from oracles import brute_dilate, flood_fill_components
from parkseg.errors import EvenKernelError, UnknownComponentIdError
from parkseg.morphology import boundary, connected_components, dilate_rect, region_boundary


def same_partition(a: np.ndarray, b: np.ndarray) -> bool:
    """Two labelings induce the same pixel partition (ids may differ)."""
    if a.shape != b.shape:
        return False
    if not np.array_equal(a == 0, b == 0):
        return False
    pairs = set(zip(a.ravel().tolist(), b.ravel().tolist()))
    a_to_b = {}
    b_to_a = {}
    for x, y in pairs:
        if x == 0:
            continue
        if a_to_b.setdefault(x, y) != y or b_to_a.setdefault(y, x) != x:
            return False
    return True


def test_single_pixel_component():
    bits = np.zeros((5, 5), dtype=bool)
    bits[2, 2] = True
    comp = connected_components(bits, 8)
    assert comp.count == 1
    assert comp.labels[2, 2] == 1


def test_diagonal_pixels_connectivity():
    bits = np.zeros((4, 4), dtype=bool)
    bits[1, 1] = True
    bits[2, 2] = True
    assert connected_components(bits, 8).count == 1
    assert connected_components(bits, 4).count == 2


def test_components_match_flood_fill_on_random_masks():
    rng = np.random.default_rng(11)
    for _ in range(30):
        bits = rng.random((32, 32)) < 0.4
        for connectivity in (4, 8):
            got = connected_components(bits, connectivity)
            want_labels, want_count = flood_fill_components(bits, connectivity)
            assert got.count == want_count
            assert same_partition(got.labels, want_labels)


def test_component_ids_are_dense():
    rng = np.random.default_rng(3)
    bits = rng.random((24, 24)) < 0.35
    comp = connected_components(bits, 8)
    present = set(np.unique(comp.labels).tolist()) - {0}
    assert present == set(range(1, comp.count + 1))


def test_bad_connectivity():
    with pytest.raises(ValueError):
        connected_components(np.zeros((2, 2), dtype=bool), 6)


def test_boundary_of_single_pixel_is_itself():
    bits = np.zeros((3, 3), dtype=bool)
    bits[1, 1] = True
    comp = connected_components(bits, 8)
    assert np.array_equal(boundary(comp, 1), bits)


def test_boundary_of_filled_square_is_ring():
    bits = np.zeros((9, 9), dtype=bool)
    bits[2:7, 2:7] = True
    comp = connected_components(bits, 8)
    ring = boundary(comp, 1)
    assert int(ring.sum()) == 16
    interior = np.zeros_like(bits)
    interior[3:6, 3:6] = True
    assert not (ring & interior).any()
    assert (ring | interior).sum() == 25


def test_boundary_of_thin_line_is_whole_line():
    bits = np.zeros((5, 8), dtype=bool)
    bits[2, 1:7] = True
    comp = connected_components(bits, 8)
    assert np.array_equal(boundary(comp, 1), bits)


def test_boundary_counts_image_border_as_outside():
    bits = np.ones((3, 3), dtype=bool)
    comp = connected_components(bits, 8)
    ring = boundary(comp, 1)
    assert int(ring.sum()) == 8
    assert not ring[1, 1]


def test_boundary_subset_and_interior_property():
    rng = np.random.default_rng(5)
    for _ in range(10):
        bits = rng.random((20, 20)) < 0.45
        comp = connected_components(bits, 8)
        for cid in range(1, comp.count + 1):
            member = comp.labels == cid
            ring = boundary(comp, cid)
            assert not (ring & ~member).any()
            # interior pixels keep all 4-neighbors inside the component
            interior = member & ~ring
            for y, x in np.argwhere(interior):
                for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
                    assert 0 <= ny < 20 and 0 <= nx < 20
                    assert member[ny, nx]


def test_boundary_unknown_component_id():
    comp = connected_components(np.ones((2, 2), dtype=bool), 8)
    with pytest.raises(UnknownComponentIdError):
        boundary(comp, 2)
    with pytest.raises(UnknownComponentIdError):
        boundary(comp, 0)


def test_region_boundary_matches_definition():
    rng = np.random.default_rng(9)
    member = rng.random((15, 15)) < 0.5
    ring = region_boundary(member)
    h, w = member.shape
    for y in range(h):
        for x in range(w):
            if not member[y, x]:
                assert not ring[y, x]
                continue
            outside = False
            for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
                if not (0 <= ny < h and 0 <= nx < w) or not member[ny, nx]:
                    outside = True
            assert ring[y, x] == outside


def test_dilate_center_pixel():
    bits = np.zeros((31, 31), dtype=bool)
    bits[15, 15] = True
    out = dilate_rect(bits, 15, 15)
    want = np.zeros_like(bits)
    want[8:23, 8:23] = True
    assert np.array_equal(out, want)


def test_dilate_identity_kernel():
    rng = np.random.default_rng(13)
    bits = rng.random((16, 16)) < 0.5
    assert np.array_equal(dilate_rect(bits, 1, 1), bits)


def test_dilate_matches_brute_force():
    rng = np.random.default_rng(17)
    for _ in range(15):
        bits = rng.random((40, 40)) < 0.08
        for kw, kh in ((1, 1), (3, 3), (15, 15), (3, 7), (9, 1)):
            assert np.array_equal(dilate_rect(bits, kw, kh), brute_dilate(bits, kw, kh))


def test_dilate_clips_at_borders():
    bits = np.zeros((5, 5), dtype=bool)
    bits[0, 0] = True
    out = dilate_rect(bits, 3, 3)
    want = np.zeros_like(bits)
    want[0:2, 0:2] = True
    assert np.array_equal(out, want)


def test_dilate_is_extensive_and_monotone():
    rng = np.random.default_rng(19)
    small = rng.random((20, 20)) < 0.2
    big = small | (rng.random((20, 20)) < 0.2)
    d_small = dilate_rect(small, 5, 5)
    d_big = dilate_rect(big, 5, 5)
    assert (small <= d_small).all()
    assert (d_small <= d_big).all()


def test_dilate_separability():
    rng = np.random.default_rng(23)
    bits = rng.random((30, 30)) < 0.1
    twice = dilate_rect(dilate_rect(bits, 3, 5), 7, 3)
    once = dilate_rect(bits, 3 + 7 - 1, 5 + 3 - 1)
    assert np.array_equal(twice, once)


def test_dilate_translation_invariance_away_from_borders():
    rng = np.random.default_rng(29)
    bits = np.zeros((40, 40), dtype=bool)
    bits[15:25, 15:25] = rng.random((10, 10)) < 0.4
    shifted = np.zeros_like(bits)
    shifted[3:, 2:] = bits[:-3, :-2]
    d = dilate_rect(bits, 7, 7)
    d_shifted = dilate_rect(shifted, 7, 7)
    expect = np.zeros_like(bits)
    expect[3:, 2:] = d[:-3, :-2]
    assert np.array_equal(d_shifted, expect)


def test_even_kernel_rejected():
    bits = np.zeros((4, 4), dtype=bool)
    with pytest.raises(EvenKernelError):
        dilate_rect(bits, 2, 3)
    with pytest.raises(EvenKernelError):
        dilate_rect(bits, 3, 0)


def test_non_boolean_input_rejected():
    with pytest.raises(ValueError):
        dilate_rect(np.zeros((3, 3), dtype=np.int64), 3, 3)
