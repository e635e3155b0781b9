import numpy as np
import pytest

from fgdata.expand import (
    DimensionMismatch,
    EmptyMaskError,
    extract_contours,
    foreground_histogram,
    histogram_csv_rows,
    replace_background,
    shoelace_area,
)
from fgdata.manifest import SegmentationMask
from fgdata.pipeline import CompositeConfig, compose_foreground


def mask_from(arr):
    return SegmentationMask.from_array(np.asarray(arr, dtype=np.uint8))


def brute_force_components(arr):
    """Flood-fill labeling with 4-connectivity, no library calls."""
    arr = np.asarray(arr)
    h, w = arr.shape
    seen = np.zeros((h, w), dtype=bool)
    count = 0
    for sy in range(h):
        for sx in range(w):
            if arr[sy, sx] and not seen[sy, sx]:
                count += 1
                stack = [(sy, sx)]
                seen[sy, sx] = True
                while stack:
                    y, x = stack.pop()
                    for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
                        if 0 <= ny < h and 0 <= nx < w and arr[ny, nx] and not seen[ny, nx]:
                            seen[ny, nx] = True
                            stack.append((ny, nx))
    return count


def test_full_square_single_four_corner_polygon():
    cs = extract_contours(mask_from(np.ones((10, 10))))
    assert len(cs.polygons) == 1
    assert cs.polygons[0].shape == (4, 2)
    assert cs.areas[0] == 100.0


def test_two_disjoint_blocks_two_polygons():
    arr = np.zeros((10, 10), np.uint8)
    arr[1:4, 1:4] = 1
    arr[6:9, 5:8] = 1
    cs = extract_contours(mask_from(arr))
    assert len(cs.polygons) == 2
    assert sorted(cs.areas) == [9.0, 9.0]


def test_rasterized_disk_area_within_2pct():
    r = 20
    yy, xx = np.mgrid[0:64, 0:64]
    disk = ((yy - 32) ** 2 + (xx - 32) ** 2 <= r * r).astype(np.uint8)
    cs = extract_contours(mask_from(disk))
    assert len(cs.polygons) == 1
    assert abs(cs.areas[0] - np.pi * r * r) / (np.pi * r * r) < 0.02
    # edge-traced polygons enclose exactly the pixel count
    assert cs.areas[0] == disk.sum()


def test_polygon_count_matches_bruteforce_labeling():
    rng = np.random.default_rng(11)
    for _ in range(40):
        arr = (rng.random((9, 11)) < 0.35).astype(np.uint8)
        if not arr.any():
            continue
        cs = extract_contours(mask_from(arr))
        assert len(cs.polygons) == brute_force_components(arr)
        # area equality holds per-mask when no component has holes; at
        # minimum the totals bound the pixel count from above
        assert sum(cs.areas) >= arr.sum()


def test_polygon_areas_equal_pixel_counts_for_holefree_shapes():
    arr = np.zeros((12, 12), np.uint8)
    arr[2:5, 2:9] = 1  # bar
    arr[7:11, 3:5] = 1  # block
    cs = extract_contours(mask_from(arr))
    assert sorted(cs.areas) == [8.0, 21.0]


def test_pinched_component_one_polygon():
    # diagonal contact inside a single 4-connected component (hole + notch)
    arr = np.array(
        [
            [1, 1, 0],
            [1, 0, 1],
            [1, 1, 1],
        ],
        np.uint8,
    )
    cs = extract_contours(mask_from(arr))
    assert len(cs.polygons) == brute_force_components(arr) == 1


def test_polygons_counterclockwise_positive_area():
    arr = np.zeros((8, 8), np.uint8)
    arr[2:6, 3:7] = 1
    cs = extract_contours(mask_from(arr))
    assert all(shoelace_area(p) > 0 for p in cs.polygons)


def test_contours_empty_mask_errors():
    with pytest.raises(EmptyMaskError):
        extract_contours(mask_from(np.zeros((4, 4))))


def test_histogram_pure_red_single_bin():
    img = np.zeros((6, 6, 3), np.uint8)
    img[:, :, 0] = 255
    m = mask_from(np.ones((6, 6)))
    h = foreground_histogram(img, m, bins_per_channel=8)
    assert h.total == 36
    assert h.counts[7, 0, 0] == 36
    assert h.counts.sum() == 36


def test_histogram_half_red_half_blue():
    img = np.zeros((4, 6, 3), np.uint8)
    img[:, :3, 0] = 255
    img[:, 3:, 2] = 255
    m = mask_from(np.ones((4, 6)))
    h = foreground_histogram(img, m, bins_per_channel=4)
    assert h.counts[3, 0, 0] == 12
    assert h.counts[0, 0, 3] == 12
    assert h.total == 24


def test_histogram_ignores_background():
    rng = np.random.default_rng(5)
    img = rng.integers(0, 256, (8, 8, 3), dtype=np.uint8)
    arr = np.zeros((8, 8), np.uint8)
    arr[2:6, 2:6] = 1
    m = mask_from(arr)
    h1 = foreground_histogram(img, m)
    for _ in range(5):
        noisy = img.copy()
        bg = ~arr.astype(bool)
        noisy[bg] = rng.integers(0, 256, (int(bg.sum()), 3))
        h2 = foreground_histogram(noisy, m)
        assert np.array_equal(h1.counts, h2.counts)
    assert h1.total == 16


def test_histogram_empty_mask_errors():
    img = np.zeros((4, 4, 3), np.uint8)
    with pytest.raises(EmptyMaskError):
        foreground_histogram(img, mask_from(np.zeros((4, 4))))


def test_histogram_csv_rows_cover_total():
    rng = np.random.default_rng(9)
    img = rng.integers(0, 256, (7, 7, 3), dtype=np.uint8)
    m = mask_from(np.ones((7, 7)))
    h = foreground_histogram(img, m, bins_per_channel=4)
    rows = histogram_csv_rows(h)
    assert sum(r[3] for r in rows) == h.total


def test_replace_background_all_one_all_zero():
    rng = np.random.default_rng(6)
    img = rng.integers(0, 256, (5, 5, 3), dtype=np.uint8)
    bg = rng.integers(0, 256, (5, 5, 3), dtype=np.uint8)
    assert np.array_equal(replace_background(img, mask_from(np.ones((5, 5))), bg), img)
    assert np.array_equal(replace_background(img, mask_from(np.zeros((5, 5))), bg), bg)


def test_replace_background_per_pixel_oracle():
    rng = np.random.default_rng(7)
    img = rng.integers(0, 256, (6, 5, 3), dtype=np.uint8)
    bg = rng.integers(0, 256, (6, 5, 3), dtype=np.uint8)
    arr = (rng.random((6, 5)) < 0.5).astype(np.uint8)
    out = replace_background(img, mask_from(arr), bg)
    for y in range(6):
        for x in range(5):
            expect = img[y, x] if arr[y, x] else bg[y, x]
            assert np.array_equal(out[y, x], expect)


def test_replace_background_dimension_mismatch():
    img = np.zeros((4, 4, 3), np.uint8)
    bg = np.zeros((5, 4, 3), np.uint8)
    with pytest.raises(DimensionMismatch):
        replace_background(img, mask_from(np.zeros((4, 4))), bg)


def test_replace_constant_background_equals_compose():
    rng = np.random.default_rng(8)
    img = rng.integers(0, 256, (9, 7, 3), dtype=np.uint8)
    arr = (rng.random((9, 7)) < 0.5).astype(np.uint8)
    m = mask_from(arr)
    fill = (12, 200, 99)
    flat = np.broadcast_to(np.array(fill, np.uint8), (9, 7, 3)).copy()
    assert np.array_equal(
        replace_background(img, m, flat),
        compose_foreground(img, m, CompositeConfig(fill=fill)),
    )
