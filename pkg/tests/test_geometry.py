import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arbshape.errors import EmptyShape
from arbshape.geometry import Contour, compute_moments, furthest_contour_point, largest_component, trace_contour
from arbshape.imgio import BinaryImage

from conftest import block, random_blob


def _img(points, size=12):
    a = np.zeros((size, size), dtype=bool)
    for x, y in points:
        a[y, x] = True
    return BinaryImage(a)


def test_single_pixel_moments():
    m = compute_moments(_img([(7, 3)]))
    assert m.m00 == 1
    assert (m.cx, m.cy) == (7.0, 3.0)


def test_block_moments():
    m = compute_moments(block(4, 4, 3, 3))
    assert m.m00 == 9
    assert (m.cx, m.cy) == (5.0, 5.0)
    assert m.theta == 0.0
    assert m.isotropic


def test_diagonal_theta():
    m = compute_moments(_img([(k, k) for k in range(5)]))
    assert m.theta == pytest.approx(math.pi / 4, abs=1e-15)


def test_horizontal_and_vertical_theta():
    assert compute_moments(block(2, 5, 8, 1)).theta == 0.0
    assert compute_moments(block(5, 2, 1, 8)).theta == pytest.approx(math.pi / 2)


def test_empty_shape():
    with pytest.raises(EmptyShape):
        compute_moments(BinaryImage(np.zeros((4, 4))))
    with pytest.raises(EmptyShape):
        trace_contour(BinaryImage(np.zeros((4, 4))))


def test_moments_match_double_loop(blobs):
    for img in blobs[:3]:
        p = img.pixels
        sums = dict(m00=0, m10=0, m01=0, m11=0, m20=0, m02=0)
        for y in range(img.height):
            for x in range(img.width):
                if p[y, x]:
                    sums["m00"] += 1
                    sums["m10"] += x
                    sums["m01"] += y
                    sums["m11"] += x * y
                    sums["m20"] += x * x
                    sums["m02"] += y * y
        m = compute_moments(img)
        assert {k: getattr(m, k) for k in sums} == sums
        assert m.cx == m.m10 / m.m00 and m.cy == m.m01 / m.m00


def test_theta_range(blobs):
    for img in blobs:
        t = compute_moments(img).theta
        assert -math.pi / 2 < t <= math.pi / 2


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), dx=st.integers(-3, 3), dy=st.integers(-3, 3))
def test_moments_translation_equivariance(seed, dx, dy):
    img = random_blob(np.random.default_rng(seed), size=60, margin=4)
    moved = BinaryImage(np.roll(img.pixels, (dy, dx), axis=(0, 1)))
    a, b = compute_moments(img), compute_moments(moved)
    assert b.m00 == a.m00
    assert b.cx - a.cx == pytest.approx(dx, abs=1e-12)
    assert b.cy - a.cy == pytest.approx(dy, abs=1e-12)
    assert (b.mu20p, b.mu11p, b.mu02p, b.theta) == (a.mu20p, a.mu11p, a.mu02p, a.theta)


def test_single_pixel_contour():
    c = trace_contour(_img([(2, 2)]))
    assert c.points.tolist() == [[2, 2]]


def test_block_contour_is_clockwise_perimeter():
    c = trace_contour(block(4, 4, 3, 3))
    assert c.points.tolist() == [[4, 4], [5, 4], [6, 4], [6, 5], [6, 6], [5, 6], [4, 6], [4, 5]]


@pytest.mark.parametrize("w,h", [(2, 2), (2, 5), (7, 3), (10, 10), (1, 1)])
def test_rectangle_contour_length(w, h):
    c = trace_contour(block(1, 1, w, h, size=14))
    expected = 1 if w == h == 1 else 2 * w + 2 * h - 4
    assert len(c) == expected


def test_two_pixel_contour():
    c = trace_contour(_img([(3, 3), (4, 4)]))
    assert c.points.tolist() == [[3, 3], [4, 4]]


def test_largest_component_selected():
    a = np.zeros((20, 20), dtype=bool)
    a[1:3, 1:3] = True  # 4 px, first in raster order
    a[10:15, 10:15] = True
    c = trace_contour(BinaryImage(a))
    assert c.points.min(axis=0).tolist() == [10, 10]
    assert largest_component(BinaryImage(a)).count() == 25


def _signed_area(pts):
    x, y = pts[:, 0].astype(float), pts[:, 1].astype(float)
    return 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)


def test_contour_invariants(blobs):
    for img in blobs:
        c = trace_contour(img)
        pts = c.points
        p = img.pixels
        h, w = p.shape
        assert p[pts[:, 1], pts[:, 0]].all()
        steps = np.abs(np.diff(np.vstack([pts, pts[:1]]), axis=0))
        if len(pts) >= 3:
            assert steps.max() == 1
        assert len({tuple(q) for q in pts}) <= img.count()
        for x, y in pts:
            four = [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)]
            assert any(not (0 <= u < w and 0 <= v < h) or not p[v, u] for u, v in four)
        # clockwise on screen (y down) has positive shoelace area
        if len(pts) >= 3:
            assert _signed_area(pts) > 0


def test_contour_matches_opencv(blobs):
    cv2 = pytest.importorskip("cv2")
    for img in blobs:
        comp = largest_component(img).pixels.astype(np.uint8)
        found, _ = cv2.findContours(comp, cv2.RETR_EXTERNAL, cv2.CHAIN_APPROX_NONE)
        ref = max(found, key=len)[:, 0, :]
        ours = trace_contour(img).points
        # OpenCV runs counter-clockwise on screen from the same start pixel
        reversed_ref = np.vstack([ref[:1], ref[1:][::-1]])
        assert np.array_equal(ours, reversed_ref)


def test_furthest_point_examples():
    _, rho = furthest_contour_point(Contour(np.array([[5, 5]])), 5.0, 5.0)
    assert rho == 0.0
    c = trace_contour(block(4, 4, 3, 3))
    pt, rho = furthest_contour_point(c, 5.0, 5.0)
    assert pt == (4, 4)
    assert rho == math.sqrt(2)


def test_furthest_point_exhaustive(blobs):
    for img in blobs:
        m = compute_moments(img)
        c = trace_contour(img)
        pt, rho = furthest_contour_point(c, m.cx, m.cy)
        dists = [math.hypot(x - m.cx, y - m.cy) for x, y in c.points.tolist()]
        best = max(dists)
        assert rho == pytest.approx(best, abs=1e-12)
        assert tuple(c.points[dists.index(best)]) == pt
        assert all(rho >= d - 1e-12 for d in dists)
