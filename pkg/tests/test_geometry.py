import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from efdphantoms import geometry as g
from efdphantoms.efd import EfdFrame, efd_decode, efd_encode
from efdphantoms.errors import (
    DegenerateContour,
    DegenerateContourWarning,
    HasHoles,
    MultipleComponents,
    NoForeground,
    OutOfCanvas,
)

from conftest import disk, ellipse_mask


def rect(x0, x1, y0, y1, shape=(16, 16)):
    m = np.zeros(shape, np.uint8)
    m[y0:y1, x0:x1] = 1
    return m


def plus_sign():
    m = np.zeros((40, 40), np.uint8)
    m[5:15, 15:25] = 1
    m[15:25, 5:35] = 1
    m[25:35, 15:25] = 1
    return m


def hausdorff(a, b):
    d = np.hypot(*(a[:, None, :] - b[None, :, :]).transpose(2, 0, 1))
    return max(d.min(axis=1).max(), d.min(axis=0).max())


# ---------------------------------------------------------------- contours


def test_single_pixel_diamond(backend):
    m = np.zeros((3, 3), np.uint8)
    m[1, 1] = 1
    c = g.extract_contour(m)
    assert len(c) == 4
    assert np.allclose(c.mean(axis=0), [1.5, 1.5])
    assert np.allclose(sorted(np.abs(c - 1.5).sum(axis=1)), [0.5] * 4)
    assert g.signed_area(c) > 0


def test_rectangle_bbox(backend):
    m = rect(2, 10, 3, 8)
    c = g.extract_contour(m)
    lo, hi = c.min(axis=0), c.max(axis=0)
    assert np.all(np.abs(lo - [2, 3]) <= 1) and np.all(np.abs(hi - [10, 8]) <= 1)


def test_disk_contour_radius(backend):
    m = disk(20, (32, 32), (64, 64))
    c = g.extract_contour(m)
    assert np.abs(np.hypot(*(c - 32).T) - 20).max() <= 1.0
    assert g.signed_area(c) > 0


def test_contour_points_on_transitions(backend):
    m = ellipse_mask(14, 8, (20, 18), (40, 40))
    c = g.extract_contour(m)
    # every point is the midpoint of a pixel edge between fg and bg
    for x, y in c:
        if x % 1 == 0.5:
            r0, r1, col = int(y) - 1, int(y), int(x)
            assert m[r0, col] != m[r1, col]
        else:
            row, c0, c1 = int(y), int(x) - 1, int(x)
            assert m[row, c0] != m[row, c1]


def test_extract_errors():
    with pytest.raises(NoForeground):
        g.extract_contour(np.zeros((8, 8)))
    two = rect(1, 3, 1, 3)
    two[5:7, 5:7] = 1
    with pytest.raises(MultipleComponents):
        g.extract_contour(two)
    ring = rect(2, 9, 2, 9)
    ring[4:7, 4:7] = 0
    with pytest.raises(HasHoles):
        g.extract_contour(ring)


def test_diagonal_pixels_are_two_components():
    m = np.zeros((8, 8), np.uint8)
    m[2, 2] = m[3, 3] = 1
    assert g.count_components_and_holes(m) == (2, 0)


def test_components_and_holes():
    assert g.count_components_and_holes(np.zeros((8, 8))) == (0, 0)
    assert g.count_components_and_holes(rect(2, 8, 2, 8)) == (1, 0)
    ring = rect(2, 9, 2, 9)
    ring[4:7, 4:7] = 0
    assert g.count_components_and_holes(ring) == (1, 1)
    # a missing ring corner lets the background leak diagonally
    leaky = rect(2, 9, 2, 9)
    leaky[3:8, 3:8] = 0
    assert g.count_components_and_holes(leaky) == (1, 1)
    leaky[2, 2] = 0
    assert g.count_components_and_holes(leaky) == (1, 0)


def test_backends_agree(rng):
    from efdphantoms import _pykernels, kernels

    if kernels.BACKEND != "cython":
        pytest.skip("compiled kernels not built")
    for _ in range(20):
        a, b = rng.uniform(5, 14, 2)
        m = ellipse_mask(a, b, rng.uniform(14, 18, 2), (32, 32))
        assert np.array_equal(kernels.trace_boundary(m), _pykernels.trace_boundary(m))
        c = g.extract_contour(m) + rng.uniform(-0.3, 0.3, (1, 2))
        assert np.array_equal(
            kernels.scanline_fill(c[:, 0], c[:, 1], 32, 32),
            _pykernels.scanline_fill(c[:, 0], c[:, 1], 32, 32),
        )
        pts = rng.uniform(0, 10, (30, 2))
        assert np.array_equal(kernels.convex_hull(pts), _pykernels.convex_hull(pts))
        x, y = rng.normal(size=7), rng.normal(size=5)
        assert kernels.dtw_cost(x, y) == _pykernels.dtw_cost(x, y)


# ---------------------------------------------------------------- resampling


def test_resample_square_gaps():
    sq = np.array([[0, 0], [10, 0], [10, 10], [0, 10]], float)
    r = g.resample_arclength(sq, 8)
    assert np.allclose(g.segment_lengths(r), 5.0, atol=1e-12)
    assert np.array_equal(r[0], sq[0])


def test_resample_idempotent():
    s = 2 * np.pi * np.arange(64) / 64
    c = np.column_stack([np.cos(s), np.sin(s)]) * 7
    assert np.allclose(g.resample_arclength(c, 64), c, atol=1e-9)


def test_resample_irregular_circle(rng):
    ang = np.sort(rng.uniform(0, 2 * np.pi, 999))
    ang = np.concatenate([[0.0], ang])
    c = np.column_stack([np.cos(ang), np.sin(ang)])
    r = g.resample_arclength(c, 128)
    got = np.unwrap(np.arctan2(r[:, 1], r[:, 0]))
    assert np.abs(got - 2 * np.pi * np.arange(128) / 128).max() < 1e-3


def test_resample_degenerate():
    with pytest.raises(DegenerateContour):
        g.resample_arclength(np.ones((5, 2)), 16)
    with pytest.raises(ValueError):
        g.resample_arclength(np.eye(3), 4)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=8, max_value=300), st.floats(0.5, 3.0), st.integers(0, 10_000))
def test_resample_equal_gaps(n, aspect, seed):
    rng = np.random.default_rng(seed)
    k = rng.integers(5, 200)
    s = np.sort(rng.uniform(0, 2 * np.pi, k))
    c = np.column_stack([np.cos(s) * aspect, np.sin(s)]) * 10
    r = g.resample_arclength(c, n)
    per = g.perimeter(c)
    # gaps measured along the input polyline are exactly per / n
    from efdphantoms.geometry import segment_lengths

    seg = segment_lengths(c)
    cum = np.concatenate([[0], np.cumsum(seg)])
    pos = []
    for p in r:
        d = np.hypot(*(np.roll(c, -1, 0) - c).T)
        t = []
        for i in range(len(c)):
            a, b = c[i], c[(i + 1) % len(c)]
            ab = b - a
            u = np.clip(np.dot(p - a, ab) / max(np.dot(ab, ab), 1e-300), 0, 1)
            t.append((np.hypot(*(a + u * ab - p)), cum[i] + u * d[i]))
        pos.append(min(t)[1])
    gaps = np.diff(np.array(pos + [pos[0] + per]))
    gaps = np.where(gaps < 0, gaps + per, gaps)
    assert np.allclose(gaps, per / n, rtol=1e-9, atol=1e-9 * per)


def test_resample_preserves_perimeter():
    for n in (64, 128, 256):
        s = 2 * np.pi * np.arange(2000) / 2000
        c = np.column_stack([12 * np.cos(s), 7 * np.sin(s)])
        assert abs(g.perimeter(g.resample_arclength(c, n)) / g.perimeter(c) - 1) < 5e-3


# ---------------------------------------------------------------- rasterizing


def test_rasterize_square(backend):
    sq = np.array([[5, 5], [15, 5], [15, 15], [5, 15]], float)
    m = g.rasterize_contour(sq, 32, 32)
    assert abs(int(m.sum()) - 100) <= 10
    assert m.dtype == np.uint8 and set(np.unique(m)) <= {0, 1}


def test_rasterize_decoded_circle(backend):
    s = 2 * np.pi * np.arange(128) / 128
    circ = np.column_stack([10 * np.cos(s), 10 * np.sin(s)])
    c = efd_decode(efd_encode(circ, 1), 128) + 16
    m = g.rasterize_contour(c, 32, 32)
    assert g.count_components_and_holes(m) == (1, 0)


def test_rasterize_degenerate():
    line = np.array([[2, 2], [6, 6], [4, 4]], float)
    with pytest.warns(DegenerateContourWarning):
        m, flags = g.rasterize_contour(line, 16, 16, return_flags=True)
    assert not m.any() and "degenerate" in flags


def test_rasterize_out_of_canvas():
    with pytest.raises(OutOfCanvas):
        g.rasterize_contour(np.array([[1, 1], [20, 1], [5, 5]], float), 16, 16)
    with pytest.raises(OutOfCanvas):
        g.rasterize_contour(np.array([[1, 1], [16, 1], [5, 5]], float), 16, 16)


@pytest.mark.filterwarnings("ignore::efdphantoms.errors.SelfIntersectionWarning")
def test_rasterize_even_odd_pentagram():
    ang = np.pi / 2 + 4 * np.pi * np.arange(5) / 5
    star = np.column_stack([np.cos(ang), np.sin(ang)]) * 12 + 16
    raw, flags = g.rasterize_contour(star, 32, 32, repair=False, return_flags=True)
    assert "self_intersecting" in flags
    assert raw[16, 16] == 0  # centre pentagon crossed twice
    fixed = g.rasterize_contour(star, 32, 32)
    assert g.count_components_and_holes(fixed) == (1, 0)


def test_extract_rasterize_stable(backend):
    m = ellipse_mask(18, 11, (32, 30), (64, 64))
    c1 = g.extract_contour(m)
    c2 = g.extract_contour(g.rasterize_contour(c1, 64, 64))
    assert hausdorff(c1, c2) <= 1.5


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_low_harmonic_topology(seed):
    rng = np.random.default_rng(seed)
    coeffs = np.zeros((4, 4))
    coeffs[0] = [12, 0, 0, 12 * rng.uniform(0.6, 1.0)]
    coeffs[1:] = rng.normal(0, 1.2, (3, 4)) / np.arange(2, 5)[:, None]
    c = efd_decode(EfdFrame(coeffs), 128)
    if g.signed_area(c) < 0:
        c = c[::-1]
    c = c + 32
    if g.is_self_intersecting(c):
        return
    m = g.rasterize_contour(c, 64, 64, repair=False)
    assert g.count_components_and_holes(m) == (1, 0)


def test_area_matches_shoelace():
    for a, b in [(12, 9), (20, 10), (15, 15)]:
        m = ellipse_mask(a, b, (32, 32), (64, 64))
        assert m.sum() >= 300
        c = g.extract_contour(m)
        assert abs(g.signed_area(c) / m.sum() - 1) < 0.03


# ---------------------------------------------------------------- moments, hull


def test_moments_disk_and_ellipse():
    maj, mi = g.moments_axes(disk(20, (32, 32), (64, 64)))
    assert 0.98 <= maj / mi <= 1.02
    maj, mi = g.moments_axes(ellipse_mask(20, 10, (32, 32), (64, 64)))
    assert 1.9 <= maj / mi <= 2.1


def test_moments_row():
    m = np.zeros((8, 40), np.uint8)
    m[3, 5:35] = 1
    maj, mi = g.moments_axes(m)
    # variance of a uniform segment of length 30 is 30**2 / 12
    assert maj == pytest.approx(4 * np.sqrt(30 ** 2 / 12), rel=1e-12)
    assert maj == pytest.approx(30 / np.sqrt(3) * 2, rel=1e-12)
    assert mi == pytest.approx(4 / np.sqrt(12), rel=1e-12)
    with pytest.raises(NoForeground):
        g.moments_axes(np.zeros((8, 8)))


@settings(max_examples=30, deadline=None)
@given(st.integers(-10, 10), st.integers(-10, 10), st.integers(0, 1000))
def test_moments_translation(dx, dy, seed):
    rng = np.random.default_rng(seed)
    m = np.zeros((64, 64), np.uint8)
    m[20:40, 20:40] = rng.random((20, 20)) < 0.6
    if not m.any():
        return
    moved = np.roll(np.roll(m, dy, 0), dx, 1)
    assert np.allclose(g.moments_axes(m), g.moments_axes(moved), atol=1e-9)


def test_convex_hull_area(backend):
    assert g.convex_hull_area(rect(3, 13, 3, 13, (20, 20))) == pytest.approx(100, rel=0.01)
    assert g.convex_hull_area(plus_sign()) == pytest.approx(700, abs=1e-9)
    one = np.zeros((8, 8), np.uint8)
    one[4, 4] = 1
    assert g.convex_hull_area(one) == pytest.approx(1.0)
    with pytest.raises(NoForeground):
        g.convex_hull_area(np.zeros((8, 8)))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_hull_bounds_pixel_count(seed):
    rng = np.random.default_rng(seed)
    m = (rng.random((12, 12)) < 0.3).astype(np.uint8)
    if not m.any():
        return
    hull = g.convex_hull_polygon(m)
    assert g.convex_hull_area(m) >= m.sum() - 1e-9
    # every foreground pixel corner lies inside or on the hull
    corners = g._corner_points(m)
    nxt = np.roll(hull, -1, 0)
    for a, b in zip(hull, nxt):
        cross = (b[0] - a[0]) * (corners[:, 1] - a[1]) - (b[1] - a[1]) * (corners[:, 0] - a[0])
        assert (cross >= -1e-9).all()
