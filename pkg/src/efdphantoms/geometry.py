"""Pixel-space geometry for binary phantom masks.

Conventions used throughout the package:

* a frame is a 2-D ``uint8`` array indexed ``[row, col]``; pixel ``(r, c)``
  covers the unit square ``[c, c+1] x [r, r+1]`` so its centre sits at
  ``(c + 0.5, r + 0.5)``;
* a contour is an ``(N, 2)`` float array of ``(x, y)`` points, implicitly
  closed, counterclockwise (positive shoelace area in ``(x, y)``);
* a video is a ``(T, H, W)`` ``uint8`` array.
"""
import warnings

import numpy as np
from scipy import ndimage

from . import kernels
from .errors import (
    DegenerateContour,
    DegenerateContourWarning,
    HasHoles,
    MultipleComponents,
    NoForeground,
    OutOfCanvas,
    SelfIntersectionWarning,
)

FG_CONNECTIVITY = ndimage.generate_binary_structure(2, 1)
BG_CONNECTIVITY = ndimage.generate_binary_structure(2, 2)


def as_frame(frame):
    arr = np.asarray(frame)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D mask, got shape {arr.shape}")
    if arr.dtype != np.uint8 or arr.max(initial=0) > 1:
        arr = (arr != 0).astype(np.uint8)
    return arr


def as_video(video):
    arr = np.asarray(video)
    if arr.ndim != 3:
        raise ValueError(f"expected a (T, H, W) video, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise ValueError("video needs at least one frame")
    if arr.dtype != np.uint8 or arr.max(initial=0) > 1:
        arr = (arr != 0).astype(np.uint8)
    return arr


def count_components_and_holes(frame):
    """Return ``(components, holes)`` under 4-connected foreground and
    8-connected background; a hole is a background region that does not
    touch the frame border."""
    m = as_frame(frame)
    _, n_fg = ndimage.label(m, structure=FG_CONNECTIVITY)
    bg_labels, n_bg = ndimage.label(m == 0, structure=BG_CONNECTIVITY)
    if n_bg == 0:
        return int(n_fg), 0
    border = np.concatenate(
        [bg_labels[0], bg_labels[-1], bg_labels[:, 0], bg_labels[:, -1]]
    )
    touching = np.unique(border[border > 0])
    return int(n_fg), int(n_bg - touching.size)


def check_valid_phantom(frame):
    """Raise the matching error unless the frame holds exactly one
    4-connected foreground component without holes."""
    m = as_frame(frame)
    if not m.any():
        raise NoForeground("frame has no foreground pixels")
    comps, holes = count_components_and_holes(m)
    if comps > 1:
        raise MultipleComponents(f"frame has {comps} foreground components")
    if holes:
        raise HasHoles(f"frame has {holes} hole(s)")
    return m


def is_valid_phantom(frame):
    try:
        check_valid_phantom(frame)
    except (NoForeground, MultipleComponents, HasHoles):
        return False
    return True


def extract_contour(frame):
    """Outer boundary of a valid phantom at marching-squares midpoints.

    Points are the centres of the pixel edges separating foreground from
    background, ordered counterclockwise and starting at the top edge of the
    first foreground pixel in raster order.
    """
    m = check_valid_phantom(frame)
    pts = kernels.trace_boundary(m)
    if signed_area(pts) < 0:
        pts = np.concatenate([pts[:1], pts[:0:-1]])
    return pts


def signed_area(contour):
    p = np.asarray(contour, dtype=np.float64)
    if len(p) < 3:
        return 0.0
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def segment_lengths(contour):
    p = np.asarray(contour, dtype=np.float64)
    return np.hypot(*(np.roll(p, -1, axis=0) - p).T)


def perimeter(contour):
    return float(segment_lengths(contour).sum())


def resample_arclength(contour, n):
    """Place ``n`` points at equal arc-length steps along the closed polyline.

    Point 0 of the input is kept as point 0 of the output.
    """
    if n < 8:
        raise ValueError("n must be at least 8")
    p = np.asarray(contour, dtype=np.float64)
    if len(p) < 3:
        raise DegenerateContour("need at least 3 points to resample")
    seg = segment_lengths(p)
    keep = seg > 0
    if not keep.any():
        raise DegenerateContour("contour has zero perimeter")
    p = p[keep]
    seg = seg[keep]
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    targets = np.arange(n) * (total / n)
    idx = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, len(p) - 1)
    frac = (targets - cum[idx]) / seg[idx]
    nxt = np.roll(p, -1, axis=0)
    return p[idx] + frac[:, None] * (nxt[idx] - p[idx])


def is_self_intersecting(contour):
    """True if any two non-adjacent edges of the closed polygon cross."""
    p = np.asarray(contour, dtype=np.float64)
    n = len(p)
    if n < 4:
        return False
    a = p
    b = np.roll(p, -1, axis=0)

    def orient(o, u, v):
        return (u[..., 0] - o[..., 0]) * (v[..., 1] - o[..., 1]) - (
            u[..., 1] - o[..., 1]
        ) * (v[..., 0] - o[..., 0])

    A, B = a[:, None, :], b[:, None, :]
    C, D = a[None, :, :], b[None, :, :]
    d1 = orient(A, B, C)
    d2 = orient(A, B, D)
    d3 = orient(C, D, A)
    d4 = orient(C, D, B)
    crossing = (d1 * d2 < 0) & (d3 * d4 < 0)
    i, j = np.triu_indices(n, k=2)
    adjacent = (i == 0) & (j == n - 1)
    return bool(crossing[i[~adjacent], j[~adjacent]].any())


def largest_component(frame):
    m = as_frame(frame)
    labels, n = ndimage.label(m, structure=FG_CONNECTIVITY)
    if n <= 1:
        return m
    sizes = np.bincount(labels.ravel())[1:]
    return (labels == int(np.argmax(sizes)) + 1).astype(np.uint8)


def fill_holes(frame):
    m = as_frame(frame)
    return ndimage.binary_fill_holes(m, structure=FG_CONNECTIVITY).astype(np.uint8)


def rasterize_contour(contour, h, w, *, repair=True, return_flags=False):
    """Even-odd scanline fill of a closed contour on an ``h x w`` canvas.

    A pixel is set when its centre lies inside the polygon. Flags:
    ``"degenerate"`` (zero area, empty output), ``"self_intersecting"``,
    ``"repaired"`` (the fill was not a single hole-free component and only
    the largest component, hole-filled, was kept; needs ``repair=True``).
    """
    if h < 8 or w < 8:
        raise ValueError("canvas must be at least 8x8")
    p = np.asarray(contour, dtype=np.float64)
    flags = set()
    if p.size and (
        (p[:, 0] < 0).any() or (p[:, 0] >= w).any()
        or (p[:, 1] < 0).any() or (p[:, 1] >= h).any()
    ):
        raise OutOfCanvas(f"contour leaves the {h}x{w} canvas")
    if len(p) < 3 or abs(signed_area(p)) < 1e-12:
        warnings.warn("zero-area contour rasterized to an empty frame",
                      DegenerateContourWarning, stacklevel=2)
        flags.add("degenerate")
        out = np.zeros((h, w), dtype=np.uint8)
        return (out, flags) if return_flags else out
    out = kernels.scanline_fill(p[:, 0], p[:, 1], int(h), int(w))
    if is_self_intersecting(p):
        flags.add("self_intersecting")
        warnings.warn("self-intersecting contour", SelfIntersectionWarning,
                      stacklevel=2)
    if repair and out.any() and count_components_and_holes(out) != (1, 0):
        out = fill_holes(largest_component(out))
        flags.add("repaired")
    return (out, flags) if return_flags else out


def moments_axes(frame):
    """Full axis lengths of the moment-equivalent ellipse, ``(major, minor)``.

    Each pixel is treated as a uniform unit square, adding 1/12 to both
    central second moments, so a single row of pixels has a finite minor axis.
    """
    m = as_frame(frame)
    rows, cols = np.nonzero(m)
    if rows.size == 0:
        raise NoForeground("frame has no foreground pixels")
    x = cols - cols.mean()
    y = rows - rows.mean()
    cov = np.array([[np.mean(x * x), np.mean(x * y)], [np.mean(x * y), np.mean(y * y)]])
    cov += np.eye(2) / 12.0
    lo, hi = np.linalg.eigvalsh(cov)
    return 4.0 * float(np.sqrt(hi)), 4.0 * float(np.sqrt(lo))


def _corner_points(m):
    rows = np.flatnonzero(m.any(axis=1))
    left = m[rows].argmax(axis=1)
    right = m.shape[1] - 1 - m[rows, ::-1].argmax(axis=1)
    r = rows.astype(np.float64)
    xs = np.concatenate([left, left, right + 1, right + 1]).astype(np.float64)
    ys = np.concatenate([r, r + 1, r, r + 1])
    return np.column_stack([xs, ys])


def convex_hull_polygon(frame):
    """CCW hull vertices over the corner points of the foreground pixels."""
    m = as_frame(frame)
    if not m.any():
        raise NoForeground("frame has no foreground pixels")
    return kernels.convex_hull(_corner_points(m))


def convex_hull_area(frame):
    return signed_area(convex_hull_polygon(frame))


def hull_mask(frame, hull=None):
    """Pixels whose centres lie inside or on the convex hull of ``frame``."""
    m = as_frame(frame)
    if hull is None:
        hull = convex_hull_polygon(m)
    h, w = m.shape
    x0, y0 = np.floor(hull.min(axis=0)).astype(int)
    x1, y1 = np.ceil(hull.max(axis=0)).astype(int)
    yy, xx = np.mgrid[max(y0, 0):min(y1, h), max(x0, 0):min(x1, w)]
    cx, cy = xx + 0.5, yy + 0.5
    inside = np.ones(cx.shape, dtype=bool)
    nxt = np.roll(hull, -1, axis=0)
    for (ax, ay), (bx, by) in zip(hull, nxt):
        inside &= (bx - ax) * (cy - ay) - (by - ay) * (cx - ax) >= -1e-12
    out = np.zeros_like(m)
    out[yy[inside], xx[inside]] = 1
    return out


def centroid(frame):
    m = as_frame(frame)
    rows, cols = np.nonzero(m)
    if rows.size == 0:
        raise NoForeground("frame has no foreground pixels")
    return float(cols.mean() + 0.5), float(rows.mean() + 0.5)
