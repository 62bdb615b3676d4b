# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; mirrors ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport ceil, floor, fabs, INFINITY

cnp.import_array()


def trace_boundary(mask):
    cdef cnp.uint8_t[:, ::1] m = np.ascontiguousarray(mask != 0, dtype=np.uint8)
    cdef Py_ssize_t h = m.shape[0], w = m.shape[1]
    padded_arr = np.zeros((h + 2, w + 2), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] p = padded_arr
    cdef Py_ssize_t i, j
    cdef long r0 = -1, c0 = -1
    for i in range(h):
        for j in range(w):
            p[i + 1, j + 1] = m[i, j]
            if r0 < 0 and m[i, j]:
                r0 = i + 1
                c0 = j + 1
    if r0 < 0:
        return np.zeros((0, 2))
    cdef long x = c0, y = r0, dx = 1, dy = 0, lx, ly, t
    cdef Py_ssize_t cap = 4 * (h + 2) * (w + 2), k = 0
    out_arr = np.empty((cap, 2), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef bint al, ar
    while True:
        out[k, 0] = x + 0.5 * dx - 1.0
        out[k, 1] = y + 0.5 * dy - 1.0
        k += 1
        x += dx
        y += dy
        lx = dy
        ly = -dx
        al = p[y + (dy + ly - 1) // 2, x + (dx + lx - 1) // 2]
        ar = p[y + (dy - ly - 1) // 2, x + (dx - lx - 1) // 2]
        if not ar:
            t = dx
            dx = -dy
            dy = t
        elif al:
            t = dx
            dx = dy
            dy = -t
        if x == c0 and y == r0 and dx == 1 and dy == 0:
            break
    return out_arr[:k].copy()


def scanline_fill(xs, ys, long h, long w):
    cdef double[::1] px = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[::1] py = np.ascontiguousarray(ys, dtype=np.float64)
    out_arr = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] out = out_arr
    cdef Py_ssize_t n = px.shape[0], e, q, cnt, a
    if n < 3:
        return out_arr
    cdef double ymin = py[0], ymax = py[0]
    for e in range(n):
        if py[e] < ymin:
            ymin = py[e]
        if py[e] > ymax:
            ymax = py[e]
    cdef long lo = <long>floor(ymin), hi = <long>ceil(ymax), r, c, c_lo, c_hi
    if lo < 0:
        lo = 0
    if hi > h - 1:
        hi = h - 1
    cross_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] cross = cross_arr
    cdef double yc, x0, y0, x1, y1, v
    for r in range(lo, hi + 1):
        yc = r + 0.5
        cnt = 0
        for e in range(n):
            x0 = px[e]
            y0 = py[e]
            if e + 1 < n:
                x1 = px[e + 1]
                y1 = py[e + 1]
            else:
                x1 = px[0]
                y1 = py[0]
            if (y0 <= yc and yc < y1) or (y1 <= yc and yc < y0):
                cross[cnt] = x0 + (yc - y0) * (x1 - x0) / (y1 - y0)
                cnt += 1
        # insertion sort; crossings per row are few
        for a in range(1, cnt):
            v = cross[a]
            q = a - 1
            while q >= 0 and cross[q] > v:
                cross[q + 1] = cross[q]
                q -= 1
            cross[q + 1] = v
        a = 0
        while a + 1 < cnt:
            c_lo = <long>ceil(cross[a] - 0.5)
            c_hi = <long>ceil(cross[a + 1] - 0.5)
            if c_lo < 0:
                c_lo = 0
            if c_hi > w:
                c_hi = w
            for c in range(c_lo, c_hi):
                out[r, c] = 1
            a += 2
    return out_arr


def dtw_cost(x, y):
    cdef double[::1] a = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef double[::1] b = np.ascontiguousarray(y, dtype=np.float64).ravel()
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0], i, j
    prev_arr = np.full(m + 1, INFINITY)
    cur_arr = np.full(m + 1, INFINITY)
    cdef double[::1] prev = prev_arr
    cdef double[::1] cur = cur_arr
    cdef double[::1] tmp
    cdef double best, xi
    prev[0] = 0.0
    for i in range(1, n + 1):
        cur[0] = INFINITY
        xi = a[i - 1]
        for j in range(1, m + 1):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = best + fabs(xi - b[j - 1])
        tmp = prev
        prev = cur
        cur = tmp
    return prev[m]


def convex_hull(points):
    pts_arr = np.unique(np.asarray(points, dtype=np.float64).reshape(-1, 2), axis=0)
    cdef double[:, ::1] pts = np.ascontiguousarray(pts_arr)
    cdef Py_ssize_t n = pts.shape[0], i, k = 0, lower_len
    if n <= 2:
        return np.asarray(pts_arr, dtype=np.float64).reshape(-1, 2)
    hull_arr = np.empty((2 * n, 2), dtype=np.float64)
    cdef double[:, ::1] hull = hull_arr
    for i in range(n):
        while k >= 2 and _cross(hull[k - 2, 0], hull[k - 2, 1], hull[k - 1, 0],
                                hull[k - 1, 1], pts[i, 0], pts[i, 1]) <= 0.0:
            k -= 1
        hull[k, 0] = pts[i, 0]
        hull[k, 1] = pts[i, 1]
        k += 1
    lower_len = k + 1
    for i in range(n - 2, -1, -1):
        while k >= lower_len and _cross(hull[k - 2, 0], hull[k - 2, 1], hull[k - 1, 0],
                                        hull[k - 1, 1], pts[i, 0], pts[i, 1]) <= 0.0:
            k -= 1
        hull[k, 0] = pts[i, 0]
        hull[k, 1] = pts[i, 1]
        k += 1
    return hull_arr[:k - 1].copy()


cdef inline double _cross(double ox, double oy, double ax, double ay,
                          double bx, double by) nogil:
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)
