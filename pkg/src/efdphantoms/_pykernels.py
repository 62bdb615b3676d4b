"""Pure-Python/numpy reference versions of the hot kernels.

Kept behaviourally identical to ``_ckernels.pyx``; the test suite runs both
and compares outputs exactly.
"""
import math

import numpy as np


def trace_boundary(mask):
    """Trace the outer crack boundary of the raster-first foreground pixel.

    Walks pixel edges keeping foreground on the right (x right, y down),
    turning right at diagonal saddles so diagonally touching pixels stay
    separate (4-connected foreground). Returns the midpoint of each crack in
    walk order as an ``(M, 2)`` float array of ``(x, y)``; pixel ``(r, c)``
    covers ``[c, c+1] x [r, r+1]``.
    """
    m = np.asarray(mask, dtype=np.uint8)
    h, w = m.shape
    padded = np.zeros((h + 2, w + 2), dtype=np.uint8)
    padded[1:-1, 1:-1] = m != 0
    flat = np.flatnonzero(padded)
    if flat.size == 0:
        return np.zeros((0, 2))
    r0, c0 = divmod(int(flat[0]), w + 2)
    x, y = c0, r0
    dx, dy = 1, 0
    out = []
    while True:
        out.append((x + 0.5 * dx - 1.0, y + 0.5 * dy - 1.0))
        x += dx
        y += dy
        # ahead-left / ahead-right pixel indices around vertex (x, y)
        lx, ly = dy, -dx
        al = padded[y + (dy + ly - 1) // 2, x + (dx + lx - 1) // 2]
        ar = padded[y + (dy - ly - 1) // 2, x + (dx - lx - 1) // 2]
        if not ar:
            dx, dy = -dy, dx
        elif al:
            dx, dy = dy, -dx
        if x == c0 and y == r0 and dx == 1 and dy == 0:
            break
    return np.array(out, dtype=np.float64)


def scanline_fill(xs, ys, h, w):
    """Even-odd fill of a closed polygon, sampling at pixel centres."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    out = np.zeros((h, w), dtype=np.uint8)
    n = xs.shape[0]
    if n < 3:
        return out
    x0, y0 = xs, ys
    x1, y1 = np.roll(xs, -1), np.roll(ys, -1)
    lo = max(int(math.floor(ys.min())), 0)
    hi = min(int(math.ceil(ys.max())), h - 1)
    for r in range(lo, hi + 1):
        yc = r + 0.5
        hit = ((y0 <= yc) & (yc < y1)) | ((y1 <= yc) & (yc < y0))
        if not hit.any():
            continue
        a0, b0, a1, b1 = x0[hit], y0[hit], x1[hit], y1[hit]
        cross = np.sort(a0 + (yc - b0) * (a1 - a0) / (b1 - b0))
        for k in range(0, cross.size - 1, 2):
            c_lo = max(int(math.ceil(cross[k] - 0.5)), 0)
            c_hi = min(int(math.ceil(cross[k + 1] - 0.5)), w)
            if c_hi > c_lo:
                out[r, c_lo:c_hi] = 1
    return out


def dtw_cost(x, y):
    """Accumulated L1 cost of the optimal monotone alignment (unnormalised)."""
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    n, m = len(x), len(y)
    inf = math.inf
    prev = [inf] * (m + 1)
    prev[0] = 0.0
    for i in range(1, n + 1):
        cur = [inf] * (m + 1)
        xi = x[i - 1]
        for j in range(1, m + 1):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = best + abs(xi - y[j - 1])
        prev = cur
    return prev[m]


def convex_hull(points):
    """Monotone-chain hull; CCW vertices, collinear points dropped."""
    pts = sorted(set((float(p[0]), float(p[1])) for p in points))
    if len(pts) <= 2:
        return np.array(pts, dtype=np.float64).reshape(-1, 2)

    def half(seq):
        chain = []
        for p in seq:
            while len(chain) >= 2:
                (ox, oy), (ax, ay) = chain[-2], chain[-1]
                if (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox) <= 0.0:
                    chain.pop()
                else:
                    break
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(reversed(pts))
    return np.array(lower[:-1] + upper[:-1], dtype=np.float64)
