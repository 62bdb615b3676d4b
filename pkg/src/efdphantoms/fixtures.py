"""Synthetic phantom videos for offline tests and demos.

``pulsating_ellipses`` mimics a cell cycle: slow growth, a small periodic
pulsation, rotation, and around ``t ~ 10`` an elongation peak followed by a
sharp area drop that then recovers (a division-like event).
"""
import numpy as np

from . import kernels

DENSE = 512


def ellipse_contour(cx, cy, a, b, theta=0.0, n=DENSE):
    s = 2.0 * np.pi * np.arange(n) / n
    x, y = a * np.cos(s), b * np.sin(s)
    c, sn = np.cos(theta), np.sin(theta)
    return np.column_stack([cx + c * x - sn * y, cy + sn * x + c * y])


def square_contour(cx, cy, side, theta=0.0, n=DENSE):
    """Square sampled uniformly by arc length, starting mid-way along the right side."""
    u = (np.arange(n) / n + 0.125) % 1.0 * 4.0
    side_idx = np.floor(u).astype(int)
    f = u - side_idx
    corners = np.array([[1, -1], [1, 1], [-1, 1], [-1, -1], [1, -1]], dtype=np.float64) * side / 2
    pts = corners[side_idx] + f[:, None] * (corners[side_idx + 1] - corners[side_idx])
    c, sn = np.cos(theta), np.sin(theta)
    rot = pts @ np.array([[c, sn], [-sn, c]])
    return rot + np.array([cx, cy])


def fill(contour, canvas):
    return kernels.scanline_fill(contour[:, 0], contour[:, 1], canvas, canvas)


def _ellipse_params(rng, t_len):
    t = np.arange(t_len, dtype=np.float64)
    a0 = rng.uniform(15.0, 20.0)
    aspect0 = rng.uniform(1.15, 1.6)
    growth = rng.uniform(0.0, 0.004)
    t_div = rng.uniform(8.0, 12.0)
    depth = rng.uniform(0.15, 0.25)
    recover = rng.uniform(6.0, 12.0)
    amp = rng.uniform(0.01, 0.03)
    period = rng.uniform(8.0, 16.0)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    theta0 = rng.uniform(0.0, np.pi)
    omega = rng.uniform(-0.03, 0.03)

    after = np.clip(t - t_div, 0.0, None)
    drop = np.where(t >= t_div, depth * np.exp(-after / recover), 0.0)
    scale = (1.0 + growth * t) * (1.0 - drop) * (1.0 + amp * np.sin(2 * np.pi * t / period + phase))
    peak = 0.35 * np.exp(-0.5 * ((t - t_div + 1.5) / 1.5) ** 2)
    aspect = aspect0 * (1.0 + peak)
    # keep the area ~ scale^2 while the aspect ratio changes
    a = a0 * scale * np.sqrt(aspect / aspect0)
    b = a / aspect
    return a, b, theta0 + omega * t


def pulsating_ellipse_video(rng, t_len=40, canvas=96):
    a, b, theta = _ellipse_params(rng, t_len)
    c = canvas / 2.0
    return np.stack([fill(ellipse_contour(c, c, a[i], b[i], theta[i]), canvas) for i in range(t_len)])


def pulsating_ellipse_contours(rng, t_len=40, n=128):
    """Analytic (un-rasterised) contours with the same dynamics, centred at 0."""
    a, b, theta = _ellipse_params(rng, t_len)
    return [ellipse_contour(0.0, 0.0, a[i], b[i], theta[i], n) for i in range(t_len)]


def square_video(rng, t_len=20, canvas=96):
    side0 = rng.uniform(30.0, 44.0)
    theta0 = rng.uniform(0.0, np.pi / 2)
    t = np.arange(t_len)
    side = side0 * (1.0 + 0.05 * np.sin(2 * np.pi * t / t_len))
    theta = theta0 + rng.uniform(-0.02, 0.02) * t
    # off-grid centre, so the raster is not point-symmetric
    cx, cy = canvas / 2.0 + rng.uniform(-0.5, 0.5, 2)
    return np.stack([fill(square_contour(cx, cy, side[i], theta[i]), canvas) for i in range(t_len)])


def pulsating_ellipses(count, t_len=40, canvas=96, seed=0):
    rng = np.random.default_rng(seed)
    return [pulsating_ellipse_video(rng, t_len, canvas) for _ in range(count)]


def squares(count, t_len=20, canvas=96, seed=0):
    rng = np.random.default_rng(seed)
    return [square_video(rng, t_len, canvas) for _ in range(count)]


def disc_video(rng, t_len=20, canvas=96):
    """Near-circular blob with a slow radius drift; one harmonic carries
    essentially all of its EFD power."""
    r0 = rng.uniform(24.0, 30.0)
    aspect = rng.uniform(1.0, 1.02)
    theta = rng.uniform(0.0, np.pi)
    t = np.arange(t_len)
    r = r0 * (1.0 + 0.03 * np.sin(2 * np.pi * t / t_len + rng.uniform(0, 2 * np.pi)))
    c = canvas / 2.0
    return np.stack([fill(ellipse_contour(c, c, r[i] * aspect, r[i], theta), canvas) for i in range(t_len)])


def discs(count, t_len=20, canvas=96, seed=0):
    rng = np.random.default_rng(seed)
    return [disc_video(rng, t_len, canvas) for _ in range(count)]
