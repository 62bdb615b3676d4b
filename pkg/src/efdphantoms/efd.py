"""Elliptical Fourier descriptors of uniformly resampled closed contours.

Coefficients are discrete Fourier sums over the ``N`` resampled points with
``s_j = 2*pi*j/N``::

    a_n = 2/N sum x_j cos(n s_j)      b_n = 2/N sum x_j sin(n s_j)
    c_n = 2/N sum y_j cos(n s_j)      d_n = 2/N sum y_j sin(n s_j)

A series ``Z`` stacks one frame per column with channel order
``[a1, b1, c1, d1, ..., a_d, b_d, c_d, d_d]``.
"""
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import (
    EmptyDataset,
    FrameError,
    NonUniformSampling,
    NyquistViolation,
    StatsMismatch,
)

DEFAULT_N = 128
DEFAULT_FRACTION = 0.9999
DEFAULT_D_MAX = 60
UNIFORM_GAP_CV = 0.15


@dataclass(frozen=True)
class EfdFrame:
    coeffs: np.ndarray  # (d, 4) rows of (a_n, b_n, c_n, d_n)
    centroid: tuple = (0.0, 0.0)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.float64).reshape(-1, 4)
        if c.shape[0] < 1:
            raise ValueError("need at least one harmonic")
        if not np.isfinite(c).all():
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "centroid", (float(self.centroid[0]), float(self.centroid[1])))

    @property
    def d(self):
        return self.coeffs.shape[0]

    def vector(self):
        return self.coeffs.ravel().copy()

    @classmethod
    def from_vector(cls, z, centroid=(0.0, 0.0)):
        return cls(np.asarray(z, dtype=np.float64).reshape(-1, 4), centroid)


@dataclass
class EfdSeries:
    """``values`` is the ``(4d, T)`` coefficient matrix of one video."""

    values: np.ndarray
    n_points: int = DEFAULT_N
    phase_anchored: bool = True
    centroids: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] % 4:
            raise ValueError(f"series must be (4d, T), got {v.shape}")
        self.values = v

    @property
    def d(self):
        return self.values.shape[0] // 4

    @property
    def T(self):
        return self.values.shape[1]

    def frame(self, t):
        c = (0.0, 0.0) if self.centroids is None else tuple(self.centroids[t])
        return EfdFrame.from_vector(self.values[:, t], c)

    def frames(self):
        return [self.frame(t) for t in range(self.T)]


def _values(series):
    return series.values if isinstance(series, EfdSeries) else np.asarray(series, dtype=np.float64)


def gap_cv(contour):
    gaps = geometry.segment_lengths(contour)
    mean = gaps.mean()
    return float(gaps.std() / mean) if mean > 0 else np.inf


def efd_encode(contour, d, *, check_uniform=True):
    """Encode a uniformly resampled contour; the result is not centred."""
    p = np.asarray(contour, dtype=np.float64)
    n_pts = len(p)
    if d < 1:
        raise ValueError("d must be >= 1")
    if 2 * d + 2 > n_pts:
        raise NyquistViolation(f"d={d} needs at least {2 * d + 2} points, got {n_pts}")
    if check_uniform and gap_cv(p) > UNIFORM_GAP_CV:
        raise NonUniformSampling(
            f"point spacing varies too much (cv={gap_cv(p):.3f}); resample first"
        )
    fx = np.fft.rfft(p[:, 0])
    fy = np.fft.rfft(p[:, 1])
    k = slice(1, d + 1)
    scale = 2.0 / n_pts
    coeffs = np.column_stack(
        [scale * fx[k].real, -scale * fx[k].imag, scale * fy[k].real, -scale * fy[k].imag]
    )
    return EfdFrame(coeffs, (fx[0].real / n_pts, fy[0].real / n_pts))


def efd_evaluate(frame, s):
    """Evaluate the truncated series at parameter values ``s`` (radians)."""
    s = np.atleast_1d(np.asarray(s, dtype=np.float64))
    harm = np.arange(1, frame.d + 1)
    ns = np.outer(s, harm)
    cos, sin = np.cos(ns), np.sin(ns)
    c = frame.coeffs
    x = frame.centroid[0] + cos @ c[:, 0] + sin @ c[:, 1]
    y = frame.centroid[1] + cos @ c[:, 2] + sin @ c[:, 3]
    return np.column_stack([x, y])


def efd_decode(frame, n):
    if n < 2 * frame.d + 2:
        raise NyquistViolation(f"decoding d={frame.d} needs n >= {2 * frame.d + 2}")
    return efd_evaluate(frame, 2.0 * np.pi * np.arange(n) / n)


def center_frame(frame):
    return EfdFrame(frame.coeffs, (0.0, 0.0))


def anchor_start(contour):
    """Re-start the polygon where the ray from its area centroid along +x
    leaves the shape, so the phase of the first harmonic is reproducible.

    The crossing point is inserted as the new point 0.
    """
    p = np.asarray(contour, dtype=np.float64)
    x, y = p[:, 0], p[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = cross.sum() / 2.0
    if abs(area) < 1e-12:
        return p
    cx = ((x + xn) * cross).sum() / (6.0 * area)
    cy = ((y + yn) * cross).sum() / (6.0 * area)
    # half-open rule so vertices on the ray are counted once
    hit = ((y <= cy) & (cy < yn)) | ((yn <= cy) & (cy < y))
    idx = np.flatnonzero(hit)
    if idx.size == 0:
        return p
    t = (cy - y[idx]) / (yn[idx] - y[idx])
    xs = x[idx] + t * (xn[idx] - x[idx])
    right = xs >= cx
    if not right.any():
        return p
    k = int(np.argmax(np.where(right, xs, -np.inf)))
    i, frac, xk = int(idx[k]), float(t[k]), float(xs[k])
    start = np.array([[xk, cy]])
    tail = np.roll(p, -(i + 1), axis=0)
    if frac >= 1.0 - 1e-12:
        return tail
    if frac <= 1e-12:
        return np.roll(p, -i, axis=0)
    return np.concatenate([start, tail])


def best_cyclic_shift(points, reference):
    """Cyclic shift ``m`` of ``points`` whose first harmonic correlates best
    with ``reference`` (an ``(a1, b1, c1, d1)`` quadruple)."""
    n = len(points)
    first = efd_encode(points, 1, check_uniform=False).coeffs[0]
    a, b, c, d = first
    theta = 2.0 * np.pi * np.arange(n) / n
    cos, sin = np.cos(theta), np.sin(theta)
    # rolling by m starts the curve at s = theta_m
    shifted = np.stack(
        [a * cos + b * sin, b * cos - a * sin, c * cos + d * sin, d * cos - c * sin], axis=1
    )
    return int(np.argmax(shifted @ np.asarray(reference, dtype=np.float64)))


def contour_for_encoding(frame, n=DEFAULT_N, *, phase_anchor=True):
    c = geometry.extract_contour(frame)
    if phase_anchor:
        c = anchor_start(c)
    return geometry.resample_arclength(c, n)


def encode_video(video, d, n=DEFAULT_N, *, phase_anchor=True):
    """Per-frame contour -> resample -> encode -> centre.

    With ``phase_anchor`` every frame starts on the +x ray from its centroid
    and frames after the first are then cyclically shifted to best match the
    previous frame's first harmonic.
    """
    v = geometry.as_video(video)
    cols, cents = [], []
    prev = None
    for t, frame in enumerate(v):
        try:
            pts = contour_for_encoding(frame, n, phase_anchor=phase_anchor)
            if phase_anchor and prev is not None:
                pts = np.roll(pts, -best_cyclic_shift(pts, prev), axis=0)
            ef = efd_encode(pts, d)
        except Exception as exc:
            raise FrameError(t, exc) from exc
        prev = ef.coeffs[0]
        cols.append(ef.vector())
        cents.append(ef.centroid)
    return EfdSeries(
        np.column_stack(cols), n_points=n, phase_anchored=phase_anchor,
        centroids=np.asarray(cents),
    )


def harmonic_power(training):
    """Mean over all frames of ``(a_n^2 + b_n^2 + c_n^2 + d_n^2) / 2``."""
    mats = [_values(s) for s in training]
    if not mats:
        raise EmptyDataset("no training series")
    z = np.concatenate(mats, axis=1)
    d = z.shape[0] // 4
    return (z.reshape(d, 4, -1) ** 2).sum(axis=1).mean(axis=1) / 2.0


def select_harmonics(training, fraction=DEFAULT_FRACTION):
    """Smallest ``d`` keeping ``fraction`` of the cumulative harmonic power."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    power = harmonic_power(training)
    cum = np.cumsum(power)
    if cum[-1] <= 0:
        return 1
    ratio = cum / cum[-1]
    return int(np.argmax(ratio >= fraction)) + 1


@dataclass(frozen=True)
class NormStats:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=np.float64).ravel()
        hi = np.asarray(self.hi, dtype=np.float64).ravel()
        if lo.shape != hi.shape or (hi < lo).any():
            raise ValueError("invalid normalisation bounds")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def channels(self):
        return self.lo.size


def fit_norm(training):
    mats = [_values(s) for s in training]
    if not mats:
        raise EmptyDataset("no training series")
    z = np.concatenate(mats, axis=1)
    return NormStats(z.min(axis=1), z.max(axis=1))


def _check_stats(z, stats):
    if z.shape[-2] != stats.channels:
        raise StatsMismatch(f"series has {z.shape[-2]} channels, stats have {stats.channels}")


def apply_norm(series, stats, *, clamp=True):
    """Map each channel's training range onto [0, 1]; constant channels -> 0.5."""
    z = _values(series)
    _check_stats(z, stats)
    lo, hi = stats.lo[:, None], stats.hi[:, None]
    span = hi - lo
    const = span == 0
    out = np.where(const, 0.5, (z - lo) / np.where(const, 1.0, span))
    return np.clip(out, 0.0, 1.0) if clamp else out


def invert_norm(series, stats):
    z = _values(series)
    _check_stats(z, stats)
    lo, hi = stats.lo[:, None], stats.hi[:, None]
    return lo + z * (hi - lo)


def clamp_rate(series, stats):
    """Fraction of entries falling outside the training range."""
    z = _values(series)
    _check_stats(z, stats)
    outside = (z < stats.lo[:, None]) | (z > stats.hi[:, None])
    return float(outside.mean())
