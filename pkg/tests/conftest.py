
import numpy as np
import pytest

from efdphantoms import _pykernels, kernels


def disk(radius, center, shape):
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w]
    return (((xx + 0.5 - center[0]) ** 2 + (yy + 0.5 - center[1]) ** 2) <= radius ** 2).astype(np.uint8)


def ellipse_mask(a, b, center, shape):
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w]
    return ((((xx + 0.5 - center[0]) / a) ** 2 + ((yy + 0.5 - center[1]) / b) ** 2) <= 1).astype(np.uint8)


@pytest.fixture(params=["compiled", "python"])
def backend(request, monkeypatch):
    """Run a test against both kernel implementations."""
    if request.param == "compiled":
        if kernels.BACKEND != "cython":
            pytest.skip("compiled kernels not built")
        yield kernels
        return
    for name in ("trace_boundary", "scanline_fill", "dtw_cost", "convex_hull"):
        monkeypatch.setattr(kernels, name, getattr(_pykernels, name))
    yield kernels


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def star_contour(rng, n=128, radius=20.0, harmonics=4, amp=0.08):
    """Points uniformly spaced in arc length along a smooth star-shaped curve."""
    from scipy.interpolate import CubicSpline

    eps = rng.uniform(-amp, amp, harmonics - 1)
    phi = rng.uniform(0, 2 * np.pi, harmonics - 1)
    k = np.arange(2, harmonics + 1)

    def curve(theta):
        r = radius * (1 + np.cos(np.outer(theta, k) + phi) @ eps)
        return np.column_stack([r * np.cos(theta), r * np.sin(theta)])

    dense = 2 * np.pi * np.arange(8192) / 8192
    pts = curve(dense)
    seg = np.hypot(*(np.roll(pts, -1, 0) - pts).T)
    cum = np.concatenate([[0], np.cumsum(seg)])
    theta_of_s = CubicSpline(cum, np.concatenate([dense, [2 * np.pi]]))
    s = cum[-1] * np.arange(n) / n
    return curve(theta_of_s(s))
