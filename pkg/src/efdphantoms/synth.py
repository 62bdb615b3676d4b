"""Glue between EFD series, the diffusion model, and mask videos."""
import logging
import warnings

import numpy as np

from . import geometry
from .efd import EfdFrame, efd_decode, invert_norm
from .errors import DegenerateContourWarning, SelfIntersectionWarning

log = logging.getLogger(__name__)


def place_on_canvas(contour, h, w):
    """Centre a position-free contour at ``(w/2, h/2)``; returns the points and
    whether any had to be clipped into the canvas."""
    p = np.asarray(contour, dtype=np.float64) + np.array([w / 2.0, h / 2.0])
    hi = np.array([np.nextafter(w, 0), np.nextafter(h, 0)])
    clipped = bool((p < 0).any() or (p > hi).any())
    return np.clip(p, 0.0, hi), clipped


def series_to_video(values, h, w, n=128, *, repair=True):
    """Decode a raw ``(4d, T)`` series to a ``(T, h, w)`` mask video.

    Returns ``(video, flags)`` with one set of rasterisation flags per frame
    (``"clipped"`` is added when the decoded shape left the canvas).
    """
    z = np.asarray(values, dtype=np.float64)
    frames, flags = [], []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateContourWarning)
        warnings.simplefilter("ignore", SelfIntersectionWarning)
        for t in range(z.shape[1]):
            contour = efd_decode(EfdFrame.from_vector(z[:, t]), n)
            pts, clipped = place_on_canvas(contour, h, w)
            mask, fl = geometry.rasterize_contour(pts, h, w, repair=repair, return_flags=True)
            if clipped:
                fl.add("clipped")
            frames.append(mask)
            flags.append(fl)
    return np.stack(frames), flags


def generate_series(model, sched, stats, count, seed, *, clip=None):
    """Sample ``count`` series and map them back to coefficient units."""
    from .diffusion import sample

    z = sample(model, sched, model.seq_len, model.channels, seed=seed, count=count, clip=clip)
    return [invert_norm(s, stats) for s in z]


def generate_videos(model, sched, stats, count, seed, h, w, n=128, *, clip=None):
    videos, flags = [], []
    for s in generate_series(model, sched, stats, count, seed, clip=clip):
        v, fl = series_to_video(s, h, w, n)
        videos.append(v)
        flags.append(fl)
    return videos, flags
