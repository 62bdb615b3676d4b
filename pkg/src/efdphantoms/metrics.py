"""Morphological feature curves and dataset-level Diff / DTW comparison."""
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import geometry, kernels
from .errors import EmptyCurve, EmptyDataset, PhantomError

FEATURES = ("area", "roundness", "elongation", "convexity")
PERIMETER_SMOOTHING = 1.0  # Gaussian sigma in contour samples


def smoothed_perimeter(contour, sigma=PERIMETER_SMOOTHING):
    """Polygon length after circular Gaussian smoothing of the coordinates,
    which removes the staircase zig-zag of pixel-traced contours."""
    p = np.asarray(contour, dtype=np.float64)
    if sigma > 0 and len(p) > 4:
        p = np.column_stack(
            [ndimage.gaussian_filter1d(p[:, i], sigma, mode="wrap") for i in range(2)]
        )
    return geometry.perimeter(p)


def frame_features(frame):
    m = geometry.check_valid_phantom(frame)
    area = float(m.sum())
    per = smoothed_perimeter(geometry.extract_contour(m))
    major, minor = geometry.moments_axes(m)
    return {
        "area": area,
        "roundness": min(1.0, 4.0 * np.pi * area / per ** 2),
        "elongation": major / minor,
        "convexity": area / geometry.convex_hull_area(m),
    }


def feature_curves(video):
    """Four ``(T,)`` curves; frames that are not valid phantoms give NaN."""
    v = geometry.as_video(video)
    out = {name: np.full(v.shape[0], np.nan) for name in FEATURES}
    for t, frame in enumerate(v):
        try:
            feats = frame_features(frame)
        except PhantomError:
            continue
        for name in FEATURES:
            out[name][t] = feats[name]
    return out


def dataset_curves(videos):
    """``{feature: [curve per video]}``."""
    per_video = [feature_curves(v) for v in videos]
    return {name: [c[name] for c in per_video] for name in FEATURES}


def _stack(curves):
    if not len(curves):
        raise EmptyDataset("no curves")
    t = min(len(c) for c in curves)
    return np.stack([np.asarray(c, dtype=np.float64)[:t] for c in curves])


def mean_curve(curves):
    """Per-frame mean over videos, skipping NaN gaps."""
    stack = _stack(curves)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return np.nanmean(stack, axis=0)


def band(curves, q=(25, 75)):
    stack = _stack(curves)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        mean = np.nanmean(stack, axis=0)
        lo, hi = np.nanpercentile(stack, q, axis=0)
    return mean, lo, hi


def _aligned(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    t = min(len(x), len(y))
    x, y = x[:t], y[:t]
    ok = np.isfinite(x) & np.isfinite(y)
    return x[ok], y[ok]


def curve_diff(x, y):
    """Mean absolute difference over the common length (NaN frames skipped)."""
    x, y = _aligned(x, y)
    if x.size == 0:
        raise EmptyCurve("no overlapping valid frames")
    return float(np.mean(np.abs(x - y)))


def diff_metric(a, b):
    """Diff between two datasets' population-mean curves of one feature."""
    if not len(a) or not len(b):
        raise EmptyDataset("both datasets need at least one curve")
    return curve_diff(mean_curve(a), mean_curve(b))


def dtw_distance(x, y):
    """L1 dynamic time warping cost divided by ``max(len(x), len(y))``."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size == 0 or y.size == 0:
        raise EmptyCurve("DTW needs non-empty curves")
    return kernels.dtw_cost(x, y) / max(x.size, y.size)


def _finite(c):
    c = np.asarray(c, dtype=np.float64)
    return c[np.isfinite(c)]


def dtw_metric(a, b):
    if not len(a) or not len(b):
        raise EmptyDataset("both datasets need at least one curve")
    return dtw_distance(_finite(mean_curve(a)), _finite(mean_curve(b)))


def pairwise_metrics(a, b):
    """Mean per-video-pair ``(Diff, DTW)``; sensitivity check for the
    mean-curve definition."""
    diffs, dtws = [], []
    for x in a:
        for y in b:
            diffs.append(curve_diff(x, y))
            dtws.append(dtw_distance(_finite(x), _finite(y)))
    return float(np.mean(diffs)), float(np.mean(dtws))


@dataclass
class EvalReport:
    """``metrics[feature][metric] = (mean, std)`` over replications."""

    metrics: dict
    runs: list  # per replication: {feature: {"diff": v, "dtw": v}}
    curves: dict = field(default_factory=dict)  # dataset -> feature -> (mean, q25, q75)
    mode: str = "mean"

    def value(self, feature, metric="diff"):
        return self.metrics[feature][metric][0]


def compare(real_curves, synth_curves, mode="mean"):
    out = {}
    for name in FEATURES:
        if mode == "mean":
            out[name] = {
                "diff": diff_metric(real_curves[name], synth_curves[name]),
                "dtw": dtw_metric(real_curves[name], synth_curves[name]),
            }
        elif mode == "pairwise":
            d, w = pairwise_metrics(real_curves[name], synth_curves[name])
            out[name] = {"diff": d, "dtw": w}
        else:
            raise ValueError(f"unknown mode {mode!r}")
    return out


def evaluate(real, synth, replications=1, seed=0, *, mode="mean"):
    """Compare real videos against synthetic ones.

    ``synth`` is either a list of videos (reused every replication) or a
    callable ``synth(rep_seed) -> list of videos`` that regenerates the
    synthetic set per replication.
    """
    if not len(real):
        raise EmptyDataset("real dataset is empty")
    if replications < 1:
        raise ValueError("replications must be >= 1")
    real_curves = dataset_curves(real)
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(replications)]
    runs, synth_curves = [], None
    for rep_seed in seeds:
        videos = synth(rep_seed) if callable(synth) else synth
        if not len(videos):
            raise EmptyDataset("synthetic dataset is empty")
        synth_curves = dataset_curves(videos)
        runs.append(compare(real_curves, synth_curves, mode))
    metrics = {}
    for name in FEATURES:
        metrics[name] = {}
        for metric in ("diff", "dtw"):
            vals = np.array([r[name][metric] for r in runs])
            std = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
            metrics[name][metric] = (float(vals.mean()), std)
    curves = {
        "real": {n: band(real_curves[n]) for n in FEATURES},
        "synthetic": {n: band(synth_curves[n]) for n in FEATURES},
    }
    return EvalReport(metrics, runs, curves, mode)
