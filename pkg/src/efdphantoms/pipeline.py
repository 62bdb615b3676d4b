"""End-to-end helpers shared by the CLI and the acceptance runs."""
import logging
import time

import numpy as np

from .efd import DEFAULT_N, EfdSeries, apply_norm, encode_video, fit_norm
from .metrics import evaluate

log = logging.getLogger(__name__)


def truncate(series, d):
    """Keep the first ``d`` harmonics of each series."""
    out = []
    for s in series:
        if s.d < d:
            raise ValueError(f"series has only {s.d} harmonics, asked for {d}")
        out.append(EfdSeries(s.values[: 4 * d], n_points=s.n_points, phase_anchored=s.phase_anchored))
    return out


def train_on_series(series, cfg, *, log_path=None):
    """Fit min-max statistics, normalise to ``[0, 1]`` and train.
    Returns ``(result, stats)``."""
    from .diffusion import train

    stats = fit_norm(series)
    data = [apply_norm(s, stats) for s in series]
    return train(data, cfg, log_path=log_path), stats


def generator_for(model, stats, k_steps, count, canvas, n=DEFAULT_N):
    """Closure ``seed -> list of videos`` for replicated evaluation."""
    from .diffusion import cosine_schedule
    from .synth import generate_videos

    sched = cosine_schedule(k_steps)
    h, w = canvas

    def gen(seed):
        videos, _ = generate_videos(model, sched, stats, count, int(seed), h, w, n)
        return videos

    return gen


def ablation_sweep(train_videos, test_videos, d_values, cfg, *, replications=1, count=50,
                   n=DEFAULT_N, canvas=(96, 96), seed=0):
    """Encode at ``max(d_values)`` once, then per ``d`` truncate, retrain,
    regenerate and evaluate against ``test_videos``. Returns ``{d: EvalReport}``."""
    d_values = list(d_values)
    if not d_values:
        raise ValueError("d_values is empty")
    full = [encode_video(v, max(d_values), n) for v in train_videos]
    reports = {}
    for d in d_values:
        t0 = time.perf_counter()
        result, stats = train_on_series(truncate(full, d), cfg)
        gen = generator_for(result.model, stats, cfg.k_steps, count, canvas, n)
        reports[d] = evaluate(test_videos, gen, replications=replications, seed=seed)
        log.info("d=%d: %d training steps, %.1fs", d, result.history[-1]["step"], time.perf_counter() - t0)
    return reports


def ablation_rows(reports):
    rows = []
    for d, rep in reports.items():
        for feature, vals in rep.metrics.items():
            for metric, (mean, std) in vals.items():
                rows.append((d, feature, metric, mean, std))
    return rows


def real_vs_real(train_videos, test_videos):
    """Reference report comparing two real sets (no generation)."""
    return evaluate(test_videos, list(train_videos))


def fraction_valid(flags):
    flat = [f for video in flags for f in video]
    return float(np.mean([not f for f in flat])) if flat else 1.0
