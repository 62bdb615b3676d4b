"""Text/CSV/SVG renderings of evaluation reports and ablation sweeps."""
import csv
import io

import numpy as np

from .metrics import FEATURES

TITLES = {"area": "Area", "roundness": "Roundness", "elongation": "Elongation", "convexity": "Convexity"}


def table_text(report, label="Synthetic"):
    lines = [f"{'Feature':<12} {'Metric':<6} {label:>22}"]
    lines.append("-" * len(lines[0]))
    for name in FEATURES:
        for metric, tag in (("diff", "Diff"), ("dtw", "DTW")):
            mean, std = report.metrics[name][metric]
            cell = f"{mean:.2f} +- {std:.2f}" if len(report.runs) > 1 else f"{mean:.2f}"
            lines.append(f"{TITLES[name] if metric == 'diff' else '':<12} {tag:<6} {cell:>22}")
    return "\n".join(lines) + "\n"


def table_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["feature", "metric", "mean", "std", "replications"])
    for name in FEATURES:
        for metric in ("diff", "dtw"):
            mean, std = report.metrics[name][metric]
            w.writerow([name, metric, repr(mean), repr(std), len(report.runs)])
    return buf.getvalue()


def curves_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "feature", "mean", "q25", "q75", "dataset"])
    for dataset, feats in report.curves.items():
        for name in FEATURES:
            mean, lo, hi = feats[name]
            for t in range(len(mean)):
                w.writerow([t, name, repr(float(mean[t])), repr(float(lo[t])), repr(float(hi[t])), dataset])
    return buf.getvalue()


def ablation_csv(rows):
    """``rows``: iterable of ``(d, feature, metric, mean, std)``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["d", "feature", "metric", "mean", "std"])
    for d, feature, metric, mean, std in rows:
        w.writerow([d, feature, metric, repr(float(mean)), repr(float(std))])
    return buf.getvalue()


_COLORS = {"real": "#1f77b4", "synthetic": "#d62728"}


def curves_svg(report, feature, width=480, height=300, pad=40):
    """One line plot of mean curves with shaded interquartile bands."""
    series = {ds: feats[feature] for ds, feats in report.curves.items()}
    finite = np.concatenate([np.concatenate(v) for v in series.values()])
    finite = finite[np.isfinite(finite)]
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if hi == lo:
        hi = lo + 1.0
    t_max = max(len(v[0]) for v in series.values()) - 1 or 1

    def xy(t, v):
        x = pad + (width - 2 * pad) * t / t_max
        y = height - pad - (height - 2 * pad) * (v - lo) / (hi - lo)
        return f"{x:.2f},{y:.2f}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{TITLES.get(feature, feature)}</text>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{pad - 4}" y="{height - pad}" text-anchor="end" font-size="10">{lo:.3g}</text>',
        f'<text x="{pad - 4}" y="{pad + 4}" text-anchor="end" font-size="10">{hi:.3g}</text>',
    ]
    for k, (ds, (mean, q25, q75)) in enumerate(series.items()):
        color = _COLORS.get(ds, "#555555")
        ok = np.isfinite(mean) & np.isfinite(q25) & np.isfinite(q75)
        ts = np.flatnonzero(ok)
        if ts.size:
            poly = [xy(t, q75[t]) for t in ts] + [xy(t, q25[t]) for t in ts[::-1]]
            parts.append(f'<polygon points="{" ".join(poly)}" fill="{color}" fill-opacity="0.2" stroke="none"/>')
            line = " ".join(xy(t, mean[t]) for t in ts)
            parts.append(f'<polyline points="{line}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(
            f'<text x="{width - pad}" y="{pad + 14 * k}" text-anchor="end" font-size="11" fill="{color}">{ds}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
