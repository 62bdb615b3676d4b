import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from efdphantoms import fixtures, metrics, report
from efdphantoms.errors import EmptyCurve, EmptyDataset
from efdphantoms.pipeline import ablation_rows

from conftest import disk, ellipse_mask


def all_alignment_costs(x, y):
    """Every monotone boundary-anchored warping path, enumerated."""
    n, m = len(x), len(y)

    def walk(i, j):
        c = abs(x[i] - y[j])
        if i == n - 1 and j == m - 1:
            yield c
            return
        for di, dj in ((1, 0), (0, 1), (1, 1)):
            if i + di < n and j + dj < m:
                for rest in walk(i + di, j + dj):
                    yield c + rest

    return list(walk(0, 0))


def dyadic_curve(rng, n):
    # multiples of 1/8 keep every partial sum exact in floating point
    return rng.integers(-40, 40, n) / 8.0


def test_dtw_examples(backend):
    assert metrics.dtw_distance([1, 2, 3], [1, 2, 3]) == 0
    assert metrics.dtw_distance([1, 2, 3], [1, 2, 2, 3]) == 0
    assert metrics.dtw_distance([0, 0, 0], [1, 1, 1]) == 1.0
    with pytest.raises(EmptyCurve):
        metrics.dtw_distance([], [1.0])


def test_dtw_matches_enumeration(backend):
    rng = np.random.default_rng(0)
    for _ in range(200):
        x = dyadic_curve(rng, int(rng.integers(1, 7)))
        y = dyadic_curve(rng, int(rng.integers(1, 7)))
        best = min(all_alignment_costs(x, y))
        assert metrics.dtw_distance(x, y) == best / max(len(x), len(y))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=12),
       st.lists(st.floats(-10, 10), min_size=1, max_size=12))
def test_dtw_symmetric_and_identity(x, y):
    assert metrics.dtw_distance(x, y) == pytest.approx(metrics.dtw_distance(y, x), abs=1e-12)
    assert metrics.dtw_distance(x, x) == 0
    assert metrics.dtw_distance(x, y) >= 0


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 15), st.integers(0, 10_000))
def test_dtw_below_diagonal(t_len, seed):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=t_len), rng.normal(size=t_len)
    assert metrics.dtw_distance(x, y) <= np.mean(np.abs(x - y)) + 1e-12


def test_dtw_identity_of_indiscernibles():
    rng = np.random.default_rng(1)
    for _ in range(200):
        x = dyadic_curve(rng, 5)
        y = x.copy()
        y[rng.integers(5)] += 0.125
        assert metrics.dtw_distance(x, y) > 0


# ---------------------------------------------------------------- features


def test_disk_video_features():
    video = np.stack([disk(20, (32, 32), (64, 64))] * 5)
    c = metrics.feature_curves(video)
    assert np.all(c["roundness"] >= 0.95)
    assert np.all(c["elongation"] <= 1.05)
    assert np.all(c["convexity"] >= 0.98 - 0.02)  # see test below for the large disk
    big = metrics.feature_curves(disk(40, (48, 48), (96, 96))[None])
    assert big["convexity"][0] >= 0.98


def test_square_roundness():
    m = np.zeros((64, 64), np.uint8)
    m[12:52, 12:52] = 1
    assert metrics.frame_features(m)["roundness"] == pytest.approx(np.pi / 4, abs=0.05)


def test_ellipse_elongation():
    m = ellipse_mask(20, 10, (32, 32), (64, 64))
    assert metrics.frame_features(m)["elongation"] == pytest.approx(2.0, abs=0.1)


def test_feature_ranges():
    video = fixtures.pulsating_ellipses(2, t_len=10, seed=3)
    for v in video:
        c = metrics.feature_curves(v)
        assert np.all((c["roundness"] > 0) & (c["roundness"] <= 1))
        assert np.all((c["convexity"] > 0) & (c["convexity"] <= 1))
        assert np.all(c["elongation"] >= 1) and np.all(c["area"] > 0)


def test_invalid_frames_are_gaps():
    v = np.stack([disk(10, (32, 32), (64, 64))] * 3)
    v[1] = 0
    c = metrics.feature_curves(v)
    assert np.isnan(c["area"][1]) and np.isfinite(c["area"][[0, 2]]).all()
    assert metrics.mean_curve([c["area"], c["area"] + 1])[0] == c["area"][0] + 0.5


def test_translation_and_scale_invariance():
    m = ellipse_mask(12, 7, (32, 32), (64, 64))
    f1 = metrics.frame_features(m)
    f_t = metrics.frame_features(np.roll(np.roll(m, 9, 0), -5, 1))
    assert f1 == f_t
    m2 = ellipse_mask(24, 14, (64, 64), (128, 128))
    f2 = metrics.frame_features(m2)
    assert f2["area"] / f1["area"] == pytest.approx(4, rel=0.05)
    for name in ("roundness", "elongation", "convexity"):
        assert f2[name] == pytest.approx(f1[name], rel=0.05)


# ---------------------------------------------------------------- Diff


def test_diff_examples():
    a = [np.array([1.0, 2, 3]), np.array([3.0, 4, 5])]
    assert metrics.diff_metric(a, a) == 0
    assert metrics.diff_metric(a, [c + 2.5 for c in a]) == pytest.approx(2.5)
    with pytest.raises(EmptyDataset):
        metrics.diff_metric([], a)


def test_diff_hand_computed():
    a = [np.array([100.0, 110, 120]), np.array([90.0, 95, 130]), np.array([80.0, 100, 110])]
    b = [np.array([85.0, 100, 140]), np.array([95.0, 105, 100]), np.array([105.0, 95, 115])]
    # means a: 90, 101.666.., 120 ; b: 95, 100, 118.333..
    # |diff|: 5, 1.666.., 1.666.. -> mean 2.777..
    assert metrics.diff_metric(a, b) == pytest.approx(25 / 9)
    # shorter dataset truncates the common length
    assert metrics.diff_metric(a, [c[:2] for c in b]) == pytest.approx((5 + 5 / 3) / 2)


# ---------------------------------------------------------------- evaluate


@pytest.fixture(scope="module")
def small_videos():
    return fixtures.pulsating_ellipses(6, t_len=8, seed=5)


def test_evaluate_identical(small_videos):
    rep = metrics.evaluate(small_videos, small_videos)
    for name in metrics.FEATURES:
        assert rep.metrics[name]["diff"] == (0.0, 0.0)
        assert rep.metrics[name]["dtw"] == (0.0, 0.0)
    assert set(rep.metrics) == set(metrics.FEATURES)


def test_evaluate_replications_deterministic(small_videos):
    def gen(seed):
        rng = np.random.default_rng(seed)
        return [small_videos[i] for i in rng.choice(len(small_videos), 4)]

    r1 = metrics.evaluate(small_videos, gen, replications=10, seed=7)
    r2 = metrics.evaluate(small_videos, gen, replications=10, seed=7)
    assert r1.metrics == r2.metrics
    assert len(r1.runs) == 10
    assert any(r1.metrics[n]["diff"][1] > 0 for n in metrics.FEATURES)
    with pytest.raises(EmptyDataset):
        metrics.evaluate([], small_videos)
    with pytest.raises(EmptyDataset):
        metrics.evaluate(small_videos, [])


def test_evaluate_pairwise_mode(small_videos):
    rep = metrics.evaluate(small_videos[:3], small_videos[3:], mode="pairwise")
    assert rep.mode == "pairwise"
    assert all(rep.value(n) > 0 for n in metrics.FEATURES)


# ---------------------------------------------------------------- reports


def test_report_outputs(small_videos):
    rep = metrics.evaluate(small_videos[:3], small_videos[3:])
    text = report.table_text(rep)
    assert text.count("Diff") == 4 and text.count("DTW") == 4
    rows = report.table_csv(rep).splitlines()
    assert rows[0] == "feature,metric,mean,std,replications" and len(rows) == 9
    curves = report.curves_csv(rep).splitlines()
    assert curves[0] == "t,feature,mean,q25,q75,dataset"
    assert len(curves) == 1 + 2 * 4 * 8
    svg = report.curves_svg(rep, "area")
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")


def test_ablation_csv_format(small_videos):
    reps = {1: metrics.evaluate(small_videos, small_videos), 5: metrics.evaluate(small_videos, small_videos)}
    text = report.ablation_csv(ablation_rows(reps)).splitlines()
    assert text[0] == "d,feature,metric,mean,std"
    assert len(text) == 1 + 2 * 4 * 2
    d, feature, metric, mean, std = text[1].split(",")
    assert d == "1" and feature in metrics.FEATURES and metric in ("diff", "dtw")
    float(mean), float(std)
