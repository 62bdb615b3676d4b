"""From labelled tracking videos to fixed-length single-cell phantom videos.

Steps: ingest label frames and the lineage table, flag incomplete instances
(border contact, low solidity combined with overlap), crop every instance on
a fixed canvas centred on its centroid, cut sliding windows over runs of
valid frames, and split whole lineages between train and test.
"""
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import geometry
from .errors import InconsistentDimensions, MalformedManifest, NoForeground, SingleLineage
from .io import write_mvb

log = logging.getLogger(__name__)

S_MIN = 0.969
O_MAX = 0.017
BORDER_PX = 10
T_WIN = 50
STRIDE = 10
CANVAS = 128
TEST_FRACTION = 0.1

_IMAGE_SUFFIXES = {".tif", ".tiff", ".png", ".pgm"}


@dataclass(frozen=True)
class Track:
    track_id: int
    start: int
    end: int
    parent: int = 0


@dataclass
class LabeledVideo:
    labels: np.ndarray  # (T, H, W) instance ids, 0 = background
    tracks: list

    @property
    def shape(self):
        return self.labels.shape

    def track(self, track_id):
        for tr in self.tracks:
            if tr.track_id == track_id:
                return tr
        raise KeyError(track_id)


@dataclass
class PhantomTrack:
    track_id: int
    start: int
    crops: np.ndarray  # (L, canvas, canvas)
    valid: np.ndarray  # (L,) bool
    root: int = 0


@dataclass
class SplitManifest:
    train: list
    test: list
    fraction: float
    window_roots: dict = field(default_factory=dict)

    def side(self, root):
        return "test" if root in set(self.test) else "train"

    def to_text(self):
        lines = [
            f"fraction={self.fraction!r}",
            "train=" + ",".join(str(r) for r in self.train),
            "test=" + ",".join(str(r) for r in self.test),
        ]
        for wid in sorted(self.window_roots):
            root = self.window_roots[wid]
            lines.append(f"window {wid} {root} {self.side(root)}")
        return "\n".join(lines) + "\n"


def parse_lineage(text):
    """Parse the 4-column ``track start end parent`` table."""
    tracks = []
    for lineno, ln in enumerate(text.splitlines(), 1):
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        parts = ln.split()
        if len(parts) != 4:
            raise MalformedManifest(f"lineage line {lineno}: expected 4 columns, got {len(parts)}")
        try:
            tid, start, end, parent = (int(p) for p in parts)
        except ValueError as exc:
            raise MalformedManifest(f"lineage line {lineno}: non-integer field") from exc
        if end < start:
            raise MalformedManifest(f"lineage line {lineno}: end before start")
        tracks.append(Track(tid, start, end, parent))
    ids = {t.track_id for t in tracks}
    for t in tracks:
        if t.parent and t.parent not in ids:
            raise MalformedManifest(f"track {t.track_id}: unknown parent {t.parent}")
    return tracks


def _frame_index(path):
    nums = re.findall(r"\d+", path.stem)
    return int(nums[-1]) if nums else -1


def _read_label_image(path):
    from PIL import Image

    with Image.open(path) as im:
        return np.array(im).astype(np.uint16)


def ingest_ctc(directory):
    """Read numbered 16-bit label images plus a lineage text file.

    The lineage file is ``man_track.txt`` if present, otherwise the single
    ``*.txt`` file in the directory.
    """
    d = Path(directory)
    if not d.is_dir():
        raise MalformedManifest(f"{d}: not a directory")
    entries = sorted(d.iterdir())
    images = [p for p in entries if p.suffix.lower() in _IMAGE_SUFFIXES]
    texts = [p for p in entries if p.suffix == ".txt"]
    lineage = d / "man_track.txt"
    if not lineage.is_file():
        if len(texts) != 1:
            raise MalformedManifest(f"{d}: need man_track.txt or exactly one .txt lineage file")
        lineage = texts[0]
    if not images:
        raise MalformedManifest(f"{d}: no label images")
    for p in entries:
        if p not in images and p != lineage:
            log.warning("ignoring unknown file %s", p)
    images.sort(key=_frame_index)
    frames = [_read_label_image(p) for p in images]
    shapes = {f.shape for f in frames}
    if len(shapes) != 1 or frames[0].ndim != 2:
        raise InconsistentDimensions(f"{d}: label images differ in size: {sorted(shapes)}")
    tracks = parse_lineage(lineage.read_text())
    return LabeledVideo(np.stack(frames), tracks)


def solidity(frame):
    m = geometry.as_frame(frame)
    count = int(m.sum())
    if count == 0:
        raise NoForeground("frame has no foreground pixels")
    return count / geometry.convex_hull_area(m)


def overlap_ratio(frame_i, frame_j):
    """Share of the hull of ``frame_i`` covered by pixels of ``frame_j``."""
    mi = geometry.as_frame(frame_i)
    mj = geometry.as_frame(frame_j)
    if mi.shape != mj.shape:
        raise ValueError("frames must share a canvas")
    hull = geometry.convex_hull_polygon(mi)
    inside = geometry.hull_mask(mi, hull)
    return float(np.count_nonzero(inside & mj)) / geometry.signed_area(hull)


def border_contact(frame):
    m = geometry.as_frame(frame)
    edge = np.zeros_like(m, dtype=bool)
    edge[0, :] = edge[-1, :] = edge[:, 0] = edge[:, -1] = True
    return int(np.count_nonzero(m.astype(bool) & edge))


def instance_measures(labels):
    """Per-instance ``(solidity, max_overlap, border_contact)`` for one label frame."""
    labels = np.asarray(labels)
    h, w = labels.shape
    out = {}
    for lab, sl in enumerate(ndimage.find_objects(labels), 1):
        if sl is None:
            continue
        window = labels[sl]
        m = (window == lab).astype(np.uint8)
        hull = geometry.convex_hull_polygon(m)
        area = geometry.signed_area(hull)
        inside = geometry.hull_mask(m, hull).astype(bool)
        counts = np.bincount(window[inside].ravel(), minlength=lab + 1)
        counts[0] = counts[lab] = 0
        rows, cols = np.nonzero(m)
        rows = rows + sl[0].start
        cols = cols + sl[1].start
        border = int(np.count_nonzero((rows == 0) | (rows == h - 1) | (cols == 0) | (cols == w - 1)))
        out[lab] = (float(m.sum()) / area, float(counts.max()) / area, border)
    return out


def filter_instances(video, s_min=S_MIN, o_max=O_MAX, border_px=BORDER_PX):
    """Validity flags over each track's life span.

    A cell-frame is discarded when it touches the border with more than
    ``border_px`` pixels, or when its solidity is below ``s_min`` and its
    largest overlap with another instance exceeds ``o_max``. Frames where
    the track's id is missing are invalid.
    """
    per_frame = [instance_measures(fr) for fr in video.labels]
    flags = {}
    for tr in video.tracks:
        span = range(tr.start, min(tr.end, len(per_frame) - 1) + 1)
        ok = np.zeros(tr.end - tr.start + 1, dtype=bool)
        for k, t in enumerate(span):
            meas = per_frame[t].get(tr.track_id)
            if meas is None:
                continue
            sol, overlap, border = meas
            bad = border > border_px or (sol < s_min and overlap > o_max)
            ok[k] = not bad
        flags[tr.track_id] = ok
    return flags


def crop_centered(mask, canvas=CANVAS):
    """Place ``mask`` on a ``canvas x canvas`` frame centred on its centroid.

    Returns ``None`` when the instance does not fit.
    """
    m = geometry.as_frame(mask)
    rows, cols = np.nonzero(m)
    if rows.size == 0:
        return None
    cy, cx = rows.mean(), cols.mean()
    oy = int(round(cy)) - canvas // 2
    ox = int(round(cx)) - canvas // 2
    r, c = rows - oy, cols - ox
    if r.min() < 0 or c.min() < 0 or r.max() >= canvas or c.max() >= canvas:
        return None
    out = np.zeros((canvas, canvas), dtype=np.uint8)
    out[r, c] = 1
    return out


def lineage_roots(tracks):
    parent = {t.track_id: t.parent for t in tracks}
    roots = {}
    for tid in parent:
        cur, seen = tid, set()
        while parent.get(cur, 0) and cur not in seen:
            seen.add(cur)
            cur = parent[cur]
        roots[tid] = cur
    return roots


def build_tracks(video, flags, canvas=CANVAS):
    roots = lineage_roots(video.tracks)
    out = []
    n_frames = video.labels.shape[0]
    for tr in video.tracks:
        length = tr.end - tr.start + 1
        crops = np.zeros((length, canvas, canvas), dtype=np.uint8)
        valid = np.array(flags.get(tr.track_id, np.zeros(length, bool)), dtype=bool)
        for k in range(length):
            t = tr.start + k
            if t >= n_frames or not valid[k]:
                valid[k] = False
                continue
            crop = crop_centered(video.labels[t] == tr.track_id, canvas)
            if crop is None:
                log.warning("track %d frame %d larger than %dpx canvas; dropped",
                            tr.track_id, t, canvas)
                valid[k] = False
            elif not geometry.is_valid_phantom(crop):
                valid[k] = False
            else:
                crops[k] = crop
        out.append(PhantomTrack(tr.track_id, tr.start, crops, valid, roots[tr.track_id]))
    return out


def valid_runs(valid):
    """Maximal runs of consecutive True values as ``(start, end_inclusive)``."""
    v = np.concatenate([[False], np.asarray(valid, dtype=bool), [False]])
    edges = np.flatnonzero(v[1:] != v[:-1])
    return [(int(a), int(b) - 1) for a, b in zip(edges[::2], edges[1::2])]


def window_starts(valid, t_win=T_WIN, stride=STRIDE):
    if t_win < 2 or stride < 1:
        raise ValueError("t_win must be >= 2 and stride >= 1")
    starts = []
    for a, b in valid_runs(valid):
        starts.extend(range(a, b + 2 - t_win, stride))
    return starts


def sliding_windows(track, t_win=T_WIN, stride=STRIDE):
    """``(start_offset, video)`` pairs covering only uninterrupted valid runs."""
    return [(s, track.crops[s:s + t_win].copy()) for s in window_starts(track.valid, t_win, stride)]


def lineage_split(window_counts, test_fraction=TEST_FRACTION, seed=0):
    """Assign whole lineages to train or test.

    ``window_counts`` maps lineage root id -> number of windows. Lineages are
    taken largest-first (ties broken by a seeded shuffle) into the test side
    until it holds at least ``test_fraction`` of all windows; at least one
    lineage always stays in train.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    counts = {int(k): int(v) for k, v in window_counts.items()}
    populated = sorted(r for r, c in counts.items() if c > 0)
    if len(populated) < 2:
        raise SingleLineage("need at least two lineages with windows to split")
    rng = np.random.default_rng(seed)
    tie = dict(zip(populated, rng.permutation(len(populated))))
    order = sorted(populated, key=lambda r: (-counts[r], tie[r]))
    total = sum(counts[r] for r in populated)
    test, taken = [], 0
    for root in order[:-1]:
        if taken >= test_fraction * total:
            break
        test.append(root)
        taken += counts[root]
    test_set = set(test)
    train = sorted(r for r in counts if r not in test_set)
    return SplitManifest(train=train, test=sorted(test), fraction=float(test_fraction))


def prepare(video, out_dir, *, s_min=S_MIN, o_max=O_MAX, border_px=BORDER_PX,
            t_win=T_WIN, stride=STRIDE, canvas=CANVAS, test_fraction=TEST_FRACTION, seed=0):
    """Full preprocessing; writes ``windows/<split>/<id>.mvb`` and
    ``split_manifest.txt`` under ``out_dir`` and returns the manifest."""
    flags = filter_instances(video, s_min, o_max, border_px)
    tracks = build_tracks(video, flags, canvas)
    windows = {}
    for tr in tracks:
        for s, clip in sliding_windows(tr, t_win, stride):
            windows[f"{tr.track_id:05d}_{tr.start + s:04d}"] = (tr.root, clip)
    counts = {}
    for tr in tracks:
        counts.setdefault(tr.root, 0)
    for root, _ in windows.values():
        counts[root] += 1
    manifest = lineage_split(counts, test_fraction, seed)
    manifest.window_roots = {wid: root for wid, (root, _) in windows.items()}
    out = Path(out_dir)
    for split in ("train", "test"):
        (out / "windows" / split).mkdir(parents=True, exist_ok=True)
    for wid, (root, clip) in windows.items():
        write_mvb(out / "windows" / manifest.side(root) / f"{wid}.mvb", clip)
    (out / "split_manifest.txt").write_text(manifest.to_text())
    return manifest
