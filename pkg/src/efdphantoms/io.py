"""File formats: MVB1 mask videos, PGM frame directories, EFD series CSV."""
import logging
import struct
from pathlib import Path

import numpy as np

from .efd import EfdSeries, NormStats
from .errors import InconsistentDimensions, MalformedManifest

log = logging.getLogger(__name__)

MVB_MAGIC = b"MVB1"
RUN_MANIFEST = "run_manifest.json"  # written next to outputs by the CLI


def write_mvb(path, video):
    v = np.asarray(video)
    if v.ndim != 3:
        raise ValueError("video must be (T, H, W)")
    data = (v != 0).astype(np.uint8)
    t, h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(MVB_MAGIC)
        fh.write(struct.pack("<III", t, h, w))
        fh.write(data.tobytes(order="C"))


def read_mvb(path):
    raw = Path(path).read_bytes()
    if raw[:4] != MVB_MAGIC or len(raw) < 16:
        raise MalformedManifest(f"{path}: not an MVB1 file")
    t, h, w = struct.unpack("<III", raw[4:16])
    body = raw[16:]
    if len(body) != t * h * w:
        raise InconsistentDimensions(
            f"{path}: header says {t}x{h}x{w}, payload has {len(body)} bytes"
        )
    video = np.frombuffer(body, dtype=np.uint8).reshape(t, h, w).copy()
    if video.max(initial=0) > 1:
        raise MalformedManifest(f"{path}: payload bytes must be 0 or 1")
    return video


def write_pgm_dir(directory, video):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    v = (np.asarray(video) != 0).astype(np.uint8)
    t, h, w = v.shape
    for i, frame in enumerate(v):
        header = f"P5\n{w} {h}\n255\n".encode("ascii")
        (d / f"frame_{i:04d}.pgm").write_bytes(header + (frame * 255).astype(np.uint8).tobytes())
    (d / "manifest.txt").write_text(f"{t} {h} {w}\n")


def _read_pgm(path):
    raw = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        start = pos
        while not raw[pos:pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos])
    if tokens[0] != b"P5":
        raise MalformedManifest(f"{path}: only binary P5 PGM is supported")
    w, h, maxval = (int(x) for x in tokens[1:])
    data = np.frombuffer(raw[pos + 1:pos + 1 + w * h], dtype=np.uint8)
    if data.size != w * h or maxval > 255:
        raise MalformedManifest(f"{path}: truncated or 16-bit PGM")
    return (data.reshape(h, w) > 0).astype(np.uint8)


def read_pgm_dir(directory):
    d = Path(directory)
    manifest = d / "manifest.txt"
    if not manifest.is_file():
        raise MalformedManifest(f"{d}: missing manifest.txt")
    try:
        t, h, w = (int(x) for x in manifest.read_text().split())
    except ValueError as exc:
        raise MalformedManifest(f"{manifest}: expected 'T H W'") from exc
    frames = []
    for i in range(t):
        f = d / f"frame_{i:04d}.pgm"
        if not f.is_file():
            raise MalformedManifest(f"{d}: missing {f.name}")
        frame = _read_pgm(f)
        if frame.shape != (h, w):
            raise InconsistentDimensions(f"{f}: {frame.shape} != {(h, w)}")
        frames.append(frame)
    known = {f"frame_{i:04d}.pgm" for i in range(t)} | {"manifest.txt"}
    for extra in sorted(p.name for p in d.iterdir() if p.name not in known):
        log.warning("ignoring unknown file %s", d / extra)
    return np.stack(frames)


def ingest_mvb(directory):
    """Load every ``*.mvb`` file (and PGM frame sub-directory) under
    ``directory``, sorted by name."""
    d = Path(directory)
    if not d.is_dir():
        raise MalformedManifest(f"{d}: not a directory")
    videos, names = [], []
    for p in sorted(d.iterdir()):
        if p.is_file() and p.suffix == ".mvb":
            videos.append(read_mvb(p))
            names.append(p.stem)
        elif p.is_dir() and (p / "manifest.txt").is_file():
            videos.append(read_pgm_dir(p))
            names.append(p.name)
        elif p.name != RUN_MANIFEST:
            log.warning("ignoring unknown entry %s", p)
    if not videos:
        raise MalformedManifest(f"{d}: no MVB1 videos found")
    return videos, names


def series_header(d):
    cols = ["t"]
    for n in range(1, d + 1):
        cols += [f"a{n}", f"b{n}", f"c{n}", f"d{n}"]
    return cols


def write_series_csv(path, series, *, stats=None, extra=None):
    """Write one series as CSV plus a ``<path>.meta`` key=value sidecar."""
    path = Path(path)
    z = series.values
    lines = [",".join(series_header(series.d))]
    for t in range(series.T):
        lines.append(",".join([str(t)] + [f"{v:.17g}" for v in z[:, t]]))
    path.write_text("\n".join(lines) + "\n")
    meta = {
        "d": series.d,
        "T": series.T,
        "N": series.n_points,
        "phase_anchored": int(series.phase_anchored),
        "normalized": int(stats is not None),
    }
    if stats is not None:
        meta["norm_min"] = ",".join(f"{v:.17g}" for v in stats.lo)
        meta["norm_max"] = ",".join(f"{v:.17g}" for v in stats.hi)
    meta.update(extra or {})
    write_keyvalue(meta_path(path), meta)


def meta_path(path):
    path = Path(path)
    return path.with_name(path.name + ".meta")


def read_series_csv(path):
    """Return ``(series, stats_or_None)``."""
    path = Path(path)
    rows = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if not rows:
        raise MalformedManifest(f"{path}: empty series file")
    header = rows[0].split(",")
    d = (len(header) - 1) // 4
    if header != series_header(d):
        raise MalformedManifest(f"{path}: unexpected header")
    z = np.array([[float(v) for v in r.split(",")[1:]] for r in rows[1:]]).T
    meta = read_keyvalue(meta_path(path)) if meta_path(path).is_file() else {}
    stats = None
    if meta.get("normalized") == "1":
        stats = NormStats(
            [float(v) for v in meta["norm_min"].split(",")],
            [float(v) for v in meta["norm_max"].split(",")],
        )
    series = EfdSeries(
        z.reshape(4 * d, -1),
        n_points=int(meta.get("N", 128)),
        phase_anchored=meta.get("phase_anchored", "1") == "1",
        meta=meta,
    )
    return series, stats


def read_series_dir(directory):
    d = Path(directory)
    files = sorted(d.glob("*.csv"))
    if not files:
        raise MalformedManifest(f"{d}: no series CSV files")
    out = [read_series_csv(f) for f in files]
    return [s for s, _ in out], [f.stem for f in files], [st for _, st in out]


def write_keyvalue(path, mapping):
    Path(path).write_text("".join(f"{k}={v}\n" for k, v in mapping.items()))


def read_keyvalue(path):
    out = {}
    for ln in Path(path).read_text().splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        if "=" not in ln:
            raise MalformedManifest(f"{path}: bad line {ln!r}")
        k, v = ln.split("=", 1)
        out[k.strip()] = v.strip()
    return out
