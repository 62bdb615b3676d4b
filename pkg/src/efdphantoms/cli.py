"""Command-line entry point: ``efdphantoms <command> [options]``.

Commands: fixtures, prep, encode, select-d, train, generate, decode,
evaluate, ablate. Options can also come from ``--config FILE`` (key=value
lines, keys named like the long flags); explicit flags win. Every command
writes ``run_manifest.json`` (config hash, seed, timings, artifact
checksums, status) into its output directory, also on failure.

Exit status: 0 success, 1 invalid configuration, 2 runtime error.
"""
import argparse
import hashlib
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import PhantomError
from .io import RUN_MANIFEST as MANIFEST

log = logging.getLogger("efdphantoms")

DIR_ARGS = ("input", "real", "synth", "train", "test")
FILE_ARGS = ("checkpoint",)


class ConfigError(PhantomError, ValueError):
    module = "cli"


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _existing_dir(value):
    p = Path(value)
    if not p.is_dir():
        raise ConfigError(f"directory does not exist: {p}")
    return p


def _existing_file(value):
    p = Path(value)
    if not p.is_file():
        raise ConfigError(f"file does not exist: {p}")
    return p


def validate_paths(args):
    for name in DIR_ARGS:
        if getattr(args, name, None) is not None:
            setattr(args, name, _existing_dir(getattr(args, name)))
    for name in FILE_ARGS:
        if getattr(args, name, None) is not None:
            setattr(args, name, _existing_file(getattr(args, name)))


def _d_values(text):
    try:
        vals = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --d-values {text!r}") from exc
    if not vals or min(vals) < 1:
        raise ConfigError("--d-values needs positive integers")
    return vals


def _check_codec(d, n):
    if d < 1:
        raise ConfigError("d must be >= 1")
    if n < 2 * d + 2:
        raise ConfigError(f"N={n} too small for d={d} (needs N >= 2d+2)")


# ---------------------------------------------------------------- commands


def cmd_fixtures(args, run):
    from . import fixtures
    from .io import write_mvb

    makers = {
        "pulsating": lambda: fixtures.pulsating_ellipses(args.count, args.t_len, args.canvas, args.seed),
        "discs": lambda: fixtures.discs(args.count, args.t_len, args.canvas, args.seed),
        "squares": lambda: fixtures.squares(args.count, args.t_len, args.canvas, args.seed),
    }
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for i, video in enumerate(makers[args.kind]()):
        path = out / f"{args.kind}_{i:05d}.mvb"
        write_mvb(path, video)
        run.artifact(path)


def cmd_prep(args, run):
    from .dataset import ingest_ctc, prepare

    video = ingest_ctc(args.input)
    manifest = prepare(
        video, args.output, s_min=args.s_min, o_max=args.o_max, border_px=args.border_px,
        t_win=args.t_win, stride=args.stride, canvas=args.canvas,
        test_fraction=args.test_fraction, seed=args.seed,
    )
    for p in sorted(Path(args.output, "windows").rglob("*.mvb")):
        run.artifact(p)
    run.artifact(Path(args.output) / "split_manifest.txt")
    n_test = sum(1 for r in manifest.window_roots.values() if r in set(manifest.test))
    run.info["windows"] = len(manifest.window_roots)
    run.info["test_windows"] = n_test
    print(f"windows = {len(manifest.window_roots)} (train {len(manifest.window_roots) - n_test}, test {n_test})")


def cmd_encode(args, run):
    from .efd import encode_video
    from .errors import FrameError
    from .io import ingest_mvb, write_series_csv

    _check_codec(args.d, args.n)
    videos, names = ingest_mvb(args.input)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for video, name in zip(videos, names):
        try:
            series = encode_video(video, args.d, args.n, phase_anchor=not args.no_phase_anchor)
        except FrameError as exc:
            raise type(exc)(exc.index, f"{name}: {exc.cause}") from exc
        path = out / f"{name}.csv"
        write_series_csv(path, series)
        run.artifact(path)


def _load_series_or_encode(path, d_max, n):
    from .efd import encode_video
    from .io import ingest_mvb, read_series_dir

    p = Path(path)
    if any(p.glob("*.csv")):
        return read_series_dir(p)[0]
    videos, _ = ingest_mvb(p)
    return [encode_video(v, d_max, n) for v in videos]


def cmd_select_d(args, run):
    from .efd import select_harmonics

    _check_codec(args.d_max, args.n)
    series = _load_series_or_encode(args.input, args.d_max, args.n)
    d = select_harmonics(series, args.fraction)
    run.info["d"] = d
    print(f"d = {d}")
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        (out / "selected_d.txt").write_text(f"d={d}\nfraction={args.fraction!r}\n")
        run.artifact(out / "selected_d.txt")


def _train_config(args):
    from .diffusion import TrainConfig

    cfg = TrainConfig(
        lambda_time=args.lambda_time, lambda_freq=args.lambda_freq, batch_size=args.batch_size,
        steps=args.steps, lr=args.lr, seed=args.seed, ema_decay=args.ema_decay,
        k_steps=args.k_steps, width=args.width, depth=args.depth, heads=args.heads,
        time_budget=args.time_budget,
    )
    try:
        return cfg.validate()
    except PhantomError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_train(args, run):
    from .diffusion import save_checkpoint
    from .io import read_series_dir
    from .pipeline import train_on_series, truncate

    cfg = _train_config(args)
    series, _, _ = read_series_dir(args.input)
    if args.d:
        try:
            series = truncate(series, args.d)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    result, stats = train_on_series(series, cfg, log_path=out / "train_log.csv")
    ckpt = out / "model.efdm"
    save_checkpoint(ckpt, result.model, train_cfg=cfg, stats=stats,
                    extra={"efd.n_points": series[0].n_points, "efd.d": series[0].d})
    run.artifact(ckpt)
    run.artifact(out / "train_log.csv")
    run.info["final_loss"] = result.history[-1]["loss"]
    run.info["train_seconds"] = result.seconds


def cmd_generate(args, run):
    from .diffusion import cosine_schedule, load_checkpoint
    from .efd import EfdSeries
    from .io import write_mvb, write_series_csv
    from .synth import generate_series, series_to_video

    model, tcfg, stats, config = load_checkpoint(args.checkpoint)
    if stats is None:
        raise ConfigError("checkpoint carries no normalisation statistics")
    n = args.n or int(config.get("efd.n_points", 128))
    _check_codec(model.channels // 4, n)
    sched = cosine_schedule(tcfg.k_steps)
    out = Path(args.output)
    (out / "videos").mkdir(parents=True, exist_ok=True)
    (out / "series").mkdir(parents=True, exist_ok=True)
    raw = generate_series(model, sched, stats, args.count, args.seed)
    n_flagged = 0
    for i, z in enumerate(raw):
        video, flags = series_to_video(z, args.height, args.width, n)
        n_flagged += sum(bool(f) for f in flags)
        vpath = out / "videos" / f"synth_{i:05d}.mvb"
        spath = out / "series" / f"synth_{i:05d}.csv"
        write_mvb(vpath, video)
        write_series_csv(spath, EfdSeries(z, n_points=n))
        run.artifact(vpath)
        run.artifact(spath)
    run.info["flagged_frames"] = n_flagged


def cmd_decode(args, run):
    from .io import read_series_dir, write_mvb
    from .synth import series_to_video

    series, names, _ = read_series_dir(args.input)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for s, name in zip(series, names):
        n = args.n or s.n_points
        _check_codec(s.d, n)
        video, _ = series_to_video(s.values, args.height, args.width, n)
        path = out / f"{name}.mvb"
        write_mvb(path, video)
        run.artifact(path)


def _write_report(report, out, run, label="Synthetic"):
    from . import report as rpt
    from .metrics import FEATURES

    out.mkdir(parents=True, exist_ok=True)
    files = {
        "report.txt": rpt.table_text(report, label),
        "report.csv": rpt.table_csv(report),
        "curves.csv": rpt.curves_csv(report),
    }
    for name in FEATURES:
        files[f"curves_{name}.svg"] = rpt.curves_svg(report, name)
    for fname, text in files.items():
        (out / fname).write_text(text)
        run.artifact(out / fname)
    return files["report.txt"]


def cmd_evaluate(args, run):
    from .io import ingest_mvb
    from .metrics import evaluate

    real, _ = ingest_mvb(args.real)
    synth, _ = ingest_mvb(args.synth)
    report = evaluate(real, synth, replications=1, seed=args.seed, mode=args.mode)
    text = _write_report(report, Path(args.output), run)
    run.info["diff"] = {k: v["diff"][0] for k, v in report.metrics.items()}
    print(text, end="")


def cmd_ablate(args, run):
    from . import report as rpt
    from .io import ingest_mvb
    from .pipeline import ablation_rows, ablation_sweep

    cfg = _train_config(args)
    d_values = _d_values(args.d_values)
    _check_codec(max(d_values), args.n)
    train_videos, _ = ingest_mvb(args.train)
    test_videos, _ = ingest_mvb(args.test)
    h, w = test_videos[0].shape[1:]
    reports = ablation_sweep(train_videos, test_videos, d_values, cfg, replications=args.replications,
                             count=args.count, n=args.n, canvas=(h, w), seed=args.seed)
    rows = ablation_rows(reports)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / "ablation.csv").write_text(rpt.ablation_csv(rows))
    run.artifact(out / "ablation.csv")
    print(rpt.ablation_csv(rows), end="")


COMMANDS = {
    "fixtures": cmd_fixtures,
    "prep": cmd_prep,
    "encode": cmd_encode,
    "select-d": cmd_select_d,
    "train": cmd_train,
    "generate": cmd_generate,
    "decode": cmd_decode,
    "evaluate": cmd_evaluate,
    "ablate": cmd_ablate,
}


# ---------------------------------------------------------------- parsing


def _add_train_flags(p):
    from .diffusion import TrainConfig

    base = TrainConfig()
    g = p.add_argument_group("training")
    g.add_argument("--steps", type=int, default=base.steps)
    g.add_argument("--batch-size", type=int, default=base.batch_size)
    g.add_argument("--lr", type=float, default=base.lr)
    g.add_argument("--lambda-time", type=float, default=base.lambda_time)
    g.add_argument("--lambda-freq", type=float, default=base.lambda_freq)
    g.add_argument("--ema-decay", type=float, default=base.ema_decay)
    g.add_argument("--k-steps", type=int, default=base.k_steps)
    g.add_argument("--width", type=int, default=base.width)
    g.add_argument("--depth", type=int, default=base.depth)
    g.add_argument("--heads", type=int, default=base.heads)
    g.add_argument("--time-budget", type=float, default=base.time_budget, help="seconds; 0 = step budget only")


def build_parser():
    from . import dataset as ds
    from .efd import DEFAULT_D_MAX, DEFAULT_FRACTION, DEFAULT_N

    parser = argparse.ArgumentParser(prog="efdphantoms", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="key=value file with default option values")
    parser.add_argument("--threads", type=int, default=0, help="cap worker threads (0 = library default)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fixtures", help="write the bundled synthetic datasets")
    p.add_argument("--kind", choices=["pulsating", "discs", "squares"], default="pulsating")
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--t-len", type=int, default=40)
    p.add_argument("--canvas", type=int, default=96)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)

    p = sub.add_parser("prep", help="labelled tracking video -> phantom windows + split")
    p.add_argument("--input", required=True, )
    p.add_argument("--output", required=True)
    p.add_argument("--s-min", type=float, default=ds.S_MIN)
    p.add_argument("--o-max", type=float, default=ds.O_MAX)
    p.add_argument("--border-px", type=int, default=ds.BORDER_PX)
    p.add_argument("--t-win", type=int, default=ds.T_WIN)
    p.add_argument("--stride", type=int, default=ds.STRIDE)
    p.add_argument("--canvas", type=int, default=ds.CANVAS)
    p.add_argument("--test-fraction", type=float, default=ds.TEST_FRACTION)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("encode", help="mask videos -> EFD series CSV")
    p.add_argument("--input", required=True, )
    p.add_argument("--output", required=True)
    p.add_argument("--d", type=int, default=9)
    p.add_argument("--n", type=int, default=DEFAULT_N)
    p.add_argument("--no-phase-anchor", action="store_true")

    p = sub.add_parser("select-d", help="harmonic count by cumulative power")
    p.add_argument("--input", required=True, help="MVB videos or series CSVs")
    p.add_argument("--fraction", type=float, default=DEFAULT_FRACTION)
    p.add_argument("--d-max", type=int, default=DEFAULT_D_MAX)
    p.add_argument("--n", type=int, default=DEFAULT_N)
    p.add_argument("--output")

    p = sub.add_parser("train", help="fit the diffusion model on series CSVs")
    p.add_argument("--input", required=True, )
    p.add_argument("--output", required=True)
    p.add_argument("--d", type=int, default=0, help="truncate to the first d harmonics (0 = keep all)")
    p.add_argument("--seed", type=int, default=0)
    _add_train_flags(p)

    p = sub.add_parser("generate", help="sample synthetic phantom videos")
    p.add_argument("--checkpoint", required=True, )
    p.add_argument("--output", required=True)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--height", type=int, default=96)
    p.add_argument("--width", type=int, default=96)
    p.add_argument("--n", type=int, default=0, help="contour points (0 = value stored in checkpoint)")

    p = sub.add_parser("decode", help="series CSVs -> mask videos")
    p.add_argument("--input", required=True, )
    p.add_argument("--output", required=True)
    p.add_argument("--height", type=int, default=96)
    p.add_argument("--width", type=int, default=96)
    p.add_argument("--n", type=int, default=0)

    p = sub.add_parser("evaluate", help="compare real and synthetic videos")
    p.add_argument("--real", required=True, )
    p.add_argument("--synth", required=True, )
    p.add_argument("--output", required=True)
    p.add_argument("--mode", choices=["mean", "pairwise"], default="mean")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("ablate", help="metric-vs-d sweep")
    p.add_argument("--train", required=True, )
    p.add_argument("--test", required=True, )
    p.add_argument("--output", required=True)
    p.add_argument("--d-values", default="1,5,9")
    p.add_argument("--replications", type=int, default=1)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--n", type=int, default=DEFAULT_N)
    p.add_argument("--seed", type=int, default=0)
    _add_train_flags(p)
    for sp in sub.choices.values():
        for action in sp._actions:
            if any(action.default is v for v in (None, False, argparse.SUPPRESS)):
                continue
            action.help = f"{action.help} (default: %(default)s)" if action.help else "default: %(default)s"
    return parser, sub


def _config_defaults(path):
    from .io import read_keyvalue

    try:
        raw = read_keyvalue(_existing_file(path))
    except PhantomError as exc:
        raise ConfigError(str(exc)) from exc
    return {k.replace("-", "_"): v for k, v in raw.items()}


def parse_args(argv):
    parser, sub = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        defaults = _config_defaults(known.config)
        for name, sp in sub.choices.items():
            valid = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in defaults.items() if k in valid})
    return parser.parse_args(argv)


class Run:
    def __init__(self, args, argv):
        self.args = args
        self.argv = list(argv)
        self.artifacts = {}
        self.info = {}
        self.started = time.time()

    def artifact(self, path):
        path = Path(path)
        root = Path(getattr(self.args, "output", None) or ".")
        try:
            key = path.relative_to(root).as_posix()
        except ValueError:
            key = str(path)
        self.artifacts[key] = _sha256(path)

    def config(self):
        return {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(self.args).items())}

    def write(self, status, code=None, message=None):
        cfg = self.config()
        blob = json.dumps(cfg, sort_keys=True, default=str).encode()
        manifest = {
            "command": self.args.command,
            "argv": self.argv,
            "config": cfg,
            "config_hash": hashlib.sha256(blob).hexdigest(),
            "seed": cfg.get("seed"),
            "version": __version__,
            "seconds": round(time.time() - self.started, 3),
            "status": status,
            "error_code": code,
            "error": message,
            "artifacts": self.artifacts,
            "info": self.info,
        }
        target = Path(getattr(self.args, "output", None) or ".")
        target.mkdir(parents=True, exist_ok=True)
        (target / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
    except ConfigError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse usage errors
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads:
        import torch

        torch.set_num_threads(args.threads)
    run = Run(args, argv)
    try:
        validate_paths(args)
        COMMANDS[args.command](args, run)
    except ConfigError as exc:
        run.write("failed", exc.code, str(exc))
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except PhantomError as exc:
        run.write("failed", exc.code, str(exc))
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # surfaced as a runtime failure with manifest
        run.write("failed", f"runtime.{type(exc).__name__}", str(exc))
        print(f"error [runtime.{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 2
    run.write("ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
