"""Training loop for the x0 denoiser."""
import copy
import csv
import logging
import time
from dataclasses import asdict, dataclass, fields

import numpy as np
import torch

from ..errors import EmptyDataset, InvalidConfig, NonFiniteLoss, ShapeMismatch
from .model import DenoiserModel, hybrid_loss_terms
from .schedule import cosine_schedule, forward_noise

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    lambda_time: float = 1.0
    lambda_freq: float = 1.0
    batch_size: int = 64
    steps: int = 900
    lr: float = 2e-3
    seed: int = 0
    ema_decay: float = 0.995
    k_steps: int = 200
    width: int = 96
    depth: int = 4
    heads: int = 4
    trend_degree: int = 3
    grad_clip: float = 1.0
    warmup: int = 100
    log_every: int = 50
    time_budget: float = 0.0  # seconds; 0 disables

    def validate(self):
        if self.lambda_time < 0 or self.lambda_freq < 0:
            raise InvalidConfig("loss weights must be non-negative")
        if self.lambda_time == 0 and self.lambda_freq == 0:
            raise InvalidConfig("lambda_time and lambda_freq cannot both be zero")
        if self.batch_size < 1 or self.steps < 1 or self.lr <= 0:
            raise InvalidConfig("batch_size, steps and lr must be positive")
        if not 0.0 <= self.ema_decay < 1.0:
            raise InvalidConfig("ema_decay must be in [0, 1)")
        if self.k_steps < 2:
            raise InvalidConfig("k_steps must be >= 2")
        if self.width % self.heads:
            raise InvalidConfig("width must be divisible by heads")
        return self

    @classmethod
    def from_mapping(cls, mapping):
        known = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, value in mapping.items():
            if key not in known:
                continue
            typ = {"float": float, "int": int}.get(known[key], known[key])
            kwargs[key] = typ(value)
        return cls(**kwargs)

    def as_dict(self):
        return asdict(self)


@dataclass
class TrainResult:
    model: DenoiserModel  # EMA weights
    raw_model: DenoiserModel
    history: list  # dicts: step, loss, time_term, freq_term, learning_rate
    seconds: float


def _stack(dataset):
    arrs = [np.asarray(getattr(s, "values", s), dtype=np.float64) for s in dataset]
    if not arrs:
        raise EmptyDataset("empty training set")
    shapes = {a.shape for a in arrs}
    if len(shapes) != 1:
        raise ShapeMismatch(f"training series differ in shape: {sorted(shapes)}")
    return np.stack(arrs)


def build_model(cfg, channels, seq_len):
    return DenoiserModel(channels, seq_len, width=cfg.width, depth=cfg.depth,
                         heads=cfg.heads, trend_degree=cfg.trend_degree)


def train(dataset, cfg=None, *, model=None, log_path=None, val_batch=None):
    """Minimise the hybrid loss with uniformly drawn steps ``k in [1, K]``.

    Adam with linear warm-up; the returned ``TrainResult.model`` holds the
    exponential moving average of the weights.
    """
    cfg = (cfg or TrainConfig()).validate()
    data = torch.as_tensor(_stack(dataset), dtype=torch.float32)
    n, channels, seq_len = data.shape
    torch.manual_seed(cfg.seed)
    gen = torch.Generator().manual_seed(cfg.seed)
    if model is None:
        model = build_model(cfg, channels, seq_len)
    model = model.float().train()
    ema = copy.deepcopy(model).eval()
    for p in ema.parameters():
        p.requires_grad_(False)
    sched = cosine_schedule(cfg.k_steps)
    opt = torch.optim.Adam(model.parameters(), lr=cfg.lr)
    warm = max(cfg.warmup, 1)
    lr_sched = torch.optim.lr_scheduler.LambdaLR(opt, lambda s: min(1.0, (s + 1) / warm))
    history = []
    t0 = time.perf_counter()
    for step in range(1, cfg.steps + 1):
        idx = torch.randint(0, n, (min(cfg.batch_size, n),), generator=gen)
        z0 = data[idx]
        k = torch.randint(1, cfg.k_steps + 1, (z0.shape[0],), generator=gen)
        eps = torch.randn(z0.shape, generator=gen)
        zk = forward_noise(z0, k, eps, sched)
        time_term, freq_term = hybrid_loss_terms(z0, model(zk, k))
        loss = cfg.lambda_time * time_term + cfg.lambda_freq * freq_term
        if not torch.isfinite(loss):
            raise NonFiniteLoss(
                f"loss became {loss.item()} at step {step} "
                f"(time={time_term.item()}, freq={freq_term.item()}, lr={lr_sched.get_last_lr()[0]})"
            )
        opt.zero_grad(set_to_none=True)
        loss.backward()
        if cfg.grad_clip > 0:
            torch.nn.utils.clip_grad_norm_(model.parameters(), cfg.grad_clip)
        opt.step()
        lr_sched.step()
        with torch.no_grad():
            decay = min(cfg.ema_decay, (1 + step) / (10 + step))
            for pe, pm in zip(ema.parameters(), model.parameters()):
                pe.mul_(decay).add_(pm, alpha=1.0 - decay)
        if step % cfg.log_every == 0 or step == 1 or step == cfg.steps:
            row = {
                "step": step,
                "loss": loss.item(),
                "time_term": time_term.item(),
                "freq_term": freq_term.item(),
                "learning_rate": lr_sched.get_last_lr()[0],
            }
            if val_batch is not None:
                row["val_loss"] = validation_loss(model, val_batch, sched, cfg)
            history.append(row)
            log.debug("step %d loss %.5f", step, row["loss"])
        if cfg.time_budget and time.perf_counter() - t0 > cfg.time_budget:
            log.info("time budget reached after %d steps", step)
            break
    model.eval()
    if log_path is not None:
        write_training_log(log_path, history)
    return TrainResult(ema, model, history, time.perf_counter() - t0)


def validation_loss(model, val_batch, sched, cfg):
    """Loss on a fixed batch ``(z0, k, eps)``; deterministic across calls."""
    z0, k, eps = val_batch
    was_training = model.training
    model.eval()
    with torch.no_grad():
        time_term, freq_term = hybrid_loss_terms(z0, model(forward_noise(z0, k, eps, sched), k))
    model.train(was_training)
    return (cfg.lambda_time * time_term + cfg.lambda_freq * freq_term).item()


def make_val_batch(dataset, cfg, size=64, seed=12345):
    data = torch.as_tensor(_stack(dataset), dtype=torch.float32)
    gen = torch.Generator().manual_seed(seed)
    idx = torch.randint(0, data.shape[0], (size,), generator=gen)
    z0 = data[idx]
    k = torch.randint(1, cfg.k_steps + 1, (size,), generator=gen)
    return z0, k, torch.randn(z0.shape, generator=gen)


def write_training_log(path, history):
    cols = ["step", "loss", "time_term", "freq_term", "learning_rate"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in history:
            w.writerow([row[c] for c in cols])
