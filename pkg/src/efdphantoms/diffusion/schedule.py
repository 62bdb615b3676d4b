"""Cosine noise schedule and the closed-form forward process."""
import math
from dataclasses import dataclass

import numpy as np
import torch

from ..errors import ShapeMismatch

COSINE_OFFSET = 0.008
MAX_BETA = 0.999


@dataclass(frozen=True)
class DiffusionSchedule:
    """All arrays are indexed by step ``k = 0..K``; entries at ``k = 0`` of
    the per-step quantities are placeholders (``alpha = 1``, ``beta = 0``)."""

    alpha_bar: np.ndarray

    @property
    def K(self):
        return len(self.alpha_bar) - 1

    @property
    def alpha_bar_prev(self):
        return np.concatenate([[1.0], self.alpha_bar[:-1]])

    @property
    def alphas(self):
        return self.alpha_bar / self.alpha_bar_prev

    @property
    def betas(self):
        return 1.0 - self.alphas

    @property
    def coef_x0(self):
        """Weight of the predicted clean signal in the reverse step."""
        ab, abp = self.alpha_bar, self.alpha_bar_prev
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.sqrt(abp) * self.betas / (1.0 - ab)
        out[0] = 1.0
        return out

    @property
    def coef_xt(self):
        """Weight of the current noisy signal in the reverse step."""
        ab, abp = self.alpha_bar, self.alpha_bar_prev
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.sqrt(self.alphas) * (1.0 - abp) / (1.0 - ab)
        out[0] = 0.0
        return out

    @property
    def posterior_variance(self):
        ab, abp = self.alpha_bar, self.alpha_bar_prev
        with np.errstate(invalid="ignore", divide="ignore"):
            out = (1.0 - abp) / (1.0 - ab) * self.betas
        out[0] = 0.0
        return out


def cosine_schedule(k_steps):
    """``alpha_bar_k = f(k)/f(0)`` with ``f(k) = cos^2(((k/K + s)/(1 + s)) pi/2)``.

    Per-step betas are clipped at 0.999 and ``alpha_bar`` is rebuilt as their
    cumulative product so that ``alpha_k * alpha_bar_{k-1} == alpha_bar_k``.
    """
    if k_steps < 2:
        raise ValueError("need at least 2 diffusion steps")
    k = np.arange(k_steps + 1, dtype=np.float64)
    f = np.cos((k / k_steps + COSINE_OFFSET) / (1.0 + COSINE_OFFSET) * math.pi / 2.0) ** 2
    ab = f / f[0]
    betas = np.clip(1.0 - ab[1:] / ab[:-1], 0.0, MAX_BETA)
    alpha_bar = np.concatenate([[1.0], np.cumprod(1.0 - betas)])
    return DiffusionSchedule(alpha_bar)


def _coef(values, k, like):
    if isinstance(k, torch.Tensor):
        c = torch.as_tensor(values, dtype=like.dtype)[k.long()]
        return c.reshape(-1, *([1] * (like.dim() - 1)))
    return float(values[int(k)])


def forward_noise(z0, k, eps, sched):
    """``z_k = sqrt(alpha_bar_k) z0 + sqrt(1 - alpha_bar_k) eps``.

    ``k`` is an int, or a per-sample tensor of steps for a batched ``z0``.
    """
    if tuple(np.shape(eps)) != tuple(np.shape(z0)):
        raise ShapeMismatch(f"noise shape {tuple(np.shape(eps))} != signal shape {tuple(np.shape(z0))}")
    ab = sched.alpha_bar
    a = _coef(np.sqrt(ab), k, z0)
    b = _coef(np.sqrt(1.0 - ab), k, z0)
    return a * z0 + b * eps


def reverse_step(z0_hat, zk, k, sched, eps=None):
    """One ancestral step ``z_k -> z_{k-1}``; ``eps`` is ignored at ``k = 1``."""
    out = _coef(sched.coef_x0, k, zk) * z0_hat + _coef(sched.coef_xt, k, zk) * zk
    if eps is not None and int(k) > 1:
        out = out + math.sqrt(sched.posterior_variance[int(k)]) * eps
    return out
