"""Clean-signal (x0) denoiser with explicit trend and seasonality heads.

The network reads a noisy series ``(B, C, T)`` plus the diffusion step and
returns ``trend + seasonal + residual``:

* trend: per-channel polynomial of degree ``trend_degree`` in normalised time;
* seasonal: per-channel Fourier series with ``floor(T/2)`` frequencies;
* residual: per-position linear read-out of the transformer features.

Both structured heads read out per-position features and project them onto
their basis by least squares, so amplitudes depend on the whole sequence while
the output stays inside the basis span.
"""
import math

import torch
from torch import nn

from ..errors import ShapeMismatch

PARTS = ("trend", "seasonal", "residual")


def sinusoidal_embedding(positions, width):
    """Standard transformer sin/cos embedding of (possibly fractional) positions."""
    positions = torch.as_tensor(positions, dtype=torch.get_default_dtype()).reshape(-1)
    half = width // 2
    freqs = torch.exp(-math.log(10000.0) * torch.arange(half, dtype=positions.dtype) / max(half - 1, 1))
    args = positions[:, None] * freqs[None, :]
    emb = torch.cat([torch.sin(args), torch.cos(args)], dim=1)
    if width % 2:
        emb = torch.cat([emb, torch.zeros_like(emb[:, :1])], dim=1)
    return emb


def _projector(basis):
    """Orthogonal projector onto the row space of ``basis``; rank-deficient rows are fine."""
    return torch.linalg.pinv(basis) @ basis


class MixingBlock(nn.Module):
    def __init__(self, width, heads, mlp_ratio=2):
        super().__init__()
        self.step_proj = nn.Linear(width, width)
        self.norm1 = nn.LayerNorm(width)
        self.attn = nn.MultiheadAttention(width, heads, batch_first=True)
        self.norm2 = nn.LayerNorm(width)
        self.mlp = nn.Sequential(
            nn.Linear(width, mlp_ratio * width), nn.GELU(), nn.Linear(mlp_ratio * width, width)
        )

    def forward(self, h, step_bias):
        h = h + step_bias[:, None, :]
        x = self.norm1(h)
        h = h + self.attn(x, x, x, need_weights=False)[0]
        return h + self.mlp(self.norm2(h))


class DenoiserModel(nn.Module):
    def __init__(self, channels, seq_len, width=96, depth=4, heads=4, trend_degree=3, n_freqs=None):
        super().__init__()
        self.channels = channels
        self.seq_len = seq_len
        self.width = width
        self.depth = depth
        self.heads = heads
        self.trend_degree = trend_degree
        self.n_freqs = seq_len // 2 if n_freqs is None else n_freqs
        self.active = set(PARTS)

        self.embed = nn.Linear(channels, width)
        self.step_mlp = nn.Sequential(nn.Linear(width, width), nn.GELU(), nn.Linear(width, width))
        self.blocks = nn.ModuleList(MixingBlock(width, heads) for _ in range(depth))
        self.norm = nn.LayerNorm(width)
        self.trend_head = nn.Linear(width, channels)
        self.season_head = nn.Linear(width, channels)
        self.residual_head = nn.Linear(width, channels)

        dt = torch.float64
        tau = torch.linspace(0.0, 1.0, seq_len, dtype=dt) if seq_len > 1 else torch.zeros(1, dtype=dt)
        poly = torch.stack([tau ** p for p in range(trend_degree + 1)])
        t = torch.arange(seq_len, dtype=dt)
        f = torch.arange(1, self.n_freqs + 1, dtype=dt)
        ang = 2.0 * math.pi * f[:, None] * t[None, :] / seq_len
        fourier = torch.cat([torch.cos(ang), torch.sin(ang)])
        # (T, T) projectors onto each basis span
        self.register_buffer("trend_basis", _projector(poly).to(torch.get_default_dtype()))
        self.register_buffer("season_basis", _projector(fourier).to(torch.get_default_dtype()))
        self.register_buffer("pos_emb", sinusoidal_embedding(torch.arange(seq_len), width))

    def config(self):
        return {
            "channels": self.channels,
            "seq_len": self.seq_len,
            "width": self.width,
            "depth": self.depth,
            "heads": self.heads,
            "trend_degree": self.trend_degree,
            "n_freqs": self.n_freqs,
        }

    def step_conditioning(self, k, dtype=None):
        """Per-block step biases ``(depth, len(k), width)``; depends on ``k`` only,
        so samplers can compute it once for every step."""
        dtype = dtype or self.embed.weight.dtype
        k = torch.as_tensor(k, dtype=dtype).reshape(-1)
        step = self.step_mlp(sinusoidal_embedding(k, self.width).to(dtype))
        return torch.stack([block.step_proj(step) for block in self.blocks])

    def decompose(self, z, k, cond=None):
        """Return ``{"trend", "seasonal", "residual"}`` tensors, each ``(B, C, T)``.

        ``cond`` optionally supplies precomputed :meth:`step_conditioning` rows
        for this batch, in which case ``k`` is ignored.
        """
        if z.dim() != 3 or z.shape[1] != self.channels or z.shape[2] != self.seq_len:
            raise ShapeMismatch(
                f"expected (B, {self.channels}, {self.seq_len}), got {tuple(z.shape)}"
            )
        b = z.shape[0]
        if cond is None:
            k = torch.as_tensor(k, dtype=z.dtype).reshape(-1).expand(b)
            cond = self.step_conditioning(k, z.dtype)
        h = self.embed(z.transpose(1, 2)) + self.pos_emb.to(z.dtype)
        for block, bias in zip(self.blocks, cond):
            h = block(h, bias)
        h = self.norm(h)
        trend = self.trend_head(h).transpose(1, 2) @ self.trend_basis.to(z.dtype)
        season = self.season_head(h).transpose(1, 2) @ self.season_basis.to(z.dtype)
        residual = self.residual_head(h).transpose(1, 2)
        return {"trend": trend, "seasonal": season, "residual": residual}

    def forward(self, z, k, cond=None):
        parts = self.decompose(z, k, cond)
        out = None
        for name in PARTS:
            if name in self.active:
                out = parts[name] if out is None else out + parts[name]
        if out is None:
            return torch.zeros_like(z)
        return out


def hybrid_loss_terms(z0, z0_hat):
    """``(time_term, freq_term)``: mean squared error in time and mean squared
    magnitude of the per-channel DFT difference along time (``norm="forward"``)."""
    if z0.shape != z0_hat.shape:
        raise ShapeMismatch(f"{tuple(z0.shape)} != {tuple(z0_hat.shape)}")
    diff = z0 - z0_hat
    time_term = diff.pow(2).mean()
    spectrum = torch.fft.fft(diff, dim=-1, norm="forward")
    freq_term = (spectrum.real.pow(2) + spectrum.imag.pow(2)).mean()
    return time_term, freq_term


def hybrid_loss(z0, z0_hat, lambda_time=1.0, lambda_freq=1.0):
    time_term, freq_term = hybrid_loss_terms(z0, z0_hat)
    return lambda_time * time_term + lambda_freq * freq_term


def denoise_predict(model, z_k, k):
    """Clean-signal estimate for a batch ``(B, C, T)`` or a single ``(C, T)``."""
    single = z_k.dim() == 2
    x = z_k[None] if single else z_k
    if x.shape[1] != model.channels:
        raise ShapeMismatch(f"model expects {model.channels} channels, got {x.shape[1]}")
    out = model(x, k)
    return out[0] if single else out
