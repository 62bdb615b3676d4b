"""Ancestral sampling with an x0-predicting denoiser."""
import numpy as np
import torch

from .schedule import reverse_step


@torch.inference_mode()
def sample(model, sched, t_len, channels, seed=0, count=1, *, clip=None):
    """Draw ``count`` series of shape ``(channels, t_len)`` (normalised domain).

    Starts from ``N(0, I)`` and applies ``K`` reverse steps; all noise comes
    from one generator seeded with ``seed``. ``clip=(lo, hi)`` clamps each
    clean-signal estimate before it is used.
    """
    if channels != model.channels or t_len != model.seq_len:
        raise ValueError(
            f"model generates ({model.channels}, {model.seq_len}), asked for ({channels}, {t_len})"
        )
    dtype = next(model.parameters()).dtype
    gen = torch.Generator().manual_seed(int(seed))
    was_training = model.training
    model.eval()
    z = torch.randn((count, channels, t_len), generator=gen, dtype=dtype)
    table = model.step_conditioning(torch.arange(sched.K + 1), dtype)
    for k in range(sched.K, 0, -1):
        z0_hat = model(z, k, cond=table[:, k:k + 1].expand(-1, count, -1))
        if clip is not None:
            z0_hat = z0_hat.clamp(*clip)
        eps = torch.randn(z.shape, generator=gen, dtype=dtype) if k > 1 else None
        z = reverse_step(z0_hat, z, k, sched, eps)
    model.train(was_training)
    return z.double().numpy()


def sample_with_oracle(predict, sched, shape, seed=0):
    """Same recursion as :func:`sample` with a plain callable ``predict(z, k)``."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(shape)
    for k in range(sched.K, 0, -1):
        z0_hat = predict(z, k)
        eps = rng.standard_normal(shape) if k > 1 else None
        z = reverse_step(z0_hat, z, k, sched, eps)
    return z


__all__ = ["sample", "sample_with_oracle"]
