"""``EFDM`` checkpoint container.

Layout (little endian)::

    b"EFDM" | u32 version | u32 len | config text (key=value lines, utf-8)
    u32 n_tensors | n x (u32 name_len | name | u32 rank | rank x u32 dim | float64 data)
"""
import struct
from collections import OrderedDict

import numpy as np
import torch

from ..efd import NormStats
from ..errors import CheckpointError
from .model import DenoiserModel
from .training import TrainConfig

MAGIC = b"EFDM"
VERSION = 1


def pack(config, tensors):
    out = [MAGIC, struct.pack("<I", VERSION)]
    text = "".join(f"{k}={v}\n" for k, v in config.items()).encode("utf-8")
    out += [struct.pack("<I", len(text)), text, struct.pack("<I", len(tensors))]
    for name, arr in tensors.items():
        a = np.ascontiguousarray(np.asarray(arr, dtype="<f8"))
        nb = name.encode("utf-8")
        out += [struct.pack("<I", len(nb)), nb, struct.pack("<I", a.ndim)]
        out += [struct.pack(f"<{a.ndim}I", *a.shape), a.tobytes()]
    return b"".join(out)


def unpack(raw):
    if raw[:4] != MAGIC:
        raise CheckpointError("not an EFDM checkpoint")
    pos = 4

    def take(fmt):
        nonlocal pos
        size = struct.calcsize(fmt)
        if pos + size > len(raw):
            raise CheckpointError("truncated checkpoint")
        vals = struct.unpack_from(fmt, raw, pos)
        pos += size
        return vals

    (version,) = take("<I")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    (clen,) = take("<I")
    text = raw[pos:pos + clen].decode("utf-8")
    pos += clen
    config = OrderedDict()
    for ln in text.splitlines():
        k, _, v = ln.partition("=")
        config[k] = v
    (count,) = take("<I")
    tensors = OrderedDict()
    for _ in range(count):
        (nlen,) = take("<I")
        name = raw[pos:pos + nlen].decode("utf-8")
        pos += nlen
        (rank,) = take("<I")
        dims = take(f"<{rank}I") if rank else ()
        n = int(np.prod(dims)) if rank else 1
        end = pos + 8 * n
        if end > len(raw):
            raise CheckpointError("truncated tensor data")
        tensors[name] = np.frombuffer(raw[pos:end], dtype="<f8").reshape(dims).copy()
        pos = end
    if pos != len(raw):
        raise CheckpointError("trailing bytes after last tensor")
    return config, tensors


def save_checkpoint(path, model, *, train_cfg=None, stats=None, extra=None):
    config = OrderedDict()
    for k, v in model.config().items():
        config[f"model.{k}"] = v
    if train_cfg is not None:
        for k, v in train_cfg.as_dict().items():
            config[f"train.{k}"] = v
    for k, v in (extra or {}).items():
        config[k] = v
    tensors = OrderedDict(
        (name, t.detach().cpu().double().numpy()) for name, t in model.state_dict().items()
        if not name.endswith(("_basis", "pos_emb"))
    )
    if stats is not None:
        tensors["norm.lo"] = stats.lo
        tensors["norm.hi"] = stats.hi
    with open(path, "wb") as fh:
        fh.write(pack(config, tensors))


def load_checkpoint(path, dtype=torch.float32):
    """Return ``(model, train_cfg, stats, config)``."""
    with open(path, "rb") as fh:
        config, tensors = unpack(fh.read())
    margs = {k[6:]: int(v) for k, v in config.items() if k.startswith("model.")}
    try:
        model = DenoiserModel(**margs)
    except TypeError as exc:
        raise CheckpointError(f"bad model config: {exc}") from exc
    stats = None
    if "norm.lo" in tensors:
        stats = NormStats(tensors.pop("norm.lo"), tensors.pop("norm.hi"))
    state = model.state_dict()
    for name, arr in tensors.items():
        if name not in state:
            raise CheckpointError(f"unexpected tensor {name}")
        state[name] = torch.from_numpy(arr)
    model.load_state_dict(state)
    model = model.to(dtype).eval()
    tcfg = TrainConfig.from_mapping({k[6:]: v for k, v in config.items() if k.startswith("train.")})
    return model, tcfg, stats, config
