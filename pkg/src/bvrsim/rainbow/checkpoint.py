"""Binary checkpoint format for Q-networks.

Layout (little-endian): magic "BVRCKPT1", u16 version, u32 atom count,
f32 v_min, f32 v_max, u32 layer count, then per layer u32 rows, u32 cols,
u8 kind (0 dense, 1 noisy) followed by weights, biases and, for noisy
layers, the sigma weights and sigma biases, all as f32; a CRC32 of every
preceding byte closes the file. Save -> load -> save is bit-identical.
"""
from __future__ import annotations

import dataclasses
import struct
import zlib
from pathlib import Path

import numpy as np

from ..config import RainbowConfig
from .network import KIND_DENSE, KIND_NOISY, NoisyLayer, QNetwork

MAGIC = b"BVRCKPT1"
VERSION = 1


class CheckpointError(ValueError):
    pass


def _layer_bytes(layer) -> bytes:
    rows, cols = layer.shape
    head = struct.pack("<IIB", rows, cols, layer.kind)
    chunks = [head, layer.w.astype("<f4").tobytes(), layer.b.astype("<f4").tobytes()]
    if layer.kind == KIND_NOISY:
        chunks.append(layer.w_sigma.astype("<f4").tobytes())
        chunks.append(layer.b_sigma.astype("<f4").tobytes())
    return b"".join(chunks)


def save_checkpoint(net: QNetwork, path: str | Path) -> None:
    body = [
        MAGIC,
        struct.pack("<H", VERSION),
        struct.pack("<I", net.atoms),
        struct.pack("<f", float(net.support[0])),
        struct.pack("<f", float(net.support[-1])),
        struct.pack("<I", len(net.layers)),
    ]
    body.extend(_layer_bytes(layer) for layer in net.layers)
    blob = b"".join(body)
    blob += struct.pack("<I", zlib.crc32(blob) & 0xFFFFFFFF)
    Path(path).write_bytes(blob)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.off = 0

    def take(self, n: int) -> bytes:
        if self.off + n > len(self.data):
            raise CheckpointError("truncated checkpoint")
        out = self.data[self.off : self.off + n]
        self.off += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def floats(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(4 * count), dtype="<f4").copy()


def load_checkpoint(path: str | Path, base_cfg: RainbowConfig | None = None) -> QNetwork:
    """Rebuild a network from a checkpoint file, validating the CRC.

    Architecture (layer shapes, kinds, dueling split, atom support) comes
    from the file; runtime hyperparameters come from base_cfg when given.
    """
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC) + 2 + 4 + 4 + 4 + 4 + 4:
        raise CheckpointError("file too short")
    stored_crc = struct.unpack("<I", data[-4:])[0]
    if zlib.crc32(data[:-4]) & 0xFFFFFFFF != stored_crc:
        raise CheckpointError("CRC mismatch")

    r = _Reader(data[:-4])
    if r.take(len(MAGIC)) != MAGIC:
        raise CheckpointError("bad magic")
    (version,) = r.unpack("<H")
    if version != VERSION:
        raise CheckpointError(f"unsupported version {version}")
    (atoms,) = r.unpack("<I")
    (v_min,) = r.unpack("<f")
    (v_max,) = r.unpack("<f")
    (n_layers,) = r.unpack("<I")
    if n_layers not in (3, 4):
        raise CheckpointError(f"unexpected layer count {n_layers}")

    raw_layers = []
    for _ in range(n_layers):
        rows, cols, kind = r.unpack("<IIB")
        w = r.floats(rows * cols).reshape(rows, cols)
        b = r.floats(rows)
        if kind == KIND_NOISY:
            w_sigma = r.floats(rows * cols).reshape(rows, cols)
            b_sigma = r.floats(rows)
        elif kind == KIND_DENSE:
            w_sigma = b_sigma = None
        else:
            raise CheckpointError(f"unknown layer kind {kind}")
        raw_layers.append((rows, cols, kind, w, b, w_sigma, b_sigma))
    if r.off != len(r.data):
        raise CheckpointError("trailing bytes before CRC")

    dueling = n_layers == 4
    obs_dim = raw_layers[0][1]
    hidden1 = raw_layers[0][0]
    hidden2 = raw_layers[1][0]
    adv_rows = raw_layers[-1][0]
    if adv_rows % atoms != 0:
        raise CheckpointError("advantage head size not divisible by atom count")
    n_actions = adv_rows // atoms
    noisy = raw_layers[-1][2] == KIND_NOISY

    cfg = dataclasses.replace(
        base_cfg or RainbowConfig(),
        atoms=int(atoms),
        v_min=float(v_min),
        v_max=float(v_max),
        hidden1=int(hidden1),
        hidden2=int(hidden2),
        use_dueling=dueling,
        use_noisy=noisy,
        use_distributional=atoms > 1,
        float64=False,
    )
    net = QNetwork(cfg, obs_dim=obs_dim, n_actions=int(n_actions))
    for layer, (rows, cols, kind, w, b, ws, bs) in zip(net.layers, raw_layers):
        if layer.shape != (rows, cols):
            raise CheckpointError(f"shape mismatch {layer.shape} vs {(rows, cols)}")
        np.copyto(layer.w, w.astype(layer.w.dtype))
        np.copyto(layer.b, b.astype(layer.b.dtype))
        if kind == KIND_NOISY:
            if not isinstance(layer, NoisyLayer):
                raise CheckpointError("layer kind mismatch")
            np.copyto(layer.w_sigma, ws.astype(layer.w.dtype))
            np.copyto(layer.b_sigma, bs.astype(layer.b.dtype))
    return net
