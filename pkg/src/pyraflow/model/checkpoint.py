"""Binary checkpoint format for velocity networks.

Layout (little-endian): magic "PYRM", u32 version, u32 field kind
(0 = point, 1 = neighborhood), u32 n_freq, u32 n_stages, u32 layer count,
u32 layer dims, then all parameters as f64 in declaration order (per layer:
weight matrix row-major, then bias).
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import ArgumentError
from .fields import NeighborhoodField, PointField
from .net import MlpNet

CHECKPOINT_MAGIC = b"PYRM"
CHECKPOINT_VERSION = 1

_KIND_CODES = {"point": 0, "neighborhood": 1}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}
_FIELD_CLASSES = {"point": PointField, "neighborhood": NeighborhoodField}


def save_checkpoint(field, path) -> None:
    net: MlpNet = field.net
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(
            struct.pack(
                "<IIIII",
                CHECKPOINT_VERSION,
                _KIND_CODES[field.kind],
                net.n_freq,
                net.n_stages,
                len(net.layer_dims),
            )
        )
        f.write(struct.pack(f"<{len(net.layer_dims)}I", *net.layer_dims))
        for p in net.parameters():
            f.write(np.ascontiguousarray(p, dtype="<f8").tobytes())


def load_checkpoint(path):
    """Reconstruct the field (PointField or NeighborhoodField) from a file."""
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise ArgumentError(f"{path}: bad magic {magic!r}, expected {CHECKPOINT_MAGIC!r}")
        version, kind_code, n_freq, n_stages, n_layers = struct.unpack("<IIIII", f.read(20))
        if version != CHECKPOINT_VERSION:
            raise ArgumentError(f"{path}: unsupported checkpoint version {version}")
        if kind_code not in _KIND_NAMES:
            raise ArgumentError(f"{path}: unknown field kind {kind_code}")
        layer_dims = list(struct.unpack(f"<{n_layers}I", f.read(4 * n_layers)))
        net = MlpNet(layer_dims, n_freq=n_freq, n_stages=n_stages, rng=np.random.default_rng(0))
        for p in net.parameters():
            raw = f.read(8 * p.size)
            if len(raw) != 8 * p.size:
                raise ArgumentError(f"{path}: truncated parameter payload")
            p[...] = np.frombuffer(raw, dtype="<f8").reshape(p.shape)
    return _FIELD_CLASSES[_KIND_NAMES[kind_code]](net)
