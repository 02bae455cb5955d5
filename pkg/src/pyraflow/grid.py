"""Dense latent grids and the exact resampling kernels.

A :class:`LatentGrid` is an immutable (height, width, channels) array of
64-bit floats. Downsampling is the block mean, upsampling is nearest-neighbor
replication, so ``down(up(g, f), f) == g`` holds exactly and both maps are
linear and preserve constants.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .errors import ArgumentError, DimensionError

# Dims must fit the u32 header fields of the grid file format.
_MAX_DIM = 2**32 - 1

GRID_MAGIC = b"PYRG"


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class LatentGrid:
    """A (height, width, channels) float64 grid, row-major, channel-innermost."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        if arr.ndim != 3:
            raise DimensionError(f"grid data must be 3-d (h, w, c), got shape {arr.shape}")
        if min(arr.shape) < 1:
            raise DimensionError(f"grid dims must be >= 1, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ArgumentError("grid contains non-finite values")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    @classmethod
    def zeros(cls, height: int, width: int, channels: int = 1) -> "LatentGrid":
        return cls(np.zeros((height, width, channels)))

    @classmethod
    def full(cls, height: int, width: int, channels: int, value: float) -> "LatentGrid":
        return cls(np.full((height, width, channels), float(value)))


def _check_factor(factor: int) -> int:
    if not isinstance(factor, (int, np.integer)) or not _is_power_of_two(int(factor)):
        raise ArgumentError(f"resampling factor must be a power-of-two integer, got {factor!r}")
    return int(factor)


def down(g: LatentGrid, factor: int) -> LatentGrid:
    """Block-mean downsample by ``factor`` (a power of two dividing both dims)."""
    factor = _check_factor(factor)
    if g.height % factor or g.width % factor:
        raise DimensionError(
            f"factor {factor} does not divide grid dims {g.height}x{g.width}"
        )
    arr = g.data[np.newaxis]
    while factor > 1:
        arr = kernels.halve(arr)
        factor //= 2
    return LatentGrid(arr[0])


def up(g: LatentGrid, factor: int) -> LatentGrid:
    """Nearest-neighbor upsample: each value fills its factor x factor block."""
    factor = _check_factor(factor)
    if g.height * factor > _MAX_DIM or g.width * factor > _MAX_DIM:
        raise DimensionError(f"upsampled dims overflow: {g.height}x{g.width} x{factor}")
    if factor == 1:
        return g
    return LatentGrid(kernels.repeat_nearest(g.data[np.newaxis], factor)[0])


def lerp(a: LatentGrid, b: LatentGrid, w: float) -> LatentGrid:
    """Elementwise (1 - w) * a + w * b for w in [0, 1]."""
    if a.shape != b.shape:
        raise DimensionError(f"lerp shape mismatch: {a.shape} vs {b.shape}")
    if not 0.0 <= w <= 1.0:
        raise ArgumentError(f"lerp weight must be in [0, 1], got {w}")
    return LatentGrid((1.0 - w) * a.data + w * b.data)


def stream_rng(seed: int, stream: int) -> np.random.Generator:
    """Independent deterministic generator for a (seed, stream) pair."""
    if seed < 0 or stream < 0:
        raise ArgumentError(f"seed and stream must be non-negative, got ({seed}, {stream})")
    return np.random.Generator(np.random.Philox(key=np.array([seed, stream], dtype=np.uint64)))


def gaussian(shape: tuple[int, int, int], seed: int, stream: int = 0) -> LatentGrid:
    """I.i.d. standard-normal grid; bit-identical for equal (seed, stream, shape)."""
    h, w, c = shape
    return LatentGrid(stream_rng(seed, stream).standard_normal((h, w, c)))


def write_grid(g: LatentGrid, path) -> None:
    """Write the binary grid format: magic, u32 h/w/c (LE), f64 payload (LE)."""
    with open(path, "wb") as f:
        f.write(GRID_MAGIC)
        f.write(struct.pack("<III", g.height, g.width, g.channels))
        f.write(g.data.astype("<f8").tobytes())


def read_grid(path) -> LatentGrid:
    with open(path, "rb") as f:
        return _read_grid_stream(f, str(path))


def _read_grid_stream(f: io.BufferedIOBase, name: str) -> LatentGrid:
    magic = f.read(4)
    if magic != GRID_MAGIC:
        raise ArgumentError(f"{name}: bad magic {magic!r}, expected {GRID_MAGIC!r}")
    h, w, c = struct.unpack("<III", f.read(12))
    payload = f.read(8 * h * w * c)
    if len(payload) != 8 * h * w * c:
        raise ArgumentError(f"{name}: truncated grid payload")
    data = np.frombuffer(payload, dtype="<f8").reshape(h, w, c)
    return LatentGrid(data.astype(np.float64))
