"""Velocity-field interface and the two concrete desk-scale fields.

A velocity field maps (state, time, stage, optional condition) to a velocity
of the same shape. The point field treats a 1x1xC grid as a flat C-vector;
the neighborhood field predicts each pixel's velocity from its 3x3 patch plus
normalized coordinates, sharing one parameter set across all pyramid
resolutions.
"""

from __future__ import annotations

from typing import Protocol, runtime_checkable

import numpy as np

from ..backend import kernels
from ..errors import DimensionError
from ..grid import LatentGrid
from .net import MlpNet


@runtime_checkable
class VelocityField(Protocol):
    def evaluate(self, x: LatentGrid, t: float, stage: int, condition=None) -> LatentGrid: ...


class PointField:
    """Velocity field over flat vectors, stored as 1 x 1 x C grids."""

    kind = "point"

    def __init__(self, net: MlpNet):
        self.net = net

    def velocities(self, x: np.ndarray, t: np.ndarray, stage: np.ndarray) -> np.ndarray:
        """Batched evaluation on raw (B, C) vectors."""
        return self.net.forward(x, t, stage)

    def evaluate(self, x: LatentGrid, t: float, stage: int, condition=None) -> LatentGrid:
        if x.height != 1 or x.width != 1:
            raise DimensionError(f"point field expects a 1x1xC grid, got {x.shape}")
        out = self.velocities(x.data.reshape(1, x.channels), np.array([t]), np.array([stage]))
        return LatentGrid(out.reshape(1, 1, x.channels))


def _pixel_features(batch: np.ndarray) -> np.ndarray:
    """(B, h, w, 1) -> (B*h*w, 11): 3x3 patch, then row/col in [0, 1]."""
    b, h, w, _ = batch.shape
    patches = kernels.patch9(np.ascontiguousarray(batch[:, :, :, 0]))
    rows = np.arange(h, dtype=np.float64) / max(h - 1, 1)
    cols = np.arange(w, dtype=np.float64) / max(w - 1, 1)
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    coords = np.broadcast_to(np.stack([rr, cc], axis=-1), (b, h, w, 2))
    return np.concatenate([patches, coords], axis=3).reshape(b * h * w, 11)


class NeighborhoodField:
    """Per-pixel velocity from the pixel's 3x3 neighborhood, weight-shared
    across resolutions."""

    kind = "neighborhood"

    def __init__(self, net: MlpNet):
        self.net = net

    def velocities(self, batch: np.ndarray, t: np.ndarray, stage: np.ndarray) -> np.ndarray:
        """Batched evaluation on (B, h, w, 1) grids; t and stage are (B,)."""
        b, h, w, c = batch.shape
        if c != 1:
            raise DimensionError(f"neighborhood field expects 1 channel, got {c}")
        feats = _pixel_features(batch)
        t_px = np.repeat(np.asarray(t, dtype=np.float64), h * w)
        stage_px = np.repeat(np.asarray(stage, dtype=np.int64), h * w)
        return self.net.forward(feats, t_px, stage_px).reshape(b, h, w, 1)

    def evaluate(self, x: LatentGrid, t: float, stage: int, condition=None) -> LatentGrid:
        out = self.velocities(x.data[np.newaxis], np.array([t]), np.array([stage]))
        return LatentGrid(out[0])
