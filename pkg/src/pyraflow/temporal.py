"""Autoregressive conditioning machinery: compressed history, masks, positions.

History frames are conditioned at progressively coarser resolutions going
back in time (the frame before the current one at the current stage's
divisor, the one before that at twice it, clamped at the coarsest pyramid
level), which is what caps the token count of long histories.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DimensionError
from .grid import LatentGrid, down
from .schedule import Stage

# History frames may be blended with noise of strength up to 1/3 during
# training to blunt error accumulation in autoregressive generation.
MAX_CORRUPTION = 1.0 / 3.0


@dataclass(frozen=True)
class HistoryEntry:
    frame_index: int
    divisor: int
    grid: LatentGrid
    corruption: float


@dataclass(frozen=True)
class HistoryPyramid:
    """Downsampled past frames (oldest first) conditioning the current stage."""

    entries: tuple[HistoryEntry, ...]
    current_stage: Stage

    def __post_init__(self):
        divisors = [e.divisor for e in self.entries]
        if any(a < b for a, b in zip(divisors, divisors[1:])):
            raise ArgumentError("history divisors must be non-increasing toward the present")


def history_divisor(age: int, current_stage_index: int, K: int) -> int:
    """Divisor of the frame ``age`` steps before the current one (age >= 1)."""
    if age < 1:
        raise ArgumentError(f"age must be >= 1, got {age}")
    return min(2 ** (current_stage_index + age - 1), 2 ** (K - 1))


def build_history(
    past_frames: list[LatentGrid],
    current_stage: Stage,
    K: int,
    mode: str = "infer",
    rng: np.random.Generator | None = None,
) -> HistoryPyramid:
    """Downsample past frames per their age; in train mode blend each with
    fresh noise at an independent strength drawn uniformly from [0, 1/3]."""
    if mode not in ("train", "infer"):
        raise ArgumentError(f"mode must be 'train' or 'infer', got {mode!r}")
    if mode == "train" and rng is None:
        raise ArgumentError("train mode needs an rng for corruption draws")
    coarsest = 2 ** (K - 1)
    for f in past_frames:
        if f.shape != past_frames[0].shape:
            raise DimensionError("past frames must share one shape")
        if f.height % coarsest or f.width % coarsest:
            raise DimensionError(f"frame dims must be divisible by {coarsest}")
    n = len(past_frames)
    entries = []
    for i, frame in enumerate(past_frames):
        age = n - i
        divisor = history_divisor(age, current_stage.index, K)
        grid = down(frame, divisor)
        strength = 0.0
        if mode == "train":
            strength = float(rng.uniform(0.0, MAX_CORRUPTION))
            noise = rng.standard_normal(grid.shape)
            grid = LatentGrid((1.0 - strength) * grid.data + strength * noise)
        entries.append(HistoryEntry(frame_index=i, divisor=divisor, grid=grid, corruption=strength))
    return HistoryPyramid(entries=tuple(entries), current_stage=current_stage)


@dataclass(frozen=True)
class AttentionMask:
    """Blockwise causal mask: full attention within a frame, backward across."""

    frame_of_token: np.ndarray  # (N,) int
    allowed: np.ndarray  # (N, N) bool


def causal_mask(frames: int, tokens_per_frame: list[int]) -> AttentionMask:
    if frames < 1:
        raise ArgumentError(f"frames must be >= 1, got {frames}")
    if len(tokens_per_frame) != frames or any(n < 1 for n in tokens_per_frame):
        raise ArgumentError(f"need {frames} positive token counts, got {tokens_per_frame}")
    frame_of_token = np.repeat(np.arange(frames), tokens_per_frame)
    allowed = frame_of_token[None, :] <= frame_of_token[:, None]
    return AttentionMask(frame_of_token=frame_of_token, allowed=allowed)


@dataclass(frozen=True)
class PositionGrid:
    """Continuous per-token spatial coordinates plus per-frame temporal index.

    History tokens are interpolated: a divisor-d entry sits on the block
    centers of the full-resolution lattice, so entries of any divisor cover
    the same physical extent. Current-stage tokens are extrapolated: they use
    the native integer lattice of their reduced grid.
    """

    rows: np.ndarray  # (N,) float
    cols: np.ndarray  # (N,) float
    frame_of_token: np.ndarray  # (N,) int
    temporal_index: np.ndarray  # per frame, == frame index


def _block_centers(full: int, divisor: int) -> np.ndarray:
    return (divisor - 1) / 2.0 + divisor * np.arange(full // divisor, dtype=np.float64)


def position_grids(history: HistoryPyramid, full_dims: tuple[int, int]) -> PositionGrid:
    full_h, full_w = full_dims
    rows, cols, frames = [], [], []
    for entry in history.entries:
        r = _block_centers(full_h, entry.divisor)
        c = _block_centers(full_w, entry.divisor)
        rr, cc = np.meshgrid(r, c, indexing="ij")
        rows.append(rr.ravel())
        cols.append(cc.ravel())
        frames.append(np.full(rr.size, entry.frame_index, dtype=np.int64))
    d = history.current_stage.divisor
    rr, cc = np.meshgrid(
        np.arange(full_h // d, dtype=np.float64),
        np.arange(full_w // d, dtype=np.float64),
        indexing="ij",
    )
    current_index = len(history.entries)
    rows.append(rr.ravel())
    cols.append(cc.ravel())
    frames.append(np.full(rr.size, current_index, dtype=np.int64))
    return PositionGrid(
        rows=np.concatenate(rows),
        cols=np.concatenate(cols),
        frame_of_token=np.concatenate(frames),
        temporal_index=np.arange(current_index + 1, dtype=np.int64),
    )


def token_count(history: HistoryPyramid, current_tokens: int) -> int:
    """Total conditioning tokens: history grids plus the current stage."""
    if current_tokens < 0:
        raise ArgumentError(f"current_tokens must be >= 0, got {current_tokens}")
    return sum(e.grid.height * e.grid.width for e in history.entries) + current_tokens
