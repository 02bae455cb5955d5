"""Scalar metrics for the toy experiments."""

from __future__ import annotations

import numpy as np

from ..backend import kernels
from ..errors import ArgumentError, DimensionError


def chord_deviation(states: np.ndarray) -> float:
    """Mean squared deviation of trajectories from their window chord.

    ``states`` is (M, P, D): M trajectories observed at P uniformly spaced
    window-local times (endpoints included). Each interior state is compared
    with the point at the same time fraction on the straight start-to-end
    chord; exactly 0 for constant-velocity trajectories.
    """
    states = np.asarray(states, dtype=np.float64)
    if states.ndim != 3 or states.shape[1] < 3:
        raise DimensionError(f"need (M, P >= 3, D) states, got {states.shape}")
    m, p, _ = states.shape
    frac = (np.arange(p, dtype=np.float64) / (p - 1))[None, :, None]
    chord = (1.0 - frac) * states[:, :1] + frac * states[:, -1:]
    dev = states[:, 1:-1] - chord[:, 1:-1]
    return float(np.mean(np.sum(dev * dev, axis=2)))


def energy_distance(x: np.ndarray, y: np.ndarray) -> float:
    """Squared energy distance between two samples of flat vectors.

    2 E|X - Y| - E|X - X'| - E|Y - Y'| with U-statistic within-sample terms;
    nonnegative, and 0 in expectation iff the distributions agree.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2 or x.shape[1] != y.shape[1]:
        raise DimensionError(f"need (n, d) and (m, d) samples, got {x.shape}, {y.shape}")
    if x.shape[0] < 2 or y.shape[0] < 2:
        raise ArgumentError("need at least two samples on each side")

    def pair_mean(a: np.ndarray, b: np.ndarray, exclude_diag: bool) -> float:
        sq = np.sum(a * a, axis=1)[:, None] + np.sum(b * b, axis=1)[None, :] - 2.0 * (a @ b.T)
        d = np.sqrt(np.maximum(sq, 0.0))
        if exclude_diag:
            return float((d.sum() - np.trace(d)) / (a.shape[0] * (b.shape[0] - 1)))
        return float(d.mean())

    return 2.0 * pair_mean(x, y, False) - pair_mean(x, x, True) - pair_mean(y, y, True)


def block_residual_autocorrelation(images: np.ndarray) -> float:
    """Correlation between adjacent pixels inside 2x2 blocks, after removing
    each block's mean.

    Upsampling without corrective noise leaves blocks nearly constant, which
    shows up as high correlation between in-block neighbors; the fully
    decorrelating renoising drives it negative.
    """
    images = np.asarray(images, dtype=np.float64)
    if images.ndim != 4:
        raise DimensionError(f"need (B, h, w, c) images, got {images.shape}")
    means = kernels.repeat_nearest(kernels.halve(np.ascontiguousarray(images)), 2)
    r = images - means
    b, h, w, c = r.shape
    blocks = r.reshape(b, h // 2, 2, w // 2, 2, c)
    pairs_a = [blocks[:, :, 0, :, 0], blocks[:, :, 1, :, 0], blocks[:, :, 0, :, 0], blocks[:, :, 0, :, 1]]
    pairs_b = [blocks[:, :, 0, :, 1], blocks[:, :, 1, :, 1], blocks[:, :, 1, :, 0], blocks[:, :, 1, :, 1]]
    a = np.concatenate([p.ravel() for p in pairs_a])
    bb = np.concatenate([p.ravel() for p in pairs_b])
    return float(np.corrcoef(a, bb)[0, 1])
