"""Stage-jump transitions: rescaling plus block-correlated corrective noise.

Crossing from a coarse stage into the next finer one upsamples the state,
which makes the four pixels of every upsampled 2x2 block perfectly
correlated. The transition therefore rescales the state by s / e_prev to
match means and adds weight-alpha noise whose within-block correlation gamma
is negative, restoring the distribution the finer stage was trained to start
from. gamma = -1/3 is the fully decorrelating choice and also minimizes the
noise weight alpha = (1 - s) / sqrt(1 - gamma).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .errors import ArgumentError, DimensionError
from .grid import LatentGrid, down, stream_rng, up
from .schedule import GAMMA_MIN, check_gamma, jump_end_time


@dataclass(frozen=True)
class JumpParams:
    """Solved transition into a stage starting at s (all fields derived)."""

    s: float
    e_prev: float
    gamma: float
    rescale: float
    alpha: float

    @classmethod
    def passthrough(cls, s: float, gamma: float) -> "JumpParams":
        """Renoise-disabled ablation: pure nearest upsample, no noise."""
        return cls(s=s, e_prev=jump_end_time(s, gamma), gamma=gamma, rescale=1.0, alpha=0.0)


def solve_jump(s: float, gamma: float) -> JumpParams:
    """Solve the mean- and covariance-matching constraints for a jump into s.

    gamma = 0 is the exact limit where the previous window runs to 1 and the
    corrective noise is white with weight 1 - s.
    """
    if not 0.0 < s < 1.0:
        raise ArgumentError(f"jump target start must be in (0, 1), got {s}")
    gamma = check_gamma(gamma)
    if gamma == 0.0:
        e_prev = 1.0
        alpha = 1.0 - s
    else:
        e_prev = jump_end_time(s, gamma)
        alpha = (1.0 - s) / math.sqrt(1.0 - gamma)
    return JumpParams(s=s, e_prev=e_prev, gamma=gamma, rescale=s / e_prev, alpha=alpha)


def _block_noise_coefficients(gamma: float) -> tuple[float, float, bool]:
    """(coef_z, coef_mean, force_zero_sum) for the 2x2-block construction.

    n = coef_z * z + coef_mean * blockmean(z) has unit variance and
    within-block correlation gamma for i.i.d. standard-normal z. At the
    gamma = -1/3 boundary the block covariance is singular with the constant
    vector in its kernel, so block sums vanish; the kernel then forces the
    fourth entry to the exact negation of the other three, which keeps the
    sums at 0.0 in floating point too.
    """
    gamma = check_gamma(gamma)
    if gamma == GAMMA_MIN:
        c = 2.0 / math.sqrt(3.0)
        return c, -c, True
    coef_z = math.sqrt(1.0 - gamma)
    coef_mean = math.sqrt(max(1.0 + 3.0 * gamma, 0.0)) - coef_z
    return coef_z, coef_mean, False


def corrective_noise(shape: tuple[int, int, int], gamma: float, rng: np.random.Generator) -> LatentGrid:
    """Gaussian grid with unit variance and within-2x2-block correlation gamma.

    Blocks are independent of each other; gamma = 0 degenerates to i.i.d.
    standard normal.
    """
    h, w, c = shape
    if h % 2 or w % 2:
        raise DimensionError(f"corrective noise needs even dims, got {h}x{w}")
    z = rng.standard_normal((1, h, w, c))
    coef_z, coef_mean, force = _block_noise_coefficients(gamma)
    if gamma == 0.0:
        return LatentGrid(z[0])
    return LatentGrid(kernels.block_noise(z, coef_z, coef_mean, force)[0])


def jump(x_end_prev: LatentGrid, params: JumpParams, rng: np.random.Generator) -> LatentGrid:
    """Apply the transition: rescale * up(x, 2) + alpha * corrective noise."""
    upsampled = up(x_end_prev, 2)
    if params.alpha == 0.0:
        return LatentGrid(params.rescale * upsampled.data)
    noise = corrective_noise(upsampled.shape, params.gamma, rng)
    return LatentGrid(params.rescale * upsampled.data + params.alpha * noise.data)


# ---------------------------------------------------------------------------
# Monte Carlo verifiers (used by the verify-renoise CLI and acceptance tests)


@dataclass(frozen=True)
class NoiseMoments:
    """Empirical within-block second moments of the corrective noise."""

    n_blocks: int
    diag_mean: float
    offdiag_mean: float
    max_abs_block_sum: float
    cov: np.ndarray  # within-block 4x4 covariance estimate

    def ok(self, gamma: float, tol: float = 0.01) -> bool:
        return abs(self.diag_mean - 1.0) <= tol and abs(self.offdiag_mean - gamma) <= tol


def noise_block_moments(gamma: float, n_blocks: int, seed: int, chunk: int = 1 << 17) -> NoiseMoments:
    """Estimate the within-block covariance over n_blocks independent blocks."""
    coef_z, coef_mean, force = _block_noise_coefficients(gamma)
    rng = stream_rng(seed, 0)
    total = np.zeros((4, 4))
    max_sum = 0.0
    done = 0
    while done < n_blocks:
        b = min(chunk, n_blocks - done)
        z = rng.standard_normal((b, 2, 2, 1))
        if gamma == 0.0:
            n = z
        else:
            n = kernels.block_noise(z, coef_z, coef_mean, force)
        flat = n.reshape(b, 4)
        total += flat.T @ flat
        sums = ((flat[:, 0] + flat[:, 1]) + flat[:, 2]) + flat[:, 3]
        max_sum = max(max_sum, float(np.max(np.abs(sums))))
        done += b
    cov = total / n_blocks
    diag = float(np.mean(np.diag(cov)))
    off = float((cov.sum() - np.trace(cov)) / 12.0)
    return NoiseMoments(
        n_blocks=n_blocks, diag_mean=diag, offdiag_mean=off, max_abs_block_sum=max_sum, cov=cov
    )


@dataclass(frozen=True)
class JumpMoments:
    """Empirical per-pixel moments of jump outputs fed with coarse-stage endpoints."""

    n_samples: int
    max_mean_err: float
    max_var_err: float
    mean: np.ndarray
    var: np.ndarray
    target_mean: np.ndarray
    target_var: float

    def ok(self, tol: float = 0.005) -> bool:
        return self.max_mean_err <= tol and self.max_var_err <= tol


def jump_moment_check(
    x1: LatentGrid,
    k: int,
    s: float,
    gamma: float,
    n_samples: int,
    seed: int,
    chunk: int = 1 << 15,
) -> JumpMoments:
    """Feed the jump with endpoint-law inputs of stage k+1 and compare the
    output moments against the start law of stage k.

    Inputs are e_prev * down(x1, 2**(k+1)) + (1 - e_prev) * noise; outputs
    should match mean s * up(down(x1, 2**(k+1)), 2) and variance (1 - s)**2.
    """
    params = solve_jump(s, gamma)
    d_in = 2 ** (k + 1)
    base = down(x1, d_in)
    target_mean = s * up(base, 2).data
    target_var = (1.0 - s) ** 2
    coef_z, coef_mean, force = _block_noise_coefficients(gamma)

    rng = stream_rng(seed, 0)
    acc = np.zeros_like(target_mean)
    acc_sq = np.zeros_like(target_mean)
    done = 0
    while done < n_samples:
        b = min(chunk, n_samples - done)
        n_in = rng.standard_normal((b,) + base.shape)
        x_end = params.e_prev * base.data + (1.0 - params.e_prev) * n_in
        upsampled = kernels.repeat_nearest(np.ascontiguousarray(x_end), 2)
        z = rng.standard_normal(upsampled.shape)
        if gamma == 0.0:
            noise = z
        else:
            noise = kernels.block_noise(z, coef_z, coef_mean, force)
        out = params.rescale * upsampled + params.alpha * noise
        acc += out.sum(axis=0)
        acc_sq += (out * out).sum(axis=0)
        done += b
    mean = acc / n_samples
    var = acc_sq / n_samples - mean * mean
    return JumpMoments(
        n_samples=n_samples,
        max_mean_err=float(np.max(np.abs(mean - target_mean))),
        max_var_err=float(np.max(np.abs(var - target_var))),
        mean=mean,
        var=var,
        target_mean=target_mean,
        target_var=target_var,
    )
