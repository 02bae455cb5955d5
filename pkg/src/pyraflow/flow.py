"""Training-pair construction for the unified piecewise flow objective.

Within stage k the flow interpolates between a window-start latent (built
from the twice-downsampled, once-upsampled data and more noise) and a
window-end latent (once-downsampled data and less noise). Both endpoints
share a single noise draw, so the per-sample velocity is the constant
difference of the endpoints and trajectories stay straight inside windows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .errors import DimensionError
from .grid import LatentGrid, down, lerp, up
from .schedule import Stage, StageSchedule, rescale_time, sample_stage


@dataclass(frozen=True)
class PyramidSample:
    """One training example at stage resolution.

    ``target`` is the window velocity (end minus start endpoint); ``x_t`` is
    the interpolation of the endpoints at the rescaled time of ``t``.
    """

    stage: Stage
    t: float
    x_t: LatentGrid
    target: LatentGrid
    endpoints: tuple[LatentGrid, LatentGrid]  # (start, end)


def make_endpoints(x1: LatentGrid, stage: Stage, noise: LatentGrid) -> tuple[LatentGrid, LatentGrid]:
    """Coupled window endpoints (start, end) for data x1 with one shared noise draw.

    end   = e * down(x1, 2**k) + (1 - e) * noise
    start = s * up(down(x1, 2**(k + 1)), 2) + (1 - s) * noise
    """
    d = stage.divisor
    if x1.height % (2 * d) or x1.width % (2 * d):
        raise DimensionError(
            f"data dims {x1.height}x{x1.width} must be divisible by {2 * d} for stage {stage.index}"
        )
    expected = (x1.height // d, x1.width // d, x1.channels)
    if noise.shape != expected:
        raise DimensionError(f"noise shape {noise.shape} != stage resolution {expected}")
    x_end = LatentGrid(stage.e * down(x1, d).data + (1.0 - stage.e) * noise.data)
    x_start = LatentGrid(stage.s * up(down(x1, 2 * d), 2).data + (1.0 - stage.s) * noise.data)
    return x_start, x_end


def make_sample(x1: LatentGrid, schedule: StageSchedule, rng: np.random.Generator) -> PyramidSample:
    """Draw (stage, t, noise) and assemble the training example."""
    K = schedule.num_stages
    if x1.height % 2**K or x1.width % 2**K:
        raise DimensionError(f"data dims must be divisible by 2**{K}, got {x1.height}x{x1.width}")
    stage = schedule.stage(sample_stage(K, rng))
    t = float(rng.uniform(stage.s, stage.e))
    noise = LatentGrid(
        rng.standard_normal((x1.height // stage.divisor, x1.width // stage.divisor, x1.channels))
    )
    x_start, x_end = make_endpoints(x1, stage, noise)
    target = LatentGrid(x_end.data - x_start.data)
    x_t = lerp(x_start, x_end, rescale_time(stage, t))
    return PyramidSample(stage=stage, t=t, x_t=x_t, target=target, endpoints=(x_start, x_end))


def fm_loss(
    v_pred: LatentGrid,
    sample: PyramidSample,
    stage_weights: np.ndarray | None = None,
) -> float:
    """Mean squared error against the sample's target velocity.

    The mean (not sum) over elements keeps stages of different resolutions
    comparable; ``stage_weights`` optionally rescales per stage index.
    """
    if v_pred.shape != sample.target.shape:
        raise DimensionError(f"prediction shape {v_pred.shape} != target {sample.target.shape}")
    diff = v_pred.data - sample.target.data
    loss = float(np.mean(diff * diff))
    if stage_weights is not None:
        loss *= float(stage_weights[sample.stage.index])
    return loss


@dataclass(frozen=True)
class TrainingBatch:
    """A stage-homogeneous slice of a training batch, as raw batched arrays."""

    stage: Stage
    t: np.ndarray  # (B,)
    x_t: np.ndarray  # (B, h, w, c)
    target: np.ndarray  # (B, h, w, c)


def make_training_batch(
    x1_batch: np.ndarray, schedule: StageSchedule, rng: np.random.Generator
) -> list[TrainingBatch]:
    """Vectorized batch construction, grouped by sampled stage.

    ``x1_batch`` is (B, H, W, C). Per group this applies the same endpoint
    formulas as :func:`make_endpoints` through the batched kernels.
    """
    B = x1_batch.shape[0]
    K = schedule.num_stages
    stage_ix = rng.integers(0, K, size=B)
    out = []
    for k in range(K):
        sel = np.nonzero(stage_ix == k)[0]
        if sel.size == 0:
            continue
        stage = schedule.stage(k)
        xs = np.ascontiguousarray(x1_batch[sel])
        base = xs
        for _ in range(stage.index):
            base = kernels.halve(base)
        coarse = kernels.repeat_nearest(kernels.halve(base), 2)
        noise = rng.standard_normal(base.shape)
        x_end = stage.e * base + (1.0 - stage.e) * noise
        x_start = stage.s * coarse + (1.0 - stage.s) * noise
        t = rng.uniform(stage.s, stage.e, size=sel.size)
        tp = ((t - stage.s) / (stage.e - stage.s))[:, None, None, None]
        out.append(
            TrainingBatch(
                stage=stage,
                t=t,
                x_t=(1.0 - tp) * x_start + tp * x_end,
                target=x_end - x_start,
            )
        )
    return out
