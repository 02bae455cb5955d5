"""Stagewise ODE sampling: coarse noise to full-resolution sample.

Each stage integrates the learned velocity with explicit Euler in the
window-local time coordinate; between stages the state is upsampled and
renoised (see :mod:`pyraflow.renoise`). Randomness is derived from the config
seed through fixed stream ids, so identical configs give identical bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, DimensionError, NumericalError
from .grid import LatentGrid, stream_rng
from .renoise import JumpParams, jump, solve_jump
from .schedule import Stage, StageSchedule

# Stream ids under the config seed: 0 draws the initial noise, 1 + j the
# corrective noise of the j-th jump (j = 0 is the first, coarsest jump).
INIT_STREAM = 0
JUMP_STREAM_BASE = 1


@dataclass(frozen=True)
class SamplerConfig:
    steps_per_stage: tuple[int, ...]
    guidance_scale: float = 1.0
    seed: int = 0
    renoise_enabled: bool = True

    def __post_init__(self):
        if not self.steps_per_stage or any(n < 1 for n in self.steps_per_stage):
            raise ArgumentError(f"steps_per_stage must be positive, got {self.steps_per_stage}")
        if self.guidance_scale < 0.0:
            raise ArgumentError(f"guidance scale must be >= 0, got {self.guidance_scale}")

    def steps_for(self, k: int) -> int:
        """Step count for stage index k (list is ordered coarsest first)."""
        return self.steps_per_stage[len(self.steps_per_stage) - 1 - k]


@dataclass
class Trajectory:
    """States visited during sampling: t is non-decreasing within a stage,
    stage indices are non-increasing over the run (t rolls back at jumps)."""

    points: list[tuple[float, int, LatentGrid]] = field(default_factory=list)

    def append(self, t: float, stage: int, state: LatentGrid) -> None:
        self.points.append((t, stage, state))

    def __len__(self) -> int:
        return len(self.points)


def guided_velocity(v_cond: LatentGrid, v_uncond: LatentGrid, scale: float) -> LatentGrid:
    """Classifier-free extrapolation: uncond + scale * (cond - uncond)."""
    if v_cond.shape != v_uncond.shape:
        raise DimensionError(f"guidance shape mismatch: {v_cond.shape} vs {v_uncond.shape}")
    # exact at the two special scales rather than up-to-rounding
    if scale == 1.0:
        return v_cond
    if scale == 0.0:
        return v_uncond
    return LatentGrid(v_uncond.data + scale * (v_cond.data - v_uncond.data))


def _evaluate(v, x: LatentGrid, t: float, stage: Stage, condition, guidance_scale: float) -> LatentGrid:
    if condition is not None and guidance_scale != 1.0:
        v_cond = v.evaluate(x, t, stage.index, condition)
        v_uncond = v.evaluate(x, t, stage.index, None)
        return guided_velocity(v_cond, v_uncond, guidance_scale)
    return v.evaluate(x, t, stage.index, condition)


def integrate_stage(
    v,
    x_start: LatentGrid,
    stage: Stage,
    n_steps: int,
    condition=None,
    guidance_scale: float = 1.0,
    trajectory: Trajectory | None = None,
) -> LatentGrid:
    """Explicit Euler over the stage window: n uniform steps in rescaled time."""
    if n_steps < 1:
        raise ArgumentError(f"n_steps must be >= 1, got {n_steps}")
    x = x_start
    h = 1.0 / n_steps
    for j in range(n_steps):
        t = stage.s + (stage.e - stage.s) * (j / n_steps)
        vel = _evaluate(v, x, t, stage, condition, guidance_scale)
        if vel.shape != x.shape:
            raise DimensionError(f"velocity shape {vel.shape} != state shape {x.shape}")
        if not np.all(np.isfinite(vel.data)):
            raise NumericalError(f"non-finite velocity at stage {stage.index}, step {j}")
        x = LatentGrid(x.data + h * vel.data)
        if trajectory is not None:
            t_next = stage.e if j == n_steps - 1 else stage.s + (stage.e - stage.s) * ((j + 1) / n_steps)
            trajectory.append(t_next, stage.index, x)
    return x


def sample(
    v,
    schedule: StageSchedule,
    cfg: SamplerConfig,
    shape: tuple[int, int, int],
    condition=None,
) -> tuple[LatentGrid, Trajectory]:
    """Run all stages coarsest to finest; returns the full-resolution grid.

    ``shape`` is the full-resolution output shape; the initial noise is drawn
    at shape / 2**(K-1), the coarsest stage's resolution.
    """
    K = schedule.num_stages
    if len(cfg.steps_per_stage) != K:
        raise ArgumentError(f"need {K} step counts, got {len(cfg.steps_per_stage)}")
    h, w, c = shape
    d = 2 ** (K - 1)
    if h % d or w % d:
        raise DimensionError(f"output dims {h}x{w} must be divisible by {d}")

    rng = stream_rng(cfg.seed, INIT_STREAM)
    x = LatentGrid(rng.standard_normal((h // d, w // d, c)))
    trajectory = Trajectory()
    trajectory.append(schedule.stage(K - 1).s, K - 1, x)

    for jump_ix, k in enumerate(range(K - 1, -1, -1)):
        stage = schedule.stage(k)
        x = integrate_stage(
            v, x, stage, cfg.steps_for(k), condition, cfg.guidance_scale, trajectory
        )
        if k > 0:
            s_next = schedule.stage(k - 1).s
            if cfg.renoise_enabled:
                params = solve_jump(s_next, schedule.gamma)
            else:
                params = JumpParams.passthrough(s_next, schedule.gamma)
            x = jump(x, params, stream_rng(cfg.seed, JUMP_STREAM_BASE + jump_ix))
            trajectory.append(s_next, k - 1, x)
    return x, trajectory
