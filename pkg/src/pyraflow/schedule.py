"""Stage schedules: K time windows, resolution divisors, and the jump link.

Stage k covers the window [s_k, e_k] of the unit time interval and operates
at resolution full / 2**k; stage K-1 is the coarsest and starts at 0, stage 0
ends at 1. Consecutive windows overlap: the end of stage k+1 lies strictly
after the start of stage k (the timestep rolls back at each resolution jump),
with the overlap fixed by the decorrelation parameter gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError

# Most negative within-block correlation that keeps the 2x2-block covariance
# (unit diagonal, off-diagonal gamma) positive semidefinite.
GAMMA_MIN = -1.0 / 3.0
GAMMA_DEFAULT = GAMMA_MIN


def check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not GAMMA_MIN <= gamma <= 0.0:
        raise ArgumentError(f"gamma must be in [{GAMMA_MIN}, 0], got {gamma}")
    return gamma


def jump_end_time(s: float, gamma: float) -> float:
    """End time of the window preceding a jump into a window starting at s.

    Solves the covariance-matching constraint for the rescale-plus-renoise
    transition; always lands strictly after s (rollback). The fully
    decorrelating case reduces to 2s / (1 + s), which this uses verbatim so
    the canonical windows come out exact in floating point; gamma = 0 is the
    no-added-correlation limit where the previous window runs to 1.
    """
    if not 0.0 < s < 1.0:
        raise ArgumentError(f"window start must be in (0, 1), got {s}")
    gamma = check_gamma(gamma)
    if gamma == 0.0:
        return 1.0
    if gamma == GAMMA_MIN:
        return 2.0 * s / (1.0 + s)
    root = math.sqrt(1.0 - gamma)
    return s * root / ((1.0 - s) * math.sqrt(-gamma) + s * root)


@dataclass(frozen=True)
class Stage:
    """One pyramid stage: window [s, e] at resolution full / 2**index."""

    index: int
    s: float
    e: float

    def __post_init__(self):
        if self.index < 0:
            raise ArgumentError(f"stage index must be >= 0, got {self.index}")
        if not (0.0 <= self.s < self.e <= 1.0):
            raise ArgumentError(f"stage window must satisfy 0 <= s < e <= 1, got [{self.s}, {self.e}]")

    @property
    def divisor(self) -> int:
        return 2**self.index

    @property
    def duration(self) -> float:
        return self.e - self.s


def rescale_time(stage: Stage, t: float) -> float:
    """Map global t in [s, e] to the window-local coordinate in [0, 1]."""
    if not stage.s <= t <= stage.e:
        raise ArgumentError(f"t={t} outside stage window [{stage.s}, {stage.e}]")
    return (t - stage.s) / (stage.e - stage.s)


@dataclass(frozen=True)
class StageSchedule:
    """The K stages ordered coarsest (index K-1) to finest (index 0)."""

    stages: tuple[Stage, ...]
    gamma: float

    def __post_init__(self):
        check_gamma(self.gamma)
        if not self.stages:
            raise ArgumentError("schedule needs at least one stage")
        k_expected = len(self.stages) - 1
        for st in self.stages:
            if st.index != k_expected:
                raise ArgumentError("stages must be ordered by index K-1 down to 0")
            k_expected -= 1
        if self.stages[0].s != 0.0:
            raise ArgumentError("coarsest stage must start at 0")
        if self.stages[-1].e != 1.0:
            raise ArgumentError("finest stage must end at 1")
        # Adjacent windows are linked by the jump solution and must overlap.
        for coarse, fine in zip(self.stages, self.stages[1:]):
            if coarse.e != jump_end_time(fine.s, self.gamma):
                raise ArgumentError(
                    f"stage {coarse.index} end {coarse.e} does not match the "
                    f"jump link for next start {fine.s}"
                )
            if coarse.e <= fine.s:
                raise ArgumentError("consecutive windows must overlap (rollback)")

    @property
    def num_stages(self) -> int:
        return len(self.stages)

    def stage(self, k: int) -> Stage:
        """Stage with resolution divisor 2**k."""
        return self.stages[len(self.stages) - 1 - k]


def build_schedule(
    K: int,
    gamma: float = GAMMA_DEFAULT,
    layout: str = "uniform-start",
    starts: list[float] | None = None,
) -> StageSchedule:
    """Build a K-stage schedule with uniformly spaced window starts.

    Starts are s_k = (K-1-k) / K; window ends then follow from the jump link
    (finest stage ends at 1). ``starts`` overrides the uniform layout with an
    explicit list ordered finest first (s_{K-1} must be 0).
    """
    if K < 1:
        raise ArgumentError(f"K must be >= 1, got {K}")
    gamma = check_gamma(gamma)
    if layout != "uniform-start":
        raise ArgumentError(f"unknown layout {layout!r}")
    if starts is None:
        starts = [(K - 1 - k) / K for k in range(K)]
    if len(starts) != K:
        raise ArgumentError(f"expected {K} starts, got {len(starts)}")
    if starts[-1] != 0.0:
        raise ArgumentError("coarsest stage must start at 0")
    stages = []
    e = 1.0
    for k in range(K):
        stages.append(Stage(index=k, s=float(starts[k]), e=e))
        if k + 1 < K:
            e = jump_end_time(starts[k], gamma)
    return StageSchedule(stages=tuple(reversed(stages)), gamma=gamma)


def sample_stage(K: int, rng: np.random.Generator) -> int:
    """Uniform stage index in {0, ..., K-1}."""
    if K < 1:
        raise ArgumentError(f"K must be >= 1, got {K}")
    return int(rng.integers(0, K))
