"""Pyramidal flow matching at desk scale.

Piecewise flows over a resolution pyramid with coupled endpoint sampling, a
renoising transition between stages, an autoregressive history pyramid, and
the token/compute accounting that motivates the design. The hot kernels run
through a compiled extension when available (see :mod:`pyraflow.backend`).
"""

from .accounting import VideoSpec, attention_cost, cost_report, latent_frames, tokens_full, tokens_pyramid
from .backend import BACKEND
from .errors import (
    ArgumentError,
    DimensionError,
    NumericalError,
    PyraflowError,
    StateError,
    TrainingError,
    ValidationError,
)
from .flow import PyramidSample, fm_loss, make_endpoints, make_sample, make_training_batch
from .grid import LatentGrid, down, gaussian, lerp, read_grid, stream_rng, up, write_grid
from .renoise import (
    JumpParams,
    corrective_noise,
    jump,
    jump_moment_check,
    noise_block_moments,
    solve_jump,
)
from .sampler import SamplerConfig, Trajectory, guided_velocity, integrate_stage, sample
from .schedule import (
    GAMMA_DEFAULT,
    GAMMA_MIN,
    Stage,
    StageSchedule,
    build_schedule,
    jump_end_time,
    rescale_time,
    sample_stage,
)
from .temporal import (
    AttentionMask,
    HistoryPyramid,
    PositionGrid,
    build_history,
    causal_mask,
    history_divisor,
    position_grids,
    token_count,
)

__version__ = "0.1.0"
