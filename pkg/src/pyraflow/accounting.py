"""Token and attention-compute arithmetic for full-sequence vs pyramid training.

Reproduces the reference configuration: a 241-frame, 768x1280 video through
an 8x8x8 causal autoencoder with patch size 2 yields 31 latent frames of
3,840 tokens each, 119,040 tokens total; the pyramid history schedule caps
the same video at 15,360 tokens.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ArgumentError
from .temporal import history_divisor


@dataclass(frozen=True)
class VideoSpec:
    frames: int
    height: int
    width: int
    vae_spatial: int = 8
    vae_temporal: int = 8
    causal_first_frame: bool = True
    patch: int = 2

    def __post_init__(self):
        for name in ("frames", "height", "width", "vae_spatial", "vae_temporal", "patch"):
            if getattr(self, name) < 1:
                raise ArgumentError(f"{name} must be positive")

    @property
    def tokens_per_frame(self) -> int:
        stride = self.vae_spatial * self.patch
        if self.height % stride or self.width % stride:
            raise ArgumentError(
                f"frame dims {self.height}x{self.width} not divisible by vae*patch stride {stride}"
            )
        return (self.height // stride) * (self.width // stride)


def latent_frames(spec: VideoSpec) -> int:
    """Latent frame count; a causal autoencoder keeps the first frame whole."""
    if spec.causal_first_frame:
        if (spec.frames - 1) % spec.vae_temporal:
            raise ArgumentError(
                f"frames-1 ({spec.frames - 1}) not divisible by temporal ratio {spec.vae_temporal}"
            )
        return 1 + (spec.frames - 1) // spec.vae_temporal
    if spec.frames % spec.vae_temporal:
        raise ArgumentError(f"frames ({spec.frames}) not divisible by temporal ratio {spec.vae_temporal}")
    return spec.frames // spec.vae_temporal


def tokens_full(spec: VideoSpec) -> int:
    """Token count of full-sequence training: every latent frame at full res."""
    return latent_frames(spec) * spec.tokens_per_frame


def default_divisor_schedule(n_history: int, K: int, current_stage_index: int = 0) -> list[int]:
    """History divisors oldest-to-newest for the given stage (final stage by
    default): ages 1, 2, ... map to the temporal-pyramid divisors."""
    return [history_divisor(age, current_stage_index, K) for age in range(n_history, 0, -1)]


def tokens_pyramid(spec: VideoSpec, K: int, divisor_schedule: list[int] | None = None) -> int:
    """Token count with pyramid history: full current frame plus compressed history."""
    if K < 1:
        raise ArgumentError(f"K must be >= 1, got {K}")
    n = spec.tokens_per_frame
    n_history = latent_frames(spec) - 1
    if divisor_schedule is None:
        divisor_schedule = default_divisor_schedule(n_history, K)
    if len(divisor_schedule) != n_history:
        raise ArgumentError(f"need {n_history} divisors, got {len(divisor_schedule)}")
    cap = 2 ** (K - 1)
    for d, d_next in zip(divisor_schedule, divisor_schedule[1:] + [1]):
        if d < d_next:
            raise ArgumentError("divisors must be non-increasing toward the present")
        if d > cap or d < 1 or (d & (d - 1)):
            raise ArgumentError(f"divisor {d} invalid for K={K} (power of two <= {cap})")
        if n % (d * d):
            raise ArgumentError(f"tokens per frame {n} not divisible by {d}**2")
    return n + sum(n // (d * d) for d in divisor_schedule)


def attention_cost(tokens: int) -> int:
    """Quadratic full-attention cost proxy."""
    if tokens < 0:
        raise ArgumentError(f"tokens must be >= 0, got {tokens}")
    return tokens * tokens


@dataclass(frozen=True)
class CostReport:
    tokens_full: int
    tokens_pyramid: int
    cost_full: int
    cost_pyramid: int
    cost_ratio: float
    # cost_ratio expressed relative to the idealized 1/16**K limit, i.e.
    # ratio * 16**K; > 1 because the current frame stays at full resolution.
    correction_vs_ideal: float


def cost_report(spec: VideoSpec, K: int, divisor_schedule: list[int] | None = None) -> CostReport:
    tf = tokens_full(spec)
    tp = tokens_pyramid(spec, K, divisor_schedule)
    cf = attention_cost(tf)
    cp = attention_cost(tp)
    ratio = cp / cf
    return CostReport(
        tokens_full=tf,
        tokens_pyramid=tp,
        cost_full=cf,
        cost_pyramid=cp,
        cost_ratio=ratio,
        correction_vs_ideal=ratio * 16.0**K,
    )
