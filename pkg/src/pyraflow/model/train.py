"""Trainers for the two desk-scale tasks.

toy2d: map one or three fixed 2-d points to a uniform source through two
time windows, with endpoint noise either shared within a window (coupled) or
drawn independently; the trained flows are compared by how far their sampled
trajectories bend away from each window's chord.

tinyimage: 16x16 procedural patterns trained with the three-stage pyramid
objective, against a single-stage baseline at the same pixel-evaluation
budget; sample quality is compared by energy distance to held-out data.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from ..backend import kernels
from ..errors import ArgumentError, TrainingError
from ..flow import make_training_batch
from ..grid import stream_rng
from ..renoise import _block_noise_coefficients, solve_jump
from ..sampler import INIT_STREAM, JUMP_STREAM_BASE
from ..schedule import StageSchedule, build_schedule
from .fields import NeighborhoodField, PointField
from .metrics import chord_deviation, energy_distance
from .net import Adam, MlpNet

# Stream ids under the config seed.
_STREAM_INIT = 10  # network init
_STREAM_TRAIN = 11  # batch draws (stages, times, noise)
_STREAM_DATA_TRAIN = 12
_STREAM_DATA_HELDOUT = 13
_STREAM_EVAL = 14  # trajectory / sample generation

TOY_TARGETS = {
    1: np.array([[0.7, 0.7]]),
    3: np.array([[0.8, 0.0], [-0.4, 0.7], [-0.4, -0.7]]),
}


@dataclass
class TrainConfig:
    task: str
    batch_size: int = 256
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.95
    eps: float = 1e-6
    steps: int = 5000
    seed: int = 0
    coupling_mode: str = "ours"
    stages: int = 3  # tinyimage only; toy2d always uses two windows
    datapoints: int = 3  # toy2d only
    hidden: tuple[int, ...] = (64, 64)
    n_freq: int = 4
    pixel_budget: int | None = None  # tinyimage: stop once consumed
    max_grad_norm: float | None = 1.0

    def __post_init__(self):
        if self.task not in ("toy2d", "tinyimage"):
            raise ArgumentError(f"unknown task {self.task!r}")
        if self.coupling_mode not in ("ours", "random"):
            raise ArgumentError(f"unknown coupling mode {self.coupling_mode!r}")
        if self.learning_rate <= 0.0:
            raise ArgumentError("learning rate must be > 0")
        # steps = 0 is allowed as an evaluation-only control run.
        if self.steps < 0 or self.batch_size < 1 or self.stages < 1:
            raise ArgumentError("steps, batch size, and stages must be positive")
        if self.task == "toy2d" and self.datapoints not in TOY_TARGETS:
            raise ArgumentError(f"toy2d supports {sorted(TOY_TARGETS)} datapoints")


# ---------------------------------------------------------------------------
# toy2d


def _toy_schedule() -> StageSchedule:
    return build_schedule(2)


def sample_toy_trajectories(
    field: PointField,
    schedule: StageSchedule,
    n_traj: int,
    steps_per_window: int,
    seed: int,
) -> dict:
    """Integrate trajectories from the uniform source through both windows.

    Returns per-window state stacks (n_traj, steps+1, 2), the matching global
    times, and the final samples. The inter-window transition uses the same
    rescale and noise weight as the grid sampler; with no resolution change
    the corrective noise is white.
    """
    rng = stream_rng(seed, _STREAM_EVAL)
    x = rng.uniform(-1.0, 1.0, size=(n_traj, 2))
    windows = []
    times = []
    for k in range(schedule.num_stages - 1, -1, -1):
        stage = schedule.stage(k)
        states = [x]
        for j in range(steps_per_window):
            t = stage.s + stage.duration * (j / steps_per_window)
            vel = field.velocities(x, np.full(n_traj, t), np.full(n_traj, k))
            x = x + vel / steps_per_window
            states.append(x)
        windows.append(np.stack(states, axis=1))
        times.append(stage.s + stage.duration * np.arange(steps_per_window + 1) / steps_per_window)
        if k > 0:
            params = solve_jump(schedule.stage(k - 1).s, schedule.gamma)
            x = params.rescale * x + params.alpha * rng.standard_normal((n_traj, 2))
    return {"windows": windows, "times": times, "final": x}


def train_toy2d(cfg: TrainConfig) -> tuple[PointField, dict]:
    if cfg.task != "toy2d":
        raise ArgumentError(f"config task is {cfg.task!r}, expected 'toy2d'")
    schedule = _toy_schedule()
    targets = TOY_TARGETS[cfg.datapoints]
    net = MlpNet(
        [2 + 2 * cfg.n_freq + 2, *cfg.hidden, 2],
        n_freq=cfg.n_freq,
        n_stages=2,
        rng=stream_rng(cfg.seed, _STREAM_INIT),
    )
    field = PointField(net)
    opt = Adam(
        net.parameters(),
        lr=cfg.learning_rate,
        beta1=cfg.beta1,
        beta2=cfg.beta2,
        eps=cfg.eps,
        max_grad_norm=cfg.max_grad_norm,
    )
    rng = stream_rng(cfg.seed, _STREAM_TRAIN)
    starts = np.array([schedule.stage(k).s for k in range(2)])
    ends = np.array([schedule.stage(k).e for k in range(2)])

    losses = []
    B = cfg.batch_size
    for step in range(cfg.steps):
        x1 = targets[rng.integers(0, len(targets), size=B)]
        stage_ix = rng.integers(0, 2, size=B)
        s = starts[stage_ix][:, None]
        e = ends[stage_ix][:, None]
        noise_end = rng.uniform(-1.0, 1.0, size=(B, 2))
        if cfg.coupling_mode == "ours":
            noise_start = noise_end
        else:
            noise_start = rng.uniform(-1.0, 1.0, size=(B, 2))
        x_end = e * x1 + (1.0 - e) * noise_end
        x_start = s * x1 + (1.0 - s) * noise_start
        u = rng.uniform(size=(B, 1))
        t = s + (e - s) * u
        x_t = (1.0 - u) * x_start + u * x_end
        target = x_end - x_start

        pred = net.forward(x_t, t[:, 0], stage_ix)
        diff = pred - target
        loss = float(np.mean(diff * diff))
        if not np.isfinite(loss):
            raise TrainingError("toy2d loss diverged", step)
        losses.append(loss)
        grads = net.backward(2.0 * diff / diff.size)
        flat = []
        for gw, gb in grads:
            flat.extend([gw, gb])
        opt.step(flat)

    traj = sample_toy_trajectories(field, schedule, n_traj=512, steps_per_window=32, seed=cfg.seed)
    per_window = [chord_deviation(w) for w in traj["windows"]]
    nearest = np.min(
        np.linalg.norm(traj["final"][:, None, :] - targets[None, :, :], axis=2), axis=1
    )
    metrics = {
        "losses": losses,
        "straightness": float(np.mean(per_window)),
        "straightness_per_window": per_window,
        "mean_nearest_target_distance": float(np.mean(nearest)),
        "trajectories": traj,
        "schedule": schedule,
    }
    return field, metrics


# ---------------------------------------------------------------------------
# tinyimage

IMAGE_SIZE = 16


def pattern_dataset(n: int, seed: int, stream: int, size: int = IMAGE_SIZE) -> np.ndarray:
    """(n, size, size, 1) procedural patterns: axis-aligned rectangles on a
    flat background, and clipped linear gradients."""
    rng = stream_rng(seed, stream)
    out = np.empty((n, size, size, 1))
    rr, cc = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    for i in range(n):
        if rng.integers(0, 2) == 0:
            img = np.full((size, size), float(rng.uniform(-1.0, -0.2)))
            h = int(rng.integers(4, size - 3))
            w = int(rng.integers(4, size - 3))
            r0 = int(rng.integers(0, size - h + 1))
            c0 = int(rng.integers(0, size - w + 1))
            img[r0 : r0 + h, c0 : c0 + w] = float(rng.uniform(0.2, 1.0))
        else:
            theta = float(rng.uniform(0.0, 2.0 * np.pi))
            slope = float(rng.uniform(0.3, 0.7))
            base = float(rng.uniform(-0.3, 0.3))
            ramp = np.cos(theta) * (2.0 * rr / (size - 1) - 1.0) + np.sin(theta) * (
                2.0 * cc / (size - 1) - 1.0
            )
            img = np.clip(base + slope * ramp, -1.0, 1.0)
        out[i, :, :, 0] = img
    return out


def sample_images(
    field: NeighborhoodField,
    schedule: StageSchedule,
    n: int,
    shape: tuple[int, int, int],
    seed: int,
    steps_per_stage: int = 16,
    renoise: bool = True,
) -> np.ndarray:
    """Batched pyramid sampling; stream layout matches the single-grid sampler,
    so n = 1 reproduces its bits."""
    K = schedule.num_stages
    h, w, c = shape
    d = 2 ** (K - 1)
    x = stream_rng(seed, INIT_STREAM).standard_normal((n, h // d, w // d, c))
    h_step = 1.0 / steps_per_stage
    for jump_ix, k in enumerate(range(K - 1, -1, -1)):
        stage = schedule.stage(k)
        for j in range(steps_per_stage):
            t = stage.s + (stage.e - stage.s) * (j / steps_per_stage)
            vel = field.velocities(x, np.full(n, t), np.full(n, k))
            if not np.all(np.isfinite(vel)):
                raise TrainingError(f"non-finite velocity at stage {k}", j)
            x = x + h_step * vel
        if k > 0:
            params = solve_jump(schedule.stage(k - 1).s, schedule.gamma)
            upsampled = kernels.repeat_nearest(np.ascontiguousarray(x), 2)
            if renoise:
                z = stream_rng(seed, JUMP_STREAM_BASE + jump_ix).standard_normal(upsampled.shape)
                coef_z, coef_mean, force = _block_noise_coefficients(params.gamma)
                noise = kernels.block_noise(z, coef_z, coef_mean, force)
                x = params.rescale * upsampled + params.alpha * noise
            else:
                x = upsampled
    return x


def train_tinyimage(cfg: TrainConfig) -> tuple[NeighborhoodField, dict]:
    if cfg.task != "tinyimage":
        raise ArgumentError(f"config task is {cfg.task!r}, expected 'tinyimage'")
    K = cfg.stages
    schedule = build_schedule(K)
    train_set = pattern_dataset(512, cfg.seed, _STREAM_DATA_TRAIN)
    heldout = pattern_dataset(256, cfg.seed, _STREAM_DATA_HELDOUT)
    net = MlpNet(
        [11 + 2 * cfg.n_freq + K, *cfg.hidden, 1],
        n_freq=cfg.n_freq,
        n_stages=K,
        rng=stream_rng(cfg.seed, _STREAM_INIT),
    )
    field = NeighborhoodField(net)
    opt = Adam(
        net.parameters(),
        lr=cfg.learning_rate,
        beta1=cfg.beta1,
        beta2=cfg.beta2,
        eps=cfg.eps,
        max_grad_norm=cfg.max_grad_norm,
    )
    rng = stream_rng(cfg.seed, _STREAM_TRAIN)

    losses = []
    consumed = 0
    step = 0
    B = cfg.batch_size
    while step < cfg.steps and (cfg.pixel_budget is None or consumed < cfg.pixel_budget):
        x1 = train_set[rng.integers(0, train_set.shape[0], size=B)]
        groups = make_training_batch(x1, schedule, rng)
        total_loss = 0.0
        grads_total = [np.zeros_like(p) for p in net.parameters()]
        for g in groups:
            pred = field.velocities(g.x_t, g.t, np.full(g.t.shape[0], g.stage.index))
            diff = pred - g.target
            per_elem = g.target[0].size
            total_loss += float(np.sum(diff * diff)) / per_elem / B
            upstream = (2.0 / per_elem / B) * diff.reshape(-1, 1)
            grads = net.backward(upstream)
            i = 0
            for gw, gb in grads:
                grads_total[i] += gw
                grads_total[i + 1] += gb
                i += 2
            consumed += g.x_t.shape[0] * g.x_t.shape[1] * g.x_t.shape[2]
        if not np.isfinite(total_loss):
            raise TrainingError("tinyimage loss diverged", step)
        losses.append(total_loss)
        opt.step(grads_total)
        step += 1

    shape = (IMAGE_SIZE, IMAGE_SIZE, 1)
    generated = sample_images(field, schedule, 256, shape, seed=cfg.seed + 1)
    ed = energy_distance(generated.reshape(256, -1), heldout.reshape(256, -1))
    metrics = {
        "losses": losses,
        "steps_run": step,
        "pixel_evals": consumed,
        "energy_distance": ed,
        "generated": generated,
        "schedule": schedule,
    }
    return field, metrics
