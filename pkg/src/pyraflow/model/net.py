"""Small fully-connected velocity network with hand-written reverse mode.

The net maps a per-example feature vector, augmented with sinusoidal time
features and a stage one-hot, through tanh hidden layers to a linear output.
Gradients are exact (verified against central finite differences in the test
suite), and all math is float64.
"""

from __future__ import annotations

import numpy as np

from ..errors import ArgumentError, DimensionError, StateError


def time_stage_features(t: np.ndarray, stage: np.ndarray, n_freq: int, n_stages: int) -> np.ndarray:
    """(B, 2*n_freq + n_stages) embedding: sin/cos of dyadic frequencies of t
    plus a stage one-hot."""
    t = np.asarray(t, dtype=np.float64).reshape(-1, 1)
    freqs = np.pi * (2.0 ** np.arange(n_freq))
    angles = t * freqs
    parts = [np.sin(angles), np.cos(angles)]
    onehot = np.zeros((t.shape[0], n_stages))
    onehot[np.arange(t.shape[0]), np.asarray(stage, dtype=np.int64)] = 1.0
    parts.append(onehot)
    return np.concatenate(parts, axis=1)


class MlpNet:
    """tanh MLP; ``layer_dims[0]`` includes the embedding width."""

    def __init__(self, layer_dims: list[int], n_freq: int, n_stages: int, rng: np.random.Generator):
        if len(layer_dims) < 2 or any(d < 1 for d in layer_dims):
            raise ArgumentError(f"need >= 2 positive layer dims, got {layer_dims}")
        if n_freq < 1 or n_stages < 1:
            raise ArgumentError("n_freq and n_stages must be >= 1")
        self.layer_dims = list(layer_dims)
        self.n_freq = n_freq
        self.n_stages = n_stages
        self.weights = [
            rng.standard_normal((d_in, d_out)) / np.sqrt(d_in)
            for d_in, d_out in zip(layer_dims, layer_dims[1:])
        ]
        self.biases = [np.zeros(d_out) for d_out in layer_dims[1:]]
        self._cache = None

    @property
    def embed_dim(self) -> int:
        return 2 * self.n_freq + self.n_stages

    @property
    def feature_dim(self) -> int:
        return self.layer_dims[0] - self.embed_dim

    @property
    def param_count(self) -> int:
        return sum((d_in + 1) * d_out for d_in, d_out in zip(self.layer_dims, self.layer_dims[1:]))

    def forward(self, features: np.ndarray, t: np.ndarray, stage: np.ndarray) -> np.ndarray:
        """Run the stack on (B, feature_dim) inputs; caches activations."""
        features = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if features.shape[1] != self.feature_dim:
            raise DimensionError(f"expected {self.feature_dim} features, got {features.shape[1]}")
        t = np.broadcast_to(np.asarray(t, dtype=np.float64), (features.shape[0],))
        stage = np.broadcast_to(np.asarray(stage, dtype=np.int64), (features.shape[0],))
        x = np.concatenate([features, time_stage_features(t, stage, self.n_freq, self.n_stages)], axis=1)
        activations = [x]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            x = x @ w + b
            if i < len(self.weights) - 1:
                x = np.tanh(x)
            activations.append(x)
        self._cache = activations
        return x

    def backward(self, upstream: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
        """Exact parameter gradients [(dW, db) per layer] for the last forward."""
        if self._cache is None:
            raise StateError("backward called before forward")
        activations = self._cache
        upstream = np.asarray(upstream, dtype=np.float64)
        if upstream.shape != activations[-1].shape:
            raise DimensionError(
                f"upstream shape {upstream.shape} != output shape {activations[-1].shape}"
            )
        grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(self.weights)
        delta = upstream
        for i in range(len(self.weights) - 1, -1, -1):
            grads[i] = (activations[i].T @ delta, delta.sum(axis=0))
            if i > 0:
                delta = (delta @ self.weights[i].T) * (1.0 - activations[i] ** 2)
        return grads

    def parameters(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out


class Adam:
    """Adam with optional decoupled weight decay and global-norm clipping."""

    def __init__(
        self,
        params: list[np.ndarray],
        lr: float,
        beta1: float = 0.9,
        beta2: float = 0.95,
        eps: float = 1e-6,
        weight_decay: float = 0.0,
        max_grad_norm: float | None = None,
    ):
        if lr <= 0.0:
            raise ArgumentError(f"learning rate must be > 0, got {lr}")
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.max_grad_norm = max_grad_norm
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: list[np.ndarray]) -> None:
        if len(grads) != len(self.params):
            raise DimensionError(f"expected {len(self.params)} gradients, got {len(grads)}")
        if self.max_grad_norm is not None:
            norm = np.sqrt(sum(float(np.sum(g * g)) for g in grads))
            if norm > self.max_grad_norm:
                grads = [g * (self.max_grad_norm / norm) for g in grads]
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            if self.weight_decay:
                p *= 1.0 - self.lr * self.weight_decay
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
