import math

import numpy as np
import pytest

from pyraflow import (
    ArgumentError,
    DimensionError,
    GAMMA_MIN,
    JumpParams,
    LatentGrid,
    corrective_noise,
    jump,
    jump_moment_check,
    noise_block_moments,
    solve_jump,
    stream_rng,
    up,
)


def block_sums(data: np.ndarray) -> np.ndarray:
    # left-associated adds, matching the construction's forced cancellation
    return ((data[0::2, 0::2] + data[0::2, 1::2]) + data[1::2, 0::2]) + data[1::2, 1::2]


class TestSolveJump:
    def test_two_thirds(self):
        p = solve_jump(2 / 3, GAMMA_MIN)
        assert abs(p.e_prev - 0.8) < 1e-15
        assert abs(p.rescale - 5 / 6) < 1e-15
        assert abs(p.alpha - math.sqrt(3) / 6) < 1e-15

    def test_one_third(self):
        p = solve_jump(1 / 3, GAMMA_MIN)
        assert abs(p.e_prev - 0.5) < 1e-15
        assert abs(p.rescale - 2 / 3) < 1e-15
        assert abs(p.alpha - math.sqrt(3) / 3) < 1e-15

    def test_gamma_zero_limit(self):
        for s in (0.1, 0.5, 0.9):
            p = solve_jump(s, 0.0)
            assert p.e_prev == 1.0
            assert p.alpha == 1.0 - s
            assert p.rescale == s

    def test_fully_decorrelating_shortcuts(self):
        p = solve_jump(0.4, GAMMA_MIN)
        assert abs(p.rescale - (1.0 + 0.4) / 2.0) < 1e-15
        assert abs(p.alpha - math.sqrt(3) * (1.0 - 0.4) / 2.0) < 1e-15

    def test_domain_errors(self):
        with pytest.raises(ArgumentError):
            solve_jump(0.0, GAMMA_MIN)
        with pytest.raises(ArgumentError):
            solve_jump(1.0, GAMMA_MIN)
        with pytest.raises(ArgumentError):
            solve_jump(0.5, -0.5)

    def test_matching_identities(self):
        # diagonal: rescale^2 (1-e)^2 + alpha^2 = (1-s)^2
        # off-diagonal: rescale^2 (1-e)^2 + alpha^2 gamma = 0
        rng = stream_rng(42, 0)
        for _ in range(100):
            s = float(rng.uniform(0.01, 0.99))
            gamma = float(rng.uniform(GAMMA_MIN, 0.0))
            p = solve_jump(s, gamma)
            carried = p.rescale**2 * (1.0 - p.e_prev) ** 2
            assert abs(carried + p.alpha**2 - (1.0 - s) ** 2) <= 1e-12 * (1.0 - s) ** 2
            assert abs(carried + p.alpha**2 * gamma) <= 1e-12 * max(carried, 1e-300)

    def test_alpha_minimal_at_gamma_min(self):
        gammas = np.linspace(GAMMA_MIN, 0.0, 40)
        for s in np.linspace(0.05, 0.95, 10):
            alphas = [solve_jump(float(s), float(g)).alpha for g in gammas]
            assert np.argmin(alphas) == 0

    def test_passthrough(self):
        p = JumpParams.passthrough(0.5, GAMMA_MIN)
        assert p.rescale == 1.0 and p.alpha == 0.0


class TestCorrectiveNoise:
    def test_block_sums_exactly_zero(self):
        noise = corrective_noise((64, 64, 2), GAMMA_MIN, stream_rng(0, 0))
        for c in range(2):
            assert np.all(block_sums(noise.data[:, :, c]) == 0.0)

    def test_gamma_zero_is_iid(self):
        m = noise_block_moments(0.0, 200_000, seed=1)
        assert abs(m.diag_mean - 1.0) < 0.02
        assert abs(m.offdiag_mean) < 0.02

    def test_covariance_at_gamma_min(self):
        m = noise_block_moments(GAMMA_MIN, 200_000, seed=2)
        assert abs(m.diag_mean - 1.0) < 0.02
        assert abs(m.offdiag_mean - GAMMA_MIN) < 0.02
        assert m.max_abs_block_sum == 0.0

    def test_covariance_general_gamma(self):
        m = noise_block_moments(-0.2, 200_000, seed=3)
        assert abs(m.diag_mean - 1.0) < 0.02
        assert abs(m.offdiag_mean + 0.2) < 0.02

    def test_odd_dims_rejected(self):
        with pytest.raises(DimensionError):
            corrective_noise((3, 4, 1), GAMMA_MIN, stream_rng(0, 0))

    def test_deterministic_given_stream(self):
        a = corrective_noise((8, 8, 1), GAMMA_MIN, stream_rng(5, 9))
        b = corrective_noise((8, 8, 1), GAMMA_MIN, stream_rng(5, 9))
        assert np.array_equal(a.data, b.data)


class TestJump:
    def test_disabled_is_pure_upsample(self):
        x = LatentGrid(stream_rng(1, 0).standard_normal((4, 4, 1)))
        out = jump(x, JumpParams.passthrough(0.5, GAMMA_MIN), stream_rng(1, 1))
        assert np.array_equal(out.data, up(x, 2).data)

    def test_zero_input_noise_scale(self):
        p = solve_jump(2 / 3, GAMMA_MIN)
        x = LatentGrid(np.zeros((500, 500, 1)))
        out = jump(x, p, stream_rng(2, 0))
        assert out.shape == (1000, 1000, 1)
        assert abs(out.data.std() - math.sqrt(3) / 6) < 0.005
        assert abs(out.data.mean()) < 0.005

    def test_output_resolution_doubles(self):
        x = LatentGrid(np.zeros((4, 6, 2)))
        out = jump(x, solve_jump(0.5, GAMMA_MIN), stream_rng(0, 0))
        assert out.shape == (8, 12, 2)

    def test_distribution_match(self):
        # endpoint-law inputs should produce start-law outputs
        x1 = LatentGrid(stream_rng(7, 0).standard_normal((8, 8, 1)))
        m = jump_moment_check(x1, k=1, s=2 / 3, gamma=GAMMA_MIN, n_samples=150_000, seed=8)
        assert m.max_mean_err < 0.02
        assert m.max_var_err < 0.02

    def test_distribution_match_gamma_zero(self):
        x1 = LatentGrid(stream_rng(7, 1).standard_normal((8, 8, 1)))
        m = jump_moment_check(x1, k=1, s=0.5, gamma=0.0, n_samples=150_000, seed=9)
        assert m.max_mean_err < 0.02
        assert m.max_var_err < 0.02


def test_jump_output_blocks_decorrelated():
    """After renoising, within-block off-diagonal covariance cancels."""
    p = solve_jump(2 / 3, GAMMA_MIN)
    rng = stream_rng(11, 0)
    n = 200_000
    coarse = rng.standard_normal((n, 1, 1, 1)) * (1.0 - p.e_prev)
    upsampled = np.repeat(np.repeat(coarse, 2, axis=1), 2, axis=2)
    noise = corrective_noise((2, 2, 1), GAMMA_MIN, rng)  # shape check only
    from pyraflow.backend import kernels
    from pyraflow.renoise import _block_noise_coefficients

    cz, cm, force = _block_noise_coefficients(GAMMA_MIN)
    block = kernels.block_noise(rng.standard_normal((n, 2, 2, 1)), cz, cm, force)
    out = (p.rescale * upsampled + p.alpha * block).reshape(n, 4)
    cov = out.T @ out / n
    off = (cov.sum() - np.trace(cov)) / 12.0
    assert abs(off) < 0.01
    assert abs(np.diag(cov).mean() - (1.0 - p.s) ** 2) < 0.01
