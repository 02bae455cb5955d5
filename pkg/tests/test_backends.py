"""Bit-parity between the compiled kernels and the pure-numpy fallback."""

import os
import subprocess
import sys

import numpy as np
import pytest

from pyraflow import _kernels_py
from pyraflow.grid import stream_rng

cython_kernels = pytest.importorskip("pyraflow._kernels_cy", reason="compiled kernels not built")


def random_batch(shape, seed=0):
    return np.ascontiguousarray(stream_rng(seed, 0).standard_normal(shape))


class TestParity:
    def test_halve(self):
        a = random_batch((7, 8, 12, 3))
        assert np.array_equal(_kernels_py.halve(a), cython_kernels.halve(a))

    def test_repeat_nearest(self):
        a = random_batch((5, 3, 4, 2))
        for factor in (1, 2, 4):
            assert np.array_equal(
                _kernels_py.repeat_nearest(a, factor), cython_kernels.repeat_nearest(a, factor)
            )

    def test_block_noise_general(self):
        z = random_batch((64, 6, 6, 2), seed=1)
        args = (0.9486832980505138, -0.3162277660168379, False)
        assert np.array_equal(
            _kernels_py.block_noise(z, *args), cython_kernels.block_noise(z, *args)
        )

    def test_block_noise_forced_zero_sum(self):
        z = random_batch((64, 6, 6, 2), seed=2)
        c = 2.0 / np.sqrt(3.0)
        a = _kernels_py.block_noise(z, c, -c, True)
        b = cython_kernels.block_noise(z, c, -c, True)
        assert np.array_equal(a, b)
        sums = ((a[:, 0::2, 0::2] + a[:, 0::2, 1::2]) + a[:, 1::2, 0::2]) + a[:, 1::2, 1::2]
        assert np.all(sums == 0.0)

    def test_patch9(self):
        img = random_batch((9, 5, 7), seed=3)
        assert np.array_equal(_kernels_py.patch9(img), cython_kernels.patch9(img))

    def test_patch9_edge_padding(self):
        img = np.ascontiguousarray(np.arange(4.0).reshape(1, 2, 2))
        out = cython_kernels.patch9(img)
        # corner pixel replicates the edge: neighborhood of (0,0)
        assert out[0, 0, 0].tolist() == [0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 2.0, 2.0, 3.0]
        assert np.array_equal(out, _kernels_py.patch9(img))


class TestSelection:
    def test_backend_names(self):
        assert _kernels_py.NAME == "python"
        assert cython_kernels.NAME == "cython"

    @pytest.mark.parametrize("choice", ["python", "cython"])
    def test_env_var_forces_backend(self, choice):
        code = "import pyraflow; print(pyraflow.BACKEND)"
        env = dict(os.environ, PYRAFLOW_BACKEND=choice)
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
        )
        assert out.stdout.strip() == choice

    def test_unknown_backend_rejected(self):
        code = "import pyraflow"
        env = dict(os.environ, PYRAFLOW_BACKEND="fortran")
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
        assert out.returncode != 0
