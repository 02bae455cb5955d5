"""Benchmark the compiled kernels against the pure-numpy fallback.

Run: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from pyraflow import _kernels_py

try:
    from pyraflow import _kernels_cy
except ImportError:
    _kernels_cy = None


def timeit(fn, *args, repeat=7):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    halve_in = np.ascontiguousarray(rng.standard_normal((4096, 16, 16, 1)))
    repeat_in = np.ascontiguousarray(rng.standard_normal((4096, 8, 8, 1)))
    noise_in = np.ascontiguousarray(rng.standard_normal((100_000, 4, 4, 1)))
    patch_in = np.ascontiguousarray(rng.standard_normal((1024, 16, 16)))
    c = 2.0 / np.sqrt(3.0)

    cases = [
        ("halve (4096x16x16)", "halve", (halve_in,)),
        ("repeat_nearest x2 (4096x8x8)", "repeat_nearest", (repeat_in, 2)),
        ("block_noise (1e5x4x4)", "block_noise", (noise_in, c, -c, True)),
        ("patch9 (1024x16x16)", "patch9", (patch_in,)),
    ]

    print(f"{'kernel':34} {'python':>10} {'cython':>10} {'speedup':>8}")
    for label, name, args in cases:
        t_py = timeit(getattr(_kernels_py, name), *args)
        if _kernels_cy is None:
            print(f"{label:34} {t_py * 1e3:9.2f}ms {'n/a':>10} {'n/a':>8}")
            continue
        out_py = getattr(_kernels_py, name)(*args)
        out_cy = getattr(_kernels_cy, name)(*args)
        assert np.array_equal(out_py, out_cy), f"{name}: backends disagree"
        t_cy = timeit(getattr(_kernels_cy, name), *args)
        print(f"{label:34} {t_py * 1e3:9.2f}ms {t_cy * 1e3:9.2f}ms {t_py / t_cy:7.2f}x")


if __name__ == "__main__":
    main()
