"""Pure-numpy implementations of the hot kernels.

`pyraflow._kernels_cy` (Cython) implements the same four functions with the
same floating-point evaluation order, so the two backends are bit-identical;
`pyraflow.backend` picks one at import time. All kernels take C-contiguous
float64 arrays with a leading batch axis.
"""

import numpy as np

NAME = "python"


def halve(a: np.ndarray) -> np.ndarray:
    """Block-mean 2x downsample of (B, H, W, C) along the spatial axes.

    Summation order per output cell is ((nw + ne) + sw) + se, then * 0.25.
    """
    out = (a[:, 0::2, 0::2] + a[:, 0::2, 1::2] + a[:, 1::2, 0::2] + a[:, 1::2, 1::2]) * 0.25
    return np.ascontiguousarray(out)


def repeat_nearest(a: np.ndarray, factor: int) -> np.ndarray:
    """Nearest-neighbor upsample of (B, H, W, C) by an integer factor."""
    out = np.repeat(np.repeat(a, factor, axis=1), factor, axis=2)
    return np.ascontiguousarray(out)


def block_noise(z: np.ndarray, coef_z: float, coef_mean: float, force_zero_sum: bool) -> np.ndarray:
    """Correlate i.i.d. draws within each non-overlapping 2x2 spatial block.

    Returns coef_z * z + coef_mean * blockmean(z). With ``force_zero_sum`` the
    south-east entry of every block is replaced by the exact negation of the
    other three so block sums cancel to 0.0 even in floating point (used for
    the fully decorrelating case, where the block sum is zero analytically).
    """
    b, h, w, c = z.shape
    blocks = z.reshape(b, h // 2, 2, w // 2, 2, c)
    z00 = blocks[:, :, 0, :, 0]
    z01 = blocks[:, :, 0, :, 1]
    z10 = blocks[:, :, 1, :, 0]
    z11 = blocks[:, :, 1, :, 1]
    m = (z00 + z01 + z10 + z11) * 0.25
    n00 = coef_z * z00 + coef_mean * m
    n01 = coef_z * z01 + coef_mean * m
    n10 = coef_z * z10 + coef_mean * m
    if force_zero_sum:
        n11 = -((n00 + n01) + n10)
    else:
        n11 = coef_z * z11 + coef_mean * m
    out = np.empty_like(blocks)
    out[:, :, 0, :, 0] = n00
    out[:, :, 0, :, 1] = n01
    out[:, :, 1, :, 0] = n10
    out[:, :, 1, :, 1] = n11
    return np.ascontiguousarray(out.reshape(b, h, w, c))


def patch9(img: np.ndarray) -> np.ndarray:
    """Gather 3x3 neighborhoods (edge-replicated) of (B, H, W) into (B, H, W, 9)."""
    b, h, w = img.shape
    padded = np.pad(img, ((0, 0), (1, 1), (1, 1)), mode="edge")
    out = np.empty((b, h, w, 9), dtype=np.float64)
    k = 0
    for dr in (0, 1, 2):
        for dc in (0, 1, 2):
            out[:, :, :, k] = padded[:, dr : dr + h, dc : dc + w]
            k += 1
    return out
