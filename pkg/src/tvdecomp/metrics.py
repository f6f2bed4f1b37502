"""Quality measures: MSE, PSNR, decomposition correlation, texture display."""

from __future__ import annotations

import math

import numpy as np


def _pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def mse(reference, test):
    """Mean squared pixel difference on the internal [0, 1] scale."""
    reference, test = _pair(reference, test)
    return float(np.mean((reference - test) ** 2))


def psnr(reference, test, i_max=1.0):
    """10 log10(i_max^2 / MSE), in dB; +inf when the images coincide."""
    if i_max <= 0:
        raise ValueError(f"i_max must be positive, got {i_max}")
    err = mse(reference, test)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(i_max * i_max / err)


def correlation(u, v):
    """Sample correlation cov(u, v) / sqrt(var(u) var(v)), pixels flattened."""
    u, v = _pair(u, v)
    du = u - u.mean()
    dv = v - v.mean()
    var_u = float(np.mean(du ** 2))
    var_v = float(np.mean(dv ** 2))
    if var_u == 0.0 or var_v == 0.0:
        which = "first" if var_u == 0.0 else "second"
        raise ValueError(
            f"correlation undefined: {which} image is constant")
    c = float(np.mean(du * dv)) / math.sqrt(var_u * var_v)
    return min(1.0, max(-1.0, c))


def normalize_texture(v):
    """Affine map to [0, 1] for display; constant input maps to 0.5."""
    v = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError("texture contains non-finite values")
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.full_like(v, 0.5)
    return (v - lo) / (hi - lo)
