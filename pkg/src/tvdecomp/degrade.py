"""Reproducible degradation generators and synthetic test images.

All randomness flows through a Philox counter-based generator keyed directly
by the caller's seed, so outputs are byte-identical across runs and
platforms.
"""

from __future__ import annotations

import math

import numpy as np

from .operators import BlurKernel, PixelMask


def rng_from_seed(seed):
    """The package-wide deterministic generator: 64-bit Philox."""
    return np.random.Generator(np.random.Philox(key=int(seed)))


def gaussian_kernel(hsize, sigma):
    """Truncated Gaussian taps on an hsize x hsize grid, sum 1.

    Matches the usual image-processing convention: sample
    exp(-(x^2 + y^2) / (2 sigma^2)) at offsets -(hsize-1)/2 .. (hsize-1)/2
    (half-integers for even sizes) and renormalize.  Even sizes anchor at
    tap (hsize//2, hsize//2).
    """
    if hsize < 1:
        raise ValueError(f"hsize must be >= 1, got {hsize}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    c = np.arange(hsize, dtype=np.float64) - (hsize - 1) / 2.0
    taps = np.exp(-(c[:, None] ** 2 + c[None, :] ** 2) / (2.0 * sigma ** 2))
    taps /= taps.sum()
    return BlurKernel(taps=taps, anchor=(hsize // 2, hsize // 2))


def disk_kernel(radius, supersample=16):
    """Out-of-focus kernel: subpixel-supersampled disk indicator, sum 1."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    half = math.ceil(radius)
    size = 2 * half + 1
    # Subpixel offsets at the centers of a supersample x supersample grid.
    sub = (np.arange(supersample) + 0.5) / supersample - 0.5
    c = np.arange(size, dtype=np.float64) - half
    yy = (c[:, None] + sub[None, :]).reshape(-1)
    xx = yy
    inside = (yy[:, None] ** 2 + xx[None, :] ** 2) <= radius ** 2
    cover = inside.reshape(size, supersample, size, supersample)
    taps = cover.sum(axis=(1, 3)).astype(np.float64)
    taps /= taps.sum()
    return BlurKernel(taps=taps, anchor=(half, half))


def add_gaussian_noise(img, mean, variance, seed):
    """Add i.i.d. normal(mean, variance) noise on the [0, 1] scale."""
    if variance < 0:
        raise ValueError(f"variance must be nonnegative, got {variance}")
    img = np.asarray(img, dtype=np.float64)
    out = img + mean
    if variance > 0:
        rng = rng_from_seed(seed)
        out = out + math.sqrt(variance) * rng.standard_normal(img.shape)
    return out


def bernoulli_mask(height, width, keep_prob, seed):
    """Seeded i.i.d. Bernoulli(keep_prob) binary mask."""
    if not 0.0 <= keep_prob <= 1.0:
        raise ValueError(f"keep_prob must lie in [0, 1], got {keep_prob}")
    rng = rng_from_seed(seed)
    keep = (rng.random((height, width)) < keep_prob).astype(np.float64)
    return PixelMask(keep=keep)


def synth_cartoon_texture(height, width, stripe_period=8, seed=0,
                          amplitude=0.1):
    """Synthetic ground-truth pair: piecewise-constant shapes + stripes.

    Returns (clean, cartoon_truth, texture_truth) where the texture is a
    zero-mean sinusoid of the given period confined to a horizontal band
    and clean = clip(cartoon + texture, 0, 1).
    """
    if stripe_period < 1 or height < stripe_period or width < stripe_period:
        raise ValueError("dimensions must be at least stripe_period")
    rng = rng_from_seed(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)

    cartoon = np.full((height, width), 0.35)
    cy = 0.32 * height + rng.uniform(-0.02, 0.02) * height
    cx = 0.36 * width + rng.uniform(-0.02, 0.02) * width
    r = 0.20 * min(height, width)
    cartoon[(yy - cy) ** 2 + (xx - cx) ** 2 <= r ** 2] = 0.75
    r0, r1 = int(0.58 * height), int(0.92 * height)
    c0, c1 = int(0.55 * width), int(0.95 * width)
    cartoon[r0:r1, c0:c1] = 0.55

    stripes = amplitude * np.sin(2.0 * np.pi * xx / stripe_period)
    band = np.zeros((height, width))
    band[int(0.15 * height):int(0.85 * height), :] = 1.0
    texture = stripes * band

    clean = np.clip(cartoon + texture, 0.0, 1.0)
    return clean, cartoon, texture
