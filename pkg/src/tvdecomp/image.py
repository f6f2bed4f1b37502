"""Pixel-grid containers shared by every other module.

Images are 2-D float64 grids on the [0, 1] scale.  Vector fields carry the
two gradient/potential components; in the numeric core they travel as arrays
of shape ``(2, h, w)`` with component 0 along the width (horizontal) axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _validate_plane(arr, name):
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D grid, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True)
class Image:
    """A single-channel image; immutable after construction."""

    data: np.ndarray

    def __post_init__(self):
        arr = _validate_plane(self.data, "image data")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape


@dataclass(frozen=True)
class VectorField:
    """A pair of same-shaped planes (g1, g2) housing a vector potential."""

    g1: np.ndarray
    g2: np.ndarray

    def __post_init__(self):
        g1 = _validate_plane(self.g1, "g1")
        g2 = _validate_plane(self.g2, "g2")
        if g1.shape != g2.shape:
            raise ValueError(
                f"component shapes differ: {g1.shape} vs {g2.shape}")
        g1.flags.writeable = False
        g2.flags.writeable = False
        object.__setattr__(self, "g1", g1)
        object.__setattr__(self, "g2", g2)

    @property
    def shape(self):
        return self.g1.shape

    def magnitude(self):
        """Pointwise Euclidean magnitude sqrt(g1**2 + g2**2)."""
        return np.hypot(self.g1, self.g2)

    def as_array(self):
        return np.stack([self.g1, self.g2])

    @classmethod
    def from_array(cls, g):
        g = np.asarray(g, dtype=np.float64)
        if g.ndim != 3 or g.shape[0] != 2:
            raise ValueError(f"expected shape (2, h, w), got {g.shape}")
        return cls(g[0], g[1])


@dataclass(frozen=True)
class MultiImage:
    """Ordered channels sharing one geometry (1 = gray, 3 = RGB)."""

    channels: tuple

    def __post_init__(self):
        channels = tuple(self.channels)
        if not channels:
            raise ValueError("MultiImage needs at least one channel")
        if not all(isinstance(c, Image) for c in channels):
            raise TypeError("channels must be Image instances")
        shape = channels[0].shape
        if any(c.shape != shape for c in channels):
            raise ValueError("all channels must share dimensions")
        object.__setattr__(self, "channels", channels)

    @property
    def height(self):
        return self.channels[0].height

    @property
    def width(self):
        return self.channels[0].width

    def __len__(self):
        return len(self.channels)


def from_bytes(raw, max_intensity):
    """Normalize an integer pixel grid to the internal [0, 1] scale."""
    if max_intensity <= 0:
        raise ValueError(f"max_intensity must be positive, got {max_intensity}")
    raw = np.asarray(raw, dtype=np.float64)
    return Image(raw / float(max_intensity))


def clamp_to_unit(img):
    """Clamp every pixel into [0, 1]; idempotent."""
    if isinstance(img, Image):
        return Image(np.clip(img.data, 0.0, 1.0))
    return np.clip(_validate_plane(img, "image"), 0.0, 1.0)
