"""Discrete differential and degradation operators with exact adjoints.

The divergence is defined as the exact negative transpose of the gradient
under the active boundary convention, so <grad u, g> = -<u, div g> holds to
machine precision.  Every operator exposes ``apply``/``adjoint`` plus an
optional DFT ``spectrum`` used by the spectral linear solver; spectra exist
only for shift-invariant operators under periodic boundary conditions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

BOUNDARY_CONDITIONS = ("neumann", "periodic")


def _check_bc(bc):
    if bc not in BOUNDARY_CONDITIONS:
        raise ValueError(f"unknown boundary condition {bc!r}")


def grad(u, bc="neumann"):
    """Forward-difference gradient; returns array of shape (2, h, w).

    Component 0 differences along the width axis, component 1 along the
    height axis.  Neumann mode zeroes the last column/row difference.
    """
    _check_bc(bc)
    u = np.asarray(u, dtype=np.float64)
    g = np.zeros((2,) + u.shape)
    if bc == "neumann":
        g[0, :, :-1] = u[:, 1:] - u[:, :-1]
        g[1, :-1, :] = u[1:, :] - u[:-1, :]
    else:
        g[0] = np.roll(u, -1, axis=1) - u
        g[1] = np.roll(u, -1, axis=0) - u
    return g


def div(g, bc="neumann"):
    """Divergence, the exact -grad^T for the chosen boundary convention."""
    _check_bc(bc)
    g = np.asarray(g, dtype=np.float64)
    if bc == "neumann":
        d = np.zeros(g.shape[1:])
        d[:, 0] += g[0, :, 0]
        d[:, 1:-1] += g[0, :, 1:-1] - g[0, :, :-2]
        d[:, -1] += -g[0, :, -2]
        d[0, :] += g[1, 0, :]
        d[1:-1, :] += g[1, 1:-1, :] - g[1, :-2, :]
        d[-1, :] += -g[1, -2, :]
        return d
    return (g[0] - np.roll(g[0], 1, axis=1)
            + g[1] - np.roll(g[1], 1, axis=0))


def laplacian_symbol(shape):
    """DFT symbol of div @ div^T under periodic boundary conditions."""
    h, w = shape
    fy = 4.0 * np.sin(np.pi * np.fft.fftfreq(h)) ** 2
    fx = 4.0 * np.sin(np.pi * np.fft.fftfreq(w)) ** 2
    return fy[:, None] + fx[None, :]


@dataclass(frozen=True)
class BlurKernel:
    """Nonnegative 2-D taps summing to one, with a center anchor."""

    taps: np.ndarray
    anchor: tuple

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.float64)
        if taps.ndim != 2:
            raise ValueError("kernel taps must be 2-D")
        if np.any(taps < 0):
            raise ValueError("kernel taps must be nonnegative")
        if abs(taps.sum() - 1.0) > 1e-12:
            raise ValueError("kernel taps must sum to 1")
        ay, ax = self.anchor
        if not (0 <= ay < taps.shape[0] and 0 <= ax < taps.shape[1]):
            raise ValueError("anchor outside kernel support")
        taps.flags.writeable = False
        object.__setattr__(self, "taps", taps)
        object.__setattr__(self, "anchor", (int(ay), int(ax)))

    @property
    def shape(self):
        return self.taps.shape


@dataclass(frozen=True)
class PixelMask:
    """Binary grid; 1 = observed pixel, 0 = missing."""

    keep: np.ndarray

    def __post_init__(self):
        keep = np.asarray(self.keep, dtype=np.float64)
        if keep.ndim != 2:
            raise ValueError("mask must be 2-D")
        if not np.all((keep == 0.0) | (keep == 1.0)):
            raise ValueError("mask entries must be exactly 0 or 1")
        keep.flags.writeable = False
        object.__setattr__(self, "keep", keep)

    @property
    def shape(self):
        return self.keep.shape


class LinearOp:
    """Abstract linear map with apply/adjoint between fixed shapes."""

    in_shape = None
    out_shape = None
    kind = "abstract"

    def apply(self, x):
        raise NotImplementedError

    def adjoint(self, y):
        raise NotImplementedError

    def spectrum(self):
        """DFT symbol if the op is periodic shift-invariant, else None."""
        return None

    def __call__(self, x):
        return self.apply(x)


class IdentityOp(LinearOp):
    kind = "identity"

    def __init__(self, shape):
        self.in_shape = tuple(shape)
        self.out_shape = tuple(shape)

    def apply(self, x):
        return np.array(x, dtype=np.float64)

    def adjoint(self, y):
        return np.array(y, dtype=np.float64)

    def spectrum(self):
        if len(self.in_shape) == 2:
            return np.ones(self.in_shape, dtype=np.complex128)
        return None


class GradOp(LinearOp):
    kind = "gradient"

    def __init__(self, shape, bc="neumann"):
        _check_bc(bc)
        self.in_shape = tuple(shape)
        self.out_shape = (2,) + tuple(shape)
        self.bc = bc

    def apply(self, x):
        return grad(x, self.bc)

    def adjoint(self, y):
        return -div(y, self.bc)


class DivOp(LinearOp):
    kind = "divergence"

    def __init__(self, shape, bc="neumann"):
        _check_bc(bc)
        self.in_shape = (2,) + tuple(shape)
        self.out_shape = tuple(shape)
        self.bc = bc

    def apply(self, g):
        return div(g, self.bc)

    def adjoint(self, u):
        return -grad(u, self.bc)


def _edge_fold(z, before, after, axis):
    # Adjoint of np.pad(..., mode="edge") along one axis.
    z = np.moveaxis(z, axis, 0)
    core = z[before:z.shape[0] - after].copy()
    if before:
        core[0] += z[:before].sum(axis=0)
    if after:
        core[-1] += z[z.shape[0] - after:].sum(axis=0)
    return np.moveaxis(core, 0, axis)


class ConvolveOp(LinearOp):
    """Shift-invariant filtering under periodic or replicate boundaries."""

    kind = "convolution"

    def __init__(self, shape, kernel, bc="periodic"):
        if bc not in ("periodic", "replicate"):
            raise ValueError(f"unsupported convolution boundary {bc!r}")
        if not isinstance(kernel, BlurKernel):
            raise TypeError("kernel must be a BlurKernel")
        shape = tuple(shape)
        kh, kw = kernel.shape
        if bc == "periodic" and (kh > shape[0] or kw > shape[1]):
            raise ValueError(
                f"kernel {kernel.shape} larger than image {shape} "
                "in periodic mode")
        self.in_shape = shape
        self.out_shape = shape
        self.kernel = kernel
        self.bc = bc
        if bc == "periodic":
            psf = np.zeros(shape)
            psf[:kh, :kw] = kernel.taps
            psf = np.roll(psf, (-kernel.anchor[0], -kernel.anchor[1]),
                          axis=(0, 1))
            self._otf = np.fft.fft2(psf)
        else:
            ay, ax = kernel.anchor
            self._pad = ((kh - 1 - ay, ay), (kw - 1 - ax, ax))

    def apply(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.bc == "periodic":
            return np.real(np.fft.ifft2(np.fft.fft2(x) * self._otf))
        xp = np.pad(x, self._pad, mode="edge")
        return fftconvolve(xp, self.kernel.taps, mode="valid")

    def adjoint(self, y):
        y = np.asarray(y, dtype=np.float64)
        if self.bc == "periodic":
            return np.real(np.fft.ifft2(np.fft.fft2(y) * np.conj(self._otf)))
        z = fftconvolve(y, self.kernel.taps[::-1, ::-1], mode="full")
        z = _edge_fold(z, *self._pad[0], axis=0)
        return _edge_fold(z, *self._pad[1], axis=1)

    def spectrum(self):
        return self._otf.copy() if self.bc == "periodic" else None


class MaskOp(LinearOp):
    """Pointwise binary mask; a self-adjoint idempotent projection."""

    kind = "mask"

    def __init__(self, mask):
        if not isinstance(mask, PixelMask):
            mask = PixelMask(mask)
        self.mask = mask
        self.in_shape = mask.shape
        self.out_shape = mask.shape

    def apply(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != self.in_shape:
            raise ValueError(
                f"mask shape {self.in_shape} does not match {x.shape}")
        return self.mask.keep * x

    adjoint = apply


class ComposedOp(LinearOp):
    kind = "composition"

    def __init__(self, outer, inner):
        if inner.out_shape != outer.in_shape:
            raise ValueError(
                f"cannot compose: inner out {inner.out_shape} "
                f"!= outer in {outer.in_shape}")
        self.outer = outer
        self.inner = inner
        self.in_shape = inner.in_shape
        self.out_shape = outer.out_shape

    def apply(self, x):
        return self.outer.apply(self.inner.apply(x))

    def adjoint(self, y):
        return self.inner.adjoint(self.outer.adjoint(y))

    def spectrum(self):
        so = self.outer.spectrum()
        si = self.inner.spectrum()
        if so is None or si is None:
            return None
        return so * si


class ScaledOp(LinearOp):
    kind = "scaled"

    def __init__(self, alpha, op):
        self.alpha = float(alpha)
        self.op = op
        self.in_shape = op.in_shape
        self.out_shape = op.out_shape

    def apply(self, x):
        return self.alpha * self.op.apply(x)

    def adjoint(self, y):
        return self.alpha * self.op.adjoint(y)

    def spectrum(self):
        s = self.op.spectrum()
        return None if s is None else self.alpha * s


def compose(outer, inner):
    """apply = outer o inner; adjoint = inner^T o outer^T."""
    return ComposedOp(outer, inner)


def apply_mask(img, mask):
    """Hadamard product of an image with a binary mask."""
    if not isinstance(mask, PixelMask):
        mask = PixelMask(mask)
    img = np.asarray(img, dtype=np.float64)
    if img.shape != mask.shape:
        raise ValueError(
            f"image shape {img.shape} does not match mask {mask.shape}")
    return mask.keep * img


def adjoint_check(op, trials=20, seed=0):
    """Max relative discrepancy of <op x, y> vs <x, op^T y> over trials."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=seed))
    worst = 0.0
    for _ in range(trials):
        x = rng.standard_normal(op.in_shape)
        y = rng.standard_normal(op.out_shape)
        lhs = float(np.vdot(op.apply(x), y))
        rhs = float(np.vdot(x, op.adjoint(y)))
        worst = max(worst, abs(lhs - rhs) / (1.0 + abs(lhs)))
    return worst


def operator_norm(op, iters=200, seed=0, tol=1e-6):
    """Largest singular value estimated by power iteration on op^T op."""
    if iters < 1:
        raise ValueError("iters must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=seed))
    x = rng.standard_normal(op.in_shape)
    x /= np.linalg.norm(x)
    sigma = 0.0
    for _ in range(iters):
        y = op.adjoint(op.apply(x))
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        new_sigma = np.sqrt(norm)
        x = y / norm
        if abs(new_sigma - sigma) <= tol * max(new_sigma, 1.0):
            return new_sigma
        sigma = new_sigma
    return sigma
