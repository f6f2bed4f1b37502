"""ADMM on the dual of the cartoon-texture restoration model.

The primal model decomposes an observed image b into a cartoon x and a
texture div(y) through

    min_{x, y}  tv_weight * ||grad x||_{iso,1}
                + 1/2 ||H(x + div y) - b||^2
                + texture_weight * || |y| ||_s,

with H the degradation (identity, blur, mask, or blur-then-mask).  The
iteration runs on the dual: a linear solve for u against
I + penalty * (A A^T + B B^T) with A = H and B = H o div, conjugate proxes
for the slack blocks (v, w), and relaxed multiplier steps on (x, y).  The
multipliers are exactly the primal pair, so the cartoon and texture fall
out of the dual iteration for free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .operators import (ComposedOp, DivOp, LinearOp, MaskOp,
                        compose, div, grad, laplacian_symbol, operator_norm)
from .prox import TvProxParams, as_snorm, snorm_prox, snorm_value, tv_prox

STEP_LENGTH_SUP = (1.0 + math.sqrt(5.0)) / 2.0

#: Per-degradation defaults: (tv_weight, texture_weight, penalty).
PRESETS = {
    "case1": {"tv_weight": 1e-1, "texture_weight": 3e-2, "penalty": 0.8},
    "case2": {"tv_weight": 8e-6, "texture_weight": 4e-4, "penalty": 2e2},
    "case3": {"tv_weight": 4e-3, "texture_weight": 1e-3, "penalty": 3e3},
    "case4": {"tv_weight": 5e-3, "texture_weight": 3e-3, "penalty": 3e3},
}


@dataclass(frozen=True)
class ModelSpec:
    """The problem instance: degradation H, data b, weights, texture norm."""

    degradation: LinearOp
    observed: np.ndarray
    tv_weight: float
    texture_weight: float
    texture_norm: object = 1
    bc: str = "neumann"

    def __post_init__(self):
        if self.tv_weight <= 0:
            raise ValueError(f"tv_weight must be positive: {self.tv_weight}")
        if self.texture_weight <= 0:
            raise ValueError(
                f"texture_weight must be positive: {self.texture_weight}")
        b = np.asarray(self.observed, dtype=np.float64)
        if not np.all(np.isfinite(b)):
            raise ValueError("observed image contains non-finite values")
        if b.shape != tuple(self.degradation.out_shape):
            raise ValueError(
                f"observed shape {b.shape} does not match degradation "
                f"output {self.degradation.out_shape}")
        object.__setattr__(self, "observed", b)
        object.__setattr__(self, "texture_norm", as_snorm(self.texture_norm))

    @property
    def shape(self):
        return self.observed.shape

    def op_a(self):
        return self.degradation

    def op_b(self):
        return compose(self.degradation, DivOp(self.shape, self.bc))

    def primal_objective(self, x, y):
        """The model objective at cartoon x and texture potential y."""
        g = grad(x, self.bc)
        tv = float(np.hypot(g[0], g[1]).sum())
        resid = self.degradation.apply(x + div(y, self.bc)) - self.observed
        return (self.tv_weight * tv
                + 0.5 * float((resid ** 2).sum())
                + self.texture_weight * snorm_value(y, self.texture_norm))


@dataclass(frozen=True)
class SolverParams:
    penalty: float
    step_length: float = 1.618
    max_iters: int = 70
    tol: float = 1e-3
    linear_solver: str = "auto"  # auto | spectral | cg
    cg_tol: float = 1e-10
    cg_max_iters: int = 500
    tv_max_inner_iters: int = 200
    tv_inner_tol: float = 1e-6
    tv_inner_step: float = 0.125

    def __post_init__(self):
        if self.penalty <= 0:
            raise ValueError(f"penalty must be positive: {self.penalty}")
        if not 0.0 < self.step_length < STEP_LENGTH_SUP:
            raise ValueError(
                f"step_length must lie in (0, {STEP_LENGTH_SUP:.6f}), "
                f"got {self.step_length}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.linear_solver not in ("auto", "spectral", "cg"):
            raise ValueError(f"unknown linear_solver {self.linear_solver!r}")

    def tv_params(self, weight):
        return TvProxParams(weight=weight,
                            max_inner_iters=self.tv_max_inner_iters,
                            inner_tol=self.tv_inner_tol,
                            inner_step=self.tv_inner_step)


@dataclass(frozen=True)
class SolverState:
    """The quintuple (u, v, w, x, y); (x, y) is the primal pair."""

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    x: np.ndarray
    y: np.ndarray
    iter: int = 0

    def is_finite(self):
        return all(np.all(np.isfinite(a))
                   for a in (self.u, self.v, self.w, self.x, self.y))

    @classmethod
    def zeros(cls, shape):
        shape = tuple(shape)
        return cls(u=np.zeros(shape), v=np.zeros(shape),
                   w=np.zeros((2,) + shape), x=np.zeros(shape),
                   y=np.zeros((2,) + shape), iter=0)


@dataclass(frozen=True)
class KktResidual:
    r_p: float
    r_d: float
    r_c: float

    @property
    def tol(self):
        return max(self.r_p, self.r_d, self.r_c)


@dataclass
class IterTrace:
    iter: int
    r_p: float
    r_d: float
    r_c: float
    tol: float
    primal_objective: float
    psnr_vs_reference: float | None = None
    corr_uv: float | None = None


@dataclass
class DecompositionResult:
    cartoon: np.ndarray
    texture_potential: np.ndarray
    texture: np.ndarray
    restored: np.ndarray
    trace: list = field(default_factory=list)
    iterations: int = 0
    residual: KktResidual | None = None


class _NormalOp(LinearOp):
    """M = I + penalty * (A A^T + B B^T); self-adjoint, eigenvalues >= 1."""

    kind = "composition"

    def __init__(self, spec, penalty):
        self.a = spec.op_a()
        self.b = spec.op_b()
        self.penalty = float(penalty)
        self.in_shape = spec.shape
        self.out_shape = spec.shape
        sa = self.a.spectrum()
        if sa is not None and spec.bc == "periodic":
            gain = np.abs(sa) ** 2
            self._symbol = 1.0 + self.penalty * gain * (
                1.0 + laplacian_symbol(spec.shape))
        else:
            self._symbol = None

    def apply(self, x):
        out = np.asarray(x, dtype=np.float64).copy()
        if self.penalty != 0.0:
            out += self.penalty * self.a.apply(self.a.adjoint(x))
            out += self.penalty * self.b.apply(self.b.adjoint(x))
        return out

    adjoint = apply

    def spectrum(self):
        return None if self._symbol is None else self._symbol.astype(
            np.complex128)

    @property
    def symbol(self):
        return self._symbol


def build_normal_op(spec, penalty):
    """The u-subproblem operator I + penalty (A A^T + B B^T)."""
    if penalty < 0:
        raise ValueError(f"penalty must be nonnegative, got {penalty}")
    return _NormalOp(spec, penalty)


def _shift_invariant_symbol(op, shape):
    # Symbol of the convolutional part of H, with masks dropped; used only
    # to precondition CG, so the approximation is harmless.
    if isinstance(op, MaskOp):
        return np.ones(shape, dtype=np.complex128)
    if isinstance(op, ComposedOp):
        so = _shift_invariant_symbol(op.outer, shape)
        si = _shift_invariant_symbol(op.inner, shape)
        if so is None or si is None:
            return None
        return so * si
    return op.spectrum()


def _preconditioner_symbol(spec, penalty):
    sa = _shift_invariant_symbol(spec.degradation, spec.shape)
    if sa is None:
        return None
    gain = np.abs(sa) ** 2
    return 1.0 + penalty * gain * (1.0 + laplacian_symbol(spec.shape))


def solve_u(spec, params, state, warm=None, normal_op=None):
    """Solve M u = A x + B y - b - penalty (A v + B w) for the dual u."""
    a = spec.op_a()
    b_op = spec.op_b()
    sigma = params.penalty
    if normal_op is None:
        normal_op = build_normal_op(spec, sigma)
    rhs = (a.apply(state.x) + b_op.apply(state.y) - spec.observed
           - sigma * a.apply(state.v) - sigma * b_op.apply(state.w))

    mode = params.linear_solver
    if mode == "auto":
        mode = "spectral" if normal_op.symbol is not None else "cg"
    if mode == "spectral":
        if normal_op.symbol is None:
            raise ValueError(
                "spectral solve needs a shift-invariant degradation and "
                "periodic boundary conditions; use linear_solver='cg'")
        return np.real(np.fft.ifft2(np.fft.fft2(rhs) / normal_op.symbol))

    shape = spec.shape
    n = rhs.size
    mat = LinearOperator(
        (n, n), matvec=lambda z: normal_op.apply(z.reshape(shape)).ravel())
    pre_symbol = _preconditioner_symbol(spec, sigma)
    precond = None
    if pre_symbol is not None:
        precond = LinearOperator(
            (n, n),
            matvec=lambda z: np.real(np.fft.ifft2(
                np.fft.fft2(z.reshape(shape)) / pre_symbol)).ravel())
    x0 = None if warm is None else np.asarray(warm).ravel()
    u, info = cg(mat, rhs.ravel(), x0=x0, rtol=params.cg_tol, atol=0.0,
                 maxiter=params.cg_max_iters, M=precond)
    if info != 0:
        resid = np.linalg.norm(mat.matvec(u) - rhs.ravel())
        raise RuntimeError(
            f"CG failed to converge within {params.cg_max_iters} iterations "
            f"(residual {resid:.3e})")
    return u.reshape(shape)


def kkt_residuals(spec, state, scale=None, tv_params=None, warm=None):
    """The (R_P, R_D, R_C) triple; conjugate proxes at unit parameter."""
    a = spec.op_a()
    b_op = spec.op_b()
    if scale is None:
        scale = operator_norm(a)
    denom = 1.0 + scale
    if tv_params is None:
        tv_params = TvProxParams(weight=spec.tv_weight)
    else:
        tv_params = replace(tv_params, weight=spec.tv_weight)

    r_p = np.linalg.norm(
        state.u + spec.observed - a.apply(state.x) - b_op.apply(state.y))
    at_u = a.adjoint(state.u)
    bt_u = b_op.adjoint(state.u)
    r_d = (np.linalg.norm(at_u + state.v) + np.linalg.norm(bt_u + state.w))
    # Prox_{p*}(z) = z - Prox_p(z) via the Moreau identity at sigma = 1.
    zv = state.v + state.x
    warm = warm if warm is not None else {}
    prox_p, rc_dual = tv_prox(zv, tv_params, bc=spec.bc,
                              init_dual=warm.get("rc_tv_dual"),
                              return_dual=True)
    warm["rc_tv_dual"] = rc_dual
    prox_p_star = zv - prox_p
    zw = state.w + state.y
    prox_q_star = zw - snorm_prox(zw, spec.texture_weight, spec.texture_norm)
    r_c = (np.linalg.norm(state.v - prox_p_star)
           + np.linalg.norm(state.w - prox_q_star))
    return KktResidual(r_p=float(r_p) / denom, r_d=float(r_d) / denom,
                       r_c=float(r_c) / denom)


def dadmm_step(spec, params, state, scale=None, warm=None, normal_op=None):
    """One full iteration; returns the new state and its KKT residuals.

    ``warm`` optionally carries inner-solver starting points ({"u": ...,
    "tv_dual": ...}) between iterations; it is updated in place.
    """
    sigma = params.penalty
    warm = warm if warm is not None else {}
    u = solve_u(spec, params, state, warm=warm.get("u"), normal_op=normal_op)
    warm["u"] = u

    a = spec.op_a()
    b_op = spec.op_b()
    at_u = a.adjoint(u)
    bt_u = b_op.adjoint(u)

    # v = Prox_{p*/sigma}(x/sigma - A^T u) through the Moreau form.
    zv = state.x - sigma * at_u
    prox_p, tv_dual = tv_prox(zv, params.tv_params(sigma * spec.tv_weight),
                              bc=spec.bc, init_dual=warm.get("tv_dual"),
                              return_dual=True)
    warm["tv_dual"] = tv_dual
    v = (zv - prox_p) / sigma
    zw = state.y - sigma * bt_u
    w = (zw - snorm_prox(zw, sigma * spec.texture_weight,
                         spec.texture_norm)) / sigma

    step = params.step_length * sigma
    x = state.x + step * (-at_u - v)
    y = state.y + step * (-bt_u - w)
    new_state = SolverState(u=u, v=v, w=w, x=x, y=y, iter=state.iter + 1)
    residual = kkt_residuals(spec, new_state, scale=scale,
                             tv_params=params.tv_params(1.0), warm=warm)
    return new_state, residual


def decompose(spec, params, initial=None, sink=None, reference=None):
    """Run the dual ADMM until Tol <= params.tol or max_iters is reached.

    ``sink`` is called once per iteration with an IterTrace row;
    ``reference`` (a ground-truth image) enables the per-iteration PSNR
    column.
    """
    from .metrics import correlation, psnr  # local: avoid import cycle

    state = initial if initial is not None else SolverState.zeros(spec.shape)
    normal_op = build_normal_op(spec, params.penalty)
    scale = operator_norm(spec.op_a())
    warm = {}
    trace = []
    residual = None
    for _ in range(params.max_iters):
        state, residual = dadmm_step(spec, params, state, scale=scale,
                                     warm=warm, normal_op=normal_op)
        if not state.is_finite():
            raise RuntimeError(
                f"solver diverged: non-finite iterate at iteration "
                f"{state.iter}")
        texture = div(state.y, spec.bc)
        row = IterTrace(iter=state.iter, r_p=residual.r_p, r_d=residual.r_d,
                        r_c=residual.r_c, tol=residual.tol,
                        primal_objective=spec.primal_objective(state.x,
                                                               state.y))
        if reference is not None:
            row.psnr_vs_reference = psnr(reference, state.x + texture)
        try:
            row.corr_uv = correlation(state.x, texture)
        except ValueError:
            row.corr_uv = None
        trace.append(row)
        if sink is not None:
            sink(row)
        if residual.tol <= params.tol:
            break

    texture = div(state.y, spec.bc)
    restored = np.clip(state.x + texture, 0.0, 1.0)
    return DecompositionResult(cartoon=state.x, texture_potential=state.y,
                               texture=texture, restored=restored,
                               trace=trace, iterations=state.iter,
                               residual=residual)
