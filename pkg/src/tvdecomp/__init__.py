"""Cartoon-texture image decomposition and restoration via a dual ADMM."""

from .degrade import (add_gaussian_noise, bernoulli_mask, disk_kernel,
                      gaussian_kernel, synth_cartoon_texture)
from .image import Image, MultiImage, VectorField, clamp_to_unit, from_bytes
from .metrics import correlation, mse, normalize_texture, psnr
from .operators import (BlurKernel, ConvolveOp, DivOp, GradOp, IdentityOp,
                        LinearOp, MaskOp, PixelMask, adjoint_check,
                        apply_mask, compose, div, grad, operator_norm)
from .prox import (TvProxParams, conjugate_prox, l1_ball_project, snorm_prox,
                   snorm_value, tv_prox)
from .solver import (PRESETS, DecompositionResult, IterTrace, KktResidual,
                     ModelSpec, SolverParams, SolverState, build_normal_op,
                     dadmm_step, decompose, kkt_residuals, solve_u)

__version__ = "0.1.0"

__all__ = [
    "Image", "MultiImage", "VectorField", "from_bytes", "clamp_to_unit",
    "BlurKernel", "PixelMask", "LinearOp", "IdentityOp", "GradOp", "DivOp",
    "ConvolveOp", "MaskOp", "grad", "div", "compose", "apply_mask",
    "adjoint_check", "operator_norm",
    "TvProxParams", "tv_prox", "snorm_prox", "snorm_value",
    "l1_ball_project", "conjugate_prox",
    "ModelSpec", "SolverParams", "SolverState", "KktResidual", "IterTrace",
    "DecompositionResult", "PRESETS", "build_normal_op", "solve_u",
    "dadmm_step", "kkt_residuals", "decompose",
    "mse", "psnr", "correlation", "normalize_texture",
    "gaussian_kernel", "disk_kernel", "add_gaussian_noise", "bernoulli_mask",
    "synth_cartoon_texture",
]
