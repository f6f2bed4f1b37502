"""Offline oracle generation for the frozen test fixtures.

Produces two archives under tests/data/:

  fista_oracle.npz  - converged objective values of a long-run accelerated
                      proximal-gradient method on the primal model, one per
                      seeded 16x16 instance (3 seeds x s in {1,2,inf} x
                      degradation in {identity, blur, mask, blur+mask}),
                      together with the observed images and instance
                      parameters so the tests never have to re-derive them.

  prox_oracle.npz   - reference prox values computed by independent
                      numerical solvers: derivative-free minimization
                      (Powell) of the prox objective for the s-norm family,
                      and smoothed-gradient minimization (L-BFGS with
                      epsilon-continuation) for the TV prox.

Run from the repository root:

    python3 tools/gen_oracles.py [fista|prox|all]

This script is slow by design (the long-run oracle does 1e5 accelerated
iterations per instance); it is meant to be run once and the outputs
committed.  The tests only read the archives.
"""

import os
import sys
import time

import numpy as np
from scipy.optimize import minimize

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from tvdecomp.degrade import (add_gaussian_noise, bernoulli_mask,
                              gaussian_kernel, rng_from_seed,
                              synth_cartoon_texture)
from tvdecomp.operators import (ConvolveOp, IdentityOp, MaskOp, compose,
                                div, grad, operator_norm)
from tvdecomp.prox import TvProxParams, snorm_prox, snorm_value, tv_prox

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "tests", "data")

SHAPE = (16, 16)
TV_WEIGHT = 0.02
# The inf-norm couples all pixels through a single max, so its weight must
# be much larger than the per-pixel norms to constrain anything.
TEXTURE_WEIGHTS = {1.0: 0.01, 2.0: 0.01, np.inf: 0.5}
NOISE_VAR = 1e-4
SEEDS = (1, 2, 3)
S_VALUES = (1.0, 2.0, np.inf)
DEGRADATIONS = ("identity", "blur", "mask", "blur+mask")
FISTA_ITERS = 100_000


def build_instance(deg, seed):
    """Observed image, degradation operator, and raw arrays for one case."""
    clean, _, _ = synth_cartoon_texture(*SHAPE, stripe_period=4, seed=seed)
    kernel = gaussian_kernel(5, 1.0)
    keep = bernoulli_mask(SHAPE[0], SHAPE[1], 0.8, seed=100 + seed).keep
    if deg == "identity":
        op, bc = IdentityOp(SHAPE), "neumann"
    elif deg == "blur":
        op, bc = ConvolveOp(SHAPE, kernel, bc="periodic"), "periodic"
    elif deg == "mask":
        op, bc = MaskOp(keep), "neumann"
    else:
        op = compose(MaskOp(keep),
                     ConvolveOp(SHAPE, kernel, bc="replicate"))
        bc = "neumann"
    b = np.clip(op.apply(clean), 0.0, 1.0)
    b = add_gaussian_noise(b, 0.0, NOISE_VAR, seed=200 + seed)
    return b, op, bc, keep


def objective(op, b, x, y, s, bc):
    g = grad(x, bc)
    tv = float(np.hypot(g[0], g[1]).sum())
    resid = op.apply(x + div(y, bc)) - b
    return (TV_WEIGHT * tv + 0.5 * float((resid ** 2).sum())
            + TEXTURE_WEIGHTS[s] * snorm_value(y, s))


def fista_oracle(op, b, s, bc, iters=FISTA_ITERS):
    """Accelerated proximal gradient on the primal model.

    Smooth part f(x, y) = 1/2 ||H(x + div y) - b||^2 with gradient
    (H^T r, -grad(H^T r)); nonsmooth part separates into the TV prox on x
    and the s-norm prox on y.  The TV prox dual is warm-started across
    iterations so late steps cost only a few inner sweeps.
    """
    # Lipschitz bound of the smooth gradient: ||H||^2 (1 + ||div||^2).
    lip = operator_norm(op) ** 2 * 9.0
    step = 1.0 / lip
    # Warm-started inner prox: late outer steps are tiny, so the dual
    # projection exits after a handful of sweeps at this tolerance.
    tv_params = TvProxParams(weight=step * TV_WEIGHT,
                             max_inner_iters=200, inner_tol=1e-7)
    x = np.zeros(SHAPE)
    y = np.zeros((2,) + SHAPE)
    zx, zy = x, y
    t = 1.0
    tv_dual = None
    for _ in range(iters):
        resid = op.apply(zx + div(zy, bc)) - b
        ht_r = op.adjoint(resid)
        x_new, tv_dual = tv_prox(zx - step * ht_r, tv_params, bc=bc,
                                 init_dual=tv_dual, return_dual=True)
        y_new = snorm_prox(zy + step * grad(ht_r, bc),
                           step * TEXTURE_WEIGHTS[s], s)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        zx = x_new + ((t - 1.0) / t_new) * (x_new - x)
        zy = y_new + ((t - 1.0) / t_new) * (y_new - y)
        x, y, t = x_new, y_new, t_new
    return x, y, objective(op, b, x, y, s, bc)


def gen_fista():
    out = {}
    for deg_idx, deg in enumerate(DEGRADATIONS):
        for seed in SEEDS:
            b, op, bc, keep = build_instance(deg, seed)
            for s in S_VALUES:
                key = f"{deg_idx}_{seed}_{'inf' if np.isinf(s) else int(s)}"
                t0 = time.time()
                _, _, obj = fista_oracle(op, b, s, bc)
                print(f"{deg:10s} seed={seed} s={s}: obj={obj:.12f} "
                      f"({time.time() - t0:.0f}s)", flush=True)
                out["obj_" + key] = obj
            out[f"observed_{deg_idx}_{seed}"] = b
            out[f"mask_{seed}"] = keep
    out["tv_weight"] = TV_WEIGHT
    for s in S_VALUES:
        tag = "inf" if np.isinf(s) else str(int(s))
        out["texture_weight_" + tag] = TEXTURE_WEIGHTS[s]
    out["kernel_hsize"] = 5
    out["kernel_sigma"] = 1.0
    out["fista_iters"] = FISTA_ITERS
    np.savez(os.path.join(DATA_DIR, "fista_oracle.npz"), **out)
    print("wrote fista_oracle.npz")


def snorm_prox_objective(flat, g, sigma, s):
    y = flat.reshape(g.shape)
    return sigma * snorm_value(y, s) + 0.5 * float(((y - g) ** 2).sum())


def _snorm_oracle_s1(g, sigma):
    # The s=1 prox separates per pixel into a 2-D strongly convex problem;
    # brute-force each with Nelder-Mead from several starts.
    out = np.empty_like(g)
    for idx in np.ndindex(g.shape[1:]):
        target = np.array([g[0][idx], g[1][idx]])

        def obj(p):
            return (sigma * np.hypot(p[0], p[1])
                    + 0.5 * ((p - target) ** 2).sum())

        best = None
        for start in (target, np.zeros(2), 0.5 * target):
            res = minimize(obj, start, method="Nelder-Mead",
                           options={"xatol": 1e-13, "fatol": 1e-16,
                                    "maxiter": 20000, "maxfev": 20000})
            if best is None or res.fun < best.fun:
                best = res
        out[0][idx], out[1][idx] = best.x
    return out


def _snorm_oracle_sinf(g, sigma):
    # Optimality for the s=inf prox caps every pixel magnitude at a common
    # threshold t with sum(max(|g|_i - t, 0)) = sigma (when the sum of
    # magnitudes exceeds sigma); find t by scalar root bracketing.
    from scipy.optimize import brentq

    mag = np.hypot(g[0], g[1])
    if mag.sum() <= sigma:
        return np.zeros_like(g)

    def excess(t):
        return np.maximum(mag - t, 0.0).sum() - sigma

    t_star = brentq(excess, 0.0, mag.max(), xtol=1e-15, rtol=1e-15)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(mag > 0.0, np.minimum(mag, t_star) / mag, 0.0)
    return g * scale


def snorm_oracle(g, sigma, s):
    """Independent numerical solution of the s-norm prox (brute force)."""
    if s == 1:
        return _snorm_oracle_s1(g, sigma)
    if np.isinf(s):
        return _snorm_oracle_sinf(g, sigma)
    best = None
    for start in (g, np.zeros_like(g), 0.5 * g):
        res = minimize(snorm_prox_objective, start.ravel(),
                       args=(g, sigma, s), method="Powell",
                       options={"xtol": 1e-12, "ftol": 1e-14,
                                "maxiter": 200000, "maxfev": 2000000})
        if best is None or res.fun < best.fun:
            best = res
    return best.x.reshape(g.shape)


def tv_oracle(y, weight, bc="neumann"):
    """Smoothed-gradient minimization of the TV prox objective.

    Replaces |grad x| by sqrt(|grad x|^2 + eps^2) and follows the smooth
    optimum as eps -> 0; the smoothed minimizer is within O(eps * npixels)
    of the true prox, far below the 1e-4 relative gate it certifies.
    """
    shape = y.shape

    def fg(flat, eps):
        x = flat.reshape(shape)
        g = grad(x, bc)
        mag = np.sqrt(g[0] ** 2 + g[1] ** 2 + eps * eps)
        val = weight * float(mag.sum()) + 0.5 * float(((x - y) ** 2).sum())
        gx = weight * (-div(g / mag, bc)) + (x - y)
        return val, gx.ravel()

    x = y.ravel().copy()
    for eps in (1e-2, 1e-4, 1e-6, 1e-8):
        res = minimize(fg, x, args=(eps,), jac=True, method="L-BFGS-B",
                       options={"maxiter": 20000, "ftol": 1e-16,
                                "gtol": 1e-12})
        x = res.x
    return x.reshape(shape)


def gen_prox():
    out = {}
    rng = rng_from_seed(11)
    fields = rng.normal(0.0, 1.0, size=(50, 2, 2, 4))
    sigmas = 10.0 ** rng.uniform(-1.5, 0.5, size=50)
    out["fields"] = fields
    out["sigmas"] = sigmas
    for s in S_VALUES:
        tag = "inf" if np.isinf(s) else str(int(s))
        refs = np.empty_like(fields)
        for i in range(fields.shape[0]):
            refs[i] = snorm_oracle(fields[i], float(sigmas[i]), s)
        out["snorm_ref_" + tag] = refs
        print(f"snorm oracle s={tag} done", flush=True)

    tv_rng = rng_from_seed(12)
    tv_images = tv_rng.normal(0.5, 0.25, size=(5, 8, 8))
    tv_weights = np.array([0.02, 0.05, 0.1, 0.2, 0.5])
    tv_refs = np.empty_like(tv_images)
    for i in range(5):
        tv_refs[i] = tv_oracle(tv_images[i], float(tv_weights[i]))
        print(f"tv oracle {i} done", flush=True)
    out["tv_images"] = tv_images
    out["tv_weights"] = tv_weights
    out["tv_refs"] = tv_refs
    np.savez(os.path.join(DATA_DIR, "prox_oracle.npz"), **out)
    print("wrote prox_oracle.npz")


if __name__ == "__main__":
    which = sys.argv[1] if len(sys.argv) > 1 else "all"
    if which in ("prox", "all"):
        gen_prox()
    if which in ("fista", "all"):
        gen_fista()
