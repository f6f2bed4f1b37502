import numpy as np
import pytest

from tvdecomp.degrade import bernoulli_mask, disk_kernel, gaussian_kernel
from tvdecomp.operators import (BlurKernel, ConvolveOp, DivOp, GradOp,
                                IdentityOp, MaskOp, PixelMask, ScaledOp,
                                adjoint_check, apply_mask, compose, div, grad,
                                laplacian_symbol, operator_norm)


def _dense_matrix(apply_fn, in_shape, out_shape):
    n = int(np.prod(in_shape))
    m = int(np.prod(out_shape))
    mat = np.zeros((m, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        mat[:, j] = apply_fn(e.reshape(in_shape)).ravel()
    return mat


@pytest.mark.parametrize("bc", ["neumann", "periodic"])
def test_div_is_negative_grad_transpose(bc):
    shape = (5, 4)
    gmat = _dense_matrix(lambda u: grad(u, bc), shape, (2,) + shape)
    dmat = _dense_matrix(lambda g: div(g, bc), (2,) + shape, shape)
    np.testing.assert_allclose(dmat, -gmat.T, atol=1e-14)


def test_grad_constant_is_zero():
    for bc in ("neumann", "periodic"):
        np.testing.assert_array_equal(grad(np.full((6, 7), 3.2), bc), 0.0)


def test_grad_periodic_wraps():
    u = np.arange(4.0)[None, :].repeat(3, axis=0)
    g = grad(u, "periodic")
    assert g[0, 0, -1] == u[0, 0] - u[0, -1]


def test_grad_neumann_zero_boundary_difference():
    rng = np.random.default_rng(0)
    g = grad(rng.random((6, 5)), "neumann")
    np.testing.assert_array_equal(g[0][:, -1], 0.0)
    np.testing.assert_array_equal(g[1][-1, :], 0.0)


def test_unknown_bc_rejected():
    with pytest.raises(ValueError):
        grad(np.zeros((3, 3)), "mirror")
    with pytest.raises(ValueError):
        div(np.zeros((2, 3, 3)), "mirror")


def test_laplacian_symbol_matches_dense_operator():
    shape = (6, 5)
    lap = _dense_matrix(lambda u: div(grad(u, "periodic"), "periodic"),
                        shape, shape)
    eigs = np.sort(np.linalg.eigvalsh(-lap))
    np.testing.assert_allclose(np.sort(laplacian_symbol(shape).ravel()),
                               eigs, atol=1e-12)


def test_blur_kernel_validation():
    with pytest.raises(ValueError):
        BlurKernel(taps=np.array([0.5, 0.5]), anchor=(0, 0))
    with pytest.raises(ValueError):
        BlurKernel(taps=np.array([[0.7, 0.5]]), anchor=(0, 0))
    with pytest.raises(ValueError):
        BlurKernel(taps=np.array([[-0.5, 1.5]]), anchor=(0, 0))
    with pytest.raises(ValueError):
        BlurKernel(taps=np.array([[1.0]]), anchor=(0, 1))


def test_pixel_mask_validation():
    with pytest.raises(ValueError):
        PixelMask(keep=np.array([[0.5]]))
    mask = PixelMask(keep=np.eye(3))
    assert mask.shape == (3, 3)


@pytest.mark.parametrize("op_name", [
    "grad", "div", "conv_periodic", "conv_replicate", "conv_even",
    "mask", "mask_after_blur", "scaled",
])
def test_adjoints_exact(op_name):
    shape = (13, 11)
    kernel = gaussian_kernel(5, 1.3)
    ops = {
        "grad": GradOp(shape, "neumann"),
        "div": DivOp(shape, "periodic"),
        "conv_periodic": ConvolveOp(shape, kernel, bc="periodic"),
        "conv_replicate": ConvolveOp(shape, kernel, bc="replicate"),
        "conv_even": ConvolveOp(shape, gaussian_kernel(4, 0.9),
                                bc="replicate"),
        "mask": MaskOp(bernoulli_mask(*shape, 0.7, seed=3)),
        "mask_after_blur": compose(
            MaskOp(bernoulli_mask(*shape, 0.7, seed=3)),
            ConvolveOp(shape, kernel, bc="replicate")),
        "scaled": ScaledOp(-2.5, GradOp(shape, "periodic")),
    }
    assert adjoint_check(ops[op_name], trials=20, seed=0) <= 1e-12


def test_identity_and_delta_kernel():
    shape = (8, 9)
    delta = BlurKernel(taps=np.array([[1.0]]), anchor=(0, 0))
    x = np.random.default_rng(1).random(shape)
    for bc in ("periodic", "replicate"):
        np.testing.assert_allclose(ConvolveOp(shape, delta, bc=bc).apply(x),
                                   x, atol=1e-12)
    np.testing.assert_array_equal(IdentityOp(shape).apply(x), x)


def test_periodic_convolution_matches_roll_sum():
    shape = (7, 6)
    kernel = gaussian_kernel(3, 0.8)
    x = np.random.default_rng(2).random(shape)
    ay, ax = kernel.anchor
    expected = np.zeros(shape)
    for i in range(3):
        for j in range(3):
            expected += kernel.taps[i, j] * np.roll(x, (i - ay, j - ax),
                                                    axis=(0, 1))
    got = ConvolveOp(shape, kernel, bc="periodic").apply(x)
    np.testing.assert_allclose(got, expected, atol=1e-12)


def test_replicate_convolution_matches_padded_direct():
    shape = (6, 6)
    kernel = gaussian_kernel(3, 1.0)
    x = np.random.default_rng(3).random(shape)
    xp = np.pad(x, 1, mode="edge")
    expected = np.zeros(shape)
    for i in range(3):
        for j in range(3):
            expected += kernel.taps[i, j] * xp[i:i + 6, j:j + 6]
    got = ConvolveOp(shape, kernel, bc="replicate").apply(x)
    np.testing.assert_allclose(got, expected, atol=1e-12)


def test_convolve_rejects_oversized_periodic_kernel():
    with pytest.raises(ValueError):
        ConvolveOp((3, 3), gaussian_kernel(5, 1.0), bc="periodic")
    with pytest.raises(ValueError):
        ConvolveOp((8, 8), gaussian_kernel(3, 1.0), bc="mirror")
    with pytest.raises(TypeError):
        ConvolveOp((8, 8), np.ones((3, 3)) / 9.0)


def test_convolution_spectrum_consistent_with_apply():
    shape = (8, 8)
    op = ConvolveOp(shape, disk_kernel(2.0), bc="periodic")
    x = np.random.default_rng(4).random(shape)
    via_spectrum = np.real(np.fft.ifft2(np.fft.fft2(x) * op.spectrum()))
    np.testing.assert_allclose(op.apply(x), via_spectrum, atol=1e-12)
    assert ConvolveOp(shape, disk_kernel(2.0), bc="replicate").spectrum() \
        is None


def test_mask_op_is_idempotent_projection():
    mask = bernoulli_mask(9, 9, 0.6, seed=8)
    op = MaskOp(mask)
    x = np.random.default_rng(5).random((9, 9))
    once = op.apply(x)
    np.testing.assert_array_equal(op.apply(once), once)
    np.testing.assert_array_equal(op.adjoint(x), op.apply(x))
    np.testing.assert_array_equal(apply_mask(x, mask), once)
    with pytest.raises(ValueError):
        op.apply(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        apply_mask(np.zeros((3, 3)), mask)


def test_compose_shape_mismatch():
    with pytest.raises(ValueError):
        compose(IdentityOp((4, 4)), GradOp((4, 4)))


def test_composition_spectrum_multiplies():
    shape = (8, 8)
    k1 = gaussian_kernel(3, 0.9)
    k2 = disk_kernel(1.5)
    a = ConvolveOp(shape, k1, bc="periodic")
    b = ConvolveOp(shape, k2, bc="periodic")
    np.testing.assert_allclose(compose(a, b).spectrum(),
                               a.spectrum() * b.spectrum(), atol=1e-12)


def test_operator_norms():
    assert operator_norm(IdentityOp((12, 12))) == pytest.approx(1.0, abs=1e-6)
    # ||grad|| -> sqrt(8) as the grid grows; bounded above by it always.
    norm = operator_norm(GradOp((32, 32), "periodic"))
    assert norm <= np.sqrt(8.0) + 1e-9
    assert norm > 2.7
    kernel = gaussian_kernel(5, 1.0)
    op = ConvolveOp((16, 16), kernel, bc="periodic")
    expected = np.abs(op.spectrum()).max()
    assert operator_norm(op) == pytest.approx(expected, rel=1e-4)


def test_validation_of_check_helpers():
    with pytest.raises(ValueError):
        adjoint_check(IdentityOp((2, 2)), trials=0)
    with pytest.raises(ValueError):
        operator_norm(IdentityOp((2, 2)), iters=0)
