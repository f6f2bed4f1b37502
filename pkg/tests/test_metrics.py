import math

import numpy as np
import pytest

from tvdecomp.metrics import correlation, mse, normalize_texture, psnr


def test_mse_basic():
    a = np.zeros((2, 2))
    b = np.full((2, 2), 0.5)
    assert mse(a, a) == 0.0
    assert mse(a, b) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        mse(a, np.zeros((3, 3)))


def test_psnr_values():
    a = np.zeros((4, 4))
    b = np.full((4, 4), 0.1)
    assert psnr(a, b) == pytest.approx(20.0)
    assert psnr(a, a) == math.inf
    assert psnr(a, b, i_max=0.1) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        psnr(a, b, i_max=0.0)


def test_correlation_values():
    x = np.arange(16, dtype=np.float64).reshape(4, 4)
    assert correlation(x, 2.0 * x + 1.0) == pytest.approx(1.0)
    assert correlation(x, -x) == pytest.approx(-1.0)
    y = np.zeros((4, 4))
    y[::2, :] = 1.0
    assert abs(correlation(x, y)) < 1.0


def test_correlation_rejects_constant_input():
    x = np.arange(4.0).reshape(2, 2)
    with pytest.raises(ValueError, match="first"):
        correlation(np.ones((2, 2)), x)
    with pytest.raises(ValueError, match="second"):
        correlation(x, np.ones((2, 2)))


def test_correlation_clamped_to_unit_interval():
    rng = np.random.default_rng(0)
    for _ in range(10):
        a = rng.random((3, 3))
        assert -1.0 <= correlation(a, rng.random((3, 3))) <= 1.0


def test_normalize_texture():
    v = np.array([[-0.2, 0.0], [0.2, 0.1]])
    out = normalize_texture(v)
    assert out.min() == 0.0 and out.max() == 1.0
    np.testing.assert_allclose(out[0, 1], 0.5)
    np.testing.assert_array_equal(normalize_texture(np.full((3, 3), 7.0)),
                                  0.5)
    with pytest.raises(ValueError):
        normalize_texture(np.array([[np.nan]]))
