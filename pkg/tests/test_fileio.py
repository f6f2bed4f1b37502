import io

import numpy as np
import pytest

from tvdecomp.fileio import (TRACE_HEADER, quantize, read_image, read_trace,
                             write_image, write_trace)
from tvdecomp.image import Image, MultiImage
from tvdecomp.solver import IterTrace


def test_quantize_rounds_half_up():
    plane = np.array([[0.0, 1.0, 0.5, -0.2, 1.7]])
    got = quantize(plane)
    np.testing.assert_array_equal(got, [[0, 255, 128, 0, 255]])
    assert got.dtype == np.uint8


def test_pgm_round_trip_is_byte_identical(tmp_path):
    rng = np.random.default_rng(0)
    img = Image(rng.random((9, 7)))
    p1 = tmp_path / "a.pgm"
    p2 = tmp_path / "b.pgm"
    write_image(img, str(p1))
    write_image(read_image(str(p1)), str(p2))
    assert p1.read_bytes() == p2.read_bytes()
    assert p1.read_bytes().startswith(b"P5\n7 9\n255\n")


def test_ppm_round_trip_is_byte_identical(tmp_path):
    rng = np.random.default_rng(1)
    multi = MultiImage(tuple(Image(rng.random((5, 6))) for _ in range(3)))
    p1 = tmp_path / "a.ppm"
    p2 = tmp_path / "b.ppm"
    write_image(multi, str(p1))
    back = read_image(str(p1))
    assert len(back.channels) == 3
    write_image(back, str(p2))
    assert p1.read_bytes() == p2.read_bytes()


def test_png_round_trip_preserves_pixels(tmp_path):
    rng = np.random.default_rng(2)
    img = Image(rng.random((8, 8)))
    path = tmp_path / "a.png"
    write_image(img, str(path))
    back = read_image(str(path))
    np.testing.assert_array_equal(quantize(back.channels[0].data),
                                  quantize(img.data))


def test_pnm_header_comments_and_whitespace(tmp_path):
    payload = bytes(range(6))
    raw = b"P5 # magic\n# a comment line\n 3\t2 # dims\n255\n" + payload
    path = tmp_path / "c.pgm"
    path.write_bytes(raw)
    img = read_image(str(path))
    assert img.height == 2 and img.width == 3
    np.testing.assert_allclose(img.channels[0].data * 255.0,
                               [[0, 1, 2], [3, 4, 5]], atol=1e-12)


def test_pnm_error_cases(tmp_path):
    path = tmp_path / "bad.pgm"
    path.write_bytes(b"P4\n2 2\n255\n\x00\x00\x00\x00")
    with pytest.raises(ValueError, match="magic"):
        read_image(str(path))
    path.write_bytes(b"P5\n2 2\n65535\n" + b"\x00" * 8)
    with pytest.raises(ValueError, match="maxval"):
        read_image(str(path))
    path.write_bytes(b"P5\n4 4\n255\n\x00\x00")
    with pytest.raises(ValueError, match="truncated pixel"):
        read_image(str(path))
    path.write_bytes(b"P5\n4 4")
    with pytest.raises(ValueError, match="truncated netpbm"):
        read_image(str(path))


def test_read_write_unsupported(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_image(str(tmp_path / "missing.pgm"))
    path = tmp_path / "a.tiff"
    path.write_bytes(b"x")
    with pytest.raises(ValueError, match="format"):
        read_image(str(path))
    with pytest.raises(ValueError):
        write_image(Image(np.zeros((2, 2))), str(tmp_path / "a.ppm"))


def test_trace_exact_line_format(tmp_path):
    row = IterTrace(iter=1, r_p=0.0, r_d=0.0, r_c=0.0, tol=0.0,
                    primal_objective=0.0)
    path = tmp_path / "t.csv"
    write_trace([row], str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(TRACE_HEADER)
    assert lines[1] == "1,0,0,0,0,0.0,,"


def test_trace_round_trip_precision(tmp_path):
    rows = [
        IterTrace(iter=k, r_p=0.1 / (k + 1), r_d=1.23456789e-5,
                  r_c=9.87654321e-3, tol=0.1 / (k + 1),
                  primal_objective=0.305766265981,
                  psnr_vs_reference=31.234567, corr_uv=-0.0123456789)
        for k in range(1, 4)
    ]
    path = tmp_path / "t.csv"
    write_trace(rows, str(path))
    back = read_trace(str(path))
    assert [r["iter"] for r in back] == [1, 2, 3]
    for rec, row in zip(back, rows):
        assert rec["r_p"] == pytest.approx(row.r_p, rel=1e-9)
        assert rec["r_d"] == pytest.approx(row.r_d, rel=1e-9)
        assert rec["r_c"] == pytest.approx(row.r_c, rel=1e-9)
        assert rec["tol"] == pytest.approx(row.tol, rel=1e-9)
        assert rec["objective"] == pytest.approx(row.primal_objective,
                                                 rel=1e-12)
        assert rec["psnr"] == pytest.approx(row.psnr_vs_reference, rel=1e-9)
        assert rec["corr"] == pytest.approx(row.corr_uv, rel=1e-9)


def test_trace_handles_optional_and_infinite_fields(tmp_path):
    row = IterTrace(iter=2, r_p=1.0, r_d=2.0, r_c=3.0, tol=3.0,
                    primal_objective=1.5, psnr_vs_reference=float("inf"),
                    corr_uv=None)
    path = tmp_path / "t.csv"
    write_trace([row], str(path))
    back = read_trace(str(path))[0]
    assert back["psnr"] == float("inf")
    assert back["corr"] is None
