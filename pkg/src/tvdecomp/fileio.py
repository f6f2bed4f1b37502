"""Image file reading/writing (PGM/PPM/PNG) and CSV trace emission.

PGM (P5) and PPM (P6) are the canonical bit-exact formats; PNG is handled
through Pillow for convenience.  Quantization to 8 bits rounds half-up, so
write -> read -> write is byte-identical for the netpbm formats.
"""

from __future__ import annotations

import csv
import math
import os

import numpy as np

from .image import Image, MultiImage

TRACE_HEADER = ["iter", "r_p", "r_d", "r_c", "tol", "objective", "psnr",
                "corr"]


def _read_pnm_token(stream):
    # Tokens are whitespace-separated; '#' starts a comment to end of line.
    token = b""
    while True:
        ch = stream.read(1)
        if not ch:
            if token:
                return token
            raise ValueError("truncated netpbm header")
        if ch == b"#":
            while ch not in (b"\n", b""):
                ch = stream.read(1)
            continue
        if ch.isspace():
            if token:
                return token
            continue
        token += ch


def _read_pnm(stream):
    magic = _read_pnm_token(stream)
    if magic not in (b"P5", b"P6"):
        raise ValueError(f"unsupported netpbm magic {magic!r} "
                         "(only binary P5/P6)")
    width = int(_read_pnm_token(stream))
    height = int(_read_pnm_token(stream))
    maxval = int(_read_pnm_token(stream))
    if not 0 < maxval < 256:
        raise ValueError(f"unsupported maxval {maxval} (8-bit only)")
    nchan = 1 if magic == b"P5" else 3
    count = width * height * nchan
    raw = stream.read(count)
    if len(raw) != count:
        raise ValueError(f"truncated pixel data: expected {count} bytes, "
                         f"got {len(raw)}")
    data = np.frombuffer(raw, dtype=np.uint8).astype(np.float64) / maxval
    data = data.reshape(height, width, nchan)
    return MultiImage(tuple(Image(data[:, :, c]) for c in range(nchan)))


def _read_png(path):
    from PIL import Image as PILImage

    with PILImage.open(path) as im:
        if im.mode not in ("L", "RGB"):
            im = im.convert("RGB" if im.mode in ("RGBA", "P") else "L")
        arr = np.asarray(im, dtype=np.float64) / 255.0
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return MultiImage(tuple(Image(arr[:, :, c])
                            for c in range(arr.shape[2])))


def read_image(path):
    """Read a PGM/PPM/PNG file into a normalized MultiImage."""
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    ext = os.path.splitext(path)[1].lower()
    if ext == ".png":
        return _read_png(path)
    if ext in (".pgm", ".ppm", ".pnm"):
        with open(path, "rb") as stream:
            return _read_pnm(stream)
    raise ValueError(f"unsupported image format {ext!r} "
                     "(use .pgm, .ppm, or .png)")


def _as_multi(img):
    if isinstance(img, MultiImage):
        return img
    if isinstance(img, Image):
        return MultiImage((img,))
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 2:
        return MultiImage((Image(arr),))
    raise TypeError("expected MultiImage, Image, or 2-D array")


def quantize(plane, maxval=255):
    """Clamp to [0, 1] and quantize round-half-up to integer levels."""
    clipped = np.clip(np.asarray(plane, dtype=np.float64), 0.0, 1.0)
    return np.floor(clipped * maxval + 0.5).astype(np.uint8)


def write_image(img, path):
    """Write P5/P6/PNG chosen by extension; clamps and quantizes to 8 bit."""
    multi = _as_multi(img)
    planes = [quantize(c.data) for c in multi.channels]
    ext = os.path.splitext(path)[1].lower()
    if ext == ".png":
        from PIL import Image as PILImage

        stacked = np.stack(planes, axis=-1)
        if stacked.shape[-1] == 1:
            PILImage.fromarray(stacked[:, :, 0], mode="L").save(path)
        elif stacked.shape[-1] == 3:
            PILImage.fromarray(stacked, mode="RGB").save(path)
        else:
            raise ValueError(f"PNG supports 1 or 3 channels, "
                             f"got {stacked.shape[-1]}")
        return
    if ext in (".pgm", ".pnm") and len(planes) == 1:
        magic, payload = b"P5", planes[0].tobytes()
    elif ext == ".ppm" and len(planes) == 3:
        magic = b"P6"
        payload = np.stack(planes, axis=-1).tobytes()
    else:
        raise ValueError(
            f"cannot write {len(planes)} channel(s) to {ext!r}")
    header = b"%s\n%d %d\n255\n" % (magic, multi.width, multi.height)
    with open(path, "wb") as stream:
        stream.write(header + payload)


def _fmt(value):
    if value is None:
        return ""
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".12g")


def write_trace(rows, path):
    """Emit IterTrace rows as CSV with the stable 8-column schema."""
    with open(path, "w", newline="") as stream:
        writer = csv.writer(stream)
        writer.writerow(TRACE_HEADER)
        for row in rows:
            writer.writerow([
                int(row.iter),
                _fmt(row.r_p), _fmt(row.r_d), _fmt(row.r_c), _fmt(row.tol),
                repr(float(row.primal_objective)),
                _fmt(row.psnr_vs_reference),
                _fmt(row.corr_uv),
            ])


def read_trace(path):
    """Parse a trace CSV back into dictionaries (floats, None for blanks)."""
    rows = []
    with open(path, newline="") as stream:
        reader = csv.DictReader(stream)
        for rec in reader:
            rows.append({
                key: (None if rec[key] == "" else
                      int(rec[key]) if key == "iter" else float(rec[key]))
                for key in TRACE_HEADER
            })
    return rows
