"""Frame file I/O: binary PGM (P5), grayscale PNG, and profile CSV.

Pixel values are normalized to [0, 1] by the maximum representable value
of the source format (the PGM maxval, 255 or 65535 for PNG bit depths).
"""

from __future__ import annotations

import os

import numpy as np

from .profile import Frame, LaserProfile


def write_pgm(frame: Frame, path, maxval: int = 65535) -> None:
    """Write intensities as binary PGM; 16-bit samples are big-endian."""
    if maxval not in (255, 65535):
        raise ValueError("maxval must be 255 or 65535")
    raw = np.rint(frame.intensities * maxval)
    if maxval == 255:
        payload = raw.astype(np.uint8).tobytes()
    else:
        payload = raw.astype(">u2").tobytes()
    header = f"P5\n{frame.width} {frame.height}\n{maxval}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header + payload)


def _pgm_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """First `count` whitespace/comment-delimited header tokens and end offset."""
    tokens = []
    i = 0
    while len(tokens) < count:
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if i < len(data) and data[i : i + 1] == b"#":
            while i < len(data) and data[i : i + 1] != b"\n":
                i += 1
            continue
        start = i
        while i < len(data) and not data[i : i + 1].isspace():
            i += 1
        if start == i:
            raise ValueError("truncated PGM header")
        tokens.append(data[start:i])
    return tokens, i + 1  # single whitespace byte separates header from raster


def read_pgm(path) -> np.ndarray:
    """Binary PGM (P5) raster normalized to [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, offset = _pgm_tokens(data, 4)
    if tokens[0] != b"P5":
        raise ValueError(f"not a binary PGM (P5) file: {path}")
    width, height, maxval = (int(t) for t in tokens[1:])
    if width <= 0 or height <= 0 or not 0 < maxval < 65536:
        raise ValueError(f"invalid PGM dimensions in {path}")
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    expected = width * height * dtype.itemsize if maxval >= 256 else width * height
    raster = data[offset:]
    if len(raster) < expected:
        raise ValueError(f"truncated PGM raster in {path}")
    img = np.frombuffer(raster[:expected], dtype=dtype).reshape(height, width)
    return img.astype(float) / maxval


def read_png(path) -> np.ndarray:
    """Grayscale PNG normalized to [0, 1]; color images are rejected."""
    from PIL import Image

    with Image.open(path) as im:
        if im.mode == "L":
            return np.asarray(im, dtype=float) / 255.0
        if im.mode in ("I", "I;16", "I;16B", "I;16L"):
            return np.asarray(im, dtype=float) / 65535.0
        raise ValueError(f"unsupported PNG mode {im.mode!r} (grayscale required): {path}")


def read_image(path, pixel_pitch_um: float = 10.0, frame_id: str | None = None) -> Frame:
    """Load a PGM or PNG file into a Frame."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".pgm":
        intensities = read_pgm(path)
    elif ext == ".png":
        intensities = read_png(path)
    else:
        raise ValueError(f"unsupported image format {ext!r}: {path}")
    if frame_id is None:
        frame_id = os.path.splitext(os.path.basename(str(path)))[0]
    return Frame(intensities=intensities, frame_id=frame_id, pixel_pitch_um=pixel_pitch_um)


def write_profile_csv(profile: LaserProfile, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("column,row_subpixel,valid\n")
        for c in range(profile.columns):
            row = float(profile.row_subpixel[c])
            fh.write(f"{c},{row!r},{'true' if profile.valid[c] else 'false'}\n")


def read_profile_csv(path) -> LaserProfile:
    rows = []
    valid = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "column,row_subpixel,valid":
            raise ValueError("profile CSV must have header column,row_subpixel,valid")
        for line in fh:
            _, row, flag = line.strip().split(",")
            rows.append(float(row))
            valid.append(flag == "true")
    return LaserProfile(row_subpixel=np.array(rows), valid=np.array(valid, dtype=bool))
