"""Binary PGM (P5) and PPM (P6) frame files, 8-bit only."""

from __future__ import annotations

import os
import re
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .volume import PixelFrame


class NetpbmError(ValueError):
    def __init__(self, path, msg):
        super().__init__(f"{path}: {msg}")
        self.path = path


class UnsupportedFormat(NetpbmError):
    pass


class UnsupportedMaxval(NetpbmError):
    pass


class TruncatedPayload(NetpbmError):
    pass


_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")
EXTENSIONS = (".pgm", ".ppm", ".pnm")


def _header(data: bytes, path):
    tokens = []
    pos = 0
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise TruncatedPayload(path, "incomplete header")
        tokens.append(m.group(1))
        pos = m.end()
    # exactly one whitespace byte separates maxval from the raster
    return tokens, pos + 1


def decode(data: bytes, path="<bytes>") -> np.ndarray:
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise UnsupportedFormat(path, f"unsupported magic {magic!r}")
    (magic, w, h, maxval), start = _header(data, path)
    try:
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise UnsupportedFormat(path, "malformed header") from None
    if maxval != 255:
        raise UnsupportedMaxval(path, f"maxval {maxval} (only 255 is supported)")
    channels = 3 if magic == b"P6" else 1
    size = w * h * channels
    raster = data[start:start + size]
    if len(raster) < size:
        raise TruncatedPayload(path, f"expected {size} bytes of pixels, found {len(raster)}")
    a = np.frombuffer(raster, dtype=np.uint8)
    return a.reshape((h, w, 3) if channels == 3 else (h, w))


def encode(img: np.ndarray) -> bytes:
    img = np.asarray(img, dtype=np.uint8)
    magic = b"P6" if img.ndim == 3 else b"P5"
    h, w = img.shape[:2]
    return b"%s\n%d %d\n255\n" % (magic, w, h) + img.tobytes()


def read_image(path) -> np.ndarray:
    return decode(Path(path).read_bytes(), path)


def write_image(path, img) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(encode(img))
    os.replace(tmp, path)


def list_frames(source: Union[str, os.PathLike, Sequence]) -> list:
    if isinstance(source, (str, os.PathLike)):
        p = Path(source)
        if p.is_dir():
            return sorted((f for f in p.iterdir() if f.suffix.lower() in EXTENSIONS),
                          key=lambda f: f.name)
        return [p]
    return sorted((Path(f) for f in source), key=lambda f: f.name)


def read_frames(source, peak: float = 255.0) -> list:
    """Read P5/P6 frames from a directory (or a list of files), ordered by filename."""
    files = list_frames(source)
    if not files:
        raise FileNotFoundError(f"no PGM/PPM frames found in {source}")
    return [PixelFrame.from_array(read_image(f).astype(np.float64), peak) for f in files]


def write_frames(frames: Iterable[PixelFrame], directory, prefix: str = "frame") -> list:
    """Write frames as ``<prefix>_0000.pgm`` (or ``.ppm``), clamped and rounded to 8 bits."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    frames = list(frames)
    digits = max(4, len(str(len(frames) - 1)))
    paths = []
    for j, f in enumerate(frames):
        ext = ".ppm" if f.geometry.channels == 3 else ".pgm"
        path = d / f"{prefix}_{j:0{digits}d}{ext}"
        write_image(path, f.to_uint8())
        paths.append(path)
    return paths


def write_masks(masks, directory, prefix: str = "mask") -> list:
    """Binary masks as P5 images with values 0 and 255."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    digits = max(4, len(str(len(masks) - 1)))
    paths = []
    for j, m in enumerate(masks):
        path = d / f"{prefix}_{j:0{digits}d}.pgm"
        write_image(path, m.image.astype(np.uint8) * 255)
        paths.append(path)
    return paths
