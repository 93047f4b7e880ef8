"""Reading and writing single-channel float rasters.

Two encodings are accepted for UCM and depth inputs:

* a raw little-endian file whose first line is the ASCII header ``"H W f32\\n"``
  followed by ``H*W`` row-major float32 values;
* a 16-bit grayscale image, scaled to [0, 1].
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image

from .errors import IngestionError, ValidationError

RAW_SUFFIXES = (".raw", ".f32", ".depth", ".ucm")


def write_raw(path, values) -> None:
    arr = np.asarray(values, dtype="<f4")
    if arr.ndim != 2:
        raise ValidationError(f"expected a 2-D raster, got shape {arr.shape}")
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"{h} {w} f32\n".encode("ascii"))
        fh.write(np.ascontiguousarray(arr).tobytes())


def read_raw(path) -> np.ndarray:
    try:
        with open(path, "rb") as fh:
            header = fh.readline().decode("ascii").split()
            payload = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise IngestionError(f"cannot read raster {path}: {exc}") from exc
    if len(header) != 3 or header[2] != "f32":
        raise IngestionError(f"bad raster header in {path}: {header!r}")
    h, w = int(header[0]), int(header[1])
    if len(payload) != 4 * h * w:
        raise IngestionError(f"{path}: expected {4 * h * w} payload bytes, found {len(payload)}")
    return np.frombuffer(payload, dtype="<f4").reshape(h, w).astype(np.float64)


def read_raster(path) -> np.ndarray:
    """Load a float raster from either supported encoding."""
    if str(path).lower().endswith(RAW_SUFFIXES):
        return read_raw(path)
    if not os.path.exists(path):
        raise IngestionError(f"no such raster: {path}")
    try:
        with Image.open(path) as im:
            arr = np.asarray(im)
    except OSError as exc:
        raise IngestionError(f"cannot decode raster {path}: {exc}") from exc
    if arr.ndim != 2:
        raise IngestionError(f"{path}: expected a single-channel image")
    if arr.dtype == np.uint16 or arr.dtype == np.int32:
        return arr.astype(np.float64) / 65535.0
    if arr.dtype == np.uint8:
        return arr.astype(np.float64) / 255.0
    return arr.astype(np.float64)
