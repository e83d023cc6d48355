"""Raster conventions and lossless image I/O.

All pixel data lives in numpy arrays, row-major, indexed (row, col):

* RGB images are uint8 arrays of shape (h, w, 3).
* Gray images are float64 arrays of shape (h, w) with values in [0, 1];
  intensities stay real-valued internally so gamma correction and the
  level-set arithmetic never quantize.
* Binary masks are bool arrays of shape (h, w), True = foreground.

Masks serialize as 8-bit grayscale PNG (foreground 255, background 0)
and load back with a threshold at 128, so mask round trips are bit exact.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image, UnidentifiedImageError


def as_rgb(arr: np.ndarray) -> np.ndarray:
    """Validate an (h, w, 3) uint8 RGB array and return it."""
    arr = np.asarray(arr)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected (h, w, 3) RGB array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("image dimensions must be at least 1x1")
    if arr.dtype != np.uint8:
        raise ValueError(f"RGB array must be uint8, got {arr.dtype}")
    return arr


def as_gray(arr: np.ndarray) -> np.ndarray:
    """Validate a 2-D float gray image with values in [0, 1] and return it as float64."""
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected 2-D gray array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("image dimensions must be at least 1x1")
    if not np.all(np.isfinite(arr)):
        raise ValueError("gray image contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("gray intensities must lie in [0, 1]")
    return arr


def as_mask(arr: np.ndarray) -> np.ndarray:
    """Validate a 2-D boolean mask and return it as bool."""
    arr = np.asarray(arr)
    if arr.ndim != 2:
        raise ValueError(f"expected 2-D mask array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("mask dimensions must be at least 1x1")
    if arr.dtype != np.bool_:
        raise ValueError(f"mask array must be bool, got {arr.dtype}")
    return arr


def load_rgb(path: str | os.PathLike) -> np.ndarray:
    """Decode a PNG or JPEG file into an (h, w, 3) uint8 array.

    An alpha channel, if present, is dropped.  Raises FileNotFoundError for
    a missing file and ValueError for anything that does not decode.
    """
    try:
        with Image.open(path) as im:
            rgb = im.convert("RGB")
            arr = np.asarray(rgb, dtype=np.uint8)
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ValueError(f"cannot decode image file {path!r}: {exc}") from exc
    if arr.ndim != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"decoded image {path!r} has invalid dimensions {arr.shape}")
    return arr


def save_mask(mask: np.ndarray, path: str | os.PathLike) -> None:
    """Write a binary mask as an 8-bit grayscale PNG (foreground white)."""
    mask = as_mask(mask)
    data = np.where(mask, np.uint8(255), np.uint8(0))
    Image.fromarray(data, mode="L").save(path, format="PNG")


def load_mask(path: str | os.PathLike) -> np.ndarray:
    """Load a mask PNG; pixels with value >= 128 become foreground."""
    try:
        with Image.open(path) as im:
            gray = im.convert("L")
            arr = np.asarray(gray, dtype=np.uint8)
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ValueError(f"cannot decode mask file {path!r}: {exc}") from exc
    return arr >= 128


def save_gray(img: np.ndarray, path: str | os.PathLike) -> None:
    """Write a gray image as 8-bit PNG (intensities quantized to 0..255)."""
    img = as_gray(img)
    data = np.rint(img * 255.0).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path, format="PNG")


def load_gray(path: str | os.PathLike) -> np.ndarray:
    """Load an 8-bit grayscale PNG into a [0, 1] float image."""
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("L"), dtype=np.uint8)
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ValueError(f"cannot decode gray file {path!r}: {exc}") from exc
    return normalize_gray(arr)


def normalize_gray(values: np.ndarray) -> np.ndarray:
    """Map integer intensities in [0, 255] onto [0, 1] by dividing by 255."""
    values = np.asarray(values)
    return values.astype(np.float64) / 255.0
