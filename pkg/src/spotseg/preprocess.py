"""Preprocessing stages: gray conversion, median filtering, gamma correction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .image import as_gray, as_rgb

# CIE 1931 / BT.601 luminance weights for R, G, B.
LUMA_R = 0.2989
LUMA_G = 0.5870
LUMA_B = 0.1140


@dataclass(frozen=True)
class PreprocessParams:
    """Settings for the preprocessing stages.

    gamma: power-law exponent; values above 1 darken midtones, which keeps
        spots visible inside bright regions.
    c: power-law scale constant, normally 1.
    median_kernel: side length of the square median window, odd and >= 1.
    """

    gamma: float = 1.0
    c: float = 1.0
    median_kernel: int = 5

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.c <= 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if self.median_kernel < 1 or self.median_kernel % 2 == 0:
            raise ValueError(f"median_kernel must be odd and >= 1, got {self.median_kernel}")


def rgb_to_luminance(img: np.ndarray) -> np.ndarray:
    """Convert an RGB image to a [0, 1] luminance image.

    Per-pixel Y = 0.2989 R + 0.5870 G + 0.1140 B on channels normalized
    to [0, 1], clamped to [0, 1].
    """
    img = as_rgb(img)
    chans = img.astype(np.float64) / 255.0
    y = LUMA_R * chans[:, :, 0] + LUMA_G * chans[:, :, 1] + LUMA_B * chans[:, :, 2]
    return np.clip(y, 0.0, 1.0)


def median_filter(img: np.ndarray, kernel: int) -> np.ndarray:
    """Median-filter a gray image with a kernel x kernel window.

    Borders are handled by edge replication; output dimensions are unchanged.
    The kernel must be odd and no larger than the smaller image side.
    """
    img = as_gray(img)
    if kernel < 1 or kernel % 2 == 0:
        raise ValueError(f"median kernel must be odd and >= 1, got {kernel}")
    if kernel > min(img.shape):
        raise ValueError(
            f"median kernel {kernel} exceeds image extent {min(img.shape)}"
        )
    if kernel == 1:
        return img.copy()
    return ndimage.median_filter(img, size=kernel, mode="nearest")


def gamma_correct(img: np.ndarray, params: PreprocessParams) -> np.ndarray:
    """Apply the power-law map S = c * l**gamma, clamped to [0, 1]."""
    img = as_gray(img)
    out = params.c * np.power(img, params.gamma)
    return np.clip(out, 0.0, 1.0)
