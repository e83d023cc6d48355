"""Two-thread segmentation pipeline.

The dark thread segments the image as-is to catch spots in shadowed regions;
the bright thread darkens midtones with a gamma correction first so spots
inside highlights keep their contrast.  Each thread is

    luminance -> median filter -> [gamma] -> level-set segmentation -> area opening

and the two binary results are merged with a pixelwise OR.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .chanvese import ChanVeseParams, segment_gray
from .image import as_mask, as_rgb
from .morphology import area_open
from .preprocess import PreprocessParams, gamma_correct, median_filter, rgb_to_luminance


@dataclass(frozen=True)
class PipelineParams:
    """The tunable triple plus fixed stage constants.

    gamma, iterations and alpha are the three searched parameters (the grid
    search constrains them to [3.6, 6], [1600, 2600] and [0.0025, 0.05];
    manual runs may use any positive values).  preprocess and chanvese hold
    the fixed constants; their own gamma/iterations fields are overridden by
    the triple here.
    """

    gamma: float = 4.8
    iterations: int = 2000
    alpha: float = 0.01
    remove: str = "large"
    preprocess: PreprocessParams = field(default_factory=PreprocessParams)
    chanvese: ChanVeseParams = field(default_factory=ChanVeseParams)

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")


def prepared_gray(img: np.ndarray, p: PipelineParams) -> np.ndarray:
    """Shared head of both threads: luminance followed by the median filter."""
    lum = rgb_to_luminance(as_rgb(img))
    return median_filter(lum, p.preprocess.median_kernel)


def segment_dark(img: np.ndarray, p: PipelineParams) -> np.ndarray:
    """Dark-region thread: no luminance correction."""
    gray = prepared_gray(img, p)
    raw = segment_gray(gray, p.iterations, p.chanvese)
    return area_open(raw, p.alpha, remove=p.remove)


def segment_bright(img: np.ndarray, p: PipelineParams) -> np.ndarray:
    """Bright-region thread: gamma correction before the level-set stage."""
    gray = prepared_gray(img, p)
    corrected = gamma_correct(gray, replace(p.preprocess, gamma=p.gamma))
    raw = segment_gray(corrected, p.iterations, p.chanvese)
    return area_open(raw, p.alpha, remove=p.remove)


def merge(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pixelwise OR of two masks of equal dimensions."""
    a = as_mask(a)
    b = as_mask(b)
    if a.shape != b.shape:
        raise ValueError(f"mask shapes differ: {a.shape} vs {b.shape}")
    return a | b


def segment(img: np.ndarray, p: PipelineParams) -> np.ndarray:
    """Full segmentation: OR-merge of the dark and bright threads."""
    return merge(segment_dark(img, p), segment_bright(img, p))
