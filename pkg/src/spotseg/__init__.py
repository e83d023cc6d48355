"""Spot segmentation toolkit.

Segments dark blotches on pale textured backgrounds (animal-scale imagery)
with a two-thread pipeline: both threads share gray conversion and median
filtering, one adds a power-law gamma correction, both run a Chan-Vese
level-set segmentation followed by an area-opening cleanup, and the two
binary results are merged with a logical OR.  A ground-truth-guided grid
search tunes the three free parameters (gamma, iteration count, area
fraction), and an evaluation suite scores results pixel by pixel.

Array conventions used throughout:

* RGB image  -- uint8 array of shape (height, width, 3)
* gray image -- float64 array of shape (height, width), values in [0, 1]
* binary mask -- bool array of shape (height, width), True = foreground
"""

from .image import load_rgb, load_mask, save_mask, load_gray, save_gray, normalize_gray
from .preprocess import PreprocessParams, rgb_to_luminance, median_filter, gamma_correct
from .chanvese import (
    ChanVeseParams,
    NumericalBlowupError,
    initialize_levelset,
    region_means,
    evolve,
    evolve_levelset,
    segment_gray,
)
from .morphology import LabelMap, label_components, area_open
from .pipeline import PipelineParams, segment, segment_dark, segment_bright, merge
from .evaluation import (
    ConfusionMatrix,
    Metrics,
    confusion,
    performance,
    classical_metrics,
    overlay,
    aggregate,
)
from .optimizer import (
    GridSpec,
    OptimizationResult,
    default_grid,
    score_combination,
    optimize_image,
    optimize_dataset,
)
from .synth import SceneSpec, Scene, generate, generate_scene

__version__ = "0.1.0"

__all__ = [
    "load_rgb",
    "load_mask",
    "save_mask",
    "load_gray",
    "save_gray",
    "normalize_gray",
    "PreprocessParams",
    "rgb_to_luminance",
    "median_filter",
    "gamma_correct",
    "ChanVeseParams",
    "NumericalBlowupError",
    "initialize_levelset",
    "region_means",
    "evolve",
    "evolve_levelset",
    "segment_gray",
    "LabelMap",
    "label_components",
    "area_open",
    "PipelineParams",
    "segment",
    "segment_dark",
    "segment_bright",
    "merge",
    "ConfusionMatrix",
    "Metrics",
    "confusion",
    "performance",
    "classical_metrics",
    "overlay",
    "aggregate",
    "GridSpec",
    "OptimizationResult",
    "default_grid",
    "score_combination",
    "optimize_image",
    "optimize_dataset",
    "SceneSpec",
    "Scene",
    "generate",
    "generate_scene",
]
