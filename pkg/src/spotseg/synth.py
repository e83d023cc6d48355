"""Deterministic synthetic scale scenes with exact ground truth.

Scenes are pale textureless patches carrying a handful of dark elliptical
spots, rendered under one of three lighting classes:

* ideal -- constant illumination (factor 1.0 everywhere)
* normal -- a smooth linear ramp from 0.8 to 1.2 along a seeded direction
* hard-exposed -- the ramp plus a specular band whose gain saturates at
  least 10% of the pixels to intensity 1.0

The ground-truth mask is the exact union of the placed ellipses and never
depends on the lighting class.  All randomness comes from numpy's PCG64
generator seeded with the scene seed, so a spec reproduces its scene bit
for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# spot semi-axes, as fractions of min(width, height)
SPOT_AXIS_MIN = 0.04
SPOT_AXIS_MAX = 0.08
#: clearance (pixels) kept between spot footprints and around borders
SPOT_PAD = 2.0
#: placement attempts per spot before giving up
MAX_ATTEMPTS = 1000

RAMP_LO = 0.8
RAMP_HI = 1.2
#: Gaussian half-width of the specular band, fraction of min(w, h)
BAND_SIGMA = 0.15

LIGHTING_CLASSES = ("ideal", "normal", "hard-exposed")


@dataclass(frozen=True)
class SceneSpec:
    seed: int
    width: int = 128
    height: int = 128
    n_spots: int = 8
    spot_intensity: float = 0.25
    background_intensity: float = 0.75
    lighting: str = "ideal"
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("width and height must be >= 1")
        if self.n_spots < 0:
            raise ValueError("n_spots must be >= 0")
        if not 0.0 <= self.spot_intensity < self.background_intensity <= 1.0:
            raise ValueError(
                "need 0 <= spot_intensity < background_intensity <= 1, got "
                f"{self.spot_intensity} and {self.background_intensity}"
            )
        if self.lighting not in LIGHTING_CLASSES:
            raise ValueError(f"lighting must be one of {LIGHTING_CLASSES}")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass(frozen=True)
class Ellipse:
    """Axis lengths are semi-axes; theta rotates the u-axis from +x (columns)."""

    cx: float
    cy: float
    a: float
    b: float
    theta: float

    def contains(self, rows: np.ndarray, cols: np.ndarray, pad: float = 0.0) -> np.ndarray:
        dx = cols - self.cx
        dy = rows - self.cy
        u = dx * np.cos(self.theta) + dy * np.sin(self.theta)
        v = -dx * np.sin(self.theta) + dy * np.cos(self.theta)
        return (u / (self.a + pad)) ** 2 + (v / (self.b + pad)) ** 2 <= 1.0


@dataclass(frozen=True)
class Scene:
    spec: SceneSpec
    image: np.ndarray
    mask: np.ndarray
    spots: tuple[Ellipse, ...]


def _place_spots(spec: SceneSpec, rng: np.random.Generator) -> tuple[Ellipse, ...]:
    """Rejection-sample non-overlapping ellipses, fully inside the frame."""
    side = min(spec.width, spec.height)
    ax_lo, ax_hi = SPOT_AXIS_MIN * side, SPOT_AXIS_MAX * side
    margin = ax_hi + SPOT_PAD + 1.0
    if spec.n_spots > 0 and (spec.width <= 2 * margin or spec.height <= 2 * margin):
        raise ValueError("image too small for the requested spots")
    cols, rows = np.meshgrid(np.arange(spec.width, dtype=np.float64),
                             np.arange(spec.height, dtype=np.float64))
    occupied = np.zeros((spec.height, spec.width), dtype=bool)
    spots: list[Ellipse] = []
    for _ in range(spec.n_spots):
        for attempt in range(MAX_ATTEMPTS):
            cx = rng.uniform(margin, spec.width - margin)
            cy = rng.uniform(margin, spec.height - margin)
            a = rng.uniform(ax_lo, ax_hi)
            b = rng.uniform(ax_lo, ax_hi)
            theta = rng.uniform(0.0, np.pi)
            cand = Ellipse(cx=cx, cy=cy, a=a, b=b, theta=theta)
            footprint = cand.contains(rows, cols, pad=SPOT_PAD)
            if not (footprint & occupied).any():
                occupied |= footprint
                spots.append(cand)
                break
        else:
            raise ValueError(
                f"could not place spot {len(spots) + 1}/{spec.n_spots} after "
                f"{MAX_ATTEMPTS} attempts; spec too dense"
            )
    return tuple(spots)


def _illumination(spec: SceneSpec, rng: np.random.Generator) -> np.ndarray:
    """Multiplicative lighting field for the scene's lighting class."""
    cols, rows = np.meshgrid(np.arange(spec.width, dtype=np.float64),
                             np.arange(spec.height, dtype=np.float64))
    if spec.lighting == "ideal":
        return np.ones((spec.height, spec.width), dtype=np.float64)

    # smooth ramp spanning exactly [RAMP_LO, RAMP_HI] along a random direction
    angle = rng.uniform(0.0, 2.0 * np.pi)
    proj = cols * np.cos(angle) + rows * np.sin(angle)
    span = proj.max() - proj.min()
    t = (proj - proj.min()) / span if span > 0 else np.zeros_like(proj)
    field = RAMP_LO + (RAMP_HI - RAMP_LO) * t
    if spec.lighting == "normal":
        return field

    # hard-exposed: add a specular band bright enough to clip the background
    band_angle = rng.uniform(0.0, np.pi)
    px = rng.uniform(0.3, 0.7) * spec.width
    py = rng.uniform(0.3, 0.7) * spec.height
    normal_x, normal_y = -np.sin(band_angle), np.cos(band_angle)
    dist = np.abs((cols - px) * normal_x + (rows - py) * normal_y)
    sigma = BAND_SIGMA * min(spec.width, spec.height)
    peak_gain = 1.5 / spec.background_intensity
    band = 1.0 + (peak_gain - 1.0) * np.exp(-((dist / sigma) ** 2))
    return field * band


def generate_scene(spec: SceneSpec) -> Scene:
    """Render a scene and its exact ground-truth mask."""
    rng = np.random.default_rng(spec.seed)
    spots = _place_spots(spec, rng)
    cols, rows = np.meshgrid(np.arange(spec.width, dtype=np.float64),
                             np.arange(spec.height, dtype=np.float64))
    mask = np.zeros((spec.height, spec.width), dtype=bool)
    for spot in spots:
        mask |= spot.contains(rows, cols)
    gray = np.where(mask, spec.spot_intensity, spec.background_intensity)
    gray = gray * _illumination(spec, rng)
    if spec.noise_sigma > 0:
        gray = gray + rng.normal(0.0, spec.noise_sigma, size=gray.shape)
    gray = np.clip(gray, 0.0, 1.0)
    channel = np.rint(gray * 255.0).astype(np.uint8)
    image = np.repeat(channel[:, :, None], 3, axis=2)
    return Scene(spec=spec, image=image, mask=mask, spots=spots)


def generate(spec: SceneSpec) -> tuple[np.ndarray, np.ndarray]:
    """Render a scene; returns (RGB image, ground-truth mask)."""
    scene = generate_scene(spec)
    return scene.image, scene.mask


def spec_document(scene: Scene) -> dict:
    """JSON-ready description of a scene: the spec plus the placed spots."""
    s = scene.spec
    return {
        "seed": s.seed,
        "width": s.width,
        "height": s.height,
        "n_spots": s.n_spots,
        "spot_intensity": s.spot_intensity,
        "background_intensity": s.background_intensity,
        "lighting": s.lighting,
        "noise_sigma": s.noise_sigma,
        "rng": "numpy PCG64 (default_rng) seeded with `seed`",
        "spots": [
            {"cx": e.cx, "cy": e.cy, "a": e.a, "b": e.b, "theta": e.theta}
            for e in scene.spots
        ],
    }
