"""Region-based level-set segmentation (Chan-Vese active contours without edges).

A signed level-set function phi is evolved on a gray image by explicit Euler
steps of

    d(phi)/dt = delta_eps(phi) * [ mu*kappa(phi) - nu
                                   - lambda1*(I - c1)**2
                                   + lambda2*(I - c2)**2 ]

where c1/c2 are the mean intensities inside (phi > 0) and outside the contour,
kappa is the curvature div(grad(phi)/|grad(phi)|), and delta_eps is a smoothed
Dirac impulse.  The returned mask is the darker of the two phases: spots are
dark on pale backgrounds, so when the inside phase ends up brighter than the
outside the mask is complemented.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import as_gray

#: half-period of the checkerboard initialization, in pixels
CHECKERBOARD_PERIOD = 10.0

#: floor applied to |grad phi| before normalizing, to avoid division by zero
GRADIENT_FLOOR = 1e-8

#: two phases with mean separation at or below this are treated as one
#: region (no contrast -> no foreground)
CONTRAST_TOL = 1e-9


class NumericalBlowupError(RuntimeError):
    """Raised when phi leaves the finite range; the caller should reduce dt."""


@dataclass(frozen=True)
class ChanVeseParams:
    """Weights and numerics for the level-set evolution.

    mu is the contour-length penalty, nu an (optional) area penalty,
    lambda1/lambda2 the inside/outside fit weights, dt the Euler time step,
    epsilon the Heaviside regularization width (pixel units), and iterations
    the fixed number of update steps.
    """

    mu: float = 0.2
    nu: float = 0.0
    lambda1: float = 1.0
    lambda2: float = 1.0
    dt: float = 0.5
    epsilon: float = 1.0
    iterations: int = 500

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")
        if self.lambda1 <= 0 or self.lambda2 <= 0:
            raise ValueError("lambda1 and lambda2 must be positive")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")


def heaviside(z: np.ndarray, epsilon: float) -> np.ndarray:
    """Smoothed step H_eps(z) = 1/2 (1 + (2/pi) atan(z/eps))."""
    return 0.5 * (1.0 + (2.0 / np.pi) * np.arctan(z / epsilon))


def dirac(z: np.ndarray, epsilon: float) -> np.ndarray:
    """Smoothed impulse delta_eps(z) = (1/pi) eps / (eps^2 + z^2)."""
    return (epsilon / np.pi) / (epsilon**2 + z**2)


def initialize_levelset(width: int, height: int, scheme: str = "checkerboard") -> np.ndarray:
    """Build an initial level-set field.

    "checkerboard": phi(x, y) = sin(pi*x/P) * sin(pi*y/P) with P = 10 px,
    which seeds contours everywhere and needs no placement choice.
    "centered-circle": signed distance to a circle of radius min(w, h)/3 at
    the image center, positive inside.
    """
    if width < 1 or height < 1:
        raise ValueError("width and height must be >= 1")
    cols, rows = np.meshgrid(np.arange(width, dtype=np.float64),
                             np.arange(height, dtype=np.float64))
    if scheme == "checkerboard":
        p = np.pi / CHECKERBOARD_PERIOD
        return np.sin(p * cols) * np.sin(p * rows)
    if scheme == "centered-circle":
        radius = min(width, height) / 3.0
        cy, cx = height / 2.0, width / 2.0
        dist = np.sqrt((rows - cy) ** 2 + (cols - cx) ** 2)
        return radius - dist
    raise ValueError(f"unknown init scheme {scheme!r}")


def region_means(img: np.ndarray, phi: np.ndarray, epsilon: float) -> tuple[float, float]:
    """Mean intensity inside (c1) and outside (c2) the contour.

    Both are weighted by the smoothed Heaviside of phi.  If a region has zero
    total weight its mean defaults to the global image mean.
    """
    img = as_gray(img)
    phi = np.asarray(phi, dtype=np.float64)
    if phi.shape != img.shape:
        raise ValueError(f"phi shape {phi.shape} != image shape {img.shape}")
    h = heaviside(phi, epsilon)
    w_in = h.sum()
    w_out = (1.0 - h).sum()
    global_mean = float(img.mean())
    c1 = float((img * h).sum() / w_in) if w_in > 0 else global_mean
    c2 = float((img * (1.0 - h)).sum() / w_out) if w_out > 0 else global_mean
    return c1, c2


def curvature(phi: np.ndarray) -> np.ndarray:
    """Curvature div(grad(phi)/|grad(phi)|) by central differences.

    |grad phi| is floored at 1e-8 and borders are replicated (Neumann).
    """
    phi = np.asarray(phi, dtype=np.float64)
    p = np.pad(phi, 1, mode="edge")
    px = 0.5 * (p[1:-1, 2:] - p[1:-1, :-2])
    py = 0.5 * (p[2:, 1:-1] - p[:-2, 1:-1])
    mag = np.maximum(np.sqrt(px**2 + py**2), GRADIENT_FLOOR)
    nx = px / mag
    ny = py / mag
    nxp = np.pad(nx, 1, mode="edge")
    nyp = np.pad(ny, 1, mode="edge")
    return 0.5 * (nxp[1:-1, 2:] - nxp[1:-1, :-2]) + 0.5 * (nyp[2:, 1:-1] - nyp[:-2, 1:-1])


def evolve_levelset(img: np.ndarray, params: ChanVeseParams, phi: np.ndarray) -> np.ndarray:
    """Run params.iterations explicit-Euler updates and return the final phi.

    c1/c2 are recomputed every iteration.  Raises NumericalBlowupError if phi
    stops being finite.
    """
    img = as_gray(img)
    phi = np.array(phi, dtype=np.float64, copy=True)
    if phi.shape != img.shape:
        raise ValueError(f"init shape {phi.shape} != image shape {img.shape}")
    if not np.all(np.isfinite(phi)):
        raise ValueError("initial level set contains non-finite values")
    for _ in range(params.iterations):
        c1, c2 = region_means(img, phi, params.epsilon)
        force = (
            params.mu * curvature(phi)
            - params.nu
            - params.lambda1 * (img - c1) ** 2
            + params.lambda2 * (img - c2) ** 2
        )
        phi += params.dt * dirac(phi, params.epsilon) * force
        if not np.all(np.isfinite(phi)):
            raise NumericalBlowupError(
                "level set became non-finite; reduce dt or nu"
            )
    return phi


def _darker_phase_mask(img: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Threshold phi at 0 and orient the mask so foreground is the darker phase.

    If the two phases have indistinguishable means there is nothing to
    segment and the mask comes back empty.  A degenerate split (one phase
    empty) is returned unchanged.
    """
    mask = phi > 0
    if not mask.any() or mask.all():
        return mask
    mean_in = float(img[mask].mean())
    mean_out = float(img[~mask].mean())
    if abs(mean_in - mean_out) <= CONTRAST_TOL:
        return np.zeros_like(mask)
    if mean_in > mean_out:
        return ~mask
    return mask


def evolve(img: np.ndarray, params: ChanVeseParams, init: np.ndarray) -> np.ndarray:
    """Evolve the level set on a gray image and return the foreground mask."""
    img = as_gray(img)
    phi = evolve_levelset(img, params, init)
    return _darker_phase_mask(img, phi)


def segment_gray(img: np.ndarray, iterations: int, params: ChanVeseParams | None = None) -> np.ndarray:
    """Segment a gray image: checkerboard init, default weights, given iterations."""
    img = as_gray(img)
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    base = params if params is not None else ChanVeseParams()
    run = ChanVeseParams(
        mu=base.mu,
        nu=base.nu,
        lambda1=base.lambda1,
        lambda2=base.lambda2,
        dt=base.dt,
        epsilon=base.epsilon,
        iterations=iterations,
    )
    init = initialize_levelset(img.shape[1], img.shape[0], "checkerboard")
    return evolve(img, run, init)


def chan_vese_energy(img: np.ndarray, phi: np.ndarray, params: ChanVeseParams) -> float:
    """Discrete two-phase energy: length penalty plus inside/outside fit terms.

    E = mu * sum |grad H_eps(phi)| + lambda1 * sum (I-c1)^2 H
        + lambda2 * sum (I-c2)^2 (1-H)
    """
    img = as_gray(img)
    c1, c2 = region_means(img, phi, params.epsilon)
    h = heaviside(np.asarray(phi, dtype=np.float64), params.epsilon)
    hp = np.pad(h, 1, mode="edge")
    hx = 0.5 * (hp[1:-1, 2:] - hp[1:-1, :-2])
    hy = 0.5 * (hp[2:, 1:-1] - hp[:-2, 1:-1])
    length = np.sqrt(hx**2 + hy**2).sum()
    fit_in = ((img - c1) ** 2 * h).sum()
    fit_out = ((img - c2) ** 2 * (1.0 - h)).sum()
    return float(params.mu * length + params.lambda1 * fit_in + params.lambda2 * fit_out)
