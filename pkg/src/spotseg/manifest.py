"""Dataset manifests and the key-value config file.

A manifest is a CSV or TSV file with one row per image:

    image_path[,ground_truth_path[,image_id]]

The ground-truth column may be empty for segment-only runs; the id defaults
to the image filename without its extension and must be unique.

The config file is plain ``key = value`` lines ('#' starts a comment).
Recognized keys and their defaults are listed in Config; list-valued keys
(gammas, rhos, alphas) take comma-separated values.  Command-line flags
override config values, which override built-in defaults.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .chanvese import ChanVeseParams
from .optimizer import GridSpec, default_grid
from .pipeline import PipelineParams
from .preprocess import PreprocessParams


@dataclass(frozen=True)
class ManifestEntry:
    image_path: str
    gt_path: str | None
    image_id: str


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            if e.image_id in seen:
                raise ValueError(f"duplicate image_id {e.image_id!r} in manifest")
            seen.add(e.image_id)

    def require_ground_truth(self) -> None:
        missing = [e.image_id for e in self.entries if e.gt_path is None]
        if missing:
            raise ValueError(f"entries lack ground truth: {', '.join(missing)}")


def _default_id(image_path: str) -> str:
    return os.path.splitext(os.path.basename(image_path))[0]


def load_manifest(path: str | os.PathLike) -> DatasetManifest:
    """Parse a manifest file; the delimiter (comma or tab) is sniffed per line."""
    entries = []
    with open(path) as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in (line.split("\t") if "\t" in line else line.split(","))]
            if len(parts) > 3:
                raise ValueError(f"{path}:{lineno}: expected at most 3 columns, got {len(parts)}")
            image_path = parts[0]
            if not image_path:
                raise ValueError(f"{path}:{lineno}: empty image path")
            gt_path = parts[1] if len(parts) > 1 and parts[1] else None
            image_id = parts[2] if len(parts) > 2 and parts[2] else _default_id(image_path)
            entries.append(ManifestEntry(image_path=image_path, gt_path=gt_path,
                                         image_id=image_id))
    return DatasetManifest(entries=tuple(entries))


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.split(",") if p.strip())


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in text.split(",") if p.strip())


@dataclass(frozen=True)
class Config:
    """Pipeline defaults, optional grid override, and run settings."""

    # preprocessing constants
    median_kernel: int = 5
    power_law_c: float = 1.0
    # level-set constants
    mu: float = 0.2
    nu: float = 0.0
    lambda1: float = 1.0
    lambda2: float = 1.0
    dt: float = 0.5
    epsilon: float = 1.0
    # manual-run triple defaults
    gamma: float = 4.8
    rho: int = 2000
    alpha: float = 0.01
    remove: str = "large"
    # run settings
    workers: int = 1
    out: str = "out"
    # grid override (None = use the built-in 13x6x7 default grid)
    gammas: tuple[float, ...] | None = None
    rhos: tuple[int, ...] | None = None
    alphas: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def pipeline_params(self, gamma: float | None = None, rho: int | None = None,
                        alpha: float | None = None, remove: str | None = None) -> PipelineParams:
        """Assemble PipelineParams, letting flag values override config values."""
        return PipelineParams(
            gamma=gamma if gamma is not None else self.gamma,
            iterations=rho if rho is not None else self.rho,
            alpha=alpha if alpha is not None else self.alpha,
            remove=remove if remove is not None else self.remove,
            preprocess=PreprocessParams(gamma=1.0, c=self.power_law_c,
                                        median_kernel=self.median_kernel),
            chanvese=ChanVeseParams(mu=self.mu, nu=self.nu, lambda1=self.lambda1,
                                    lambda2=self.lambda2, dt=self.dt,
                                    epsilon=self.epsilon),
        )

    def grid(self) -> GridSpec:
        if self.gammas is None and self.rhos is None and self.alphas is None:
            return default_grid()
        base = default_grid()
        return GridSpec(
            gammas=self.gammas if self.gammas is not None else base.gammas,
            rhos=self.rhos if self.rhos is not None else base.rhos,
            alphas=self.alphas if self.alphas is not None else base.alphas,
        )


_CONFIG_PARSERS = {
    "median_kernel": int,
    "power_law_c": float,
    "mu": float,
    "nu": float,
    "lambda1": float,
    "lambda2": float,
    "dt": float,
    "epsilon": float,
    "gamma": float,
    "rho": int,
    "alpha": float,
    "remove": str,
    "workers": int,
    "out": str,
    "gammas": _parse_floats,
    "rhos": _parse_ints,
    "alphas": _parse_floats,
}


def _parse_kv_file(path: str | os.PathLike, allowed: dict) -> dict:
    values = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, text = line.partition("=")
            key = key.strip()
            if key not in allowed:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = allowed[key](text.strip())
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    return values


def load_config(path: str | os.PathLike) -> Config:
    return Config(**_parse_kv_file(path, _CONFIG_PARSERS))


_GRID_PARSERS = {
    "gammas": _parse_floats,
    "rhos": _parse_ints,
    "alphas": _parse_floats,
}


def load_grid_file(path: str | os.PathLike) -> GridSpec:
    """Read a grid file: gammas/rhos/alphas keys, comma-separated values."""
    values = _parse_kv_file(path, _GRID_PARSERS)
    base = default_grid()
    return GridSpec(
        gammas=values.get("gammas", base.gammas),
        rhos=values.get("rhos", base.rhos),
        alphas=values.get("alphas", base.alphas),
    )
