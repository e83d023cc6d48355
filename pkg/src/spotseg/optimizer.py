"""Exhaustive ground-truth-guided search over (gamma, iterations, alpha).

Every grid combination is scored with the column-normalized confusion matrix
objective x11 + x22.  The search keeps the best triple per training image;
the deployed triple is the per-dimension median of those bests (even counts
take the lower of the two middle values), snapped to the nearest grid value.

Scoring reuses work across combinations: the dark thread depends only on the
iteration count and the bright thread only on (gamma, iterations), so thread
masks are cached and the cheap area opening and merge run per combination.
The resulting score table is identical to scoring each triple from scratch,
which the tests verify.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .chanvese import segment_gray
from .evaluation import confusion
from .image import load_mask, load_rgb
from .morphology import area_open
from .pipeline import PipelineParams, merge, prepared_gray
from .preprocess import gamma_correct

GAMMA_BOUNDS = (3.6, 6.0)
RHO_BOUNDS = (1600, 2600)
ALPHA_BOUNDS = (0.0025, 0.05)

SCORE_CSV_FIELDS = ["image_id", "gamma", "rho", "alpha", "x11", "x22", "objective"]

Triple = tuple[float, int, float]


def _check_axis(name: str, values, lo, hi) -> tuple:
    vals = tuple(values)
    if not vals:
        raise ValueError(f"{name} grid must be nonempty")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ValueError(f"{name} grid must be strictly increasing: {vals}")
    if vals[0] < lo or vals[-1] > hi:
        raise ValueError(f"{name} grid must lie within [{lo}, {hi}]: {vals}")
    return vals


@dataclass(frozen=True)
class GridSpec:
    """Discrete search box; each axis strictly increasing, within its bounds."""

    gammas: tuple[float, ...]
    rhos: tuple[int, ...]
    alphas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "gammas", _check_axis("gamma", self.gammas, *GAMMA_BOUNDS))
        object.__setattr__(
            self, "rhos", tuple(int(r) for r in _check_axis("rho", self.rhos, *RHO_BOUNDS))
        )
        object.__setattr__(self, "alphas", _check_axis("alpha", self.alphas, *ALPHA_BOUNDS))

    def combinations(self) -> list[Triple]:
        """All triples in canonical order: gamma outermost, alpha innermost."""
        return [
            (g, r, a) for g in self.gammas for r in self.rhos for a in self.alphas
        ]

    @property
    def size(self) -> int:
        return len(self.gammas) * len(self.rhos) * len(self.alphas)


def default_grid() -> GridSpec:
    """The 13 x 6 x 7 grid: evenly spaced values over the allowed boxes."""
    gammas = tuple(round(3.6 + 0.2 * i, 10) for i in range(13))
    rhos = tuple(range(1600, 2601, 200))
    alphas = tuple(round(float(a), 12) for a in np.linspace(0.0025, 0.05, 7))
    return GridSpec(gammas=gammas, rhos=rhos, alphas=alphas)


@dataclass(frozen=True)
class ScoreRow:
    gamma: float
    rho: int
    alpha: float
    x11: float
    x22: float
    objective: float

    @property
    def triple(self) -> Triple:
        return (self.gamma, self.rho, self.alpha)


@dataclass(frozen=True)
class ImageResult:
    image_id: str
    best: Triple
    best_objective: float
    table: tuple[ScoreRow, ...]


@dataclass(frozen=True)
class OptimizationResult:
    per_image: tuple[ImageResult, ...]
    selected: Triple
    selection_method: str
    grid: GridSpec

    def selected_params(self, base: PipelineParams | None = None) -> PipelineParams:
        base = base if base is not None else PipelineParams()
        gamma, rho, alpha = self.selected
        return replace(base, gamma=gamma, iterations=rho, alpha=alpha)


def score_combination(img: np.ndarray, gt: np.ndarray, triple: Triple,
                      base: PipelineParams | None = None) -> float:
    """Objective x11 + x22 for one full pipeline run with the given triple."""
    from .pipeline import segment

    base = base if base is not None else PipelineParams()
    gamma, rho, alpha = triple
    p = replace(base, gamma=gamma, iterations=int(rho), alpha=alpha)
    cm = confusion(gt, segment(img, p))
    if not (cm.background_defined and cm.foreground_defined):
        raise ValueError("ground truth lacks a class; objective undefined")
    return cm.x11 + cm.x22


class _ThreadCache:
    """Lazily computed per-image thread masks, keyed by their true inputs."""

    def __init__(self, img: np.ndarray, base: PipelineParams):
        self.base = base
        self.gray = prepared_gray(img, base)
        self._dark: dict[int, np.ndarray] = {}
        self._gamma_img: dict[float, np.ndarray] = {}
        self._bright: dict[tuple[float, int], np.ndarray] = {}
        self._dark_open: dict[tuple[int, float], np.ndarray] = {}

    def dark_open(self, rho: int, alpha: float) -> np.ndarray:
        key = (rho, alpha)
        if key not in self._dark_open:
            if rho not in self._dark:
                self._dark[rho] = segment_gray(self.gray, rho, self.base.chanvese)
            self._dark_open[key] = area_open(self._dark[rho], alpha, remove=self.base.remove)
        return self._dark_open[key]

    def bright_open(self, gamma: float, rho: int, alpha: float) -> np.ndarray:
        key = (gamma, rho)
        if key not in self._bright:
            if gamma not in self._gamma_img:
                pre = replace(self.base.preprocess, gamma=gamma)
                self._gamma_img[gamma] = gamma_correct(self.gray, pre)
            self._bright[key] = segment_gray(self._gamma_img[gamma], rho, self.base.chanvese)
        return area_open(self._bright[key], alpha, remove=self.base.remove)


def _argbest(rows: list[ScoreRow]) -> ScoreRow:
    """Highest objective; ties go to the smallest rho, then gamma, then alpha."""
    return min(rows, key=lambda r: (-r.objective, r.rho, r.gamma, r.alpha))


def optimize_image(img: np.ndarray, gt: np.ndarray, grid: GridSpec,
                   base: PipelineParams | None = None,
                   precomputed: dict[Triple, ScoreRow] | None = None,
                   ) -> tuple[Triple, float, tuple[ScoreRow, ...]]:
    """Score every grid combination on one image and return the argmax.

    precomputed rows (from a resumed score table) are reused verbatim; only
    missing combinations are evaluated.
    """
    base = base if base is not None else PipelineParams()
    precomputed = precomputed or {}
    cache = _ThreadCache(img, base)
    rows: list[ScoreRow] = []
    for gamma, rho, alpha in grid.combinations():
        done = precomputed.get((gamma, rho, alpha))
        if done is not None:
            rows.append(done)
            continue
        seg = merge(cache.dark_open(rho, alpha), cache.bright_open(gamma, rho, alpha))
        cm = confusion(gt, seg)
        if not (cm.background_defined and cm.foreground_defined):
            raise ValueError("ground truth lacks a class; objective undefined")
        rows.append(ScoreRow(gamma=gamma, rho=rho, alpha=alpha,
                             x11=cm.x11, x22=cm.x22, objective=cm.x11 + cm.x22))
    best = _argbest(rows)
    return best.triple, best.objective, tuple(rows)


def median_lower(values) -> float | int:
    """Median taking the lower of the two middle values on even counts."""
    ordered = sorted(values)
    n = len(ordered)
    if n == 0:
        raise ValueError("median of empty sequence")
    return ordered[(n - 1) // 2]


def _snap(value, axis) -> float | int:
    """Nearest grid value; equidistant cases take the lower one."""
    return min(axis, key=lambda g: (abs(g - value), g))


def select_median_triple(bests: list[Triple], grid: GridSpec) -> Triple:
    """Per-dimension median of the per-image best triples, snapped to the grid."""
    gamma = _snap(median_lower([b[0] for b in bests]), grid.gammas)
    rho = _snap(median_lower([b[1] for b in bests]), grid.rhos)
    alpha = _snap(median_lower([b[2] for b in bests]), grid.alphas)
    return (gamma, int(rho), alpha)


def _optimize_entry(args) -> ImageResult:
    image_id, image_path, gt_path, grid, base, pre_rows = args
    img = load_rgb(image_path)
    gt = load_mask(gt_path)
    pre = {row.triple: row for row in pre_rows}
    best, best_obj, table = optimize_image(img, gt, grid, base, precomputed=pre)
    return ImageResult(image_id=image_id, best=best, best_objective=best_obj, table=table)


def optimize_dataset(manifest, grid: GridSpec,
                     base: PipelineParams | None = None,
                     workers: int = 1,
                     precomputed: dict[str, list[ScoreRow]] | None = None,
                     ) -> OptimizationResult:
    """Optimize every manifest entry and aggregate the bests by median.

    Entries need both an image and a ground-truth path.  Images are
    independent work items and fan out to a process pool when workers > 1;
    the result does not depend on the worker count.
    """
    base = base if base is not None else PipelineParams()
    precomputed = precomputed or {}
    entries = list(manifest.entries)
    if not entries:
        raise ValueError("manifest has no entries to optimize")
    for e in entries:
        if e.gt_path is None:
            raise ValueError(f"entry {e.image_id!r} has no ground-truth path")
    jobs = [
        (e.image_id, e.image_path, e.gt_path, grid, base,
         tuple(precomputed.get(e.image_id, ())))
        for e in entries
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_optimize_entry, jobs))
    else:
        results = [_optimize_entry(job) for job in jobs]
    selected = select_median_triple([r.best for r in results], grid)
    return OptimizationResult(
        per_image=tuple(results),
        selected=selected,
        selection_method="median-per-dimension",
        grid=grid,
    )


def write_score_csv(result: OptimizationResult, path: str | os.PathLike) -> None:
    """Persist all score tables, rows in canonical (image, gamma, rho, alpha) order."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(SCORE_CSV_FIELDS)
        for image in result.per_image:
            for row in image.table:
                writer.writerow([
                    image.image_id, repr(row.gamma), row.rho, repr(row.alpha),
                    repr(row.x11), repr(row.x22), repr(row.objective),
                ])


def read_score_csv(path: str | os.PathLike) -> dict[str, list[ScoreRow]]:
    """Load a persisted score table back into per-image rows."""
    out: dict[str, list[ScoreRow]] = {}
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != SCORE_CSV_FIELDS:
            raise ValueError(f"unexpected score CSV header in {path!r}: {header}")
        for rec in reader:
            image_id, gamma, rho, alpha, x11, x22, objective = rec
            out.setdefault(image_id, []).append(ScoreRow(
                gamma=float(gamma), rho=int(rho), alpha=float(alpha),
                x11=float(x11), x22=float(x22), objective=float(objective),
            ))
    return out


def result_document(result: OptimizationResult, grid_source: str = "default-even-spacing",
                    created: str | None = None) -> dict:
    """JSON-ready optimization summary with provenance."""
    gamma, rho, alpha = result.selected
    doc = {
        "selected": {"gamma": gamma, "rho": rho, "alpha": alpha},
        "selection_method": result.selection_method,
        "grid": {
            "gammas": list(result.grid.gammas),
            "rhos": list(result.grid.rhos),
            "alphas": list(result.grid.alphas),
        },
        "per_image": [
            {
                "image_id": r.image_id,
                "gamma": r.best[0],
                "rho": r.best[1],
                "alpha": r.best[2],
                "objective": r.best_objective,
            }
            for r in result.per_image
        ],
        "provenance": {
            "grid_source": grid_source,
            "objective": "x11 + x22 (column-normalized confusion percentages)",
        },
    }
    if created is not None:
        doc["provenance"]["created"] = created
    return doc
