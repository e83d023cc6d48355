"""Batch command-line front end.

Subcommands: segment, optimize, evaluate, compare, synth.  Exit codes:
0 success, 1 input error, 2 numerical failure (level set blew up).

Flag precedence is flag > config file > built-in default.  Timing lines and
timestamps go to a per-command log file in the output directory; every other
output (masks, CSV rows, JSON values) is deterministic, and the worker count
never changes emitted data.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import evaluation, image, optimizer, synth
from .chanvese import NumericalBlowupError
from .manifest import Config, DatasetManifest, ManifestEntry, load_config, load_grid_file, load_manifest
from .pipeline import PipelineParams, segment

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERICAL = 2


class _InputError(Exception):
    pass


def _load_cfg(args) -> Config:
    cfg = load_config(args.config) if args.config else Config()
    if getattr(args, "workers", None) is not None:
        cfg = Config(**{**cfg.__dict__, "workers": args.workers})
    if getattr(args, "out", None) is not None:
        cfg = Config(**{**cfg.__dict__, "out": args.out})
    return cfg


def _params_from(args, cfg: Config) -> PipelineParams:
    gamma, rho, alpha = args.gamma, args.rho, args.alpha
    params_file = getattr(args, "params_file", None)
    if params_file:
        with open(params_file) as f:
            doc = json.load(f)
        sel = doc["selected"]
        gamma = gamma if gamma is not None else sel["gamma"]
        rho = rho if rho is not None else sel["rho"]
        alpha = alpha if alpha is not None else sel["alpha"]
    return cfg.pipeline_params(gamma=gamma, rho=rho, alpha=alpha,
                               remove=getattr(args, "remove", None))


def _entries_from(args) -> list[ManifestEntry]:
    entries: list[ManifestEntry] = []
    if getattr(args, "manifest", None):
        entries.extend(load_manifest(args.manifest).entries)
    for path in getattr(args, "images", []) or []:
        stem = os.path.splitext(os.path.basename(path))[0]
        entries.append(ManifestEntry(image_path=path, gt_path=None, image_id=stem))
    manifest = DatasetManifest(entries=tuple(entries))  # enforces unique ids
    return list(manifest.entries)


def _log(out_dir: str, name: str, lines: list[str]) -> None:
    with open(os.path.join(out_dir, name), "a") as f:
        for line in lines:
            stamp = datetime.now(timezone.utc).isoformat()
            f.write(f"{stamp} {line}\n")


def _segment_one(job) -> tuple[str, str | None, float, str | None]:
    """Segment one entry; returns (image_id, error_kind, seconds, message)."""
    entry_id, image_path, params, out_path = job
    start = time.perf_counter()
    try:
        img = image.load_rgb(image_path)
        mask = segment(img, params)
        image.save_mask(mask, out_path)
    except NumericalBlowupError as exc:
        return entry_id, "numerical", time.perf_counter() - start, str(exc)
    except (FileNotFoundError, ValueError, OSError) as exc:
        return entry_id, "input", time.perf_counter() - start, str(exc)
    return entry_id, None, time.perf_counter() - start, None


def cmd_segment(args) -> int:
    cfg = _load_cfg(args)
    params = _params_from(args, cfg)
    try:
        entries = _entries_from(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not entries:
        print("error: no input images given", file=sys.stderr)
        return EXIT_INPUT
    os.makedirs(cfg.out, exist_ok=True)
    jobs = [
        (e.image_id, e.image_path, params, os.path.join(cfg.out, f"{e.image_id}_mask.png"))
        for e in entries
    ]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_segment_one, jobs))
    else:
        results = [_segment_one(job) for job in jobs]
    failures = [(rid, kind, msg) for rid, kind, _, msg in results if kind]
    _log(cfg.out, "segment.log",
         [f"image={rid} seconds={secs:.3f} status={kind or 'ok'}"
          for rid, kind, secs, _ in results])
    if failures:
        with open(os.path.join(cfg.out, "failures.csv"), "w") as f:
            f.write("image_id,kind,message\n")
            for rid, kind, msg in failures:
                f.write(f"{rid},{kind},{(msg or '').replace(chr(10), ' ')}\n")
        for rid, kind, msg in failures:
            print(f"error: {rid}: {msg}", file=sys.stderr)
        if any(kind == "numerical" for _, kind, _ in failures):
            return EXIT_NUMERICAL
        return EXIT_INPUT
    return EXIT_OK


def cmd_optimize(args) -> int:
    cfg = _load_cfg(args)
    try:
        grid = load_grid_file(args.grid_file) if args.grid_file else cfg.grid()
        manifest = load_manifest(args.manifest)
        if not manifest.entries:
            raise _InputError("manifest is empty")
        manifest.require_ground_truth()
    except (OSError, ValueError, _InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    os.makedirs(cfg.out, exist_ok=True)
    base = cfg.pipeline_params(gamma=None, rho=None, alpha=None, remove=args.remove)
    scores_path = os.path.join(cfg.out, "scores.csv")
    precomputed = None
    if os.path.exists(scores_path):
        try:
            precomputed = optimizer.read_score_csv(scores_path)
        except ValueError as exc:
            print(f"error: cannot resume from {scores_path}: {exc}", file=sys.stderr)
            return EXIT_INPUT
    start = time.perf_counter()
    try:
        result = optimizer.optimize_dataset(manifest, grid, base=base,
                                            workers=cfg.workers, precomputed=precomputed)
    except NumericalBlowupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    optimizer.write_score_csv(result, scores_path)
    grid_source = "user" if (args.grid_file or cfg.gammas or cfg.rhos or cfg.alphas) \
        else "default-even-spacing (the original discrete values are not recoverable)"
    doc = optimizer.result_document(result, grid_source=grid_source,
                                    created=datetime.now(timezone.utc).isoformat())
    with open(os.path.join(cfg.out, "result.json"), "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")
    _log(cfg.out, "optimize.log",
         [f"images={len(result.per_image)} grid={grid.size} "
          f"seconds={time.perf_counter() - start:.3f} "
          f"selected=({result.selected[0]},{result.selected[1]},{result.selected[2]})"])
    return EXIT_OK


def _evaluate_one(job) -> tuple[str, str | None, np.ndarray | None, np.ndarray | None, float]:
    entry_id, image_path, gt_path, params, masks_dir, passthrough = job
    start = time.perf_counter()
    try:
        gt = image.load_mask(gt_path)
        if passthrough:
            seg = gt.copy()
        elif masks_dir is not None:
            seg = image.load_mask(os.path.join(masks_dir, f"{entry_id}_mask.png"))
        else:
            seg = segment(image.load_rgb(image_path), params)
    except NumericalBlowupError as exc:
        return entry_id, f"numerical: {exc}", None, None, time.perf_counter() - start
    except (FileNotFoundError, ValueError, OSError) as exc:
        return entry_id, f"input: {exc}", None, None, time.perf_counter() - start
    return entry_id, None, gt, seg, time.perf_counter() - start


def cmd_evaluate(args) -> int:
    cfg = _load_cfg(args)
    try:
        params = _params_from(args, cfg)
        manifest = load_manifest(args.manifest)
        if not manifest.entries:
            raise _InputError("manifest is empty")
        manifest.require_ground_truth()
    except (OSError, ValueError, _InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    os.makedirs(cfg.out, exist_ok=True)
    jobs = [
        (e.image_id, e.image_path, e.gt_path, params, args.masks, args.passthrough_gt)
        for e in manifest.entries
    ]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_evaluate_one, jobs))
    else:
        results = [_evaluate_one(job) for job in jobs]
    errors = [(rid, msg) for rid, msg, _, _, _ in results if msg]
    if errors:
        for rid, msg in errors:
            print(f"error: {rid}: {msg}", file=sys.stderr)
        if any(msg.startswith("numerical") for _, msg in errors):
            return EXIT_NUMERICAL
        return EXIT_INPUT
    rows = []
    matrices = []
    for rid, _, gt, seg, _ in results:
        cm = evaluation.confusion(gt, seg)
        matrices.append(cm)
        rows.append(evaluation.metrics_row(rid, cm))
        image.save_mask(seg, os.path.join(cfg.out, f"{rid}_seg.png"))
        ov = evaluation.overlay(gt, seg)
        from PIL import Image as _PILImage

        _PILImage.fromarray(ov, mode="RGB").save(
            os.path.join(cfg.out, f"{rid}_overlay.png"), format="PNG")
    evaluation.write_metrics_csv(rows, os.path.join(cfg.out, "metrics.csv"))
    evaluation.write_summary_json(evaluation.aggregate(matrices),
                                  os.path.join(cfg.out, "summary.json"))
    _log(cfg.out, "evaluate.log",
         [f"image={rid} seconds={secs:.3f}" for rid, _, _, _, secs in results])
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        gt = image.load_mask(args.gt)
        seg = image.load_mask(args.seg)
        ov = evaluation.overlay(gt, seg)
    except (FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    from PIL import Image as _PILImage

    os.makedirs(os.path.dirname(os.path.abspath(args.out_path)), exist_ok=True)
    _PILImage.fromarray(ov, mode="RGB").save(args.out_path, format="PNG")
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        spec = synth.SceneSpec(
            seed=args.seed, width=args.width, height=args.height,
            n_spots=args.n_spots, spot_intensity=args.spot_intensity,
            background_intensity=args.background_intensity,
            lighting=args.lighting, noise_sigma=args.noise_sigma,
        )
        scene = synth.generate_scene(spec)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    os.makedirs(args.out, exist_ok=True)
    base = os.path.join(args.out, f"scene-{args.seed}")
    from PIL import Image as _PILImage

    _PILImage.fromarray(scene.image, mode="RGB").save(base + ".png", format="PNG")
    image.save_mask(scene.mask, base + "_mask.png")
    with open(base + ".json", "w") as f:
        json.dump(synth.spec_document(scene), f, indent=2, sort_keys=True)
        f.write("\n")
    return EXIT_OK


def _add_common(p, *, params: bool = False, manifest: bool = False):
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--out", help="output directory (default: 'out' or config)")
    p.add_argument("--workers", type=int, help="parallel worker processes")
    if params:
        p.add_argument("--gamma", type=float, help="power-law exponent for the bright thread")
        p.add_argument("--rho", type=int, help="level-set iteration count")
        p.add_argument("--alpha", type=float, help="area-opening fraction of w*h")
        p.add_argument("--remove", choices=["large", "small"],
                       help="which components the area opening deletes (default large)")
    if manifest:
        p.add_argument("--manifest", help="dataset manifest CSV/TSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spotseg",
                                     description="Two-thread spot segmentation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment images and write mask PNGs")
    _add_common(p, params=True, manifest=True)
    p.add_argument("images", nargs="*", help="image files (besides --manifest entries)")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("optimize", help="grid-search (gamma, rho, alpha) against ground truth")
    _add_common(p, manifest=True)
    p.add_argument("--grid-file", help="grid override file (gammas/rhos/alphas keys)")
    p.add_argument("--remove", choices=["large", "small"])
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("evaluate", help="score segmentations against ground truth")
    _add_common(p, params=True, manifest=True)
    p.add_argument("--params-file", help="result.json from 'optimize'; flags still override")
    p.add_argument("--masks", help="directory of precomputed <id>_mask.png files")
    p.add_argument("--passthrough-gt", action="store_true",
                   help="testing aid: score the ground truth against itself")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="write the red/yellow/green overlay for two masks")
    p.add_argument("gt", help="ground-truth mask PNG")
    p.add_argument("seg", help="segmentation mask PNG")
    p.add_argument("out_path", help="output overlay PNG")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", help="generate a synthetic scene with ground truth")
    p.add_argument("--out", default="out")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--n-spots", type=int, default=8)
    p.add_argument("--spot-intensity", type=float, default=0.25)
    p.add_argument("--background-intensity", type=float, default=0.75)
    p.add_argument("--lighting", choices=list(synth.LIGHTING_CLASSES), default="ideal")
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericalBlowupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def run() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    run()
