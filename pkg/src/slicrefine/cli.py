"""Command-line interface: segment, superpixels, evaluate, bench.

Exit codes are the only success/failure channel: 0 on success, 1 on I/O or
validation failure, 2 when the guidance mask carries no usable signal.
Output files are written to a temporary name and renamed on success, so a
failing run leaves nothing partial behind.
"""

from __future__ import annotations

import argparse
import json
import os
import resource
import statistics
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import metrics
from .colorspace import srgb_to_lab
from .errors import DecodeError, NoGuidanceSignalError, SlicRefineError
from .guidance import RatioConfig, degrade_ground_truth
from .imagecore import (
    load_image,
    load_mask,
    normalize,
    resize_mask_nearest,
    save_image,
    save_labels_pgm,
    save_mask,
)
from .refine import (
    RefineConfig,
    hybrid_segment,
    parse_run_report,
    score_superpixels,
    select_best,
    synthesize_mask,
)
from .slic import SlicConfig, boundary_overlay, gaussian_smooth, slic
from .synthetic import lesion_image

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_NO_GUIDANCE = 2


class _Parser(argparse.ArgumentParser):
    # exit code 2 is reserved for the no-guidance-signal outcome, so
    # argument errors map to 1 instead of argparse's default 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_FAILURE)


def _atomic_write(path: Path, writer) -> None:
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    # temp name keeps the real extension last so format-by-suffix writers work
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp" + path.suffix)
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fail(message: str) -> int:
    print(f"slicrefine: error: {message}", file=sys.stderr)
    return EXIT_FAILURE


def _add_slic_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--compactness", type=float, default=10.0, help="color/space balance m (default 10)")
    p.add_argument("--sigma", type=float, default=1.75, help="Gaussian smoothing sigma (default 1.75)")
    p.add_argument("--max-iter", type=int, default=10, help="iteration cap (default 10)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="slicrefine", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", parents=[], help="refine a guidance mask on a full-resolution image")
    p.add_argument("image", help="input RGB image (PNG or PPM)")
    p.add_argument("guidance", help="guidance mask (any resolution, mask PNG convention)")
    p.add_argument("out_mask", help="output mask PNG; a .report.txt sidecar is written next to it")
    _add_slic_flags(p)
    p.add_argument("--calibration", type=float, default=1.0, help="area-ratio calibration factor C")
    p.add_argument("--selection", choices=["single", "threshold"], default="single")
    p.add_argument("--tau", type=float, default=None, help="coverage cutoff for threshold selection")
    p.add_argument("--mask-channels", choices=["strict", "collapse"], default="strict")

    p = sub.add_parser("superpixels", help="run SLIC alone and write a boundary overlay")
    p.add_argument("image", help="input RGB image")
    p.add_argument("out_overlay", help="overlay PNG; a .labels.pgm raster is written next to it")
    p.add_argument("--n-segments", type=int, required=True)
    _add_slic_flags(p)

    p = sub.add_parser("evaluate", help="score predicted masks against ground truth")
    p.add_argument("pred_dir", help="directory of predicted mask PNGs")
    p.add_argument("gt_dir", help="directory of ground-truth mask PNGs with matching names")
    p.add_argument("out_jsonl", help="per-image metrics, one JSON object per line")
    p.add_argument("--dice-good", type=float, default=metrics.DICE_GOOD)
    p.add_argument("--dice-moderate", type=float, default=metrics.DICE_MODERATE)

    p = sub.add_parser("bench", help="time the pipeline on a seeded synthetic image")
    p.add_argument("--size", type=int, default=1024)
    p.add_argument("--n-segments", type=int, default=100)
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--repeat", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    return parser


def cmd_segment(args) -> int:
    try:
        cfg = RefineConfig(
            selection_mode="single-best" if args.selection == "single" else "threshold",
            tau=args.tau,
            slic=SlicConfig(n_segments=1, compactness=args.compactness, sigma=args.sigma, max_iter=args.max_iter),
            ratio=RatioConfig(calibration=args.calibration),
        )
        cfg.validate()
    except ValueError as exc:
        return _fail(str(exc))
    try:
        image = load_image(args.image)
        guidance = load_mask(args.guidance, channels=args.mask_channels)
    except (FileNotFoundError, DecodeError, ValueError) as exc:
        return _fail(str(exc))
    try:
        mask, report = hybrid_segment(image, guidance, cfg)
    except NoGuidanceSignalError as exc:
        print(f"slicrefine: no guidance signal: {exc}", file=sys.stderr)
        return EXIT_NO_GUIDANCE
    out = Path(args.out_mask)
    try:
        _atomic_write(out, lambda tmp: save_mask(mask, tmp))
        sidecar = out.with_suffix(out.suffix + ".report.txt")
        _atomic_write(sidecar, lambda tmp: Path(tmp).write_text(report.to_text()))
    except OSError as exc:
        return _fail(str(exc))
    return EXIT_OK


def cmd_superpixels(args) -> int:
    try:
        cfg = SlicConfig(
            n_segments=args.n_segments,
            compactness=args.compactness,
            sigma=args.sigma,
            max_iter=args.max_iter,
        )
        cfg.validate()
    except ValueError as exc:
        return _fail(str(exc))
    try:
        image = load_image(args.image)
    except (FileNotFoundError, DecodeError, ValueError) as exc:
        return _fail(str(exc))
    h, w = image.shape[:2]
    if cfg.n_segments > w * h:
        return _fail(f"n_segments={cfg.n_segments} exceeds pixel count {w * h}")
    lab = srgb_to_lab(normalize(image))
    smoothed = gaussian_smooth(lab, cfg.sigma)
    labeling = slic(smoothed, cfg)
    overlay = boundary_overlay(image, labeling.labels)
    out = Path(args.out_overlay)
    labels_path = out.with_suffix(".labels.pgm")
    try:
        _atomic_write(out, lambda tmp: save_image(overlay, tmp))
        _atomic_write(labels_path, lambda tmp: save_labels_pgm(labeling.labels, tmp))
    except OSError as exc:
        return _fail(str(exc))
    return EXIT_OK


def _metric_row(name: str, pred_path: Path, gt_path: Path) -> dict:
    pred = load_mask(pred_path)
    gt = load_mask(gt_path)
    rep = metrics.evaluate_pair(pred, gt)
    row = {
        "image": name,
        "iou": rep.iou,
        "dice": rep.dice,
        "precision": rep.precision,
        "sensitivity": rep.sensitivity,
        "specificity": rep.specificity,
        "vs": rep.volumetric_similarity,
        "hausdorff_px": rep.hausdorff_px,
        "ns": None,
        "best_r": None,
    }
    sidecar = pred_path.with_suffix(pred_path.suffix + ".report.txt")
    if sidecar.exists():
        info = parse_run_report(sidecar.read_text())
        if "ns" in info:
            row["ns"] = int(info["ns"])
        if "best_r" in info:
            row["best_r"] = float(info["best_r"])
    return row


def cmd_evaluate(args) -> int:
    pred_dir = Path(args.pred_dir)
    gt_dir = Path(args.gt_dir)
    if not pred_dir.is_dir():
        return _fail(f"not a directory: {pred_dir}")
    if not gt_dir.is_dir():
        return _fail(f"not a directory: {gt_dir}")
    pred_names = {p.name for p in pred_dir.glob("*.png")}
    gt_names = {p.name for p in gt_dir.glob("*.png")}
    for name in sorted(pred_names - gt_names):
        return _fail(f"prediction {name} has no ground-truth counterpart in {gt_dir}")
    for name in sorted(gt_names - pred_names):
        return _fail(f"ground truth {name} has no prediction counterpart in {pred_dir}")
    if not pred_names:
        return _fail(f"no mask PNGs found in {pred_dir}")

    rows = []
    try:
        for name in sorted(pred_names):
            rows.append(_metric_row(name, pred_dir / name, gt_dir / name))
    except (DecodeError, ValueError, SlicRefineError) as exc:
        return _fail(str(exc))

    def write_jsonl(tmp):
        with open(tmp, "w") as fh:
            for row in rows:
                fh.write(json.dumps(row, sort_keys=True) + "\n")

    try:
        _atomic_write(Path(args.out_jsonl), write_jsonl)
    except OSError as exc:
        return _fail(str(exc))

    summary = _summarize(rows, good=args.dice_good, moderate=args.dice_moderate)
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def _summarize(rows: list[dict], good: float, moderate: float) -> dict:
    metric_names = ["iou", "dice", "precision", "sensitivity", "specificity", "vs", "hausdorff_px"]
    summary: dict = {"n_images": len(rows), "metrics": {}}
    for m in metric_names:
        values = [r[m] for r in rows]
        stats = metrics.mean_ci95(values)
        stats["n_undefined"] = sum(1 for v in values if v is None)
        summary["metrics"][m] = stats

    groups: dict[str, list[float]] = {"good": [], "moderate": [], "poor": []}
    for r in rows:
        groups[metrics.quality_group(r["dice"], good=good, moderate=moderate)].append(r["dice"])
    summary["groups"] = {
        name: dict(metrics.mean_ci95(vals), count=len(vals)) for name, vals in groups.items()
    }
    nonempty = [vals for vals in groups.values() if vals]
    if len(nonempty) >= 2 and sum(len(v) for v in nonempty) >= 3:
        h_stat, p = metrics.kruskal_wallis(nonempty)
        summary["kruskal_wallis"] = {"h": h_stat, "p": p}
    else:
        summary["kruskal_wallis"] = None
    return summary


def cmd_bench(args) -> int:
    if args.size < 64:
        return _fail(f"--size must be >= 64, got {args.size}")
    if args.n_segments < 1 or args.repeat < 1 or args.iters < 1:
        return _fail("--n-segments, --iters and --repeat must all be >= 1")
    if args.n_segments > args.size * args.size:
        return _fail(f"--n-segments {args.n_segments} exceeds pixel count")

    samples: dict[str, list[float]] = {"colorspace": [], "smooth": [], "slic": [], "refine": [], "total": []}
    for rep in range(args.repeat):
        rng = np.random.default_rng(args.seed)
        image, gt = lesion_image(args.size, rng)
        guidance = degrade_ground_truth(gt, 4, 1)
        t_total = time.perf_counter()

        t0 = time.perf_counter()
        lab = srgb_to_lab(normalize(image))
        samples["colorspace"].append((time.perf_counter() - t0) * 1000.0)

        t0 = time.perf_counter()
        smoothed = gaussian_smooth(lab, 1.75)
        samples["smooth"].append((time.perf_counter() - t0) * 1000.0)
        del lab

        cfg = SlicConfig(n_segments=args.n_segments, max_iter=args.iters, residual_tol=0.0)
        t0 = time.perf_counter()
        labeling = slic(smoothed, cfg)
        samples["slic"].append((time.perf_counter() - t0) * 1000.0)

        t0 = time.perf_counter()
        resized = resize_mask_nearest(guidance, args.size, args.size)
        scores = score_superpixels(labeling, resized)
        try:
            synthesize_mask(labeling, [select_best(scores)])
        except NoGuidanceSignalError:
            pass  # scoring cost is what is being measured
        samples["refine"].append((time.perf_counter() - t0) * 1000.0)
        samples["total"].append((time.perf_counter() - t_total) * 1000.0)

    print(f"size={args.size} n_segments={args.n_segments} iters={args.iters} repeat={args.repeat} seed={args.seed}")
    for stage in ["colorspace", "smooth", "slic", "refine", "total"]:
        vals = samples[stage]
        print(f"stage={stage} min_ms={min(vals):.1f} median_ms={statistics.median(vals):.1f}")
    peak_mb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0
    print(f"peak_rss_mb={peak_mb:.1f}")
    return EXIT_OK


_COMMANDS = {
    "segment": cmd_segment,
    "superpixels": cmd_superpixels,
    "evaluate": cmd_evaluate,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
