"""Command-line surface for batch mask processing.

Subcommands: detect-parked, eval, errmask, augment, synth, validate.
Exit codes: 0 full success, 1 any processing failure, 2 bad invocation.

All outputs are written atomically, inputs are processed in sorted order,
and every random choice flows from an explicit --seed (default 0), so two
runs over the same inputs produce byte-identical output trees even when
file-level parallelism is enabled via --jobs.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence, TypeVar

from .augment import (
    apply_ops,
    decode_rgb,
    default_spec,
    encode_rgb,
    op_to_dict,
    sample_augmentation,
    spec_from_dict,
)
from .errmask import error_mask
from .errors import ParksegError
from .maskio import Mask, decode_mask, encode_mask
from .manifest import read_manifest, validate_manifest
from .metrics import (
    confusion,
    dice_per_class,
    foreground_accuracy_from_matrix,
    jaccard_per_class,
    macro_average,
)
from .metrics import ConfusionMatrix
from .palette import DEFAULT_PALETTE, Palette
from .parkdetect import detect_parked
from .report import (
    accuracy_series_figure,
    atomic_write_bytes,
    atomic_write_text,
    confusion_figure,
    csv_text,
    fmt_metric,
    json_text,
    metric_bars_figure,
    save_figure_png,
)
from .synthscene import generate_random, render, scene_to_dict, score_heuristic

T = TypeVar("T")
R = TypeVar("R")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_FAILURE


def _load_palette(path: str | None) -> Palette:
    if path is None:
        return DEFAULT_PALETTE
    return Palette.from_file(path)


def _png_files(directory: str) -> list[Path]:
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"not a directory: {directory}")
    return sorted(p for p in root.iterdir() if p.suffix.lower() == ".png")


def _image_files(directory: str) -> list[Path]:
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"not a directory: {directory}")
    exts = {".png", ".jpg", ".jpeg"}
    return sorted(p for p in root.iterdir() if p.suffix.lower() in exts)


def _stem_index(paths: Iterable[Path], label: str) -> dict[str, Path]:
    index: dict[str, Path] = {}
    for p in paths:
        if p.stem in index:
            raise ParksegError(f"duplicate {label} stem '{p.stem}': {index[p.stem]} and {p}")
        index[p.stem] = p
    return index


def _pair_by_stem(
    gt_dir: str, pred_dir: str
) -> tuple[list[tuple[str, Path, Path]], list[str]]:
    """Match files across two directories by stem; return pairs and orphans."""
    gt = _stem_index(_png_files(gt_dir), "ground-truth")
    pred = _stem_index(_png_files(pred_dir), "prediction")
    orphans = [f"{gt[s]} has no prediction" for s in sorted(gt.keys() - pred.keys())]
    orphans += [f"{pred[s]} has no ground truth" for s in sorted(pred.keys() - gt.keys())]
    pairs = [(s, gt[s], pred[s]) for s in sorted(gt.keys() & pred.keys())]
    return pairs, orphans


def _run_many(
    items: Sequence[T], worker: Callable[[T], R], jobs: int
) -> list[tuple[T, R | None, Exception | None]]:
    """Apply worker to every item, keeping input order; capture failures."""

    def safely(item: T) -> tuple[T, R | None, Exception | None]:
        try:
            return item, worker(item), None
        except (ParksegError, OSError, ValueError) as exc:
            return item, None, exc

    if jobs <= 1:
        return [safely(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(safely, items))


def _parse_mode(mode: str, palette: Palette) -> int | None:
    if mode == "all-foreground":
        return None
    if mode.startswith("class:"):
        name = mode[len("class:") :]
        return palette.by_name(name).class_id
    raise ValueError(f"mode must be 'all-foreground' or 'class:NAME', got {mode!r}")


# --------------------------------------------------------------------------
# subcommands


def cmd_detect_parked(args: argparse.Namespace) -> int:
    palette = _load_palette(args.palette)
    out = Path(args.out)
    try:
        files = [Path(p) for p in args.inputs]
        expanded: list[Path] = []
        for f in files:
            if f.is_dir():
                expanded.extend(_png_files(str(f)))
            else:
                expanded.append(f)
        expanded.sort()
    except (OSError, ParksegError) as exc:
        return _fail(str(exc))

    parked_class = None
    if args.parked_class is not None:
        try:
            parked_class = palette.by_name(args.parked_class).class_id
        except ParksegError as exc:
            return _fail(str(exc))

    def worker(path: Path):
        mask = decode_mask(path.read_bytes(), palette, tolerance=args.tolerance)
        relabeled, verdicts = detect_parked(
            mask, palette, kernel=args.kernel, parked_class=parked_class
        )
        atomic_write_bytes(out / f"{path.stem}_parked.png", encode_mask(relabeled, palette))
        return verdicts

    results = _run_many(expanded, worker, args.jobs)
    rows = []
    failed = False
    for path, verdicts, exc in results:
        if exc is not None:
            failed = True
            print(f"error: {path}: {exc}", file=sys.stderr)
            continue
        for v in verdicts:
            rows.append(
                (
                    path.stem,
                    v.component_id,
                    v.car_pixel_count,
                    v.background_votes,
                    v.road_votes,
                    int(v.reclassified),
                )
            )
    atomic_write_text(
        out / "verdicts.csv",
        csv_text(
            ("mask", "component", "car_pixels", "background_votes", "road_votes", "reclassified"),
            rows,
        ),
    )
    return EXIT_FAILURE if failed else EXIT_OK


def _eval_metric_row(stem: str, matrix: ConfusionMatrix, palette: Palette):
    background = palette.background_id()
    try:
        fg_acc = foreground_accuracy_from_matrix(matrix, background)
    except ParksegError:
        fg_acc = None
    dice = dice_per_class(matrix)
    jacc = jaccard_per_class(matrix)

    def macro(values, exclude):
        try:
            return macro_average(values, exclude=exclude)
        except ParksegError:
            return None

    macro_dice = macro(dice, (background,))
    macro_jacc = macro(jacc, (background,))
    row = [stem, fmt_metric(fg_acc)]
    for c in matrix.class_ids:
        row.append(fmt_metric(dice[c]))
        row.append(fmt_metric(jacc[c]))
    row.append(fmt_metric(macro_dice))
    row.append(fmt_metric(macro_jacc))
    count_rows = [
        (
            stem,
            palette.by_id(c).name,
            matrix.true_positives(c),
            matrix.false_positives(c),
            matrix.false_negatives(c),
            matrix.true_negatives(c),
        )
        for c in matrix.class_ids
    ]
    doc = {
        "foreground_accuracy": fg_acc,
        "counts": {
            palette.by_id(c).name: {
                "tp": matrix.true_positives(c),
                "fp": matrix.false_positives(c),
                "fn": matrix.false_negatives(c),
                "tn": matrix.true_negatives(c),
            }
            for c in matrix.class_ids
        },
        "dice": {palette.by_id(c).name: dice[c] for c in matrix.class_ids},
        "jaccard": {palette.by_id(c).name: jacc[c] for c in matrix.class_ids},
        "macro_dice": macro_dice,
        "macro_jaccard": macro_jacc,
        "macro_dice_with_background": macro(dice, ()),
        "macro_jaccard_with_background": macro(jacc, ()),
    }
    return row, doc, count_rows


def cmd_eval(args: argparse.Namespace) -> int:
    palette = _load_palette(args.palette)
    out = Path(args.out)
    try:
        pairs, orphans = _pair_by_stem(args.gt, args.pred)
    except (OSError, ParksegError) as exc:
        return _fail(str(exc))
    if orphans:
        for o in orphans:
            print(f"error: unpaired: {o}", file=sys.stderr)
        return EXIT_FAILURE

    def worker(pair: tuple[str, Path, Path]) -> ConfusionMatrix:
        _, gt_path, pred_path = pair
        gt = decode_mask(gt_path.read_bytes(), palette, tolerance=args.tolerance)
        pred = decode_mask(pred_path.read_bytes(), palette, tolerance=args.tolerance)
        return confusion(gt, pred, palette)

    results = _run_many(pairs, worker, args.jobs)
    failed = False
    rows = []
    count_rows = []
    per_image: dict[str, dict] = {}
    total = None
    for (stem, gt_path, pred_path), matrix, exc in results:
        if exc is not None:
            failed = True
            print(f"error: {stem} ({gt_path}, {pred_path}): {exc}", file=sys.stderr)
            continue
        row, doc, counts = _eval_metric_row(stem, matrix, palette)
        rows.append(row)
        count_rows.extend(counts)
        per_image[stem] = doc
        total = matrix.counts if total is None else total + matrix.counts
    if failed or total is None:
        if total is None:
            print("error: no pairs evaluated", file=sys.stderr)
        return EXIT_FAILURE

    aggregate = ConfusionMatrix(class_ids=palette.class_ids, counts=total)
    agg_row, agg_doc, agg_counts = _eval_metric_row("AGGREGATE", aggregate, palette)
    rows.append(agg_row)
    count_rows.extend(agg_counts)

    header = ["mask", "foreground_accuracy"]
    for c in palette.class_ids:
        name = palette.by_id(c).name
        header.append(f"dice_{name}")
        header.append(f"jaccard_{name}")
    header += ["macro_dice", "macro_jaccard"]
    atomic_write_text(out / "metrics.csv", csv_text(header, rows))
    atomic_write_text(
        out / "counts.csv",
        csv_text(("mask", "class", "tp", "fp", "fn", "tn"), count_rows),
    )
    atomic_write_text(
        out / "metrics.json",
        json_text({"per_image": per_image, "aggregate": agg_doc}),
    )
    save_figure_png(confusion_figure(aggregate, palette), out / "confusion_matrix.png")
    save_figure_png(
        metric_bars_figure(dice_per_class(aggregate), jaccard_per_class(aggregate), palette),
        out / "per_class_metrics.png",
    )
    return EXIT_OK


def cmd_errmask(args: argparse.Namespace) -> int:
    palette = _load_palette(args.palette)
    out = Path(args.out)
    try:
        class_id = _parse_mode(args.mode, palette)
    except (ValueError, ParksegError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        pairs, orphans = _pair_by_stem(args.gt, args.pred)
    except (OSError, ParksegError) as exc:
        return _fail(str(exc))
    if orphans:
        for o in orphans:
            print(f"error: unpaired: {o}", file=sys.stderr)
        return EXIT_FAILURE

    def worker(pair: tuple[str, Path, Path]) -> dict[str, int]:
        stem, gt_path, pred_path = pair
        gt = decode_mask(gt_path.read_bytes(), palette, tolerance=args.tolerance)
        pred = decode_mask(pred_path.read_bytes(), palette, tolerance=args.tolerance)
        image = error_mask(gt, pred, palette, class_id=class_id)
        atomic_write_bytes(out / f"{stem}_errors.png", image.to_png())
        return image.counts()

    results = _run_many(pairs, worker, args.jobs)
    failed = False
    rows = []
    for (stem, gt_path, pred_path), counts, exc in results:
        if exc is not None:
            failed = True
            print(f"error: {stem} ({gt_path}, {pred_path}): {exc}", file=sys.stderr)
            continue
        rows.append((stem, counts["white"], counts["red"], counts["green"], counts["black"]))
    atomic_write_text(
        out / "error_counts.csv",
        csv_text(("mask", "white", "red", "green", "black"), rows),
    )
    return EXIT_FAILURE if failed else EXIT_OK


def cmd_augment(args: argparse.Namespace) -> int:
    palette = _load_palette(args.palette)
    out = Path(args.out)
    if args.spec is not None:
        try:
            spec = spec_from_dict(json.loads(Path(args.spec).read_text()))
        except (OSError, ValueError, KeyError, ParksegError) as exc:
            return _fail(f"bad augmentation spec {args.spec}: {exc}")
    else:
        spec = default_spec(args.seed)
    try:
        images = _stem_index(_image_files(args.images), "image")
        masks = _stem_index(_png_files(args.masks), "mask")
    except (OSError, ParksegError) as exc:
        return _fail(str(exc))
    orphans = sorted(images.keys() ^ masks.keys())
    if orphans:
        for s in orphans:
            print(f"error: unpaired stem: {s}", file=sys.stderr)
        return EXIT_FAILURE

    stems = sorted(images)
    tasks = [
        (stem, k, pair_index * args.count + k)
        for pair_index, stem in enumerate(stems)
        for k in range(args.count)
    ]

    def worker(task: tuple[str, int, int]) -> dict:
        stem, k, index = task
        img = decode_rgb(images[stem].read_bytes())
        mask = decode_mask(masks[stem].read_bytes(), palette, tolerance=args.tolerance)
        ops = sample_augmentation(spec, index, mask.width, mask.height)
        aug_img, aug_mask = apply_ops(img, mask, ops)
        atomic_write_bytes(out / f"{stem}_aug{k}.png", encode_rgb(aug_img))
        atomic_write_bytes(out / f"{stem}_aug{k}_mask.png", encode_mask(aug_mask, palette))
        return {
            "source_image": str(images[stem]),
            "source_mask": str(masks[stem]),
            "output_image": f"{stem}_aug{k}.png",
            "output_mask": f"{stem}_aug{k}_mask.png",
            "seed": spec.seed,
            "index": index,
            "ops": [op_to_dict(op) for op in ops],
        }

    results = _run_many(tasks, worker, args.jobs)
    failed = False
    records = []
    for (stem, k, _), record, exc in results:
        if exc is not None:
            failed = True
            print(f"error: {stem} (variant {k}): {exc}", file=sys.stderr)
            continue
        records.append(record)
    atomic_write_text(out / "provenance.json", json_text(records))
    return EXIT_FAILURE if failed else EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    palette = _load_palette(args.palette)
    out = Path(args.out)
    seeds = [args.seed + i for i in range(args.count)]

    def worker(seed: int):
        spec = generate_random(
            seed,
            args.width,
            args.height,
            args.roads,
            args.cars,
            args.parked_fraction,
            args.margin,
        )
        mask, _ = render(spec, palette)
        score = score_heuristic(spec, kernel=args.kernel, palette=palette)
        atomic_write_bytes(out / f"scene_{seed}.png", encode_mask(mask, palette))
        atomic_write_text(out / f"scene_{seed}.json", json_text(scene_to_dict(spec)))
        return score

    results = _run_many(seeds, worker, args.jobs)
    failed = False
    rows = []
    accuracies: list[float | None] = []
    labels: list[str] = []
    total_cars = 0
    total_correct = 0
    empty_scenes = 0
    for seed, score, exc in results:
        if exc is not None:
            failed = True
            print(f"error: seed {seed}: {exc}", file=sys.stderr)
            continue
        rows.append((seed, score.total, score.correct, fmt_metric(score.accuracy)))
        labels.append(str(seed))
        accuracies.append(score.accuracy)
        total_cars += score.total
        total_correct += score.correct
        empty_scenes += int(score.total == 0)
    atomic_write_text(
        out / "scores.csv",
        csv_text(("seed", "cars", "correct", "accuracy"), rows),
    )
    aggregate = total_correct / total_cars if total_cars else None
    atomic_write_text(
        out / "summary.json",
        json_text(
            {
                "scenes": len(rows),
                "scenes_without_cars": empty_scenes,
                "total_cars": total_cars,
                "total_correct": total_correct,
                "aggregate_accuracy": aggregate,
            }
        ),
    )
    save_figure_png(
        accuracy_series_figure(labels, accuracies, "heuristic accuracy per scene"),
        out / "accuracy.png",
    )
    return EXIT_FAILURE if failed else EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    palette = _load_palette(args.palette)
    manifest_path = Path(args.manifest)
    try:
        entries = read_manifest(manifest_path)
    except (OSError, ValueError) as exc:
        return _fail(f"unreadable manifest {manifest_path}: {exc}")
    base_dir = Path(args.base_dir) if args.base_dir else manifest_path.parent
    violations = validate_manifest(
        entries, palette, tolerance=args.tolerance, base_dir=base_dir
    )
    if args.out is not None:
        atomic_write_text(
            Path(args.out) / "violations.csv",
            csv_text(
                ("kind", "path", "message"),
                [(v.kind, v.path, v.message) for v in violations],
            ),
        )
    for v in violations:
        print(f"violation: {v.kind}: {v.path}: {v.message}", file=sys.stderr)
    print(f"{len(entries)} entries, {len(violations)} violations")
    return EXIT_FAILURE if violations else EXIT_OK


# --------------------------------------------------------------------------
# parser


def _add_common(sub: argparse.ArgumentParser, *, out_required: bool = True) -> None:
    sub.add_argument("--palette", help="palette config JSON (default: built-in 4-class)")
    sub.add_argument("--out", required=out_required, help="output directory")
    sub.add_argument(
        "--tolerance",
        type=int,
        default=0,
        help="max RGB distance when decoding mask colors (default 0, exact)",
    )
    sub.add_argument(
        "--jobs", type=int, default=1, help="file-level parallel workers (default 1)"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parkseg",
        description="post-processing, scoring and tooling for color-coded "
        "segmentation masks of urban aerial imagery",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "detect-parked", help="split car components into parked and moving"
    )
    p.add_argument("inputs", nargs="+", help="mask PNGs or directories of them")
    p.add_argument("--kernel", type=int, default=15, help="odd vote kernel size (default 15)")
    p.add_argument(
        "--parked-class",
        help="palette class name to relabel parked cars to "
        "(default: the palette's parked_car role)",
    )
    _add_common(p)
    p.set_defaults(func=cmd_detect_parked)

    p = sub.add_parser("eval", help="score predicted masks against ground truth")
    p.add_argument("--gt", required=True, help="directory of ground-truth masks")
    p.add_argument("--pred", required=True, help="directory of predicted masks")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("errmask", help="render white/red/green error images")
    p.add_argument("--gt", required=True, help="directory of ground-truth masks")
    p.add_argument("--pred", required=True, help="directory of predicted masks")
    p.add_argument(
        "--mode",
        default="all-foreground",
        help="all-foreground or class:NAME (default all-foreground)",
    )
    _add_common(p)
    p.set_defaults(func=cmd_errmask)

    p = sub.add_parser("augment", help="write seeded augmented image/mask pairs")
    p.add_argument("--images", required=True, help="directory of photos")
    p.add_argument("--masks", required=True, help="directory of matching mask PNGs")
    p.add_argument("--count", type=int, default=1, help="variants per pair (default 1)")
    p.add_argument("--seed", type=int, default=0, help="pipeline seed (default 0)")
    p.add_argument("--spec", help="augmentation pipeline JSON (default: full pipeline)")
    _add_common(p)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("synth", help="generate and score synthetic scenes")
    p.add_argument("--count", type=int, default=10, help="number of scenes (default 10)")
    p.add_argument("--seed", type=int, default=0, help="first scene seed (default 0)")
    p.add_argument("--width", type=int, default=96)
    p.add_argument("--height", type=int, default=96)
    p.add_argument("--roads", type=int, default=2)
    p.add_argument("--cars", type=int, default=4)
    p.add_argument("--parked-fraction", type=float, default=0.5)
    p.add_argument("--margin", type=int, default=7, help="separation margin (default 7)")
    p.add_argument("--kernel", type=int, default=15, help="odd vote kernel size (default 15)")
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("validate", help="check a dataset manifest")
    p.add_argument("--manifest", required=True, help="CSV of image,mask,split rows")
    p.add_argument(
        "--base-dir", help="directory paths are relative to (default: manifest's)"
    )
    _add_common(p, out_required=False)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "kernel", 1) % 2 == 0 or getattr(args, "kernel", 1) < 1:
        parser.error(f"--kernel must be odd and positive, got {args.kernel}")
    if getattr(args, "jobs", 1) < 1:
        parser.error(f"--jobs must be at least 1, got {args.jobs}")
    try:
        return args.func(args)
    except ParksegError as exc:
        return _fail(str(exc))


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
