"""Dataset manifests: delimited records pairing images with masks per split."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .errors import ParksegError
from .maskio import decode_mask
from .palette import Palette

SPLITS = ("train", "valid", "test")

# Violation kinds, reported as data rather than raised.
DUPLICATE_ACROSS_SPLITS = "duplicate-across-splits"
MISSING_FILE = "missing-file"
UNDECODABLE_MASK = "undecodable-mask"
UNKNOWN_SPLIT = "unknown-split"


@dataclass(frozen=True)
class ManifestEntry:
    image_path: str
    mask_path: str
    split: str


@dataclass(frozen=True)
class Violation:
    kind: str
    path: str
    message: str


def read_manifest(path: str | Path, delimiter: str = ",") -> list[ManifestEntry]:
    """Parse a manifest file: one image_path, mask_path, split record per line."""
    entries = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter=delimiter), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            image_path, mask_path, split = (cell.strip() for cell in row)
            entries.append(ManifestEntry(image_path, mask_path, split))
    return entries


def validate_manifest(
    entries: list[ManifestEntry],
    palette: Palette,
    *,
    tolerance: int = 0,
    base_dir: str | Path | None = None,
) -> list[Violation]:
    """Check split disjointness, file existence, and mask decodability.

    Returns an empty list iff the manifest is clean. Violations are data,
    not exceptions, so a single pass reports every problem at once.
    """
    violations: list[Violation] = []
    base = Path(base_dir) if base_dir is not None else None

    def resolve(p: str) -> Path:
        path = Path(p)
        if base is not None and not path.is_absolute():
            path = base / path
        return path

    splits_seen: dict[str, set[str]] = {}
    for e in entries:
        if e.split not in SPLITS:
            violations.append(
                Violation(UNKNOWN_SPLIT, e.image_path, f"unknown split '{e.split}'")
            )
        splits_seen.setdefault(e.image_path, set()).add(e.split)

    for image_path, splits in splits_seen.items():
        if len(splits) > 1:
            listed = ", ".join(sorted(splits))
            violations.append(
                Violation(
                    DUPLICATE_ACROSS_SPLITS,
                    image_path,
                    f"image appears in multiple splits: {listed}",
                )
            )

    for e in entries:
        image = resolve(e.image_path)
        mask = resolve(e.mask_path)
        if not image.is_file():
            violations.append(Violation(MISSING_FILE, e.image_path, "image file not found"))
        if not mask.is_file():
            violations.append(Violation(MISSING_FILE, e.mask_path, "mask file not found"))
            continue
        try:
            decode_mask(mask.read_bytes(), palette, tolerance)
        except ParksegError as exc:
            violations.append(Violation(UNDECODABLE_MASK, e.mask_path, str(exc)))

    return violations
