"""Palette-PNG mask codec and per-class pixel tallies.

Masks are persisted as 8-bit RGB PNGs where every pixel carries the exact
palette color of its class. Decoding optionally tolerates near-palette
colors (anti-aliased annotation edges) via a nearest-color match bounded by
a Euclidean RGB distance.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import (
    AmbiguousColorError,
    MalformedImageError,
    UnknownClassIdError,
    UnknownColorError,
)
from .palette import Palette


@dataclass(frozen=True, eq=False)
class Mask:
    """A 2-D grid of class ids, immutable after construction."""

    labels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.labels, copy=True)
        if arr.ndim != 2:
            raise ValueError("mask labels must be a 2-D array")
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError("mask labels must have an integer dtype")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("mask dimensions must be at least 1x1")
        if arr.size and int(arr.min()) < 0:
            raise ValueError("mask labels must be non-negative")
        arr.flags.writeable = False
        object.__setattr__(self, "labels", arr)

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Mask):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)


def _pack(rgb: np.ndarray) -> np.ndarray:
    r = rgb[..., 0].astype(np.uint32)
    g = rgb[..., 1].astype(np.uint32)
    b = rgb[..., 2].astype(np.uint32)
    return (r << 16) | (g << 8) | b


def decode_mask(png_bytes: bytes, palette: Palette, tolerance: int = 0) -> Mask:
    """Decode PNG bytes to a mask by mapping pixel colors to class ids.

    With tolerance 0 every pixel must carry an exact palette color. With a
    positive tolerance each pixel maps to the nearest palette color within
    that Euclidean RGB distance; a tie at the minimum is an error.
    """
    if tolerance < 0:
        raise ValueError("tolerance must be non-negative")
    try:
        img = Image.open(io.BytesIO(png_bytes))
        img.load()
        rgb = np.asarray(img.convert("RGB"), dtype=np.uint8)
    except MalformedImageError:
        raise
    except Exception as exc:
        raise MalformedImageError(str(exc)) from exc

    height, width = rgb.shape[:2]
    packed = _pack(rgb).ravel()
    unique, inverse = np.unique(packed, return_inverse=True)

    colors = palette.colors_array().astype(np.int64)
    exact = {int(p): e.class_id for p, e in zip(_pack(colors), palette.entries)}

    ids_for_unique = np.empty(unique.shape[0], dtype=np.uint8)
    for i, p in enumerate(unique):
        p = int(p)
        if p in exact:
            ids_for_unique[i] = exact[p]
            continue
        pixel = np.array([(p >> 16) & 0xFF, (p >> 8) & 0xFF, p & 0xFF], dtype=np.int64)
        x, y = _first_occurrence(packed, p, width)
        rgb_t = (int(pixel[0]), int(pixel[1]), int(pixel[2]))
        if tolerance == 0:
            raise UnknownColorError(x, y, rgb_t, tolerance)
        d2 = ((colors - pixel) ** 2).sum(axis=1)
        best = int(d2.min())
        if best > tolerance * tolerance:
            raise UnknownColorError(x, y, rgb_t, tolerance)
        nearest = np.flatnonzero(d2 == best)
        if nearest.size > 1:
            tied = tuple(palette.entries[j].class_id for j in nearest)
            raise AmbiguousColorError(x, y, rgb_t, tied)
        ids_for_unique[i] = palette.entries[int(nearest[0])].class_id

    labels = ids_for_unique[inverse].reshape(height, width)
    return Mask(labels)


def _first_occurrence(packed: np.ndarray, value: int, width: int) -> tuple[int, int]:
    flat = int(np.argmax(packed == value))
    return flat % width, flat // width


def encode_mask(mask: Mask, palette: Palette) -> bytes:
    """Encode a mask as a PNG with the exact palette color per pixel."""
    validate_labels(mask, palette)
    lut = np.zeros((256, 3), dtype=np.uint8)
    for e in palette.entries:
        lut[e.class_id] = e.color
    rgb = lut[mask.labels]
    buf = io.BytesIO()
    Image.fromarray(rgb, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def validate_labels(mask: Mask, palette: Palette) -> None:
    """Raise UnknownClassIdError if any label is absent from the palette."""
    present = np.unique(mask.labels)
    known = set(palette.class_ids)
    for v in present:
        if int(v) not in known:
            raise UnknownClassIdError(f"mask contains label {int(v)} not in palette")


def class_histogram(mask: Mask) -> dict[int, int]:
    """Pixel count per class id present in the mask."""
    values, counts = np.unique(mask.labels, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}
