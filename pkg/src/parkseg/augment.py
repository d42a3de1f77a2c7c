"""Seeded image+mask augmentation: flips, quarter turns, zoom, lighting, shadows.

Geometric ops transform the photo and its label mask with the same pixel
map; photometric ops touch the photo only. Randomized pipelines are
described by templates whose free parameters are drawn from a generator
keyed on (seed, index), so any augmented sample can be reproduced exactly.

Images are plain (H, W, 3) uint8 arrays throughout.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    BadFactorError,
    BadScaleError,
    DimensionMismatchError,
    MalformedImageError,
)
from .maskio import Mask

# --------------------------------------------------------------------------
# concrete ops


@dataclass(frozen=True)
class HFlip:
    pass


@dataclass(frozen=True)
class VFlip:
    pass


@dataclass(frozen=True)
class Rot90:
    """k quarter turns counterclockwise."""

    k: int = 1


@dataclass(frozen=True)
class Zoom:
    """Crop a scale-sized window centered near (cx, cy), resize back.

    The window is clamped into the canvas, so off-center requests near an
    edge slide inward rather than failing. scale 1.0 is the identity.
    """

    scale: float
    cx: float
    cy: float

    def __post_init__(self) -> None:
        if not 0.0 < self.scale <= 1.0:
            raise BadScaleError(f"zoom scale must be in (0, 1], got {self.scale}")


@dataclass(frozen=True)
class Brightness:
    factor: float

    def __post_init__(self) -> None:
        if self.factor <= 0:
            raise BadFactorError(f"brightness factor must be positive, got {self.factor}")


@dataclass(frozen=True)
class Shadow:
    """Darken pixels whose centers fall inside a polygon.

    vertices are (x, y) pairs in image coordinates; the polygon is closed
    implicitly. Parts outside the canvas simply shade nothing.
    """

    vertices: tuple[tuple[float, float], ...]
    attenuation: float

    def __post_init__(self) -> None:
        if not 0.0 < self.attenuation <= 1.0:
            raise BadFactorError(
                f"shadow attenuation must be in (0, 1], got {self.attenuation}"
            )


GeometricOp = HFlip | VFlip | Rot90 | Zoom
PhotometricOp = Brightness | Shadow
AugmentOp = GeometricOp | PhotometricOp


# --------------------------------------------------------------------------
# application


def _check_image(img: np.ndarray) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
        raise MalformedImageError("expected an (H, W, 3) uint8 image")
    return arr


def _scaled_floor(channel_values: np.ndarray, factor: float) -> np.ndarray:
    scaled = np.floor(channel_values.astype(np.float64) * factor)
    return np.clip(scaled, 0, 255).astype(np.uint8)


def _zoom_window(scale: float, cx: float, cy: float, width: int, height: int):
    crop_w = max(1, int(round(scale * width)))
    crop_h = max(1, int(round(scale * height)))
    x0 = min(max(int(round(cx - crop_w / 2)), 0), width - crop_w)
    y0 = min(max(int(round(cy - crop_h / 2)), 0), height - crop_h)
    return x0, y0, crop_w, crop_h


def apply_geometric(img: np.ndarray, mask: Mask, op: GeometricOp) -> tuple[np.ndarray, Mask]:
    """Apply one geometric op to an image and its mask in lockstep.

    Flips and quarter turns are exact pixel permutations. Zoom crops and
    resizes back to the original dimensions, bilinear for the image and
    nearest-neighbor for the mask so no new labels appear.
    """
    arr = _check_image(img)
    labels = mask.labels
    if arr.shape[:2] != labels.shape:
        raise DimensionMismatchError(
            f"image is {arr.shape[:2]}, mask is {labels.shape}"
        )
    if isinstance(op, HFlip):
        return arr[:, ::-1].copy(), Mask(labels[:, ::-1])
    if isinstance(op, VFlip):
        return arr[::-1].copy(), Mask(labels[::-1])
    if isinstance(op, Rot90):
        k = op.k % 4
        return np.rot90(arr, k, axes=(0, 1)).copy(), Mask(np.rot90(labels, k))
    if isinstance(op, Zoom):
        height, width = labels.shape
        if op.scale == 1.0:
            return arr.copy(), Mask(labels)
        x0, y0, crop_w, crop_h = _zoom_window(op.scale, op.cx, op.cy, width, height)
        if crop_w == width and crop_h == height:
            return arr.copy(), Mask(labels)
        img_crop = Image.fromarray(arr[y0 : y0 + crop_h, x0 : x0 + crop_w])
        out_img = np.asarray(img_crop.resize((width, height), Image.Resampling.BILINEAR))
        mask_crop = Image.fromarray(
            labels[y0 : y0 + crop_h, x0 : x0 + crop_w].astype(np.int32), mode="I"
        )
        out_labels = np.asarray(mask_crop.resize((width, height), Image.Resampling.NEAREST))
        return out_img.copy(), Mask(out_labels)
    raise TypeError(f"not a geometric op: {op!r}")


def apply_photometric(img: np.ndarray, op: PhotometricOp) -> np.ndarray:
    """Apply one photometric op; masks are never touched by these."""
    arr = _check_image(img)
    if isinstance(op, Brightness):
        return _scaled_floor(arr, op.factor)
    if isinstance(op, Shadow):
        height, width = arr.shape[:2]
        region = polygon_mask(op.vertices, width, height)
        out = arr.copy()
        out[region] = _scaled_floor(arr[region], op.attenuation)
        return out
    raise TypeError(f"not a photometric op: {op!r}")


def apply_ops(
    img: np.ndarray, mask: Mask, ops: tuple[AugmentOp, ...] | list[AugmentOp]
) -> tuple[np.ndarray, Mask]:
    """Run a concrete op list in order over an image/mask pair."""
    out_img, out_mask = _check_image(img).copy(), mask
    for op in ops:
        if isinstance(op, (HFlip, VFlip, Rot90, Zoom)):
            out_img, out_mask = apply_geometric(out_img, out_mask, op)
        else:
            out_img = apply_photometric(out_img, op)
    return out_img, out_mask


def polygon_mask(
    vertices: tuple[tuple[float, float], ...], width: int, height: int
) -> np.ndarray:
    """Boolean raster of a polygon by even-odd ray casting at pixel centers.

    A pixel (x, y) is inside when a ray from its center (x+0.5, y+0.5)
    toward +x crosses the polygon edges an odd number of times. Fewer than
    three vertices raster to all-False.
    """
    if len(vertices) < 3:
        return np.zeros((height, width), dtype=bool)
    px = np.arange(width, dtype=np.float64)[None, :] + 0.5
    py = np.arange(height, dtype=np.float64)[:, None] + 0.5
    inside = np.zeros((height, width), dtype=bool)
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        if y1 == y2:
            continue
        straddles = (y1 > py) != (y2 > py)
        x_at_ray = x1 + (x2 - x1) * (py - y1) / (y2 - y1)
        inside ^= straddles & (px < x_at_ray)
    return inside


# --------------------------------------------------------------------------
# randomized templates


@dataclass(frozen=True)
class RandomHFlip:
    """Apply a horizontal flip with probability 1/2."""


@dataclass(frozen=True)
class RandomVFlip:
    """Apply a vertical flip with probability 1/2."""


@dataclass(frozen=True)
class RandomRot90:
    """Rotate by k quarter turns, k drawn uniformly from {0, 1, 2, 3}."""


@dataclass(frozen=True)
class RandomZoom:
    min_scale: float = 0.8

    def __post_init__(self) -> None:
        if not 0.0 < self.min_scale <= 1.0:
            raise BadScaleError(f"min_scale must be in (0, 1], got {self.min_scale}")


@dataclass(frozen=True)
class RandomBrightness:
    lo: float = 0.8
    hi: float = 1.2

    def __post_init__(self) -> None:
        if not 0.0 < self.lo <= self.hi:
            raise BadFactorError(
                f"brightness range must satisfy 0 < lo <= hi, got [{self.lo}, {self.hi}]"
            )


@dataclass(frozen=True)
class RandomShadow:
    count: int = 1
    attenuation_lo: float = 0.4
    attenuation_hi: float = 0.8

    def __post_init__(self) -> None:
        if self.count < 0:
            raise BadFactorError(f"shadow count must be non-negative, got {self.count}")
        if not 0.0 < self.attenuation_lo <= self.attenuation_hi <= 1.0:
            raise BadFactorError(
                "attenuation range must satisfy 0 < lo <= hi <= 1, got "
                f"[{self.attenuation_lo}, {self.attenuation_hi}]"
            )


AugmentTemplate = (
    RandomHFlip | RandomVFlip | RandomRot90 | RandomZoom | RandomBrightness | RandomShadow
)


@dataclass(frozen=True)
class AugmentSpec:
    """Ordered template pipeline plus the seed that drives all sampling."""

    seed: int
    ops: tuple[AugmentTemplate, ...] = field(default_factory=tuple)


def default_spec(seed: int) -> AugmentSpec:
    """The full pipeline: flips, quarter turns, zoom, lighting, one shadow."""
    return AugmentSpec(
        seed=seed,
        ops=(
            RandomHFlip(),
            RandomVFlip(),
            RandomRot90(),
            RandomZoom(min_scale=0.8),
            RandomBrightness(lo=0.8, hi=1.2),
            RandomShadow(count=1, attenuation_lo=0.4, attenuation_hi=0.8),
        ),
    )


def _convex_hull(points: list[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    # Andrew's monotone chain; returns vertices in counterclockwise order.
    pts = sorted(set(points))
    if len(pts) < 3:
        return tuple(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return tuple(lower[:-1] + upper[:-1])


def _sample_shadow(
    rng: np.random.Generator, template: RandomShadow, width: int, height: int
) -> Shadow:
    n = int(rng.integers(3, 7))
    cx = float(rng.uniform(0, width))
    cy = float(rng.uniform(0, height))
    short_side = min(width, height)
    radius = float(rng.uniform(short_side / 8, short_side / 3))
    angles = np.sort(rng.uniform(0.0, 2.0 * np.pi, size=n))
    raw = [
        (
            min(max(cx + radius * float(np.cos(a)), 0.0), float(width)),
            min(max(cy + radius * float(np.sin(a)), 0.0), float(height)),
        )
        for a in angles
    ]
    attenuation = float(rng.uniform(template.attenuation_lo, template.attenuation_hi))
    return Shadow(vertices=_convex_hull(raw), attenuation=attenuation)


def sample_augmentation(
    spec: AugmentSpec, index: int, width: int, height: int
) -> tuple[AugmentOp, ...]:
    """Instantiate the spec's templates into a concrete op list.

    All parameters are drawn from a generator seeded on (spec.seed, index),
    so the same arguments always return the same ops. Canvas dimensions are
    tracked through quarter turns so later zoom windows and shadow polygons
    land on the rotated canvas.
    """
    rng = np.random.default_rng(
        np.random.SeedSequence([spec.seed & 0xFFFFFFFFFFFFFFFF, index])
    )
    ops: list[AugmentOp] = []
    w, h = width, height
    for template in spec.ops:
        if isinstance(template, RandomHFlip):
            if rng.random() < 0.5:
                ops.append(HFlip())
        elif isinstance(template, RandomVFlip):
            if rng.random() < 0.5:
                ops.append(VFlip())
        elif isinstance(template, RandomRot90):
            k = int(rng.integers(0, 4))
            ops.append(Rot90(k))
            if k % 2 == 1:
                w, h = h, w
        elif isinstance(template, RandomZoom):
            scale = float(rng.uniform(template.min_scale, 1.0))
            crop_w = max(1, int(round(scale * w)))
            crop_h = max(1, int(round(scale * h)))
            x0 = int(rng.integers(0, w - crop_w + 1))
            y0 = int(rng.integers(0, h - crop_h + 1))
            ops.append(Zoom(scale=scale, cx=x0 + crop_w / 2, cy=y0 + crop_h / 2))
        elif isinstance(template, RandomBrightness):
            ops.append(Brightness(factor=float(rng.uniform(template.lo, template.hi))))
        elif isinstance(template, RandomShadow):
            for _ in range(template.count):
                ops.append(_sample_shadow(rng, template, w, h))
        else:
            raise TypeError(f"not an augmentation template: {template!r}")
    return tuple(ops)


# --------------------------------------------------------------------------
# spec and image serialization


_TEMPLATE_TAGS = {
    RandomHFlip: "hflip",
    RandomVFlip: "vflip",
    RandomRot90: "rot90",
    RandomZoom: "zoom",
    RandomBrightness: "brightness",
    RandomShadow: "shadow",
}


def spec_to_dict(spec: AugmentSpec) -> dict:
    ops = []
    for t in spec.ops:
        entry: dict = {"op": _TEMPLATE_TAGS[type(t)]}
        if isinstance(t, RandomZoom):
            entry["min_scale"] = t.min_scale
        elif isinstance(t, RandomBrightness):
            entry.update(lo=t.lo, hi=t.hi)
        elif isinstance(t, RandomShadow):
            entry.update(
                count=t.count,
                attenuation_lo=t.attenuation_lo,
                attenuation_hi=t.attenuation_hi,
            )
        ops.append(entry)
    return {"seed": spec.seed, "ops": ops}


def spec_from_dict(doc: dict) -> AugmentSpec:
    templates: list[AugmentTemplate] = []
    for entry in doc.get("ops", []):
        tag = entry.get("op")
        if tag == "hflip":
            templates.append(RandomHFlip())
        elif tag == "vflip":
            templates.append(RandomVFlip())
        elif tag == "rot90":
            templates.append(RandomRot90())
        elif tag == "zoom":
            templates.append(RandomZoom(min_scale=entry.get("min_scale", 0.8)))
        elif tag == "brightness":
            templates.append(
                RandomBrightness(lo=entry.get("lo", 0.8), hi=entry.get("hi", 1.2))
            )
        elif tag == "shadow":
            templates.append(
                RandomShadow(
                    count=entry.get("count", 1),
                    attenuation_lo=entry.get("attenuation_lo", 0.4),
                    attenuation_hi=entry.get("attenuation_hi", 0.8),
                )
            )
        else:
            raise ValueError(f"unknown augmentation op tag: {tag!r}")
    return AugmentSpec(seed=int(doc["seed"]), ops=tuple(templates))


def op_to_dict(op: AugmentOp) -> dict:
    """Concrete op as a plain dict, for provenance records."""
    if isinstance(op, HFlip):
        return {"op": "hflip"}
    if isinstance(op, VFlip):
        return {"op": "vflip"}
    if isinstance(op, Rot90):
        return {"op": "rot90", "k": op.k}
    if isinstance(op, Zoom):
        return {"op": "zoom", "scale": op.scale, "cx": op.cx, "cy": op.cy}
    if isinstance(op, Brightness):
        return {"op": "brightness", "factor": op.factor}
    if isinstance(op, Shadow):
        return {
            "op": "shadow",
            "vertices": [list(v) for v in op.vertices],
            "attenuation": op.attenuation,
        }
    raise TypeError(f"not an augmentation op: {op!r}")


def decode_rgb(png_bytes: bytes) -> np.ndarray:
    """Read PNG/JPEG bytes into an (H, W, 3) uint8 array."""
    try:
        with Image.open(io.BytesIO(png_bytes)) as im:
            return np.asarray(im.convert("RGB")).copy()
    except UnidentifiedImageError as exc:
        raise MalformedImageError(f"not a decodable image: {exc}") from exc


def encode_rgb(img: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(_check_image(img), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()
