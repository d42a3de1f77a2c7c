"""Three-color error rendering of a predicted mask against ground truth.

White marks correct foreground, red marks missed detections (false
negatives), green marks spurious detections (false positives), and black
covers everything else. A single-class mode applies the same scheme to one
class of interest instead of all foreground.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .errors import DimensionMismatchError
from .maskio import Mask, validate_labels
from .palette import Palette

WHITE = (255, 255, 255)
RED = (255, 0, 0)
GREEN = (0, 255, 0)
BLACK = (0, 0, 0)


@dataclass(frozen=True)
class ErrorImage:
    """RGB image whose pixels are restricted to white, red, green, black."""

    pixels: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3 or px.dtype != np.uint8:
            raise DimensionMismatchError("error image must be an (H, W, 3) uint8 array")
        px = px.copy()
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def counts(self) -> dict[str, int]:
        """Pixel tally per color, keyed white/red/green/black."""
        out = {}
        for name, color in (("white", WHITE), ("red", RED), ("green", GREEN), ("black", BLACK)):
            match = np.all(self.pixels == np.array(color, dtype=np.uint8), axis=2)
            out[name] = int(np.count_nonzero(match))
        return out

    def to_png(self) -> bytes:
        buf = io.BytesIO()
        Image.fromarray(self.pixels, mode="RGB").save(buf, format="PNG")
        return buf.getvalue()


def error_mask(
    truth: Mask,
    predicted: Mask,
    palette: Palette,
    class_id: int | None = None,
) -> ErrorImage:
    """Render the error image for a mask pair.

    With class_id None every foreground class counts: white where the
    prediction matches a non-background truth pixel, red where a foreground
    truth pixel was predicted as anything else, green where background was
    predicted as foreground. With a class_id the same roles are scoped to
    that single class.
    """
    if truth.labels.shape != predicted.labels.shape:
        raise DimensionMismatchError(
            f"truth is {truth.labels.shape}, prediction is {predicted.labels.shape}"
        )
    validate_labels(truth, palette)
    validate_labels(predicted, palette)

    gt = truth.labels
    pred = predicted.labels
    if class_id is None:
        background = palette.background_id()
        white = (gt == pred) & (gt != background)
        red = (gt != background) & (pred != gt)
        green = (gt == background) & (pred != background)
    else:
        palette.by_id(class_id)
        white = (gt == class_id) & (pred == class_id)
        red = (gt == class_id) & (pred != class_id)
        green = (gt != class_id) & (pred == class_id)

    pixels = np.zeros(gt.shape + (3,), dtype=np.uint8)
    pixels[white] = WHITE
    pixels[red] = RED
    pixels[green] = GREEN
    return ErrorImage(pixels=pixels)
