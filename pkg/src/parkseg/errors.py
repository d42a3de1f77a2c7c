"""Exception types raised across the package."""
from __future__ import annotations


class ParksegError(Exception):
    """Base class for all package-specific errors."""


class MalformedImageError(ParksegError):
    """Input bytes could not be decoded as an image."""


class UnknownColorError(ParksegError):
    """A pixel color matches no palette entry within the allowed tolerance."""

    def __init__(self, x: int, y: int, rgb: tuple[int, int, int], tolerance: int):
        self.x = x
        self.y = y
        self.rgb = rgb
        self.tolerance = tolerance
        super().__init__(
            f"color {rgb} at pixel ({x}, {y}) matches no palette entry "
            f"within tolerance {tolerance}"
        )


class AmbiguousColorError(ParksegError):
    """Two palette colors are equidistant from a pixel color at the minimum."""

    def __init__(self, x: int, y: int, rgb: tuple[int, int, int], class_ids: tuple[int, ...]):
        self.x = x
        self.y = y
        self.rgb = rgb
        self.class_ids = class_ids
        super().__init__(
            f"color {rgb} at pixel ({x}, {y}) is equidistant from palette "
            f"classes {class_ids}"
        )


class UnknownClassIdError(ParksegError):
    """A mask label value has no palette entry."""


class UnknownClassError(ParksegError):
    """A class argument is not present in the palette or confusion matrix."""


class UnknownComponentIdError(ParksegError):
    """A component id is outside the labeling's 1..count range."""


class EvenKernelError(ParksegError):
    """Kernel dimensions must be odd and at least 1."""


class MissingRoleError(ParksegError):
    """The palette lacks an entry with a required semantic role."""

    def __init__(self, role: str):
        self.role = role
        super().__init__(f"palette has no entry with role '{role}'")


class MissingParkedTargetError(ParksegError):
    """A component must be relabeled but no parked target class is configured."""


class DimensionMismatchError(ParksegError):
    """Two rasters that must share dimensions do not."""


class NoForegroundError(ParksegError):
    """Ground truth contains no foreground pixels, the metric is undefined."""


class AllUndefinedError(ParksegError):
    """Every per-class value was undefined after filtering."""


class BadDistributionError(ParksegError):
    """Per-pixel probabilities are negative or do not sum to one."""


class BadScaleError(ParksegError):
    """Zoom scale outside the (0, 1] range."""


class BadFactorError(ParksegError):
    """Photometric factor outside its valid range."""


class OverlappingCarsError(ParksegError):
    """Car boxes in a scene overlap or touch."""


class OutOfBoundsError(ParksegError):
    """A scene element extends beyond the canvas."""


class InvalidSceneError(ParksegError):
    """A scene violates the road consistency rules for its car labels."""


class InfeasibleError(ParksegError):
    """Random scene generation failed to satisfy the constraints."""
