"""Binary-mask primitives: connected components, contours, box dilation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import EvenKernelError, UnknownComponentIdError

_STRUCTURE_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCTURE_8 = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True, eq=False)
class ComponentLabels:
    """Per-pixel component ids, 1..count, with 0 for pixels in no component."""

    labels: np.ndarray
    count: int


def _check_binary(bits: np.ndarray) -> np.ndarray:
    bits = np.asarray(bits)
    if bits.ndim != 2 or bits.dtype != np.bool_:
        raise ValueError("expected a 2-D boolean array")
    return bits


def connected_components(bits: np.ndarray, connectivity: int = 8) -> ComponentLabels:
    """Label connected regions of true pixels under 4- or 8-adjacency."""
    bits = _check_binary(bits)
    if connectivity == 4:
        structure = _STRUCTURE_4
    elif connectivity == 8:
        structure = _STRUCTURE_8
    else:
        raise ValueError("connectivity must be 4 or 8")
    labels, count = ndimage.label(bits, structure=structure)
    return ComponentLabels(labels.astype(np.int32), int(count))


def region_boundary(member: np.ndarray) -> np.ndarray:
    """Pixels of a region having a 4-neighbor outside it (borders count as outside)."""
    member = _check_binary(member)
    padded = np.pad(member, 1, mode="constant", constant_values=False)
    outside = ~padded
    touches_out = (
        outside[:-2, 1:-1] | outside[2:, 1:-1] | outside[1:-1, :-2] | outside[1:-1, 2:]
    )
    return member & touches_out


def boundary(components: ComponentLabels, component_id: int) -> np.ndarray:
    """The 1-pixel-thick contour of one component."""
    if not 1 <= component_id <= components.count:
        raise UnknownComponentIdError(
            f"component id {component_id} outside 1..{components.count}"
        )
    return region_boundary(components.labels == component_id)


def _check_kernel(size: int) -> None:
    if size < 1 or size % 2 == 0:
        raise EvenKernelError(f"kernel dimension {size} must be odd and >= 1")


def dilate_rect(bits: np.ndarray, kernel_w: int, kernel_h: int) -> np.ndarray:
    """Dilate by a kernel_w x kernel_h rectangle anchored at its center.

    Output pixel (x, y) is true iff some input pixel is true within
    (kernel_w - 1) / 2 columns and (kernel_h - 1) / 2 rows of it; the
    neighborhood is clipped at the image borders.
    """
    bits = _check_binary(bits)
    _check_kernel(kernel_w)
    _check_kernel(kernel_h)
    if kernel_w == 1 and kernel_h == 1:
        return bits.copy()
    return ndimage.maximum_filter(bits, size=(kernel_h, kernel_w), mode="constant", cval=False)
