"""Post-processing toolkit for color-coded urban segmentation masks.

Core pieces: palette-exact PNG mask codec, connected-component morphology,
the parked/moving vote heuristic for car components, overlap metrics and
focal scoring, three-color error rendering, seeded augmentation, and a
synthetic scene generator that serves as an exact answer key.
"""
from .augment import (
    AugmentSpec,
    Brightness,
    HFlip,
    Rot90,
    Shadow,
    VFlip,
    Zoom,
    apply_geometric,
    apply_ops,
    apply_photometric,
    default_spec,
    polygon_mask,
    sample_augmentation,
)
from .errmask import ErrorImage, error_mask
from .errors import ParksegError
from .manifest import ManifestEntry, Violation, read_manifest, validate_manifest
from .maskio import Mask, class_histogram, decode_mask, encode_mask, validate_labels
from .metrics import (
    ConfusionMatrix,
    FocalParams,
    confusion,
    dice_per_class,
    focal_loss,
    foreground_accuracy,
    jaccard_per_class,
    macro_average,
)
from .morphology import ComponentLabels, boundary, connected_components, dilate_rect
from .palette import DEFAULT_PALETTE, THREE_CLASS_PALETTE, Palette, PaletteEntry, Role
from .parkdetect import ComponentVerdict, detect_parked, detect_parked_naive
from .synthscene import (
    CarBox,
    HeuristicScore,
    RoadStrip,
    SceneSpec,
    generate_random,
    render,
    score_heuristic,
)

__version__ = "0.1.0"

__all__ = [
    "AugmentSpec",
    "Brightness",
    "CarBox",
    "ComponentLabels",
    "ComponentVerdict",
    "ConfusionMatrix",
    "DEFAULT_PALETTE",
    "ErrorImage",
    "FocalParams",
    "HFlip",
    "HeuristicScore",
    "ManifestEntry",
    "Mask",
    "Palette",
    "PaletteEntry",
    "ParksegError",
    "RoadStrip",
    "Role",
    "Rot90",
    "SceneSpec",
    "Shadow",
    "THREE_CLASS_PALETTE",
    "VFlip",
    "Violation",
    "Zoom",
    "apply_geometric",
    "apply_ops",
    "apply_photometric",
    "boundary",
    "class_histogram",
    "confusion",
    "connected_components",
    "decode_mask",
    "default_spec",
    "detect_parked",
    "detect_parked_naive",
    "dice_per_class",
    "dilate_rect",
    "encode_mask",
    "error_mask",
    "focal_loss",
    "foreground_accuracy",
    "generate_random",
    "jaccard_per_class",
    "macro_average",
    "polygon_mask",
    "read_manifest",
    "render",
    "sample_augmentation",
    "score_heuristic",
    "validate_labels",
    "validate_manifest",
]
