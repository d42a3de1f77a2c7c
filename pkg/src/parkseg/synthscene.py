"""Seeded synthetic street scenes with known parked/moving ground truth.

A scene is a flat background, full-span axis-aligned road strips, and
rectangular cars whose truth (parked or moving) is part of the spec. Scenes
render to ordinary label masks, so the parked-car vote heuristic can be
scored against an exact answer key. The random generator builds scenes that
are well separated: with a margin of at least the vote radius, every car's
voting band is pure road or pure background and the heuristic is forced to
the correct verdict.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, InvalidSceneError, OutOfBoundsError, OverlappingCarsError
from .maskio import Mask
from .morphology import connected_components
from .palette import DEFAULT_PALETTE, Palette, Role
from .parkdetect import detect_parked

PARKED = "parked"
MOVING = "moving"

_CAR_MIN = 3
_CAR_MAX = 8
_SCENE_TRIES = 50
_PLACE_TRIES = 200


@dataclass(frozen=True)
class RoadStrip:
    """Full-span strip: rows [position, position+thickness) when horizontal,
    the same columns when vertical."""

    orientation: str
    position: int
    thickness: int

    def __post_init__(self) -> None:
        if self.orientation not in ("h", "v"):
            raise ValueError(f"orientation must be 'h' or 'v', got {self.orientation!r}")
        if self.thickness < 1:
            raise ValueError(f"thickness must be at least 1, got {self.thickness}")


@dataclass(frozen=True)
class CarBox:
    x: int
    y: int
    w: int
    h: int
    truth: str

    def __post_init__(self) -> None:
        if self.truth not in (PARKED, MOVING):
            raise ValueError(f"truth must be 'parked' or 'moving', got {self.truth!r}")
        if self.w < 1 or self.h < 1:
            raise ValueError("car boxes need positive width and height")


@dataclass(frozen=True)
class SceneSpec:
    seed: int
    width: int
    height: int
    roads: tuple[RoadStrip, ...]
    cars: tuple[CarBox, ...]


def _road_bits(spec: SceneSpec) -> np.ndarray:
    bits = np.zeros((spec.height, spec.width), dtype=bool)
    for strip in spec.roads:
        if strip.orientation == "h":
            bits[strip.position : strip.position + strip.thickness, :] = True
        else:
            bits[:, strip.position : strip.position + strip.thickness] = True
    return bits


def _boxes_touch(a: CarBox, b: CarBox) -> bool:
    # True when the rects overlap or are 8-adjacent (Chebyshev gap < 2).
    return a.x <= b.x + b.w and b.x <= a.x + a.w and a.y <= b.y + b.h and b.y <= a.y + a.h


def validate_scene(spec: SceneSpec) -> None:
    """Check bounds, car separation, and truth/road consistency.

    Car rects must not touch even diagonally; merged rects would break the
    one-to-one pairing between spec cars and mask components.
    """
    if spec.width < 1 or spec.height < 1:
        raise InvalidSceneError("canvas must be at least 1x1")
    for strip in spec.roads:
        span = spec.height if strip.orientation == "h" else spec.width
        if strip.position < 0 or strip.position + strip.thickness > span:
            raise OutOfBoundsError(
                f"road strip at {strip.position} with thickness {strip.thickness} "
                f"exceeds the canvas span of {span}"
            )
    for car in spec.cars:
        if car.x < 0 or car.y < 0 or car.x + car.w > spec.width or car.y + car.h > spec.height:
            raise OutOfBoundsError(
                f"car at ({car.x}, {car.y}) size {car.w}x{car.h} exceeds the canvas"
            )
    for i, a in enumerate(spec.cars):
        for b in spec.cars[i + 1 :]:
            if _boxes_touch(a, b):
                raise OverlappingCarsError(
                    f"cars at ({a.x}, {a.y}) and ({b.x}, {b.y}) overlap or touch"
                )
    road = _road_bits(spec)
    for car in spec.cars:
        patch = road[car.y : car.y + car.h, car.x : car.x + car.w]
        if car.truth == MOVING and not patch.all():
            raise InvalidSceneError(
                f"moving car at ({car.x}, {car.y}) is not entirely on road"
            )
        if car.truth == PARKED and patch.any():
            raise InvalidSceneError(f"parked car at ({car.x}, {car.y}) lies on road")


def render(spec: SceneSpec, palette: Palette = DEFAULT_PALETTE) -> tuple[Mask, dict[int, str]]:
    """Rasterize a scene and return the mask plus its answer key.

    Labels are painted background, then road strips, then car rects (cars
    all get the car class regardless of truth). The answer key maps each
    car component id in the mask to 'parked' or 'moving'.
    """
    validate_scene(spec)
    background = palette.require_role(Role.BACKGROUND)
    road = palette.require_role(Role.ROAD)
    car = palette.require_role(Role.CAR)

    labels = np.full((spec.height, spec.width), background, dtype=np.int64)
    labels[_road_bits(spec)] = road
    for box in spec.cars:
        labels[box.y : box.y + box.h, box.x : box.x + box.w] = car
    mask = Mask(labels)

    components = connected_components(labels == car, connectivity=8)
    truth: dict[int, str] = {}
    for box in spec.cars:
        component_id = int(components.labels[box.y, box.x])
        truth[component_id] = box.truth
    return mask, truth


def generate_random(
    seed: int,
    width: int,
    height: int,
    n_roads: int,
    n_cars: int,
    parked_fraction: float,
    margin: int,
) -> SceneSpec:
    """Build a random well-separated scene.

    Every pixel within Chebyshev distance `margin` of a car boundary that is
    not itself inside a car is road for moving cars and background for
    parked ones. Moving cars sit inset at least `margin` inside a strip;
    parked cars keep their margin-expanded box free of road. Placement is
    rejection-sampled; raises InfeasibleError when the canvas cannot
    accommodate the request.
    """
    if margin < 0:
        raise InfeasibleError(f"margin must be non-negative, got {margin}")
    if not 0.0 <= parked_fraction <= 1.0:
        raise InfeasibleError(f"parked_fraction must be in [0, 1], got {parked_fraction}")
    rng = np.random.default_rng(np.random.SeedSequence(seed & 0xFFFFFFFFFFFFFFFF))
    n_parked = int(round(parked_fraction * n_cars))
    thickness_lo = _CAR_MAX + 2 * margin
    truths = [PARKED] * n_parked + [MOVING] * (n_cars - n_parked)

    for _ in range(_SCENE_TRIES):
        roads: list[RoadStrip] = []
        feasible = True
        for _ in range(n_roads):
            orientation = "h" if rng.random() < 0.5 else "v"
            span = height if orientation == "h" else width
            thickness = thickness_lo + int(rng.integers(0, 5))
            if thickness > span:
                feasible = False
                break
            position = int(rng.integers(0, span - thickness + 1))
            roads.append(RoadStrip(orientation, position, thickness))
        if not feasible:
            continue

        cars: list[CarBox] = []
        road = _road_bits(SceneSpec(seed, width, height, tuple(roads), ()))
        for truth in truths:
            placed = False
            for _ in range(_PLACE_TRIES):
                w = int(rng.integers(_CAR_MIN, _CAR_MAX + 1))
                h = int(rng.integers(_CAR_MIN, _CAR_MAX + 1))
                if truth == MOVING:
                    if not roads:
                        break
                    strip = roads[int(rng.integers(0, len(roads)))]
                    if strip.orientation == "h":
                        y_lo, y_hi = strip.position + margin, strip.position + strip.thickness - margin - h
                        if y_hi < y_lo or w > width:
                            continue
                        y = int(rng.integers(y_lo, y_hi + 1))
                        x = int(rng.integers(0, width - w + 1))
                    else:
                        x_lo, x_hi = strip.position + margin, strip.position + strip.thickness - margin - w
                        if x_hi < x_lo or h > height:
                            continue
                        x = int(rng.integers(x_lo, x_hi + 1))
                        y = int(rng.integers(0, height - h + 1))
                else:
                    if w > width or h > height:
                        continue
                    x = int(rng.integers(0, width - w + 1))
                    y = int(rng.integers(0, height - h + 1))
                    window = road[
                        max(0, y - margin) : y + h + margin,
                        max(0, x - margin) : x + w + margin,
                    ]
                    if window.any():
                        continue
                candidate = CarBox(x, y, w, h, truth)
                grown = CarBox(max(0, x - 1), max(0, y - 1), w + 2, h + 2, truth)
                if any(_boxes_touch(grown, other) for other in cars):
                    continue
                cars.append(candidate)
                placed = True
                break
            if not placed:
                break
        if len(cars) == len(truths):
            spec = SceneSpec(
                seed=seed, width=width, height=height, roads=tuple(roads), cars=tuple(cars)
            )
            validate_scene(spec)
            return spec
    raise InfeasibleError(
        f"could not place {n_cars} cars and {n_roads} roads with margin {margin} "
        f"on a {width}x{height} canvas"
    )


@dataclass(frozen=True)
class CarOutcome:
    index: int
    truth: str
    predicted: str
    correct: bool


@dataclass(frozen=True)
class HeuristicScore:
    """Per-scene scorecard; accuracy is None when the scene has no cars."""

    total: int
    correct: int
    accuracy: float | None
    outcomes: tuple[CarOutcome, ...]


def score_heuristic(
    spec: SceneSpec, kernel: int = 15, palette: Palette = DEFAULT_PALETTE
) -> HeuristicScore:
    """Render a scene, run the vote heuristic, and grade it.

    Each spec car is matched to its mask component by pixel membership and
    the heuristic's verdict is compared with the spec truth.
    """
    parked_id = palette.require_role(Role.PARKED_CAR)
    mask, _ = render(spec, palette)
    relabeled, _ = detect_parked(mask, palette, kernel=kernel)
    outcomes = []
    correct = 0
    for i, box in enumerate(spec.cars):
        predicted = PARKED if relabeled.labels[box.y, box.x] == parked_id else MOVING
        ok = predicted == box.truth
        correct += int(ok)
        outcomes.append(CarOutcome(index=i, truth=box.truth, predicted=predicted, correct=ok))
    total = len(spec.cars)
    accuracy = correct / total if total else None
    return HeuristicScore(
        total=total, correct=correct, accuracy=accuracy, outcomes=tuple(outcomes)
    )


def scene_to_dict(spec: SceneSpec) -> dict:
    return {
        "seed": spec.seed,
        "width": spec.width,
        "height": spec.height,
        "roads": [
            {"orientation": r.orientation, "position": r.position, "thickness": r.thickness}
            for r in spec.roads
        ],
        "cars": [
            {"x": c.x, "y": c.y, "w": c.w, "h": c.h, "truth": c.truth} for c in spec.cars
        ],
    }


def scene_from_dict(doc: dict) -> SceneSpec:
    return SceneSpec(
        seed=int(doc["seed"]),
        width=int(doc["width"]),
        height=int(doc["height"]),
        roads=tuple(
            RoadStrip(r["orientation"], int(r["position"]), int(r["thickness"]))
            for r in doc.get("roads", [])
        ),
        cars=tuple(
            CarBox(int(c["x"]), int(c["y"]), int(c["w"]), int(c["h"]), c["truth"])
            for c in doc.get("cars", [])
        ),
    )
