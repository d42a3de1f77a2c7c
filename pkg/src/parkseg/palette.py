"""Class palettes: the mapping between class ids, RGB colors, and semantic roles."""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import MissingRoleError, UnknownClassError, UnknownClassIdError

RGB = tuple[int, int, int]


class Role(str, Enum):
    BACKGROUND = "background"
    ROAD = "road"
    CAR = "car"
    PARKED_CAR = "parked_car"
    OTHER = "other"


# Roles that may appear at most once in a palette (background exactly once).
_UNIQUE_ROLES = (Role.BACKGROUND, Role.ROAD, Role.CAR, Role.PARKED_CAR)


@dataclass(frozen=True)
class PaletteEntry:
    class_id: int
    name: str
    color: RGB
    role: Role

    def __post_init__(self) -> None:
        if not 0 <= self.class_id <= 255:
            raise ValueError(f"class id must be in 0..255, got {self.class_id}")
        color = tuple(int(c) for c in self.color)
        if len(color) != 3 or any(not 0 <= c <= 255 for c in color):
            raise ValueError(f"color must be an RGB triple in 0..255, got {self.color!r}")
        object.__setattr__(self, "color", color)
        if not self.name:
            raise ValueError("class name must be non-empty")


@dataclass(frozen=True)
class Palette:
    entries: tuple[PaletteEntry, ...]

    def __post_init__(self) -> None:
        entries = tuple(self.entries)
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise ValueError("palette must have at least one entry")
        ids = [e.class_id for e in entries]
        if any(i < 0 or i > 255 for i in ids):
            raise ValueError("class ids must be in 0..255")
        if len(set(ids)) != len(ids):
            raise ValueError("class ids must be distinct")
        colors = [e.color for e in entries]
        if len(set(colors)) != len(colors):
            raise ValueError("palette colors must be distinct")
        names = [e.name for e in entries]
        if len(set(names)) != len(names):
            raise ValueError("class names must be distinct")
        for role in _UNIQUE_ROLES:
            n = sum(1 for e in entries if e.role is role)
            if n > 1:
                raise ValueError(f"at most one entry may have role '{role.value}'")
            if role is Role.BACKGROUND and n != 1:
                raise ValueError("exactly one entry must have role 'background'")

    def __iter__(self) -> Iterator[PaletteEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def class_ids(self) -> tuple[int, ...]:
        return tuple(e.class_id for e in self.entries)

    def colors_array(self) -> np.ndarray:
        """Palette colors in entry order, shape (K, 3) uint8."""
        return np.array([e.color for e in self.entries], dtype=np.uint8)

    def by_id(self, class_id: int) -> PaletteEntry:
        for e in self.entries:
            if e.class_id == class_id:
                return e
        raise UnknownClassIdError(f"class id {class_id} not in palette")

    def by_name(self, name: str) -> PaletteEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise UnknownClassError(f"class name '{name}' not in palette")

    def index_of(self, class_id: int) -> int:
        """Position of a class id in entry order."""
        for i, e in enumerate(self.entries):
            if e.class_id == class_id:
                return i
        raise UnknownClassIdError(f"class id {class_id} not in palette")

    def id_for_role(self, role: Role) -> int | None:
        for e in self.entries:
            if e.role is role:
                return e.class_id
        return None

    def require_role(self, role: Role) -> int:
        class_id = self.id_for_role(role)
        if class_id is None:
            raise MissingRoleError(role.value)
        return class_id

    def background_id(self) -> int:
        return self.require_role(Role.BACKGROUND)

    def to_json(self) -> str:
        doc = {
            e.name: {"id": e.class_id, "rgb": list(e.color), "role": e.role.value}
            for e in self.entries
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Palette":
        doc = json.loads(text)
        if not isinstance(doc, dict):
            raise ValueError("palette config must be a JSON object")
        entries = []
        for name, spec in doc.items():
            rgb = spec["rgb"]
            if len(rgb) != 3:
                raise ValueError(f"entry '{name}': rgb must have 3 components")
            entries.append(
                PaletteEntry(
                    class_id=int(spec["id"]),
                    name=str(name),
                    color=(int(rgb[0]), int(rgb[1]), int(rgb[2])),
                    role=Role(spec.get("role", "other")),
                )
            )
        return cls(tuple(entries))

    @classmethod
    def from_file(cls, path: str | Path) -> "Palette":
        return cls.from_json(Path(path).read_text())


def make_palette(raw: Iterable[tuple[int, str, RGB, Role]]) -> Palette:
    """Build a palette from (class_id, name, color, role) tuples."""
    return Palette(tuple(PaletteEntry(i, n, c, r) for i, n, c, r in raw))


DEFAULT_PALETTE = make_palette(
    [
        (0, "background", (0, 0, 0), Role.BACKGROUND),
        (1, "road", (200, 162, 200), Role.ROAD),
        (2, "car", (0, 0, 255), Role.CAR),
        (3, "parked_car", (255, 255, 0), Role.PARKED_CAR),
    ]
)

THREE_CLASS_PALETTE = make_palette(
    [
        (0, "background", (0, 0, 0), Role.BACKGROUND),
        (1, "road", (200, 162, 200), Role.ROAD),
        (2, "car", (0, 0, 255), Role.CAR),
    ]
)
