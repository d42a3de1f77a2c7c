import json

import pytest

from parkseg.errors import MissingRoleError, UnknownClassError, UnknownClassIdError
from parkseg.palette import (
    DEFAULT_PALETTE,
    THREE_CLASS_PALETTE,
    Palette,
    PaletteEntry,
    Role,
    make_palette,
)


def test_default_palette_colors():
    assert DEFAULT_PALETTE.by_name("background").color == (0, 0, 0)
    assert DEFAULT_PALETTE.by_name("road").color == (200, 162, 200)
    assert DEFAULT_PALETTE.by_name("car").color == (0, 0, 255)
    assert DEFAULT_PALETTE.by_name("parked_car").color == (255, 255, 0)
    assert DEFAULT_PALETTE.class_ids == (0, 1, 2, 3)


def test_three_class_palette_has_no_parked_role():
    assert THREE_CLASS_PALETTE.id_for_role(Role.PARKED_CAR) is None
    assert len(THREE_CLASS_PALETTE) == 3


def test_roles_resolve():
    assert DEFAULT_PALETTE.background_id() == 0
    assert DEFAULT_PALETTE.require_role(Role.ROAD) == 1
    assert DEFAULT_PALETTE.require_role(Role.CAR) == 2
    assert DEFAULT_PALETTE.require_role(Role.PARKED_CAR) == 3
    with pytest.raises(MissingRoleError):
        THREE_CLASS_PALETTE.require_role(Role.PARKED_CAR)


def test_duplicate_ids_rejected():
    with pytest.raises(ValueError):
        make_palette(
            [
                (0, "background", (0, 0, 0), Role.BACKGROUND),
                (0, "road", (1, 1, 1), Role.ROAD),
            ]
        )


def test_duplicate_colors_rejected():
    with pytest.raises(ValueError):
        make_palette(
            [
                (0, "background", (0, 0, 0), Role.BACKGROUND),
                (1, "road", (0, 0, 0), Role.ROAD),
            ]
        )


def test_duplicate_names_rejected():
    with pytest.raises(ValueError):
        make_palette(
            [
                (0, "thing", (0, 0, 0), Role.BACKGROUND),
                (1, "thing", (1, 1, 1), Role.ROAD),
            ]
        )


def test_background_role_is_mandatory_and_unique():
    with pytest.raises(ValueError):
        make_palette([(0, "road", (0, 0, 0), Role.ROAD)])
    with pytest.raises(ValueError):
        make_palette(
            [
                (0, "a", (0, 0, 0), Role.BACKGROUND),
                (1, "b", (1, 1, 1), Role.BACKGROUND),
            ]
        )


def test_at_most_one_entry_per_special_role():
    with pytest.raises(ValueError):
        make_palette(
            [
                (0, "background", (0, 0, 0), Role.BACKGROUND),
                (1, "road1", (1, 1, 1), Role.ROAD),
                (2, "road2", (2, 2, 2), Role.ROAD),
            ]
        )


def test_lookup_errors():
    with pytest.raises(UnknownClassIdError):
        DEFAULT_PALETTE.by_id(77)
    with pytest.raises(UnknownClassError):
        DEFAULT_PALETTE.by_name("tree")
    with pytest.raises(UnknownClassIdError):
        DEFAULT_PALETTE.index_of(77)


def test_json_round_trip():
    text = DEFAULT_PALETTE.to_json()
    back = Palette.from_json(text)
    assert back == DEFAULT_PALETTE


def test_from_file(tmp_path):
    p = tmp_path / "palette.json"
    p.write_text(DEFAULT_PALETTE.to_json())
    assert Palette.from_file(p) == DEFAULT_PALETTE


def test_json_document_shape():
    doc = json.loads(DEFAULT_PALETTE.to_json())
    assert doc["car"] == {"id": 2, "rgb": [0, 0, 255], "role": "car"}


def test_entry_validation():
    with pytest.raises(ValueError):
        PaletteEntry(class_id=-1, name="x", color=(0, 0, 0), role=Role.OTHER)
    with pytest.raises(ValueError):
        PaletteEntry(class_id=300, name="x", color=(0, 0, 0), role=Role.OTHER)
    with pytest.raises(ValueError):
        PaletteEntry(class_id=1, name="x", color=(0, 0, 300), role=Role.OTHER)
