import pytest

from carnot_lift.contact import is_contact
from carnot_lift.errors import InvalidParameter
from carnot_lift.fixtures import (
    filiform_tower,
    fixture_document,
    isotropic_map,
    tower_map,
    winding_components,
)


def test_unknown_fixture():
    with pytest.raises(InvalidParameter):
        fixture_document("moebius")


def test_tower_needs_two_floors():
    with pytest.raises(InvalidParameter):
        filiform_tower(1)
    assert [ext.algebra.dim for ext in filiform_tower(4)] == [3, 4, 5]


def test_winding_degrees():
    assert winding_components(1) == ("x", "y")
    with pytest.raises(InvalidParameter):
        winding_components(4)


def test_tower_maps_are_contact():
    for s in range(1, 6):
        assert is_contact(tower_map(s, 3)).verdict == "contact"


def test_isotropic_maps_land_in_R4():
    assert isotropic_map(True).target.dim == 4
    assert isotropic_map(False).name == "not_isotropic"
