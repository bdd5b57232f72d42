import numpy as np
import pytest
import sympy as sp

from carnot_lift.contact import (
    GroupMap,
    bracket_extension,
    is_contact,
    left_trivialized_differential,
    pansu_differential,
    pansu_differential_limit,
    pansu_pullback,
    pullback,
    require_contact,
)
from carnot_lift.errors import DimensionMismatch, InvalidParameter, NotContact, NotContactAt
from carnot_lift.fieldforms import FieldForm, identity_test
from carnot_lift.fixtures import filiform, tower_map, tower_scaling, winding_lift


@pytest.fixture
def vertical():
    alg = filiform(2)
    return GroupMap(alg, alg, ("x", "y", "z2 + x"), name="vertical")


class TestGroupMap:
    def test_component_count(self):
        with pytest.raises(DimensionMismatch):
            GroupMap(filiform(2), filiform(2), ("x", "y"))

    def test_from_linear(self):
        f = tower_map(3, 2)
        assert f.components == tuple(tower_scaling(3, 2) * sp.Matrix(filiform(3).coordinates))
        assert np.allclose(f.evaluate([1.0, 1.0, 1.0, 1.0]), [2, 1, 2, 4])

    def test_onto_quotient(self):
        assert tower_map(3, 2).onto(filiform(2)).components == tower_map(2, 2).components

    def test_differential_of_a_homomorphism_is_constant(self):
        f = tower_map(3, 3)
        assert left_trivialized_differential(f) == tower_scaling(3, 3)

    def test_point_outside_domain(self):
        with pytest.raises(InvalidParameter):
            left_trivialized_differential(tower_map(2, 2), [5, 0, 0])


class TestContact:
    def test_homomorphism_is_contact(self):
        report = is_contact(tower_map(4, 2))
        assert report.verdict == "contact"
        assert report.exact

    def test_square_roots(self):
        report = is_contact(winding_lift(2))
        assert report.verdict in ("contact", "probably_contact")
        assert report.contact

    def test_vertical_shift_is_not_contact(self, vertical):
        report = is_contact(vertical)
        assert report.verdict == "not_contact"
        assert not report.contact
        with pytest.raises(NotContact):
            require_contact(vertical)


class TestPansu:
    def test_bracket_extension(self):
        h1 = filiform(2)
        horizontal = sp.Matrix([[2, 0], [0, 3], [0, 0]])
        assert bracket_extension(h1, h1, horizontal) == sp.diag(2, 3, 6)

    def test_winding_lift_at_a_point(self):
        L = pansu_differential(winding_lift(3), [1, 0, 0])
        assert L.matrix == sp.diag(1, 3, 3)

    def test_not_contact_at(self, vertical):
        with pytest.raises(NotContactAt):
            pansu_differential(vertical, [0, 0, 0])

    def test_limit_of_a_homomorphism(self):
        limit = pansu_differential_limit(tower_map(3, 2), [0.3, -0.2, 0.1, 0.05], 0.5)
        assert np.allclose(limit, np.array(tower_scaling(3, 2), dtype=float))

    def test_limit_approaches_the_differential(self):
        limit = pansu_differential_limit(winding_lift(2), [1.0, 0.0, 0.0], 1e-4)
        assert np.allclose(limit, np.diag([1.0, 2.0, 2.0]), atol=1e-2)

    def test_limit_needs_positive_scale(self):
        with pytest.raises(InvalidParameter):
            pansu_differential_limit(tower_map(2, 2), [0.0, 0.0, 0.0], 0)


class TestPullback:
    def test_pansu_pullback_of_the_vertical_coframe(self):
        alg = filiform(2)
        theta = FieldForm.from_terms(alg, 1, {("Z2",): 1})
        assert pansu_pullback(tower_map(2, 3), theta) == 3 * theta

    def test_classical_and_pansu_agree_for_homomorphisms(self):
        alg = filiform(3)
        tau = FieldForm.from_terms(alg, 2, {("X", "Z2"): "y", ("Y", "Z3"): 1})
        f = tower_map(3, 2)
        assert identity_test(pullback(f, tau), pansu_pullback(f, tau)).equal

    def test_pansu_pullback_needs_contact(self, vertical):
        theta = FieldForm.from_terms(filiform(2), 1, {("Z2",): 1})
        with pytest.raises(NotContact):
            pansu_pullback(vertical, theta)

    def test_winding_lift_scales_the_area_form(self):
        f = winding_lift(2)
        alg = filiform(2)
        area = FieldForm.from_terms(alg, 2, {("X", "Y"): 1})
        assert identity_test(pansu_pullback(f, area), 2 * area, f.domain).equal
