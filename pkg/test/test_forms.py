import math

import pytest
import sympy as sp

from carnot_lift.algebra import GradedSpace, direct_product, make_standard
from carnot_lift.errors import NotCocycle
from carnot_lift.forms import (
    AlgebraForm,
    cocycle_check,
    coframe,
    cohomology_decompose,
    d0,
    d0_pseudoinverse,
    e0_basis,
    exterior,
    form_inner,
    hodge_star,
    iter_forms,
    max_nontrivial_E0_weight_2,
    project_E0,
    project_image,
    pure_weight_split,
    wedge,
    weight,
)

H1 = make_standard("heisenberg", 1)
F3 = make_standard("filiform", 3)
F4 = make_standard("filiform", 4)
DUALITY_FIXTURES = [
    make_standard("euclidean", 3),
    H1,
    make_standard("heisenberg", 2),
    F3,
    F4,
    direct_product(H1, make_standard("euclidean", 1)),
    make_standard("jet", 2, 2),
]


def form(alg, degree, terms):
    return AlgebraForm.from_terms(alg, degree, terms)


class TestDifferential:
    def test_d0_of_the_vertical_coframe(self):
        assert d0(coframe(H1, "Z")) == form(H1, 2, {("X", "Y"): -1})

    def test_d0_of_horizontal_coframe_vanishes(self):
        assert d0(coframe(H1, "X")).is_zero()

    @pytest.mark.parametrize("alg", [H1, F4, make_standard("jet", 2, 1)])
    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_d0_squares_to_zero(self, alg, k):
        for omega in iter_forms(alg, k):
            assert d0(d0(omega)).is_zero()

    def test_vector_valued_forms_act_componentwise(self):
        values = GradedSpace(("A", "B"), (2, 3))
        omega = AlgebraForm.from_terms(F3, 1, {("Z2",): {"A": 1}, ("Z3",): {"B": 2}}, values)
        assert d0(omega).component("A") == d0(coframe(F3, "Z2"))
        assert d0(omega).component("B") == 2 * d0(coframe(F3, "Z3"))

    def test_unsorted_monomials_pick_up_the_sign(self):
        assert form(H1, 2, {("Y", "X"): 1}) == form(H1, 2, {("X", "Y"): -1})

    def test_wedge_is_graded_commutative(self):
        x, y = coframe(H1, "X"), coframe(H1, "Y")
        assert wedge(x, y) == form(H1, 2, {("X", "Y"): 1})
        assert wedge(y, x) == -wedge(x, y)
        assert wedge(x, x).is_zero()

    def test_pseudoinverse_inverts_on_the_image(self):
        kappa = form(F3, 2, {("X", "Y"): 3, ("X", "Z2"): 1, ("Y", "Z3"): 5})
        assert d0(d0_pseudoinverse(kappa)) == project_image(kappa)


class TestRuminForms:
    @pytest.mark.parametrize(
        "alg,k,dimension",
        [
            (H1, 0, 1),
            (H1, 1, 2),
            (H1, 2, 2),
            (H1, 3, 1),
            (make_standard("heisenberg", 2), 2, 5),
            (make_standard("heisenberg", 2), 3, 5),
            (F3, 1, 2),
            (F3, 2, 2),
            (F3, 3, 2),
            (make_standard("filiform", 1), 2, 1),
        ],
    )
    def test_e0_dimensions(self, alg, k, dimension):
        assert len(e0_basis(alg, k)) == dimension

    @pytest.mark.parametrize("alg", [H1, F3, F4])
    def test_e0_basis_is_orthogonal_and_pure(self, alg):
        for k in range(alg.dim + 1):
            basis = e0_basis(alg, k)
            for i, a in enumerate(basis):
                assert len(pure_weight_split(a)) == 1
                assert d0(a).is_zero()
                for b in basis[i + 1 :]:
                    assert form_inner(a, b) == 0

    def test_e0_of_engel_in_degree_two(self):
        basis = e0_basis(F3, 2)
        assert sorted(weight(a) for a in basis) == [3, 4]

    def test_projection_is_idempotent(self):
        omega = form(F3, 2, {("X", "Y"): 1, ("Y", "Z2"): 2, ("X", "Z3"): -1, ("Z2", "Z3"): 1})
        once = project_E0(omega)
        assert project_E0(once) == once
        assert project_E0(project_image(omega)).is_zero()

    def test_hodge_star_maps_e0_to_e0(self):
        for k in range(H1.dim + 1):
            for a in e0_basis(H1, k):
                star = hodge_star(a)
                assert star.degree == H1.dim - k
                assert project_E0(star) == star

    def test_exterior_is_cached_per_algebra(self):
        assert exterior(H1) is exterior(make_standard("heisenberg", 1))


class TestWeights:
    def test_weight_of_monomials(self):
        assert weight(form(F3, 2, {("X", "Z3"): 1})) == 4
        assert weight(form(F3, 2, {("X", "Z3"): 1, ("X", "Y"): 1})) == 2

    def test_zero_form_has_infinite_weight(self):
        assert weight(AlgebraForm.zero(F3, 2)) == math.inf

    def test_pure_weight_split_sums_back(self):
        omega = form(F3, 2, {("X", "Y"): 1, ("Y", "Z2"): 2, ("Z2", "Z3"): 7})
        parts = pure_weight_split(omega)
        assert sorted(parts) == [2, 3, 5]
        assert sum(parts.values(), AlgebraForm.zero(F3, 2)) == omega

    @pytest.mark.parametrize(
        "alg,expected",
        [
            (make_standard("filiform", 1), 2),
            (H1, 3),
            (F3, 4),
            (make_standard("heisenberg", 2), 2),
        ],
    )
    def test_max_e0_weight_in_degree_two(self, alg, expected):
        assert max_nontrivial_E0_weight_2(alg) == expected

    @pytest.mark.parametrize("alg", DUALITY_FIXTURES, ids=lambda alg: "/".join(alg.basis))
    def test_e0_weights_in_degree_one_and_codegree_one(self, alg):
        q = alg.homogeneous_dimension
        first = e0_basis(alg, 1)
        assert len(first) == alg.rank
        assert all(weight(a) == 1 for a in first)
        assert all(weight(a) == q - 1 for a in e0_basis(alg, alg.dim - 1))
        assert all(weight(hodge_star(a)) == q - 1 for a in first)

    @pytest.mark.parametrize("alg", DUALITY_FIXTURES, ids=lambda alg: "/".join(alg.basis))
    def test_e0_in_degree_one_is_the_horizontal_span(self, alg):
        horizontal = {(i,) for i in alg.horizontal}
        for a in e0_basis(alg, 1):
            rows = {mono for mono, c in zip(a.monomials, a.coeffs) if c != 0}
            assert rows <= horizontal
        span = sp.Matrix.hstack(*(a.coeffs for a in e0_basis(alg, 1)))
        assert span.rank() == len(horizontal)


class TestCohomology:
    def test_decomposition_of_a_cocycle(self):
        rho = form(F3, 2, {("X", "Z3"): 1, ("X", "Y"): 2})
        assert cocycle_check(rho)
        harmonic, mu = cohomology_decompose(rho)
        assert harmonic == form(F3, 2, {("X", "Z3"): 1})
        assert d0(mu) == form(F3, 2, {("X", "Y"): 2})
        assert harmonic + d0(mu) == rho

    def test_non_cocycle_is_rejected(self):
        rho = form(F3, 2, {("Y", "Z3"): 1})
        assert not cocycle_check(rho)
        with pytest.raises(NotCocycle):
            cohomology_decompose(rho)

    def test_exact_forms_have_no_harmonic_part(self):
        harmonic, _ = cohomology_decompose(d0(coframe(F4, "Z4")))
        assert harmonic.is_zero()
        assert harmonic.coeffs == sp.zeros(exterior(F4).size(2), 1)
