import pytest
import sympy as sp

from carnot_lift.algebra import GradedLinearMap, GradedSpace, make_standard, validate_stratified
from carnot_lift.contact import GroupMap, pullback
from carnot_lift.errors import (
    GradingIncompatible,
    InvalidParameter,
    NoSolution,
    NotClosed,
    NotStratified,
)
from carnot_lift.extensions import (
    Cocycle,
    abelian_factor_split,
    alpha_potential,
    extend,
    homomorphism_lift,
    lift_projection_residual,
    normalize_cocycle,
    pull_to_extension,
    pushforward_extension,
    trivial_extension,
)
from carnot_lift.fieldforms import FieldForm, d_c, exterior_d, identity_test
from carnot_lift.fixtures import (
    filiform,
    filiform_extension,
    heisenberg_base,
    heisenberg_extension,
    plane,
    tower_map,
)
from carnot_lift.forms import form_inner

LAYER_2 = GradedSpace(("Z",), (2,))


class TestExtend:
    @pytest.mark.parametrize("s", [1, 2, 3, 4])
    def test_filiform_tower(self, s):
        ext = filiform_extension(s)
        assert ext.algebra == filiform(s + 1)
        assert ext.report.ok
        assert validate_stratified(ext.algebra).ok

    def test_heisenberg_extension(self, h2_ext):
        h2 = make_standard("heisenberg", 2)
        assert h2_ext.algebra.basis == h2.basis
        assert h2_ext.algebra.constants == h2.constants
        assert "heisenberg" not in h2_ext.algebra.tags

    def test_split_and_join(self, f3_ext):
        point = [1, 2, 3, 4]
        h, v = f3_ext.split(point)
        assert (h, v) == ([1, 2, 3], [4])
        assert f3_ext.join(h, v) == point

    def test_projection_and_inclusion_are_graded_homomorphisms(self, f3_ext):
        assert f3_ext.projection.is_homomorphism()
        assert f3_ext.inclusion.matrix.shape == (4, 1)

    def test_not_closed(self):
        base = filiform(3)
        rho = Cocycle.from_terms(base, GradedSpace(("W",), (4,)), {("Y", "Z3"): 1})
        assert not rho.is_closed()
        with pytest.raises(NotClosed):
            extend(base, rho)

    def test_wrong_layer(self, R2):
        rho = Cocycle.from_terms(R2, GradedSpace(("W",), (3,)), {("X", "Y"): 1})
        assert rho.grading_defects() == [(("X", "Y"), "W")]
        with pytest.raises(GradingIncompatible):
            extend(R2, rho)

    def test_name_clash(self, R2):
        rho = Cocycle.from_terms(R2, GradedSpace(("X",), (2,)), {})
        with pytest.raises(InvalidParameter):
            extend(R2, rho)

    def test_unreached_values_are_not_carnot(self, R2):
        rho = Cocycle.from_terms(R2, GradedSpace(("W",), (2,)), {})
        with pytest.raises(NotStratified):
            extend(R2, rho)
        lenient = extend(R2, rho, strict=False)
        assert not lenient.report.carnot
        assert lenient.report.stratified
        assert not lenient.report.ok

    def test_trivial_extension(self, R2):
        ext = trivial_extension(R2)
        assert ext.algebra == R2
        assert ext.values.dim == 0

    def test_custom_metric(self, R2):
        ext = extend(
            R2,
            Cocycle.from_terms(R2, LAYER_2, {("X", "Y"): 1}),
            gram=[[2, 0, 0], [0, 2, 0], [0, 0, 1]],
        )
        assert not ext.report.metric
        assert ext.report.carnot


class TestPotential:
    @pytest.mark.parametrize(
        "ext",
        [
            filiform_extension(1),
            filiform_extension(2),
            filiform_extension(4),
            heisenberg_extension(2),
        ],
        ids=["plane", "H1", "F4", "R4"],
    )
    def test_d_alpha_is_rho(self, ext):
        rho = FieldForm.from_algebra_form(ext.rho)
        assert identity_test(exterior_d(alpha_potential(ext)), rho).verdict == "equal"

    def test_alpha_vanishes_at_the_identity(self, f3_ext):
        zero = {x: 0 for x in f3_ext.base.coordinates}
        assert alpha_potential(f3_ext).substitute(zero).is_zero()

    def test_heisenberg_potential(self, h1_ext):
        expected = FieldForm.from_terms(h1_ext.base, 1, {("X",): "-y/2", ("Y",): "x/2"}, h1_ext.values)
        assert identity_test(alpha_potential(h1_ext), expected).verdict == "equal"

    @pytest.mark.parametrize(
        "ext_name, f",
        [
            ("h1_ext", GroupMap(plane(), plane(), ("x + y**2", "y - x**3"))),
            ("f3_ext", tower_map(2, 2)),
            ("f3_ext", tower_map(2, 3)),
        ],
    )
    def test_d_c_of_the_pullback_does_not_see_the_potential(self, request, random_form, ext_name, f):
        ext = request.getfixturevalue(ext_name)
        alpha = alpha_potential(ext)
        other = alpha + exterior_d(random_form(ext.base, 0, 11, values=ext.values))
        assert identity_test(exterior_d(other), FieldForm.from_algebra_form(ext.rho)).equal
        change = d_c(pullback(f, other)) - d_c(pullback(f, alpha))
        assert change.tidy().is_zero()


class TestHomomorphismLift:
    def test_plane_automorphism(self, h1_ext):
        lift = homomorphism_lift(h1_ext, h1_ext, sp.diag(2, 3), [[6]])
        assert lift.psi.matrix == sp.diag(2, 3, 6)
        assert lift.psi.is_homomorphism()
        assert lift.mu == sp.zeros(2, 1)

    def test_wrong_phi_has_no_solution(self, h1_ext):
        with pytest.raises(NoSolution):
            homomorphism_lift(h1_ext, h1_ext, sp.diag(2, 3), [[5]])

    def test_cohomologous_cocycles_need_mu(self):
        base = filiform(3)
        values = GradedSpace(("W",), (3,))
        ext1 = extend(base, Cocycle.from_terms(base, values, {("Y", "Z2"): 1}))
        ext2 = extend(base, Cocycle.from_terms(base, values, {("Y", "Z2"): 1, ("X", "Z2"): 1}))
        lift = homomorphism_lift(ext1, ext2, sp.eye(4), [[1]])
        assert lift.mu[base.index("Z3"), 0] == 1
        assert lift.psi.is_homomorphism()
        assert lift.solution_dim == 2


class TestNormalization:
    def test_components_become_orthogonal(self):
        base = heisenberg_base(2)
        values = GradedSpace(("Z", "W"), (2, 2))
        terms = {("X1", "Y1"): {"Z": 1, "W": 1}, ("X2", "Y2"): {"W": 1}}
        ext = extend(base, Cocycle.from_terms(base, values, terms))
        normalized, certificate = normalize_cocycle(ext)
        z, w = normalized.rho.components()
        assert form_inner(z, w) == 0
        assert certificate.phi.matrix == sp.Matrix([[1, 0], [-1, 1]])
        assert certificate.omega.is_zero()
        assert normalized.report.ok


class TestPushforward:
    def test_sum_of_symplectic_pieces(self):
        base = heisenberg_base(2)
        values = GradedSpace(("A", "B"), (2, 2))
        ext = extend(
            base,
            Cocycle.from_terms(base, values, {("X1", "Y1"): {"A": 1}, ("X2", "Y2"): {"B": 1}}),
        )
        phi = GradedLinearMap(values, GradedSpace(("C",), (2,)), sp.Matrix([[1, 1]]))
        pushed, psi = pushforward_extension(ext, phi)
        assert pushed.algebra.dim == 5
        assert pushed.report.carnot
        assert psi.is_homomorphism()

    def test_phi_must_start_on_the_values(self, h1_ext):
        phi = GradedLinearMap.identity(GradedSpace(("Q",), (2,)))
        with pytest.raises(InvalidParameter):
            pushforward_extension(h1_ext, phi)


class TestAbelianFactor:
    def test_split_off_layer_one_values(self, R2):
        values = GradedSpace(("W", "Z2"), (1, 2))
        ext = extend(R2, Cocycle.from_terms(R2, values, {("X", "Y"): {"Z2": 1}}))
        assert ext.algebra.rank == 3
        reduced, flat = abelian_factor_split(ext)
        assert reduced.algebra == filiform(2)
        assert flat.basis == ("W",)

    def test_nothing_to_split(self, h1_ext):
        reduced, flat = abelian_factor_split(h1_ext)
        assert reduced is h1_ext
        assert flat.dim == 0


class TestLiftProjection:
    def test_pullback_of_a_coframe(self, h1_ext, R2):
        pulled = pull_to_extension(h1_ext, FieldForm.from_terms(R2, 1, {("X",): "y"}))
        assert pulled == FieldForm.from_terms(h1_ext.algebra, 1, {("X",): "y"})

    @pytest.mark.parametrize(
        "terms",
        [
            {("X",): "x*y**2", ("Y",): "sin(x)"},
            {("Y",): "x**3"},
            {("X",): "1"},
        ],
    )
    def test_residual_vanishes(self, h1_ext, R2, terms):
        omega = FieldForm.from_terms(R2, 1, terms)
        assert lift_projection_residual(h1_ext, omega).is_zero()

    @pytest.mark.parametrize("ext_name", ["h1_ext", "f3_ext"])
    @pytest.mark.parametrize("seed", range(10))
    def test_residual_vanishes_on_random_forms(self, request, random_form, ext_name, seed):
        ext = request.getfixturevalue(ext_name)
        assert lift_projection_residual(ext, random_form(ext.base, 1, seed)).is_zero()

    def test_needs_orthonormal_components(self, R2):
        ext = extend(R2, Cocycle.from_terms(R2, LAYER_2, {("X", "Y"): 2}))
        with pytest.raises(InvalidParameter):
            lift_projection_residual(ext, FieldForm.from_terms(R2, 1, {("X",): "y"}))
