import sympy as sp
import pytest

from carnot_lift.algebra import (
    GradedLinearMap,
    GradedSpace,
    StratifiedAlgebra,
    as_rational,
    bracket,
    dilation,
    direct_product,
    make_standard,
    rational_string,
    validate_stratified,
)
from carnot_lift.errors import (
    DimensionMismatch,
    InvalidParameter,
    NotGraded,
    UnknownFamily,
)
from carnot_lift.fixtures import product_algebras


class TestRationals:
    @pytest.mark.parametrize(
        "value,expected",
        [
            (3, sp.Integer(3)),
            ("3/4", sp.Rational(3, 4)),
            (0.1, sp.Rational(1, 10)),
            (sp.Rational(-2, 6), sp.Rational(-1, 3)),
        ],
    )
    def test_as_rational(self, value, expected):
        assert as_rational(value) == expected

    def test_rational_string(self):
        assert rational_string(sp.Rational(-3, 4)) == "-3/4"
        assert rational_string(sp.Integer(5)) == "5"


class TestStandardFamilies:
    @pytest.mark.parametrize(
        "family,params,dim,step,rank",
        [
            ("heisenberg", (1,), 3, 2, 2),
            ("heisenberg", (3,), 7, 2, 6),
            ("filiform", (1,), 2, 1, 2),
            ("filiform", (5,), 6, 5, 2),
            ("euclidean", (4,), 4, 1, 4),
            ("jet", (1, 2), 4, 3, 2),
            ("jet", (2, 1), 5, 2, 4),
        ],
    )
    def test_shape_and_validity(self, family, params, dim, step, rank):
        alg = make_standard(family, *params)
        assert (alg.dim, alg.step, alg.rank) == (dim, step, rank)
        assert validate_stratified(alg).ok

    def test_heisenberg_bracket(self):
        h1 = make_standard("heisenberg", 1)
        assert bracket(h1, h1.basis_vector("X"), h1.basis_vector("Y")) == h1.basis_vector("Z")
        assert bracket(h1, h1.basis_vector("Y"), h1.basis_vector("X")) == -h1.basis_vector("Z")

    def test_filiform_coordinates(self):
        assert [s.name for s in make_standard("filiform", 3).coordinates] == ["x", "y", "z2", "z3"]

    def test_homogeneous_dimension(self):
        assert make_standard("heisenberg", 1).homogeneous_dimension == 4
        assert make_standard("filiform", 3).homogeneous_dimension == 7

    def test_tags(self):
        assert "heisenberg" in make_standard("heisenberg", 2).tags
        assert "jet" in make_standard("jet", 2, 1).tags

    def test_unknown_family(self):
        with pytest.raises(UnknownFamily):
            make_standard("klein", 2)

    @pytest.mark.parametrize(
        "family,params",
        [("heisenberg", (0,)), ("filiform", (0,)), ("jet", (1, 0)), ("jet", (1,))],
    )
    def test_bad_parameters(self, family, params):
        with pytest.raises(InvalidParameter):
            make_standard(family, *params)


class TestValidation:
    def test_grading_violation(self):
        alg = StratifiedAlgebra.from_brackets(["A", "B", "C"], [1, 1, 1], {("A", "B"): {"C": 1}})
        assert "grading" in validate_stratified(alg).kinds()

    def test_jacobi_violation(self):
        alg = StratifiedAlgebra.from_brackets(
            ["A", "B", "C"], [1, 1, 1], {("A", "B"): {"A": 1}, ("B", "C"): {"B": 1}}
        )
        assert "jacobi" in validate_stratified(alg).kinds()

    def test_antisymmetry_violation(self):
        alg = StratifiedAlgebra.from_brackets(
            ["X", "Y", "Z"], [1, 1, 2], {("X", "Y"): {"Z": 1}, ("Y", "X"): {"Z": 1}}
        )
        assert "antisymmetry" in validate_stratified(alg).kinds()

    def test_missing_stratification(self):
        alg = StratifiedAlgebra.from_brackets(["X", "Y", "Z"], [1, 1, 2])
        report = validate_stratified(alg)
        assert report.kinds() == {"stratification"}
        assert not report

    def test_layer_major_ordering(self):
        alg = StratifiedAlgebra.from_brackets(["Z", "X", "Y"], [2, 1, 1], {("X", "Y"): {"Z": 1}})
        assert "ordering" in validate_stratified(alg).kinds()

    def test_gram_must_separate_layers(self):
        alg = StratifiedAlgebra.from_brackets(
            ["X", "Y", "Z"],
            [1, 1, 2],
            {("X", "Y"): {"Z": 1}},
            gram=[[1, 0, 1], [0, 1, 0], [1, 0, 2]],
        )
        assert validate_stratified(alg).kinds() == {"gram"}

    def test_gram_shape(self):
        with pytest.raises(DimensionMismatch):
            StratifiedAlgebra.from_brackets(["X", "Y"], [1, 1], gram=[[1]])

    def test_duplicate_names(self):
        with pytest.raises(InvalidParameter):
            GradedSpace(("X", "X"), (1, 1))


class TestProducts:
    def test_product_is_layer_major(self):
        h1 = make_standard("heisenberg", 1)
        product = direct_product(h1, h1)
        assert product.basis == ("X", "Y", "X_2", "Y_2", "Z", "Z_2")
        assert product.layers == (1, 1, 1, 1, 2, 2)
        assert bracket(
            product, product.basis_vector("X_2"), product.basis_vector("Y_2")
        ) == product.basis_vector("Z_2")

    @pytest.mark.parametrize("name", list(product_algebras()))
    def test_catalog_products_are_valid(self, name):
        assert validate_stratified(product_algebras()[name]).ok


class TestGradedMaps:
    def test_dilation_is_a_homomorphism(self):
        f3 = make_standard("filiform", 3)
        delta = dilation(f3, 2)
        assert delta.matrix == sp.diag(2, 2, 4, 8)
        assert delta.is_homomorphism()

    def test_dilation_needs_positive_factor(self):
        with pytest.raises(InvalidParameter):
            dilation(make_standard("heisenberg", 1), 0)

    def test_layers_are_respected(self):
        h1 = make_standard("heisenberg", 1)
        with pytest.raises(NotGraded):
            GradedLinearMap(h1, h1, sp.Matrix([[1, 0, 0], [0, 1, 0], [1, 0, 1]]))

    def test_graded_map_that_is_not_a_homomorphism(self):
        h1 = make_standard("heisenberg", 1)
        assert not GradedLinearMap(h1, h1, sp.diag(1, 1, 2)).is_homomorphism()

    def test_composition(self):
        h1 = make_standard("heisenberg", 1)
        assert (dilation(h1, 2) @ dilation(h1, 3)).matrix == dilation(h1, 6).matrix
