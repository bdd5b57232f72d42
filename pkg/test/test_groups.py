import numpy as np
import pytest
import sympy as sp

from carnot_lift.algebra import dilation, direct_product, make_standard
from carnot_lift.errors import StepTooLarge
from carnot_lift.groups import (
    GroupPoint,
    coframe_matrix,
    dynkin_terms,
    exp_segment,
    frame_matrix,
    group_law,
    left_invariant_coframe,
    left_invariant_frame,
    numeric_law,
    structure_equation_residual,
)

H1 = make_standard("heisenberg", 1)
ALGEBRAS = [
    make_standard("filiform", 1),
    H1,
    make_standard("filiform", 4),
    make_standard("jet", 2, 2),
    direct_product(H1, H1),
]


def point(alg, *values):
    return GroupPoint(alg, tuple(sp.Rational(v) for v in values))


class TestGroupLaw:
    def test_heisenberg_law(self):
        x, y, z = H1.coordinates
        xq, yq, zq = (sp.Symbol(f"{s.name}_q", real=True) for s in H1.coordinates)
        law = group_law(H1)
        assert law[0] == x + xq
        assert law[1] == y + yq
        assert sp.expand(law[2] - (z + zq + (x * yq - y * xq) / 2)) == 0

    def test_first_dynkin_terms(self):
        terms = dynkin_terms(2)
        assert terms[(0,)] == 1
        assert terms[(1,)] == 1
        assert terms[(0, 1)] == sp.Rational(1, 2)

    def test_step_limit(self):
        with pytest.raises(StepTooLarge):
            dynkin_terms(7)
        with pytest.raises(StepTooLarge):
            GroupPoint.identity(make_standard("filiform", 7)) * GroupPoint.identity(
                make_standard("filiform", 7)
            )

    @pytest.mark.parametrize("alg", ALGEBRAS)
    def test_associativity(self, alg):
        rng = np.random.default_rng(3)
        p, q, r = (
            point(alg, *[f"{n}/7" for n in rng.integers(-9, 9, alg.dim)]) for _ in range(3)
        )
        assert (p * q) * r == p * (q * r)

    @pytest.mark.parametrize("alg", ALGEBRAS)
    def test_inverse_and_identity(self, alg):
        p = point(alg, *range(1, alg.dim + 1))
        e = GroupPoint.identity(alg)
        assert p * p.inverse() == e
        assert e * p == p

    @pytest.mark.parametrize("alg", ALGEBRAS)
    def test_dilations_are_automorphisms(self, alg):
        p = point(alg, *range(alg.dim))
        q = point(alg, *range(alg.dim, 0, -1))
        lam = sp.Rational(3, 2)
        assert (p * q).dilate(lam) == p.dilate(lam) * q.dilate(lam)
        assert sp.Matrix(p.dilate(lam).coords) == dilation(alg, lam)(p.vector)

    def test_numeric_law_matches_symbolic(self):
        f4 = make_standard("filiform", 4)
        p, q = [0.3, -1.2, 0.5, 2.0, -0.7], [1.1, 0.4, -0.2, 0.0, 0.9]
        exact = point(f4, *[repr(c) for c in p]) * point(f4, *[repr(c) for c in q])
        assert numeric_law(f4)(p, q) == pytest.approx([float(c) for c in exact.coords])

    def test_exp_segment_in_the_plane(self):
        plane = make_standard("filiform", 1)
        assert exp_segment(plane, [1.0, 2.0], [1.0, 0.0], 3.0) == pytest.approx([4.0, 2.0])


class TestFrames:
    @pytest.mark.parametrize("alg", ALGEBRAS)
    def test_coframe_is_dual_to_frame(self, alg):
        product = (sp.Matrix(coframe_matrix(alg)) * sp.Matrix(frame_matrix(alg))).applyfunc(
            sp.expand
        )
        assert product == sp.eye(alg.dim)

    @pytest.mark.parametrize("alg", ALGEBRAS)
    def test_structure_equations(self, alg):
        assert all(entry == 0 for entry in structure_equation_residual(alg))

    def test_heisenberg_frame_fields(self):
        x, y, z = H1.coordinates
        X, Y, Z = left_invariant_frame(H1)
        assert X(z) == -y / 2
        assert Y(z) == x / 2
        assert Z(x * y) == 0
        assert sp.expand(X(Y(z)) - Y(X(z))) == Z(z)

    def test_coframe_pairs_with_frame(self):
        frame = left_invariant_frame(H1)
        coframe = left_invariant_coframe(H1)
        for i, theta in enumerate(coframe):
            assert [theta.pair(e) for e in frame] == [int(i == j) for j in range(3)]

    def test_pairing_needs_a_form_and_a_field(self):
        frame = left_invariant_frame(H1)
        with pytest.raises(TypeError):
            frame[0].pair(frame[1])
