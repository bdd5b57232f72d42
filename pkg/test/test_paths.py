import itertools
import math

import numpy as np
import pytest
import sympy as sp

from carnot_lift.algebra import GradedSpace
from carnot_lift.contact import GroupMap
from carnot_lift.errors import (
    AlgebraMismatch,
    BasepointMismatch,
    InconsistentHolonomy,
    LoopNotClosed,
    NotHorizontal,
    RankMismatch,
    Violation,
)
from carnot_lift.extensions import Cocycle, alpha_potential, extend
from carnot_lift.fixtures import (
    filiform,
    filiform_extension,
    spiral_partial_lift,
    spiral_probes,
    stokes_cases,
    tower_map,
    unit_circle,
    winding_domain,
    winding_lift,
)
from carnot_lift.paths import (
    MoveCurve,
    PolylineCurve,
    SymbolicCurve,
    T,
    check_horizontal,
    commutator_words,
    construct_lift_on_grid,
    fiber_homomorphism_check,
    integrate_fixed,
    lift_horizontal_curve,
    loop_holonomy,
    stokes_check,
)

SQUARE = ((0, 1.0), (1, 1.0), (0, -1.0), (1, -1.0))


class TestHolonomy:
    @pytest.mark.parametrize("radius, area", [(1, math.pi), (2, 4 * math.pi), ("1/2", math.pi / 4)])
    def test_circle_encloses_its_area(self, h1_ext, R2, radius, area):
        assert loop_holonomy(h1_ext, unit_circle(R2, radius)) == pytest.approx([area], rel=1e-8)

    @pytest.mark.parametrize("side", [0.5, 1.0, 3.0])
    def test_square_moves(self, h1_ext, R2, side):
        moves = tuple((i, s * side) for i, s in SQUARE)
        assert loop_holonomy(h1_ext, MoveCurve(R2, [0.0, 0.0], moves)) == pytest.approx([side**2], rel=1e-8)

    def test_orientation(self, h1_ext, R2):
        clockwise = SymbolicCurve(R2, ("cos(2*pi*t)", "-sin(2*pi*t)"))
        assert loop_holonomy(h1_ext, clockwise) == pytest.approx([-math.pi])

    def test_fixed_rule_agrees(self, h1_ext, R2):
        value = integrate_fixed(alpha_potential(h1_ext), unit_circle(R2), 64)
        assert value == pytest.approx([math.pi])

    @pytest.mark.parametrize("lam", ["1/2", "2", "4"])
    def test_dilated_loop_scales_quadratically(self, h1_ext, R2, lam):
        shape = ("cos(2*pi*t) + cos(4*pi*t)/3", "sin(2*pi*t) - sin(6*pi*t)/5")
        base = loop_holonomy(h1_ext, SymbolicCurve(R2, shape))
        dilated = SymbolicCurve(R2, tuple(f"({lam})*({c})" for c in shape))
        expected = float(sp.Rational(lam)) ** 2 * base
        assert loop_holonomy(h1_ext, dilated) == pytest.approx(expected, rel=1e-8)

    def test_halving_the_step_cuts_the_error(self, h1_ext, R2):
        # a closed loop with a non periodic integrand
        x = sp.exp(4 * T) - 1 - (sp.exp(4) - 1) * T
        y = T - T**2
        exact = float(sp.integrate((x * sp.diff(y, T) - y * sp.diff(x, T)) / 2, (T, 0, 1)))
        loop = SymbolicCurve(R2, (x, y))
        errors = [abs(integrate_fixed(alpha_potential(h1_ext), loop, n)[0] - exact) for n in (1, 2, 4, 8)]
        assert errors[0] > 1e-6
        for coarse, fine in itertools.pairwise(errors):
            assert fine <= coarse / 3

    def test_open_curve(self, h1_ext, R2):
        with pytest.raises(LoopNotClosed):
            loop_holonomy(h1_ext, SymbolicCurve(R2, ("t", "0")))

    def test_commutator_loop_in_heisenberg(self, f3_ext):
        (word,) = commutator_words([0, 1], 2, 0.5)
        assert word == ((0, 0.5), (1, 0.5), (0, -0.5), (1, -0.5))
        loop = MoveCurve(f3_ext.base, [0.0, 0.0, 0.0], word)
        with pytest.raises(LoopNotClosed):
            loop_holonomy(f3_ext, loop)

    def test_depth_three_words_close_in_heisenberg(self, f3_ext):
        words = commutator_words([0, 1], 3, 0.5)
        assert len(words) == 2
        for word in words:
            loop = MoveCurve(f3_ext.base, [0.0, 0.0, 0.0], word)
            assert np.allclose(loop.end, 0.0)
            assert abs(loop_holonomy(f3_ext, loop)[0]) > 1e-3


class TestLifting:
    def test_circle_lift(self, h1_ext, R2):
        lifted = lift_horizontal_curve(h1_ext, unit_circle(R2), [1.0, 0.0, 0.5])
        end = lifted.trajectory([0.0, 0.5, 1.0])[-1]
        assert end == pytest.approx([1.0, 0.0, 0.5 + math.pi], abs=1e-8)
        check_horizontal(lifted)

    def test_square_lift(self, h1_ext, R2):
        lifted = lift_horizontal_curve(h1_ext, MoveCurve(R2, [0.0, 0.0], SQUARE), [0.0, 0.0, 0.0])
        rows = lifted.trajectory(np.linspace(0.0, 1.0, 5))
        assert rows[2] == pytest.approx([1.0, 1.0, 0.5])
        assert rows[-1] == pytest.approx([0.0, 0.0, 1.0])

    def test_polyline(self, h1_ext, R2):
        triangle = PolylineCurve(R2, np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]))
        assert loop_holonomy(h1_ext, triangle) == pytest.approx([0.5])

    def test_lift_in_a_step_two_base(self, f3_ext):
        word = ((0, 1.0), (1, 1.0), (0, -1.0), (1, -1.0))
        curve = MoveCurve(f3_ext.base, [0.0, 0.0, 0.0], word)
        lifted = lift_horizontal_curve(f3_ext, curve, [0.0, 0.0, 0.0, 0.0])
        assert lifted.position(1.0)[:3] == pytest.approx(curve.end)
        check_horizontal(lifted)

    def test_curve_must_be_horizontal(self, f3_ext):
        with pytest.raises(NotHorizontal):
            lift_horizontal_curve(f3_ext, SymbolicCurve(filiform(2), ("t", "0", "t")), [0, 0, 0, 0])

    def test_curve_on_the_wrong_algebra(self, h1_ext):
        with pytest.raises(AlgebraMismatch):
            lift_horizontal_curve(h1_ext, SymbolicCurve(filiform(2), ("t", "0", "0")), [0, 0, 0])

    def test_basepoint_over_the_start(self, h1_ext, R2):
        with pytest.raises(BasepointMismatch):
            lift_horizontal_curve(h1_ext, unit_circle(R2), [0.0, 0.0, 0.0])

    def test_layer_one_values_need_splitting(self, R2):
        values = GradedSpace(("W", "Z2"), (1, 2))
        ext = extend(R2, Cocycle.from_terms(R2, values, {("X", "Y"): {"Z2": 1}}))
        with pytest.raises(RankMismatch):
            lift_horizontal_curve(ext, unit_circle(R2), [1.0, 0.0, 0.0, 0.0])


class TestGridLift:
    @pytest.mark.parametrize("s, spacing, radius", [(1, 0.25, 2), (2, 0.1, 5)])
    def test_tower_scaling_is_recovered(self, s, spacing, radius):
        ext = filiform_extension(s)
        grid = construct_lift_on_grid(
            ext, ext, tower_map(s, 2), [0.0] * (s + 2), spacing=spacing, radius=radius
        )
        lift = tower_map(s + 1, 2)
        for point, value in grid.nodes.values():
            assert value == pytest.approx(lift.evaluate(point), abs=1e-6)
        assert grid.phi == pytest.approx(np.array([[2.0**s]]), rel=1e-6)

    def test_lifts_differ_by_a_central_element(self, h1_ext):
        f = tower_map(1, 2)
        grid = construct_lift_on_grid(h1_ext, h1_ext, f, [0.0, 0.0, 0.0])
        start = grid.nodes[(1, 0)][0]
        other = construct_lift_on_grid(h1_ext, h1_ext, f, start, base_value=[1.0])
        shared = 0
        for (i, j), (point, value) in other.nodes.items():
            if (i + 1, j) in grid.nodes:
                shared += 1
                before_point, before_value = grid.nodes[(i + 1, j)]
                assert point == pytest.approx(before_point)
                assert value - before_value == pytest.approx([0.0, 0.0, 1.0], abs=1e-6)
        assert shared > 1

    def test_evaluate_on_a_fiber(self, h1_ext):
        grid = construct_lift_on_grid(h1_ext, h1_ext, tower_map(1, 2), [0.0, 0.0, 0.0])
        point, value = grid.nodes[(1, 1)]
        moved = point + np.array([0.0, 0.0, 0.3])
        assert grid.evaluate(moved) == pytest.approx(value + np.array([0.0, 0.0, 0.6]), abs=1e-6)

    def test_non_constant_jacobian_is_inconsistent(self, h1_ext):
        shear = GroupMap(h1_ext.base, h1_ext.base, ("x**2", "y"), winding_domain())
        with pytest.raises(InconsistentHolonomy) as excinfo:
            construct_lift_on_grid(h1_ext, h1_ext, shear, [1.25, 0.0, 0.0])
        assert excinfo.value.worst is not None


class TestStokes:
    @pytest.mark.parametrize("case", stokes_cases())
    def test_disk_maps(self, case):
        ext, u, omega = case
        assert stokes_check(ext, u, omega).residual <= 1e-7

    def test_area_of_a_stretched_disk(self, h1_ext, R2):
        u = GroupMap(R2, R2, ("2*x", "3*y"))
        report = stokes_check(h1_ext, u)
        assert report.surface == pytest.approx([6 * math.pi])
        assert report.boundary == pytest.approx([6 * math.pi])


class TestFiberHomomorphism:
    @pytest.mark.parametrize("k", [2, 3])
    def test_winding_lift(self, h1_ext, k):
        phi = fiber_homomorphism_check(winding_lift(k), h1_ext, h1_ext)
        assert phi == pytest.approx(np.array([[float(k)]]))

    def test_spiral_lift_has_no_fiber_map(self, h1_ext):
        with pytest.raises(Violation):
            fiber_homomorphism_check(spiral_partial_lift(), h1_ext, h1_ext, probes=spiral_probes())

    def test_map_must_go_between_the_extensions(self, h1_ext, f3_ext):
        with pytest.raises(AlgebraMismatch):
            fiber_homomorphism_check(tower_map(3, 2), h1_ext, f3_ext)
