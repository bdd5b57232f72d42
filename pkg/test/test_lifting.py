import pytest
import sympy as sp

from carnot_lift.algebra import StratifiedAlgebra, direct_product, make_standard
from carnot_lift.contact import GroupMap
from carnot_lift.errors import AlgebraMismatch, NotSimplyConnected, TowerMismatch
from carnot_lift.fixtures import (
    consistency_cases,
    filiform,
    filiform_extension,
    filiform_tower,
    product_algebras,
    tower_map,
    winding_map,
)
from carnot_lift.lifting import (
    check_lift,
    check_lift_cohomology,
    check_lift_rumin,
    contact_equations_residual,
    is_lipschitz_1_connected,
    solve_constant,
    sufficiency_route,
)
from carnot_lift.sampling import Domain

CASES = {case.name: case for case in consistency_cases()}

# name: (liftable, entries of phi) with None where the cohomological condition fails
EXPECTED = {
    "identity over the plane": (True, [1]),
    "det 2 linear map": (True, [2]),
    "winding k=2": (True, [2]),
    "winding k=3": (True, [3]),
    "non-constant determinant": (False, None),
    "isotropic into R4": (True, []),
    "not isotropic into R4": (False, None),
    "winding lift k=2 to F3": (False, None),
    "F2 scaling to F3": (True, [4]),
    "F3 scaling to F4": (True, [8]),
    "identity of H1 to F3": (True, [1]),
    "symplectic scaling of R4": (True, [1]),
    "R4 identity": (True, [1]),
}


class TestSolveConstant:
    def test_exact_solution(self):
        x, y = sp.symbols("x y")
        solve = solve_constant([[1], [2]], [[3], [6]], [x, y])
        assert solve.exact
        assert solve.solution == sp.Matrix([[3]])

    def test_depends_on_the_point(self):
        x, y = sp.symbols("x y")
        solve = solve_constant([[1]], [[x]], [x, y], samples=8)
        assert not solve.solved
        assert solve.exact
        assert solve.witnesses

    def test_sampled_solution(self):
        x, y = sp.symbols("x y", real=True)
        domain = Domain.box((0.5, 2.0), (-1.0, 1.0))
        solve = solve_constant([[1]], [[sp.sqrt(x**2) / x]], [x, y], domain)
        assert solve.solved
        assert float(solve.solution[0, 0]) == pytest.approx(1.0)

    def test_no_unknowns(self):
        x, y = sp.symbols("x y")
        assert solve_constant(sp.zeros(2, 0), [[0], [0]], [x, y]).solved
        assert not solve_constant(sp.zeros(1, 0), [[x]], [x, y]).solved


class TestRumin:
    def test_winding_maps(self, h1_ext):
        two = check_lift_rumin(winding_map(2), h1_ext, h1_ext)
        three = check_lift_rumin(winding_map(3), h1_ext, h1_ext)
        assert two.liftable and three.liftable
        assert float(two.L[0, 0]) == pytest.approx(2.0)
        assert three.solve.exact
        assert three.L == sp.Matrix([[3]])

    def test_non_constant_jacobian(self, h1_ext):
        verdict = check_lift_rumin(CASES["non-constant determinant"].f, h1_ext, h1_ext)
        assert not verdict.liftable
        assert verdict.L is None
        assert verdict.solve.witnesses

    def test_needs_simply_connected_domain(self, h1_ext):
        domain = Domain("annulus", radii=(1.0, 2.0), simply_connected=False)
        f = GroupMap.identity(h1_ext.base, domain=domain)
        with pytest.raises(NotSimplyConnected):
            check_lift_rumin(f, h1_ext, h1_ext)

    def test_map_must_match_the_bases(self, h1_ext, f3_ext):
        with pytest.raises(AlgebraMismatch):
            check_lift_rumin(winding_map(2), f3_ext, h1_ext)


class TestCohomology:
    def test_tower_scaling(self, f3_ext):
        verdict = check_lift_cohomology(tower_map(2, 3), f3_ext, f3_ext)
        assert verdict.holds
        assert verdict.exact
        assert verdict.phi.matrix == sp.Matrix([[9]])
        assert verdict.omega.is_zero()

    def test_winding_lift_fails(self, f3_ext):
        verdict = check_lift_cohomology(CASES["winding lift k=2 to F3"].f, f3_ext, f3_ext)
        assert not verdict.holds
        assert verdict.witnesses
        assert verdict.as_dict()["phi"] is None


class TestSufficiency:
    def test_max_weight_on_the_plane(self, h1_ext):
        verdict = sufficiency_route(tower_map(1, 2), h1_ext, h1_ext)
        assert verdict.route == "MaxWeight"
        assert verdict.routes == ("MaxWeight", "Lip1Connected")
        assert verdict.max_weight == 2

    def test_heisenberg_source(self, f3_ext):
        rumin = check_lift_rumin(tower_map(2, 2), f3_ext, f3_ext)
        verdict = sufficiency_route(tower_map(2, 2), f3_ext, f3_ext, rumin)
        assert verdict.routes == ("MaxWeight", "RuminDirect")
        assert verdict.cocycle_weight == 3

    @pytest.mark.parametrize(
        "name, expected",
        [("R3", True), ("H1xR", False), ("H1xH1", False), ("H2", True), ("J1R2", True), ("H2xR2", True)],
    )
    def test_lipschitz_1_connected_products(self, name, expected):
        assert is_lipschitz_1_connected(product_algebras()[name]) is expected

    @pytest.mark.parametrize(
        "alg, expected",
        [
            (filiform(3), False),
            (make_standard("jet", 1, 2), False),
            (make_standard("jet", 2, 2), True),
            (make_standard("heisenberg", 3), True),
        ],
    )
    def test_lipschitz_1_connected(self, alg, expected):
        assert is_lipschitz_1_connected(alg) is expected

    def test_jet_factor_does_not_vouch_for_other_factors(self):
        free = StratifiedAlgebra.from_brackets(
            ["X1", "X2", "X3", "Y12", "Y13", "Y23"],
            [1, 1, 1, 2, 2, 2],
            {("X1", "X2"): {"Y12": 1}, ("X1", "X3"): {"Y13": 1}, ("X2", "X3"): {"Y23": 1}},
        )
        assert not is_lipschitz_1_connected(free)
        assert not is_lipschitz_1_connected(direct_product(free, make_standard("jet", 2, 1)))
        assert not is_lipschitz_1_connected(direct_product(free, make_standard("jet", 2, 2)))

    def test_jet_factor_of_a_product_is_recognised(self):
        product = direct_product(make_standard("euclidean", 1), make_standard("jet", 2, 2))
        assert is_lipschitz_1_connected(product)


class TestConsistency:
    @pytest.mark.parametrize("name", list(EXPECTED))
    def test_criteria_agree(self, name):
        case = CASES[name]
        liftable, phi = EXPECTED[name]
        verdict = check_lift(case.f, case.ext1, case.ext2)
        assert verdict.consistent
        assert verdict.rumin.liftable is liftable
        assert verdict.cohomology.holds is (phi is not None)
        if phi is not None:
            got = [float(c) for c in verdict.cohomology.phi.matrix]
            assert got == pytest.approx(phi)
            assert verdict.sufficiency.route is not None

    def test_every_case_is_listed(self):
        assert set(CASES) == set(EXPECTED)

    def test_provenance(self, h1_ext):
        verdict = check_lift(winding_map(2), h1_ext, h1_ext, samples=16, seed=7)
        assert verdict.provenance == {"samples": 16, "seed": 7, "tol": 1e-9}

    def test_rumin_skipped_without_simply_connected(self, h1_ext):
        domain = Domain("annulus", radii=(0.5, 2.0), simply_connected=False)
        f = GroupMap(h1_ext.base, h1_ext.base, ("x", "y"), domain)
        verdict = check_lift(f, h1_ext, h1_ext)
        assert verdict.rumin is None
        assert verdict.cohomology.holds


class TestContactEquations:
    def test_tower_scaling_solves_them(self):
        residuals = contact_equations_residual(tower_map(5, 2), filiform_tower(5))
        assert len(residuals) == 4
        assert all(r.is_zero() for r in residuals)

    def test_vertical_shift_does_not(self):
        alg = filiform(2)
        f = GroupMap(alg, alg, ("x", "y", "z2 + x"))
        (residual,) = contact_equations_residual(f, [filiform_extension(1)])
        assert not residual.is_zero()

    def test_tower_must_chain(self):
        with pytest.raises(TowerMismatch):
            contact_equations_residual(tower_map(3, 2), [filiform_extension(1), filiform_extension(3)])
        with pytest.raises(TowerMismatch):
            contact_equations_residual(tower_map(3, 2), [])
