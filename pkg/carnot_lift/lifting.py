"""Lifting criteria for contact maps through central extensions.

Three checks are offered, each returning a verdict object:

* `check_lift_rumin`: d_c f*α2 = L∘π_E0 ρ1 for a constant L (simply
  connected domains only); equivalent to liftability.
* `check_lift_cohomology`: f_P*ρ2 = φ∘ρ1 + d0 ω for a constant graded φ;
  necessary for liftability.
* `sufficiency_route`: which structural argument, if any, makes the
  cohomological condition sufficient.

`check_lift` runs all three and records whether they agree.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import networkx as nx
import numpy as np
import sympy as sp

from carnot_lift.algebra import GradedLinearMap, StratifiedAlgebra, make_standard
from carnot_lift.contact import GroupMap, pansu_pullback, pullback, require_contact
from carnot_lift.errors import AlgebraMismatch, NotSimplyConnected, TowerMismatch
from carnot_lift.extensions import CentralExtension, alpha_potential
from carnot_lift.fieldforms import FieldForm, d_c, exterior_d, matrix_identity_test
from carnot_lift.forms import exterior, max_nontrivial_E0_weight_2, project_E0, weight
from carnot_lift.sampling import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_TOL,
    Domain,
    clamp_samples,
    compile_matrix,
    relative_excess,
)

log = logging.getLogger(__name__)

ROUTES = ("MaxWeight", "Lip1Connected", "RuminDirect")


@dataclass(frozen=True)
class ConstantSolve:
    """Solution X of A X = B(p) that does not depend on p, if one exists.

    `exact` tells whether the verdict came from symbolic cancellation.
    `witnesses` are sample points where the pointwise solution leaves the
    common value or the system has no solution.
    """

    solution: sp.ImmutableMatrix | None
    exact: bool
    residual: float = 0.0
    witnesses: tuple[tuple[float, ...], ...] = ()
    seed: int | None = None
    samples: int = 0

    @property
    def solved(self) -> bool:
        return self.solution is not None


def _rational(matrix: sp.Matrix, symbols: Sequence[sp.Symbol]) -> bool:
    return all(sp.sympify(e).is_rational_function(*symbols) for e in matrix)


def _sampled_solve(
    a: sp.Matrix,
    b: sp.Matrix,
    symbols: Sequence[sp.Symbol],
    domain: Domain,
    samples: int,
    seed: int,
    tol: float,
) -> ConstantSolve:
    n = clamp_samples(samples)
    a_num = np.array(a.tolist(), dtype=float).reshape(a.shape)
    evaluate = compile_matrix(b, symbols)
    points, solutions, failed = [], [], []
    for p in domain.sample(n, seed):
        bp = evaluate(p)
        if not np.all(np.isfinite(bp)):
            continue
        xp, *_ = np.linalg.lstsq(a_num, bp, rcond=None)
        points.append(tuple(float(c) for c in p))
        solutions.append(xp)
        failed.append(relative_excess(a_num @ xp - bp, bp, tol) > 0)
    if not points:
        log.warning("no finite sample of the right hand side (seed %d)", seed)
        return ConstantSolve(None, exact=False, residual=np.inf, seed=seed, samples=n)

    mean = np.mean(solutions, axis=0)
    spread = [relative_excess(xp - mean, mean, tol) for xp in solutions]
    witnesses = tuple(p for p, s, bad in zip(points, spread, failed) if bad or s > 0)
    residual = max(
        max(float(np.max(np.abs(a_num @ mean - evaluate(p)), initial=0.0)) for p in points),
        0.0,
    )
    if witnesses:
        return ConstantSolve(None, False, residual, witnesses, seed, n)
    return ConstantSolve(sp.ImmutableMatrix(mean.tolist()), False, residual, (), seed, n)


def solve_constant(
    a: Any,
    b: Any,
    symbols: Sequence[sp.Symbol],
    domain: Domain | None = None,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    tol: float = DEFAULT_TOL,
) -> ConstantSolve:
    """Find a constant X with A X = B(p) for all p in the domain.

    A is a constant matrix. When B has rational function entries the
    verdict is exact; otherwise the pointwise least squares solutions at
    seeded samples must agree.
    """
    a, b = sp.Matrix(a), sp.Matrix(b)
    domain = domain or Domain.cube(len(symbols))
    if a.cols == 0:
        zero = matrix_identity_test(b, symbols, domain, samples, seed, tol)
        witness = (zero.witness,) if zero.witness else ()
        solution = sp.ImmutableMatrix(sp.zeros(0, b.cols)) if zero.equal else None
        return ConstantSolve(solution, zero.exact, 0.0, witness, zero.seed, zero.samples)

    if _rational(b, symbols):
        x = (a.pinv() * b).applyfunc(sp.cancel)
        constant = not any(sp.sympify(e).free_symbols & set(symbols) for e in x)
        residual = (a * x - b).applyfunc(lambda e: sp.cancel(sp.together(e)))
        if constant and all(e == 0 for e in residual):
            return ConstantSolve(sp.ImmutableMatrix(x), exact=True)
        sampled = _sampled_solve(a, b, symbols, domain, samples, seed, tol)
        return ConstantSolve(
            None, True, sampled.residual, sampled.witnesses, sampled.seed, sampled.samples
        )
    return _sampled_solve(a, b, symbols, domain, samples, seed, tol)


def _check_pair(f: GroupMap, ext1: CentralExtension, ext2: CentralExtension) -> None:
    if f.source != ext1.base:
        raise AlgebraMismatch("map source is not the base of the first extension")
    if f.target != ext2.base:
        raise AlgebraMismatch("map target is not the base of the second extension")


@dataclass(frozen=True)
class RuminVerdict:
    """Liftability by the Rumin condition; L maps V1 to V2 when liftable."""

    liftable: bool
    L: sp.ImmutableMatrix | None
    solve: ConstantSolve
    d_c_pullback: FieldForm

    def as_dict(self) -> dict[str, Any]:
        return {
            "liftable": self.liftable,
            "L": None if self.L is None else self.L.tolist(),
            **_solve_dict(self.solve),
        }


def check_lift_rumin(
    f: GroupMap,
    ext1: CentralExtension,
    ext2: CentralExtension,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    tol: float = DEFAULT_TOL,
) -> RuminVerdict:
    """Solve d_c f*α2 = L∘π_E0 ρ1 for a point independent L: V1 → V2."""
    _check_pair(f, ext1, ext2)
    if not f.simply_connected:
        raise NotSimplyConnected(
            "the Rumin criterion needs a simply connected domain; "
            "liftability on non simply connected sets is not local"
        )
    require_contact(f, samples=samples, seed=seed, tol=tol)

    beta = d_c(pullback(f, alpha_potential(ext2)))
    harmonic = project_E0(ext1.rho)
    # beta = R L^T with R the coefficients of π_E0 ρ1
    solve = solve_constant(
        harmonic.coeffs, beta.coeffs, f.source.coordinates, f.domain, samples, seed, tol
    )
    L = None if solve.solution is None else sp.ImmutableMatrix(solve.solution.T)
    log.info("rumin check: liftable=%s exact=%s", solve.solved, solve.exact)
    return RuminVerdict(solve.solved, L, solve, beta)


@dataclass(frozen=True)
class CohomologyVerdict:
    """f_P*ρ2 = φ∘ρ1 + d0 ω with φ constant and graded, ω pointwise."""

    holds: bool
    phi: GradedLinearMap | None
    omega: FieldForm | None
    solves: tuple[ConstantSolve, ...]

    @property
    def exact(self) -> bool:
        return all(s.exact for s in self.solves)

    @property
    def witnesses(self) -> tuple[tuple[float, ...], ...]:
        return tuple(w for s in self.solves for w in s.witnesses)

    def as_dict(self) -> dict[str, Any]:
        return {
            "holds": self.holds,
            "phi": None if self.phi is None else self.phi.matrix.tolist(),
            "exact": self.exact,
            "witnesses": [list(w) for w in self.witnesses],
            "residual": max((s.residual for s in self.solves), default=0.0),
        }


def check_lift_cohomology(
    f: GroupMap,
    ext1: CentralExtension,
    ext2: CentralExtension,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    tol: float = DEFAULT_TOL,
) -> CohomologyVerdict:
    """Decide whether f_P*ρ2 - φ∘ρ1 lies in im(d0) for some constant graded φ.

    Projecting onto im(d0)^⊥ turns the condition into one linear system per
    component of V2, with unknowns restricted to V1 vectors of the same
    layer. ω is then d0^{-1} of the difference.
    """
    _check_pair(f, ext1, ext2)
    pulled = pansu_pullback(f, ext2.rho, samples=samples, seed=seed, tol=tol)
    ext = exterior(f.source)
    q = sp.eye(ext.size(2)) - ext.image_projector(2)
    r1 = sp.Matrix(ext1.rho.coeffs)
    b = q * pulled.coeffs
    v1, v2 = ext1.values, ext2.values

    phi = sp.zeros(v2.dim, v1.dim)
    solves = []
    for j in range(v2.dim):
        allowed = [i for i in range(v1.dim) if v1.layers[i] == v2.layers[j]]
        a = (q * r1).extract(list(range(r1.rows)), allowed)
        solve = solve_constant(
            a, b[:, j], f.source.coordinates, f.domain, samples, seed, tol
        )
        solves.append(solve)
        if solve.solution is not None:
            for slot, i in enumerate(allowed):
                phi[j, i] = solve.solution[slot, 0]

    holds = all(s.solved for s in solves)
    if not holds:
        log.info("cohomology check fails with %d witnesses", sum(len(s.witnesses) for s in solves))
        return CohomologyVerdict(False, None, None, tuple(solves))
    omega_coeffs = ext.pseudoinverse(2) * (pulled.coeffs - r1 * phi.T)
    omega = FieldForm(f.source, 1, v2, omega_coeffs.applyfunc(sp.expand))
    return CohomologyVerdict(True, GradedLinearMap(v1, v2, phi), omega, tuple(solves))


def _bracket_components(alg: StratifiedAlgebra) -> list[list[int]]:
    """Index sets of the factors joined by non-zero structure constants."""
    graph = nx.Graph()
    graph.add_nodes_from(range(alg.dim))
    for j, k, i, _ in alg.terms:
        graph.add_edges_from([(j, k), (k, i)])
    return [sorted(c) for c in nx.connected_components(graph)]


def _is_heisenberg(alg: StratifiedAlgebra, indices: list[int]) -> bool:
    horizontal = [i for i in indices if alg.layers[i] == 1]
    top = [i for i in indices if alg.layers[i] == 2]
    if len(top) != 1 or len(horizontal) + 1 != len(indices):
        return False
    form = sp.Matrix(
        len(horizontal),
        len(horizontal),
        lambda a, b: alg.constants[horizontal[a]][horizontal[b]][top[0]],
    )
    return form.rank() == len(horizontal)


def _is_jet(alg: StratifiedAlgebra, indices: list[int]) -> bool:
    """Do the brackets on `indices` (in basis order) match a standard jet algebra?"""
    k = max(alg.layers[i] for i in indices) - 1
    rank = sum(1 for i in indices if alg.layers[i] == 1)
    if k < 1:
        return False
    for n in range(1, rank):
        if n + math.comb(n + k - 1, k) != rank:
            continue
        model = make_standard("jet", n, k)
        if model.dim != len(indices) or tuple(model.layers) != tuple(alg.layers[i] for i in indices):
            continue
        span = range(model.dim)
        if all(
            model.constants[a][b][c] == alg.constants[indices[a]][indices[b]][indices[c]]
            for a, b, c in itertools.product(span, span, span)
        ):
            return True
    return False


def is_lipschitz_1_connected(alg: StratifiedAlgebra) -> bool:
    """Structural recognizer: products of Euclidean factors, Heisenberg
    algebras of rank at least 4 and jet algebras of rank at least 3."""
    for indices in _bracket_components(alg):
        rank = sum(1 for i in indices if alg.layers[i] == 1)
        if len(indices) == 1 and rank == 1:
            continue
        if _is_heisenberg(alg, indices):
            if rank >= 4:
                continue
            return False
        if rank >= 3 and _is_jet(alg, indices):
            continue
        return False
    return True


@dataclass(frozen=True)
class SufficiencyVerdict:
    """`route` is the first entry of `routes`, or None when none applies."""

    route: str | None
    routes: tuple[str, ...]
    cocycle_weight: float
    max_weight: int

    def as_dict(self) -> dict[str, Any]:
        return {
            "route": self.route,
            "routes": list(self.routes),
            "cocycle_weight": None if self.cocycle_weight == np.inf else self.cocycle_weight,
            "max_weight": self.max_weight,
        }


def sufficiency_route(
    f: GroupMap,
    ext1: CentralExtension,
    ext2: CentralExtension,
    rumin: RuminVerdict | None = None,
) -> SufficiencyVerdict:
    """Which argument makes the cohomological condition sufficient."""
    _check_pair(f, ext1, ext2)
    wt = weight(ext2.rho)
    top = max_nontrivial_E0_weight_2(f.source)
    routes = []
    if wt >= top:
        routes.append("MaxWeight")
    if is_lipschitz_1_connected(f.source):
        routes.append("Lip1Connected")
    if rumin is not None and rumin.liftable:
        routes.append("RuminDirect")
    return SufficiencyVerdict(routes[0] if routes else None, tuple(routes), wt, top)


def contact_equations_residual(
    f: GroupMap, tower: Sequence[CentralExtension]
) -> list[FieldForm]:
    """Horizontal part of d(x̃∘f) - f*α̃ for the V coordinates of each stage.

    `tower` lists extensions whose bases chain up: each stage extends the
    algebra of the previous one and f maps into the algebra of the last.
    All residuals vanish exactly when f is contact.
    """
    if not tower:
        raise TowerMismatch("empty tower")
    for lower, upper in zip(tower, tower[1:]):
        if upper.base != lower.algebra:
            raise TowerMismatch(f"{upper.base.basis} does not extend {lower.algebra.basis}")
    if f.target.basis != tower[-1].algebra.basis:
        raise TowerMismatch("map does not land in the top of the tower")

    source = f.source
    horizontal = set(source.horizontal)
    residuals = []
    for stage in tower:
        top = f.onto(stage.algebra)
        _, v_components = stage.split(top.components)
        coords = sp.Matrix([v_components])
        if not v_components:
            coords = sp.zeros(1, 0)
        function = FieldForm(source, 0, stage.values, coords)
        difference = exterior_d(function) - pullback(f.onto(stage.base), alpha_potential(stage))
        mask = sp.Matrix(
            difference.coeffs.rows,
            difference.coeffs.cols,
            lambda r, c: difference.coeffs[r, c] if r in horizontal else 0,
        )
        residuals.append(difference.with_coeffs(mask).tidy())
    return residuals


@dataclass(frozen=True)
class LiftVerdict:
    """All three checks. `consistent` is False when the Rumin verdict and the
    cohomological one contradict each other."""

    rumin: RuminVerdict | None
    cohomology: CohomologyVerdict
    sufficiency: SufficiencyVerdict | None
    consistent: bool
    provenance: dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        return {
            "rumin": None if self.rumin is None else self.rumin.as_dict(),
            "cohomology": self.cohomology.as_dict(),
            "sufficiency": None if self.sufficiency is None else self.sufficiency.as_dict(),
            "consistent": self.consistent,
            "provenance": self.provenance,
        }


def _solve_dict(solve: ConstantSolve) -> dict[str, Any]:
    return {
        "exact": solve.exact,
        "residual": solve.residual,
        "witnesses": [list(w) for w in solve.witnesses],
    }


def check_lift(
    f: GroupMap,
    ext1: CentralExtension,
    ext2: CentralExtension,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    tol: float = DEFAULT_TOL,
) -> LiftVerdict:
    """Run every criterion; the Rumin one only on simply connected domains."""
    options = dict(samples=samples, seed=seed, tol=tol)
    rumin = check_lift_rumin(f, ext1, ext2, **options) if f.simply_connected else None
    cohomology = check_lift_cohomology(f, ext1, ext2, **options)
    sufficiency = sufficiency_route(f, ext1, ext2, rumin) if cohomology.holds else None

    consistent = True
    if rumin is not None:
        if rumin.liftable and not cohomology.holds:
            consistent = False
        if sufficiency is not None and sufficiency.route and not rumin.liftable:
            consistent = False
    if not consistent:
        log.warning("lift criteria disagree for %s", f.name or "map")
    return LiftVerdict(rumin, cohomology, sufficiency, consistent, dict(options))
