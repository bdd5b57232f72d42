"""Horizontal curves, their lifts through central extensions and holonomy.

Everything here is floating point. A curve is parametrised on [0, 1] and
knows its position and coordinate velocity; line integrals of 1-forms use
composite 4-point Gauss-Legendre rules, adaptive by default.
"""

import itertools
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Sequence

import numpy as np
import sympy as sp

from carnot_lift.algebra import StratifiedAlgebra
from carnot_lift.contact import GroupMap, pansu_pullback
from carnot_lift.errors import (
    AlgebraMismatch,
    BasepointMismatch,
    DimensionMismatch,
    InconsistentHolonomy,
    InvalidParameter,
    LoopNotClosed,
    NotHorizontal,
    NotSimplyConnected,
    RankMismatch,
    Violation,
)
from carnot_lift.expressions import check_supported, parse_expression
from carnot_lift.extensions import CentralExtension, alpha_potential
from carnot_lift.fieldforms import FieldForm, as_field_form
from carnot_lift.forms import FormBase, d0
from carnot_lift.groups import exp_segment, numeric_coframe, numeric_frame
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

T = sp.Symbol("t", real=True)
NODES, WEIGHTS = np.polynomial.legendre.leggauss(4)
MAX_DEPTH = 40


class Curve(ABC):
    """A curve [0, 1] → group of `alg` in exponential coordinates."""

    alg: StratifiedAlgebra

    @abstractmethod
    def position(self, t: float) -> np.ndarray: ...

    @abstractmethod
    def velocity(self, t: float) -> np.ndarray: ...

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Parameters where the curve may fail to be smooth, including 0 and 1."""
        return (0.0, 1.0)

    def derivative(self, t: float) -> np.ndarray:
        """Left-trivialized derivative θ(γ'(t))."""
        return numeric_coframe(self.alg)(self.position(t)) @ self.velocity(t)

    def sample(self, times: Sequence[float]) -> np.ndarray:
        return np.array([self.position(t) for t in times])


@dataclass(frozen=True, eq=False)
class SymbolicCurve(Curve):
    """t ↦ expressions in the parameter `t`."""

    alg: StratifiedAlgebra
    expressions: tuple[Any, ...]
    name: str = ""

    def __post_init__(self):
        if len(self.expressions) != self.alg.dim:
            raise DimensionMismatch(f"curve needs {self.alg.dim} coordinates")
        parsed = tuple(
            parse_expression(e, [T])
            if isinstance(e, (str, int, float))
            else check_supported(e, [T])
            for e in self.expressions
        )
        object.__setattr__(self, "expressions", parsed)

    @cached_property
    def _position(self) -> Callable[[Sequence[float]], np.ndarray]:
        return compile_matrix(sp.Matrix(self.expressions), [T])

    @cached_property
    def _velocity(self) -> Callable[[Sequence[float]], np.ndarray]:
        return compile_matrix(sp.Matrix(self.expressions).diff(T), [T])

    def position(self, t: float) -> np.ndarray:
        return self._position([t]).reshape(-1)

    def velocity(self, t: float) -> np.ndarray:
        return self._velocity([t]).reshape(-1)


def _locate(t: float, pieces: int) -> tuple[int, float]:
    """Segment index and local parameter for `pieces` equal segments."""
    scaled = min(max(t, 0.0), 1.0) * pieces
    j = min(int(scaled), pieces - 1)
    return j, scaled - j


@dataclass(frozen=True, eq=False)
class PolylineCurve(Curve):
    """Straight segments in exponential coordinates through `points`."""

    alg: StratifiedAlgebra
    points: np.ndarray
    name: str = ""

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.alg.dim or len(points) < 2:
            raise DimensionMismatch("a polyline needs at least two points of the right size")
        object.__setattr__(self, "points", points)

    @property
    def pieces(self) -> int:
        return len(self.points) - 1

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(j / self.pieces for j in range(self.pieces + 1))

    def position(self, t: float) -> np.ndarray:
        j, s = _locate(t, self.pieces)
        return (1 - s) * self.points[j] + s * self.points[j + 1]

    def velocity(self, t: float) -> np.ndarray:
        j, _ = _locate(t, self.pieces)
        return self.pieces * (self.points[j + 1] - self.points[j])


Move = tuple[int, float]


@dataclass(frozen=True, eq=False)
class MoveCurve(Curve):
    """Concatenated exponential segments g ↦ g·exp(s·length·e_i).

    Each move takes the same share of [0, 1]. Moves along horizontal basis
    vectors give horizontal curves.
    """

    alg: StratifiedAlgebra
    start: np.ndarray
    moves: tuple[Move, ...]
    name: str = ""

    def __post_init__(self):
        if not self.moves:
            raise InvalidParameter("a move curve needs at least one move")
        object.__setattr__(self, "start", np.asarray(self.start, dtype=float))
        object.__setattr__(self, "moves", tuple((int(i), float(s)) for i, s in self.moves))

    @cached_property
    def vertices(self) -> np.ndarray:
        out = [self.start]
        for i, length in self.moves:
            out.append(exp_segment(self.alg, out[-1], self._direction(i), length))
        return np.array(out)

    def _direction(self, i: int) -> np.ndarray:
        e = np.zeros(self.alg.dim)
        e[i] = 1.0
        return e

    @property
    def breakpoints(self) -> tuple[float, ...]:
        n = len(self.moves)
        return tuple(j / n for j in range(n + 1))

    def position(self, t: float) -> np.ndarray:
        j, s = _locate(t, len(self.moves))
        i, length = self.moves[j]
        return exp_segment(self.alg, self.vertices[j], self._direction(i), s * length)

    def velocity(self, t: float) -> np.ndarray:
        j, _ = _locate(t, len(self.moves))
        i, length = self.moves[j]
        u = self._direction(i) * length * len(self.moves)
        return numeric_frame(self.alg)(self.position(t)) @ u

    @property
    def end(self) -> np.ndarray:
        return self.vertices[-1]


@dataclass(frozen=True, eq=False)
class ComposedCurve(Curve):
    """f∘γ for a smooth map f."""

    f: GroupMap
    inner: Curve

    def __post_init__(self):
        if self.inner.alg != self.f.source:
            raise AlgebraMismatch("curve does not live on the source of the map")

    @property
    def alg(self) -> StratifiedAlgebra:  # pyright: ignore[reportIncompatibleVariableOverride]
        return self.f.target

    @cached_property
    def _jacobian(self) -> Callable[[Sequence[float]], np.ndarray]:
        return compile_matrix(self.f.jacobian, self.f.source.coordinates)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.inner.breakpoints

    def position(self, t: float) -> np.ndarray:
        return self.f.evaluate(self.inner.position(t))

    def velocity(self, t: float) -> np.ndarray:
        return self._jacobian(self.inner.position(t)) @ self.inner.velocity(t)


def horizontal_defect(curve: Curve, times: Sequence[float]) -> tuple[float, float]:
    """Largest relative size of the non-horizontal derivative, and where."""
    vertical = [i for i, k in enumerate(curve.alg.layers) if k != 1]
    worst, where = -math.inf, 0.0
    for t in times:
        u = curve.derivative(t)
        excess = relative_excess(u[vertical], np.linalg.norm(u), 0.0)
        if excess > worst:
            worst, where = excess, t
    return worst, where


def check_horizontal(curve: Curve, tol: float = 1e-8, checks: int = 33) -> None:
    times = np.linspace(0.0, 1.0, checks)
    worst, where = horizontal_defect(curve, times)
    scale = max(np.linalg.norm(curve.derivative(t)) for t in times)
    if worst > tol * (1 + scale):
        raise NotHorizontal(f"curve leaves the horizontal distribution near t={where:.6g}")


@dataclass(frozen=True)
class LineIntegral:
    """∫_γ ω with an error estimate and the number of subintervals used."""

    value: np.ndarray
    error: float
    intervals: int


def _integrand(omega: FormBase, curve: Curve) -> Callable[[float], np.ndarray]:
    omega = as_field_form(omega)
    if omega.degree != 1:
        raise DimensionMismatch("line integrals need a 1-form")
    if omega.alg != curve.alg:
        raise AlgebraMismatch("form and curve live on different groups")
    coefficients = compile_matrix(omega.coordinate_coefficients(), omega.alg.coordinates)
    return lambda t: coefficients(curve.position(t)).T @ curve.velocity(t)


def _gauss(integrand: Callable[[float], np.ndarray], a: float, b: float) -> np.ndarray:
    half, mid = (b - a) / 2, (a + b) / 2
    return half * sum(w * integrand(mid + half * x) for x, w in zip(NODES, WEIGHTS))


def _adaptive(
    integrand: Callable[[float], np.ndarray], a: float, b: float, tol: float
) -> tuple[np.ndarray, float, int]:
    total, error, count = 0.0, 0.0, 0
    stack = [(a, b, _gauss(integrand, a, b), 0)]
    while stack:
        lo, hi, coarse, depth = stack.pop()
        mid = (lo + hi) / 2
        left, right = _gauss(integrand, lo, mid), _gauss(integrand, mid, hi)
        fine = left + right
        gap = float(np.max(np.abs(fine - coarse), initial=0.0))
        if gap <= tol * (hi - lo) or depth >= MAX_DEPTH:
            if depth >= MAX_DEPTH:
                log.warning("quadrature hit the depth limit on [%g, %g]", lo, hi)
            total = total + fine
            error += gap / 255
            count += 2
        else:
            stack.append((mid, hi, right, depth + 1))
            stack.append((lo, mid, left, depth + 1))
    return np.asarray(total, dtype=float), error, count


def integrate_form_along(
    omega: FormBase,
    curve: Curve,
    tol: float = DEFAULT_TOL,
    start: float = 0.0,
    stop: float = 1.0,
) -> LineIntegral:
    """Adaptive ∫ ω over γ restricted to [start, stop], split at the curve's
    breakpoints."""
    integrand = _integrand(omega, curve)
    cuts = sorted({start, stop, *(b for b in curve.breakpoints if start < b < stop)})
    m = as_field_form(omega).values.dim
    value, error, count = np.zeros(m), 0.0, 0
    for a, b in itertools.pairwise(cuts):
        v, e, c = _adaptive(integrand, a, b, tol)
        value, error, count = value + v.reshape(m), error + e, count + c
    return LineIntegral(value, error, count)


def integrate_fixed(omega: FormBase, curve: Curve, pieces: int) -> np.ndarray:
    """Composite 4-point Gauss-Legendre with `pieces` equal subintervals."""
    if pieces < 1:
        raise InvalidParameter("need at least one subinterval")
    integrand = _integrand(omega, curve)
    grid = np.linspace(0.0, 1.0, pieces + 1)
    return np.asarray(sum(_gauss(integrand, a, b) for a, b in itertools.pairwise(grid)))


@dataclass(frozen=True, eq=False)
class LiftedCurve(Curve):
    """Horizontal lift of `base` through `ext` starting with V part `start`."""

    ext: CentralExtension
    base: Curve
    start: np.ndarray
    tol: float = DEFAULT_TOL

    @property
    def alg(self) -> StratifiedAlgebra:  # pyright: ignore[reportIncompatibleVariableOverride]
        return self.ext.algebra

    @cached_property
    def alpha(self) -> FieldForm:
        return alpha_potential(self.ext)

    @cached_property
    def _alpha(self) -> Callable[[float], np.ndarray]:
        return _integrand(self.alpha, self.base)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.base.breakpoints

    def fiber(self, t: float) -> np.ndarray:
        return self.start + integrate_form_along(self.alpha, self.base, self.tol, 0.0, t).value

    def position(self, t: float) -> np.ndarray:
        return np.array(self.ext.join(self.base.position(t), self.fiber(t)), dtype=float)

    def velocity(self, t: float) -> np.ndarray:
        return np.array(
            self.ext.join(self.base.velocity(t), self._alpha(t)), dtype=float
        )

    def trajectory(self, times: Sequence[float]) -> np.ndarray:
        """Positions at increasing `times`, integrating piece by piece."""
        times = list(times)
        if any(b < a for a, b in itertools.pairwise(times)):
            raise InvalidParameter("times must be increasing")
        rows, fiber, last = [], self.start.copy(), 0.0
        for t in times:
            fiber = fiber + integrate_form_along(self.alpha, self.base, self.tol, last, t).value
            last = t
            rows.append(self.ext.join(self.base.position(t), fiber))
        return np.array(rows, dtype=float)


def _close(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    return relative_excess(a - b, np.linalg.norm(a), tol) <= 0


def lift_horizontal_curve(
    ext: CentralExtension,
    curve: Curve,
    basepoint: Sequence[float],
    tol: float = DEFAULT_TOL,
    horizontal_tol: float = 1e-8,
) -> LiftedCurve:
    """The horizontal lift of γ to G through `basepoint`.

    Its V part is V(basepoint) + ∫ α along γ. Extensions with a layer-1
    part in V must be reduced with `abelian_factor_split` first.
    """
    if curve.alg != ext.base:
        raise AlgebraMismatch("curve does not live on the base of the extension")
    if ext.algebra.rank != ext.base.rank:
        raise RankMismatch("rank(G) != rank(H); split off the abelian factor first")
    check_horizontal(curve, horizontal_tol)
    h, v = ext.split(np.asarray(basepoint, dtype=float))
    if not _close(np.asarray(h, dtype=float), curve.position(0.0), horizontal_tol):
        raise BasepointMismatch("basepoint does not project to the start of the curve")
    return LiftedCurve(ext, curve, np.asarray(v, dtype=float), tol)


def loop_holonomy(
    ext: CentralExtension,
    curve: Curve,
    tol: float = DEFAULT_TOL,
    closure_tol: float = 1e-8,
) -> np.ndarray:
    """∫ α over a closed horizontal loop; zero exactly when its lift closes."""
    if curve.alg != ext.base:
        raise AlgebraMismatch("loop does not live on the base of the extension")
    if not _close(curve.position(0.0), curve.position(1.0), closure_tol):
        raise LoopNotClosed("curve does not return to its starting point")
    check_horizontal(curve, closure_tol)
    integral = integrate_form_along(alpha_potential(ext), curve, tol)
    log.debug("holonomy %s (error %.2g, %d intervals)", integral.value, integral.error, integral.intervals)
    return integral.value


def commutator_words(generators: Sequence[int], depth: int, step: float) -> list[tuple[Move, ...]]:
    """Left-normed commutator words [[..[a1, a2], ..], a_depth] of moves.

    Such words close in any group of step < depth.
    """

    def inverse(word: tuple[Move, ...]) -> tuple[Move, ...]:
        return tuple((i, -s) for i, s in reversed(word))

    def commutator(u: tuple[Move, ...], v: tuple[Move, ...]) -> tuple[Move, ...]:
        return u + v + inverse(u) + inverse(v)

    words = []
    for first, second in itertools.combinations(generators, 2):
        for rest in itertools.product(generators, repeat=max(depth - 2, 0)):
            word: tuple[Move, ...] = commutator(((first, step),), ((second, step),))
            for g in rest:
                word = commutator(word, ((g, step),))
            words.append(word)
    return words


@dataclass(frozen=True)
class LoopRecord:
    node: tuple[int, ...]
    word: tuple[Move, ...]
    shift: np.ndarray
    image: np.ndarray
    residual: float = 0.0


@dataclass(frozen=True)
class GridLift:
    """A lift F: G1 ⊃ fibers over grid nodes → G2 built by path lifting.

    `nodes` maps lattice indices to (point of G1, F(point) in G2). F on the
    fiber over a node is F(node)·Φ(k) with the fitted `phi`.
    """

    ext1: CentralExtension
    ext2: CentralExtension
    f: GroupMap
    spacing: float
    nodes: dict[tuple[int, ...], tuple[np.ndarray, np.ndarray]]
    phi: np.ndarray
    loops: tuple[LoopRecord, ...] = field(default=())

    @property
    def worst_loop(self) -> LoopRecord | None:
        return max(self.loops, key=lambda r: r.residual, default=None)

    def node_for(self, g: Sequence[float], tol: float = 1e-9) -> tuple[int, ...]:
        h, _ = self.ext1.split(np.asarray(g, dtype=float))
        for key, (point, _) in self.nodes.items():
            base, _ = self.ext1.split(point)
            if _close(np.asarray(base), np.asarray(h), tol):
                return key
        raise InvalidParameter(f"{tuple(g)} is not over a grid node")

    def evaluate(self, g: Sequence[float]) -> np.ndarray:
        g = np.asarray(g, dtype=float)
        point, value = self.nodes[self.node_for(g)]
        _, v = self.ext1.split(g)
        _, v_node = self.ext1.split(point)
        h2, v2 = self.ext2.split(value)
        shift = np.asarray(v, dtype=float) - np.asarray(v_node, dtype=float)
        return np.array(self.ext2.join(h2, np.asarray(v2) + self.phi @ shift), dtype=float)


def construct_lift_on_grid(
    ext1: CentralExtension,
    ext2: CentralExtension,
    f: GroupMap,
    basepoint: Sequence[float],
    base_value: Sequence[float] | None = None,
    spacing: float = 0.25,
    radius: int = 2,
    loops_per_node: int = 2,
    seed: int = DEFAULT_SEED,
    tol: float = 1e-7,
) -> GridLift:
    """Lift f∘π1 along a staircase tree of horizontal moves from `basepoint`.

    Node n (one integer per horizontal direction) is reached by moving n_1
    steps along the first direction, then n_2 along the second and so on.
    At every node a few commutator loops, closed in H1, shift the fiber of
    G1; the fiber map Φ is fitted to all of them and each loop must agree
    with it within `tol`, otherwise `InconsistentHolonomy` names the worst.
    """
    if f.source != ext1.base or f.target != ext2.base:
        raise AlgebraMismatch("map does not go between the two bases")
    if not f.simply_connected:
        raise NotSimplyConnected("grid lifts need a simply connected domain")
    if ext2.algebra.rank != ext2.base.rank:
        raise RankMismatch("rank(G2) != rank(H2); split off the abelian factor first")
    h1, g1 = ext1.base, ext1.algebra
    basepoint = np.asarray(basepoint, dtype=float)
    start_h, start_v = ext1.split(basepoint)
    start_h = np.asarray(start_h, dtype=float)
    v2 = np.zeros(ext2.values.dim) if base_value is None else np.asarray(base_value, dtype=float)
    alpha1, alpha2 = alpha_potential(ext1), alpha_potential(ext2)
    directions = list(h1.horizontal)
    g1_directions = [ext1.h_index[i] for i in directions]

    def image_integral(curve: Curve) -> np.ndarray:
        return integrate_form_along(alpha2, ComposedCurve(f, curve)).value

    nodes: dict[tuple[int, ...], tuple[np.ndarray, np.ndarray]] = {}
    h_points: dict[tuple[int, ...], np.ndarray] = {}
    origin = (0,) * len(directions)
    if not f.domain.contains(start_h):
        raise InvalidParameter("basepoint lies outside the domain of the map")
    nodes[origin] = (basepoint, np.array(ext2.join(f.evaluate(start_h), v2), dtype=float))
    h_points[origin] = start_h

    # staircase order: a node's parent differs in its last non-zero entry
    for key in sorted(
        itertools.product(range(-radius, radius + 1), repeat=len(directions)),
        key=lambda k: sum(map(abs, k)),
    ):
        if key == origin:
            continue
        last = max(i for i, c in enumerate(key) if c)
        parent = list(key)
        parent[last] -= 1 if key[last] > 0 else -1
        parent = tuple(parent)
        if parent not in nodes:
            continue
        step = spacing if key[last] > 0 else -spacing
        segment = MoveCurve(h1, h_points[parent], ((directions[last], step),))
        if not f.domain.contains(segment.end):
            continue
        point = exp_segment(g1, nodes[parent][0], _unit(g1.dim, g1_directions[last]), step)
        _, fiber = ext2.split(nodes[parent][1])
        fiber = np.asarray(fiber, dtype=float) + image_integral(segment)
        nodes[key] = (point, np.array(ext2.join(f.evaluate(segment.end), fiber), dtype=float))
        h_points[key] = segment.end

    rng = np.random.default_rng(seed)
    words = commutator_words(directions, h1.step + 1, spacing)
    records = []
    for key, start in h_points.items():
        picks = rng.choice(len(words), size=min(loops_per_node, len(words)), replace=False)
        for w in picks:
            loop = MoveCurve(h1, start, words[w])
            if not all(f.domain.contains(v) for v in loop.vertices):
                continue
            shift = integrate_form_along(alpha1, loop).value
            records.append(LoopRecord(key, words[w], shift, image_integral(loop)))
    if not records:
        raise InvalidParameter("no consistency loop fits inside the domain")

    shifts = np.array([r.shift for r in records]).reshape(len(records), ext1.values.dim)
    images = np.array([r.image for r in records]).reshape(len(records), ext2.values.dim)
    if shifts.shape[1]:
        phi_t, *_ = np.linalg.lstsq(shifts, images, rcond=None)
    else:
        phi_t = np.zeros((0, ext2.values.dim))
    phi = phi_t.T
    scale = float(np.max(np.abs(images), initial=0.0))
    records = [
        LoopRecord(r.node, r.word, r.shift, r.image, float(np.max(np.abs(r.image - phi @ r.shift), initial=0.0)))
        for r in records
    ]
    grid = GridLift(ext1, ext2, f, spacing, nodes, phi, tuple(records))
    worst = grid.worst_loop
    log.info("grid lift: %d nodes, %d loops, worst residual %.3g", len(nodes), len(records), worst.residual if worst else 0.0)
    if worst is not None and worst.residual > tol * (1 + scale):
        raise InconsistentHolonomy(
            f"loop at node {worst.node} misses the fitted fiber map by {worst.residual:.3g}",
            worst=worst,
        )
    return grid


def _unit(n: int, i: int) -> np.ndarray:
    e = np.zeros(n)
    e[i] = 1.0
    return e


@dataclass(frozen=True)
class StokesReport:
    surface: np.ndarray
    boundary: np.ndarray
    residual: float


def _disk_integral(form: FieldForm, nodes: int) -> np.ndarray:
    """∫ over the unit disk of a 2-form c dx∧dy on a 2-dimensional source."""
    evaluate = form.numeric
    r_nodes, r_weights = np.polynomial.legendre.leggauss(nodes)
    a_nodes, a_weights = np.polynomial.legendre.leggauss(2 * nodes)
    total = np.zeros(form.values.dim)
    for r, wr in zip((r_nodes + 1) / 2, r_weights / 2):
        for a, wa in zip((a_nodes + 1) * math.pi, a_weights * math.pi):
            p = (r * math.cos(a), r * math.sin(a))
            total += wr * wa * r * evaluate(p).reshape(-1)
    return total


def stokes_check(
    ext: CentralExtension,
    u: GroupMap,
    omega: FormBase | None = None,
    boundary: Curve | None = None,
    nodes: int = 24,
    tol: float = DEFAULT_TOL,
) -> StokesReport:
    """Compare ∫_D u_P*(dα + d0 ω) with ∫_∂ α for u defined on the unit disk.

    `u` must start on a two dimensional abelian algebra. The boundary
    defaults to u∘(unit circle).
    """
    source = u.source
    if source.dim != 2 or source.step != 1:
        raise DimensionMismatch("u must be defined on the plane")
    if u.target != ext.base:
        raise AlgebraMismatch("u does not land in the base of the extension")
    integrand: FieldForm = as_field_form(ext.rho)
    if omega is not None:
        omega = as_field_form(omega)
        if omega.degree != 1 or omega.values != ext.values:
            raise DimensionMismatch("ω must be a V valued 1-form")
        integrand = integrand + d0(omega)
    surface = _disk_integral(pansu_pullback(u, integrand), nodes)
    if boundary is None:
        circle = SymbolicCurve(source, ("cos(2*pi*t)", "sin(2*pi*t)"), "unit circle")
        boundary = ComposedCurve(u, circle)
    edge = integrate_form_along(alpha_potential(ext), boundary, tol).value
    residual = float(np.max(np.abs(surface - edge), initial=0.0))
    log.info("stokes residual %.3g", residual)
    return StokesReport(surface, edge, residual)


@dataclass(frozen=True)
class NumericMap:
    """A map given by a python function on float coordinates."""

    source: StratifiedAlgebra
    target: StratifiedAlgebra
    function: Callable[[np.ndarray], Sequence[float]] = field(compare=False)
    domain: Domain = field(default=None)  # pyright: ignore[reportAssignmentType]
    name: str = ""

    def __post_init__(self):
        if self.domain is None:
            object.__setattr__(self, "domain", Domain.cube(self.source.dim))

    def evaluate(self, p: Sequence[float]) -> np.ndarray:
        return np.asarray(self.function(np.asarray(p, dtype=float)), dtype=float)


Probe = tuple[Sequence[float], Sequence[float]]


def _default_probes(
    F: GroupMap | NumericMap, ext1: CentralExtension, samples: int, seed: int
) -> list[Probe]:
    probes = []
    for g in F.domain.sample(clamp_samples(samples), seed):
        for j in range(ext1.values.dim):
            for size in (0.25, -0.25, 0.1, -0.1):
                shift = np.zeros(ext1.values.dim)
                shift[j] = size
                moved = np.array(ext1.join(*_shifted(ext1, g, shift)), dtype=float)
                if F.domain.contains(moved):
                    probes.append((g, shift))
                    break
    return probes


def _shifted(ext: CentralExtension, g: Sequence[float], shift: np.ndarray) -> tuple[Any, Any]:
    h, v = ext.split(g)
    return h, np.asarray(v, dtype=float) + shift


def fiber_homomorphism_check(
    F: GroupMap | NumericMap,
    ext1: CentralExtension,
    ext2: CentralExtension,
    probes: Sequence[Probe] | None = None,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """The linear Φ: V1 → V2 with F(g·k) = F(g)·Φ(k), or `Violation`.

    Each probe (g, k) compares F at g and at g·k (central elements add in
    exponential coordinates). F must not move the H2 part along fibers and
    one Φ must fit every probe.
    """
    if F.source != ext1.algebra or F.target != ext2.algebra:
        raise AlgebraMismatch("F does not go between the two extensions")
    if ext2.algebra.rank != ext2.base.rank:
        raise RankMismatch("rank(G2) != rank(H2)")
    if probes is None:
        probes = _default_probes(F, ext1, samples, seed)
    if not probes:
        raise InvalidParameter("no probe fits inside the domain")

    shifts, jumps = [], []
    for g, k in probes:
        g = np.asarray(g, dtype=float)
        k = np.asarray(k, dtype=float)
        moved = np.array(ext1.join(*_shifted(ext1, g, k)), dtype=float)
        before, after = F.evaluate(g), F.evaluate(moved)
        h_before, v_before = ext2.split(before)
        h_after, v_after = ext2.split(after)
        if not _close(np.asarray(h_after), np.asarray(h_before), tol):
            raise Violation("F moves the base along a fiber", witness=(tuple(g), tuple(k)))
        shifts.append(k)
        jumps.append(np.asarray(v_after) - np.asarray(v_before))

    shifts_arr = np.array(shifts).reshape(len(shifts), ext1.values.dim)
    jumps_arr = np.array(jumps).reshape(len(jumps), ext2.values.dim)
    phi_t, *_ = np.linalg.lstsq(shifts_arr, jumps_arr, rcond=None)
    phi = phi_t.T
    misfit = np.abs(jumps_arr - shifts_arr @ phi_t).max(axis=1, initial=0.0)
    worst = int(np.argmax(misfit))
    scale = float(np.max(np.abs(jumps_arr), initial=0.0))
    if misfit[worst] > tol * (1 + scale):
        g, k = probes[worst]
        raise Violation(
            f"no fiber map fits: probe {worst} misses by {misfit[worst]:.3g}",
            witness=(tuple(float(c) for c in g), tuple(float(c) for c in k)),
        )
    return phi
