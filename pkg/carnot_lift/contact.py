"""Smooth maps between groups in exponential coordinates.

A `GroupMap` is a tuple of coefficient expressions, one per target
coordinate. Its left-trivialized differential, contact test, Pansu
differential and the two pullbacks (classical and Pansu) live here.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Sequence

import numpy as np
import sympy as sp

from carnot_lift.algebra import (
    GradedLinearMap,
    StratifiedAlgebra,
    as_rational,
    bracket,
    homomorphism_defects,
)
from carnot_lift.errors import (
    AlgebraMismatch,
    DimensionMismatch,
    Inconsistent,
    InvalidParameter,
    NotContact,
    NotContactAt,
)
from carnot_lift.expressions import check_supported, parse_expression
from carnot_lift.fieldforms import FieldForm, as_field_form, matrix_identity_test, tidy
from carnot_lift.forms import FormBase, compound_matrix
from carnot_lift.groups import coframe_matrix, frame_matrix, numeric_law
from carnot_lift.sampling import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_TOL,
    Domain,
    compile_matrix,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroupMap:
    """f: source ⊃ domain → target, one expression per target coordinate."""

    source: StratifiedAlgebra
    target: StratifiedAlgebra
    components: tuple[sp.Expr, ...]
    domain: Domain = field(default=None)  # pyright: ignore[reportAssignmentType]
    name: str = ""

    def __post_init__(self):
        if len(self.components) != self.target.dim:
            raise DimensionMismatch(
                f"{self.target.dim} components needed, got {len(self.components)}"
            )
        xs = self.source.coordinates
        components = tuple(
            parse_expression(c, xs) if isinstance(c, str) else check_supported(c, xs)
            for c in self.components
        )
        object.__setattr__(self, "components", components)
        if self.domain is None:
            object.__setattr__(self, "domain", Domain.cube(self.source.dim))
        elif self.domain.dim != self.source.dim:
            raise DimensionMismatch("domain dimension differs from the source dimension")

    @classmethod
    def from_linear(
        cls, source: StratifiedAlgebra, target: StratifiedAlgebra, matrix: Any, **kwargs: Any
    ) -> "GroupMap":
        """A graded homomorphism, which is linear in exponential coordinates."""
        m = sp.Matrix(matrix).applyfunc(as_rational)
        GradedLinearMap(source, target, m)
        image = m * sp.Matrix(source.coordinates)
        return cls(source, target, tuple(image), **kwargs)

    @classmethod
    def identity(cls, alg: StratifiedAlgebra, **kwargs: Any) -> "GroupMap":
        return cls(alg, alg, alg.coordinates, **kwargs)

    @property
    def simply_connected(self) -> bool:
        return self.domain.simply_connected

    @cached_property
    def jacobian(self) -> sp.Matrix:
        return sp.Matrix(self.components).jacobian(sp.Matrix(self.source.coordinates))

    @cached_property
    def substitution(self) -> dict[sp.Symbol, sp.Expr]:
        """Target coordinates in terms of the source coordinates."""
        return dict(zip(self.target.coordinates, self.components))

    @cached_property
    def _compiled(self) -> Callable[[Sequence[float]], np.ndarray]:
        return compile_matrix(sp.Matrix(self.components), self.source.coordinates)

    def evaluate(self, p: Sequence[float]) -> np.ndarray:
        return self._compiled(p).reshape(-1)

    def onto(self, alg: StratifiedAlgebra) -> "GroupMap":
        """Compose with the projection onto a quotient whose basis names are a
        subset of the target's."""
        try:
            picked = tuple(self.components[self.target.basis.index(n)] for n in alg.basis)
        except ValueError:
            raise AlgebraMismatch(f"{alg.basis} is not a quotient of {self.target.basis}") from None
        return GroupMap(self.source, alg, picked, self.domain, self.name)

    @cached_property
    def differential(self) -> sp.Matrix:
        """Left-trivialized differential: coframe of the target at f(p) applied to
        Df applied to the source frame at p."""
        coframe = sp.Matrix(coframe_matrix(self.target)).xreplace(self.substitution)
        out = coframe * self.jacobian * sp.Matrix(frame_matrix(self.source))
        return out.applyfunc(tidy)


def _point_subs(f: GroupMap, p: Sequence[Any]) -> dict[sp.Symbol, Any]:
    if len(p) != f.source.dim:
        raise DimensionMismatch(f"point needs {f.source.dim} coordinates")
    if not f.domain.contains([float(c) for c in p]):
        raise InvalidParameter(f"{tuple(p)} lies outside the domain of the map")
    return {
        x: (c if isinstance(c, float) else as_rational(c))
        for x, c in zip(f.source.coordinates, p)
    }


def left_trivialized_differential(f: GroupMap, p: Sequence[Any] | None = None) -> sp.Matrix:
    """The differential in left-invariant frames, symbolic or at a point."""
    if p is None:
        return f.differential
    return f.differential.xreplace(_point_subs(f, p)).applyfunc(sp.expand)


@dataclass(frozen=True)
class ContactReport:
    """verdict is "contact", "not_contact", "probably_contact" or "unknown"."""

    verdict: str
    exact: bool
    witness: tuple[float, ...] | None = None
    seed: int | None = None
    samples: int = 0

    @property
    def contact(self) -> bool:
        return self.verdict in ("contact", "probably_contact")


def _contact_block(f: GroupMap, matrix: sp.Matrix) -> sp.Matrix:
    rows = [i for i, k in enumerate(f.target.layers) if k != 1]
    cols = list(f.source.horizontal)
    return matrix.extract(rows, cols)


def is_contact(
    f: GroupMap,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    tol: float = DEFAULT_TOL,
) -> ContactReport:
    """Does f*η vanish on horizontal vectors for every non-horizontal coframe η?"""
    block = _contact_block(f, f.differential)
    result = matrix_identity_test(
        block, f.source.coordinates, f.domain, samples=samples, seed=seed, tol=tol
    )
    verdict = {
        ("equal", True): "contact",
        ("equal", False): "probably_contact",
        ("not_equal", True): "not_contact",
        ("not_equal", False): "not_contact",
    }.get((result.verdict, result.exact), "unknown")
    log.info("contact check of %s: %s", f.name or "map", verdict)
    return ContactReport(verdict, result.exact, result.witness, result.seed, result.samples)


def require_contact(f: GroupMap, **kwargs: Any) -> ContactReport:
    report = is_contact(f, **kwargs)
    if not report.contact:
        raise NotContact(f"{f.name or 'map'} is not contact", witness=report.witness)
    return report


def bracket_extension(
    source: StratifiedAlgebra, target: StratifiedAlgebra, horizontal: sp.Matrix
) -> sp.Matrix:
    """Extend a map given on layer 1 to the whole algebra by L[X, Y] = [LX, LY].

    `horizontal` holds the images of the source layer 1 (target basis
    coordinates, one column per horizontal vector). Layer k+1 vectors are
    written as combinations of brackets [layer 1, layer k] first.
    """
    matrix = sp.zeros(target.dim, source.dim)
    for col, i in enumerate(source.horizontal):
        matrix[:, i] = horizontal[:, col]
    for k in range(1, source.step):
        pairs = [(a, c) for a in source.layer_indices(1) for c in source.layer_indices(k)]
        rows = list(source.layer_indices(k + 1))
        if not pairs:
            raise Inconsistent(f"layer {k + 1} is not bracket generated")
        brackets = sp.Matrix.hstack(
            *[
                bracket(source, source.basis_vector(a), source.basis_vector(c)).extract(rows, [0])
                for a, c in pairs
            ]
        )
        _, pivots = brackets.rref()
        if len(pivots) != len(rows):
            raise Inconsistent(f"layer {k + 1} is not bracket generated")
        square = brackets.extract(list(range(len(rows))), list(pivots))
        images = [
            bracket(target, matrix[:, pairs[p][0]], matrix[:, pairs[p][1]]) for p in pivots
        ]
        solution = square.inv()
        for local, b in enumerate(rows):
            column = sp.zeros(target.dim, 1)
            for slot, image in enumerate(images):
                column += solution[slot, local] * image
            matrix[:, b] = column.applyfunc(tidy)
    return matrix


@dataclass(frozen=True)
class _Scale:
    tol: float
    size: float

    def small(self, value: Any) -> bool:
        if value == 0:
            return True
        return abs(complex(value)) <= self.tol * (1 + self.size)


def pansu_differential(f: GroupMap, p: Sequence[Any], tol: float = DEFAULT_TOL) -> GradedLinearMap:
    """The Pansu differential at p as a graded homomorphism.

    Raises `NotContactAt` when p is not a contact point and `Inconsistent`
    when the bracket extension of the horizontal block disagrees with the
    graded part of the differential or fails to be a homomorphism.
    """
    source, target = f.source, f.target
    a = left_trivialized_differential(f, p)
    scale = _Scale(tol, max((abs(complex(e)) for e in a), default=0.0))
    block = _contact_block(f, a)
    if not all(scale.small(e) for e in block):
        raise NotContactAt(f"not contact at {tuple(p)}", witness=tuple(float(c) for c in p))

    horizontal = a.extract(list(target.horizontal), list(source.horizontal))
    embedded = sp.zeros(target.dim, len(source.horizontal))
    for r, i in enumerate(target.horizontal):
        embedded[i, :] = horizontal[r, :]
    L = bracket_extension(source, target, embedded)

    for col in range(source.dim):
        for row in range(target.dim):
            if target.layers[row] == source.layers[col]:
                if not scale.small(L[row, col] - a[row, col]):
                    raise Inconsistent(
                        f"bracket extension disagrees with the differential at "
                        f"({target.basis[row]}, {source.basis[col]})"
                    )
    for _, _, diff in homomorphism_defects(source, target, L):
        if not all(scale.small(e) for e in diff):
            raise Inconsistent("bracket extension is not a homomorphism")
    return GradedLinearMap(source, target, L)


def pansu_matrix(f: GroupMap) -> sp.Matrix:
    """Symbolic Pansu differential: bracket extension of the horizontal block."""
    source, target = f.source, f.target
    a = f.differential
    embedded = sp.zeros(target.dim, len(source.horizontal))
    for i in target.horizontal:
        embedded[i, :] = a.extract([i], list(source.horizontal))
    return bracket_extension(source, target, embedded)


def pansu_differential_limit(f: GroupMap, p: Sequence[float], lam: float) -> np.ndarray:
    """δ_{1/λ}(f(p)^{-1} f(p δ_λ e_i)) for every basis vector e_i, as columns.

    Converges to the Pansu differential as λ → 0.
    """
    if lam <= 0:
        raise InvalidParameter(f"lambda must be positive, got {lam}")
    source, target = f.source, f.target
    law_s, law_t = numeric_law(source), numeric_law(target)
    p = np.asarray(p, dtype=float)
    inverse = -f.evaluate(p)
    unscale = np.array([lam ** -k for k in target.layers])
    columns = []
    for i, k in enumerate(source.layers):
        step = np.zeros(source.dim)
        step[i] = lam**k
        columns.append(unscale * law_t(inverse, f.evaluate(law_s(p, step))))
    return np.column_stack(columns)


def _pullback_with(f: GroupMap, tau: FormBase, matrix: sp.Matrix) -> FieldForm:
    tau = as_field_form(tau)
    if tau.alg != f.target:
        raise AlgebraMismatch("form does not live on the target of the map")
    k = tau.degree
    coeffs = compound_matrix(matrix, k).T * tau.coeffs.xreplace(f.substitution)
    return FieldForm(f.source, k, tau.values, coeffs.applyfunc(tidy))


def pullback(f: GroupMap, omega: FormBase) -> FieldForm:
    """Classical pullback f*ω through the chain rule."""
    return _pullback_with(f, omega, f.differential)


def pansu_pullback(f: GroupMap, tau: FormBase, **contact_kwargs: Any) -> FieldForm:
    """f_P*τ: evaluate τ at f(p) on the Pansu differential of f at p."""
    require_contact(f, **contact_kwargs)
    return _pullback_with(f, tau, pansu_matrix(f))
