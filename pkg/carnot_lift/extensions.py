"""Central extensions of stratified algebras by vector valued 2-cocycles.

An extension of H by a cocycle ρ with values in V is the algebra G = H ⊕ V
with bracket [X + A, Y + B] = [X, Y] + ρ(X, Y). The basis of G lists the
basis of H and of V, reordered layer-major; `h_index` and `v_index` record
where each vector ended up.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Mapping

import sympy as sp

from carnot_lift.algebra import (
    GradedLinearMap,
    GradedSpace,
    StratifiedAlgebra,
    ValidationReport,
    as_rational,
    homomorphism_defects,
    layer_major_order,
    validate_stratified,
)
from carnot_lift.errors import (
    AlgebraMismatch,
    DimensionMismatch,
    GradingIncompatible,
    InvalidParameter,
    NoSolution,
    NotClosed,
    NotHomomorphism,
    NotStratified,
)
from carnot_lift.fieldforms import FieldForm, as_field_form, d_c, pi_E, pointwise_inner
from carnot_lift.forms import (
    AlgebraForm,
    FormBase,
    compound_matrix,
    d0,
    exterior,
    form_inner,
    project_E0,
)
from carnot_lift.groups import potential_matrix

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cocycle:
    """A V-valued 2-form on `base`; closedness is checked by `extend`."""

    base: StratifiedAlgebra
    values: GradedSpace
    form: AlgebraForm

    def __post_init__(self):
        if self.form.alg != self.base:
            raise AlgebraMismatch("cocycle form does not live on the base algebra")
        if self.form.degree != 2:
            raise DimensionMismatch(f"a cocycle is a 2-form, got degree {self.form.degree}")
        if self.form.values != self.values:
            raise DimensionMismatch("cocycle form and value space disagree")

    @classmethod
    def from_terms(
        cls, base: StratifiedAlgebra, values: GradedSpace, terms: Mapping[Any, Any]
    ) -> "Cocycle":
        return cls(base, values, AlgebraForm.from_terms(base, 2, terms, values))

    def is_closed(self) -> bool:
        return d0(self.form).is_zero()

    def grading_defects(self) -> list[tuple[tuple[str, str], str]]:
        """Monomials e^a∧e^b with a component along a V vector of the wrong layer."""
        layers = self.base.layers
        defects = []
        for row, (a, b) in enumerate(exterior(self.base).monomials(2)):
            for col, c in enumerate(self.form.coeffs.row(row)):
                if c != 0 and layers[a] + layers[b] != self.values.layers[col]:
                    names = (self.base.basis[a], self.base.basis[b])
                    defects.append((names, self.values.basis[col]))
        return defects


@dataclass(frozen=True)
class ExtensionReport:
    """One verdict per condition on a Carnot central extension.

    stratified: G is a graded Lie algebra (Jacobi, antisymmetry, grading).
    graded_maps: inclusion V → G and projection G → H are graded.
    carnot: layer 1 of G bracket generates every other layer.
    metric: the inclusion is an isometry and the projection a submetry.
    """

    stratified: bool
    graded_maps: bool
    carnot: bool
    metric: bool
    validation: ValidationReport = field(default_factory=ValidationReport)

    @property
    def ok(self) -> bool:
        return self.stratified and self.graded_maps and self.carnot and self.metric

    def as_dict(self) -> dict[str, bool]:
        return {
            "stratified": self.stratified,
            "graded_maps": self.graded_maps,
            "carnot": self.carnot,
            "metric": self.metric,
        }


@dataclass(frozen=True)
class CentralExtension:
    cocycle: Cocycle
    algebra: StratifiedAlgebra
    h_index: tuple[int, ...]
    v_index: tuple[int, ...]
    report: ExtensionReport

    @property
    def base(self) -> StratifiedAlgebra:
        return self.cocycle.base

    @property
    def values(self) -> GradedSpace:
        return self.cocycle.values

    @property
    def rho(self) -> AlgebraForm:
        return self.cocycle.form

    @property
    def projection(self) -> GradedLinearMap:
        m = sp.zeros(self.base.dim, self.algebra.dim)
        for i, pos in enumerate(self.h_index):
            m[i, pos] = 1
        return GradedLinearMap(self.algebra, self.base, m)

    @property
    def inclusion(self) -> GradedLinearMap:
        m = sp.zeros(self.algebra.dim, self.values.dim)
        for j, pos in enumerate(self.v_index):
            m[pos, j] = 1
        return GradedLinearMap(self.values, self.algebra, m)

    def split(self, point: Any) -> tuple[list[Any], list[Any]]:
        """Split G coordinates into (H part, V part)."""
        coords = list(point)
        return [coords[i] for i in self.h_index], [coords[j] for j in self.v_index]

    def join(self, h_part: Any, v_part: Any) -> list[Any]:
        out: list[Any] = [0] * self.algebra.dim
        for i, value in zip(self.h_index, h_part):
            out[i] = value
        for j, value in zip(self.v_index, v_part):
            out[j] = value
        return out


def _metric_ok(
    gram: sp.Matrix, base: StratifiedAlgebra, values: GradedSpace, h: list[int], v: list[int]
) -> bool:
    """Inclusion isometric and projection a submetry for a given gram on G."""
    if values.dim and gram.extract(v, v) != values.gram:
        return False
    g_hh = gram.extract(h, h)
    if values.dim:
        g_hv = gram.extract(h, v)
        g_hh = g_hh - g_hv * gram.extract(v, v).inv() * g_hv.T
    return g_hh == base.gram


def extend(
    base: StratifiedAlgebra, rho: Cocycle, strict: bool = True, gram: Any = None
) -> CentralExtension:
    """Build the central extension of `base` by `rho`.

    Raises `NotClosed` for d0ρ != 0, `GradingIncompatible` when ρ does not
    respect the layers and, with `strict`, `NotStratified` when V is not
    reached by brackets. With `strict=False` such extensions are returned
    and flagged in the report. A custom `gram` on G is only verified.
    """
    if rho.base != base:
        raise AlgebraMismatch("cocycle is based on a different algebra")
    if not rho.is_closed():
        raise NotClosed("d0(rho) is not zero")
    if defects := rho.grading_defects():
        raise GradingIncompatible(f"cocycle does not respect the grading: {defects[:3]}")
    values = rho.values
    if clash := set(base.basis) & set(values.basis):
        raise InvalidParameter(f"value space reuses basis names {sorted(clash)}")

    n, m = base.dim, values.dim
    size = n + m
    table = [[[sp.Integer(0)] * size for _ in range(size)] for _ in range(size)]
    for j, k, i, c in base.terms:
        table[j][k][i] = c
    for row, (a, b) in enumerate(exterior(base).monomials(2)):
        for col in range(m):
            c = rho.form.coeffs[row, col]
            if c != 0:
                table[a][b][n + col] = c
                table[b][a][n + col] = -c
    layers = base.layers + values.layers
    order = layer_major_order(layers)
    pos = {old: new for new, old in enumerate(order)}
    unordered_gram = sp.diag(base.gram, values.gram) if m else sp.Matrix(base.gram)
    unordered = StratifiedAlgebra(
        base.basis + values.basis,
        layers,
        tuple(tuple(tuple(row) for row in plane) for plane in table),
        unordered_gram,
        base.tags - {"heisenberg", "jet"} if m else base.tags,
    )
    algebra = unordered.permuted(order)
    h_index = tuple(pos[i] for i in range(n))
    v_index = tuple(pos[n + j] for j in range(m))

    metric = True
    if gram is not None:
        custom = sp.Matrix(gram).applyfunc(as_rational)
        algebra = StratifiedAlgebra(
            algebra.basis, algebra.layers, algebra.constants, custom, algebra.tags
        )
        metric = _metric_ok(custom, base, values, list(h_index), list(v_index))

    validation = validate_stratified(algebra)
    kinds = validation.kinds()
    report = ExtensionReport(
        stratified=not kinds & {"antisymmetry", "jacobi", "grading", "layers", "ordering"},
        graded_maps=True,
        carnot="stratification" not in kinds,
        metric=metric and "gram" not in kinds,
        validation=validation,
    )
    log.info("extended %s by %s: %s", base.basis, values.basis, report.as_dict())
    if strict and not report.carnot:
        raise NotStratified(
            f"brackets of layer 1 do not reach all of {values.basis}; "
            "use strict=False to keep the extension"
        )
    return CentralExtension(rho, algebra, h_index, v_index, report)


def trivial_extension(base: StratifiedAlgebra) -> CentralExtension:
    """Extension by the zero cocycle with V = {0}; G is the base itself."""
    values = GradedSpace((), ())
    return extend(base, Cocycle(base, values, AlgebraForm.zero(base, 2, values)))


def alpha_potential(ext: CentralExtension) -> FieldForm:
    """The V-valued 1-form α on H with dα = ρ built from the ζ series."""
    return FieldForm(ext.base, 1, ext.values, potential_matrix(ext.rho))


def _as_map(value: Any, source: Any, target: Any) -> GradedLinearMap:
    if isinstance(value, GradedLinearMap):
        return value
    return GradedLinearMap(source, target, sp.Matrix(value).applyfunc(as_rational))


def pullback_by_linear(form: AlgebraForm, matrix: Any, source: StratifiedAlgebra) -> AlgebraForm:
    """L*ω for a linear map L: source → form.alg, via the compound of L."""
    k = form.degree
    coeffs = compound_matrix(matrix, k).T * form.coeffs
    return AlgebraForm(source, k, form.values, coeffs)


@dataclass(frozen=True)
class HomomorphismLift:
    """ψ(X + Y) = L(X) + μ(X) + φ(Y) together with μ and the solution counts.

    `solution_dim` is the dimension of all μ solving the equation,
    `graded_solution_dim` the dimension of graded solutions modulo maps that
    kill the derived algebra.
    """

    psi: GradedLinearMap
    mu: sp.ImmutableMatrix
    solution_dim: int
    graded_solution_dim: int


def homomorphism_lift(
    ext1: CentralExtension, ext2: CentralExtension, L: Any, phi: Any
) -> HomomorphismLift:
    """Solve φ∘ρ1 - L*ρ2 = d0 μ and assemble the lifted homomorphism ψ: G1 → G2."""
    h1, h2 = ext1.base, ext2.base
    L = _as_map(L, h1, h2)
    phi = _as_map(phi, ext1.values, ext2.values)
    if defects := homomorphism_defects(h1, h2, L.matrix):
        a, b, _ = defects[0]
        raise NotHomomorphism(f"L does not preserve [{h1.basis[a]}, {h1.basis[b]}]")

    ext = exterior(h1)
    rhs = ext1.rho.coeffs * phi.matrix.T - pullback_by_linear(ext2.rho, L.matrix, h1).coeffs
    mu = ext.pseudoinverse(2) * rhs
    if any(sp.expand(e) != 0 for e in ext.d0(1) * mu - rhs):
        raise NoSolution("phi∘rho1 - L*rho2 is not in the image of d0")

    g1, g2 = ext1.algebra, ext2.algebra
    psi = sp.zeros(g2.dim, g1.dim)
    for a, col in enumerate(ext1.h_index):
        for b, row in enumerate(ext2.h_index):
            psi[row, col] = L.matrix[b, a]
        for j, row in enumerate(ext2.v_index):
            psi[row, col] = mu[a, j]
    for i, col in enumerate(ext1.v_index):
        for j, row in enumerate(ext2.v_index):
            psi[row, col] = phi.matrix[j, i]
    if homomorphism_defects(g1, g2, psi):
        raise NoSolution("assembled psi does not preserve brackets")

    kernel_dim = h1.dim - ext.d0(1).rank()
    return HomomorphismLift(
        psi=GradedLinearMap(g1, g2, psi),
        mu=sp.ImmutableMatrix(mu),
        solution_dim=kernel_dim * ext2.values.dim,
        graded_solution_dim=h1.rank * len(ext2.values.layer_indices(1)),
    )


@dataclass(frozen=True)
class NormalizationCertificate:
    """φ: V → V invertible and ω ∈ Λ¹(H; V) with φ∘ρ - ρ̃ = d0 ω."""

    phi: GradedLinearMap
    omega: AlgebraForm


def normalize_cocycle(ext: CentralExtension) -> tuple[CentralExtension, NormalizationCertificate]:
    """Replace ρ by pairwise orthogonal components in E0.

    The harmonic parts π_E0 ρ^j are orthogonalised; the Gram-Schmidt matrix
    A (unit lower triangular) is the certificate's φ.
    """
    base, values, rho = ext.base, ext.values, ext.rho
    ext0 = exterior(base)
    metric = sp.Matrix(ext0.gram(2))
    harmonic = sp.Matrix(project_E0(rho).coeffs)
    mu = ext0.pseudoinverse(2) * sp.Matrix(rho.coeffs)

    m = values.dim
    a = sp.eye(m)
    ortho: list[sp.Matrix] = []
    for i in range(m):
        w = harmonic[:, i]
        row = sp.zeros(1, m)
        row[i] = 1
        for k, u in enumerate(ortho):
            norm = (u.T * metric * u)[0]
            if norm == 0:
                continue
            factor = (u.T * metric * w)[0] / norm
            w = w - factor * u
            row = row - factor * a[k, :]
        a[i, :] = row
        ortho.append(w)
    new_coeffs = sp.Matrix.hstack(*ortho) if ortho else sp.zeros(ext0.size(2), 0)
    omega = AlgebraForm(base, 1, values, mu * a.T)
    phi = GradedLinearMap(values, values, a)
    normalized = extend(base, Cocycle(base, values, AlgebraForm(base, 2, values, new_coeffs)), strict=False)
    log.debug("normalized cocycle over %s with phi=%s", base.basis, a.tolist())
    return normalized, NormalizationCertificate(phi, omega)


def _image_space(phi: GradedLinearMap) -> tuple[GradedSpace, sp.Matrix]:
    """Graded basis B of im(φ) (columns in the target basis) and its space."""
    source, target = phi.source, phi.target
    matrix = sp.Matrix(phi.matrix)
    columns: list[sp.Matrix] = []
    layers: list[int] = []
    for layer in sorted(set(source.layers)):
        cols = list(source.layer_indices(layer))
        if not cols:
            continue
        for v in matrix.extract(list(range(matrix.rows)), cols).columnspace():
            columns.append(v)
            layers.append(layer)
    if not columns:
        return GradedSpace((), ()), sp.zeros(target.dim, 0)
    basis = sp.Matrix.hstack(*columns)
    _, pivots = basis.T.rref()
    names = tuple(target.basis[p] for p in pivots)
    gram = basis.T * target.gram * basis
    return GradedSpace(names, tuple(layers), gram), basis


def pushforward_extension(
    ext: CentralExtension, phi: Any
) -> tuple[CentralExtension, GradedLinearMap]:
    """Extension of the same base by φ∘ρ with values im(φ).

    Also returns the surjective graded homomorphism ψ(X + Y) = X + φ(Y) onto
    the new extension.
    """
    if not isinstance(phi, GradedLinearMap) or phi.source != ext.values:
        raise InvalidParameter("phi must be a graded map defined on the value space")
    space, basis = _image_space(phi)
    if space.dim:
        coords = (basis.T * basis).inv() * basis.T * sp.Matrix(phi.matrix)
    else:
        coords = sp.zeros(0, ext.values.dim)
    rho_hat = AlgebraForm(ext.base, 2, space, sp.Matrix(ext.rho.coeffs) * coords.T)
    pushed = extend(ext.base, Cocycle(ext.base, space, rho_hat), strict=False)
    psi = sp.zeros(pushed.algebra.dim, ext.algebra.dim)
    for i in range(ext.base.dim):
        psi[pushed.h_index[i], ext.h_index[i]] = 1
    for j in range(ext.values.dim):
        for r in range(space.dim):
            psi[pushed.v_index[r], ext.v_index[j]] = coords[r, j]
    return pushed, GradedLinearMap(ext.algebra, pushed.algebra, psi)


def abelian_factor_split(ext: CentralExtension) -> tuple[CentralExtension, GradedSpace]:
    """Split off W = V^[1]; the reduced extension has rank(G) = rank(H)."""
    values = ext.values
    flat = list(values.layer_indices(1))
    if any(ext.rho.coeffs[r, c] != 0 for c in flat for r in range(ext.rho.coeffs.rows)):
        raise GradingIncompatible("cocycle has a component in layer 1 of V")
    keep = [j for j in range(values.dim) if j not in flat]
    if not flat:
        return ext, values.restricted([])
    reduced_values = values.restricted(keep)
    coeffs = sp.Matrix(ext.rho.coeffs).extract(list(range(ext.rho.coeffs.rows)), keep)
    reduced = extend(
        ext.base,
        Cocycle(ext.base, reduced_values, AlgebraForm(ext.base, 2, reduced_values, coeffs)),
        strict=False,
    )
    return reduced, values.restricted(flat)


def pull_to_extension(ext: CentralExtension, omega: FormBase) -> FieldForm:
    """π*ω along the projection G → H."""
    omega = as_field_form(omega)
    if omega.alg != ext.base:
        raise AlgebraMismatch("form does not live on the base of the extension")
    g = ext.algebra
    ext_g, ext_h = exterior(g), exterior(ext.base)
    k = omega.degree
    coeffs = sp.zeros(ext_g.size(k), omega.values.dim)
    position = ext_g.position(k)
    for row, mono in enumerate(ext_h.monomials(k)):
        target = tuple(sorted(ext.h_index[i] for i in mono))
        coeffs[position[target], :] = omega.coeffs.row(row)
    rename = {
        ext.base.coordinates[i]: g.coordinates[ext.h_index[i]] for i in range(ext.base.dim)
    }
    return FieldForm(g, k, omega.values, coeffs.xreplace(rename))


def lift_projection_residual(ext: CentralExtension, omega: FormBase) -> FieldForm:
    """π_E π*ω - π*π_E ω - Σ_j (⟨d_c ω, ρ^j⟩∘π) π_{E0^⊥} θ^j for a scalar 1-form ω.

    Vanishes when the components ρ^j are orthonormal elements of E0.
    """
    omega = as_field_form(omega)
    if omega.degree != 1 or omega.values.dim != 1:
        raise DimensionMismatch("expected a scalar 1-form")
    components = ext.rho.components()
    for i, a in enumerate(components):
        if project_E0(a) != a:
            raise InvalidParameter("cocycle components must lie in E0")
        for j, b in enumerate(components):
            if form_inner(a, b) != (1 if i == j else 0):
                raise InvalidParameter("cocycle components must be orthonormal")

    g = ext.algebra
    residual = pi_E(pull_to_extension(ext, omega)) - pull_to_extension(ext, pi_E(omega))
    pairings = pointwise_inner(d_c(omega), as_field_form(ext.rho))
    rename = {
        ext.base.coordinates[i]: g.coordinates[ext.h_index[i]] for i in range(ext.base.dim)
    }
    for j, pos in enumerate(ext.v_index):
        theta = AlgebraForm.from_terms(g, 1, {(pos,): 1})
        theta_perp = theta - project_E0(theta)
        residual = residual - as_field_form(theta_perp).with_coeffs(
            theta_perp.coeffs * pairings[0, j].xreplace(rename)
        )
    return residual.tidy()

