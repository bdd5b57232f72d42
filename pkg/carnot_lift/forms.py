"""Left-invariant vector valued forms and the exact linear algebra around d0.

A k-form is stored as a coefficient matrix: one row per increasing index
tuple (a basis k-monomial e^I of the dual), one column per basis vector of
the value space V. Everything that acts on forms pointwise (d0, its
pseudo-inverse, the projections onto E0 and onto im(d0), the Hodge star) is
a constant rational matrix on these rows, cached per algebra in
`Exterior`. The same matrices act on forms with function coefficients, see
`carnot_lift.fieldforms`.
"""

import itertools
import logging
import math
from dataclasses import dataclass, replace
from functools import cache
from typing import Any, Iterable, Mapping, Self, Sequence

import sympy as sp

from carnot_lift.algebra import (
    SCALARS,
    GradedSpace,
    Key,
    StratifiedAlgebra,
    as_rational,
)
from carnot_lift.errors import AlgebraMismatch, DimensionMismatch, NotCocycle

log = logging.getLogger(__name__)

Monomial = tuple[int, ...]


def sort_sign(indices: Sequence[int]) -> tuple[int, Monomial]:
    """Sign of the permutation sorting `indices`, and the sorted tuple.

    The sign is 0 when an index repeats.
    """
    idx = list(indices)
    if len(set(idx)) != len(idx):
        return 0, ()
    sign = 1
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            if idx[i] > idx[j]:
                sign = -sign
    return sign, tuple(sorted(idx))


def gram_schmidt(vectors: Sequence[sp.Matrix], metric: sp.Matrix) -> list[sp.Matrix]:
    """Exact orthogonalisation without normalisation; drops zero vectors."""
    out: list[sp.Matrix] = []
    for v in vectors:
        w = sp.Matrix(v)
        for u in out:
            w = w - (u.T * metric * w)[0] / (u.T * metric * u)[0] * u
        w = w.applyfunc(sp.nsimplify)
        if any(entry != 0 for entry in w):
            out.append(w)
    return out


def _projector(columns: Sequence[sp.Matrix], metric: sp.Matrix, size: int) -> sp.Matrix:
    """Orthogonal projection (w.r.t. `metric`) onto the span of `columns`."""
    if not columns:
        return sp.zeros(size, size)
    c = sp.Matrix.hstack(*columns)
    return c * (c.T * metric * c).inv() * c.T * metric


class Exterior:
    """Exact multilinear algebra on the exterior powers of one algebra's dual.

    Instances are shared through `exterior(alg)`; all matrices are computed
    once and cached.
    """

    def __init__(self, alg: StratifiedAlgebra) -> None:
        self.alg = alg
        self.n = alg.dim

    @cache
    def monomials(self, k: int) -> tuple[Monomial, ...]:
        if k < 0 or k > self.n:
            return ()
        return tuple(itertools.combinations(range(self.n), k))

    @cache
    def position(self, k: int) -> dict[Monomial, int]:
        return {mono: row for row, mono in enumerate(self.monomials(k))}

    def size(self, k: int) -> int:
        return len(self.monomials(k))

    @cache
    def weights(self, k: int) -> tuple[int, ...]:
        layers = self.alg.layers
        return tuple(sum(layers[i] for i in mono) for mono in self.monomials(k))

    @cache
    def d0(self, k: int) -> sp.ImmutableMatrix:
        """Matrix of d0: Λ^k → Λ^{k+1}.

        Uses d0 ω(X_1, ..., X_{k+1}) = Σ_{a<b} (-1)^{a+b} ω([X_a, X_b], ...)
        with X_a and X_b left out of the remaining arguments.
        """
        rows, cols = self.size(k + 1), self.size(k)
        matrix = sp.zeros(rows, cols)
        if rows == 0 or cols == 0:
            return sp.ImmutableMatrix(matrix)
        pos = self.position(k)
        constants = self.alg.constants
        for r, args in enumerate(self.monomials(k + 1)):
            for a, b in itertools.combinations(range(k + 1), 2):
                rest = args[:a] + args[a + 1 : b] + args[b + 1 :]
                for c, coefficient in enumerate(constants[args[a]][args[b]]):
                    if coefficient == 0:
                        continue
                    sign, mono = sort_sign((c,) + rest)
                    if sign:
                        matrix[r, pos[mono]] += (-1) ** (a + b) * sign * coefficient
        return sp.ImmutableMatrix(matrix)

    @cache
    def gram(self, k: int) -> sp.ImmutableMatrix:
        """Gram matrix of the induced inner product on Λ^k.

        ⟨e^I, e^J⟩ = det of the (I, J) block of the inverse gram of the algebra.
        """
        dual = self.alg.gram.inv()
        monos = self.monomials(k)
        return sp.ImmutableMatrix(
            len(monos),
            len(monos),
            lambda a, b: dual.extract(list(monos[a]), list(monos[b])).det() if k else 1,
        )

    @cache
    def image_projector(self, k: int) -> sp.ImmutableMatrix:
        """Orthogonal projection of Λ^k onto im(d0: Λ^{k-1} → Λ^k)."""
        size = self.size(k)
        if k == 0:
            return sp.ImmutableMatrix(sp.zeros(size, size))
        columns = self.d0(k - 1).columnspace()
        return sp.ImmutableMatrix(_projector(columns, sp.Matrix(self.gram(k)), size))

    @cache
    def pseudoinverse(self, k: int) -> sp.ImmutableMatrix:
        """Matrix of d0^{-1}: Λ^k → Λ^{k-1}.

        Sends κ to the unique η ⟂ ker(d0) with d0 η = π_im(κ). Built from a
        basis of im(d0*) = ker(d0)^⊥ and a normal equation, so no square roots
        are needed.
        """
        if k == 0:
            return sp.ImmutableMatrix(sp.zeros(0, self.size(0)))
        a = sp.Matrix(self.d0(k - 1))
        low, high = sp.Matrix(self.gram(k - 1)), sp.Matrix(self.gram(k))
        adjoint = low.inv() * a.T * high
        basis = adjoint.columnspace()
        if not basis:
            return sp.ImmutableMatrix(sp.zeros(self.size(k - 1), self.size(k)))
        b = sp.Matrix.hstack(*basis)
        ab = a * b
        return sp.ImmutableMatrix(b * (ab.T * high * ab).inv() * ab.T * high)

    @cache
    def e0_vectors(self, k: int) -> tuple[sp.ImmutableMatrix, ...]:
        """Orthogonal pure-weight basis of E0 = ker(d0) ∩ im(d0)^⊥ in Λ^k."""
        if not 0 <= k <= self.n:
            return ()
        weights = self.weights(k)
        high = sp.Matrix(self.gram(k))
        d0k = sp.Matrix(self.d0(k))
        below = sp.Matrix(self.d0(k - 1)) if k else None
        lower_weights = self.weights(k - 1) if k else ()
        out: list[sp.ImmutableMatrix] = []
        for w in sorted(set(weights)):
            rows = [i for i, wt in enumerate(weights) if wt == w]
            metric = high.extract(rows, rows)
            blocks = []
            if d0k.rows:
                blocks.append(d0k.extract(list(range(d0k.rows)), rows))
            if below is not None:
                lower = [i for i, wt in enumerate(lower_weights) if wt == w]
                if lower:
                    image = below.extract(rows, lower)
                    blocks.append(image.T * metric)
            if blocks:
                kernel = sp.Matrix.vstack(*blocks).nullspace()
            else:
                kernel = [sp.eye(len(rows))[:, i] for i in range(len(rows))]
            for v in gram_schmidt(kernel, metric):
                full = sp.zeros(self.size(k), 1)
                for local, row in enumerate(rows):
                    full[row] = v[local]
                out.append(sp.ImmutableMatrix(full))
        return tuple(out)

    @cache
    def e0_projector(self, k: int) -> sp.ImmutableMatrix:
        return sp.ImmutableMatrix(
            _projector(
                [sp.Matrix(v) for v in self.e0_vectors(k)],
                sp.Matrix(self.gram(k)),
                self.size(k),
            )
        )

    @cache
    def wedge_left(self, i: int, k: int) -> sp.ImmutableMatrix:
        """Matrix of θ^i ∧ (·): Λ^k → Λ^{k+1}."""
        matrix = sp.zeros(self.size(k + 1), self.size(k))
        pos = self.position(k + 1)
        for col, mono in enumerate(self.monomials(k)):
            sign, target = sort_sign((i,) + mono)
            if sign:
                matrix[pos[target], col] = sign
        return sp.ImmutableMatrix(matrix)

    @cache
    def hodge(self, k: int) -> sp.ImmutableMatrix:
        """Hodge star Λ^k → Λ^{n-k} for the volume e^1 ∧ ... ∧ e^n.

        Defined by α ∧ ⋆β = ⟨α, β⟩ e^1 ∧ ... ∧ e^n, which is the metric star
        up to the positive factor sqrt(det gram).
        """
        gram = self.gram(k)
        pos = self.position(self.n - k)
        matrix = sp.zeros(self.size(self.n - k), self.size(k))
        everything = set(range(self.n))
        for a, mono in enumerate(self.monomials(k)):
            rest = tuple(sorted(everything - set(mono)))
            sign, _ = sort_sign(mono + rest)
            for b in range(self.size(k)):
                matrix[pos[rest], b] += sign * gram[a, b]
        return sp.ImmutableMatrix(matrix)


@cache
def exterior(alg: StratifiedAlgebra) -> Exterior:
    return Exterior(alg)


@dataclass(frozen=True)
class FormBase:
    """Shared storage for forms: a coefficient matrix over the k-monomials.

    Rows follow `exterior(alg).monomials(degree)`, columns the basis of
    `values`.
    """

    alg: StratifiedAlgebra
    degree: int
    values: GradedSpace
    coeffs: sp.ImmutableMatrix

    def __post_init__(self):
        coeffs = sp.ImmutableMatrix(self.coeffs)
        shape = (exterior(self.alg).size(self.degree), self.values.dim)
        if coeffs.shape != shape:
            raise DimensionMismatch(
                f"{self.degree}-form coefficients must be {shape}, got {coeffs.shape}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def monomials(self) -> tuple[Monomial, ...]:
        return exterior(self.alg).monomials(self.degree)

    def with_coeffs(self, coeffs: Any, degree: int | None = None) -> Self:
        return replace(
            self,
            coeffs=sp.ImmutableMatrix(coeffs),
            degree=self.degree if degree is None else degree,
        )

    def _check_compatible(self, other: "FormBase") -> None:
        if other.alg != self.alg:
            raise AlgebraMismatch("forms live on different algebras")
        if other.degree != self.degree or other.values != self.values:
            raise DimensionMismatch("forms differ in degree or value space")

    def __add__(self, other: "FormBase") -> Self:
        self._check_compatible(other)
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other: "FormBase") -> Self:
        self._check_compatible(other)
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __neg__(self) -> Self:
        return self.with_coeffs(-self.coeffs)

    def __rmul__(self, scalar: Any) -> Self:
        return self.with_coeffs(self.coeffs * scalar)

    def component(self, j: Key) -> Self:
        """The scalar form of the j-th value component."""
        col = self.values.index(j)
        return replace(self, values=SCALARS, coeffs=self.coeffs[:, col])

    def components(self) -> list[Self]:
        return [self.component(j) for j in range(self.values.dim)]

    def is_zero(self) -> bool:
        return all(sp.expand(c) == 0 for c in self.coeffs)

    def terms(self) -> dict[tuple[str, ...], tuple[Any, ...]]:
        """Non-zero rows keyed by the basis names of their monomial."""
        names = self.alg.basis
        out = {}
        for row, mono in enumerate(self.monomials):
            values = tuple(self.coeffs.row(row))
            if any(v != 0 for v in values):
                out[tuple(names[i] for i in mono)] = values
        return out


def _terms_matrix(
    alg: StratifiedAlgebra,
    degree: int,
    terms: Mapping[Any, Any],
    values: GradedSpace,
    convert=as_rational,
) -> sp.Matrix:
    ext = exterior(alg)
    pos = ext.position(degree)
    coeffs = sp.zeros(ext.size(degree), values.dim)
    for key, value in terms.items():
        key = (key,) if isinstance(key, (str, int)) else tuple(key)
        if len(key) != degree:
            raise DimensionMismatch(f"{key} is not a {degree}-monomial")
        sign, mono = sort_sign([alg.index(k) for k in key])
        if not sign:
            continue
        if isinstance(value, Mapping):
            entries = {values.index(j): c for j, c in value.items()}
        else:
            if values.dim != 1:
                raise DimensionMismatch("V-valued terms need a {value: coefficient} map")
            entries = {0: value}
        for col, c in entries.items():
            coeffs[pos[mono], col] += sign * convert(c)
    return coeffs


@dataclass(frozen=True)
class AlgebraForm(FormBase):
    """A left-invariant V-valued k-form with exact rational coefficients."""

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "coeffs", self.coeffs.applyfunc(as_rational))

    @classmethod
    def zero(
        cls, alg: StratifiedAlgebra, degree: int, values: GradedSpace = SCALARS
    ) -> Self:
        return cls(alg, degree, values, sp.zeros(exterior(alg).size(degree), values.dim))

    @classmethod
    def from_terms(
        cls,
        alg: StratifiedAlgebra,
        degree: int,
        terms: Mapping[Any, Any],
        values: GradedSpace = SCALARS,
    ) -> Self:
        """Build a form from {("X", "Z2"): c} or {("X", "Z2"): {"v": c}} terms.

        Index tuples may be unsorted; the alternating sign is applied.
        """
        return cls(alg, degree, values, _terms_matrix(alg, degree, terms, values))

    @classmethod
    def from_components(
        cls, forms: Sequence["AlgebraForm"], values: GradedSpace
    ) -> Self:
        """Assemble a V-valued form from one scalar form per basis vector of V."""
        if len(forms) != values.dim:
            raise DimensionMismatch(f"need {values.dim} components, got {len(forms)}")
        if not forms:
            raise DimensionMismatch("cannot infer the algebra of an empty form list")
        first = forms[0]
        return cls(
            first.alg, first.degree, values, sp.Matrix.hstack(*[f.coeffs for f in forms])
        )


def coframe(alg: StratifiedAlgebra, name: Key) -> AlgebraForm:
    """The dual basis 1-form e^name."""
    return AlgebraForm.from_terms(alg, 1, {(name,): 1})


def compound_matrix(a: Any, k: int) -> sp.Matrix:
    """k-th compound: entry (I, J) is the minor det(a[I, J]) over increasing
    index tuples. It is the matrix of a linear map acting on k-forms."""
    a = sp.Matrix(a)
    rows = list(itertools.combinations(range(a.rows), k))
    cols = list(itertools.combinations(range(a.cols), k))
    if k == 0:
        return sp.ones(1, 1)
    return sp.Matrix(
        len(rows), len(cols), lambda r, c: a.extract(list(rows[r]), list(cols[c])).det()
    )


def wedge_coeffs(
    alg: StratifiedAlgebra, ka: int, a: sp.Matrix, kb: int, b: sp.Matrix
) -> sp.Matrix:
    """Coefficients of a ∧ b where `a` is scalar valued (one column)."""
    ext = exterior(alg)
    out = sp.zeros(ext.size(ka + kb), b.cols)
    pos = ext.position(ka + kb)
    for i, left in enumerate(ext.monomials(ka)):
        if a[i, 0] == 0:
            continue
        for j, right in enumerate(ext.monomials(kb)):
            sign, mono = sort_sign(left + right)
            if sign:
                out[pos[mono], :] += sign * a[i, 0] * b[j, :]
    return out


def wedge(a: FormBase, b: FormBase) -> FormBase:
    """Wedge product; at least one factor has to be scalar valued."""
    if a.alg != b.alg:
        raise AlgebraMismatch("forms live on different algebras")
    if a.values.dim == 1 and a.values == SCALARS:
        coeffs = wedge_coeffs(a.alg, a.degree, sp.Matrix(a.coeffs), b.degree, sp.Matrix(b.coeffs))
        return b.with_coeffs(coeffs, degree=a.degree + b.degree)
    if b.values == SCALARS:
        swapped = wedge(b, a)
        return swapped.with_coeffs((-1) ** (a.degree * b.degree) * swapped.coeffs)
    raise DimensionMismatch("wedge of two vector valued forms is not defined")


def _check_alg(omega: FormBase, alg: StratifiedAlgebra | None) -> Exterior:
    if alg is not None and omega.alg != alg:
        raise AlgebraMismatch("form does not live on the declared algebra")
    return exterior(omega.alg)


def d0[F: FormBase](omega: F, alg: StratifiedAlgebra | None = None) -> F:
    """Lie algebra differential, extended linearly over the coefficients."""
    ext = _check_alg(omega, alg)
    k = omega.degree
    return omega.with_coeffs(ext.d0(k) * omega.coeffs, degree=k + 1)


def d0_pseudoinverse[F: FormBase](kappa: F) -> F:
    """The unique η ⟂ ker(d0) with d0 η = π_im(κ)."""
    ext = exterior(kappa.alg)
    k = kappa.degree
    if k == 0:
        raise DimensionMismatch("d0^{-1} is defined on forms of degree >= 1")
    return kappa.with_coeffs(ext.pseudoinverse(k) * kappa.coeffs, degree=k - 1)


def e0_basis(alg: StratifiedAlgebra, k: int) -> list[AlgebraForm]:
    """Orthogonal, pure-weight basis of E0 in degree k (not normalised)."""
    return [AlgebraForm(alg, k, SCALARS, v) for v in exterior(alg).e0_vectors(k)]


def project_E0[F: FormBase](omega: F) -> F:
    return omega.with_coeffs(exterior(omega.alg).e0_projector(omega.degree) * omega.coeffs)


def project_image[F: FormBase](omega: F) -> F:
    """Orthogonal projection onto im(d0)."""
    return omega.with_coeffs(
        exterior(omega.alg).image_projector(omega.degree) * omega.coeffs
    )


def hodge_star[F: FormBase](omega: F) -> F:
    ext = exterior(omega.alg)
    return omega.with_coeffs(ext.hodge(omega.degree) * omega.coeffs, degree=ext.n - omega.degree)


def form_inner(a: FormBase, b: FormBase) -> Any:
    """Inner product of two scalar forms, or the matrix of pairings
    ⟨a^i, b^j⟩ for vector valued ones."""
    if a.alg != b.alg or a.degree != b.degree:
        raise AlgebraMismatch("forms differ in algebra or degree")
    pairing = a.coeffs.T * exterior(a.alg).gram(a.degree) * b.coeffs
    if pairing.shape == (1, 1):
        return pairing[0, 0]
    return pairing


def pure_weight_split[F: FormBase](omega: F) -> dict[int, F]:
    """Split into pure-weight parts; the parts sum to ω."""
    weights = exterior(omega.alg).weights(omega.degree)
    out: dict[int, F] = {}
    for w in sorted(set(weights)):
        mask = sp.Matrix(
            omega.coeffs.rows,
            omega.coeffs.cols,
            lambda r, c: omega.coeffs[r, c] if weights[r] == w else 0,
        )
        part = omega.with_coeffs(mask)
        if not part.is_zero():
            out[w] = part
    return out


def weight(omega: FormBase) -> float:
    """Minimum weight of the non-zero terms, +inf for the zero form.

    Vector valued forms get the minimum over their components; the grading
    of V itself does not enter.
    """
    weights = exterior(omega.alg).weights(omega.degree)
    found = [
        weights[r]
        for r in range(omega.coeffs.rows)
        if any(sp.expand(c) != 0 for c in omega.coeffs.row(r))
    ]
    return min(found) if found else math.inf


def max_nontrivial_E0_weight_2(alg: StratifiedAlgebra) -> int:
    """Largest weight of a non-zero element of E0 in degree 2, or 0."""
    weights = [weight(form) for form in e0_basis(alg, 2)]
    return int(max(weights)) if weights else 0


def cocycle_check(rho: FormBase) -> bool:
    return d0(rho).is_zero()


def cohomology_decompose[F: FormBase](rho: F) -> tuple[F, F]:
    """Split a cocycle as ρ = π_E0 ρ + d0 μ with μ = d0^{-1} ρ."""
    if not cocycle_check(rho):
        raise NotCocycle("d0(rho) is not zero")
    mu = d0_pseudoinverse(rho)
    harmonic = project_E0(rho)
    log.debug("decomposed cocycle of degree %d", rho.degree)
    return harmonic, mu


def iter_forms(alg: StratifiedAlgebra, k: int) -> Iterable[AlgebraForm]:
    """The basis k-monomials e^I as forms."""
    ext = exterior(alg)
    for row in range(ext.size(k)):
        coeffs = sp.zeros(ext.size(k), 1)
        coeffs[row] = 1
        yield AlgebraForm(alg, k, SCALARS, coeffs)
