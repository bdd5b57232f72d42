"""Forms with function coefficients and the Rumin operators acting on them.

A `FieldForm` stores the same coefficient matrix as an `AlgebraForm`, only
with sympy expressions in the exponential coordinates instead of rationals.
d0, d0^{-1} and the orthogonal projections act row-wise with the constant
matrices of `carnot_lift.forms`; the exterior derivative adds the frame
derivatives of the coefficients.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Mapping, Self, Sequence

import numpy as np
import sympy as sp

from carnot_lift.algebra import SCALARS, GradedSpace, Key, StratifiedAlgebra
from carnot_lift.errors import AlgebraMismatch, DimensionMismatch
from carnot_lift.expressions import check_supported, parse_expression
from carnot_lift.forms import (
    AlgebraForm,
    FormBase,
    _terms_matrix,
    compound_matrix,
    d0,
    d0_pseudoinverse,
    exterior,
    project_E0,
)
from carnot_lift.groups import coframe_matrix, frame_matrix, left_invariant_frame
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


def tidy(expr: Any) -> sp.Expr:
    """Normal form of a coefficient: fully expanded."""
    return sp.expand(expr)


@dataclass(frozen=True)
class FieldForm(FormBase):
    """A V-valued k-form on (a chart of) the group of `alg`.

    Coefficients are expressions in `alg.coordinates`, one row per coframe
    k-monomial θ^I.
    """

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "coeffs", self.coeffs.applyfunc(sp.sympify))

    @classmethod
    def zero(cls, alg: StratifiedAlgebra, degree: int, values: GradedSpace = SCALARS) -> Self:
        return cls(alg, degree, values, sp.zeros(exterior(alg).size(degree), values.dim))

    @classmethod
    def function(cls, alg: StratifiedAlgebra, expr: Any) -> Self:
        """A scalar 0-form."""
        return cls(alg, 0, SCALARS, sp.Matrix([[_coefficient(alg, expr)]]))

    @classmethod
    def from_terms(
        cls,
        alg: StratifiedAlgebra,
        degree: int,
        terms: Mapping[Any, Any],
        values: GradedSpace = SCALARS,
    ) -> Self:
        """Like `AlgebraForm.from_terms`, with expression (or string) coefficients."""
        coeffs = _terms_matrix(
            alg, degree, terms, values, convert=lambda c: _coefficient(alg, c)
        )
        return cls(alg, degree, values, coeffs)

    @classmethod
    def from_algebra_form(cls, form: AlgebraForm) -> Self:
        return cls(form.alg, form.degree, form.values, form.coeffs)

    @classmethod
    def from_coordinates(
        cls,
        alg: StratifiedAlgebra,
        degree: int,
        coeffs: Any,
        values: GradedSpace = SCALARS,
    ) -> Self:
        """Build from coefficients along the coordinate monomials dx^J."""
        to_coframe = compound_matrix(frame_matrix(alg), degree).T
        return cls(alg, degree, values, (to_coframe * sp.Matrix(coeffs)).applyfunc(tidy))

    def coordinate_coefficients(self) -> sp.Matrix:
        """Coefficients along dx^J, using θ^I = Σ_J det(M[I, J]) dx^J."""
        to_coords = compound_matrix(coframe_matrix(self.alg), self.degree).T
        return (to_coords * self.coeffs).applyfunc(tidy)

    @property
    def is_left_invariant(self) -> bool:
        coordinates = set(self.alg.coordinates)
        return not any(c.free_symbols & coordinates for c in self.coeffs)

    def to_algebra_form(self) -> AlgebraForm:
        if not self.is_left_invariant:
            raise DimensionMismatch("form has non-constant coefficients")
        return AlgebraForm(self.alg, self.degree, self.values, self.coeffs)

    def tidy(self) -> Self:
        return self.with_coeffs(self.coeffs.applyfunc(tidy))

    def substitute(self, mapping: Mapping[sp.Symbol, Any]) -> Self:
        return self.with_coeffs(self.coeffs.xreplace(dict(mapping)))

    @cached_property
    def numeric(self) -> Callable[[Sequence[float]], np.ndarray]:
        """Coefficient matrix compiled to p -> float array."""
        return compile_matrix(self.coeffs, self.alg.coordinates)


def _coefficient(alg: StratifiedAlgebra, value: Any) -> sp.Expr:
    if isinstance(value, str):
        return parse_expression(value, alg.coordinates)
    return check_supported(value, alg.coordinates)


def as_field_form(omega: FormBase) -> FieldForm:
    if isinstance(omega, FieldForm):
        return omega
    return FieldForm(omega.alg, omega.degree, omega.values, omega.coeffs)


def frame_derivative(alg: StratifiedAlgebra, expr: Any, i: Key) -> sp.Expr:
    """X_i(expr) for the left-invariant frame field X_i."""
    return left_invariant_frame(alg)[alg.index(i)](_coefficient(alg, expr))


def exterior_d(omega: FormBase) -> FieldForm:
    """d(f θ^I) = Σ_i X_i(f) θ^i ∧ θ^I + f d0 θ^I, summed over the coefficients."""
    omega = as_field_form(omega)
    alg, k = omega.alg, omega.degree
    ext = exterior(alg)
    coeffs = sp.Matrix(omega.coeffs)
    out = ext.d0(k) * coeffs
    for i, field in enumerate(left_invariant_frame(alg)):
        derivative = coeffs.applyfunc(field)
        if all(entry == 0 for entry in derivative):
            continue
        out += ext.wedge_left(i, k) * derivative
    return omega.with_coeffs(out.applyfunc(tidy), degree=k + 1)


def rumin_D(omega: FormBase) -> FieldForm:
    """D = d0^{-1}(d - d0), keeping the degree."""
    omega = as_field_form(omega)
    return d0_pseudoinverse(exterior_d(omega) - d0(omega)).tidy()


def rumin_P(omega: FormBase) -> FieldForm:
    """P = Σ_j (-1)^j D^j. D raises the weight, so the sum is finite."""
    omega = as_field_form(omega)
    total, term = omega, omega
    for _ in range(len(set(exterior(omega.alg).weights(omega.degree))) + 1):
        term = -rumin_D(term)
        if term.is_zero():
            break
        total = total + term
    return total.tidy()


def pi_E(omega: FormBase) -> FieldForm:
    """π_E = I - P d0^{-1} d - d P d0^{-1}."""
    omega = as_field_form(omega)
    out = omega - rumin_P(d0_pseudoinverse(exterior_d(omega)))
    if omega.degree > 0:
        out = out - exterior_d(rumin_P(d0_pseudoinverse(omega)))
    return out.tidy()


def pi_E0(omega: FormBase) -> FieldForm:
    return project_E0(as_field_form(omega)).tidy()


def d_c(omega: FormBase) -> FieldForm:
    """Rumin differential π_E0 π_E d π_E0."""
    return pi_E0(pi_E(exterior_d(pi_E0(omega))))


def rumin_ops(omega: FormBase) -> dict[str, FieldForm]:
    return {
        "D": rumin_D(omega),
        "P": rumin_P(omega),
        "pi_E": pi_E(omega),
        "pi_E0": pi_E0(omega),
        "d_c": d_c(omega),
    }


def pointwise_inner(a: FormBase, b: FormBase) -> sp.Matrix:
    """Matrix of pointwise pairings ⟨a^i, b^j⟩ of the components."""
    if a.alg != b.alg or a.degree != b.degree:
        raise AlgebraMismatch("forms differ in algebra or degree")
    gram = exterior(a.alg).gram(a.degree)
    return (a.coeffs.T * gram * b.coeffs).applyfunc(tidy)


@dataclass(frozen=True)
class IdentityResult:
    """Outcome of an identity test.

    `verdict` is "equal", "not_equal" or "unknown". `exact` tells whether
    the verdict was reached symbolically or from samples.
    """

    verdict: str
    exact: bool
    witness: tuple[float, ...] | None = None
    seed: int | None = None
    samples: int = 0

    @property
    def equal(self) -> bool:
        return self.verdict == "equal"


def exact_zero(expr: Any, symbols: Sequence[sp.Symbol]) -> bool | None:
    """Decide `expr == 0` symbolically.

    Rational functions are decided either way. Anything else is True when
    sympy simplifies it to zero and None (undecided) otherwise.
    """
    expr = sp.sympify(expr)
    if expr == 0:
        return True
    if expr.is_rational_function(*symbols):
        return sp.cancel(sp.together(expr)) == 0
    if sp.simplify(expr) == 0:
        return True
    return None


def magnitudes(matrix: Any) -> sp.Matrix:
    """Entrywise sum of |term| over the summands, the size rounding errors scale with."""
    return sp.Matrix(matrix).applyfunc(
        lambda e: sp.Add(*(sp.Abs(t) for t in sp.Add.make_args(sp.sympify(e))))
    )


def matrix_identity_test(
    difference: Any,
    symbols: Sequence[sp.Symbol],
    domain: Domain | None = None,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    tol: float = DEFAULT_TOL,
    scale: Any = None,
) -> IdentityResult:
    """Decide whether every entry of `difference` vanishes on the domain.

    A sampled entry counts as non-zero when it exceeds tol * (1 + magnitude),
    the magnitude being `scale` (same shape) or, by default, the sum of the
    absolute values of the entry's summands.
    """
    difference = sp.Matrix(difference)
    verdicts = [exact_zero(e, symbols) for e in difference]
    if all(v is True for v in verdicts):
        return IdentityResult("equal", exact=True)
    domain = domain or Domain.cube(len(symbols))
    n = clamp_samples(samples)
    evaluate = compile_matrix(difference, symbols)
    magnitude = compile_matrix(magnitudes(difference) if scale is None else scale, symbols)
    finite = 0
    for p in domain.sample(n, seed):
        value = evaluate(p)
        if not np.all(np.isfinite(value)):
            continue
        finite += 1
        if relative_excess(value, np.nan_to_num(magnitude(p)), tol) > 0:
            return IdentityResult(
                "not_equal",
                exact=False in verdicts,
                witness=tuple(float(c) for c in p),
                seed=seed,
                samples=n,
            )
    if False in verdicts:
        # a non-zero rational function that vanishes on all samples
        return IdentityResult("not_equal", exact=True, seed=seed, samples=n)
    if finite == 0:
        return IdentityResult("unknown", exact=False, seed=seed, samples=n)
    return IdentityResult("equal", exact=False, seed=seed, samples=n)


def identity_test(
    a: FormBase,
    b: FormBase,
    domain: Domain | None = None,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    tol: float = DEFAULT_TOL,
) -> IdentityResult:
    """Compare two forms: exactly for rational coefficients, else by sampling."""
    a, b = as_field_form(a), as_field_form(b)
    difference = (a - b).coeffs
    scale = magnitudes(a.coeffs) + magnitudes(b.coeffs)
    return matrix_identity_test(
        difference, a.alg.coordinates, domain, samples, seed, tol, scale=scale
    )
