"""Group calculus in exponential coordinates of the first kind.

The group law comes from the Dynkin form of the Baker-Campbell-Hausdorff
series, which terminates because the algebra is nilpotent. Left-invariant
frames and coframes are matrix power series in ad_p that terminate for the
same reason, so all of them are polynomial in the coordinates.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import cache
from typing import Any, Callable, Sequence

import numpy as np
import sympy as sp

from carnot_lift.algebra import StratifiedAlgebra, ad_matrix, bracket
from carnot_lift.errors import AlgebraMismatch, DimensionMismatch, StepTooLarge
from carnot_lift.forms import AlgebraForm, exterior

log = logging.getLogger(__name__)

MAX_STEP = 6
"""Largest nilpotency step for which the group law is available."""

Word = tuple[int, ...]


@cache
def dynkin_terms(order: int) -> dict[Word, sp.Rational]:
    """Coefficients of log(e^X e^Y) up to the given total degree.

    Keys are words over {0: X, 1: Y} standing for the right-nested bracket
    [w_1, [w_2, [..., w_m]]]; words from different summands of the Dynkin
    formula are merged, zero coefficients dropped.
    """
    if order > MAX_STEP:
        raise StepTooLarge(f"group law is available up to step {MAX_STEP}, got {order}")
    terms: dict[Word, sp.Rational] = {}
    for m in range(1, order + 1):
        for n in range(1, m + 1):
            # n blocks X^r Y^s with r + s > 0, total length m
            for sizes in _compositions(m, n):
                for split in itertools.product(*[range(size + 1) for size in sizes]):
                    word: list[int] = []
                    denominator = sp.Integer(m)
                    for size, r in zip(sizes, split):
                        word += [0] * r + [1] * (size - r)
                        denominator *= sp.factorial(r) * sp.factorial(size - r)
                    key = tuple(word)
                    if len(key) > 1 and key[-1] == key[-2]:
                        continue
                    coefficient = sp.Rational((-1) ** (n - 1), n) / denominator
                    terms[key] = terms.get(key, sp.Integer(0)) + coefficient
    return {word: c for word, c in terms.items() if c != 0}


def _compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    if parts == 1:
        return [(total,)]
    return [
        (first,) + rest
        for first in range(1, total - parts + 2)
        for rest in _compositions(total - first, parts - 1)
    ]


@dataclass(frozen=True)
class GroupPoint:
    """A point of the group in exponential coordinates."""

    alg: StratifiedAlgebra
    coords: tuple[Any, ...]

    def __post_init__(self):
        coords = tuple(self.coords)
        if len(coords) != self.alg.dim:
            raise DimensionMismatch(
                f"point needs {self.alg.dim} coordinates, got {len(coords)}"
            )
        object.__setattr__(self, "coords", coords)

    @classmethod
    def identity(cls, alg: StratifiedAlgebra) -> "GroupPoint":
        return cls(alg, (sp.Integer(0),) * alg.dim)

    @property
    def vector(self) -> sp.Matrix:
        return sp.Matrix(self.coords)

    def __mul__(self, other: "GroupPoint") -> "GroupPoint":
        return bch_product(self.alg, self, other)

    def inverse(self) -> "GroupPoint":
        return GroupPoint(self.alg, tuple(-c for c in self.coords))

    def dilate(self, lam: Any) -> "GroupPoint":
        return GroupPoint(
            self.alg, tuple(c * lam**k for c, k in zip(self.coords, self.alg.layers))
        )


def _check_step(alg: StratifiedAlgebra) -> None:
    if alg.step > MAX_STEP:
        raise StepTooLarge(f"group law is available up to step {MAX_STEP}, got {alg.step}")


def _point_vector(alg: StratifiedAlgebra, p: Any) -> sp.Matrix:
    if isinstance(p, GroupPoint):
        if p.alg != alg:
            raise AlgebraMismatch("point belongs to a different group")
        return p.vector
    vec = sp.Matrix(list(p))
    if vec.shape != (alg.dim, 1):
        raise DimensionMismatch(f"point needs {alg.dim} coordinates")
    return vec


def bch_vector(alg: StratifiedAlgebra, p: sp.Matrix, q: sp.Matrix) -> sp.Matrix:
    """log(exp(p) exp(q)) for coefficient vectors of any sympy ring."""
    _check_step(alg)
    letters = (p, q)
    nested: dict[Word, sp.Matrix] = {}

    def value(word: Word) -> sp.Matrix:
        if word not in nested:
            if len(word) == 1:
                nested[word] = letters[word[0]]
            else:
                nested[word] = bracket(alg, letters[word[0]], value(word[1:]))
        return nested[word]

    out = sp.zeros(alg.dim, 1)
    for word, c in dynkin_terms(max(alg.step, 1)).items():
        out += c * value(word)
    return out


def bch_product(alg: StratifiedAlgebra, p: Any, q: Any) -> GroupPoint:
    """Group product p·q in exponential coordinates."""
    out = bch_vector(alg, _point_vector(alg, p), _point_vector(alg, q))
    return GroupPoint(alg, tuple(sp.expand(c) for c in out))


@cache
def _primed(alg: StratifiedAlgebra) -> tuple[sp.Symbol, ...]:
    return tuple(sp.Symbol(f"{s.name}_q", real=True) for s in alg.coordinates)


@cache
def group_law(alg: StratifiedAlgebra) -> sp.ImmutableMatrix:
    """Symbolic product of the generic points `alg.coordinates` and their
    primed copies (named "<coordinate>_q")."""
    p, q = sp.Matrix(alg.coordinates), sp.Matrix(_primed(alg))
    return sp.ImmutableMatrix(bch_vector(alg, p, q).applyfunc(sp.expand))


@cache
def numeric_law(alg: StratifiedAlgebra) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """The group law compiled to numpy: law(p, q) -> p·q as float arrays."""
    compiled = sp.lambdify(
        [alg.coordinates, _primed(alg)], list(group_law(alg)), modules="numpy"
    )

    def law(p: Sequence[float], q: Sequence[float]) -> np.ndarray:
        return np.array(compiled(tuple(p), tuple(q)), dtype=float)

    return law


def dilate_point(alg: StratifiedAlgebra, p: Any, lam: Any) -> GroupPoint:
    return GroupPoint(alg, tuple(_point_vector(alg, p))).dilate(lam)


@cache
def _series(kind: str, terms: int) -> tuple[sp.Rational, ...]:
    z = sp.Symbol("z")
    functions = {
        "frame": z / (1 - sp.exp(-z)),
        "coframe": (1 - sp.exp(-z)) / z,
        "zeta": 1 / (1 - sp.exp(-z)) - 1 / z,
    }
    expansion = sp.series(functions[kind], z, 0, terms).removeO()
    return tuple(sp.Rational(expansion.coeff(z, n)) for n in range(terms))


def ad_series(alg: StratifiedAlgebra, kind: str, point: Any = None) -> sp.Matrix:
    """Σ_n c_n ad_p^n for one of the series "frame", "coframe" or "zeta".

    Powers ad_p^n vanish for n >= step, so the sum is finite.
    """
    _check_step(alg)
    p = sp.Matrix(alg.coordinates) if point is None else _point_vector(alg, point)
    ad = ad_matrix(alg, p)
    out, power = sp.zeros(alg.dim, alg.dim), sp.eye(alg.dim)
    for c in _series(kind, max(alg.step, 1)):
        out += c * power
        power = power * ad
    return out.applyfunc(sp.expand)


@cache
def frame_matrix(alg: StratifiedAlgebra) -> sp.ImmutableMatrix:
    """Column i holds the frame field e_i in coordinate partials."""
    return sp.ImmutableMatrix(ad_series(alg, "frame"))


@cache
def coframe_matrix(alg: StratifiedAlgebra) -> sp.ImmutableMatrix:
    """Row i holds the coframe 1-form θ^i in the coordinate differentials."""
    return sp.ImmutableMatrix(ad_series(alg, "coframe"))


@cache
def numeric_frame(alg: StratifiedAlgebra) -> Callable[[Sequence[float]], np.ndarray]:
    compiled = sp.lambdify([alg.coordinates], frame_matrix(alg), modules="numpy")
    return lambda p: np.array(compiled(tuple(p)), dtype=float)


@cache
def numeric_coframe(alg: StratifiedAlgebra) -> Callable[[Sequence[float]], np.ndarray]:
    compiled = sp.lambdify([alg.coordinates], coframe_matrix(alg), modules="numpy")
    return lambda p: np.array(compiled(tuple(p)), dtype=float)


@dataclass(frozen=True)
class PolyFrameField:
    """A left-invariant frame field or coframe form with polynomial coefficients.

    For a frame field the coefficients are along ∂/∂x_j, for a coframe form
    along dx_j.
    """

    alg: StratifiedAlgebra
    name: str
    coefficients: tuple[sp.Expr, ...]
    covariant: bool = False

    def __call__(self, expr: Any) -> sp.Expr:
        """Directional derivative of an expression in the coordinates."""
        if self.covariant:
            raise TypeError(f"{self.name} is a 1-form, not a vector field")
        return sp.expand(
            sum(
                c * sp.diff(expr, x)
                for c, x in zip(self.coefficients, self.alg.coordinates)
                if c != 0
            )
        )

    def pair(self, field: "PolyFrameField") -> sp.Expr:
        """Evaluate a coframe form on a frame field."""
        if not self.covariant or field.covariant:
            raise TypeError("pair a coframe form with a frame field")
        return sp.expand(sum(a * b for a, b in zip(self.coefficients, field.coefficients)))


def left_invariant_frame(alg: StratifiedAlgebra) -> list[PolyFrameField]:
    frame = frame_matrix(alg)
    return [PolyFrameField(alg, name, tuple(frame.col(i))) for i, name in enumerate(alg.basis)]


def left_invariant_coframe(alg: StratifiedAlgebra) -> list[PolyFrameField]:
    coframe = coframe_matrix(alg)
    return [
        PolyFrameField(alg, name + "*", tuple(coframe.row(i)), covariant=True)
        for i, name in enumerate(alg.basis)
    ]


def structure_equation_residual(alg: StratifiedAlgebra) -> sp.ImmutableMatrix:
    """Coordinate coefficients of dθ^i + ½ Σ c^i_{jk} θ^j∧θ^k.

    Row i belongs to θ^i, columns to the pairs a < b of coordinate
    differentials. Every entry expands to zero.
    """
    m = sp.Matrix(coframe_matrix(alg))
    xs = alg.coordinates
    pairs = list(itertools.combinations(range(alg.dim), 2))
    out = sp.zeros(alg.dim, len(pairs))
    for col, (a, b) in enumerate(pairs):
        for i in range(alg.dim):
            value = sp.diff(m[i, b], xs[a]) - sp.diff(m[i, a], xs[b])
            for j, k, target, c in alg.terms:
                if target == i:
                    value += c * (m[j, a] * m[k, b] - m[j, b] * m[k, a]) / 2
            out[i, col] = sp.expand(value)
    return sp.ImmutableMatrix(out)


def bilinear_matrices(rho: AlgebraForm) -> list[sp.Matrix]:
    """Antisymmetric matrices R_j with R_j[a, b] = ρ^j(e_a, e_b)."""
    if rho.degree != 2:
        raise DimensionMismatch("expected a 2-form")
    n = rho.alg.dim
    out = []
    for col in range(rho.values.dim):
        r = sp.zeros(n, n)
        for row, (a, b) in enumerate(exterior(rho.alg).monomials(2)):
            r[a, b] = rho.coeffs[row, col]
            r[b, a] = -rho.coeffs[row, col]
        out.append(r)
    return out


def potential_matrix(rho: AlgebraForm) -> sp.ImmutableMatrix:
    """Coefficients of the potential α of a 2-cocycle in the coframe.

    Entry (i, j) is ρ^j(p, ζ(ad_p) e_i) at the generic point p with
    ζ(z) = 1/(1 - e^{-z}) - 1/z; the result satisfies dα = ρ.
    """
    alg = rho.alg
    p = sp.Matrix(alg.coordinates)
    zeta = ad_series(alg, "zeta")
    columns = [(p.T * r * zeta).T for r in bilinear_matrices(rho)]
    if not columns:
        return sp.ImmutableMatrix(sp.zeros(alg.dim, 0))
    return sp.ImmutableMatrix(sp.Matrix.hstack(*columns).applyfunc(sp.expand))


def exp_segment(
    alg: StratifiedAlgebra, start: Sequence[float], direction: Sequence[float], t: float
) -> np.ndarray:
    """start·exp(t·direction) as floats."""
    law = numeric_law(alg)
    return law(start, [t * float(d) for d in direction])

