"""Stratified Lie algebras, graded vector spaces and graded linear maps.

Everything in here is exact: coefficients are sympy rationals and no floating
point arithmetic is involved. Bases are ordered layer-major, so all vectors of
the first (horizontal) layer come first.
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Iterable, Mapping, Self, Sequence

import sympy as sp

from carnot_lift.errors import (
    AlgebraMismatch,
    DimensionMismatch,
    InvalidParameter,
    NotGraded,
    UnknownFamily,
)

log = logging.getLogger(__name__)

Key = int | str


def as_rational(value: Any) -> sp.Rational:
    """Convert ints, fractions, "p/q" strings and sympy numbers to a Rational.

    Floats are converted through their decimal representation, so 0.1 turns
    into 1/10 and not into its binary expansion.
    """
    if isinstance(value, float):
        value = repr(value)
    elif isinstance(value, Fraction):
        return sp.Rational(value.numerator, value.denominator)
    rational = sp.Rational(value)
    if not isinstance(rational, sp.Rational):
        raise InvalidParameter(f"Not a rational number: {value!r}")
    return rational


def rational_string(value: sp.Rational) -> str:
    """Serialize a rational as "p/q" (or "p" for integers)."""
    value = sp.Rational(value)
    if value.q == 1:
        return str(value.p)
    return f"{value.p}/{value.q}"


def _gram_or_identity(gram: Any, dim: int) -> sp.ImmutableMatrix:
    if gram is None:
        return sp.ImmutableMatrix(sp.eye(dim))
    matrix = sp.Matrix(gram).applyfunc(as_rational)
    if matrix.shape != (dim, dim):
        raise DimensionMismatch(f"gram must be {dim}x{dim}, got {matrix.shape}")
    return sp.ImmutableMatrix(matrix)


@dataclass(frozen=True)
class GradedSpace:
    """A graded inner product space with a named basis.

    Each basis vector sits in exactly one layer. Value spaces of forms and
    cocycles are graded spaces; scalar valued forms use `SCALARS`.
    """

    basis: tuple[str, ...]
    layers: tuple[int, ...]
    gram: sp.ImmutableMatrix = None  # pyright: ignore[reportAssignmentType]

    def __post_init__(self):
        basis = tuple(str(name) for name in self.basis)
        layers = tuple(int(k) for k in self.layers)
        if len(basis) != len(layers):
            raise DimensionMismatch(
                f"{len(basis)} basis names but {len(layers)} layer entries"
            )
        if len(set(basis)) != len(basis):
            raise InvalidParameter(f"Duplicate basis names in {basis}")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "gram", _gram_or_identity(self.gram, len(basis)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, name: Key) -> int:
        if isinstance(name, int):
            if not 0 <= name < self.dim:
                raise DimensionMismatch(f"Index {name} out of range for {self.basis}")
            return name
        try:
            return self.basis.index(name)
        except ValueError:
            raise InvalidParameter(f"Unknown basis vector {name!r}") from None

    def layer_indices(self, k: int) -> tuple[int, ...]:
        return tuple(i for i, layer in enumerate(self.layers) if layer == k)

    def restricted(self, indices: Sequence[int]) -> "GradedSpace":
        """The subspace spanned by some of the basis vectors."""
        idx = list(indices)
        return GradedSpace(
            tuple(self.basis[i] for i in idx),
            tuple(self.layers[i] for i in idx),
            self.gram.extract(idx, idx),
        )


SCALARS = GradedSpace(("1",), (0,))
"""Value space of scalar valued forms."""


def _coordinate_names(basis: Sequence[str]) -> tuple[str, ...]:
    lowered = tuple(name.lower() for name in basis)
    if len(set(lowered)) == len(lowered):
        return lowered
    return tuple(basis)


@dataclass(frozen=True)
class StratifiedAlgebra:
    """A finite dimensional Lie algebra with a declared layer decomposition.

    `constants[j][k][i]` is the structure constant c^i_{jk}, so that
    [e_j, e_k] = sum_i c^i_{jk} e_i. The table is stored densely and exactly as
    given; `validate_stratified` reports any violated invariant.

    Use `from_brackets` to build an algebra from a sparse bracket table.
    """

    basis: tuple[str, ...]
    layers: tuple[int, ...]
    constants: tuple[tuple[tuple[sp.Rational, ...], ...], ...]
    gram: sp.ImmutableMatrix = None  # pyright: ignore[reportAssignmentType]
    tags: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        space = GradedSpace(self.basis, self.layers, self.gram)
        n = space.dim
        constants = tuple(
            tuple(tuple(as_rational(c) for c in row) for row in plane)
            for plane in self.constants
        )
        if len(constants) != n or any(
            len(plane) != n or any(len(row) != n for row in plane)
            for plane in constants
        ):
            raise DimensionMismatch(f"structure constants must be {n}x{n}x{n}")
        object.__setattr__(self, "basis", space.basis)
        object.__setattr__(self, "layers", space.layers)
        object.__setattr__(self, "gram", space.gram)
        object.__setattr__(self, "constants", constants)
        object.__setattr__(self, "tags", frozenset(self.tags))

    @classmethod
    def from_brackets(
        cls,
        basis: Sequence[str],
        layers: Sequence[int],
        brackets: Mapping[tuple[Key, Key], Mapping[Key, Any]] | None = None,
        gram: Any = None,
        tags: Iterable[str] = (),
    ) -> Self:
        """Build an algebra from a sparse table {(j, k): {i: c}}.

        Keys may be basis indices or basis names. A pair given only in one
        order gets its antisymmetric partner filled in; a pair given in both
        orders is stored as given.
        """
        space = GradedSpace(tuple(basis), tuple(layers), gram)
        n = space.dim
        table = [[[sp.Integer(0)] * n for _ in range(n)] for _ in range(n)]
        given: set[tuple[int, int]] = set()
        for (a, b), coeffs in (brackets or {}).items():
            j, k = space.index(a), space.index(b)
            given.add((j, k))
            for target, value in coeffs.items():
                table[j][k][space.index(target)] += as_rational(value)
        for j, k in list(given):
            if (k, j) not in given and j != k:
                table[k][j] = [-c for c in table[j][k]]
        return cls(
            space.basis,
            space.layers,
            tuple(tuple(tuple(row) for row in plane) for plane in table),
            space.gram,
            frozenset(tags),
        )

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def space(self) -> GradedSpace:
        return GradedSpace(self.basis, self.layers, self.gram)

    @property
    def step(self) -> int:
        return max(self.layers, default=0)

    @property
    def rank(self) -> int:
        """Dimension of the horizontal layer."""
        return len(self.layer_indices(1))

    @property
    def homogeneous_dimension(self) -> int:
        """Q = sum over layers of k * dim(layer k)."""
        return sum(self.layers)

    @property
    def horizontal(self) -> tuple[int, ...]:
        return self.layer_indices(1)

    @cached_property
    def coordinates(self) -> tuple[sp.Symbol, ...]:
        """Exponential coordinates, one real symbol per basis vector."""
        return tuple(sp.Symbol(name, real=True) for name in _coordinate_names(self.basis))

    @cached_property
    def terms(self) -> tuple[tuple[int, int, int, sp.Rational], ...]:
        """Non-zero structure constants as (j, k, i, c^i_{jk})."""
        return tuple(
            (j, k, i, c)
            for j, plane in enumerate(self.constants)
            for k, row in enumerate(plane)
            for i, c in enumerate(row)
            if c != 0
        )

    @property
    def is_abelian(self) -> bool:
        return not self.terms

    def index(self, name: Key) -> int:
        return self.space.index(name)

    def layer_indices(self, k: int) -> tuple[int, ...]:
        return self.space.layer_indices(k)

    def basis_vector(self, name: Key) -> sp.Matrix:
        v = sp.zeros(self.dim, 1)
        v[self.index(name)] = 1
        return v

    def bracket_table(self) -> dict[tuple[int, int], dict[int, sp.Rational]]:
        """Sparse table of [e_j, e_k] for j < k (plus any asymmetric entries)."""
        table: dict[tuple[int, int], dict[int, sp.Rational]] = {}
        for j, k, i, c in self.terms:
            if j < k or self.constants[k][j][i] != -c:
                table.setdefault((j, k), {})[i] = c
        return table

    def renamed(self, names: Sequence[str]) -> "StratifiedAlgebra":
        return StratifiedAlgebra(
            tuple(names), self.layers, self.constants, self.gram, self.tags
        )

    def permuted(self, order: Sequence[int]) -> "StratifiedAlgebra":
        """The same algebra with basis vectors listed in the given order."""
        order = list(order)
        if sorted(order) != list(range(self.dim)):
            raise InvalidParameter(f"{order} is not a permutation of the basis")
        pos = {old: new for new, old in enumerate(order)}
        n = self.dim
        table = [[[sp.Integer(0)] * n for _ in range(n)] for _ in range(n)]
        for j, k, i, c in self.terms:
            table[pos[j]][pos[k]][pos[i]] = c
        return StratifiedAlgebra(
            tuple(self.basis[i] for i in order),
            tuple(self.layers[i] for i in order),
            tuple(tuple(tuple(row) for row in plane) for plane in table),
            self.gram.extract(order, order),
            self.tags,
        )


def _as_vector(alg: StratifiedAlgebra, v: Any) -> sp.Matrix:
    vec = sp.Matrix(v)
    if vec.shape == (1, alg.dim):
        vec = vec.T
    if vec.shape != (alg.dim, 1):
        raise DimensionMismatch(f"Expected a vector of length {alg.dim}, got {vec.shape}")
    return vec


def bracket(alg: StratifiedAlgebra, v: Any, w: Any) -> sp.Matrix:
    """Bilinear extension of the structure constants.

    Works on any coefficient ring sympy can multiply: rationals, symbols or
    floats.
    """
    v, w = _as_vector(alg, v), _as_vector(alg, w)
    out = sp.zeros(alg.dim, 1)
    for j, k, i, c in alg.terms:
        if v[j] != 0 and w[k] != 0:
            out[i] += c * v[j] * w[k]
    return out


def ad_matrix(alg: StratifiedAlgebra, v: Any) -> sp.Matrix:
    """Matrix of ad_v = [v, .] in the basis of the algebra."""
    v = _as_vector(alg, v)
    ad = sp.zeros(alg.dim, alg.dim)
    for j, k, i, c in alg.terms:
        if v[j] != 0:
            ad[i, k] += c * v[j]
    return ad


@dataclass(frozen=True)
class Issue:
    kind: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    """Result of `validate_stratified`. An empty report means valid."""

    issues: tuple[Issue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.issues

    def kinds(self) -> set[str]:
        return {issue.kind for issue in self.issues}

    def __bool__(self) -> bool:
        return self.ok


def _layer_rank(alg: StratifiedAlgebra, k: int) -> int:
    """Rank of the span of [layer 1, layer k] projected onto layer k+1."""
    target = alg.layer_indices(k + 1)
    if not target:
        return 0
    columns = [
        bracket(alg, alg.basis_vector(a), alg.basis_vector(b)).extract(target, [0])
        for a in alg.layer_indices(1)
        for b in alg.layer_indices(k)
    ]
    if not columns:
        return 0
    return sp.Matrix.hstack(*columns).rank()


def validate_stratified(alg: StratifiedAlgebra) -> ValidationReport:
    """Check every invariant of a stratified algebra and list the violations.

    Checked are: layer numbering, layer-major ordering, antisymmetry, the
    Jacobi identity, grading compatibility, stratification (layer 1 bracket
    generates every next layer) and the block structure of the gram matrix.
    """
    issues: list[Issue] = []
    n, layers, c = alg.dim, alg.layers, alg.constants

    if any(k < 1 for k in layers):
        issues.append(Issue("layers", "layer degrees must be at least 1"))
    missing = [k for k in range(1, alg.step + 1) if k not in layers]
    if missing:
        issues.append(Issue("layers", f"empty layers {missing}"))
    if list(layers) != sorted(layers):
        issues.append(Issue("ordering", "basis is not ordered layer-major"))

    for j, k in itertools.combinations_with_replacement(range(n), 2):
        for i in range(n):
            if c[j][k][i] != -c[k][j][i]:
                issues.append(
                    Issue(
                        "antisymmetry",
                        f"c^{alg.basis[i]}_{{{alg.basis[j]}{alg.basis[k]}}} != "
                        f"-c^{alg.basis[i]}_{{{alg.basis[k]}{alg.basis[j]}}}",
                    )
                )

    e = [alg.basis_vector(i) for i in range(n)]
    for a, b, d in itertools.combinations(range(n), 3):
        jacobi = (
            bracket(alg, bracket(alg, e[a], e[b]), e[d])
            + bracket(alg, bracket(alg, e[b], e[d]), e[a])
            + bracket(alg, bracket(alg, e[d], e[a]), e[b])
        )
        if any(entry != 0 for entry in jacobi):
            names = (alg.basis[a], alg.basis[b], alg.basis[d])
            issues.append(Issue("jacobi", f"Jacobi identity fails on {names}"))

    for j, k, i, _ in alg.terms:
        if layers[i] != layers[j] + layers[k]:
            issues.append(
                Issue(
                    "grading",
                    f"[{alg.basis[j]}, {alg.basis[k]}] has a component along "
                    f"{alg.basis[i]} in layer {layers[i]}, "
                    f"expected layer {layers[j] + layers[k]}",
                )
            )

    for k in range(1, alg.step):
        expected = len(alg.layer_indices(k + 1))
        if _layer_rank(alg, k) != expected:
            issues.append(
                Issue("stratification", f"[layer 1, layer {k}] does not span layer {k + 1}")
            )

    g = alg.gram
    if g != g.T:
        issues.append(Issue("gram", "gram matrix is not symmetric"))
    elif n and not g.is_positive_definite:
        issues.append(Issue("gram", "gram matrix is not positive definite"))
    if any(g[a, b] != 0 for a in range(n) for b in range(n) if layers[a] != layers[b]):
        issues.append(Issue("gram", "layers are not pairwise orthogonal"))

    if issues:
        log.debug("algebra %s: %d issues", alg.basis, len(issues))
    return ValidationReport(tuple(issues))


@dataclass(frozen=True)
class GradedLinearMap:
    """A linear map between graded spaces that respects the layers.

    `matrix` has one column per source basis vector, expressed in the target
    basis. Source and target can be algebras or plain graded spaces.
    """

    source: "GradedSpace | StratifiedAlgebra"
    target: "GradedSpace | StratifiedAlgebra"
    matrix: sp.ImmutableMatrix

    def __post_init__(self):
        matrix = sp.ImmutableMatrix(self.matrix)
        if matrix.shape != (self.target.dim, self.source.dim):
            raise DimensionMismatch(
                f"matrix must be {self.target.dim}x{self.source.dim}, got {matrix.shape}"
            )
        for i, j in itertools.product(range(matrix.rows), range(matrix.cols)):
            if matrix[i, j] != 0 and self.target.layers[i] != self.source.layers[j]:
                raise NotGraded(
                    f"{self.source.basis[j]} (layer {self.source.layers[j]}) is sent "
                    f"into {self.target.basis[i]} (layer {self.target.layers[i]})"
                )
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def identity(cls, space: "GradedSpace | StratifiedAlgebra") -> Self:
        return cls(space, space, sp.ImmutableMatrix(sp.eye(space.dim)))

    def __call__(self, v: Any) -> sp.Matrix:
        vec = sp.Matrix(v)
        if vec.shape != (self.source.dim, 1):
            raise DimensionMismatch(f"Expected a vector of length {self.source.dim}")
        return self.matrix * vec

    def __matmul__(self, other: "GradedLinearMap") -> "GradedLinearMap":
        """Composition self ∘ other."""
        if (other.target.basis, other.target.layers) != (
            self.source.basis,
            self.source.layers,
        ):
            raise AlgebraMismatch("Cannot compose maps between different spaces")
        return GradedLinearMap(other.source, self.target, self.matrix * other.matrix)

    def is_homomorphism(self) -> bool:
        """Check [Lu, Lv] = L[u, v] on all pairs of source basis vectors."""
        source, target = self.source, self.target
        if not (
            isinstance(source, StratifiedAlgebra) and isinstance(target, StratifiedAlgebra)
        ):
            raise AlgebraMismatch("Homomorphism check needs algebras on both sides")
        return not homomorphism_defects(source, target, self.matrix)


def homomorphism_defects(
    source: StratifiedAlgebra, target: StratifiedAlgebra, matrix: Any
) -> list[tuple[int, int, sp.Matrix]]:
    """Basis pairs (a, b) on which [L e_a, L e_b] - L[e_a, e_b] is not zero."""
    m = sp.Matrix(matrix)
    defects = []
    for a, b in itertools.combinations(range(source.dim), 2):
        lhs = bracket(target, m[:, a], m[:, b])
        rhs = m * bracket(source, source.basis_vector(a), source.basis_vector(b))
        diff = (lhs - rhs).applyfunc(sp.expand)
        if any(entry != 0 for entry in diff):
            defects.append((a, b, diff))
    return defects


def dilation(alg: StratifiedAlgebra, lam: Any) -> GradedLinearMap:
    """The dilation δ_λ, scaling layer k by λ^k."""
    lam = as_rational(lam)
    if lam <= 0:
        raise InvalidParameter(f"Dilation factor must be positive, got {lam}")
    return GradedLinearMap(alg, alg, sp.ImmutableMatrix(sp.diag(*[lam**k for k in alg.layers])))


def _heisenberg(n: int) -> StratifiedAlgebra:
    if n < 1:
        raise InvalidParameter(f"heisenberg needs n >= 1, got {n}")
    xs = ["X"] if n == 1 else [f"X{i}" for i in range(1, n + 1)]
    ys = ["Y"] if n == 1 else [f"Y{i}" for i in range(1, n + 1)]
    brackets = {(x, y): {"Z": 1} for x, y in zip(xs, ys)}
    return StratifiedAlgebra.from_brackets(
        xs + ys + ["Z"], [1] * (2 * n) + [2], brackets, tags={"heisenberg"}
    )


def _filiform(s: int) -> StratifiedAlgebra:
    if s < 1:
        raise InvalidParameter(f"filiform needs s >= 1, got {s}")
    basis = ["X", "Y"] + [f"Z{k}" for k in range(2, s + 1)]
    layers = [1, 1] + list(range(2, s + 1))
    brackets: dict[tuple[Key, Key], dict[Key, Any]] = {}
    if s >= 2:
        brackets[("X", "Y")] = {"Z2": 1}
    for k in range(2, s):
        brackets[("X", f"Z{k}")] = {f"Z{k + 1}": 1}
    return StratifiedAlgebra.from_brackets(basis, layers, brackets)


def _euclidean(n: int) -> StratifiedAlgebra:
    if n < 1:
        raise InvalidParameter(f"euclidean needs n >= 1, got {n}")
    return StratifiedAlgebra.from_brackets([f"X{i}" for i in range(1, n + 1)], [1] * n)


def _multi_indices(n: int, order: int) -> list[tuple[int, ...]]:
    return sorted(
        (a for a in itertools.product(range(order + 1), repeat=n) if sum(a) == order),
        reverse=True,
    )


def _jet(n: int, k: int) -> StratifiedAlgebra:
    """Jet algebra J^k(R^n) of real valued functions.

    Basis: X_i (layer 1) and U_a for multi-indices |a| <= k, with U_a in
    layer k - |a| + 1. The only brackets are [X_i, U_a] = U_{a - e_i}.
    """
    if n < 1 or k < 1:
        raise InvalidParameter(f"jet needs n >= 1 and k >= 1, got n={n}, k={k}")
    xs = ["X"] if n == 1 else [f"X{i}" for i in range(1, n + 1)]

    def u(a: tuple[int, ...]) -> str:
        return "U" + "".join(str(i) for i in a)

    basis, layers = list(xs), [1] * n
    for order in range(k, -1, -1):
        for a in _multi_indices(n, order):
            basis.append(u(a))
            layers.append(k - order + 1)
    brackets: dict[tuple[Key, Key], dict[Key, Any]] = {}
    for order in range(1, k + 1):
        for a in _multi_indices(n, order):
            for i in range(n):
                if a[i] > 0:
                    lower = tuple(v - (1 if j == i else 0) for j, v in enumerate(a))
                    brackets[(xs[i], u(a))] = {u(lower): 1}
    return StratifiedAlgebra.from_brackets(basis, layers, brackets, tags={"jet"})


_FAMILIES = {
    "heisenberg": _heisenberg,
    "filiform": _filiform,
    "euclidean": _euclidean,
    "jet": _jet,
}


def make_standard(family: str, *params: int) -> StratifiedAlgebra:
    """Build a standard algebra: heisenberg(n), filiform(s), euclidean(n), jet(n, k).

    Filiform algebras use the basis X, Y, Z2, ..., Zs with [X, Y] = Z2 and
    [X, Zk] = Z(k+1).
    """
    try:
        builder = _FAMILIES[family]
    except KeyError:
        raise UnknownFamily(
            f"Unknown family {family!r}, choose one of {sorted(_FAMILIES)}"
        ) from None
    try:
        return builder(*params)
    except TypeError as e:
        raise InvalidParameter(f"Bad parameters {params} for {family}: {e}") from None


def layer_major_order(layers: Sequence[int]) -> list[int]:
    return sorted(range(len(layers)), key=lambda i: layers[i])


def direct_product(a: StratifiedAlgebra, b: StratifiedAlgebra) -> StratifiedAlgebra:
    """Direct product with block diagonal brackets and gram.

    Names of `b` that clash with names of `a` get a "_2" suffix. Layers of
    equal degree are merged and the result is reordered layer-major.
    """
    names_b = [name + "_2" if name in a.basis else name for name in b.basis]
    n, m = a.dim, b.dim
    table = [[[sp.Integer(0)] * (n + m) for _ in range(n + m)] for _ in range(n + m)]
    for j, k, i, c in a.terms:
        table[j][k][i] = c
    for j, k, i, c in b.terms:
        table[n + j][n + k][n + i] = c
    product = StratifiedAlgebra(
        a.basis + tuple(names_b),
        a.layers + b.layers,
        tuple(tuple(tuple(row) for row in plane) for plane in table),
        sp.ImmutableMatrix(sp.diag(a.gram, b.gram)),
        a.tags | b.tags,
    )
    return product.permuted(layer_major_order(product.layers))
