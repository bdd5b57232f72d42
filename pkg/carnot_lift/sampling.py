"""Sample domains, seeded point generation and compiled coefficient functions.

Library functions take `tol`, `seed` and `samples` keywords whose defaults
live here; configuration files and the environment are only read by the cli.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
import sympy as sp

from carnot_lift.errors import InvalidParameter

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_SEED = 1729
DEFAULT_SAMPLES = 32
MAX_SAMPLES = 64


def clamp_samples(samples: int) -> int:
    if samples < 1:
        raise InvalidParameter(f"need at least one sample, got {samples}")
    return min(samples, MAX_SAMPLES)


@dataclass(frozen=True)
class Domain:
    """Where a map is defined and where sample points are drawn from.

    kind "box": `bounds` holds one (low, high) pair per coordinate.
    kind "annulus": the first two coordinates range over the annulus
    `radii[0] < |(x, y)| < radii[1]` around `center`; the remaining
    coordinates use `bounds` (which then has dim - 2 entries).

    An optional `predicate` further restricts the domain (points are drawn
    by rejection). `excluded` is a human readable description of a singular
    set that the domain avoids. `simply_connected` is asserted by the user.
    """

    kind: str = "box"
    bounds: tuple[tuple[float, float], ...] = ()
    center: tuple[float, float] = (0.0, 0.0)
    radii: tuple[float, float] = (0.0, 1.0)
    simply_connected: bool = True
    excluded: str = ""
    predicate: Callable[[np.ndarray], bool] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("box", "annulus"):
            raise InvalidParameter(f"unknown domain kind {self.kind!r}")
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if any(lo >= hi for lo, hi in bounds):
            raise InvalidParameter(f"empty interval in {bounds}")
        object.__setattr__(self, "bounds", bounds)
        if self.kind == "annulus":
            inner, outer = (float(r) for r in self.radii)
            if not 0 <= inner < outer:
                raise InvalidParameter(f"bad annulus radii {self.radii}")
            object.__setattr__(self, "radii", (inner, outer))

    @classmethod
    def box(cls, *bounds: tuple[float, float], **kwargs: Any) -> "Domain":
        return cls("box", tuple(bounds), **kwargs)

    @classmethod
    def cube(cls, dim: int, half_width: float = 1.0, **kwargs: Any) -> "Domain":
        return cls("box", ((-half_width, half_width),) * dim, **kwargs)

    @property
    def dim(self) -> int:
        return len(self.bounds) + (2 if self.kind == "annulus" else 0)

    def contains(self, p: Sequence[float]) -> bool:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,):
            return False
        rest = p
        if self.kind == "annulus":
            r = math.hypot(p[0] - self.center[0], p[1] - self.center[1])
            if not self.radii[0] < r < self.radii[1]:
                return False
            rest = p[2:]
        if any(not lo <= v <= hi for v, (lo, hi) in zip(rest, self.bounds)):
            return False
        return self.predicate is None or bool(self.predicate(p))

    def _draw(self, rng: np.random.Generator) -> np.ndarray:
        rest = np.array([rng.uniform(lo, hi) for lo, hi in self.bounds])
        if self.kind == "box":
            return rest
        inner, outer = self.radii
        # uniform in area
        r = math.sqrt(rng.uniform(inner**2, outer**2))
        phi = rng.uniform(0.0, 2 * math.pi)
        head = np.array([self.center[0] + r * math.cos(phi), self.center[1] + r * math.sin(phi)])
        return np.concatenate([head, rest])

    def sample(self, n: int, seed: int = DEFAULT_SEED) -> np.ndarray:
        """n points of the domain as an (n, dim) array, reproducible from `seed`."""
        rng = np.random.default_rng(seed)
        points = []
        attempts = 0
        while len(points) < n:
            attempts += 1
            if attempts > 1000 * max(n, 1):
                raise InvalidParameter("domain predicate rejects almost every point")
            p = self._draw(rng)
            if self.contains(p):
                points.append(p)
        log.debug("drew %d points in %d attempts (seed %d)", n, attempts, seed)
        return np.array(points).reshape(n, self.dim)


def compile_matrix(
    matrix: Any, symbols: Sequence[sp.Symbol]
) -> Callable[[Sequence[float]], np.ndarray]:
    """Compile a matrix of expressions to p -> float array (constants broadcast)."""
    matrix = sp.Matrix(matrix)
    shape = matrix.shape
    compiled = sp.lambdify([tuple(symbols)], matrix, modules="numpy")

    def evaluate(p: Sequence[float]) -> np.ndarray:
        with np.errstate(all="ignore"):
            value = np.array(compiled(tuple(float(c) for c in p)), dtype=float)
        return value.reshape(shape)

    return evaluate


def relative_excess(value: np.ndarray, scale: np.ndarray | float, tol: float) -> float:
    """Largest |value| - tol * (1 + |scale|); positive means "not zero"."""
    value = np.abs(np.asarray(value, dtype=float))
    bound = tol * (1 + np.abs(np.asarray(scale, dtype=float)))
    if value.size == 0:
        return -tol
    if not np.all(np.isfinite(value)):
        return math.inf
    return float(np.max(value - bound))
