"""Built-in example data: the filiform tower, winding maps, isotropic maps,
products and the spiral-shaped partial lift.

Every builder returns library objects. `fixture_document` turns a named
catalog entry into a workspace document for the command line.
"""

import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np
import sympy as sp

from carnot_lift.algebra import (
    GradedSpace,
    StratifiedAlgebra,
    direct_product,
    make_standard,
)
from carnot_lift.contact import GroupMap
from carnot_lift.errors import InvalidParameter
from carnot_lift.extensions import CentralExtension, Cocycle, extend, trivial_extension
from carnot_lift.forms import AlgebraForm
from carnot_lift.paths import NumericMap, SymbolicCurve
from carnot_lift.sampling import Domain
from carnot_lift.serialization import (
    dump_algebra,
    dump_cocycle,
    dump_map,
)

WINDING_BOX = ((0.5, 2.0), (-1.0, 1.0))


def plane() -> StratifiedAlgebra:
    """ℝ² with basis X, Y; the first filiform algebra."""
    return make_standard("filiform", 1)


def filiform(s: int) -> StratifiedAlgebra:
    return make_standard("filiform", s)


def filiform_cocycle(s: int) -> Cocycle:
    """ρ_s = X*∧Z_s* with values in a new layer s + 1 (Z_1 reads Y)."""
    base = filiform(s)
    top = base.basis[-1]
    values = GradedSpace((f"Z{s + 1}",), (s + 1,))
    return Cocycle.from_terms(base, values, {("X", top): 1})


def filiform_extension(s: int) -> CentralExtension:
    """F^s extended by ρ_s; the extended algebra is F^(s+1)."""
    return extend(filiform(s), filiform_cocycle(s))


def filiform_tower(top: int = 5) -> list[CentralExtension]:
    """Extensions F^1 → F^2, ..., F^(top-1) → F^top."""
    if top < 2:
        raise InvalidParameter(f"a tower needs at least two floors, got {top}")
    return [filiform_extension(s) for s in range(1, top)]


def tower_scaling(s: int, k: Any) -> sp.Matrix:
    """Graded automorphism of F^s scaling X by k and fixing Y."""
    k = sp.sympify(k)
    return sp.diag(k, 1, *[k ** (j - 1) for j in range(2, s + 1)])


def tower_map(s: int, k: Any = 2, half_width: float = 1.0) -> GroupMap:
    """The scaling of F^s as a map; its lift to F^(s+1) is `tower_map(s + 1, k)`."""
    alg = filiform(s)
    return GroupMap.from_linear(
        alg, alg, tower_scaling(s, k), domain=Domain.cube(alg.dim, half_width), name=f"scale{s}"
    )


def heisenberg_base(n: int) -> StratifiedAlgebra:
    """ℝ^(2n) with the horizontal basis of the n-th Heisenberg algebra."""
    layer = make_standard("heisenberg", n).horizontal
    names = make_standard("heisenberg", n).basis
    return StratifiedAlgebra.from_brackets([names[i] for i in layer], [1] * len(layer))


def heisenberg_extension(n: int) -> CentralExtension:
    """ℝ^(2n) extended by the standard symplectic form with values in Z."""
    base = heisenberg_base(n)
    half = base.dim // 2
    terms = {(base.basis[i], base.basis[half + i]): 1 for i in range(half)}
    return extend(base, Cocycle.from_terms(base, GradedSpace(("Z",), (2,)), terms))


def winding_components(k: int) -> tuple[str, str]:
    """z ↦ z^k/|z|^(k-1), so that det Df = k away from the origin."""
    match k:
        case 1:
            return ("x", "y")
        case 2:
            return ("(x**2 - y**2)/sqrt(x**2 + y**2)", "2*x*y/sqrt(x**2 + y**2)")
        case 3:
            return ("(x**3 - 3*x*y**2)/(x**2 + y**2)", "(3*x**2*y - y**3)/(x**2 + y**2)")
    raise InvalidParameter(f"winding maps are built in for k = 1, 2, 3, got {k}")


def winding_domain(extra: int = 0) -> Domain:
    return Domain.box(*WINDING_BOX, *[(-1.0, 1.0)] * extra, excluded="origin")


def winding_map(k: int) -> GroupMap:
    alg = plane()
    return GroupMap(alg, alg, winding_components(k), winding_domain(), f"winding{k}")


def winding_lift(k: int) -> GroupMap:
    """F(x, y, z) = (f(x, y), k z) on the first Heisenberg group F^2."""
    alg = filiform(2)
    components = (*winding_components(k), f"{k}*z2")
    return GroupMap(alg, alg, components, winding_domain(1), f"winding_lift{k}")


def spiral_partial_lift(radii: tuple[float, float] = (1.0, 2.0)) -> NumericMap:
    """The lift of x ↦ x/|x| on the spiral-shaped set

        {(r cos t, r sin t, r²t/2 + s) : r in the annulus, |s| < π/2},

    given by (cos t, sin t, t/2). The sheets of the set are πr² apart
    along the fiber while the image moves by π, so no fiber map fits.
    """
    alg = filiform(2)

    def branch(p: np.ndarray) -> tuple[float, float]:
        r = math.hypot(p[0], p[1])
        theta = math.atan2(p[1], p[0])
        n = round((p[2] - r * r * theta / 2) / (math.pi * r * r))
        t = theta + 2 * math.pi * n
        return r, t

    def inside(p: np.ndarray) -> bool:
        r, t = branch(p)
        return abs(p[2] - r * r * t / 2) < math.pi / 2

    def function(p: np.ndarray) -> list[float]:
        _, t = branch(p)
        return [math.cos(t), math.sin(t), t / 2]

    domain = Domain(
        "annulus",
        ((-20.0, 20.0),),
        radii=radii,
        excluded="origin",
        predicate=inside,
    )
    return NumericMap(alg, alg, function, domain, "spiral lift")


def spiral_probes(radii: tuple[float, ...] = (1.2, 1.5, 1.8)) -> list[tuple[tuple[float, ...], tuple[float]]]:
    """Compare the spiral lift at (r, 0, 0) and at (r, 0, πr²)."""
    return [((r, 0.0, 0.0), (math.pi * r * r,)) for r in radii]


def isotropic_map(lagrangian: bool = True) -> GroupMap:
    """ℝ² → ℝ⁴ as the graph of a gradient, which is isotropic for the
    standard symplectic form; with `lagrangian=False` a map that is not."""
    target = heisenberg_base(2)
    components = ("x", "y", "2*x*y", "x**2 + y**2") if lagrangian else ("x", "y", "y", "0")
    name = "lagrangian" if lagrangian else "not_isotropic"
    return GroupMap(plane(), target, components, Domain.cube(2), name)


def product_algebras() -> dict[str, StratifiedAlgebra]:
    heisenberg = make_standard("heisenberg", 1)
    return {
        "R3": make_standard("euclidean", 3),
        "H1xR": direct_product(heisenberg, make_standard("euclidean", 1)),
        "H1xH1": direct_product(heisenberg, heisenberg),
        "H2": make_standard("heisenberg", 2),
        "J1R2": make_standard("jet", 2, 1),
        "H2xR2": direct_product(make_standard("heisenberg", 2), make_standard("euclidean", 2)),
    }


@dataclass(frozen=True)
class LiftCase:
    name: str
    f: GroupMap
    ext1: CentralExtension
    ext2: CentralExtension


def consistency_cases() -> list[LiftCase]:
    """Map and extension pairs on which every lifting criterion is run."""
    h1_over_plane = filiform_extension(1)
    f3_over_h1 = filiform_extension(2)
    f4_over_f3 = filiform_extension(3)
    h2 = heisenberg_extension(2)
    identity_plane = GroupMap.identity(plane(), domain=winding_domain(), name="identity")
    shear = GroupMap(plane(), plane(), ("x**2", "y"), winding_domain(), "squared")
    symplectic = GroupMap.from_linear(
        h2.base,
        h2.base,
        sp.Matrix([[2, 0, 0, 0], [0, 1, 0, 0], [0, 0, sp.Rational(1, 2), 0], [0, 0, 0, 1]]),
        name="symplectic",
    )
    return [
        LiftCase("identity over the plane", identity_plane, h1_over_plane, h1_over_plane),
        LiftCase("det 2 linear map", tower_map(1, 2), h1_over_plane, h1_over_plane),
        LiftCase("winding k=2", winding_map(2), h1_over_plane, h1_over_plane),
        LiftCase("winding k=3", winding_map(3), h1_over_plane, h1_over_plane),
        LiftCase("non-constant determinant", shear, h1_over_plane, h1_over_plane),
        LiftCase(
            "isotropic into R4", isotropic_map(True), trivial_extension(plane()), h2
        ),
        LiftCase(
            "not isotropic into R4", isotropic_map(False), trivial_extension(plane()), h2
        ),
        LiftCase("winding lift k=2 to F3", winding_lift(2), f3_over_h1, f3_over_h1),
        LiftCase("F2 scaling to F3", tower_map(2, 2), f3_over_h1, f3_over_h1),
        LiftCase("F3 scaling to F4", tower_map(3, 2), f4_over_f3, f4_over_f3),
        LiftCase(
            "identity of H1 to F3",
            GroupMap.identity(filiform(2), name="identity"),
            f3_over_h1,
            f3_over_h1,
        ),
        LiftCase("symplectic scaling of R4", symplectic, h2, h2),
        LiftCase(
            "R4 identity",
            GroupMap.identity(h2.base, name="identity"),
            h2,
            h2,
        ),
    ]


def stokes_cases() -> list[tuple[CentralExtension, GroupMap, AlgebraForm | None]]:
    """Disk maps u with optional perturbations ω for `stokes_check`."""
    h1 = filiform_extension(1)
    f3 = filiform_extension(2)
    disk = Domain.cube(2, 1.5)
    segment = GroupMap(plane(), filiform(2), ("x + y", "2*x + 2*y", "0"), disk, "segment")
    omega = AlgebraForm.from_terms(filiform(2), 1, {("Z2",): 1}, f3.values)
    return [
        (h1, GroupMap.identity(plane(), domain=disk), None),
        (h1, GroupMap(plane(), plane(), ("2*x", "3*y"), disk), None),
        (h1, GroupMap(plane(), plane(), ("x + x*y", "y + x**2/2"), disk), None),
        (h1, GroupMap(plane(), plane(), ("x + y**3", "y - x"), disk), None),
        (f3, segment, omega),
    ]


def unit_circle(alg: StratifiedAlgebra, radius: Any = 1) -> SymbolicCurve:
    return SymbolicCurve(
        alg, (f"{radius}*cos(2*pi*t)", f"{radius}*sin(2*pi*t)"), f"circle {radius}"
    )


# documents


def _heisenberg_document() -> dict[str, Any]:
    ext = filiform_extension(1)
    h2 = heisenberg_extension(2)
    return {
        "algebras": {"plane": dump_algebra(plane()), "R4": dump_algebra(h2.base)},
        "cocycles": {
            "area": dump_cocycle(ext.cocycle, "plane"),
            "symplectic": dump_cocycle(h2.cocycle, "R4"),
        },
        "extensions": {"H1": {"cocycle": "area"}, "H2": {"cocycle": "symplectic"}},
        "maps": {
            "identity": dump_map(GroupMap.identity(plane()), "plane", "plane"),
            "stretch": dump_map(tower_map(1, 2), "plane", "plane"),
        },
        "curves": {
            "circle": {"algebra": "plane", "kind": "symbolic", "expressions": ["cos(2*pi*t)", "sin(2*pi*t)"]},
            "square": {
                "algebra": "plane",
                "kind": "moves",
                "start": [0.0, 0.0],
                "moves": [["X", 1.0], ["Y", 1.0], ["X", -1.0], ["Y", -1.0]],
            },
        },
    }


def _tower_document(top: int = 5) -> dict[str, Any]:
    doc: dict[str, Any] = {"algebras": {}, "cocycles": {}, "extensions": {}, "maps": {}}
    for s in range(1, top + 1):
        doc["algebras"][f"F{s}"] = dump_algebra(filiform(s))
        doc["maps"][f"scale{s}"] = dump_map(tower_map(s, 2), f"F{s}", f"F{s}")
    for s in range(1, top):
        doc["cocycles"][f"rho{s}"] = dump_cocycle(filiform_cocycle(s), f"F{s}")
        doc["extensions"][f"F{s}_to_F{s + 1}"] = {"cocycle": f"rho{s}"}
    for k in (2, 3):
        doc["maps"][f"winding{k}"] = dump_map(winding_map(k), "F1", "F1")
    doc["maps"]["winding_lift2"] = dump_map(winding_lift(2), "F2", "F2")
    return doc


def _winding_document() -> dict[str, Any]:
    doc = _tower_document(3)
    for k in (2, 3):
        doc["maps"][f"winding_lift{k}"] = dump_map(winding_lift(k), "F2", "F2")
    return doc


def _isotropic_document() -> dict[str, Any]:
    h2 = heisenberg_extension(2)
    empty = trivial_extension(plane())
    return {
        "algebras": {"plane": dump_algebra(plane()), "R4": dump_algebra(h2.base)},
        "cocycles": {
            "symplectic": dump_cocycle(h2.cocycle, "R4"),
            "zero": dump_cocycle(empty.cocycle, "plane"),
        },
        "extensions": {"H2": {"cocycle": "symplectic"}, "flat": {"cocycle": "zero", "strict": False}},
        "maps": {
            "lagrangian": dump_map(isotropic_map(True), "plane", "R4"),
            "not_isotropic": dump_map(isotropic_map(False), "plane", "R4"),
        },
    }


def _products_document() -> dict[str, Any]:
    return {"algebras": {name: dump_algebra(alg) for name, alg in product_algebras().items()}}


CATALOG: dict[str, Callable[[], dict[str, Any]]] = {
    "heisenberg": _heisenberg_document,
    "filiform-tower": _tower_document,
    "winding": _winding_document,
    "isotropic": _isotropic_document,
    "products": _products_document,
}


def fixture_document(name: str) -> dict[str, Any]:
    try:
        build = CATALOG[name]
    except KeyError:
        raise InvalidParameter(f"unknown fixture {name!r}, choose one of {sorted(CATALOG)}") from None
    return build()
