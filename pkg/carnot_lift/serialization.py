"""JSON workspaces: schema, loading with reference resolution, canonical dumps.

A workspace file has optional top-level maps `algebras`, `cocycles`,
`extensions`, `maps`, `forms` and `curves`, each keyed by a name that the
other entries refer to. Where an algebra is expected, the name of an
extension stands for its extended algebra.

Schema violations and unresolved references raise `SchemaError` carrying a
JSON pointer into the offending file.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Annotated, Any, Literal

import numpy as np
import sympy as sp
from pydantic import (
    AfterValidator,
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    model_validator,
)

from carnot_lift.algebra import (
    SCALARS,
    GradedSpace,
    StratifiedAlgebra,
    as_rational,
    make_standard,
    rational_string,
)
from carnot_lift.contact import GroupMap
from carnot_lift.errors import (
    CarnotError,
    DimensionMismatch,
    InvalidParameter,
    SchemaError,
    UnknownFamily,
    UnsupportedExpression,
)
from carnot_lift.expressions import parse_expression, to_sexpr
from carnot_lift.extensions import CentralExtension, Cocycle, extend
from carnot_lift.fieldforms import FieldForm
from carnot_lift.forms import FormBase
from carnot_lift.paths import Curve, MoveCurve, PolylineCurve, SymbolicCurve
from carnot_lift.sampling import Domain

log = logging.getLogger(__name__)


def _check_rational(value: str | int) -> str | int:
    try:
        as_rational(value)
    except (CarnotError, ValueError, TypeError, sp.SympifyError):
        raise ValueError(f"not a rational number: {value!r}") from None
    return value


Rational = Annotated[str | int, AfterValidator(_check_rational)]
Expression = str | int


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class BracketModel(_Model):
    left: str
    right: str
    value: dict[str, Rational]


class SpaceModel(_Model):
    basis: list[str]
    layers: list[int]
    gram: list[list[Rational]] | None = None


class AlgebraModel(_Model):
    """Either a standard family with parameters or an explicit bracket table."""

    family: str | None = None
    params: list[int] = []
    basis: list[str] | None = None
    layers: list[int] | None = None
    brackets: list[BracketModel] = []
    gram: list[list[Rational]] | None = None
    tags: list[str] = []

    @model_validator(mode="after")
    def _family_or_table(self):
        if (self.family is None) == (self.basis is None):
            raise ValueError("give exactly one of 'family' or 'basis'")
        if self.basis is not None and self.layers is None:
            raise ValueError("'layers' is required with 'basis'")
        return self


class TermModel(_Model):
    monomial: list[str]
    value: Expression | dict[str, Expression]


class CocycleModel(_Model):
    base: str
    values: SpaceModel
    terms: list[TermModel] = []


class ExtensionModel(_Model):
    cocycle: str
    strict: bool = True
    gram: list[list[Rational]] | None = None


class DomainModel(_Model):
    kind: Literal["box", "annulus"] = "box"
    bounds: list[tuple[float, float]] = []
    center: tuple[float, float] = (0.0, 0.0)
    radii: tuple[float, float] = (0.0, 1.0)
    excluded: str = ""


class MapModel(_Model):
    source: str
    target: str
    components: list[Expression]
    domain: DomainModel | None = None
    simply_connected: bool = True


class FormModel(_Model):
    algebra: str
    degree: int = Field(ge=0)
    values: SpaceModel | None = None
    terms: list[TermModel] = []


class CurveModel(_Model):
    algebra: str
    kind: Literal["symbolic", "polyline", "moves"]
    expressions: list[Expression] | None = None
    points: list[list[float]] | None = None
    start: list[float] | None = None
    moves: list[tuple[str, float]] | None = None

    @model_validator(mode="after")
    def _kind_fields(self):
        needed = {
            "symbolic": ("expressions",),
            "polyline": ("points",),
            "moves": ("start", "moves"),
        }[self.kind]
        for name in needed:
            if getattr(self, name) is None:
                raise ValueError(f"curves of kind {self.kind!r} need {name!r}")
        return self


class WorkspaceModel(_Model):
    algebras: dict[str, AlgebraModel] = {}
    cocycles: dict[str, CocycleModel] = {}
    extensions: dict[str, ExtensionModel] = {}
    maps: dict[str, MapModel] = {}
    forms: dict[str, FormModel] = {}
    curves: dict[str, CurveModel] = {}
    reports: dict[str, Any] = {}


SECTIONS = ("algebras", "cocycles", "extensions", "maps", "forms", "curves")
INPUT_ERRORS = (UnsupportedExpression, UnknownFamily, InvalidParameter, DimensionMismatch)


def _pointer(loc: tuple[Any, ...]) -> str:
    return "/" + "/".join(str(part).replace("~", "~0").replace("/", "~1") for part in loc)


def parse_document(text: str, source: str = "<input>") -> WorkspaceModel:
    """Parse and schema-check one JSON document."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError("", f"{source}: malformed JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
    try:
        return WorkspaceModel.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise SchemaError(_pointer(first["loc"]), f"{source}: {first['msg']}") from None


def read_documents(paths: list[Path]) -> WorkspaceModel:
    """Parse several files and merge their sections; names must be unique."""
    merged: dict[str, dict[str, Any]] = {s: {} for s in (*SECTIONS, "reports")}
    for path in paths:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise SchemaError("", f"{path}: cannot read file: {e.strerror}") from None
        model = parse_document(text, str(path))
        for section in merged:
            for name, entry in getattr(model, section).items():
                if name in merged[section] and section != "reports":
                    raise SchemaError(f"/{section}/{name}", f"{path}: duplicate name {name!r}")
                merged[section][name] = entry
    return WorkspaceModel(**merged)


@dataclass
class Workspace:
    """Resolved objects of a workspace, by section and name."""

    algebras: dict[str, StratifiedAlgebra] = field(default_factory=dict)
    cocycles: dict[str, Cocycle] = field(default_factory=dict)
    extensions: dict[str, CentralExtension] = field(default_factory=dict)
    maps: dict[str, GroupMap] = field(default_factory=dict)
    forms: dict[str, FieldForm] = field(default_factory=dict)
    curves: dict[str, Curve] = field(default_factory=dict)

    def algebra(self, name: str, pointer: str = "") -> StratifiedAlgebra:
        if name in self.algebras:
            return self.algebras[name]
        if name in self.extensions:
            return self.extensions[name].algebra
        raise SchemaError(pointer, f"unknown algebra {name!r}")

    def get(self, section: str, name: str, pointer: str = "") -> Any:
        try:
            return getattr(self, section)[name]
        except KeyError:
            raise SchemaError(pointer, f"unknown {section[:-1]} {name!r}") from None


def _space(model: SpaceModel) -> GradedSpace:
    return GradedSpace(tuple(model.basis), tuple(model.layers), model.gram)


def _algebra(model: AlgebraModel) -> StratifiedAlgebra:
    if model.family is not None:
        return make_standard(model.family, *model.params)
    brackets = {(b.left, b.right): dict(b.value) for b in model.brackets}
    return StratifiedAlgebra.from_brackets(
        model.basis or [], model.layers or [], brackets, model.gram, model.tags
    )


def _terms(terms: list[TermModel]) -> dict[tuple[str, ...], Any]:
    return {tuple(t.monomial): t.value for t in terms}


def _domain(model: DomainModel | None, dim: int, simply_connected: bool) -> Domain:
    if model is None:
        return Domain.cube(dim, simply_connected=simply_connected)
    return Domain(
        model.kind,
        tuple(model.bounds),
        model.center,
        model.radii,
        simply_connected,
        model.excluded,
    )


def _curve(alg: StratifiedAlgebra, model: CurveModel, name: str) -> Curve:
    match model.kind:
        case "symbolic":
            return SymbolicCurve(alg, tuple(model.expressions or ()), name)
        case "polyline":
            return PolylineCurve(alg, np.array(model.points, dtype=float), name)
        case _:
            moves = tuple((alg.index(i), s) for i, s in model.moves or ())
            return MoveCurve(alg, np.array(model.start, dtype=float), moves, name)


def build_workspace(model: WorkspaceModel) -> Workspace:
    """Resolve references section by section.

    Unknown names and unparsable expressions become `SchemaError`s; the
    mathematical errors of the constructors (for example `NotClosed`) pass
    through unchanged.
    """
    ws = Workspace()
    for name, entry in model.algebras.items():
        with _input_errors_at(f"/algebras/{name}"):
            ws.algebras[name] = _algebra(entry)
    for name, entry in model.cocycles.items():
        pointer = f"/cocycles/{name}"
        base = ws.algebra(entry.base, pointer + "/base")
        with _input_errors_at(pointer + "/terms"):
            ws.cocycles[name] = Cocycle.from_terms(base, _space(entry.values), _terms(entry.terms))
    for name, entry in model.extensions.items():
        cocycle = ws.get("cocycles", entry.cocycle, f"/extensions/{name}/cocycle")
        ws.extensions[name] = extend(cocycle.base, cocycle, entry.strict, entry.gram)
    for name, entry in model.maps.items():
        pointer = f"/maps/{name}"
        source = ws.algebra(entry.source, pointer + "/source")
        target = ws.algebra(entry.target, pointer + "/target")
        components = []
        for i, text in enumerate(entry.components):
            with _input_errors_at(f"{pointer}/components/{i}"):
                components.append(parse_expression(text, source.coordinates))
        with _input_errors_at(pointer):
            domain = _domain(entry.domain, source.dim, entry.simply_connected)
            ws.maps[name] = GroupMap(source, target, tuple(components), domain, name)
    for name, entry in model.forms.items():
        pointer = f"/forms/{name}"
        alg = ws.algebra(entry.algebra, pointer + "/algebra")
        values = _space(entry.values) if entry.values else SCALARS
        with _input_errors_at(pointer + "/terms"):
            ws.forms[name] = FieldForm.from_terms(alg, entry.degree, _terms(entry.terms), values)
    for name, entry in model.curves.items():
        pointer = f"/curves/{name}"
        alg = ws.algebra(entry.algebra, pointer + "/algebra")
        with _input_errors_at(pointer):
            ws.curves[name] = _curve(alg, entry, name)
    log.info(
        "workspace: %s",
        {s: len(getattr(ws, s)) for s in SECTIONS if getattr(ws, s)},
    )
    return ws


class _input_errors_at:
    """Re-raise malformed input inside the block as a SchemaError at `pointer`."""

    def __init__(self, pointer: str) -> None:
        self.pointer = pointer

    def __enter__(self) -> None:
        return None

    def __exit__(self, kind: Any, error: Any, traceback: Any) -> bool:
        if isinstance(error, INPUT_ERRORS):
            raise SchemaError(self.pointer, str(error)) from None
        return False


def load_workspace(paths: list[Path]) -> Workspace:
    return build_workspace(read_documents(paths))


# dumping


def dump_space(space: GradedSpace) -> dict[str, Any]:
    out: dict[str, Any] = {"basis": list(space.basis), "layers": list(space.layers)}
    if space.gram != sp.eye(space.dim):
        out["gram"] = [[rational_string(c) for c in row] for row in space.gram.tolist()]
    return out


def dump_algebra(alg: StratifiedAlgebra) -> dict[str, Any]:
    brackets = []
    for j in range(alg.dim):
        for k in range(j + 1, alg.dim):
            value = {
                alg.basis[i]: rational_string(c)
                for i, c in enumerate(alg.constants[j][k])
                if c != 0
            }
            if value:
                brackets.append({"left": alg.basis[j], "right": alg.basis[k], "value": value})
    out = dump_space(alg.space) | {"brackets": brackets}
    if alg.tags:
        out["tags"] = sorted(alg.tags)
    return out


def _dump_terms(form: FormBase) -> list[dict[str, Any]]:
    terms = []
    for names, values in form.terms().items():
        value = {
            form.values.basis[j]: to_sexpr(sp.nsimplify(v) if isinstance(v, sp.Float) else v)
            for j, v in enumerate(values)
            if v != 0
        }
        terms.append({"monomial": list(names), "value": value})
    return terms


def dump_form(form: FormBase, algebra: str) -> dict[str, Any]:
    return {
        "algebra": algebra,
        "degree": form.degree,
        "values": dump_space(form.values),
        "terms": _dump_terms(form),
    }


def dump_cocycle(cocycle: Cocycle, base: str) -> dict[str, Any]:
    return {
        "base": base,
        "values": dump_space(cocycle.values),
        "terms": _dump_terms(cocycle.form),
    }


def dump_extension(
    ext: CentralExtension, name: str, base: str, cocycle: str
) -> dict[str, Any]:
    """A workspace document holding the base, the cocycle and the extension."""
    extension: dict[str, Any] = {"cocycle": cocycle, "strict": ext.report.carnot}
    if ext.algebra.gram != sp.eye(ext.algebra.dim) and ext.report.metric:
        extension["gram"] = [[rational_string(c) for c in row] for row in ext.algebra.gram.tolist()]
    return {
        "algebras": {base: dump_algebra(ext.base), f"{name}_algebra": dump_algebra(ext.algebra)},
        "cocycles": {cocycle: dump_cocycle(ext.cocycle, base)},
        "extensions": {name: extension},
        "reports": {name: ext.report.as_dict()},
    }


def dump_domain(domain: Domain) -> dict[str, Any]:
    out: dict[str, Any] = {"kind": domain.kind, "bounds": [list(b) for b in domain.bounds]}
    if domain.kind == "annulus":
        out |= {"center": list(domain.center), "radii": list(domain.radii)}
    if domain.excluded:
        out["excluded"] = domain.excluded
    return out


def dump_map(f: GroupMap, source: str, target: str) -> dict[str, Any]:
    return {
        "source": source,
        "target": target,
        "components": [to_sexpr(c) for c in f.components],
        "domain": dump_domain(f.domain),
        "simply_connected": f.simply_connected,
    }


def canonical_json(document: Any, pretty: bool = False) -> str:
    """Sorted keys; rationals are already strings, floats use repr."""
    return json.dumps(document, sort_keys=True, indent=2 if pretty else None, default=_fallback) + "\n"


def _fallback(value: Any) -> Any:
    if isinstance(value, sp.Rational):
        return rational_string(value)
    if isinstance(value, sp.Float):
        return float(value)
    if isinstance(value, (sp.Basic,)):
        return to_sexpr(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, (set, frozenset, tuple)):
        return sorted(value) if isinstance(value, (set, frozenset)) else list(value)
    raise TypeError(f"cannot serialise {type(value).__name__}")


def trajectory_csv(basis: tuple[str, ...], times: Any, points: Any) -> str:
    """Sampled trajectory as CSV with 17 significant digits."""
    lines = [",".join(("t", *basis))]
    for t, row in zip(times, points):
        lines.append(",".join(f"{v:.17g}" for v in (t, *row)))
    return "\n".join(lines) + "\n"
