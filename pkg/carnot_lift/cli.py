"""The `carnot-lift` command line.

Options are resolved in the order `defaults -> carnotrc -> env vars -> cli
opts`, the later ones winning. Every subcommand reads JSON workspaces given
with `--input` and writes canonical JSON (or CSV for trajectories) to
stdout or to `--output`.
"""

import argparse
import configparser
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Self

import numpy as np

from carnot_lift.algebra import StratifiedAlgebra, make_standard, validate_stratified
from carnot_lift.contact import is_contact, pansu_pullback
from carnot_lift.errors import (
    AlgebraMismatch,
    CarnotError,
    InvalidParameter,
    NotHorizontal,
    SchemaError,
    UnknownFamily,
)
from carnot_lift.extensions import extend
from carnot_lift.fixtures import CATALOG, fixture_document
from carnot_lift.forms import e0_basis, weight
from carnot_lift.lifting import check_lift
from carnot_lift.paths import check_horizontal, lift_horizontal_curve, loop_holonomy
from carnot_lift.sampling import DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TOL
from carnot_lift.serialization import (
    Workspace,
    canonical_json,
    dump_algebra,
    dump_extension,
    dump_form,
    load_workspace,
    trajectory_csv,
)

log = logging.getLogger(__name__)

# list of all available sub-commands and cli aliases
SUBCOMMANDS = {
    "validate": "validate",
    "rumin_basis": "rumin-basis",
    "extend": "extend",
    "check_lift": "check-lift",
    "pansu_pullback": "pansu-pullback",
    "path_lift": "path-lift",
    "fixtures": "fixtures",
}

# positional arguments per subcommand: (dest, nargs, help)
ARGUMENTS: dict[str, tuple[tuple[str, str | None, str], ...]] = {
    SUBCOMMANDS["validate"]: (("names", "*", "Only check entries with these names"),),
    SUBCOMMANDS["rumin_basis"]: (
        ("algebra", None, "Algebra name, or a standard family like heisenberg:1"),
        ("degree", None, "Form degree"),
    ),
    SUBCOMMANDS["extend"]: (
        ("algebra", None, "Base algebra name"),
        ("cocycle", None, "Cocycle name"),
    ),
    SUBCOMMANDS["check_lift"]: (
        ("map", None, "Map name"),
        ("ext1", None, "Extension of the source"),
        ("ext2", None, "Extension of the target"),
    ),
    SUBCOMMANDS["pansu_pullback"]: (
        ("map", None, "Map name"),
        ("form", None, "Form name on the target"),
    ),
    SUBCOMMANDS["path_lift"]: (
        ("extension", None, "Extension name"),
        ("curve", None, "Horizontal curve on its base"),
    ),
    SUBCOMMANDS["fixtures"]: (("fixture", None, f"One of {', '.join(CATALOG)}"),),
}

SUBCOMMAND_HELP = {
    SUBCOMMANDS["validate"]: "Validate algebras, cocycles, extensions, maps and curves",
    SUBCOMMANDS["rumin_basis"]: "List an orthogonal basis of the Rumin forms E0 of a degree",
    SUBCOMMANDS["extend"]: "Build the central extension of an algebra by a cocycle",
    SUBCOMMANDS["check_lift"]: "Decide whether a contact map lifts through two extensions",
    SUBCOMMANDS["pansu_pullback"]: "Pull a form back by the Pansu differential of a map",
    SUBCOMMANDS["path_lift"]: "Lift a horizontal curve and write its trajectory as CSV",
    SUBCOMMANDS["fixtures"]: "Write a built-in example workspace",
}


def main(cfg: "CarnotConf | None" = None, io: "_IO | None" = None) -> int:
    """Runs the cli interface.

    First sets up the correct options, with overrides in the following order:
    `defaults -> carnotrc -> env vars -> cli opts`
    with cli options having the highest priority.

    Then dispatches to the appropriate subcommand handler.

    Returns the status code as int: 0 for success (a negative verdict is a
    success), 1 for a failed validation or a computation error, 2 for bad
    input or configuration.
    """
    if not cfg:
        try:
            cfg = build_config()
        except (ValueError, configparser.Error) as e:
            sys.stderr.write(f"Invalid configuration: {e}\n")
            return 2
    if not io:
        io = _IO(quiet=cfg.quiet)
    logging.basicConfig(
        level=logging.INFO if cfg.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    handler = _HANDLERS.get(cfg.command)
    if handler is None:
        io.err(f"Unknown command: {cfg.command}\n")
        return 1
    try:
        return handler(cfg, io)
    except SchemaError as e:
        io.err(f"Input error: {e}\n")
        return 2
    except CarnotError as e:
        io.err(f"{type(e).__name__}: {e}\n")
        return 1


def _workspace(cfg: "CarnotConf", required: bool = True) -> Workspace:
    if not cfg.input:
        if required:
            raise SchemaError("", "Please provide at least one workspace with --input")
        return Workspace()
    return load_workspace(list(cfg.input))


def _provenance(cfg: "CarnotConf") -> dict[str, Any]:
    return {"tol": cfg.tol, "seed": cfg.seed, "samples": cfg.samples}


def _emit(cfg: "CarnotConf", io: "_IO", text: str) -> None:
    """Write a result to `--output` or stdout."""
    if cfg.output is None:
        io.result(text)
        return
    _ensure_parent_dir(cfg.output)
    cfg.output.write_text(text)
    io.out(f"Wrote {cfg.output}\n")


def _resolve_algebra(ws: Workspace, name: str) -> StratifiedAlgebra:
    """A workspace algebra, or `family:p1,p2` for a standard one."""
    if name in ws.algebras or name in ws.extensions:
        return ws.algebra(name)
    family, sep, params = name.partition(":")
    if not sep:
        raise SchemaError("", f"unknown algebra {name!r}")
    try:
        numbers = [int(p) for p in params.split(",") if p]
    except ValueError:
        raise SchemaError("", f"bad parameters in {name!r}") from None
    try:
        return make_standard(family, *numbers)
    except (UnknownFamily, InvalidParameter) as e:
        raise SchemaError("", str(e)) from None


def _algebra_name(ws: Workspace, alg: StratifiedAlgebra) -> str:
    for name, candidate in ws.algebras.items():
        if candidate == alg:
            return name
    for name, ext in ws.extensions.items():
        if ext.algebra == alg:
            return f"{name}_algebra"
    return "source"


def _cmd_validate(cfg: "CarnotConf", io: "_IO") -> int:
    """Validate every entry of the workspace (or the named ones).

    Algebras must be stratified, cocycles closed, extensions Carnot, maps
    contact and curves horizontal. Returns 1 if anything fails.
    """
    ws = _workspace(cfg)
    wanted = set(cfg.targets)

    def picked(name: str) -> bool:
        return not wanted or name in wanted

    report: dict[str, Any] = {"provenance": _provenance(cfg)}
    ok = True
    algebras = {}
    for name, alg in ws.algebras.items():
        if picked(name):
            result = validate_stratified(alg)
            ok &= result.ok
            algebras[name] = {
                "ok": result.ok,
                "issues": [{"kind": i.kind, "message": i.message} for i in result.issues],
            }
    cocycles = {}
    for name, cocycle in ws.cocycles.items():
        if picked(name):
            closed = cocycle.is_closed()
            defects = cocycle.grading_defects()
            ok &= closed and not defects
            cocycles[name] = {"closed": closed, "grading_defects": len(defects)}
    extensions = {}
    for name, ext in ws.extensions.items():
        if picked(name):
            ok &= ext.report.ok
            extensions[name] = ext.report.as_dict()
    maps = {}
    for name, f in ws.maps.items():
        if picked(name):
            contact = is_contact(f, samples=cfg.samples, seed=cfg.seed, tol=cfg.tol)
            ok &= contact.contact
            maps[name] = {
                "verdict": contact.verdict,
                "exact": contact.exact,
                "witness": None if contact.witness is None else list(contact.witness),
            }
    curves = {}
    for name, curve in ws.curves.items():
        if picked(name):
            try:
                check_horizontal(curve, cfg.tol)
                curves[name] = {"horizontal": True}
            except NotHorizontal as e:
                ok = False
                curves[name] = {"horizontal": False, "reason": str(e)}
    report |= {
        "algebras": algebras,
        "cocycles": cocycles,
        "extensions": extensions,
        "maps": maps,
        "curves": curves,
        "ok": ok,
    }
    _emit(cfg, io, canonical_json(report, cfg.pretty))
    return 0 if ok else 1


def _cmd_rumin_basis(cfg: "CarnotConf", io: "_IO") -> int:
    """List the E0 basis forms of the requested degree with their weights."""
    name, degree = cfg.targets
    try:
        k = int(degree)
    except ValueError:
        raise SchemaError("", f"degree must be an integer, got {degree!r}") from None
    ws = _workspace(cfg, required=False)
    alg = _resolve_algebra(ws, name)
    if not 0 <= k <= alg.dim:
        raise SchemaError("", f"degree {k} outside 0..{alg.dim}")
    basis = e0_basis(alg, k)
    listing = {
        "algebra": name,
        "degree": k,
        "dimension": len(basis),
        "basis": [dump_form(form, name) | {"weight": int(weight(form))} for form in basis],
    }
    _emit(cfg, io, canonical_json(listing, cfg.pretty))
    return 0


def _cmd_extend(cfg: "CarnotConf", io: "_IO") -> int:
    """Extend an algebra by a cocycle and write the result as a workspace."""
    alg_name, cocycle_name = cfg.targets
    ws = _workspace(cfg)
    alg = ws.algebra(alg_name, "/algebras")
    cocycle = ws.get("cocycles", cocycle_name, "/cocycles")
    if cocycle.base != alg:
        raise AlgebraMismatch(f"cocycle {cocycle_name!r} is not based on {alg_name!r}")
    ext = extend(alg, cocycle, strict=not cfg.lenient)
    document = dump_extension(ext, cfg.name, alg_name, cocycle_name)
    _emit(cfg, io, canonical_json(document, cfg.pretty))
    if not ext.report.ok:
        io.err(f"Extension fails: {ext.report.as_dict()}\n")
        return 1
    return 0


def _cmd_check_lift(cfg: "CarnotConf", io: "_IO") -> int:
    """Run every lifting criterion and print the verdicts.

    Returns 1 only when the criteria contradict each other.
    """
    map_name, first, second = cfg.targets
    ws = _workspace(cfg)
    f = ws.get("maps", map_name, "/maps")
    ext1 = ws.get("extensions", first, "/extensions")
    ext2 = ws.get("extensions", second, "/extensions")
    verdict = check_lift(f, ext1, ext2, samples=cfg.samples, seed=cfg.seed, tol=cfg.tol)
    document = verdict.as_dict() | {"map": map_name, "ext1": first, "ext2": second}
    _emit(cfg, io, canonical_json(document, cfg.pretty))
    return 0 if verdict.consistent else 1


def _cmd_pansu_pullback(cfg: "CarnotConf", io: "_IO") -> int:
    map_name, form_name = cfg.targets
    ws = _workspace(cfg)
    f = ws.get("maps", map_name, "/maps")
    form = ws.get("forms", form_name, "/forms")
    pulled = pansu_pullback(f, form, samples=cfg.samples, seed=cfg.seed, tol=cfg.tol)
    source = _algebra_name(ws, f.source)
    document = {
        "algebras": {source: dump_algebra(f.source)},
        "forms": {f"{form_name}_by_{map_name}": dump_form(pulled, source)},
        "reports": {"provenance": _provenance(cfg)},
    }
    _emit(cfg, io, canonical_json(document, cfg.pretty))
    return 0


def _cmd_path_lift(cfg: "CarnotConf", io: "_IO") -> int:
    """Lift a horizontal curve and write `steps` samples as CSV.

    Closed curves also get their holonomy in the header.
    """
    ext_name, curve_name = cfg.targets
    ws = _workspace(cfg)
    ext = ws.get("extensions", ext_name, "/extensions")
    curve = ws.get("curves", curve_name, "/curves")
    basepoint = cfg.basepoint
    if basepoint is None:
        basepoint = ext.join(curve.position(0.0), np.zeros(ext.values.dim))
    lifted = lift_horizontal_curve(ext, curve, basepoint, tol=cfg.tol)
    times = np.linspace(0.0, 1.0, cfg.steps)
    header = [f"# extension={ext_name} curve={curve_name} tol={cfg.tol!r}"]
    if np.allclose(curve.position(0.0), curve.position(1.0), rtol=0, atol=1e-8):
        holonomy = loop_holonomy(ext, curve, tol=cfg.tol)
        header.append("# holonomy=" + " ".join(f"{v:.17g}" for v in holonomy))
    text = "\n".join(header) + "\n" + trajectory_csv(ext.algebra.basis, times, lifted.trajectory(times))
    _emit(cfg, io, text)
    return 0


def _cmd_fixtures(cfg: "CarnotConf", io: "_IO") -> int:
    (name,) = cfg.targets
    try:
        document = fixture_document(name)
    except InvalidParameter as e:
        io.err(f"{e}\n")
        return 2
    _emit(cfg, io, canonical_json(document, cfg.pretty))
    return 0


_HANDLERS: dict[str, Callable[["CarnotConf", "_IO"], int]] = {
    SUBCOMMANDS["validate"]: _cmd_validate,
    SUBCOMMANDS["rumin_basis"]: _cmd_rumin_basis,
    SUBCOMMANDS["extend"]: _cmd_extend,
    SUBCOMMANDS["check_lift"]: _cmd_check_lift,
    SUBCOMMANDS["pansu_pullback"]: _cmd_pansu_pullback,
    SUBCOMMANDS["path_lift"]: _cmd_path_lift,
    SUBCOMMANDS["fixtures"]: _cmd_fixtures,
}


@dataclass()
class Opt:
    """Assembled metadata for a single configuration option."""

    cli: tuple[str, ...] | None
    env: str | None
    rc: str | None
    default: Any = None
    metavar: str | None = None
    cast: type | Callable = str
    help_text: str = ""
    is_flag: bool = False
    repeat: bool = False
    cli_subcommand: str | None = None  # which cli subcommand to add to as option


def _expand_path(p: Path | str) -> Path:
    return Path(os.path.expandvars(p)).expanduser()


def _ensure_parent_dir(file: Path) -> None:
    if not file.parent.exists():
        file.parent.mkdir(parents=True, exist_ok=True)


def _determine_default_rc() -> Path:
    if os.getenv("XDG_CONFIG_HOME"):
        return _expand_path("$XDG_CONFIG_HOME/carnot-lift/carnotrc")
    return _expand_path("~/.config/carnot-lift/carnotrc")


def _strtobool(val: str) -> bool:
    """Convert a string representation of truth.

    True values are 'y', 'yes', 't', 'true', 'on', and '1'; false values are
    'n', 'no', 'f', 'false', 'off', and '0'.
    Raises ValueError if 'val' is anything else.
    """
    val = val.lower()
    if val in ("y", "yes", "t", "true", "on", "1"):
        return True
    elif val in ("n", "no", "f", "false", "off", "0"):
        return False
    else:
        raise ValueError(f"Invalid boolean value {val}")


def _float_list(val: str) -> tuple[float, ...]:
    """Parse "0, 1.5, -2" into floats."""
    return tuple(float(v) for v in val.split(",") if v.strip())


OPTIONS: dict[str, Opt] = {
    "input": Opt(
        ("-i", "--input"),
        None,
        None,
        default=(),
        metavar="FILE",
        cast=Path,
        help_text="Workspace JSON file to load (repeatable)",
        repeat=True,
    ),
    "output": Opt(
        ("-o", "--output"),
        None,
        None,
        default=None,
        metavar="FILE",
        cast=Path,
        help_text="Write the result to FILE instead of stdout",
    ),
    "tol": Opt(
        ("--tol",),
        "CARNOT_TOL",
        "check.tol",
        default=DEFAULT_TOL,
        metavar="TOL",
        cast=float,
        help_text="Relative tolerance of numeric checks",
    ),
    "seed": Opt(
        ("--seed",),
        "CARNOT_SEED",
        "check.seed",
        default=DEFAULT_SEED,
        metavar="N",
        cast=int,
        help_text="Seed for sample points",
    ),
    "samples": Opt(
        ("--samples",),
        "CARNOT_SAMPLES",
        "check.samples",
        default=DEFAULT_SAMPLES,
        metavar="N",
        cast=int,
        help_text="Number of sample points for numeric identity tests",
    ),
    "pretty": Opt(
        ("--pretty",),
        "CARNOT_PRETTY",
        "output.pretty",
        default=False,
        cast=_strtobool,
        help_text="Indent JSON output",
        is_flag=True,
    ),
    "quiet": Opt(
        ("-q", "--quiet"),
        "CARNOT_QUIET",
        "output.quiet",
        default=False,
        cast=_strtobool,
        help_text="Silence any verbosely displayed information",
        is_flag=True,
    ),
    "verbose": Opt(
        ("-v", "--verbose"),
        "CARNOT_VERBOSE",
        "output.verbose",
        default=False,
        cast=_strtobool,
        help_text="Log solver and sampling details",
        is_flag=True,
    ),
    "rc": Opt(
        ("--rc",),
        "CARNOT_RC",
        None,  # the rc file cannot point to itself
        default=_determine_default_rc(),
        metavar="FILE",
        cast=Path,
        help_text="Location of the carnotrc config file",
    ),
    "name": Opt(
        ("--name",),
        None,
        None,
        default="extension",
        metavar="NAME",
        help_text="Name of the emitted extension",
        cli_subcommand=SUBCOMMANDS["extend"],
    ),
    "lenient": Opt(
        ("--lenient",),
        None,
        "extend.lenient",
        default=False,
        cast=_strtobool,
        help_text="Keep extensions whose first layer does not generate the cocycle values",
        is_flag=True,
        cli_subcommand=SUBCOMMANDS["extend"],
    ),
    "basepoint": Opt(
        ("--basepoint",),
        None,
        None,
        default=None,
        metavar="X,Y,...",
        cast=_float_list,
        help_text="Start of the lift in the extended group (default: fiber value 0)",
        cli_subcommand=SUBCOMMANDS["path_lift"],
    ),
    "steps": Opt(
        ("--steps",),
        "CARNOT_STEPS",
        "path.steps",
        default=101,
        metavar="N",
        cast=int,
        help_text="Number of trajectory samples",
        cli_subcommand=SUBCOMMANDS["path_lift"],
    ),
}


@dataclass()
class CarnotConf:
    """carnot-lift configuration

    Contains all the options that affect a command line run.
    """

    command: str = SUBCOMMANDS["validate"]
    """The subcommand to execute."""
    targets: tuple[str, ...] = ()
    """Positional arguments of the subcommand (entry names, degree, fixture)."""
    input: tuple[Path, ...] = field(default_factory=tuple)
    """Workspace files, merged in order."""
    output: Path | None = OPTIONS["output"].default
    """Where results go; stdout if unset."""
    tol: float = OPTIONS["tol"].default
    """Relative tolerance for numeric verdicts."""
    seed: int = OPTIONS["seed"].default
    """Seed of the sample point generator."""
    samples: int = OPTIONS["samples"].default
    """Sample points per numeric identity test."""
    pretty: bool = OPTIONS["pretty"].default
    """Indent JSON output."""
    quiet: bool = OPTIONS["quiet"].default
    """If set only results and errors are printed."""
    verbose: bool = OPTIONS["verbose"].default
    """Log at INFO level."""
    rc: Path = OPTIONS["rc"].default
    """The path to the carnotrc file."""
    name: str = OPTIONS["name"].default
    """Name of the extension written by `extend`."""
    lenient: bool = OPTIONS["lenient"].default
    """Let `extend` keep non-Carnot extensions."""
    basepoint: tuple[float, ...] | None = OPTIONS["basepoint"].default
    """Start point of `path-lift`."""
    steps: int = OPTIONS["steps"].default
    """Number of trajectory rows written by `path-lift`."""

    def __post_init__(self):
        self.rc = _expand_path(self.rc)
        self.input = tuple(_expand_path(p) for p in self.input)
        if self.output is not None:
            self.output = _expand_path(self.output)
        self.targets = tuple(str(t) for t in self.targets)
        if not self.tol > 0:
            raise ValueError(f"tolerance must be positive, got {self.tol}")
        if self.samples < 1:
            raise ValueError(f"sample count must be positive, got {self.samples}")
        if self.seed < 0:
            raise ValueError(f"seed must not be negative, got {self.seed}")
        if self.steps < 2:
            raise ValueError(f"need at least two trajectory steps, got {self.steps}")

    def __or__(self, other: Any, /) -> Self:
        return self.__class__(**asdict(self) | asdict(other))

    @classmethod
    def from_dict(cls, d: dict) -> Self:
        """Generate a CarnotConf from a dictionary of option values."""
        return cls(**d)


def build_config() -> CarnotConf:
    """Return final configuration object."""
    defaults = {k: opt.default for k, opt in OPTIONS.items()}
    env = parse_env()
    cli = parse_cli()

    rc_path = _expand_path(cli.get("rc") or env.get("rc") or defaults["rc"])
    defaults["rc"] = rc_path
    rc = parse_rc(rc_path) if rc_path.exists() else {}

    merged = defaults | rc | env | cli  # later wins
    return CarnotConf.from_dict({k: v for k, v in merged.items() if v is not None})


def _add_opt_to_parser(parser: argparse.ArgumentParser, key: str, opt: Opt) -> None:
    """Add a single OPTIONS entry to an argparse parser."""
    if opt.cli is None:
        return
    if opt.is_flag:
        parser.add_argument(
            *opt.cli,
            dest=key,
            help=opt.help_text,
            default=None,
            action="store_true",
        )
    else:
        parser.add_argument(
            *opt.cli,
            dest=key,
            metavar=opt.metavar,
            help=opt.help_text,
            type=opt.cast or str,
            default=None,
            action="append" if opt.repeat else "store",
        )


def parse_cli() -> dict:
    """Parse cli options and arguments.

    Returns them as a simple dict object.
    """
    shared_keys = [k for k, v in OPTIONS.items() if v.cli_subcommand is None]

    # Parent parser for options shared across all subcommands
    shared_parser = argparse.ArgumentParser(add_help=False)
    for key in shared_keys:
        _add_opt_to_parser(shared_parser, key, OPTIONS[key])
    shared_parser.add_argument(
        "--json",
        dest="pretty",
        action="store_false",
        default=None,
        help="Compact JSON output (default)",
    )

    parser = argparse.ArgumentParser(
        prog="carnot-lift",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        description="Contact lifts through central extensions of Carnot groups.",
        epilog="""Load workspaces of algebras, cocycles, extensions, maps,
forms and curves with --input and run a subcommand on named
entries. Start from `carnot-lift fixtures heisenberg`.
""",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command, arguments in ARGUMENTS.items():
        sub = subparsers.add_parser(
            command, help=SUBCOMMAND_HELP[command], parents=[shared_parser]
        )
        for dest, nargs, help_text in arguments:
            sub.add_argument(dest, nargs=nargs, help=help_text)
        for key, opt in OPTIONS.items():
            if opt.cli_subcommand == command:
                _add_opt_to_parser(sub, key, opt)

    args = parser.parse_args()
    cli_vals = {k: v for k, v in vars(args).items() if v is not None}
    targets: list[str] = []
    for dest, _, _ in ARGUMENTS[cli_vals["command"]]:
        value = cli_vals.pop(dest, [])
        targets.extend(value if isinstance(value, list) else [value])
    cli_vals["targets"] = tuple(targets)
    if "input" in cli_vals:
        cli_vals["input"] = tuple(cli_vals["input"])
    return cli_vals


def parse_env() -> dict[str, Any]:
    """Parse environment variable options.

    Returns them as a simple dict object.
    """
    out: dict[str, Any] = {}
    for key, opt in OPTIONS.items():
        if opt.env and (val := os.getenv(opt.env)) is not None:
            out[key] = opt.cast(val)
    return out


def parse_rc(rc_path: Path) -> dict:
    """Parse carnotrc options.

    Returns them as a simple dict object. Keys use dot notation without a
    section header, e.g. `check.tol=1e-10`.
    """
    cfg = configparser.ConfigParser(allow_no_value=True, inline_comment_prefixes=("#",))
    with rc_path.expanduser().open() as fr:
        cfg.read_string("[GENERAL]\n" + fr.read())

    out: dict[str, Any] = {}
    for key, opt in OPTIONS.items():
        if opt.rc and cfg.has_option("GENERAL", opt.rc):
            raw = cfg.get("GENERAL", opt.rc)
            out[key] = opt.cast(raw)
    return out


class _IO:
    def __init__(self, quiet: bool = False) -> None:
        self.quiet = quiet

    def out(self, text: str) -> None:
        if not self.quiet:
            sys.stdout.write(text)

    def result(self, text: str) -> None:
        """Results are printed even when quiet."""
        sys.stdout.write(text)

    def err(self, text: str) -> None:
        sys.stderr.write(text)


if __name__ == "__main__":
    sys.exit(main())
