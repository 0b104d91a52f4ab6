"""Command-line front end: config parsing, run orchestration, artifacts.

This is the only module that touches the file system or the process
environment.  Runs are driven by a TOML config merged with command-line
flags; every run writes a manifest that echoes the full effective
configuration, including all defaults, so that re-running the manifest
reproduces the outputs byte for byte.

Exit codes: 0 success, 2 configuration, 3 admissibility, 4 convergence,
5 failed verification checks.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import os
import sys
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import __version__, diagnostics, radial, solver, spectral, symmfunc
from .errors import (AdmissibilityError, ConfigError, CurvPlateauError,
                     DomainError)
from .fields import (AffineField, ConstantField, EuclideanDistanceField,
                     HyperbolicDistanceField, NodalField)
from .geometry import AmbientModel, GraphSurface, stability_operator
from .grids import DiskGrid, RectangleGrid
from .symmfunc import CurvatureFunctionSpec

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ADMISSIBILITY = 3
EXIT_CONVERGENCE = 4
EXIT_CHECK = 5

# Lossless, diff-friendly float serialization for all CSV artifacts.
FLOAT_FMT = "%.17g"

COMMANDS = ("check-axioms", "eval", "solve", "continue", "mu-inf", "verify")

_CHECK_NAMES = ("boundary_slope", "superharmonicity", "uniqueness",
                "stability")


# ---------------------------------------------------------------------------
# configuration schema

@dataclass
class RunConfig:
    """Validated, fully defaulted description of one run."""

    command: str
    seed: int = 0
    quiet: bool = False
    out: str = "out"
    sections: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> dict:
        return self.sections[name]


def _sections_for(command: str) -> tuple:
    if command == "check-axioms":
        return ("curvature_function", "axioms")
    if command == "mu-inf":
        return ("curvature_function", "mu_inf")
    if command == "eval":
        return ("curvature_function", "model", "domain", "surface")
    if command == "solve":
        return ("curvature_function", "model", "domain", "kappa",
                "boundary", "seed_surface", "solver")
    if command == "continue":
        return ("curvature_function", "model", "domain", "boundary",
                "seed_surface", "solver", "continuation", "checks")
    if command == "verify":
        return ("curvature_function", "model", "domain", "kappa",
                "boundary", "seed_surface", "solver", "checks")
    raise ValueError(command)


def _check_int(raw, key, problems, minimum=None, maximum=None):
    if not isinstance(raw, int) or isinstance(raw, bool):
        problems.append(f"{key}: expected an integer, got {raw!r}")
        return None
    if minimum is not None and raw < minimum:
        problems.append(f"{key}: must be >= {minimum}, got {raw}")
        return None
    if maximum is not None and raw > maximum:
        problems.append(f"{key}: must be <= {maximum}, got {raw}")
        return None
    return raw


def _check_float(raw, key, problems, positive=False, nonnegative=False):
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        problems.append(f"{key}: expected a number, got {raw!r}")
        return None
    val = float(raw)
    if not np.isfinite(val):
        problems.append(f"{key}: must be finite, got {raw!r}")
        return None
    if positive and val <= 0.0:
        problems.append(f"{key}: must be positive, got {raw}")
        return None
    if nonnegative and val < 0.0:
        problems.append(f"{key}: must be non-negative, got {raw}")
        return None
    return val


def _check_str(raw, key, problems, choices=None):
    if not isinstance(raw, str):
        problems.append(f"{key}: expected a string, got {raw!r}")
        return None
    if choices is not None and raw not in choices:
        problems.append(f"{key}: expected one of {sorted(choices)}, "
                        f"got {raw!r}")
        return None
    return raw


def _check_float_list(raw, key, problems, length=None):
    if not isinstance(raw, list) or any(
            isinstance(v, bool) or not isinstance(v, (int, float))
            for v in raw):
        problems.append(f"{key}: expected a list of numbers, got {raw!r}")
        return None
    if length is not None and len(raw) != length:
        problems.append(f"{key}: expected {length} entries, got {len(raw)}")
        return None
    return [float(v) for v in raw]


def _reject_unknown(section: dict, name: str, allowed, problems):
    for key in sorted(set(section) - set(allowed)):
        problems.append(f"{name}.{key}: unknown key")


def _validate_curvature_function(raw: dict, problems: list) -> dict:
    out = {}
    _reject_unknown(raw, "curvature_function", ("kind", "n", "k"), problems)
    kind = _check_str(raw.get("kind"), "curvature_function.kind", problems,
                      choices=("gauss", "quotient"))
    out["kind"] = kind
    n = _check_int(raw.get("n"), "curvature_function.n", problems, minimum=1)
    out["n"] = n
    if kind == "quotient":
        k = raw.get("k")
        if k is None:
            problems.append("curvature_function.k: required for quotient "
                            "(1 <= k < n)")
        else:
            k = _check_int(k, "curvature_function.k", problems, minimum=1)
            if k is not None and n is not None and not 1 <= k < n:
                problems.append("curvature_function.k: quotient indices "
                                f"require 1 <= k < n, got k={k}, n={n}")
                k = None
        out["k"] = k
    elif kind is not None and "k" in raw:
        problems.append("curvature_function.k: only valid for quotient")
    return out


def _validate_model(raw: dict, problems: list) -> dict:
    _reject_unknown(raw, "model", ("kind",), problems)
    kind = _check_str(raw.get("kind"), "model.kind", problems,
                      choices=("euclidean", "hyperbolic"))
    return {"kind": kind}


def _validate_domain(raw: dict, problems: list) -> dict:
    out = {}
    kind = _check_str(raw.get("kind"), "domain.kind", problems,
                      choices=("disk", "rectangle", "radial"))
    out["kind"] = kind
    if kind == "disk":
        _reject_unknown(raw, "domain",
                        ("kind", "radius", "resolution", "center"), problems)
        out["radius"] = _check_float(raw.get("radius", 1.0), "domain.radius",
                                     problems, positive=True)
        out["resolution"] = _check_int(raw.get("resolution", 81),
                                       "domain.resolution", problems,
                                       minimum=7)
        out["center"] = _check_float_list(raw.get("center", [0.0, 0.0]),
                                          "domain.center", problems, length=2)
    elif kind == "rectangle":
        _reject_unknown(raw, "domain",
                        ("kind", "x0", "x1", "y0", "y1", "nx", "ny"),
                        problems)
        for key in ("x0", "x1", "y0", "y1"):
            if key not in raw:
                problems.append(f"domain.{key}: required for rectangles")
                out[key] = None
            else:
                out[key] = _check_float(raw[key], f"domain.{key}", problems)
        for key in ("nx", "ny"):
            out[key] = _check_int(raw.get(key), f"domain.{key}", problems,
                                  minimum=3)
        if None not in (out.get("x0"), out.get("x1")) \
                and out["x1"] <= out["x0"]:
            problems.append("domain.x1: must exceed domain.x0")
        if None not in (out.get("y0"), out.get("y1")) \
                and out["y1"] <= out["y0"]:
            problems.append("domain.y1: must exceed domain.y0")
    elif kind == "radial":
        _reject_unknown(raw, "domain", ("kind", "radius", "count"), problems)
        out["radius"] = _check_float(raw.get("radius", 1.0), "domain.radius",
                                     problems, positive=True)
        out["count"] = _check_int(raw.get("count", 801), "domain.count",
                                  problems, minimum=5)
    return out


def _validate_kappa(raw: dict, problems: list) -> dict:
    out = {}
    kind = _check_str(raw.get("kind"), "kappa.kind", problems,
                      choices=("constant", "affine", "file"))
    out["kind"] = kind
    if kind == "constant":
        _reject_unknown(raw, "kappa", ("kind", "value"), problems)
        if "value" not in raw:
            problems.append("kappa.value: required for constant "
                            "prescriptions")
            out["value"] = None
        else:
            value = _check_float(raw["value"], "kappa.value", problems)
            if value is not None and value <= 0.0:
                problems.append("kappa.value: curvature prescriptions are "
                                f"strictly positive, got {value}")
                value = None
            out["value"] = value
    elif kind == "affine":
        _reject_unknown(raw, "kappa", ("kind", "c0", "cx", "cy", "ch"),
                        problems)
        if "c0" not in raw:
            problems.append("kappa.c0: required for affine prescriptions")
            out["c0"] = None
        else:
            out["c0"] = _check_float(raw["c0"], "kappa.c0", problems)
        for key in ("cx", "cy", "ch"):
            out[key] = _check_float(raw.get(key, 0.0), f"kappa.{key}",
                                    problems)
    elif kind == "file":
        _reject_unknown(raw, "kappa", ("kind", "path"), problems)
        out["path"] = _check_str(raw.get("path"), "kappa.path", problems)
    return out


def _validate_boundary(raw: dict, problems: list) -> dict:
    out = {}
    kind = _check_str(raw.get("kind"), "boundary.kind", problems,
                      choices=("zero", "constant", "file"))
    out["kind"] = kind
    if kind == "zero":
        _reject_unknown(raw, "boundary", ("kind",), problems)
        out["value"] = 0.0
    elif kind == "constant":
        _reject_unknown(raw, "boundary", ("kind", "value"), problems)
        if "value" not in raw:
            problems.append("boundary.value: required for constant data")
            out["value"] = None
        else:
            out["value"] = _check_float(raw["value"], "boundary.value",
                                        problems, nonnegative=True)
    elif kind == "file":
        _reject_unknown(raw, "boundary", ("kind", "path"), problems)
        out["path"] = _check_str(raw.get("path"), "boundary.path", problems)
    return out


def _validate_surface(raw: dict, problems: list) -> dict:
    out = {}
    kind = _check_str(raw.get("kind"), "surface.kind", problems,
                      choices=("cap", "file"))
    out["kind"] = kind
    if kind == "cap":
        _reject_unknown(raw, "surface", ("kind", "kappa", "boundary_height"),
                        problems)
        out["kappa"] = _check_float(raw.get("kappa"), "surface.kappa",
                                    problems, positive=True)
        out["boundary_height"] = _check_float(
            raw.get("boundary_height", 0.0), "surface.boundary_height",
            problems, nonnegative=True)
    elif kind == "file":
        _reject_unknown(raw, "surface", ("kind", "path", "boundary_height"),
                        problems)
        out["path"] = _check_str(raw.get("path"), "surface.path", problems)
        out["boundary_height"] = _check_float(
            raw.get("boundary_height", 0.0), "surface.boundary_height",
            problems, nonnegative=True)
    return out


def _validate_seed_surface(raw: dict, problems: list) -> dict:
    out = {}
    kind = _check_str(raw.get("kind", "cap"), "seed_surface.kind", problems,
                      choices=("cap", "file"))
    out["kind"] = kind
    if kind == "cap":
        _reject_unknown(raw, "seed_surface", ("kind", "kappa"), problems)
        if "kappa" in raw:
            out["kappa"] = _check_float(raw["kappa"], "seed_surface.kappa",
                                        problems, positive=True)
        else:
            out["kappa"] = None  # filled from the prescription later
    elif kind == "file":
        _reject_unknown(raw, "seed_surface", ("kind", "path"), problems)
        out["path"] = _check_str(raw.get("path"), "seed_surface.path",
                                 problems)
    return out


def _validate_solver(raw: dict, problems: list) -> dict:
    _reject_unknown(raw, "solver", ("max_iterations", "tolerance"), problems)
    return {
        "max_iterations": _check_int(raw.get("max_iterations", 30),
                                     "solver.max_iterations", problems,
                                     minimum=1),
        "tolerance": _check_float(raw.get("tolerance", 1.0e-11),
                                  "solver.tolerance", problems,
                                  positive=True),
    }


def _validate_continuation(raw: dict, problems: list) -> dict:
    _reject_unknown(raw, "continuation",
                    ("kappa0", "kappa1", "steps", "barrier_pad"), problems)
    out = {}
    for key in ("kappa0", "kappa1"):
        if key not in raw:
            problems.append(f"continuation.{key}: required")
            out[key] = None
        else:
            out[key] = _check_float(raw[key], f"continuation.{key}",
                                    problems, positive=True)
    out["steps"] = _check_int(raw.get("steps", 4), "continuation.steps",
                              problems, minimum=1)
    out["barrier_pad"] = _check_float(raw.get("barrier_pad", 0.05),
                                      "continuation.barrier_pad", problems,
                                      nonnegative=True)
    return out


def _validate_axioms(raw: dict, problems: list) -> dict:
    _reject_unknown(raw, "axioms", ("samples",), problems)
    return {"samples": _check_int(raw.get("samples", 1000), "axioms.samples",
                                  problems, minimum=1)}


def _validate_mu_inf(raw: dict, problems: list) -> dict:
    _reject_unknown(raw, "mu_inf", ("base_count",), problems)
    return {"base_count": _check_int(raw.get("base_count", 8),
                                     "mu_inf.base_count", problems,
                                     minimum=1)}


def _validate_checks(raw: dict, problems: list, model_kind) -> dict:
    allowed = ("run", "slope_eps_factors", "slope_rel_tol", "probe_point",
               "slack_coeff", "pos_tol")
    _reject_unknown(raw, "checks", allowed, problems)
    out = {}
    if "run" in raw:
        run = raw["run"]
        if not isinstance(run, list) or any(not isinstance(v, str)
                                            for v in run):
            problems.append(f"checks.run: expected a list of names, "
                            f"got {run!r}")
            run = []
        else:
            for name in run:
                if name not in _CHECK_NAMES:
                    problems.append(f"checks.run: unknown check {name!r}; "
                                    f"valid names are {list(_CHECK_NAMES)}")
            run = [n for n in run if n in _CHECK_NAMES]
    elif model_kind == "hyperbolic":
        run = list(_CHECK_NAMES)
    else:
        run = ["uniqueness", "stability"]
    out["run"] = run
    factors = _check_float_list(
        raw.get("slope_eps_factors", [4.0, 2.0, 1.0]),
        "checks.slope_eps_factors", problems)
    if factors is not None and (len(set(factors)) < 2
                                or min(factors) <= 0.0):
        problems.append("checks.slope_eps_factors: need at least two "
                        "distinct positive factors for extrapolation")
        factors = None
    out["slope_eps_factors"] = factors
    out["slope_rel_tol"] = _check_float(raw.get("slope_rel_tol", 0.02),
                                        "checks.slope_rel_tol", problems,
                                        positive=True)
    out["probe_point"] = _check_float_list(
        raw.get("probe_point", [6.0, 0.0, 0.5]), "checks.probe_point",
        problems, length=3)
    out["slack_coeff"] = _check_float(
        raw.get("slack_coeff", diagnostics.SUPERHARMONIC_SLACK),
        "checks.slack_coeff", problems, nonnegative=True)
    out["pos_tol"] = _check_float(raw.get("pos_tol", 1.0e-8),
                                  "checks.pos_tol", problems,
                                  nonnegative=True)
    return out


_SECTION_VALIDATORS = {
    "curvature_function": _validate_curvature_function,
    "model": _validate_model,
    "domain": _validate_domain,
    "kappa": _validate_kappa,
    "boundary": _validate_boundary,
    "surface": _validate_surface,
    "seed_surface": _validate_seed_surface,
    "solver": _validate_solver,
    "continuation": _validate_continuation,
    "axioms": _validate_axioms,
    "mu_inf": _validate_mu_inf,
}


def _cross_validate(cfg: RunConfig, problems: list) -> None:
    sections = cfg.sections
    cf = sections.get("curvature_function", {})
    model = sections.get("model", {}).get("kind")
    domain = sections.get("domain", {})
    planar = domain.get("kind") in ("disk", "rectangle")
    if planar and cf.get("n") not in (None, 2):
        problems.append("curvature_function.n: planar grids carry exactly 2 "
                        f"principal curvatures, got n={cf['n']}")
    boundary = sections.get("boundary")
    if boundary is not None and model == "hyperbolic":
        value = boundary.get("value")
        if value is not None and value <= 0.0:
            problems.append("boundary.value: half-space graphs need a "
                            "strictly positive boundary height")
    if boundary is not None and boundary.get("kind") == "file" \
            and domain.get("kind") != "rectangle":
        problems.append("boundary.kind: file data binds to lattice boundary "
                        "nodes, which only rectangle grids expose")
    surface = sections.get("surface")
    if surface is not None and surface.get("kind") == "cap" \
            and domain.get("kind") == "rectangle":
        problems.append("surface.kind: cap profiles evaluate on disk or "
                        "radial domains")
    if cfg.command in ("solve", "verify"):
        kappa = sections.get("kappa", {})
        if kappa.get("kind") == "constant" and model == "hyperbolic":
            value = kappa.get("value")
            if value is not None and value >= 1.0 \
                    and domain.get("kind") != "radial":
                problems.append("kappa.value: hyperbolic graph prescriptions "
                                "must stay below 1")
    seed_surface = sections.get("seed_surface")
    if seed_surface is not None and seed_surface.get("kind") == "cap" \
            and domain.get("kind") == "rectangle":
        problems.append("seed_surface.kind: cap seeds need a disk domain")
    checks = sections.get("checks")
    if checks is not None and "boundary_slope" in checks.get("run", []):
        if model != "hyperbolic" or domain.get("kind") != "disk":
            problems.append("checks.run: boundary_slope applies to "
                            "hyperbolic disk runs only")
        if cfg.command in ("solve", "verify") \
                and sections.get("kappa", {}).get("kind") != "constant":
            problems.append("checks.run: boundary_slope needs a constant "
                            "prescription for its target law")
    if cfg.command == "continue":
        cont = sections.get("continuation", {})
        if domain.get("kind") != "disk":
            problems.append("domain.kind: continuation runs need a disk "
                            "domain for their barrier caps")
        if model == "hyperbolic":
            for key in ("kappa0", "kappa1"):
                value = cont.get(key)
                if value is not None and not 0.0 < value < 1.0:
                    problems.append(f"continuation.{key}: hyperbolic "
                                    "prescriptions lie in (0, 1), got "
                                    f"{value}")
            pad = cont.get("barrier_pad")
            if pad is not None and None not in (cont.get("kappa0"),
                                                cont.get("kappa1")):
                lo = min(cont["kappa0"], cont["kappa1"]) - pad
                hi = max(cont["kappa0"], cont["kappa1"]) + pad
                if lo <= 0.0 or hi >= 1.0:
                    problems.append("continuation.barrier_pad: padded "
                                    "barrier curvatures must stay in (0, 1)")


def parse_config(text: str, *, command: str | None = None,
                 params: list | None = None,
                 overrides: dict | None = None) -> RunConfig:
    """Parse and validate a TOML config, collecting every problem found."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"TOML syntax error: {exc}"]) from exc
    problems: list = []

    command = command or raw.get("command")
    if command is None:
        raise ConfigError(["command: required (flag or config key)"])
    if command not in COMMANDS:
        raise ConfigError([f"command: expected one of {list(COMMANDS)}, "
                           f"got {command!r}"])

    if params:
        raw.setdefault("curvature_function", {})
        merged = _params_to_curvature(params, problems)
        if merged is not None:
            raw["curvature_function"] = merged

    overrides = overrides or {}
    seed = overrides.get("seed", raw.get("seed", 0))
    seed = _check_int(seed, "seed", problems, minimum=0,
                      maximum=2 ** 64 - 1)
    quiet = overrides.get("quiet", raw.get("quiet", False))
    if not isinstance(quiet, bool):
        problems.append(f"quiet: expected a boolean, got {quiet!r}")
        quiet = False
    out_dir = overrides.get("out", raw.get("out", "out"))
    out_dir = _check_str(out_dir, "out", problems)

    wanted = _sections_for(command)
    top_allowed = {"command", "seed", "quiet", "out", "version", *wanted}
    for key in sorted(set(raw) - top_allowed):
        problems.append(f"{key}: unknown key for command {command}")
    version = raw.get("version")
    if version is not None and not isinstance(version, str):
        problems.append(f"version: expected a string, got {version!r}")

    cfg = RunConfig(command=command, seed=seed or 0, quiet=quiet,
                    out=out_dir or "out")
    model_kind = None
    for name in wanted:
        section_raw = raw.get(name, {})
        if not isinstance(section_raw, dict):
            problems.append(f"{name}: expected a table, got {section_raw!r}")
            section_raw = {}
        if name == "checks":
            cfg.sections[name] = _validate_checks(section_raw, problems,
                                                  model_kind)
        else:
            cfg.sections[name] = _SECTION_VALIDATORS[name](section_raw,
                                                           problems)
        if name == "model":
            model_kind = cfg.sections[name].get("kind")
    _cross_validate(cfg, problems)
    if problems:
        raise ConfigError(problems)
    return cfg


def _params_to_curvature(params: list, problems: list) -> dict | None:
    """Positional `<kind> <n> [k]` arguments as a curvature section."""
    if len(params) < 2:
        problems.append("positional arguments: expected <kind> <n> [k]")
        return None
    section: dict = {"kind": params[0]}
    try:
        section["n"] = int(params[1])
        if len(params) > 2:
            section["k"] = int(params[2])
    except ValueError:
        problems.append("positional arguments: n and k must be integers, "
                        f"got {params[1:]!r}")
        return None
    if len(params) > 3:
        problems.append("positional arguments: at most <kind> <n> <k>")
    return section


# ---------------------------------------------------------------------------
# manifest and CSV emission

def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {value!r}")


def manifest_text(cfg: RunConfig) -> str:
    """Full effective configuration as TOML, defaults included."""
    lines = [f'command = "{cfg.command}"',
             f"out = {_toml_value(cfg.out)}",
             f"quiet = {_toml_value(cfg.quiet)}",
             f"seed = {cfg.seed}",
             f'version = "{__version__}"']
    for name in sorted(cfg.sections):
        lines.append("")
        lines.append(f"[{name}]")
        for key in sorted(cfg.sections[name]):
            value = cfg.sections[name][key]
            if value is None:
                continue
            lines.append(f"{key} = {_toml_value(value)}")
    return "\n".join(lines) + "\n"


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    return FLOAT_FMT % float(value)


def write_csv(path: str, header: list, rows: list) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_format_cell(v) for v in row) for row in rows)
    _write_text(path, "\n".join(lines) + "\n")


def _snapshot_rows(surface: GraphSurface, spec: CurvatureFunctionSpec):
    jet = surface.jet()
    values = jet.curvature(spec)
    pts = surface.grid.interior_points
    lam = jet.eigenvalues
    return [(pts[i, 0], pts[i, 1], surface.u[i], lam[i, -1], lam[i, 0],
             values[i]) for i in range(pts.shape[0])]


SNAPSHOT_HEADER = ["x", "y", "u", "lambda_min", "lambda_max", "K"]
REPORT_HEADER = ["check", "status", "margin"]
PROFILE_HEADER = ["rho", "u", "du", "lambda_rad", "lambda_ang"]


# ---------------------------------------------------------------------------
# shared construction helpers

def build_spec(cfg: RunConfig) -> CurvatureFunctionSpec:
    cf = cfg["curvature_function"]
    if cf["kind"] == "gauss":
        return CurvatureFunctionSpec.gauss(cf["n"])
    return CurvatureFunctionSpec.quotient(cf["n"], cf["k"])


def build_model(cfg: RunConfig) -> AmbientModel:
    if cfg["model"]["kind"] == "euclidean":
        return AmbientModel.euclidean()
    return AmbientModel.hyperbolic()


def build_grid(cfg: RunConfig):
    dom = cfg["domain"]
    if dom["kind"] == "disk":
        return DiskGrid(dom["radius"], dom["resolution"],
                        center=tuple(dom["center"]))
    if dom["kind"] == "rectangle":
        return RectangleGrid(dom["x0"], dom["x1"], dom["y0"], dom["y1"],
                             dom["nx"], dom["ny"])
    raise ConfigError(["domain.kind: no planar grid for radial domains"])


def _load_column(path: str, expected: int, key: str) -> np.ndarray:
    try:
        values = np.loadtxt(path, dtype=float, ndmin=1)
    except OSError as exc:
        raise ConfigError([f"{key}: cannot read {path!r} ({exc})"]) from exc
    except ValueError as exc:
        raise ConfigError([f"{key}: {path!r} is not a single numeric "
                           f"column ({exc})"]) from exc
    if values.ndim != 1 or values.size != expected:
        raise ConfigError([f"{key}: expected {expected} values in {path!r}, "
                           f"got shape {values.shape}"])
    return values


def build_kappa(cfg: RunConfig, grid=None):
    kap = cfg["kappa"]
    if kap["kind"] == "constant":
        return ConstantField(kap["value"])
    if kap["kind"] == "affine":
        return AffineField(kap["c0"], kap["cx"], kap["cy"], kap["ch"])
    if grid is None:
        raise ConfigError(["kappa.kind: file prescriptions need a planar "
                           "grid"])
    values = _load_column(kap["path"], grid.interior_count, "kappa.path")
    if np.any(values <= 0.0):
        raise ConfigError(["kappa.path: curvature prescriptions are "
                           "strictly positive"])
    return NodalField(values)


def build_boundary(cfg: RunConfig, grid):
    bnd = cfg["boundary"]
    if bnd["kind"] in ("zero", "constant"):
        return float(bnd["value"])
    values = _load_column(bnd["path"], grid.boundary_points.shape[0],
                          "boundary.path")
    table = {tuple(p): v for p, v in zip(map(tuple, grid.boundary_points),
                                         values)}

    # Lattice boundary nodes are reproduced exactly when the operators
    # evaluate the data, so float-keyed lookup is safe here.
    def lookup(x, y):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        ys = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.array([table[(xi, yi)] for xi, yi in zip(xs, ys)])
        return out if np.ndim(x) else float(out[0])
    return lookup


def _cap_profile(model: AmbientModel, radius: float, kappa: float,
                 height: float):
    if model.kind == "euclidean":
        return radial.euclidean_cap(radius, kappa, height)
    return radial.equidistant_cap(radius, kappa, height)


def build_seed_surface(cfg: RunConfig, model, grid, kappa_field,
                       boundary) -> GraphSurface:
    seed = cfg["seed_surface"]
    if seed["kind"] == "file":
        u = _load_column(seed["path"], grid.interior_count,
                         "seed_surface.path")
        return GraphSurface(model=model, grid=grid, u=u, boundary=boundary)
    kappa0 = seed["kappa"]
    if kappa0 is None:
        center = getattr(grid, "center", (0.0, 0.0))
        height = boundary if np.isscalar(boundary) else 0.0
        try:
            kappa0 = float(np.asarray(kappa_field.value(center[0], center[1],
                                                        height)))
        except TypeError:
            raise ConfigError(["seed_surface.kappa: required when the "
                               "prescription is not pointwise evaluable"])
        if not 0.0 < kappa0 < (1.0 if model.kind == "hyperbolic"
                               else np.inf):
            raise ConfigError(["seed_surface.kappa: cannot derive a valid "
                               "cap curvature from the prescription; set "
                               "it explicitly"])
    if not np.isscalar(boundary):
        raise ConfigError(["seed_surface.kind: cap seeds need constant "
                           "boundary data"])
    cap = _cap_profile(model, grid.radius, kappa0, float(boundary))
    surf = cap.surface(grid)
    return GraphSurface(model=model, grid=grid, u=surf.u, boundary=boundary)


# ---------------------------------------------------------------------------
# verification batteries

def _max_workers(task_count: int) -> int:
    raw = os.environ.get("CURVPLATEAU_THREADS", "1")
    try:
        cap = max(1, int(raw))
    except ValueError:
        cap = 1
    return max(1, min(task_count, cap))


def _run_concurrently(tasks: dict) -> list:
    """Run no-arg callables, each returning report rows; merge by name."""
    rows: list = []
    if not tasks:
        return rows
    workers = _max_workers(len(tasks))
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {name: pool.submit(fn) for name, fn in tasks.items()}
        for name in futures:
            rows.extend(futures[name].result())
    rows.sort(key=lambda row: row[0])
    return rows


def _slope_rows(cfg, spec, model, grid, kappa_value, boundary_height):
    factors = sorted(set(cfg["checks"]["slope_eps_factors"]), reverse=True)
    # Each height level is solved at two resolutions so the check can
    # cancel the second-order bias of the one-sided rim estimates before
    # extrapolating the boundary height to zero.
    res = grid.resolution
    grids = [grid, DiskGrid(grid.radius, res + (res - 1) // 2,
                            center=tuple(grid.center))]
    levels = []
    for factor in factors:
        eps = factor * boundary_height
        pair = []
        for level_grid in grids:
            cap = _cap_profile(model, level_grid.radius, kappa_value, eps)
            seed = cap.surface(level_grid)
            result = solver.newton_solve(
                spec, seed, ConstantField(kappa_value),
                config=_newton_config(cfg))
            if not result.ok:
                return [("boundary_slope", "inconclusive", float("nan"))]
            pair.append(result.surface)
        levels.append((eps, pair))
    report = diagnostics.boundary_slope_check(
        levels, kappa_value, rel_tol=cfg["checks"]["slope_rel_tol"])
    return [(report.name, report.status, report.margin)]


def _superharmonicity_rows(cfg, spec, model, surface, kappa_field, jet):
    base = tuple(cfg["checks"]["probe_point"])
    if model.kind == "hyperbolic":
        phi = HyperbolicDistanceField(base=base)
    else:
        phi = EuclideanDistanceField(base=base)
    report = diagnostics.superharmonicity_check(
        surface, spec, kappa_field, phi,
        slack_coeff=cfg["checks"]["slack_coeff"], jet=jet)
    return [(report.name, report.status, report.margin)]


def _uniqueness_rows(spec, surface, jet):
    report = diagnostics.uniqueness_criterion_check(surface, spec, jet=jet)
    return [(report.name, report.status, report.margin)]


def _stability_rows(cfg, spec, surface, kappa_field):
    report = stability_operator(surface, spec, kappa_field,
                                pos_tol=cfg["checks"]["pos_tol"])
    ok = report.non_degenerate and bool(report.inverse_positive)
    return [("stability", "pass" if ok else "fail", report.probe_min)]


def _check_battery(cfg, spec, model, grid, surface, kappa_field,
                   kappa_value, boundary_height) -> list:
    jet = surface.jet()
    tasks = {}
    run = cfg["checks"]["run"]
    if "boundary_slope" in run and kappa_value is not None \
            and boundary_height is not None and boundary_height > 0.0:
        tasks["boundary_slope"] = lambda: _slope_rows(
            cfg, spec, model, grid, kappa_value, boundary_height)
    if "superharmonicity" in run:
        tasks["superharmonicity"] = lambda: _superharmonicity_rows(
            cfg, spec, model, surface, kappa_field, jet)
    if "uniqueness" in run:
        tasks["uniqueness"] = lambda: _uniqueness_rows(spec, surface, jet)
    if "stability" in run:
        tasks["stability"] = lambda: _stability_rows(cfg, spec, surface,
                                                     kappa_field)
    return _run_concurrently(tasks)


def _newton_config(cfg: RunConfig) -> solver.NewtonConfig:
    sv = cfg["solver"]
    return solver.NewtonConfig(max_iter=sv["max_iterations"],
                               tol=sv["tolerance"])


# ---------------------------------------------------------------------------
# commands

def _emit(cfg: RunConfig, name: str, text_or_rows, header=None) -> str:
    path = os.path.join(cfg.out, name)
    if header is None:
        _write_text(path, text_or_rows)
    else:
        write_csv(path, header, text_or_rows)
    return path


def _announce_rows(cfg: RunConfig, rows: list) -> None:
    if cfg.quiet:
        return
    for name, status, margin in rows:
        print(f"{name}: {status} (margin {margin:.6g})")


def _merged_axiom_rows(report) -> list:
    """Seven rows: six pointwise axioms plus one merged limit row."""
    rows, limit_rows = [], []
    for result in report.results:
        if result.name.startswith("limit"):
            limit_rows.append(result)
        else:
            rows.append((result.name, "pass" if result.passed else "fail",
                         result.margin))
    passed = all(r.passed for r in limit_rows)
    margin = min((r.margin for r in limit_rows), default=float("nan"))
    rows.append(("limit", "pass" if passed else "fail", margin))
    return rows


def cmd_check_axioms(cfg: RunConfig) -> int:
    spec = build_spec(cfg)
    report = symmfunc.check_axioms(spec, cfg["curvature_function"]["n"],
                                   sample_count=cfg["axioms"]["samples"],
                                   rng_seed=cfg.seed)
    rows = _merged_axiom_rows(report)
    _emit(cfg, "report.csv", rows, REPORT_HEADER)
    _announce_rows(cfg, rows)
    return EXIT_OK if all(r[1] == "pass" for r in rows) else EXIT_CHECK


def cmd_mu_inf(cfg: RunConfig) -> int:
    spec = build_spec(cfg)
    estimate = spectral.mu_infinity_estimate(
        spec, cfg["curvature_function"]["n"],
        base_count=cfg["mu_inf"]["base_count"], rng_seed=cfg.seed)
    if estimate.divergent:
        rows = [("mu_infinity", "divergent", estimate.tail_growth)]
    else:
        rows = [("mu_infinity", "finite", estimate.estimate)]
    _emit(cfg, "report.csv", rows, REPORT_HEADER)
    _announce_rows(cfg, rows)
    return EXIT_OK


def _radial_profile_rows(solution_or_cap, model, n, radius, count):
    rho = np.linspace(0.0, radius, count)
    if isinstance(solution_or_cap, radial.CapProfile):
        u = solution_or_cap.heights(rho)
        du = solution_or_cap.slope(rho)
    else:
        u, du = solution_or_cap.profile(rho)
    lam = radial.radial_eigenvalues(solution_or_cap, model, n, rho)
    return [(rho[i], u[i], du[i], lam[i, 0], lam[i, 1])
            for i in range(rho.size)]


def cmd_eval(cfg: RunConfig) -> int:
    spec = build_spec(cfg)
    model = build_model(cfg)
    surf_cfg = cfg["surface"]
    dom = cfg["domain"]
    if dom["kind"] == "radial":
        if surf_cfg["kind"] != "cap":
            raise ConfigError(["surface.kind: radial domains evaluate cap "
                               "profiles only"])
        cap = _cap_profile(model, dom["radius"], surf_cfg["kappa"],
                           surf_cfg["boundary_height"])
        rows = _radial_profile_rows(cap, model,
                                    cfg["curvature_function"]["n"],
                                    dom["radius"], dom["count"])
        _emit(cfg, "profile.csv", rows, PROFILE_HEADER)
        _emit(cfg, "report.csv", [], REPORT_HEADER)
        return EXIT_OK
    grid = build_grid(cfg)
    if surf_cfg["kind"] == "cap":
        cap = _cap_profile(model, grid.radius, surf_cfg["kappa"],
                           surf_cfg["boundary_height"])
        surface = cap.surface(grid)
    else:
        u = _load_column(surf_cfg["path"], grid.interior_count,
                         "surface.path")
        surface = GraphSurface(model=model, grid=grid, u=u,
                               boundary=surf_cfg["boundary_height"])
    rows = _snapshot_rows(surface, spec)
    _emit(cfg, "snapshot.csv", rows, SNAPSHOT_HEADER)
    _emit(cfg, "report.csv", [], REPORT_HEADER)
    return EXIT_OK


def _solve_planar(cfg, spec, model):
    grid = build_grid(cfg)
    kappa_field = build_kappa(cfg, grid)
    boundary = build_boundary(cfg, grid)
    seed = build_seed_surface(cfg, model, grid, kappa_field, boundary)
    result = solver.newton_solve(spec, seed, kappa_field,
                                 config=_newton_config(cfg))
    return grid, kappa_field, boundary, result


def cmd_solve(cfg: RunConfig) -> int:
    spec = build_spec(cfg)
    model = build_model(cfg)
    if cfg["domain"]["kind"] == "radial":
        return _solve_radial(cfg, spec, model)
    grid, kappa_field, boundary, result = _solve_planar(cfg, spec, model)
    rows = [("newton", "pass" if result.ok else "fail",
             result.residual_norm)]
    _emit(cfg, "report.csv", rows, REPORT_HEADER)
    _announce_rows(cfg, rows)
    if not result.ok:
        return EXIT_CONVERGENCE
    _emit(cfg, "snapshot.csv", _snapshot_rows(result.surface, spec),
          SNAPSHOT_HEADER)
    return EXIT_OK


def _solve_radial(cfg, spec, model) -> int:
    dom = cfg["domain"]
    kappa_field = build_kappa(cfg)
    bnd = cfg["boundary"]
    if bnd["kind"] == "file":
        raise ConfigError(["boundary.kind: radial solves need constant "
                           "boundary data"])
    solution = radial.radial_solve(spec, model, kappa_field, dom["radius"],
                                   bnd["value"])
    defect = abs(float(solution.profile(dom["radius"])[0]) - bnd["value"]) \
        if solution.ok else float("nan")
    rows = [("radial_solve", "pass" if solution.ok else "fail", defect)]
    _emit(cfg, "report.csv", rows, REPORT_HEADER)
    _announce_rows(cfg, rows)
    if not solution.ok:
        return EXIT_CONVERGENCE
    profile = _radial_profile_rows(solution, model,
                                   cfg["curvature_function"]["n"],
                                   dom["radius"], dom["count"])
    _emit(cfg, "profile.csv", profile, PROFILE_HEADER)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    spec = build_spec(cfg)
    model = build_model(cfg)
    if cfg["domain"]["kind"] == "radial":
        raise ConfigError(["domain.kind: verify runs on planar grids"])
    grid, kappa_field, boundary, result = _solve_planar(cfg, spec, model)
    rows = [("newton", "pass" if result.ok else "fail",
             result.residual_norm)]
    if not result.ok:
        _emit(cfg, "report.csv", rows, REPORT_HEADER)
        _announce_rows(cfg, rows)
        return EXIT_CONVERGENCE
    kappa_value = cfg["kappa"]["value"] \
        if cfg["kappa"]["kind"] == "constant" else None
    boundary_height = float(boundary) if np.isscalar(boundary) else None
    rows.extend(_check_battery(cfg, spec, model, grid, result.surface,
                               kappa_field, kappa_value, boundary_height))
    _emit(cfg, "report.csv", rows, REPORT_HEADER)
    _emit(cfg, "snapshot.csv", _snapshot_rows(result.surface, spec),
          SNAPSHOT_HEADER)
    _announce_rows(cfg, rows)
    return EXIT_OK if all(r[1] == "pass" for r in rows) else EXIT_CHECK


def cmd_continue(cfg: RunConfig) -> int:
    spec = build_spec(cfg)
    model = build_model(cfg)
    grid = build_grid(cfg)
    cont = cfg["continuation"]
    boundary = build_boundary(cfg, grid)
    if not np.isscalar(boundary):
        raise ConfigError(["boundary.kind: continuation needs constant "
                           "boundary data"])
    kappa0 = ConstantField(cont["kappa0"])
    kappa1 = ConstantField(cont["kappa1"])
    seed_cfg = dict(cfg.sections["seed_surface"])
    if seed_cfg["kind"] == "cap" and seed_cfg.get("kappa") is None:
        seed_cfg["kappa"] = cont["kappa0"]
    seed_holder = RunConfig(command=cfg.command, seed=cfg.seed,
                            quiet=cfg.quiet, out=cfg.out,
                            sections={**cfg.sections,
                                      "seed_surface": seed_cfg})
    seed = build_seed_surface(seed_holder, model, grid, kappa0, boundary)
    result = solver.continuation_solve(spec, seed, kappa0, kappa1,
                                       steps=cont["steps"],
                                       config=_newton_config(cfg))
    rows = []
    pad = cont["barrier_pad"]
    k_low = min(cont["kappa0"], cont["kappa1"])
    k_high = max(cont["kappa0"], cont["kappa1"])
    upper = _cap_profile(model, grid.radius, k_low - pad,
                         float(boundary)).surface(grid)
    lower = _cap_profile(model, grid.radius, k_high + pad,
                         float(boundary)).surface(grid)
    for step in result.steps:
        report = diagnostics.ordering_check(step.surface, lower=lower,
                                            upper=upper)
        rows.append((f"ordering[t={step.t:.6g}]", report.status,
                     report.margin))
    if not result.ok:
        rows.append(("continuation", "fail", float("nan")))
        _emit(cfg, "report.csv", rows, REPORT_HEADER)
        _announce_rows(cfg, rows)
        return EXIT_CONVERGENCE
    rows.append(("continuation", "pass",
                 result.steps[-1].residual_norm))
    final = result.steps[-1].surface
    rows.extend(_check_battery(cfg, spec, model, grid, final, kappa1,
                               cont["kappa1"], float(boundary)))
    _emit(cfg, "report.csv", rows, REPORT_HEADER)
    _emit(cfg, "snapshot.csv", _snapshot_rows(final, spec), SNAPSHOT_HEADER)
    _announce_rows(cfg, rows)
    return EXIT_OK if all(r[1] == "pass" for r in rows) else EXIT_CHECK


_COMMAND_IMPL = {
    "check-axioms": cmd_check_axioms,
    "mu-inf": cmd_mu_inf,
    "eval": cmd_eval,
    "solve": cmd_solve,
    "continue": cmd_continue,
    "verify": cmd_verify,
}


def run(cfg: RunConfig) -> int:
    """Execute a validated run and write its artifacts."""
    os.makedirs(cfg.out, exist_ok=True)
    _emit(cfg, "manifest.toml", manifest_text(cfg))
    return _COMMAND_IMPL[cfg.command](cfg)


# ---------------------------------------------------------------------------
# entry point

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curvplateau",
        description="Prescribed-curvature graph solvers and verification "
                    "checks for Euclidean and half-space ambient models.")
    parser.add_argument("command", nargs="?", choices=COMMANDS,
                        help="run type; may also come from the config file")
    parser.add_argument("params", nargs="*",
                        help="curvature function as <kind> <n> [k] for "
                             "check-axioms and mu-inf")
    parser.add_argument("--config", help="TOML configuration file")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, help="RNG seed for sampling")
    parser.add_argument("--quiet", action="store_true", default=None,
                        help="suppress progress output")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    text = ""
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            print(f"config: cannot read {args.config!r} ({exc})",
                  file=sys.stderr)
            return EXIT_CONFIG
    overrides = {}
    if args.out is not None:
        overrides["out"] = args.out
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.quiet is not None:
        overrides["quiet"] = True
    try:
        cfg = parse_config(text, command=args.command, params=args.params,
                           overrides=overrides)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(cfg)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"domain: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AdmissibilityError as exc:
        print(f"admissibility: {exc}", file=sys.stderr)
        return EXIT_ADMISSIBILITY
    except CurvPlateauError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
