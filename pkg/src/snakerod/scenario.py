"""Scenario files: parsing, strict validation, normalization, build.

A scenario is one TOML file.  Unknown keys anywhere are rejected, as are
non-numeric values in numeric slots (unit suffixes like "1.0 m" are not
supported; everything is SI).  The normalized form fills every default
and is what the run manifest records; parse -> serialize -> parse is the
identity on it.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import dynamics, se3
from .actuation import COMPONENT_INDEX, ControlLaw, CpgParams, cpg_law
from .elasticity import StiffnessLaw, strain
from .rod import Grid, RodProperties, cylinder_properties, reference_curve, uniform_properties

BOUNDARY_NOTE_TOL = 1e-12


class ConfigError(Exception):
    """Invalid scenario configuration."""


@dataclass
class RunSetup:
    grid: Grid
    props: RodProperties
    law: StiffnessLaw
    control: ControlLaw | None
    state0: dynamics.SimState
    solver: dynamics.SolverConfig
    output_directory: str
    action_convention: str
    notes: list[str] = field(default_factory=list)


# --- low-level checked getters -------------------------------------------


def _err(path: str, message: str) -> ConfigError:
    return ConfigError(f"{path}: {message}")


def _as_float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _err(path, f"expected a number, got {value!r} (unit suffixes are not supported)")
    return float(value)


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _err(path, f"expected an integer, got {value!r}")
    return int(value)


def _as_str(value, path: str, choices=None) -> str:
    if not isinstance(value, str):
        raise _err(path, f"expected a string, got {value!r}")
    if choices is not None and value not in choices:
        raise _err(path, f"must be one of {sorted(choices)}, got {value!r}")
    return value


def _as_float_list(value, path: str, length: int | None = None) -> list[float]:
    if not isinstance(value, list):
        raise _err(path, "expected an array of numbers")
    out = [_as_float(v, f"{path}[{i}]") for i, v in enumerate(value)]
    if length is not None and len(out) != length:
        raise _err(path, f"expected {length} entries, got {len(out)}")
    return out


def _check_keys(table: dict, path: str, allowed: set[str]) -> None:
    unknown = set(table) - allowed
    if unknown:
        raise _err(path, f"unknown keys: {', '.join(sorted(unknown))}")


def _section(raw: dict, name: str, required: bool) -> dict:
    sec = raw.get(name)
    if sec is None:
        if required:
            raise ConfigError(f"missing required section [{name}]")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    return sec


# --- normalization ---------------------------------------------------------


def parse_scenario(text: str) -> dict:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from exc
    return normalize(raw)


def load_scenario(path) -> dict:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def normalize(raw: dict) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("scenario must be a table of sections")
    _check_keys(
        raw, "scenario", {"rod", "stiffness", "initial", "solver", "control", "output", "conventions"}
    )
    norm: dict = {}
    norm["rod"] = _normalize_rod(_section(raw, "rod", required=True))
    n = norm["rod"]["n_nodes"]
    norm["stiffness"] = _normalize_stiffness(_section(raw, "stiffness", required=True), n)
    norm["initial"] = _normalize_initial(_section(raw, "initial", required=False))
    norm["solver"] = _normalize_solver(_section(raw, "solver", required=True))
    norm["control"] = _normalize_control(_section(raw, "control", required=False))
    norm["output"] = _normalize_output(_section(raw, "output", required=False))
    norm["conventions"] = _normalize_conventions(_section(raw, "conventions", required=False))
    return norm


def _normalize_rod(sec: dict) -> dict:
    _check_keys(sec, "rod", {"length", "n_nodes", "reference_curve", "cylinder", "explicit"})
    if "length" not in sec or "n_nodes" not in sec:
        raise ConfigError("rod: length and n_nodes are required")
    out = {
        "length": _as_float(sec["length"], "rod.length"),
        "n_nodes": _as_int(sec["n_nodes"], "rod.n_nodes"),
        "reference_curve": _as_str(
            sec.get("reference_curve", "straight"), "rod.reference_curve", {"straight", "point"}
        ),
    }
    if out["length"] <= 0.0:
        raise ConfigError("rod.length: must be positive")
    if out["n_nodes"] < 3:
        raise ConfigError("rod.n_nodes: must be at least 3")
    has_cyl = "cylinder" in sec
    has_exp = "explicit" in sec
    if has_cyl == has_exp:
        raise ConfigError("rod: exactly one of [rod.cylinder] or [rod.explicit] is required")
    if has_cyl:
        cyl = sec["cylinder"]
        _check_keys(cyl, "rod.cylinder", {"radius", "density"})
        if "radius" not in cyl or "density" not in cyl:
            raise ConfigError("rod.cylinder: radius and density are required")
        out["cylinder"] = {
            "radius": _as_float(cyl["radius"], "rod.cylinder.radius"),
            "density": _as_float(cyl["density"], "rod.cylinder.density"),
        }
        if out["cylinder"]["radius"] <= 0 or out["cylinder"]["density"] <= 0:
            raise ConfigError("rod.cylinder: radius and density must be positive")
    else:
        exp = sec["explicit"]
        _check_keys(exp, "rod.explicit", {"mass", "inertia"})
        if "mass" not in exp or "inertia" not in exp:
            raise ConfigError("rod.explicit: mass and inertia are required")
        mass = exp["mass"]
        if isinstance(mass, list):
            mass = _as_float_list(mass, "rod.explicit.mass", out["n_nodes"])
        else:
            mass = _as_float(mass, "rod.explicit.mass")
        inertia = exp["inertia"]
        if not isinstance(inertia, list):
            raise ConfigError("rod.explicit.inertia: expected an array")
        if inertia and isinstance(inertia[0], list):
            inertia = [_as_float_list(row, f"rod.explicit.inertia[{i}]", 3) for i, row in enumerate(inertia)]
            if len(inertia) != 3:
                raise ConfigError("rod.explicit.inertia: a full tensor needs 3 rows of 3")
        else:
            inertia = _as_float_list(inertia, "rod.explicit.inertia", 3)
        out["explicit"] = {"mass": mass, "inertia": inertia}
    return out


def _normalize_stiffness(sec: dict, n_nodes: int) -> dict:
    _check_keys(sec, "stiffness", {"diagonal", "matrix"})
    if ("diagonal" in sec) == ("matrix" in sec):
        raise ConfigError("stiffness: exactly one of diagonal or matrix is required")
    if "diagonal" in sec:
        diag = sec["diagonal"]
        if not isinstance(diag, list):
            raise ConfigError("stiffness.diagonal: expected an array")
        if diag and isinstance(diag[0], list):
            rows = [_as_float_list(r, f"stiffness.diagonal[{i}]", 6) for i, r in enumerate(diag)]
            if len(rows) != n_nodes:
                raise ConfigError("stiffness.diagonal: per-node form needs one row per node")
            return {"diagonal": rows}
        return {"diagonal": _as_float_list(diag, "stiffness.diagonal", 6)}
    mat = sec["matrix"]
    if not (isinstance(mat, list) and mat and isinstance(mat[0], list)):
        raise ConfigError("stiffness.matrix: expected a 6x6 array of rows")
    if isinstance(mat[0][0], list):
        out = []
        if len(mat) != n_nodes:
            raise ConfigError("stiffness.matrix: per-node form needs one matrix per node")
        for k, m in enumerate(mat):
            out.append([_as_float_list(r, f"stiffness.matrix[{k}][{i}]", 6) for i, r in enumerate(m)])
            if len(out[-1]) != 6:
                raise ConfigError("stiffness.matrix: each matrix needs 6 rows")
        return {"matrix": out}
    rows = [_as_float_list(r, f"stiffness.matrix[{i}]", 6) for i, r in enumerate(mat)]
    if len(rows) != 6:
        raise ConfigError("stiffness.matrix: needs 6 rows of 6")
    return {"matrix": rows}


def _normalize_initial(sec: dict) -> dict:
    _check_keys(
        sec, "initial", {"shape", "twist", "file", "velocity", "velocity_twist", "velocity_file"}
    )
    shape = _as_str(sec.get("shape", "straight"), "initial.shape", {"straight", "screw", "bent", "file"})
    out: dict = {"shape": shape}
    if shape in ("screw", "bent"):
        if "twist" not in sec:
            raise ConfigError(f"initial.twist: required for shape = '{shape}'")
        out["twist"] = _as_float_list(sec["twist"], "initial.twist", 6)
    elif "twist" in sec:
        raise ConfigError("initial.twist: only valid for shape 'screw' or 'bent'")
    if shape == "file":
        out["file"] = _as_str(sec.get("file", ""), "initial.file")
        if not out["file"]:
            raise ConfigError("initial.file: required for shape = 'file'")
    elif "file" in sec:
        raise ConfigError("initial.file: only valid for shape 'file'")
    velocity = _as_str(sec.get("velocity", "zero"), "initial.velocity", {"zero", "uniform", "file"})
    out["velocity"] = velocity
    if velocity == "uniform":
        if "velocity_twist" not in sec:
            raise ConfigError("initial.velocity_twist: required for velocity = 'uniform'")
        out["velocity_twist"] = _as_float_list(sec["velocity_twist"], "initial.velocity_twist", 6)
    elif "velocity_twist" in sec:
        raise ConfigError("initial.velocity_twist: only valid for velocity 'uniform'")
    if velocity == "file":
        out["velocity_file"] = _as_str(sec.get("velocity_file", ""), "initial.velocity_file")
        if not out["velocity_file"]:
            raise ConfigError("initial.velocity_file: required for velocity = 'file'")
    elif "velocity_file" in sec:
        raise ConfigError("initial.velocity_file: only valid for velocity 'file'")
    return out


def _normalize_solver(sec: dict) -> dict:
    _check_keys(sec, "solver", {"dt", "cfl_number", "t_end", "output_stride", "scheme"})
    if "t_end" not in sec:
        raise ConfigError("solver.t_end: required")
    dt = sec.get("dt", "auto")
    if isinstance(dt, str):
        if dt != "auto":
            raise ConfigError("solver.dt: must be a positive number or 'auto'")
    else:
        dt = _as_float(dt, "solver.dt")
        if dt <= 0:
            raise ConfigError("solver.dt: must be positive")
    out = {
        "dt": dt,
        "cfl_number": _as_float(sec.get("cfl_number", 0.5), "solver.cfl_number"),
        "t_end": _as_float(sec["t_end"], "solver.t_end"),
        "output_stride": _as_int(sec.get("output_stride", 1), "solver.output_stride"),
        "scheme": _as_str(sec.get("scheme", "rk4"), "solver.scheme", {"rk4", "midpoint"}),
    }
    if not 0.0 < out["cfl_number"] <= 1.0:
        raise ConfigError("solver.cfl_number: must lie in (0, 1]")
    if out["t_end"] <= 0:
        raise ConfigError("solver.t_end: must be positive")
    if out["output_stride"] < 1:
        raise ConfigError("solver.output_stride: must be >= 1")
    return out


def _normalize_control(sec: dict) -> dict:
    _check_keys(sec, "control", {"kind", "cpg"})
    kind = _as_str(sec.get("kind", "none"), "control.kind", {"none", "cpg"})
    if kind == "none":
        if "cpg" in sec:
            raise ConfigError("control.cpg: only valid with kind = 'cpg'")
        return {"kind": "none"}
    cpg = sec.get("cpg")
    if cpg is None:
        raise ConfigError("control.cpg: required for kind = 'cpg'")
    _check_keys(cpg, "control.cpg", {"amplitude", "frequency", "wavenumber", "component", "phase"})
    for key in ("amplitude", "frequency", "wavenumber"):
        if key not in cpg:
            raise ConfigError(f"control.cpg.{key}: required")
    out = {
        "kind": "cpg",
        "cpg": {
            "amplitude": _as_float(cpg["amplitude"], "control.cpg.amplitude"),
            "frequency": _as_float(cpg["frequency"], "control.cpg.frequency"),
            "wavenumber": _as_float(cpg["wavenumber"], "control.cpg.wavenumber"),
            "component": _as_str(
                cpg.get("component", "bend1"), "control.cpg.component", set(COMPONENT_INDEX)
            ),
            "phase": _as_float(cpg.get("phase", 0.0), "control.cpg.phase"),
        },
    }
    if out["cpg"]["amplitude"] < 0:
        raise ConfigError("control.cpg.amplitude: must be nonnegative")
    return out


def _normalize_output(sec: dict) -> dict:
    _check_keys(sec, "output", {"directory", "formats"})
    directory = _as_str(sec.get("directory", "runs/out"), "output.directory")
    formats = sec.get("formats", ["csv"])
    if not isinstance(formats, list) or not formats:
        raise ConfigError("output.formats: expected a non-empty array")
    for i, f in enumerate(formats):
        _as_str(f, f"output.formats[{i}]", {"csv"})
    return {"directory": directory, "formats": list(formats)}


def _normalize_conventions(sec: dict) -> dict:
    _check_keys(sec, "conventions", {"action_convention", "mass_coefficient"})
    return {
        "action_convention": _as_str(
            sec.get("action_convention", "inverse"),
            "conventions.action_convention",
            {"inverse", "direct"},
        ),
        "mass_coefficient": _as_str(
            sec.get("mass_coefficient", "area"), "conventions.mass_coefficient", {"area", "doubled"}
        ),
    }


# --- serialization ---------------------------------------------------------


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, int):
        return repr(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {value!r}")


def serialize(norm: dict) -> str:
    lines: list[str] = []

    def emit(table: dict, prefix: str):
        scalars = {k: v for k, v in table.items() if not isinstance(v, dict)}
        subs = {k: v for k, v in table.items() if isinstance(v, dict)}
        lines.append(f"[{prefix}]")
        for key, value in scalars.items():
            lines.append(f"{key} = {_toml_value(value)}")
        lines.append("")
        for key, value in subs.items():
            emit(value, f"{prefix}.{key}")

    for section in ("rod", "stiffness", "initial", "solver", "control", "output", "conventions"):
        emit(norm[section], section)
    return "\n".join(lines)


# --- build -----------------------------------------------------------------


def build(norm: dict, base_dir=None) -> RunSetup:
    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
    grid = Grid(n_nodes=norm["rod"]["n_nodes"], length=norm["rod"]["length"])
    notes: list[str] = []

    try:
        props = _build_props(norm, grid)
        law = _build_law(norm, props)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    control = None
    if norm["control"]["kind"] == "cpg":
        c = norm["control"]["cpg"]
        control = cpg_law(
            CpgParams(
                amplitude=c["amplitude"],
                frequency=c["frequency"],
                wavenumber=c["wavenumber"],
                component=c["component"],
                phase=c["phase"],
            ),
            grid,
        )

    state0 = _build_state(norm["initial"], grid, base_dir, notes)
    s = norm["solver"]
    solver = dynamics.SolverConfig(
        t_end=s["t_end"],
        dt=s["dt"],
        cfl_number=s["cfl_number"],
        output_stride=s["output_stride"],
        scheme=s["scheme"],
    )
    return RunSetup(
        grid=grid,
        props=props,
        law=law,
        control=control,
        state0=state0,
        solver=solver,
        output_directory=norm["output"]["directory"],
        action_convention=norm["conventions"]["action_convention"],
        notes=notes,
    )


def _build_props(norm: dict, grid: Grid) -> RodProperties:
    rod_sec = norm["rod"]
    p0 = rod_sec["reference_curve"]
    if "cylinder" in rod_sec:
        cyl = rod_sec["cylinder"]
        return cylinder_properties(
            cyl["radius"],
            cyl["density"],
            grid,
            mass_coefficient=norm["conventions"]["mass_coefficient"],
            p0=p0,
        )
    exp = rod_sec["explicit"]
    mass = exp["mass"]
    inertia = np.asarray(exp["inertia"], dtype=float)
    if isinstance(mass, list):
        mass_arr = np.asarray(mass, dtype=float)
        if inertia.shape == (3,):
            inertia_full = np.zeros((grid.n_nodes, 3, 3))
            inertia_full[:, [0, 1, 2], [0, 1, 2]] = inertia
        else:
            inertia_full = np.broadcast_to(inertia, (grid.n_nodes, 3, 3)).copy()
        return RodProperties(mass=mass_arr, inertia=inertia_full, p0=reference_curve(p0, grid))
    return uniform_properties(mass, inertia, grid, p0=p0)


def _build_law(norm: dict, props: RodProperties) -> StiffnessLaw:
    stf = norm["stiffness"]
    if "diagonal" in stf:
        diag = np.asarray(stf["diagonal"], dtype=float)
        if diag.ndim == 1:
            return StiffnessLaw.diagonal(diag, props)
        K = np.zeros((props.n_nodes, 6, 6))
        for i in range(props.n_nodes):
            K[i, :3, 3:] = np.diag(diag[i, 3:])
            K[i, 3:, :3] = np.diag(diag[i, :3])
        return StiffnessLaw(K, props)
    return StiffnessLaw(np.asarray(stf["matrix"], dtype=float), props)


def _build_state(initial: dict, grid: Grid, base_dir: Path, notes: list[str]) -> dynamics.SimState:
    n = grid.n_nodes
    shape = initial["shape"]
    base_pose = se3.identity_pose()
    if shape == "straight":
        xi0 = np.zeros((n, 6))
    elif shape == "bent":
        profile = np.sin(np.pi * grid.nodes / grid.length) ** 2
        xi0 = profile[:, None] * np.asarray(initial["twist"], dtype=float)
        xi0[0] = 0.0
        xi0[-1] = 0.0
    elif shape == "screw":
        Xi = np.asarray(initial["twist"], dtype=float)
        g = se3.exp_se3(grid.nodes[:, None] * Xi)
        xi0 = strain(g, grid).nodes
        base_pose = g[0]
        xi0 = _pin_boundary(xi0, notes, "screw initial shape")
    elif shape == "file":
        g = _read_pose_file(base_dir / initial["file"], n)
        xi0 = strain(g, grid).nodes
        base_pose = g[0]
        xi0 = _pin_boundary(xi0, notes, f"initial pose file {initial['file']}")
    else:  # pragma: no cover - normalize() guarantees the enum
        raise ConfigError(f"unknown initial shape {shape!r}")

    velocity = initial["velocity"]
    if velocity == "zero":
        W0 = np.zeros((n, 6))
    elif velocity == "uniform":
        W0 = np.tile(np.asarray(initial["velocity_twist"], dtype=float), (n, 1))
    else:
        W0 = _read_velocity_file(base_dir / initial["velocity_file"], n)
    return dynamics.SimState(t=0.0, W=W0, xi=xi0, base_pose=base_pose)


def _pin_boundary(xi: np.ndarray, notes: list[str], origin: str) -> np.ndarray:
    worst = max(float(np.max(np.abs(xi[0]))), float(np.max(np.abs(xi[-1]))))
    if worst > BOUNDARY_NOTE_TOL:
        notes.append(
            f"{origin}: end-node strain {worst:.3e} reset to zero to satisfy the free-free boundary"
        )
    out = xi.copy()
    out[0] = 0.0
    out[-1] = 0.0
    return out


def _read_pose_file(path: Path, n_nodes: int) -> np.ndarray:
    rows = _read_csv(path, ["qw", "qx", "qy", "qz", "ux", "uy", "uz"], n_nodes)
    q = rows[:, :4]
    norm_q = np.linalg.norm(q, axis=-1)
    if np.any(np.abs(norm_q - 1.0) > 1e-9):
        raise ConfigError(f"{path}: quaternions must have unit norm (within 1e-9)")
    return se3.pose(se3.quaternion_to_rotation(q), rows[:, 4:])


def _read_velocity_file(path: Path, n_nodes: int) -> np.ndarray:
    return _read_csv(path, ["wx", "wy", "wz", "vx", "vy", "vz"], n_nodes)


def _read_csv(path: Path, columns: list[str], n_rows: int) -> np.ndarray:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != columns:
                raise ConfigError(f"{path}: expected header {','.join(columns)}")
            data = [[float(v) for v in row] for row in reader if row]
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    arr = np.asarray(data, dtype=float)
    if arr.shape != (n_rows, len(columns)):
        raise ConfigError(f"{path}: expected {n_rows} rows of {len(columns)} values")
    return arr
