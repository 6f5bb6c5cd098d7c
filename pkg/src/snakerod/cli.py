"""Command-line surface: snake run | verify | sweep | export.

Exit codes: 0 ok, 2 configuration error, 3 numerical failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, dynamics, output, scenario, se3, validation
from .elasticity import elastic_energy
from .rod import kinetic_energy

OUTPUT_ROOT_ENV = "SNAKE_OUTPUT_ROOT"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4


def _resolve_run_dir(directory: str, out_root: str | None) -> Path:
    root = out_root or os.environ.get(OUTPUT_ROOT_ENV)
    if root:
        return Path(root) / directory
    return Path(directory)


def _resolve_dt(setup: scenario.RunSetup) -> float:
    cfg = setup.solver
    bound = dynamics.cfl_dt(setup.props, setup.law, setup.grid, 1.0)
    if cfg.dt == "auto":
        return dynamics.cfl_dt(setup.props, setup.law, setup.grid, cfg.cfl_number)
    dt = float(cfg.dt)
    if dt > bound:
        raise scenario.ConfigError(
            f"solver.dt: {dt:g} exceeds the CFL bound {bound:g} for this rod"
        )
    return dt


def execute_run(norm: dict, run_dir: Path, base_dir=None) -> dict:
    """Run one normalized scenario into run_dir; returns summary metrics."""
    setup = scenario.build(norm, base_dir=base_dir)
    grid, props, law = setup.grid, setup.props, setup.law
    dt = _resolve_dt(setup)
    n_steps = max(1, int(round(setup.solver.t_end / dt)))
    stride = setup.solver.output_stride

    run_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "version": __version__,
        "config": norm,
        "conventions": norm["conventions"],
        "derived": {
            "dt": dt,
            "n_steps": n_steps,
            "t_final": n_steps * dt,
            "dz": grid.dz,
        },
        "notes": setup.notes,
    }

    snap_rows: list[str] = []
    series_rows: list[str] = []
    mid = grid.n_nodes // 2
    mid_z0 = None
    forward: list[float] = []

    def record(step: int, state: dynamics.SimState):
        nonlocal mid_z0
        state.check(grid)
        poses = dynamics.reconstruct_poses(state, grid)
        centerline = dynamics.apply_configuration(poses, props, grid, setup.action_convention)
        quat = se3.rotation_to_quaternion(se3.rotation(poses))
        snap_rows.extend(
            output.snapshot_rows(
                state.t, grid.nodes, quat, se3.translation(poses), centerline, state.W, state.xi
            )
        )
        e_kin = kinetic_energy(state.W, props, grid)
        e_el = elastic_energy(state.xi, law, props, grid)
        mom = dynamics.spatial_momentum(state, props, grid)
        power = dynamics.power_input(state, props, law, setup.control, grid)
        series_rows.append(
            output.series_row(
                step,
                state.t,
                e_kin,
                e_el,
                e_kin + e_el,
                power,
                mom,
                float(np.max(np.abs(state.xi))),
                float(np.max(np.abs(state.W))),
            )
        )
        if mid_z0 is None:
            mid_z0 = centerline[mid, 2]
        forward.append(float(centerline[mid, 2] - mid_z0))

    state = setup.state0
    record(0, state)
    for k, state in enumerate(
        dynamics.iterate(state, dt, n_steps, props, law, setup.control, grid, scheme=setup.solver.scheme)
    ):
        if (k + 1) % stride == 0 or (k + 1) == n_steps:
            record(k + 1, state)

    output.write_csv(run_dir / output.SNAPSHOT_FILE, output.SNAPSHOT_COLUMNS, snap_rows)
    output.write_csv(run_dir / output.SERIES_FILE, output.SERIES_COLUMNS, series_rows)
    output.write_manifest(run_dir / output.MANIFEST_FILE, manifest)

    series_last = series_rows[-1].split(",")
    return {
        "final_e_total": float(series_last[4]),
        "max_abs_xi": max(float(r.split(",")[12]) for r in series_rows),
        "mean_forward_displacement": float(np.mean(forward)),
        "run_dir": str(run_dir),
    }


def run_scenario(path, out_root: str | None = None) -> Path:
    path = Path(path)
    norm = scenario.load_scenario(path)
    run_dir = _resolve_run_dir(norm["output"]["directory"], out_root)
    execute_run(norm, run_dir, base_dir=path.parent)
    return run_dir


# --- sweep -----------------------------------------------------------------


def _parse_axis(text: str) -> tuple[str, np.ndarray]:
    try:
        key, rng = text.split("=", 1)
        start, stop, num = rng.split(":")
        values = np.linspace(float(start), float(stop), int(num))
    except ValueError as exc:
        raise scenario.ConfigError(f"invalid axis {text!r}; expected key=start:stop:n") from exc
    if len(values) < 1:
        raise scenario.ConfigError(f"axis {text!r} needs at least one point")
    return key.strip(), values


def _set_key(norm: dict, dotted: str, value: float) -> None:
    parts = dotted.split(".")
    node = norm
    for p in parts[:-1]:
        if not isinstance(node, dict) or p not in node:
            raise scenario.ConfigError(f"sweep axis {dotted!r}: no such config key")
        node = node[p]
    leaf = parts[-1]
    if not isinstance(node, dict) or leaf not in node:
        raise scenario.ConfigError(f"sweep axis {dotted!r}: no such config key")
    if isinstance(node[leaf], bool) or not isinstance(node[leaf], (int, float)):
        raise scenario.ConfigError(f"sweep axis {dotted!r}: target is not numeric")
    node[leaf] = float(value)


def sweep_scenario(path, axis_specs: list[str], out_root: str | None = None) -> Path:
    import copy
    import itertools

    path = Path(path)
    norm = scenario.load_scenario(path)
    if not 1 <= len(axis_specs) <= 2:
        raise scenario.ConfigError("sweep needs one or two --axis specs")
    axes = [_parse_axis(s) for s in axis_specs]
    sweep_root = _resolve_run_dir(norm["output"]["directory"], out_root)
    sweep_root.mkdir(parents=True, exist_ok=True)

    keys = [k for k, _ in axes]
    header = "point," + ",".join(keys) + ",final_e_total,max_abs_xi,mean_forward_displacement"
    rows = []
    for idx, combo in enumerate(itertools.product(*[vals for _, vals in axes])):
        point = copy.deepcopy(norm)
        for (key, _), value in zip(axes, combo):
            _set_key(point, key, value)
        point_dir = sweep_root / f"point_{idx:03d}"
        point["output"]["directory"] = str(point_dir)
        metrics = execute_run(point, point_dir, base_dir=path.parent)
        rows.append(
            ",".join(
                [str(idx)]
                + [output.fmt(v) for v in combo]
                + [
                    output.fmt(metrics["final_e_total"]),
                    output.fmt(metrics["max_abs_xi"]),
                    output.fmt(metrics["mean_forward_displacement"]),
                ]
            )
        )
    output.write_csv(sweep_root / "summary.csv", header, rows)
    return sweep_root


# --- entry points ----------------------------------------------------------


def cmd_run(args) -> int:
    run_dir = run_scenario(args.scenario, out_root=args.output_root)
    print(f"run complete: {run_dir}")
    return EXIT_OK


def cmd_verify(args) -> int:
    results, ok = validation.run_suites(args.suites or None)
    for name, checks in results.items():
        print(f"[{name}]")
        for chk in checks:
            print(f"  {chk}")
    print("verification:", "PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_sweep(args) -> int:
    root = sweep_scenario(args.scenario, args.axis, out_root=args.output_root)
    print(f"sweep complete: {root}")
    return EXIT_OK


def cmd_export(args) -> int:
    try:
        written = output.export_plot_data(args.rundir)
    except (OSError, ValueError) as exc:
        raise scenario.ConfigError(f"cannot export {args.rundir}: {exc}") from exc
    for p in written:
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snake", description="Cosserat snake-robot dynamics on SE(3) fields"
    )
    parser.add_argument("--version", action="version", version=f"snake {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario file")
    p_run.add_argument("scenario")
    p_run.add_argument("--output-root", default=None, help=f"overrides ${OUTPUT_ROOT_ENV}")
    p_run.set_defaults(func=cmd_run)

    p_ver = sub.add_parser("verify", help="run verification suites")
    p_ver.add_argument("suites", nargs="*", help=f"subset of: {', '.join(validation.SUITES)}")
    p_ver.set_defaults(func=cmd_verify)

    p_sw = sub.add_parser("sweep", help="run a scenario over one or two parameter axes")
    p_sw.add_argument("scenario")
    p_sw.add_argument("--axis", action="append", required=True, help="key=start:stop:n")
    p_sw.add_argument("--output-root", default=None)
    p_sw.set_defaults(func=cmd_sweep)

    p_ex = sub.add_parser("export", help="write plot-ready text files for a run directory")
    p_ex.add_argument("rundir")
    p_ex.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except scenario.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (dynamics.NonFiniteStateError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
