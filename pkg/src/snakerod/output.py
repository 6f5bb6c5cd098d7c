"""Run outputs: snapshot/series CSV files, manifest, plot-data export.

Everything is plain UTF-8 text with a fixed column order and one header
line, formatted with shortest round-trip floats so identical runs produce
byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

SNAPSHOT_COLUMNS = (
    "t,node,z,qw,qx,qy,qz,ux,uy,uz,px,py,pz,"
    "W_wx,W_wy,W_wz,W_vx,W_vy,W_vz,xi_wx,xi_wy,xi_wz,xi_vx,xi_vy,xi_vz"
)
SERIES_COLUMNS = (
    "step,t,e_kinetic,e_elastic,e_total,power_in,"
    "mom_wx,mom_wy,mom_wz,mom_vx,mom_vy,mom_vz,max_abs_xi,max_abs_W"
)

SNAPSHOT_FILE = "snapshots.csv"
SERIES_FILE = "series.csv"
MANIFEST_FILE = "manifest.json"


def fmt(x) -> str:
    return repr(float(x))


def snapshot_rows(t: float, z: np.ndarray, quat, u, p, W, xi) -> list[str]:
    rows = []
    for i in range(len(z)):
        cells = (
            [fmt(t), str(i), fmt(z[i])]
            + [fmt(v) for v in quat[i]]
            + [fmt(v) for v in u[i]]
            + [fmt(v) for v in p[i]]
            + [fmt(v) for v in W[i]]
            + [fmt(v) for v in xi[i]]
        )
        rows.append(",".join(cells))
    return rows


def series_row(step, t, e_kin, e_el, e_tot, power, momentum, max_xi, max_w) -> str:
    cells = [str(step), fmt(t), fmt(e_kin), fmt(e_el), fmt(e_tot), fmt(power)]
    cells += [fmt(v) for v in momentum]
    cells += [fmt(max_xi), fmt(max_w)]
    return ",".join(cells)


def write_csv(path: Path, header: str, rows: list[str]) -> None:
    path.write_text(header + "\n" + "\n".join(rows) + "\n", encoding="utf-8")


def write_manifest(path: Path, manifest: dict) -> None:
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def read_manifest(run_dir) -> dict:
    return json.loads((Path(run_dir) / MANIFEST_FILE).read_text(encoding="utf-8"))


def _read_table(path: Path, expected_header: str) -> dict[str, np.ndarray]:
    lines = path.read_text(encoding="utf-8").strip().splitlines()
    if not lines or lines[0] != expected_header:
        raise ValueError(f"{path}: unexpected header")
    names = expected_header.split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    return {name: data[:, k] for k, name in enumerate(names)}


def read_snapshots(run_dir) -> dict[str, np.ndarray]:
    return _read_table(Path(run_dir) / SNAPSHOT_FILE, SNAPSHOT_COLUMNS)


def read_series(run_dir) -> dict[str, np.ndarray]:
    return _read_table(Path(run_dir) / SERIES_FILE, SERIES_COLUMNS)


def export_plot_data(run_dir, out_dir=None) -> list[Path]:
    """Column-oriented text files for offline plotting; no plotting here."""
    run_dir = Path(run_dir)
    out_dir = Path(out_dir) if out_dir is not None else run_dir / "plots"
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    series = read_series(run_dir)
    energy = out_dir / "energy_vs_t.txt"
    lines = ["# t e_kinetic e_elastic e_total"]
    for k in range(len(series["t"])):
        lines.append(
            " ".join(
                fmt(series[c][k]) for c in ("t", "e_kinetic", "e_elastic", "e_total")
            )
        )
    energy.write_text("\n".join(lines) + "\n", encoding="utf-8")
    written.append(energy)

    snaps = read_snapshots(run_dir)
    times = np.unique(snaps["t"])
    for idx, t in enumerate(times):
        sel = snaps["t"] == t
        path = out_dir / f"centerline_{idx:04d}.txt"
        lines = [f"# t = {fmt(t)}", "# z px py pz"]
        for z, px, py, pz in zip(snaps["z"][sel], snaps["px"][sel], snaps["py"][sel], snaps["pz"][sel]):
            lines.append(f"{fmt(z)} {fmt(px)} {fmt(py)} {fmt(pz)}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(path)
    return written
