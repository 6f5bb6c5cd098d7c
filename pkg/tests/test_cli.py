"""Command-line surface and output files."""

import numpy as np
import pytest

from snakerod import cli, output, se3, validation
from snakerod.output import export_plot_data, read_series, read_snapshots

SCENARIO = """
[rod]
length = 1.0
n_nodes = 9
reference_curve = "point"
[rod.explicit]
mass = 1.0
inertia = [0.01, 0.01, 0.02]

[stiffness]
diagonal = [0.01, 0.01, 0.02, 10.0, 10.0, 10.0]

[initial]
shape = "bent"
twist = [0.05, 0.0, 0.0, 0.0, 0.0, 0.0]

[solver]
t_end = 0.05
output_stride = 4

[output]
directory = "{outdir}"
"""


def write_scenario(tmp_path, name="scn.toml", **fmt):
    fmt.setdefault("outdir", str(tmp_path / "run"))
    path = tmp_path / name
    path.write_text(SCENARIO.format(**fmt))
    return path


class TestRun:
    def test_run_writes_outputs(self, tmp_path):
        path = write_scenario(tmp_path)
        assert cli.main(["run", str(path)]) == 0
        run_dir = tmp_path / "run"
        snaps = read_snapshots(run_dir)
        series = read_series(run_dir)
        manifest = output.read_manifest(run_dir)
        assert manifest["config"]["rod"]["n_nodes"] == 9
        assert len(np.unique(snaps["t"])) == len(series["t"])
        # quaternions are unit within the snapshot invariant
        q = np.stack([snaps["qw"], snaps["qx"], snaps["qy"], snaps["qz"]], axis=-1)
        assert np.max(np.abs(np.linalg.norm(q, axis=-1) - 1.0)) < 1e-9

    def test_rest_scenario_constant_snapshots(self, tmp_path):
        path = write_scenario(tmp_path)
        text = path.read_text().replace('shape = "bent"', 'shape = "straight"')
        text = text.replace("twist = [0.05, 0.0, 0.0, 0.0, 0.0, 0.0]", "")
        path.write_text(text)
        assert cli.main(["run", str(path)]) == 0
        snaps = read_snapshots(tmp_path / "run")
        for col in ("px", "py", "pz", "ux", "uy", "uz"):
            per_node = snaps[col].reshape(-1, 9)
            assert np.all(per_node == per_node[0])

    def test_missing_key_exit_2(self, tmp_path, capsys):
        path = write_scenario(tmp_path)
        path.write_text(path.read_text().replace("diagonal", "diagnoal"))
        assert cli.main(["run", str(path)]) == 2
        assert "diagnoal" in capsys.readouterr().err

    def test_numerical_failure_exit_3(self, tmp_path):
        path = write_scenario(tmp_path)
        # spin far off any principal axis so the gyroscopic term overflows
        vel = ["wx,wy,wz,vx,vy,vz"] + ["1e200,0.0,1e200,0.0,0.0,0.0"] * 9
        (tmp_path / "vel.csv").write_text("\n".join(vel) + "\n")
        text = path.read_text().replace(
            'shape = "bent"',
            'shape = "bent"\nvelocity = "file"\nvelocity_file = "vel.csv"',
        )
        path.write_text(text)
        with np.errstate(over="ignore", invalid="ignore"):
            rc = cli.main(["run", str(path)])
        assert rc == 3

    def test_explicit_dt_above_cfl_rejected(self, tmp_path):
        path = write_scenario(tmp_path)
        path.write_text(path.read_text().replace("t_end = 0.05", "t_end = 0.05\ndt = 1.0"))
        assert cli.main(["run", str(path)]) == 2

    def test_output_root_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path / "root"))
        path = write_scenario(tmp_path, outdir="rel/run")
        assert cli.main(["run", str(path)]) == 0
        assert (tmp_path / "root" / "rel" / "run" / "snapshots.csv").exists()

    def test_reproducible_from_manifest(self, tmp_path):
        path = write_scenario(tmp_path)
        assert cli.main(["run", str(path)]) == 0
        manifest = output.read_manifest(tmp_path / "run")
        redo = tmp_path / "redo"
        cli.execute_run(manifest["config"], redo, base_dir=tmp_path)
        assert (tmp_path / "run" / "snapshots.csv").read_bytes() == (redo / "snapshots.csv").read_bytes()

    def test_determinism_byte_identical(self, tmp_path):
        p1 = write_scenario(tmp_path, name="a.toml", outdir=str(tmp_path / "r1"))
        p2 = write_scenario(tmp_path, name="b.toml", outdir=str(tmp_path / "r2"))
        assert cli.main(["run", str(p1)]) == 0
        assert cli.main(["run", str(p2)]) == 0
        for f in ("snapshots.csv", "series.csv"):
            assert (tmp_path / "r1" / f).read_bytes() == (tmp_path / "r2" / f).read_bytes()


class TestVerify:
    def test_selected_suite_passes(self, capsys):
        assert cli.main(["verify", "algebra"]) == 0
        out = capsys.readouterr().out
        assert "PASS" in out and "[algebra]" in out

    def test_unknown_suite_exit_2(self):
        assert cli.main(["verify", "bogus"]) == 2

    def test_mutated_bracket_fails(self, monkeypatch, capsys):
        true_bracket = se3.bracket

        def flipped(V, W):
            return -true_bracket(V, W)

        monkeypatch.setattr(se3, "bracket", flipped)
        assert cli.main(["verify", "algebra"]) == 4
        assert "FAIL" in capsys.readouterr().out

    def test_empty_selector_runs_all_suites(self, monkeypatch, capsys):
        ran = []

        def fake_suite(name):
            def suite():
                ran.append(name)
                return [validation.CheckResult(name, 0.0, 1.0)]

            return suite

        monkeypatch.setattr(
            validation, "SUITES", {n: fake_suite(n) for n in ("one", "two", "three")}
        )
        assert cli.main(["verify"]) == 0
        assert ran == ["one", "two", "three"]


class TestSweep:
    def test_single_axis(self, tmp_path):
        path = write_scenario(tmp_path, outdir=str(tmp_path / "sw"))
        rc = cli.main(["sweep", str(path), "--axis", "solver.t_end=0.02:0.04:2"])
        assert rc == 0
        summary = (tmp_path / "sw" / "summary.csv").read_text().strip().splitlines()
        assert summary[0].startswith("point,solver.t_end,")
        assert len(summary) == 3
        assert (tmp_path / "sw" / "point_000" / "snapshots.csv").exists()

    def test_cpg_amplitude_sweep_zero_point_stays_put(self, tmp_path):
        path = write_scenario(tmp_path, outdir=str(tmp_path / "sw2"))
        text = path.read_text().replace('shape = "bent"', 'shape = "straight"')
        text = text.replace("twist = [0.05, 0.0, 0.0, 0.0, 0.0, 0.0]", "")
        text += (
            '\n[control]\nkind = "cpg"\n'
            "[control.cpg]\namplitude = 0.05\nfrequency = 6.0\nwavenumber = 6.28\n"
        )
        path.write_text(text)
        rc = cli.main(["sweep", str(path), "--axis", "control.cpg.amplitude=0.0:0.05:2"])
        assert rc == 0
        rows = (tmp_path / "sw2" / "summary.csv").read_text().strip().splitlines()[1:]
        zero_amp = rows[0].split(",")
        driven = rows[1].split(",")
        assert float(zero_amp[-1]) == 0.0  # passive rod does not move from rest
        assert float(zero_amp[-2]) == 0.0  # and develops no strain
        assert float(driven[-2]) > 0.0

    def test_single_point_sweep_equals_run(self, tmp_path):
        direct = write_scenario(tmp_path, name="direct.toml", outdir=str(tmp_path / "direct"))
        assert cli.main(["run", str(direct)]) == 0
        swept = write_scenario(tmp_path, name="swept.toml", outdir=str(tmp_path / "sw1"))
        assert cli.main(["sweep", str(swept), "--axis", "solver.t_end=0.05:0.05:1"]) == 0
        assert (tmp_path / "direct" / "snapshots.csv").read_bytes() == (
            tmp_path / "sw1" / "point_000" / "snapshots.csv"
        ).read_bytes()

    def test_bad_axis_specs(self, tmp_path):
        path = write_scenario(tmp_path)
        assert cli.main(["sweep", str(path), "--axis", "nope"]) == 2
        assert cli.main(["sweep", str(path), "--axis", "rod.missing=0:1:2"]) == 2
        assert (
            cli.main(
                ["sweep", str(path), "--axis", "solver.t_end=0.01:0.02:2", "--axis",
                 "solver.cfl_number=0.4:0.5:2", "--axis", "rod.length=1:2:2"]
            )
            == 2
        )


class TestExport:
    def test_round_trip(self, tmp_path):
        path = write_scenario(tmp_path)
        assert cli.main(["run", str(path)]) == 0
        assert cli.main(["export", str(tmp_path / "run")]) == 0
        plots = tmp_path / "run" / "plots"
        energy = (plots / "energy_vs_t.txt").read_text().splitlines()
        assert energy[0].startswith("#")
        series = read_series(tmp_path / "run")
        assert len(energy) - 1 == len(series["t"])
        centerlines = sorted(plots.glob("centerline_*.txt"))
        assert len(centerlines) == len(series["t"])

    def test_missing_run_dir_exit_2(self, tmp_path):
        assert cli.main(["export", str(tmp_path / "nothing")]) == 2


class TestVersionFlag:
    def test_version(self, capsys):
        with pytest.raises(SystemExit):
            cli.main(["--version"])
        assert "snake" in capsys.readouterr().out
