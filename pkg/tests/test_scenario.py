"""Scenario parsing, validation, normalization and build."""

import numpy as np
import pytest

from snakerod import dynamics, se3
from snakerod.scenario import ConfigError, build, load_scenario, normalize, parse_scenario, serialize

MINIMAL = """
[rod]
length = 1.0
n_nodes = 9
[rod.explicit]
mass = 1.0
inertia = [0.01, 0.01, 0.02]

[stiffness]
diagonal = [0.01, 0.01, 0.02, 10.0, 10.0, 10.0]

[solver]
t_end = 0.1
"""


def norm_minimal(extra: str = "") -> dict:
    return parse_scenario(MINIMAL + extra)


class TestNormalize:
    def test_defaults_filled(self):
        norm = norm_minimal()
        assert norm["initial"] == {"shape": "straight", "velocity": "zero"}
        assert norm["solver"]["dt"] == "auto"
        assert norm["solver"]["cfl_number"] == 0.5
        assert norm["control"] == {"kind": "none"}
        assert norm["output"]["formats"] == ["csv"]
        assert norm["conventions"]["action_convention"] == "inverse"
        assert norm["conventions"]["mass_coefficient"] == "area"

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="unknown keys: gravity"):
            norm_minimal("\n[control]\ngravity = 9.81\n")
        with pytest.raises(ConfigError, match="rod.cylinder"):
            parse_scenario(MINIMAL.replace("[rod.explicit]", "[rod.cylinder]"))

    def test_missing_sections(self):
        with pytest.raises(ConfigError, match=r"missing required section \[stiffness\]"):
            parse_scenario("[rod]\nlength = 1.0\nn_nodes = 5\n[rod.explicit]\nmass = 1.0\ninertia = [1.0, 1.0, 1.0]\n[solver]\nt_end = 1.0\n")

    def test_missing_stiffness_key(self):
        with pytest.raises(ConfigError, match="stiffness"):
            parse_scenario(MINIMAL.replace("diagonal", "diag"))

    def test_unit_suffix_rejected(self):
        with pytest.raises(ConfigError, match="unit suffixes"):
            parse_scenario(MINIMAL.replace("length = 1.0", 'length = "1.0 m"'))

    def test_bad_enum(self):
        with pytest.raises(ConfigError, match="must be one of"):
            parse_scenario(MINIMAL.replace("[rod.explicit]", 'reference_curve = "helix"\n[rod.explicit]'))

    def test_invalid_toml(self):
        with pytest.raises(ConfigError, match="invalid TOML"):
            parse_scenario("rod = [")

    def test_screw_requires_twist(self):
        with pytest.raises(ConfigError, match="initial.twist"):
            norm_minimal('\n[initial]\nshape = "screw"\n')

    def test_round_trip_identity(self):
        norm = norm_minimal(
            "\n[initial]\nshape = \"bent\"\ntwist = [0.1, 0.0, 0.0, 0.0, 0.0, 0.0]\n"
            "\n[control]\nkind = \"cpg\"\n[control.cpg]\namplitude = 0.2\nfrequency = 3.0\nwavenumber = 6.0\n"
        )
        assert parse_scenario(serialize(norm)) == norm

    def test_cfl_bounds(self):
        with pytest.raises(ConfigError, match="cfl_number"):
            parse_scenario(MINIMAL.replace("t_end = 0.1", "t_end = 0.1\ncfl_number = 1.5"))


class TestBuild:
    def test_straight_default(self):
        setup = build(norm_minimal())
        assert setup.grid.n_nodes == 9
        assert np.array_equal(setup.state0.xi, np.zeros((9, 6)))
        assert np.array_equal(setup.state0.W, np.zeros((9, 6)))
        assert setup.control is None

    def test_bent_shape(self):
        setup = build(
            norm_minimal('\n[initial]\nshape = "bent"\ntwist = [0.2, 0.0, 0.0, 0.0, 0.0, 0.0]\n')
        )
        xi = setup.state0.xi
        assert np.array_equal(xi[0], np.zeros(6))
        assert np.array_equal(xi[-1], np.zeros(6))
        mid = setup.grid.n_nodes // 2
        assert xi[mid, 0] == pytest.approx(0.2, rel=1e-12)

    def test_screw_shape_pins_boundary(self):
        setup = build(
            norm_minimal('\n[initial]\nshape = "screw"\ntwist = [0.3, 0.0, 0.0, 0.0, 0.0, 0.0]\n')
        )
        assert np.array_equal(setup.state0.xi[0], np.zeros(6))
        assert setup.state0.xi[3, 0] == pytest.approx(0.3, rel=1e-10)
        assert any("reset to zero" in note for note in setup.notes)

    def test_uniform_velocity(self):
        setup = build(
            norm_minimal(
                '\n[initial]\nvelocity = "uniform"\nvelocity_twist = [0.1, 0.0, 0.0, 0.0, 0.0, 0.2]\n'
            )
        )
        assert np.allclose(setup.state0.W, np.tile([0.1, 0, 0, 0, 0, 0.2], (9, 1)))

    def test_files(self, tmp_path):
        grid_n = 9
        Xi = np.array([0.2, 0.0, 0.0, 0.0, 0.0, 0.1])
        z = np.linspace(0, 1, grid_n)
        g = se3.exp_se3(z[:, None] * Xi)
        q = se3.rotation_to_quaternion(se3.rotation(g))
        lines = ["qw,qx,qy,qz,ux,uy,uz"]
        for k in range(grid_n):
            lines.append(",".join(repr(float(v)) for v in np.concatenate([q[k], se3.translation(g)[k]])))
        (tmp_path / "poses.csv").write_text("\n".join(lines) + "\n")
        vel = ["wx,wy,wz,vx,vy,vz"] + ["0.0,0.0,0.0,0.0,0.0,0.1"] * grid_n
        (tmp_path / "vel.csv").write_text("\n".join(vel) + "\n")
        norm = norm_minimal(
            '\n[initial]\nshape = "file"\nfile = "poses.csv"\nvelocity = "file"\nvelocity_file = "vel.csv"\n'
        )
        setup = build(norm, base_dir=tmp_path)
        assert setup.state0.xi[4] == pytest.approx(Xi, rel=1e-8)
        assert np.allclose(setup.state0.W[:, 5], 0.1)

    def test_file_errors(self, tmp_path):
        (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
        norm = norm_minimal('\n[initial]\nshape = "file"\nfile = "bad.csv"\n')
        with pytest.raises(ConfigError, match="header"):
            build(norm, base_dir=tmp_path)
        norm = norm_minimal('\n[initial]\nshape = "file"\nfile = "missing.csv"\n')
        with pytest.raises(ConfigError):
            build(norm, base_dir=tmp_path)

    def test_cylinder_with_mass_coefficient(self):
        text = MINIMAL.replace(
            "[rod.explicit]\nmass = 1.0\ninertia = [0.01, 0.01, 0.02]",
            "[rod.cylinder]\nradius = 0.05\ndensity = 800.0",
        )
        area = build(parse_scenario(text))
        doubled = build(parse_scenario(text + '\n[conventions]\nmass_coefficient = "doubled"\n'))
        assert np.allclose(doubled.props.mass, 2.0 * area.props.mass)

    def test_invalid_stiffness_rejected_at_build(self):
        bad = MINIMAL.replace(
            "diagonal = [0.01, 0.01, 0.02, 10.0, 10.0, 10.0]",
            "diagonal = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0]",
        )
        with pytest.raises(ConfigError, match="stiffness"):
            build(parse_scenario(bad))

    def test_per_node_mass(self):
        text = MINIMAL.replace(
            "mass = 1.0", "mass = [1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 1.0, 1.0, 1.0]"
        )
        setup = build(parse_scenario(text))
        assert setup.props.mass[4] == 2.0

    def test_cpg_control_built(self):
        norm = norm_minimal(
            '\n[control]\nkind = "cpg"\n[control.cpg]\namplitude = 0.3\nfrequency = 2.0\nwavenumber = 6.28\n'
        )
        setup = build(norm)
        assert setup.control is not None and not setup.control.is_zero
        assert setup.control.params.component == "bend1"

    def test_load_scenario_from_file(self, tmp_path):
        path = tmp_path / "s.toml"
        path.write_text(MINIMAL)
        norm = load_scenario(path)
        assert norm["rod"]["n_nodes"] == 9
