"""Rod material data and inertia-operator tests."""

import numpy as np
import pytest

from snakerod import se3
from snakerod.rod import (
    Grid,
    RodProperties,
    apply_A,
    apply_A_inv,
    cylinder_properties,
    inertia_A,
    inertia_A_inv,
    inertia_matrix,
    inner_field,
    inner_z,
    kinetic_energy,
    klein_field,
    metric_e,
    trapezoid_weights,
    uniform_properties,
)

E1, E2, E3 = np.eye(3)


def straight_props(n=5, mass=2.0, inertia=(3.0, 3.0, 1.0), length=1.0):
    grid = Grid(n_nodes=n, length=length)
    return grid, uniform_properties(mass, inertia, grid)


def random_props(rng, count):
    B = rng.standard_normal((count, 3, 3))
    return RodProperties(
        mass=rng.uniform(0.5, 3.0, count),
        inertia=B @ np.swapaxes(B, -1, -2) + 0.5 * np.eye(3),
        p0=rng.standard_normal((count, 3)),
    )


class TestGrid:
    def test_nodes_uniform(self):
        grid = Grid(n_nodes=5, length=2.0)
        assert grid.dz == 0.5
        assert np.allclose(grid.nodes, [0, 0.5, 1.0, 1.5, 2.0])
        assert np.allclose(grid.midpoints, [0.25, 0.75, 1.25, 1.75])

    def test_rejects_small(self):
        with pytest.raises(ValueError):
            Grid(n_nodes=2, length=1.0)
        with pytest.raises(ValueError):
            Grid(n_nodes=5, length=0.0)

    def test_weights(self):
        grid = Grid(n_nodes=4, length=3.0)
        assert np.allclose(trapezoid_weights(grid), [0.5, 1.0, 1.0, 0.5])


class TestRodProperties:
    def test_validation(self):
        grid = Grid(n_nodes=3, length=1.0)
        with pytest.raises(ValueError, match="positive"):
            uniform_properties(-1.0, np.eye(3), grid)
        bad = np.broadcast_to(np.eye(3) + 0.1 * se3.hat(E1), (3, 3, 3)).copy()
        with pytest.raises(ValueError, match="symmetric"):
            RodProperties(mass=np.ones(3), inertia=bad, p0=np.zeros((3, 3)))
        with pytest.raises(ValueError, match="definite"):
            uniform_properties(1.0, np.diag([1.0, 1.0, -0.1]), grid)

    def test_reference_curves(self):
        grid = Grid(n_nodes=3, length=2.0)
        straight = uniform_properties(1.0, np.eye(3), grid, p0="straight")
        assert np.allclose(straight.p0[:, 2], grid.nodes)
        point = uniform_properties(1.0, np.eye(3), grid, p0="point")
        assert np.array_equal(point.p0, np.zeros((3, 3)))
        assert point.is_uniform() and not straight.is_uniform()


class TestInnerZ:
    def test_translation_only(self):
        grid, props = straight_props()
        V = se3.twist(np.zeros(3), E1)
        assert inner_z(2, V, V, props) == pytest.approx(2.0, abs=1e-15)

    def test_axis_rotation_orthogonal_to_translation(self):
        grid, props = straight_props()
        V = se3.twist(E3, np.zeros(3))  # spins about the rod axis: p0 x e3 = 0
        W = se3.twist(np.zeros(3), E1)
        assert inner_z(3, V, W, props) == pytest.approx(0.0, abs=1e-15)

    def test_zero(self):
        grid, props = straight_props()
        V = se3.twist(E2, E1)
        assert inner_z(1, V, np.zeros(6), props) == 0.0


class TestMetric:
    def test_constant_field(self):
        grid, props = straight_props(n=9, length=2.0)
        V = np.tile(se3.twist(np.zeros(3), E1), (9, 1))
        assert metric_e(V, V, props, grid) == pytest.approx(2.0 * inner_z(0, V[0], V[0], props))

    def test_zero_and_positive(self):
        rng = np.random.default_rng(10)
        grid = Grid(n_nodes=20, length=1.0)
        props = random_props(rng, 20)
        V = rng.standard_normal((20, 6))
        assert metric_e(np.zeros((20, 6)), V, props, grid) == 0.0
        assert metric_e(V, V, props, grid) > 0.0

    def test_kinetic_energy_examples(self):
        grid, props = straight_props(n=17, mass=2.0, length=1.5)
        assert kinetic_energy(np.zeros((17, 6)), props, grid) == 0.0
        v = np.array([0.3, -0.2, 0.7])
        W = np.tile(se3.twist(np.zeros(3), v), (17, 1))
        assert kinetic_energy(W, props, grid) == pytest.approx(0.5 * 1.5 * 2.0 * v @ v)
        W = np.tile(se3.twist(E3, np.zeros(3)), (17, 1))
        expected = 0.5 * 1.5 * (props.inertia[0] @ E3) @ E3
        assert kinetic_energy(W, props, grid) == pytest.approx(expected)

    def test_klein_field(self):
        grid = Grid(n_nodes=7, length=2.0)
        V = np.tile(se3.twist(E1, E2), (7, 1))
        W = np.tile(se3.twist(E2, E1), (7, 1))
        assert klein_field(V, W, grid) == pytest.approx(2.0 * se3.klein(V[0], W[0]))
        rot = np.tile(se3.twist(E1, np.zeros(3)), (7, 1))
        assert klein_field(rot, rot, grid) == 0.0


class TestInertiaOperator:
    def test_example_origin(self):
        grid = Grid(n_nodes=3, length=1.0)
        props = uniform_properties(2.0, np.diag([3.0, 3.0, 1.0]), grid, p0="point")
        out = inertia_A(1, se3.twist(np.zeros(3), E1), props)
        assert np.allclose(out, se3.twist(2.0 * E1, np.zeros(3)))

    def test_example_offset(self):
        grid, props = straight_props(n=3, mass=2.0, inertia=(3.0, 3.0, 1.0))
        z = props.p0[2, 2]
        V = se3.twist(np.zeros(3), E1)
        out = inertia_A(2, V, props)
        assert np.allclose(out, se3.twist(2.0 * E1, [0.0, 2.0 * z, 0.0]))
        assert se3.klein(out, V) == pytest.approx(inner_z(2, V, V, props))

    def test_zero_and_linearity(self):
        rng = np.random.default_rng(11)
        props = random_props(rng, 100)
        assert np.array_equal(apply_A(props, np.zeros((100, 6))), np.zeros((100, 6)))
        V, W = rng.standard_normal((2, 100, 6))
        lin = apply_A(props, 2.0 * V - 3.0 * W) - 2.0 * apply_A(props, V) + 3.0 * apply_A(props, W)
        assert np.max(np.abs(lin)) < 1e-12

    def test_duality_and_symmetry(self):
        rng = np.random.default_rng(12)
        props = random_props(rng, 1000)
        V, W = rng.standard_normal((2, 1000, 6))
        inner = inner_field(V, W, props)
        res = np.abs(se3.klein(apply_A(props, V), W) - inner) / np.maximum(np.abs(inner), 1.0)
        assert np.max(res) < 1e-12
        sym = se3.klein(apply_A(props, V), W) - se3.klein(apply_A(props, W), V)
        assert np.max(np.abs(sym) / np.maximum(np.abs(inner), 1.0)) < 1e-12

    def test_inverse_round_trip(self):
        rng = np.random.default_rng(13)
        props = random_props(rng, 1000)
        M = rng.standard_normal((1000, 6))
        res = apply_A(props, apply_A_inv(props, M)) - M
        assert np.max(np.abs(res) / np.maximum(np.abs(M), 1.0)) < 1e-10
        assert np.array_equal(apply_A_inv(props, np.zeros((1000, 6))), np.zeros((1000, 6)))

    def test_inverse_block_case(self):
        grid = Grid(n_nodes=3, length=1.0)
        props = uniform_properties(2.0, np.diag([3.0, 3.0, 1.0]), grid, p0="point")
        out = inertia_A_inv(0, se3.twist(2.0 * E1, np.zeros(3)), props)
        assert np.allclose(out, se3.twist(np.zeros(3), E1))

    def test_matrix_agrees_with_operator(self):
        rng = np.random.default_rng(14)
        props = random_props(rng, 10)
        V = rng.standard_normal(6)
        for i in range(10):
            assert np.allclose(inertia_matrix(props, i) @ V, inertia_A(i, V, props))


class TestCylinder:
    def test_uniform(self):
        grid = Grid(n_nodes=9, length=1.0)
        props = cylinder_properties(0.05, 800.0, grid)
        assert np.allclose(props.mass, np.pi * 0.05**2 * 800.0)
        assert np.allclose(props.inertia[0], props.inertia[4])
        eigs = np.linalg.eigvalsh(props.inertia)
        assert np.all(eigs > 0)

    def test_total_mass_quadrature(self):
        grid = Grid(n_nodes=33, length=2.0)
        rho = lambda z: 1000.0 * (1.0 + 0.5 * z)
        props = cylinder_properties(0.01, rho, grid)
        total = trapezoid_weights(grid) @ props.mass
        exact = np.pi * 0.01**2 * 1000.0 * (2.0 + 0.5 * 2.0)  # integral of rho over [0, 2]
        assert total == pytest.approx(exact, rel=1e-12)

    def test_mass_coefficient_switch(self):
        grid = Grid(n_nodes=5, length=1.0)
        area = cylinder_properties(0.02, 500.0, grid, mass_coefficient="area")
        doubled = cylinder_properties(0.02, 500.0, grid, mass_coefficient="doubled")
        assert np.allclose(doubled.mass, 2.0 * area.mass)
        with pytest.raises(ValueError):
            cylinder_properties(0.02, 500.0, grid, mass_coefficient="other")
