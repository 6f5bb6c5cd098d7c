"""Rod material data and the kinetic pairing.

A rod is a uniform 1-D grid of cross-sections.  Each node i carries a mass
line-density m_i, a symmetric positive definite section inertia I_i and a
reference-curve point p0_i.  Together these define, per node, the kinetic
inner product on twists

    <V, W>_i = m_i (V(p0_i) . W(p0_i)) + w_V . I_i w_W,

where V(p) = w_V x p + v_V is the velocity a twist assigns to the material
point p.  The inertia operator A_i represents this inner product through
the Klein form: klein(A_i V, W) = <V, W>_i for every W.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclasses_field

import numpy as np

from . import se3

INERTIA_SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform grid of n_nodes cross-sections on [0, length]."""

    n_nodes: int
    length: float

    def __post_init__(self):
        if self.n_nodes < 3:
            raise ValueError("grid needs at least 3 nodes")
        if not (self.length > 0.0):
            raise ValueError("rod length must be positive")

    @property
    def dz(self) -> float:
        return self.length / (self.n_nodes - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.n_nodes)

    @property
    def midpoints(self) -> np.ndarray:
        z = self.nodes
        return 0.5 * (z[:-1] + z[1:])


def trapezoid_weights(grid: Grid) -> np.ndarray:
    w = np.full(grid.n_nodes, grid.dz)
    w[0] = w[-1] = 0.5 * grid.dz
    return w


@dataclass(frozen=True)
class RodProperties:
    """Per-node material data: mass (n,), inertia (n, 3, 3), p0 (n, 3)."""

    mass: np.ndarray
    inertia: np.ndarray
    p0: np.ndarray
    # set in __post_init__; not a constructor argument
    inertia_inv: np.ndarray = dataclasses_field(init=False, repr=False, default=None)

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=float)
        inertia = np.asarray(self.inertia, dtype=float)
        p0 = np.asarray(self.p0, dtype=float)
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "inertia", inertia)
        object.__setattr__(self, "p0", p0)
        n = mass.shape[0]
        if inertia.shape != (n, 3, 3) or p0.shape != (n, 3):
            raise ValueError("inconsistent per-node array shapes")
        if np.any(mass <= 0.0):
            raise ValueError("mass density must be positive at every node")
        sym = np.max(np.abs(inertia - np.swapaxes(inertia, -1, -2)))
        if sym > INERTIA_SYMMETRY_TOL * (1.0 + np.max(np.abs(inertia))):
            raise ValueError("section inertia must be symmetric")
        if np.any(np.linalg.eigvalsh(inertia)[:, 0] <= 0.0):
            raise ValueError("section inertia must be positive definite")
        object.__setattr__(self, "inertia_inv", np.linalg.inv(inertia))

    @property
    def n_nodes(self) -> int:
        return self.mass.shape[0]

    def is_uniform(self, tol: float = 0.0) -> bool:
        """True when every node carries the same (m, I, p0), i.e. the
        inertia operator does not vary along the rod."""
        return (
            np.max(np.abs(self.mass - self.mass[0])) <= tol
            and np.max(np.abs(self.inertia - self.inertia[0])) <= tol
            and np.max(np.abs(self.p0 - self.p0[0])) <= tol
        )


def uniform_properties(mass: float, inertia, grid: Grid, p0=None) -> RodProperties:
    """Constant material data; p0 may be "straight" ((0,0,z), default),
    "point" ((0,0,0)) or an explicit (n, 3) array."""
    n = grid.n_nodes
    inertia = np.asarray(inertia, dtype=float)
    if inertia.shape == (3,):
        inertia = np.diag(inertia)
    return RodProperties(
        mass=np.full(n, float(mass)),
        inertia=np.broadcast_to(inertia, (n, 3, 3)).copy(),
        p0=reference_curve(p0 if p0 is not None else "straight", grid),
    )


def reference_curve(choice, grid: Grid) -> np.ndarray:
    if isinstance(choice, str):
        if choice == "straight":
            p0 = np.zeros((grid.n_nodes, 3))
            p0[:, 2] = grid.nodes
            return p0
        if choice == "point":
            return np.zeros((grid.n_nodes, 3))
        raise ValueError(f"unknown reference curve {choice!r}")
    p0 = np.asarray(choice, dtype=float)
    if p0.shape != (grid.n_nodes, 3):
        raise ValueError("explicit reference curve must have shape (n_nodes, 3)")
    return p0


def cylinder_properties(
    radius: float,
    rho0,
    grid: Grid,
    mass_coefficient: str = "area",
    p0=None,
) -> RodProperties:
    """Circular-section helper.

    mass per length is coeff * R^2 * rho0(z) with coeff = pi for
    ``mass_coefficient="area"`` (the cross-section area) or 2*pi for
    ``"doubled"``.  Section inertia defaults to the solid-disc values
    diag(pi R^4 rho0 / 4, pi R^4 rho0 / 4, pi R^4 rho0 / 2).
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    if mass_coefficient == "area":
        coeff = np.pi
    elif mass_coefficient == "doubled":
        coeff = 2.0 * np.pi
    else:
        raise ValueError("mass_coefficient must be 'area' or 'doubled'")
    z = grid.nodes
    rho = np.asarray(rho0(z) if callable(rho0) else rho0, dtype=float)
    rho = np.broadcast_to(rho, (grid.n_nodes,)).astype(float)
    if np.any(rho <= 0.0):
        raise ValueError("density must be positive")
    mass = coeff * radius**2 * rho
    i_diag = np.pi * radius**4 * rho[:, None] * np.array([0.25, 0.25, 0.5])
    inertia = np.zeros((grid.n_nodes, 3, 3))
    inertia[:, [0, 1, 2], [0, 1, 2]] = i_diag
    return RodProperties(mass=mass, inertia=inertia, p0=reference_curve(p0 if p0 is not None else "straight", grid))


def twist_point_velocity(V: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Velocity a twist assigns to the material point p: w x p + v."""
    return np.cross(se3.angular(V), np.asarray(p, dtype=float)) + se3.linear(V)


def inner_z(i: int, V: np.ndarray, W: np.ndarray, props: RodProperties) -> float:
    """Pointwise kinetic inner product at node i."""
    nu_v = twist_point_velocity(V, props.p0[i])
    nu_w = twist_point_velocity(W, props.p0[i])
    return float(
        props.mass[i] * np.dot(nu_v, nu_w)
        + np.dot(se3.angular(V), props.inertia[i] @ se3.angular(W))
    )


def inner_field(V: np.ndarray, W: np.ndarray, props: RodProperties) -> np.ndarray:
    """<V_i, W_i>_i at every node; V, W are (n, 6) fields."""
    nu_v = se3.cross(se3.angular(V), props.p0) + se3.linear(V)
    nu_w = se3.cross(se3.angular(W), props.p0) + se3.linear(W)
    rot = np.einsum("ni,nij,nj->n", se3.angular(V), props.inertia, se3.angular(W))
    return props.mass * np.einsum("ni,ni->n", nu_v, nu_w) + rot


def metric_e(V: np.ndarray, W: np.ndarray, props: RodProperties, grid: Grid) -> float:
    """Kinetic metric at the identity: trapezoidal quadrature of the
    pointwise inner product."""
    return float(trapezoid_weights(grid) @ inner_field(V, W, props))


def kinetic_energy(W: np.ndarray, props: RodProperties, grid: Grid) -> float:
    return 0.5 * metric_e(W, W, props, grid)


def klein_field(V: np.ndarray, W: np.ndarray, grid: Grid) -> float:
    """Integrated Klein pairing of two twist fields."""
    return float(trapezoid_weights(grid) @ se3.klein(V, W))


def apply_A(props: RodProperties, V: np.ndarray) -> np.ndarray:
    """Inertia operator applied nodewise to a twist field (n, 6).

    Defined by the two conditions A(V)(p0) = I w_V and w_{A(V)} = m V(p0);
    equivalently klein(A(V), W) = <V, W> for every W.
    """
    V = np.asarray(V, dtype=float)
    w = V[..., :3]
    out = np.empty(np.broadcast_shapes(V.shape[:-1], props.p0.shape[:-1]) + (6,))
    nu = se3.cross(w, props.p0) + V[..., 3:]
    w_a = props.mass[..., None] * nu
    out[..., :3] = w_a
    out[..., 3:] = np.einsum("...ij,...j->...i", props.inertia, w) - se3.cross(w_a, props.p0)
    return out


def apply_A_inv(props: RodProperties, M: np.ndarray) -> np.ndarray:
    """Inverse of :func:`apply_A`, in closed form."""
    M = np.asarray(M, dtype=float)
    out = np.empty(np.broadcast_shapes(M.shape[:-1], props.p0.shape[:-1]) + (6,))
    nu = M[..., :3] / props.mass[..., None]
    rhs = M[..., 3:] + se3.cross(M[..., :3], props.p0)
    w = np.einsum("...ij,...j->...i", props.inertia_inv, rhs)
    out[..., :3] = w
    out[..., 3:] = nu - se3.cross(w, props.p0)
    return out


def inertia_A(i: int, V: np.ndarray, props: RodProperties) -> np.ndarray:
    return apply_A(_node_view(props, i), np.asarray(V, dtype=float))


def inertia_A_inv(i: int, M: np.ndarray, props: RodProperties) -> np.ndarray:
    return apply_A_inv(_node_view(props, i), np.asarray(M, dtype=float))


class _NodeProps:
    """Single-node view feeding the nodewise operators into the batch code."""

    __slots__ = ("mass", "inertia", "inertia_inv", "p0")

    def __init__(self, mass, inertia, inertia_inv, p0):
        self.mass = np.asarray(mass, dtype=float)
        self.inertia = np.asarray(inertia, dtype=float)
        self.inertia_inv = np.asarray(inertia_inv, dtype=float)
        self.p0 = np.asarray(p0, dtype=float)


def _node_view(props: RodProperties, i: int) -> _NodeProps:
    return _NodeProps(props.mass[i], props.inertia[i], props.inertia_inv[i], props.p0[i])


def inertia_matrix(props: RodProperties, i: int) -> np.ndarray:
    """6x6 matrix of A_i in [omega, v] coordinates."""
    m = props.mass[i]
    I = props.inertia[i]
    P = se3.hat(props.p0[i])
    A = np.zeros((6, 6))
    A[:3, :3] = -m * P
    A[:3, 3:] = m * np.eye(3)
    A[3:, :3] = I - m * (P @ P)
    A[3:, 3:] = m * P
    return A


def inertia_matrices(props: RodProperties) -> np.ndarray:
    """(n, 6, 6) stack of the nodewise inertia matrices."""
    m = props.mass[:, None, None]
    P = se3.hat(props.p0)
    A = np.zeros((props.n_nodes, 6, 6))
    A[:, :3, :3] = -m * P
    A[:, :3, 3:] = m * np.eye(3)
    A[:, 3:, :3] = props.inertia - m * (P @ P)
    A[:, 3:, 3:] = m * P
    return A
