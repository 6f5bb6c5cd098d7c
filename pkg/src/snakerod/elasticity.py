"""Stiffness operator, strain field and elastic energy.

The stiffness is configured per node as a 6x6 matrix K mapping a strain
twist directly to the Klein-dual wrench twist N = K xi (the composition of
the inertia operator with the constitutive map).  In the wrench twist the
angular slot carries forces and the linear slot carries moments, so the
"diagonal" rod law (EI1, EI2, GJ, GA1, GA2, EA) is the K whose energy form
klein(K xi, xi) is exactly

    EI1 k1^2 + EI2 k2^2 + GJ k3^2 + GA1 e1^2 + GA2 e2^2 + EA e3^2.

The constitutive map itself is H = A^-1 K per node; the dynamics consumes
H(xi) and re-applies A where the equations require it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import se3
from .fd import sbp_diff
from .rod import Grid, RodProperties, inertia_matrices, metric_e, trapezoid_weights

STIFFNESS_SYMMETRY_TOL = 1e-10

# klein(X, Y) = X^T FLIP Y in [omega, v] coordinates.
KLEIN_FLIP = np.block([[np.zeros((3, 3)), np.eye(3)], [np.eye(3), np.zeros((3, 3))]])


class StiffnessLaw:
    """Validated per-node stiffness K (n, 6, 6) and derived H = A^-1 K."""

    def __init__(self, K: np.ndarray, props: RodProperties):
        K = np.asarray(K, dtype=float)
        n = props.n_nodes
        if K.shape == (6, 6):
            K = np.broadcast_to(K, (n, 6, 6)).copy()
        if K.shape != (n, 6, 6):
            raise ValueError("stiffness must be one 6x6 matrix or one per node")
        # Symmetry and positivity w.r.t. the Klein pairing, i.e. of the
        # elastic energy form K^T FLIP.
        S = np.swapaxes(K, -1, -2) @ KLEIN_FLIP
        scale = 1.0 + np.max(np.abs(S))
        sym = np.max(np.abs(S - np.swapaxes(S, -1, -2)))
        if sym > STIFFNESS_SYMMETRY_TOL * scale:
            raise ValueError(f"stiffness is not symmetric w.r.t. the Klein form (residual {sym:.3e})")
        eigs = np.linalg.eigvalsh(0.5 * (S + np.swapaxes(S, -1, -2)))
        if np.any(eigs[:, 0] <= 0.0):
            raise ValueError("stiffness must be positive definite w.r.t. the Klein form")
        self.K = K
        self.H = np.linalg.solve(inertia_matrices(props), K)

    @classmethod
    def diagonal(cls, moduli, props: RodProperties) -> "StiffnessLaw":
        """Build K from (EI1, EI2, GJ, GA1, GA2, EA)."""
        moduli = np.asarray(moduli, dtype=float)
        if moduli.shape != (6,):
            raise ValueError("diagonal stiffness needs 6 moduli (EI1, EI2, GJ, GA1, GA2, EA)")
        K = np.zeros((6, 6))
        K[:3, 3:] = np.diag(moduli[3:])  # forces from linear strain
        K[3:, :3] = np.diag(moduli[:3])  # moments from angular strain
        return cls(K, props)

    @property
    def n_nodes(self) -> int:
        return self.K.shape[0]


@dataclass(frozen=True)
class StrainField:
    """Strain sampled at nodes and at cell midpoints."""

    nodes: np.ndarray  # (n, 6)
    midpoints: np.ndarray  # (n-1, 6)


def strain(g: np.ndarray, grid: Grid) -> StrainField:
    """Left-trivialized z-derivative of a pose field by geometric finite
    differences; exact for one-parameter screw fields."""
    g = np.asarray(g, dtype=float)
    if g.shape != (grid.n_nodes, 4, 4):
        raise ValueError("pose field must have shape (n_nodes, 4, 4)")
    rel = se3.compose(se3.inverse(g[:-1]), g[1:])
    try:
        mid = se3.log_se3(rel) / grid.dz
    except ValueError as exc:
        raise ValueError(
            "adjacent poses differ by a rotation near pi; the mesh is too coarse to resolve this field"
        ) from exc
    return StrainField(nodes=nodes_from_midpoints(mid), midpoints=mid)


def midpoints_from_nodes(xi: np.ndarray) -> np.ndarray:
    return 0.5 * (xi[:-1] + xi[1:])


def nodes_from_midpoints(mid: np.ndarray) -> np.ndarray:
    n = mid.shape[0] + 1
    nodes = np.empty((n,) + mid.shape[1:])
    nodes[0] = mid[0]
    nodes[-1] = mid[-1]
    nodes[1:-1] = 0.5 * (mid[:-1] + mid[1:])
    return nodes


def apply_H(i: int, xi: np.ndarray, law: StiffnessLaw) -> np.ndarray:
    return law.H[i] @ np.asarray(xi, dtype=float)


def apply_H_field(law: StiffnessLaw, xi: np.ndarray) -> np.ndarray:
    return np.einsum("nij,nj->ni", law.H, xi)


def wrench_field(law: StiffnessLaw, xi: np.ndarray) -> np.ndarray:
    """Klein-dual wrench N = K xi at every node."""
    return np.einsum("nij,nj->ni", law.K, xi)


def elastic_energy(xi, law: StiffnessLaw, props: RodProperties, grid: Grid) -> float:
    """0.5 << H(xi), xi >>_e; zero iff the sampled strain vanishes."""
    if isinstance(xi, StrainField):
        xi = xi.nodes
    return 0.5 * metric_e(apply_H_field(law, xi), xi, props, grid)


def dU(g: np.ndarray, Z: np.ndarray, law: StiffnessLaw, props: RodProperties, grid: Grid) -> float:
    """Directional derivative of the elastic energy at g along the
    left-trivialized variation Z (one twist per node)."""
    xi = strain(g, grid).nodes
    N = wrench_field(law, xi)
    w = trapezoid_weights(grid)
    term_dz = w @ se3.klein(N, sbp_diff(np.asarray(Z, dtype=float), grid.dz))
    term_ad = w @ se3.klein(N, se3.bracket(xi, Z))
    return float(term_dz + term_ad)


def dU_by_parts(
    g: np.ndarray, Z: np.ndarray, law: StiffnessLaw, props: RodProperties, grid: Grid
) -> float:
    """Integrated-by-parts form of :func:`dU`: boundary pairing minus the
    z-derivative of the wrench field.  Coincides with the direct form to
    rounding when the difference stencil and quadrature are the matched
    pair used here."""
    Z = np.asarray(Z, dtype=float)
    xi = strain(g, grid).nodes
    N = wrench_field(law, xi)
    w = trapezoid_weights(grid)
    boundary = se3.klein(N[-1], Z[-1]) - se3.klein(N[0], Z[0])
    term_dz = -w @ se3.klein(sbp_diff(N, grid.dz), Z)
    term_ad = -w @ se3.klein(se3.bracket(xi, N), Z)
    return float(boundary + term_dz + term_ad)
