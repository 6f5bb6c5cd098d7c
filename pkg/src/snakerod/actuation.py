"""Active constitutive laws.

A control law adds an active contribution u to the passive response H(xi)
wherever the dynamics consumes it (both the z-derivative term and the
bracket term of the equations of motion).  The solver differentiates the
total wrench in z itself; a law is never asked for its own spatial
derivative.

The local contract is ``law(t, i, xi_i, xi_dot_i) -> twist`` in the same
coordinates as H(xi).  Laws may instead override :meth:`ControlLaw.contribution`
to read the whole (xi, xi_dot) fields at once (non-local feedback).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elasticity import StiffnessLaw, apply_H
from .rod import Grid, RodProperties

# Component names of the active twist in [omega, v] layout.
COMPONENT_INDEX = {
    "bend1": 0,
    "bend2": 1,
    "twist": 2,
    "shear1": 3,
    "shear2": 4,
    "stretch": 5,
}


class ControlLaw:
    """Base class; subclasses implement the local per-node contract."""

    name = "control"
    is_zero = False

    def __call__(self, t: float, i: int, xi_i: np.ndarray, xi_dot_i: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contribution(
        self,
        t: float,
        grid: Grid,
        props: RodProperties,
        xi: np.ndarray,
        xi_dot: np.ndarray,
    ) -> np.ndarray:
        out = np.empty_like(xi)
        for i in range(xi.shape[0]):
            out[i] = self(t, i, xi[i], xi_dot[i])
        return out


class ZeroControl(ControlLaw):
    name = "zero"
    is_zero = True

    def __call__(self, t, i, xi_i, xi_dot_i):
        return np.zeros(6)

    def contribution(self, t, grid, props, xi, xi_dot):
        return np.zeros_like(xi)


@dataclass(frozen=True)
class CpgParams:
    """Traveling-wave pattern generator.

    amplitude is applied directly in the selected component of the active
    twist (the coordinates of H(xi)); frequency is temporal (rad/s),
    wavenumber spatial (rad/m).
    """

    amplitude: float
    frequency: float
    wavenumber: float
    component: str = "bend1"
    phase: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0.0:
            raise ValueError("CPG amplitude must be nonnegative")
        if self.component not in COMPONENT_INDEX:
            raise ValueError(f"unknown CPG component {self.component!r}")


class CpgLaw(ControlLaw):
    """Feed-forward wave amplitude*sin(freq*t - k*z + phase) in one twist
    component; independent of the strain state."""

    name = "cpg"

    def __init__(self, params: CpgParams, grid: Grid):
        self.params = params
        self.z = grid.nodes
        self.is_zero = params.amplitude == 0.0
        self._basis = np.zeros(6)
        self._basis[COMPONENT_INDEX[params.component]] = 1.0

    def _wave(self, t: float, z) -> np.ndarray:
        p = self.params
        return p.amplitude * np.sin(p.frequency * t - p.wavenumber * np.asarray(z) + p.phase)

    def __call__(self, t, i, xi_i, xi_dot_i):
        return self._wave(t, self.z[i]) * self._basis

    def contribution(self, t, grid, props, xi, xi_dot):
        return self._wave(t, self.z)[:, None] * self._basis


def cpg_law(params: CpgParams, grid: Grid) -> CpgLaw:
    return CpgLaw(params, grid)


def total_wrench(
    t: float,
    i: int,
    xi_i: np.ndarray,
    xi_dot_i: np.ndarray,
    law: StiffnessLaw,
    control: ControlLaw | None,
) -> np.ndarray:
    """Passive response plus active contribution at one node.

    The zero law is skipped entirely so that the controlled path is
    bit-identical to the passive one (adding 0.0 flips IEEE zero signs).
    """
    passive = apply_H(i, xi_i, law)
    if control is None or control.is_zero:
        return passive
    u = control(t, i, xi_i, xi_dot_i)
    if not np.all(np.isfinite(u)):
        raise FloatingPointError(f"control law '{control.name}' returned a non-finite wrench")
    return passive + u
