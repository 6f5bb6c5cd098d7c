"""Spatial difference stencils on the uniform grid.

Both stencils act along axis 0 of an (n, ...) node array.  The interior is
the 2nd-order central difference.  The boundary rows of :func:`sbp_diff`
are the one-sided closure that satisfies a discrete integration-by-parts
identity against the trapezoid weights; this is also what the odd ghost
extension of the dynamics reduces to.
"""

from __future__ import annotations

import numpy as np


def central_interior(F: np.ndarray, dz: float) -> np.ndarray:
    """Central differences at interior nodes; boundary rows left at zero."""
    out = np.zeros_like(F)
    out[1:-1] = (F[2:] - F[:-2]) / (2.0 * dz)
    return out


def sbp_diff(F: np.ndarray, dz: float) -> np.ndarray:
    out = central_interior(F, dz)
    out[0] = (F[1] - F[0]) / dz
    out[-1] = (F[-1] - F[-2]) / dz
    return out
