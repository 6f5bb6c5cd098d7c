"""Pointwise SE(3) / se(3) screw algebra.

Conventions used throughout the package:

* A twist is a length-6 array ``[wx, wy, wz, vx, vy, vz]`` (angular part
  first).  It is identified with the 4x4 matrix ``[[hat(w), v], [0, 0]]``.
* A pose is a 4x4 homogeneous matrix ``[[R, u], [0, 1]]`` acting on points
  as ``g(x) = R x + u``.
* Every function broadcasts over leading dimensions, so a field of n
  twists is an ``(n, 6)`` array and a field of n poses an ``(n, 4, 4)``
  array.

All operations are pure functions on ndarrays; there is no shared mutable
state and concurrent calls are safe.
"""

from __future__ import annotations

import numpy as np

# Tolerances are module constants; tests may monkeypatch them but library
# code must not.
ORTHOGONALITY_TOL = 1e-10
SKEW_TOL = 1e-10
SMALL_ANGLE = 1e-5
LOG_ANGLE_MARGIN = 1e-6
MAURER_CARTAN_TOL = 1e-8


def twist(omega, v) -> np.ndarray:
    """Assemble a twist from its angular and linear 3-vectors."""
    omega = np.asarray(omega, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.concatenate(np.broadcast_arrays(omega, v), axis=-1)


def angular(V: np.ndarray) -> np.ndarray:
    return np.asarray(V)[..., :3]


def linear(V: np.ndarray) -> np.ndarray:
    return np.asarray(V)[..., 3:]


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Componentwise cross product; avoids np.cross's axis plumbing,
    which dominates the solver's per-step cost on small fields."""
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    _cross_into(out, a, b)
    return out


def _cross_into(dst: np.ndarray, a: np.ndarray, b: np.ndarray) -> None:
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    dst[..., 0] = a1 * b2 - a2 * b1
    dst[..., 1] = a2 * b0 - a0 * b2
    dst[..., 2] = a0 * b1 - a1 * b0


def hat(omega: np.ndarray) -> np.ndarray:
    """Skew matrix of a 3-vector, satisfying hat(w) @ x == cross(w, x)."""
    omega = np.asarray(omega, dtype=float)
    A = np.zeros(omega.shape[:-1] + (3, 3))
    w1, w2, w3 = omega[..., 0], omega[..., 1], omega[..., 2]
    A[..., 0, 1] = -w3
    A[..., 0, 2] = w2
    A[..., 1, 0] = w3
    A[..., 1, 2] = -w1
    A[..., 2, 0] = -w2
    A[..., 2, 1] = w1
    return A


def vee(A: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Inverse of :func:`hat`.  Rejects matrices that are not skew."""
    A = np.asarray(A, dtype=float)
    if tol is None:
        tol = SKEW_TOL
    residual = np.max(np.abs(A + np.swapaxes(A, -1, -2)))
    if residual > tol * (1.0 + np.max(np.abs(A))):
        raise ValueError(f"vee: input is not skew-symmetric (residual {residual:.3e})")
    return np.stack([A[..., 2, 1], A[..., 0, 2], A[..., 1, 0]], axis=-1)


def se3_matrix(V: np.ndarray) -> np.ndarray:
    """4x4 matrix representation of a twist."""
    V = np.asarray(V, dtype=float)
    M = np.zeros(V.shape[:-1] + (4, 4))
    M[..., :3, :3] = hat(angular(V))
    M[..., :3, 3] = linear(V)
    return M


def pose(R, u) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    u = np.asarray(u, dtype=float)
    g = np.zeros(R.shape[:-2] + (4, 4))
    g[..., :3, :3] = R
    g[..., :3, 3] = u
    g[..., 3, 3] = 1.0
    return g


def identity_pose() -> np.ndarray:
    return np.eye(4)


def translate(v) -> np.ndarray:
    return pose(np.eye(3), v)


def rotation(g: np.ndarray) -> np.ndarray:
    return np.asarray(g)[..., :3, :3]


def translation(g: np.ndarray) -> np.ndarray:
    return np.asarray(g)[..., :3, 3]


def check_rotation(R: np.ndarray, tol: float | None = None) -> None:
    """Validate orthogonality and unit determinant."""
    R = np.asarray(R, dtype=float)
    if tol is None:
        tol = ORTHOGONALITY_TOL
    eye = np.broadcast_to(np.eye(3), R.shape)
    ortho = np.max(np.abs(np.swapaxes(R, -1, -2) @ R - eye))
    if ortho > tol:
        raise ValueError(f"rotation is not orthogonal (residual {ortho:.3e})")
    det = np.linalg.det(R)
    if np.max(np.abs(det - 1.0)) > tol:
        raise ValueError("rotation must have determinant 1")


def check_pose(g: np.ndarray, tol: float | None = None) -> None:
    g = np.asarray(g, dtype=float)
    check_rotation(rotation(g), tol)
    bottom = np.broadcast_to(np.array([0.0, 0.0, 0.0, 1.0]), g[..., 3, :].shape)
    if np.max(np.abs(g[..., 3, :] - bottom)) > (tol or ORTHOGONALITY_TOL):
        raise ValueError("pose must have homogeneous bottom row [0, 0, 0, 1]")


def compose(g1: np.ndarray, g2: np.ndarray) -> np.ndarray:
    return np.asarray(g1) @ np.asarray(g2)


def inverse(g: np.ndarray) -> np.ndarray:
    R = rotation(g)
    Rt = np.swapaxes(R, -1, -2)
    u = translation(g)
    return pose(Rt, -np.einsum("...ij,...j->...i", Rt, u))


def act(g: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Affine action of a pose on a point: R x + u."""
    return np.einsum("...ij,...j->...i", rotation(g), np.asarray(x, dtype=float)) + translation(g)


def adjoint(g: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Adjoint action Ad_g on a twist."""
    R = rotation(g)
    u = translation(g)
    w = np.einsum("...ij,...j->...i", R, angular(V))
    v = np.einsum("...ij,...j->...i", R, linear(V)) - cross(w, u)
    return twist(w, v)


def adjoint_matrix(g: np.ndarray) -> np.ndarray:
    """6x6 matrix of Ad_g in [omega, v] coordinates."""
    R = rotation(g)
    u = translation(g)
    M = np.zeros(np.asarray(g).shape[:-2] + (6, 6))
    M[..., :3, :3] = R
    M[..., 3:, 3:] = R
    M[..., 3:, :3] = hat(u) @ R
    return M


def bracket(V: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Lie bracket on se(3)."""
    V = np.asarray(V, dtype=float)
    W = np.asarray(W, dtype=float)
    out = np.empty(np.broadcast_shapes(V.shape, W.shape))
    _cross_into(out[..., :3], V[..., :3], W[..., :3])
    out[..., 3:] = cross(V[..., :3], W[..., 3:]) - cross(W[..., :3], V[..., 3:])
    return out


def klein(V: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Klein form: pairs the linear part of each twist with the angular
    part of the other.  Symmetric, Ad-invariant, indefinite."""
    return np.einsum("...i,...i->...", linear(V), angular(W)) + np.einsum(
        "...i,...i->...", linear(W), angular(V)
    )


def maurer_cartan(g: np.ndarray, R_dot: np.ndarray, u_dot: np.ndarray) -> np.ndarray:
    """Left-trivialize a tangent vector (R_dot, u_dot) at g.

    Requires R^T R_dot to be skew within MAURER_CARTAN_TOL, i.e. the
    tangent must actually be tangent to the rotation group at R.
    """
    R = rotation(g)
    Rt = np.swapaxes(R, -1, -2)
    Om = Rt @ np.asarray(R_dot, dtype=float)
    sym = np.max(np.abs(Om + np.swapaxes(Om, -1, -2)))
    if sym > MAURER_CARTAN_TOL * (1.0 + np.max(np.abs(Om))):
        raise ValueError(f"maurer_cartan: R_dot is not tangent at R (residual {sym:.3e})")
    skew = 0.5 * (Om - np.swapaxes(Om, -1, -2))
    w = np.stack([skew[..., 2, 1], skew[..., 0, 2], skew[..., 1, 0]], axis=-1)
    v = np.einsum("...ij,...j->...i", Rt, np.asarray(u_dot, dtype=float))
    return twist(w, v)


def _exp_coefficients(theta: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(sin t/t, (1-cos t)/t^2, (t-sin t)/t^3) with Taylor branches."""
    t2 = theta * theta
    small = theta < SMALL_ANGLE
    safe = np.where(small, 1.0, theta)
    half_sin = np.sin(0.5 * safe)
    a = np.where(small, 1.0 - t2 / 6.0 + t2 * t2 / 120.0, np.sin(safe) / safe)
    # 1 - cos t = 2 sin^2(t/2) avoids cancellation for moderate angles
    b = np.where(small, 0.5 - t2 / 24.0 + t2 * t2 / 720.0, 2.0 * half_sin * half_sin / (safe * safe))
    c = np.where(
        small,
        1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0,
        (safe - np.sin(safe)) / (safe * safe * safe),
    )
    return a, b, c


def exp_se3(V: np.ndarray) -> np.ndarray:
    """Exponential map se(3) -> SE(3) (Rodrigues rotation, closed-form
    translation)."""
    V = np.asarray(V, dtype=float)
    w = angular(V)
    v = linear(V)
    theta = np.linalg.norm(w, axis=-1)
    a, b, c = _exp_coefficients(theta)
    K = hat(w)
    K2 = K @ K
    eye = np.broadcast_to(np.eye(3), K.shape)
    R = eye + a[..., None, None] * K + b[..., None, None] * K2
    Vmat = eye + b[..., None, None] * K + c[..., None, None] * K2
    return pose(R, np.einsum("...ij,...j->...i", Vmat, v))


def log_se3(g: np.ndarray) -> np.ndarray:
    """Logarithm SE(3) -> se(3).  Rejects rotations with angle near pi."""
    g = np.asarray(g, dtype=float)
    R = rotation(g)
    u = translation(g)
    trace = np.trace(R, axis1=-2, axis2=-1)
    cos_theta = np.clip(0.5 * (trace - 1.0), -1.0, 1.0)
    theta = np.arccos(cos_theta)
    if np.any(theta >= np.pi - LOG_ANGLE_MARGIN):
        raise ValueError("log_se3: rotation angle too close to pi (singular input)")
    t2 = theta * theta
    small = theta < SMALL_ANGLE
    safe = np.where(small, 1.0, theta)
    # theta / (2 sin theta) and the V-inverse curvature coefficient.
    half_sin2 = np.sin(0.5 * safe) ** 2
    s = np.where(small, 0.5 + t2 / 12.0 + 7.0 * t2 * t2 / 720.0, safe / (2.0 * np.sin(safe)))
    d = np.where(
        small,
        1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0,
        (1.0 - safe * np.sin(safe) / (4.0 * half_sin2)) / (safe * safe),
    )
    skew = s[..., None, None] * (R - np.swapaxes(R, -1, -2))
    w = np.stack([skew[..., 2, 1], skew[..., 0, 2], skew[..., 1, 0]], axis=-1)
    K = hat(w)
    eye = np.broadcast_to(np.eye(3), K.shape)
    Vinv = eye - 0.5 * K + d[..., None, None] * (K @ K)
    return twist(w, np.einsum("...ij,...j->...i", Vinv, u))


def rotation_to_quaternion(R: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) of a rotation matrix, w >= 0."""
    R = np.asarray(R, dtype=float)
    shape = R.shape[:-2]
    Rf = R.reshape((-1, 3, 3))
    q = np.empty((Rf.shape[0], 4))
    for k, M in enumerate(Rf):
        t = np.trace(M)
        if t > 0.0:
            r = np.sqrt(1.0 + t)
            s = 0.5 / r
            q[k] = (0.5 * r, (M[2, 1] - M[1, 2]) * s, (M[0, 2] - M[2, 0]) * s, (M[1, 0] - M[0, 1]) * s)
        else:
            i = int(np.argmax(np.diagonal(M)))
            j, l = (i + 1) % 3, (i + 2) % 3
            r = np.sqrt(1.0 + M[i, i] - M[j, j] - M[l, l])
            s = 0.5 / r
            qv = np.empty(4)
            qv[0] = (M[l, j] - M[j, l]) * s
            qv[1 + i] = 0.5 * r
            qv[1 + j] = (M[j, i] + M[i, j]) * s
            qv[1 + l] = (M[l, i] + M[i, l]) * s
            q[k] = qv
        if q[k, 0] < 0.0:
            q[k] = -q[k]
    return q.reshape(shape + (4,))


def quaternion_to_rotation(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q, axis=-1, keepdims=True)
    w, x, y, z = np.moveaxis(q / n, -1, 0)
    R = np.empty(q.shape[:-1] + (3, 3))
    R[..., 0, 0] = 1 - 2 * (y * y + z * z)
    R[..., 0, 1] = 2 * (x * y - z * w)
    R[..., 0, 2] = 2 * (x * z + y * w)
    R[..., 1, 0] = 2 * (x * y + z * w)
    R[..., 1, 1] = 1 - 2 * (x * x + z * z)
    R[..., 1, 2] = 2 * (y * z - x * w)
    R[..., 2, 0] = 2 * (x * z - y * w)
    R[..., 2, 1] = 2 * (y * z + x * w)
    R[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return R
