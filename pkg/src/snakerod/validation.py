"""Independent verification oracles.

Everything here checks the solver against structure it does not share
with it: random-case algebraic identities, a discrete least-action
stationarity test built from pose snapshots alone, the single-body
geodesic reduction, the Koszul characterization of the connection, and
refinement studies for compatibility and power balance.

Oracles reuse only the se3 kernel and the energy functionals (the
Lagrangian data); velocity and strain of perturbed trajectories are
re-derived here from pose fields by geometric finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dynamics, se3
from .actuation import CpgLaw, CpgParams
from .elasticity import StiffnessLaw, dU, dU_by_parts, elastic_energy, strain
from .rod import (
    Grid,
    RodProperties,
    apply_A,
    apply_A_inv,
    inertia_matrix,
    inner_field,
    kinetic_energy,
    trapezoid_weights,
    uniform_properties,
)

ACTION_EPS_MIN = 1e-8
ACTION_EPS_MAX = 1e-3


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    bound: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.bound)

    def __str__(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{self.name:<44s} residual {self.residual:10.3e}  bound {self.bound:8.1e}  {tag}"


# ---------------------------------------------------------------------------
# trajectories


@dataclass
class Trajectory:
    """Uniformly time-sampled states of one run."""

    dt: float
    states: list[dynamics.SimState] = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    def poses(self, grid: Grid) -> np.ndarray:
        return np.stack([dynamics.reconstruct_poses(s, grid) for s in self.states])


def record_trajectory(
    state0: dynamics.SimState,
    dt: float,
    n_steps: int,
    props: RodProperties,
    law: StiffnessLaw,
    control,
    grid: Grid,
    scheme: str = "rk4",
) -> Trajectory:
    traj = Trajectory(dt=dt, states=[state0])
    for state in dynamics.iterate(state0, dt, n_steps, props, law, control, grid, scheme=scheme):
        traj.states.append(state)
    return traj


def discrete_action(traj: Trajectory, props: RodProperties, law: StiffnessLaw, grid: Grid) -> float:
    """Trapezoidal time quadrature of kinetic minus elastic energy."""
    lag = np.array(
        [
            kinetic_energy(s.W, props, grid) - elastic_energy(s.xi, law, props, grid)
            for s in traj.states
        ]
    )
    return float(np.trapezoid(lag, dx=traj.dt))


# ---------------------------------------------------------------------------
# pose-based action and its variation


def _strain_nodes_batch(poses: np.ndarray, grid: Grid) -> np.ndarray:
    """Node strain of a stack of pose fields (F, n, 4, 4) -> (F, n, 6)."""
    rel = se3.inverse(poses[:, :-1]) @ poses[:, 1:]
    mid = se3.log_se3(rel) / grid.dz
    nodes = np.empty(poses.shape[:1] + (grid.n_nodes, 6))
    nodes[:, 0] = mid[:, 0]
    nodes[:, -1] = mid[:, -1]
    nodes[:, 1:-1] = 0.5 * (mid[:, :-1] + mid[:, 1:])
    return nodes


def _velocity_batch(poses: np.ndarray, dt: float) -> np.ndarray:
    """Left-trivialized time derivative of a pose history (F, n, 4, 4) by
    centered geometric differences (one-sided at the time ends)."""
    W = np.empty(poses.shape[:2] + (6,))
    W[1:-1] = se3.log_se3(se3.inverse(poses[:-2]) @ poses[2:]) / (2.0 * dt)
    W[0] = se3.log_se3(se3.inverse(poses[0]) @ poses[1]) / dt
    W[-1] = se3.log_se3(se3.inverse(poses[-2]) @ poses[-1]) / dt
    return W


def _action_of_poses(
    poses: np.ndarray, dt: float, props: RodProperties, law: StiffnessLaw, grid: Grid
) -> float:
    W = _velocity_batch(poses, dt)
    xi = _strain_nodes_batch(poses, grid)
    w = trapezoid_weights(grid)
    nu = np.cross(W[..., :3], props.p0) + W[..., 3:]
    kin = 0.5 * (
        np.einsum("n,fn->f", w * props.mass, np.einsum("fni,fni->fn", nu, nu))
        + np.einsum("n,fn->f", w, np.einsum("fni,nij,fnj->fn", W[..., :3], props.inertia, W[..., :3]))
    )
    N = np.einsum("nij,fnj->fni", law.K, xi)
    ela = 0.5 * np.einsum("n,fn->f", w, se3.klein(N, xi))
    return float(np.trapezoid(kin - ela, dx=dt))


def action_variation(
    traj: Trajectory,
    Z: np.ndarray,
    epsilon: float,
    props: RodProperties,
    law: StiffnessLaw,
    grid: Grid,
) -> float:
    """Centered difference of the discrete action along the perturbation
    g -> g exp(eps Z); Z must vanish at the first and last time sample."""
    if not ACTION_EPS_MIN <= epsilon <= ACTION_EPS_MAX:
        raise ValueError(f"epsilon must lie in [{ACTION_EPS_MIN}, {ACTION_EPS_MAX}]")
    Z = np.asarray(Z, dtype=float)
    if np.any(Z[0] != 0.0) or np.any(Z[-1] != 0.0):
        raise ValueError("perturbation must vanish at the initial and final time")
    poses = traj.poses(grid)
    return _variation_of_poses(poses, traj.dt, Z, epsilon, props, law, grid)


def _variation_of_poses(poses, dt, Z, epsilon, props, law, grid) -> float:
    plus = poses @ se3.exp_se3(epsilon * Z)
    minus = poses @ se3.exp_se3(-epsilon * Z)
    s_plus = _action_of_poses(plus, dt, props, law, grid)
    s_minus = _action_of_poses(minus, dt, props, law, grid)
    return (s_plus - s_minus) / (2.0 * epsilon)


def admissible_perturbations(
    rng: np.random.Generator, times: np.ndarray, grid: Grid, count: int, degree: int = 3
) -> np.ndarray:
    """Smooth random perturbations: per-component polynomials in z times a
    bump in t that vanishes at both time ends.  Shape (count, n_t, n, 6)."""
    T = times[-1] - times[0]
    bump = np.sin(np.pi * (times - times[0]) / T) ** 2
    zh = grid.nodes / grid.length
    basis = np.stack([zh**d for d in range(degree + 1)])  # (deg+1, n)
    coeffs = rng.standard_normal((count, 6, degree + 1))
    profiles = np.einsum("kcd,dn->kcn", coeffs, basis)  # (count, 6, n)
    Z = np.einsum("t,kcn->ktnc", bump, profiles)
    Z[:, 0] = 0.0
    Z[:, -1] = 0.0
    return Z


# ---------------------------------------------------------------------------
# rigid single-body oracle


@dataclass
class RigidTrajectory:
    times: np.ndarray
    W: np.ndarray  # (n_t+1, 6)
    poses: np.ndarray  # (n_t+1, 4, 4)

    def momentum_body(self, inertia: np.ndarray) -> np.ndarray:
        return np.einsum("ij,tj->ti", np.asarray(inertia), self.W)

    def momentum_spatial(self, inertia: np.ndarray) -> np.ndarray:
        return se3.adjoint(self.poses, self.momentum_body(inertia))


def _dexpinv(theta: np.ndarray, y: np.ndarray) -> np.ndarray:
    b = se3.bracket(theta, y)
    return y + 0.5 * b + se3.bracket(theta, b) / 12.0


def euler_arnold_rigid(W0: np.ndarray, inertia: np.ndarray, t_end: float, dt: float) -> RigidTrajectory:
    """Free single body on SE(3): integrates M' = [M, W] with M = A W by
    RK4, co-integrating the pose with a 4th-order Munthe-Kaas update."""
    A = np.asarray(inertia, dtype=float)
    n_steps = int(round(t_end / dt))
    times = dt * np.arange(n_steps + 1)
    W = np.empty((n_steps + 1, 6))
    poses = np.empty((n_steps + 1, 4, 4))
    W[0] = np.asarray(W0, dtype=float)
    poses[0] = se3.identity_pose()
    M = A @ W[0]

    def mdot(M):
        return se3.bracket(M, np.linalg.solve(A, M))

    for k in range(n_steps):
        k1 = mdot(M)
        k2 = mdot(M + 0.5 * dt * k1)
        k3 = mdot(M + 0.5 * dt * k2)
        k4 = mdot(M + dt * k3)
        w1 = np.linalg.solve(A, M)
        w2 = np.linalg.solve(A, M + 0.5 * dt * k1)
        w3 = np.linalg.solve(A, M + 0.5 * dt * k2)
        w4 = np.linalg.solve(A, M + dt * k3)
        kap1 = w1
        kap2 = _dexpinv(0.5 * dt * kap1, w2)
        kap3 = _dexpinv(0.5 * dt * kap2, w3)
        kap4 = _dexpinv(dt * kap3, w4)
        theta = (dt / 6.0) * (kap1 + 2.0 * kap2 + 2.0 * kap3 + kap4)
        poses[k + 1] = poses[k] @ se3.exp_se3(theta)
        M = M + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        W[k + 1] = np.linalg.solve(A, M)
    return RigidTrajectory(times=times, W=W, poses=poses)


# ---------------------------------------------------------------------------
# Koszul / connection identity


@dataclass(frozen=True)
class ConnectionCheck:
    residual_standard: float
    residual_printed: float
    torsion_residual: float

    @property
    def standard_satisfies_koszul(self) -> bool:
        return self.residual_standard <= 1e-10


def connection_identity_check(V, W, U, inertia) -> ConnectionCheck:
    """Test two candidate formulas for the left-invariant connection
    against the Koszul formula evaluated on left-invariant fields (all
    metric Lie derivatives vanish).

    Candidate 'standard' halves all three terms; 'printed' halves only
    the bracket.  Also reports the torsion identity residual of the
    standard candidate.
    """
    A = np.asarray(inertia, dtype=float)
    V = np.asarray(V, dtype=float)
    W = np.asarray(W, dtype=float)
    U = np.asarray(U, dtype=float)

    def ip(X, Y):
        return se3.klein(A @ X, Y)

    def ad_star(X, Y):
        # <ad*_X Y, .> = <Y, [X, .]> ; explicitly A^-1 [A Y, X]
        return np.linalg.solve(A, se3.bracket(A @ Y, X))

    br = se3.bracket
    nab_std = 0.5 * (br(V, W) - ad_star(V, W) - ad_star(W, V))
    nab_prn = 0.5 * br(V, W) - ad_star(V, W) - ad_star(W, V)
    rhs = 0.5 * (ip(br(V, W), U) + ip(br(U, V), W) - ip(br(W, U), V))
    scale = max(abs(rhs), float(np.max(np.abs(V)) * np.max(np.abs(W)) * np.max(np.abs(U))), 1e-30)
    res_std = abs(ip(nab_std, U) - rhs) / scale
    res_prn = abs(ip(nab_prn, U) - rhs) / scale
    torsion = nab_std - (0.5 * (br(W, V) - ad_star(W, V) - ad_star(V, W))) - br(V, W)
    tor_res = float(np.max(np.abs(torsion))) / max(float(np.max(np.abs(br(V, W)))), 1e-30)
    return ConnectionCheck(
        residual_standard=float(res_std),
        residual_printed=float(res_prn),
        torsion_residual=tor_res,
    )


# ---------------------------------------------------------------------------
# study scenarios (uniform rods with node-independent inertia)


def demo_rod(
    n_nodes: int,
    length: float = 1.0,
    mass: float = 1.0,
    inertia=(0.01, 0.01, 0.02),
    moduli=(0.01, 0.01, 0.02, 10.0, 10.0, 10.0),
) -> tuple[Grid, RodProperties, StiffnessLaw]:
    """Uniform rod with constant reference point, the regime in which the
    semi-discrete equations conserve the discrete energy exactly."""
    grid = Grid(n_nodes=n_nodes, length=length)
    props = uniform_properties(mass, inertia, grid, p0="point")
    law = StiffnessLaw.diagonal(moduli, props)
    return grid, props, law


def bent_state(grid: Grid, twist: np.ndarray) -> dynamics.SimState:
    """Initial bend: strain profile twist * sin^2(pi z / L), compatible
    with the free-free boundary (vanishes at both ends) and spectrally
    smooth."""
    profile = np.sin(np.pi * grid.nodes / grid.length) ** 2
    xi0 = profile[:, None] * np.asarray(twist, dtype=float)
    xi0[0] = 0.0
    xi0[-1] = 0.0
    state = dynamics.rest_state(grid)
    return dynamics.with_fields(state, xi=xi0)


# ---------------------------------------------------------------------------
# refinement and conservation studies


@dataclass
class EnergyDriftResult:
    drifts: list[float]
    cfl_numbers: list[float]

    @property
    def reduction(self) -> float:
        return self.drifts[0] / self.drifts[1]


def energy_drift_study(
    n_nodes: int = 33,
    n_steps: int = 10_000,
    cfl_numbers=(0.5, 0.25),
    amplitude: float = 0.01,
    sample_stride: int = 5,
) -> EnergyDriftResult:
    """Free vibration of a uniform rod from a smooth bend; returns the
    relative energy drift at each CFL number (same step count)."""
    grid, props, law = demo_rod(n_nodes)
    state0 = bent_state(grid, np.array([amplitude, 0, 0, 0, 0, 0]))
    drifts = []
    for cfl in cfl_numbers:
        dt = dynamics.cfl_dt(props, law, grid, cfl)
        state = state0
        e0 = dynamics.total_energy(state, props, law, grid)
        worst = 0.0
        for k, state in enumerate(dynamics.iterate(state0, dt, n_steps, props, law, None, grid)):
            if (k + 1) % sample_stride == 0 or k + 1 == n_steps:
                e = dynamics.total_energy(state, props, law, grid)
                worst = max(worst, abs(e - e0))
        drifts.append(worst / max(e0, 1e-300))
    return EnergyDriftResult(drifts=drifts, cfl_numbers=list(cfl_numbers))


@dataclass
class RigidReductionResult:
    w_mismatch: float
    xi_max: float
    momentum_drift: float
    klein_drift: float


def rigid_reduction_study(
    t_end: float = 1.0,
    dt: float = 1e-3,
    n_nodes: int = 33,
    W0=(0.4, 0.7, -0.3, 0.2, -0.1, 0.15),
) -> RigidReductionResult:
    """Embed the free rigid body: zero strain, uniform velocity field.
    Every node must follow the single-body geodesic oracle."""
    grid, props, law = demo_rod(n_nodes, inertia=(0.1, 0.2, 0.3), moduli=(1, 1, 1, 2, 2, 2))
    W0 = np.asarray(W0, dtype=float)
    state = dynamics.with_fields(
        dynamics.rest_state(grid), W=np.tile(W0, (grid.n_nodes, 1))
    )
    A = inertia_matrix(props, 0)
    oracle = euler_arnold_rigid(W0, A, t_end, dt)
    mom0 = dynamics.spatial_momentum(state, props, grid)
    mom_scale = float(np.max(np.abs(mom0)))
    kl0 = se3.klein(A @ W0, A @ W0)

    n_steps = int(round(t_end / dt))
    w_mismatch = 0.0
    xi_max = 0.0
    momentum_drift = 0.0
    klein_drift = 0.0
    for k, state in enumerate(dynamics.iterate(state, dt, n_steps, props, law, None, grid)):
        w_mismatch = max(w_mismatch, float(np.max(np.abs(state.W - oracle.W[k + 1]))))
        xi_max = max(xi_max, float(np.max(np.abs(state.xi))))
        if (k + 1) % 50 == 0 or k + 1 == n_steps:
            mom = dynamics.spatial_momentum(state, props, grid)
            momentum_drift = max(momentum_drift, float(np.max(np.abs(mom - mom0))) / mom_scale)
            m_body = A @ state.W[0]
            klein_drift = max(klein_drift, abs(se3.klein(m_body, m_body) - kl0) / max(abs(kl0), 1e-30))
    return RigidReductionResult(
        w_mismatch=w_mismatch,
        xi_max=xi_max,
        momentum_drift=momentum_drift,
        klein_drift=klein_drift,
    )


@dataclass
class StationarityResult:
    rms_coarse: float
    rms_refined: float
    rms_corrupted: float

    @property
    def reduction(self) -> float:
        return self.rms_coarse / self.rms_refined

    @property
    def corruption_ratio(self) -> float:
        return self.rms_corrupted / self.rms_refined


def stationarity_study(
    seed: int = 2024,
    n_coarse: int = 17,
    steps_coarse: int = 200,
    count: int = 20,
    epsilon: float = 1e-5,
    amplitude: float = 0.3,
) -> StationarityResult:
    """Directional derivatives of the discrete action along random
    admissible perturbations, on a solver trajectory, its (dt/2, dz/2)
    refinement, and a corrupted copy of the coarse trajectory."""
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal((count, 6, 4))
    corrupt_coeffs = rng.standard_normal(6)

    def run_level(n_nodes, n_steps):
        grid, props, law = demo_rod(n_nodes, inertia=(1.0, 1.0, 2.0), moduli=(1, 1, 2, 4, 4, 4))
        dt = dynamics.cfl_dt(props, law, grid, 0.5)
        state0 = bent_state(grid, np.array([amplitude, 0, 0, 0, 0.1 * amplitude, 0]))
        traj = record_trajectory(state0, dt, n_steps, props, law, None, grid)
        return grid, props, law, traj

    def variations(grid, props, law, traj, poses=None):
        times = traj.times
        T = times[-1]
        bump = np.sin(np.pi * times / T) ** 2
        zh = grid.nodes / grid.length
        basis = np.stack([zh**d for d in range(4)])
        if poses is None:
            poses = traj.poses(grid)
        out = []
        for k in range(count):
            profile = np.einsum("cd,dn->nc", coeffs[k], basis)
            Z = bump[:, None, None] * profile[None, :, :]
            Z[0] = 0.0
            Z[-1] = 0.0
            out.append(_variation_of_poses(poses, traj.dt, Z, epsilon, props, law, grid))
        return np.array(out)

    grid_c, props_c, law_c, traj_c = run_level(n_coarse, steps_coarse)
    grid_r, props_r, law_r, traj_r = run_level(2 * n_coarse - 1, 2 * steps_coarse)
    v_coarse = variations(grid_c, props_c, law_c, traj_c)
    v_refined = variations(grid_r, props_r, law_r, traj_r)

    # corrupt the coarse poses with a smooth non-solution wiggle
    poses = traj_c.poses(grid_c)
    times = traj_c.times
    bump = np.sin(np.pi * times / times[-1]) ** 2
    wig = 0.05 * np.sin(2.0 * np.pi * grid_c.nodes / grid_c.length + 1.0)
    B = wig[:, None] * corrupt_coeffs[None, :]
    corrupted = poses @ se3.exp_se3(bump[:, None, None] * B[None, :, :])
    v_corrupt = variations(grid_c, props_c, law_c, traj_c, poses=corrupted)

    rms = lambda x: float(np.sqrt(np.mean(np.square(x))))
    return StationarityResult(
        rms_coarse=rms(v_coarse), rms_refined=rms(v_refined), rms_corrupted=rms(v_corrupt)
    )


@dataclass
class CompatibilityResult:
    errors: list[float]

    @property
    def orders(self) -> list[float]:
        return [float(np.log2(self.errors[i] / self.errors[i + 1])) for i in range(len(self.errors) - 1)]


def compatibility_study(
    levels: int = 3, base_n: int = 17, t_end: float = 0.5, amplitude: float = 0.2
) -> CompatibilityResult:
    """Evolve the strain two ways: as PDE state and as the strain of an
    independently time-integrated pose field; interior mismatch at t_end
    must shrink at 2nd order when dt and dz are halved together."""
    errors = []
    for lev in range(levels):
        n_nodes = (base_n - 1) * 2**lev + 1
        grid, props, law = demo_rod(n_nodes, inertia=(1.0, 1.0, 2.0), moduli=(1, 1, 2, 4, 4, 4))
        state = bent_state(grid, np.array([amplitude, 0, 0, 0, 0, 0]))
        dt_bound = dynamics.cfl_dt(props, law, grid, 0.4)
        if lev == 0:
            steps0 = int(np.ceil(t_end / dt_bound))
        steps = steps0 * 2**lev
        dt = t_end / steps
        gfield = dynamics.reconstruct_poses(state, grid)
        for _ in range(steps):
            t, W, xi = state.t, state.W, state.xi
            k1w, k1x = dynamics.rhs(t, W, xi, props, law, None, grid)
            k2w, k2x = dynamics.rhs(t + dt / 2, W + dt / 2 * k1w, xi + dt / 2 * k1x, props, law, None, grid)
            k3w, k3x = dynamics.rhs(t + dt / 2, W + dt / 2 * k2w, xi + dt / 2 * k2x, props, law, None, grid)
            k4w, k4x = dynamics.rhs(t + dt, W + dt * k3w, xi + dt * k3x, props, law, None, grid)
            # pose field advanced with the same stage velocities, nodewise
            y1, y2, y3, y4 = W, W + dt / 2 * k1w, W + dt / 2 * k2w, W + dt * k3w
            kap1 = y1
            kap2 = _dexpinv(dt / 2 * kap1, y2)
            kap3 = _dexpinv(dt / 2 * kap2, y3)
            kap4 = _dexpinv(dt * kap3, y4)
            theta = dt / 6 * (kap1 + 2 * kap2 + 2 * kap3 + kap4)
            gfield = gfield @ se3.exp_se3(theta)
            state = dynamics.SimState(
                t=t + dt,
                W=W + dt / 6 * (k1w + 2 * k2w + 2 * k3w + k4w),
                xi=xi + dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x),
                base_pose=state.base_pose,
            )
        recomputed = strain(gfield, grid).nodes
        errors.append(float(np.max(np.abs(recomputed[1:-1] - state.xi[1:-1]))))
    return CompatibilityResult(errors=errors)


@dataclass
class PowerBalanceResult:
    errors: list[float]
    scale: float

    @property
    def reductions(self) -> list[float]:
        return [self.errors[i] / self.errors[i + 1] for i in range(len(self.errors) - 1)]


def _simpson(y: np.ndarray, dx: float) -> float:
    if (len(y) - 1) % 2 != 0:
        raise ValueError("simpson needs an even number of intervals")
    return float(dx / 3.0 * (y[0] + y[-1] + 4.0 * np.sum(y[1:-1:2]) + 2.0 * np.sum(y[2:-2:2])))


def power_balance_study(
    levels: int = 2, base_n: int = 17, base_steps: int = 200, amplitude: float = 0.05
) -> PowerBalanceResult:
    """Driven rod: change in total energy vs the integrated instantaneous
    power of the active wrench."""
    errors = []
    scale = 0.0
    for lev in range(levels):
        n_nodes = (base_n - 1) * 2**lev + 1
        steps = base_steps * 2**lev
        grid, props, law = demo_rod(n_nodes, inertia=(1.0, 1.0, 2.0), moduli=(1, 1, 2, 4, 4, 4))
        control = CpgLaw(
            CpgParams(amplitude=amplitude, frequency=4.0, wavenumber=2 * np.pi, component="bend1"),
            grid,
        )
        dt = dynamics.cfl_dt(props, law, grid, 0.4)
        state = dynamics.rest_state(grid)
        e0 = dynamics.total_energy(state, props, law, grid)
        powers = [dynamics.power_input(state, props, law, control, grid)]
        for state in dynamics.iterate(state, dt, steps, props, law, control, grid):
            powers.append(dynamics.power_input(state, props, law, control, grid))
        e1 = dynamics.total_energy(state, props, law, grid)
        work = _simpson(np.array(powers), dt)
        errors.append(abs((e1 - e0) - work))
        scale = max(scale, abs(e1 - e0))
    return PowerBalanceResult(errors=errors, scale=scale)


# ---------------------------------------------------------------------------
# random-case algebra residuals (criterion-style batches)


def _random_twists(rng, count, scale=1.0):
    return scale * rng.standard_normal((count, 6))


def _random_poses(rng, count, max_angle=np.pi - 0.1):
    axis = rng.standard_normal((count, 3))
    axis /= np.linalg.norm(axis, axis=-1, keepdims=True)
    angle = rng.uniform(0.0, max_angle, count)
    w = axis * angle[:, None]
    v = rng.standard_normal((count, 3))
    return se3.exp_se3(se3.twist(w, v))


def _random_props(rng, count):
    mass = rng.uniform(0.5, 3.0, count)
    B = rng.standard_normal((count, 3, 3))
    inertia = B @ np.swapaxes(B, -1, -2) + 0.5 * np.eye(3)
    p0 = rng.standard_normal((count, 3))
    return RodProperties(mass=mass, inertia=inertia, p0=p0)


def algebra_suite(seed: int = 7, count: int = 1000) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    V = _random_twists(rng, count)
    W = _random_twists(rng, count)
    U = _random_twists(rng, count)
    g = _random_poses(rng, count)
    results = []

    w3 = rng.standard_normal((count, 3))
    x3 = rng.standard_normal((count, 3))
    hv = np.max(np.abs(se3.vee(se3.hat(w3)) - w3))
    results.append(CheckResult("hat/vee round trip", float(hv), 1e-14))
    cr = np.max(np.abs(np.einsum("nij,nj->ni", se3.hat(w3), x3) - np.cross(w3, x3)))
    results.append(CheckResult("hat action equals cross product", float(cr), 1e-13))

    kl = se3.klein(V, W)
    kl_ad = se3.klein(se3.adjoint(g, V), se3.adjoint(g, W))
    scale = np.maximum(np.abs(kl), 1.0)
    results.append(
        CheckResult("Klein Ad-invariance", float(np.max(np.abs(kl_ad - kl) / scale)), 1e-12)
    )

    lhs = se3.klein(se3.bracket(U, V), W)
    rhs = -se3.klein(se3.bracket(U, W), V)
    scale = np.maximum(np.abs(lhs), 1.0)
    results.append(
        CheckResult("bracket skew-symmetry w.r.t. Klein", float(np.max(np.abs(lhs - rhs) / scale)), 1e-12)
    )

    jac = (
        se3.bracket(U, se3.bracket(V, W))
        + se3.bracket(V, se3.bracket(W, U))
        + se3.bracket(W, se3.bracket(U, V))
    )
    norms = (
        np.linalg.norm(U, axis=-1) * np.linalg.norm(V, axis=-1) * np.linalg.norm(W, axis=-1)
    )
    results.append(
        CheckResult("Jacobi identity", float(np.max(np.linalg.norm(jac, axis=-1) / norms)), 1e-12)
    )

    # the commutator of the 4x4 representation pins sign and layout of the
    # bracket; symmetric identities alone cannot
    mv, mw = se3.se3_matrix(V), se3.se3_matrix(W)
    comm = mv @ mw - mw @ mv
    res = se3.se3_matrix(se3.bracket(V, W)) - comm
    results.append(
        CheckResult(
            "bracket equals matrix commutator",
            float(np.max(np.abs(res)) / max(float(np.max(np.abs(comm))), 1e-30)),
            1e-13,
        )
    )

    props = _random_props(rng, count)
    AV = apply_A(props, V)
    duality = se3.klein(AV, W) - inner_field(V, W, props)
    scale = np.maximum(np.abs(inner_field(V, W, props)), 1.0)
    results.append(
        CheckResult("inertia duality klein(AV,W)=<V,W>", float(np.max(np.abs(duality) / scale)), 1e-12)
    )

    axis = rng.standard_normal((count, 3))
    axis /= np.linalg.norm(axis, axis=-1, keepdims=True)
    wlog = axis * rng.uniform(0, 3.0, count)[:, None]
    Vlog = se3.twist(wlog, rng.standard_normal((count, 3)))
    rt = np.linalg.norm(se3.log_se3(se3.exp_se3(Vlog)) - Vlog, axis=-1)
    results.append(
        CheckResult(
            "exp/log round trip",
            float(np.max(rt / (1.0 + np.linalg.norm(Vlog, axis=-1)))),
            1e-9,
        )
    )

    gg = se3.compose(g, se3.inverse(g))
    results.append(
        CheckResult("compose(g, inverse(g)) = identity", float(np.max(np.abs(gg - np.eye(4)))), 1e-12)
    )
    return results


def koszul_suite(seed: int = 11, count: int = 200) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    props = _random_props(rng, 1)
    A = inertia_matrix(props, 0)
    worst_std = tor = 0.0
    prn = []
    for _ in range(count):
        V, W, U = rng.standard_normal((3, 6))
        chk = connection_identity_check(V, W, U, A)
        worst_std = max(worst_std, chk.residual_standard)
        prn.append(chk.residual_printed)
        tor = max(tor, chk.torsion_residual)
    typical_prn = float(np.median(prn))
    return [
        CheckResult("Koszul identity (all-halved connection)", worst_std, 1e-10),
        CheckResult("torsion-freeness", tor, 1e-12),
        # the bracket-only-halved variant must NOT satisfy Koszul: its
        # typical residual stays order one (individual triples may land
        # near its accidental null space)
        CheckResult("bracket-only variant rejected (inverse median residual)", 1.0 / max(typical_prn, 1e-300), 100.0),
    ]


def rod_suite(seed: int = 13, count: int = 1000) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    props = _random_props(rng, count)
    V = _random_twists(rng, count)
    W = _random_twists(rng, count)
    M = _random_twists(rng, count)
    results = []

    rt = apply_A(props, apply_A_inv(props, M)) - M
    scale = np.maximum(np.max(np.abs(M), axis=-1), 1.0)
    results.append(
        CheckResult("A(A^-1(M)) round trip", float(np.max(np.abs(rt) / scale[:, None])), 1e-10)
    )

    sym = se3.klein(apply_A(props, V), W) - se3.klein(apply_A(props, W), V)
    scale = np.maximum(np.abs(se3.klein(apply_A(props, V), W)), 1.0)
    results.append(CheckResult("A symmetric under Klein", float(np.max(np.abs(sym) / scale)), 1e-12))

    a, b = rng.standard_normal(2)
    lin = apply_A(props, a * V + b * W) - a * apply_A(props, V) - b * apply_A(props, W)
    results.append(CheckResult("A linearity", float(np.max(np.abs(lin))), 1e-12))

    pd = inner_field(V, V, props)
    results.append(
        CheckResult(
            "pointwise metric positive on nonzero twists (inverse min)",
            float(1.0 / max(np.min(pd), 1e-300)),
            1e9,
        )
    )
    return results


def elasticity_suite(seed: int = 17) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    grid, props, law = demo_rod(257, inertia=(1.0, 1.0, 2.0), moduli=(1, 1, 2, 4, 4, 4))
    results = []

    # strain exactness on a screw field
    Xi = np.array([0.3, -0.2, 0.1, 0.05, 0.0, 1.0])
    g = se3.exp_se3(grid.nodes[:, None] * Xi)
    sf = strain(g, grid)
    results.append(
        CheckResult(
            "strain exact on screw fields",
            float(max(np.max(np.abs(sf.nodes - Xi)), np.max(np.abs(sf.midpoints - Xi)))),
            1e-12,
        )
    )

    worst_forms = 0.0
    pairs = []
    eps = 1e-6
    for _ in range(20):
        xi0, Z = _smooth_fields(rng, grid, 2, scale=0.4)
        state = dynamics.with_fields(dynamics.rest_state(grid), xi=_clamp_ends(xi0))
        g = dynamics.reconstruct_poses(state, grid)
        analytic = dU(g, Z, law, props, grid)
        plus = elastic_energy(strain(g @ se3.exp_se3(eps * Z), grid).nodes, law, props, grid)
        minus = elastic_energy(strain(g @ se3.exp_se3(-eps * Z), grid).nodes, law, props, grid)
        fd = (plus - minus) / (2.0 * eps)
        pairs.append((analytic, fd))
        other = dU_by_parts(g, Z, law, props, grid)
        worst_forms = max(worst_forms, abs(analytic - other) / max(abs(analytic), 1e-12))
    results.append(CheckResult("dU matches finite differences of U", du_fd_relative_error(pairs), 1e-4))
    results.append(CheckResult("dU direct form = integrated-by-parts form", worst_forms, 1e-12))
    return results


def du_fd_relative_error(pairs) -> float:
    """Worst relative mismatch of (analytic, finite-difference) derivative
    pairs; a pair near a zero crossing of the derivative is measured
    against the batch RMS scale instead of its own near-zero value."""
    fd_scale = float(np.sqrt(np.mean([f * f for _, f in pairs])))
    return max(abs(a - f) / max(abs(f), fd_scale) for a, f in pairs)


def _smooth_fields(rng, grid: Grid, count: int, scale: float = 0.4, degree: int = 3):
    zh = grid.nodes / grid.length
    basis = np.stack([zh**d for d in range(degree + 1)])
    fields = np.einsum("kcd,dn->knc", scale * rng.standard_normal((count, 6, degree + 1)), basis)
    return fields if count > 1 else fields[0]


def _clamp_ends(xi: np.ndarray) -> np.ndarray:
    out = xi.copy()
    out[0] = 0.0
    out[-1] = 0.0
    return out


def rigid_suite() -> list[CheckResult]:
    res = rigid_reduction_study()
    return [
        CheckResult("rigid reduction: node W matches single-body oracle", res.w_mismatch, 1e-9),
        CheckResult("rigid reduction: strain stays zero", res.xi_max, 1e-10),
        CheckResult("rigid reduction: spatial momentum drift", res.momentum_drift, 1e-8),
        CheckResult("rigid reduction: klein(M,M) drift", res.klein_drift, 1e-8),
    ]


def energy_suite() -> list[CheckResult]:
    res = energy_drift_study()
    return [
        CheckResult("free vibration: relative energy drift", res.drifts[0], 1e-6),
        CheckResult("energy drift reduction at dt/2 (inverse ratio)", 1.0 / res.reduction, 1.0 / 8.0),
    ]


def stationarity_suite() -> list[CheckResult]:
    res = stationarity_study()
    return [
        CheckResult("action variation shrink on refinement (inverse)", 1.0 / res.reduction, 1.0 / 3.5),
        CheckResult("coarse variation within 10x of refined", res.reduction, 10.0),
        CheckResult(
            "corrupted trajectory rejected (inverse ratio)", 10.0 / res.corruption_ratio, 1.0
        ),
    ]


def compatibility_suite() -> list[CheckResult]:
    res = compatibility_study()
    return [
        CheckResult("strain evolution order (2 - measured)", 2.0 - min(res.orders), 0.2),
        CheckResult("strain mismatch at finest level", res.errors[-1], 1e-3),
    ]


def actuation_suite() -> list[CheckResult]:
    res = power_balance_study()
    floor = 1e-12 * max(res.scale, 1.0)
    reduction = res.errors[0] / max(res.errors[-1], floor)
    return [
        CheckResult("power balance error at base level", res.errors[0] / max(res.scale, 1e-300), 1e-3),
        CheckResult("power balance error reduction (inverse)", 1.0 / reduction, 1.0 / 3.0),
    ]


SUITES = {
    "algebra": algebra_suite,
    "rod": rod_suite,
    "elasticity": elasticity_suite,
    "rigid": rigid_suite,
    "energy": energy_suite,
    "stationarity": stationarity_suite,
    "koszul": koszul_suite,
    "compatibility": compatibility_suite,
    "actuation": actuation_suite,
}


def run_suites(names=None) -> tuple[dict[str, list[CheckResult]], bool]:
    if not names:
        names = list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown verification suites: {', '.join(unknown)}")
    results = {name: SUITES[name]() for name in names}
    ok = all(r.passed for rs in results.values() for r in rs)
    return results, ok
