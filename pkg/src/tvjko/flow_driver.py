"""Iterated steps to a time horizon, with interpolation and diagnostics.

The trajectory keeps every density plus per-step records: transport
increment, energies, bounds, certificate metrics, and the discrete
trace of the map identity (each step's displacement against the second
difference of its dual field).  Diagnostics never gate the run; only a
step that fails its certificate aborts the flow, and then the partial
trajectory is still returned with the cause attached.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid_density import GridSpec, GridDensity, total_variation
from .certificate import DualCertificate
from .jko_solver import JkoConfig, jko_step

# zero-trace tolerance for admissible space-time test functions
TRACE_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class FlowStepDiagnostics:
    step_index: int
    w2sq_increment: float
    tv_value: float
    energy: float
    min_rho: float
    max_rho: float
    certificate: DualCertificate
    grad_div_z_l2: float
    eulerk2_residual: float
    iterations_used: int
    converged: bool


@dataclass(frozen=True, eq=False)
class FlowTrajectory:
    tau: float
    horizon: float
    densities: tuple
    steps: tuple
    sum_w2sq: float
    completed: bool
    abort_reason: str | None

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    def times(self) -> np.ndarray:
        return self.tau * np.arange(len(self.densities))


def _second_difference(z: np.ndarray, dx: float) -> np.ndarray:
    """(z[j+1] - 2 z[j] + z[j-1]) / dx^2 at interior interfaces."""
    return (z[2:] - 2.0 * z[1:-1] + z[:-2]) / (dx * dx)


def _map_identity_residual(rho1: GridDensity, map_values, z, tau, support) -> float:
    """Worst deviation of displacement = -tau z'' across supported interfaces.

    The displacement is taken in trapezoid form so that, cell pair by
    cell pair, the comparison is algebraically tied to the step's
    stationarity residuals rather than to an extra O(dx) interpolation.
    """
    dx = rho1.grid.dx
    disp = rho1.grid.centers - map_values
    lhs = 0.5 * (disp[:-1] + disp[1:]) + tau * _second_difference(z, dx)
    both = support[:-1] & support[1:]
    if not np.any(both):
        return 0.0
    return float(np.max(np.abs(lhs[both])))


def run_flow(rho0: GridDensity, tau: float, horizon: float,
             config: JkoConfig | None = None) -> FlowTrajectory:
    """floor(horizon/tau) warm-started steps; aborts on a failed certificate."""
    if config is None:
        config = JkoConfig(tau=tau)
    if config.tau != tau:
        raise ValueError("config.tau disagrees with tau")
    if horizon < tau:
        raise ValueError("horizon must cover at least one step")
    n_target = int(np.floor(horizon / tau + 1e-12))
    densities = [rho0]
    steps = []
    sum_w2sq = 0.0
    completed = True
    abort_reason = None
    prev = rho0
    for k in range(1, n_target + 1):
        res = jko_step(prev, config)
        cert = res.certificate
        z = cert.z_values
        dx = prev.grid.dx
        diag = FlowStepDiagnostics(
            step_index=k,
            w2sq_increment=res.transport.w2_squared,
            tv_value=total_variation(res.rho1),
            energy=res.energy,
            min_rho=float(res.rho1.values.min()),
            max_rho=float(res.rho1.values.max()),
            certificate=cert,
            grad_div_z_l2=float(np.sum(_second_difference(z, dx) ** 2) * dx),
            eulerk2_residual=_map_identity_residual(
                res.rho1, res.transport.map_values, z, tau, cert.support_mask),
            iterations_used=res.iterations_used,
            converged=res.converged,
        )
        if not res.converged:
            completed = False
            abort_reason = (f"step {k} failed its certificate after "
                            f"{res.iterations_used} iterations")
            break
        densities.append(res.rho1)
        steps.append(diag)
        sum_w2sq += res.transport.w2_squared
        prev = res.rho1
    return FlowTrajectory(tau=tau, horizon=horizon, densities=tuple(densities),
                          steps=tuple(steps), sum_w2sq=sum_w2sq,
                          completed=completed, abort_reason=abort_reason)


def interpolate(traj: FlowTrajectory, t: float) -> GridDensity:
    """Piecewise-constant in time: the step-(k+1) density on (k tau, (k+1) tau]."""
    if not (0.0 <= t <= traj.horizon):
        raise ValueError(f"t = {t} outside [0, {traj.horizon}]")
    if t == 0.0:
        return traj.densities[0]
    k = int(np.ceil(t / traj.tau - 1e-12))
    return traj.densities[min(k, len(traj.densities) - 1)]


@dataclass(frozen=True)
class SpaceTimeTestFunction:
    """u(t, x) with closed-form time and space partials, vanishing at
    t = horizon and on the spatial boundary."""

    name: str
    u: Callable
    du_dt: Callable
    du_dx: Callable


def test_function_family(grid: GridSpec, horizon: float,
                         version: str = "poly_bump_v1") -> list:
    """Fixed separable family (1 - t/T)^p * bump_q(x); versioned so that
    residual numbers are reproducible against the same solver output."""
    if version != "poly_bump_v1":
        raise ValueError(f"unknown test function family {version!r}")
    left, width = grid.left, grid.right - grid.left
    T = float(horizon)

    def make(p, q):
        def s_of(x):
            return (np.asarray(x, dtype=float) - left) / width

        def u(t, x):
            s = s_of(x)
            return (1.0 - t / T) ** p * s ** (2 + q) * (1.0 - s) ** 2

        def du_dt(t, x):
            s = s_of(x)
            return (-p / T) * (1.0 - t / T) ** (p - 1) * s ** (2 + q) * (1.0 - s) ** 2

        def du_dx(t, x):
            s = s_of(x)
            core = (2 + q) * s ** (1 + q) * (1.0 - s) ** 2 - 2.0 * s ** (2 + q) * (1.0 - s)
            return (1.0 - t / T) ** p * core / width

        return SpaceTimeTestFunction(f"poly_bump_v1_p{p}q{q}", u, du_dt, du_dx)

    family = [make(p, q) for p in (1, 2) for q in range(5)]
    zero = lambda t, x: np.zeros_like(np.asarray(x, dtype=float))
    family.append(SpaceTimeTestFunction("poly_bump_v1_zero", zero, zero, zero))
    return family


def _validate_test_function(tf: SpaceTimeTestFunction, grid: GridSpec,
                            horizon: float) -> None:
    ends = np.array([grid.left, grid.right])
    terminal = np.max(np.abs(tf.u(horizon, grid.centers)))
    if terminal > TRACE_ATOL:
        raise ValueError(f"{tf.name}: must vanish at t = horizon, max {terminal}")
    for t in (0.0, 0.5 * horizon, horizon):
        trace = np.max(np.abs(tf.u(t, ends)))
        if trace > TRACE_ATOL:
            raise ValueError(f"{tf.name}: must vanish on the boundary, max {trace}")


def weak_residuals(traj: FlowTrajectory, family=None) -> dict:
    """Per-test-function residual of the time-interpolated weak form.

    For each u:  sum_k tau * int(du_dt(t_mid) rho_{k+1}
                               - rhobar z'' du_dx(t_mid))
                 + int u(0, .) rho_0,
    with midpoint-in-time sampling and the dual field z of step k+1;
    rhobar averages the two cells adjacent to each interface.
    """
    grid = traj.densities[0].grid
    if family is None:
        family = test_function_family(grid, traj.horizon)
    dx = grid.dx
    x = grid.centers
    xi = grid.interfaces[1:-1]
    out = {}
    for tf in family:
        _validate_test_function(tf, grid, traj.horizon)
        total = float(np.sum(tf.u(0.0, x) * traj.densities[0].values) * dx)
        for k, diag in enumerate(traj.steps):
            t_mid = (k + 0.5) * traj.tau
            rho = traj.densities[k + 1].values
            total += traj.tau * float(np.sum(tf.du_dt(t_mid, x) * rho) * dx)
            zdd = _second_difference(diag.certificate.z_values, dx)
            rho_bar = 0.5 * (rho[:-1] + rho[1:])
            total -= traj.tau * float(np.sum(rho_bar * zdd * tf.du_dx(t_mid, xi)) * dx)
        out[tf.name] = total
    return out


def weak_solution_residual(traj: FlowTrajectory, family=None) -> float:
    """Worst |weak residual| over the family; scales linearly in tau."""
    vals = weak_residuals(traj, family)
    return float(max(abs(v) for v in vals.values()))


def write_trajectory_csv(path, traj: FlowTrajectory) -> None:
    grid = traj.densities[0].grid
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "t", "x", "rho"])
        for k, rho in enumerate(traj.densities):
            t = k * traj.tau
            for x, v in zip(grid.centers, rho.values):
                w.writerow([k, repr(float(t)), repr(float(x)), repr(float(v))])


def write_diagnostics_csv(path, traj: FlowTrajectory) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "t", "w2sq_step", "tv", "energy", "min_rho", "max_rho",
                    "max_abs_z", "el_residual", "complementarity",
                    "eulerk2_residual"])
        for d in traj.steps:
            c = d.certificate
            w.writerow([d.step_index, repr(d.step_index * traj.tau),
                        repr(d.w2sq_increment), repr(d.tv_value), repr(d.energy),
                        repr(d.min_rho), repr(d.max_rho), repr(c.max_abs_z),
                        repr(c.residual_el), repr(c.complementarity),
                        repr(d.eulerk2_residual)])
