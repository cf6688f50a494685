"""Flow driver: stepping, dissipation bookkeeping, weak residuals, CSV."""

import numpy as np
import pytest

from tvjko import (GridSpec, GridDensity, JkoConfig, run_flow, interpolate,
                   total_variation, uniform_block_density, weak_residuals,
                   weak_solution_residual)
from tvjko import test_function_family as space_time_family
from tvjko.flow_driver import write_trajectory_csv, write_diagnostics_csv


def _smooth_density(seed, n=128, grid=None):
    g = grid or GridSpec(-1.0, 1.0, n)
    rng = np.random.default_rng(seed)
    vals = rng.random(n) + 0.2
    k = np.ones(7) / 7.0
    vals = np.convolve(vals, k, mode="same")
    return GridDensity.normalized(g, vals)


def test_flow_step_count_and_times():
    rho0 = _smooth_density(0)
    traj = run_flow(rho0, tau=2e-2, horizon=0.1)
    assert traj.completed
    assert traj.n_steps == 5
    np.testing.assert_allclose(traj.times(), 2e-2 * np.arange(6))


def test_flow_rejects_mismatched_config():
    rho0 = _smooth_density(1)
    with pytest.raises(ValueError):
        run_flow(rho0, tau=1e-2, horizon=0.1, config=JkoConfig(tau=2e-2))
    with pytest.raises(ValueError):
        run_flow(rho0, tau=1e-2, horizon=1e-3)


def test_flow_dissipation_inequalities():
    rho0 = _smooth_density(2)
    traj = run_flow(rho0, tau=2e-2, horizon=0.12)
    j0 = total_variation(traj.densities[0])
    tvs = [total_variation(r) for r in traj.densities]
    assert max(tvs) <= j0 + 1e-12
    assert traj.sum_w2sq / (2.0 * 2e-2) <= j0


def test_per_step_diagnostics_population():
    rho0 = _smooth_density(3)
    traj = run_flow(rho0, tau=2e-2, horizon=0.06)
    for k, d in enumerate(traj.steps, start=1):
        assert d.step_index == k
        assert d.converged
        assert d.w2sq_increment >= 0
        assert d.eulerk2_residual <= 1e-9  # discrete map identity is algebraic
        assert np.isfinite(d.grad_div_z_l2)


def test_interpolate_is_right_continuous_staircase():
    rho0 = _smooth_density(4)
    traj = run_flow(rho0, tau=2e-2, horizon=0.06)
    assert interpolate(traj, 0.0) is traj.densities[0]
    assert interpolate(traj, 0.019) is traj.densities[1]
    assert interpolate(traj, 0.021) is traj.densities[2]
    assert interpolate(traj, traj.horizon) is traj.densities[-1]
    with pytest.raises(ValueError):
        interpolate(traj, traj.horizon + 1.0)


def test_space_time_family_traces():
    g = GridSpec(-1.0, 1.0, 64)
    fam = space_time_family(g, horizon=0.3)
    assert len(fam) >= 8
    x = g.centers
    for f in fam:
        np.testing.assert_allclose(f.u(0.3, x), 0.0, atol=1e-12)
        assert abs(f.u(0.1, g.left)) <= 1e-12
        assert abs(f.u(0.1, g.right)) <= 1e-12


def test_weak_residual_scales_down_with_tau():
    g = GridSpec(-4.0, 4.0, 512)
    rho0 = uniform_block_density(g, 1.0)
    r_coarse = weak_solution_residual(run_flow(rho0, 4e-2, 0.2))
    r_fine = weak_solution_residual(run_flow(rho0, 2e-2, 0.2))
    assert r_fine < r_coarse
    assert r_coarse / r_fine == pytest.approx(2.0, abs=0.6)


def test_weak_residuals_include_zero_member():
    rho0 = _smooth_density(5)
    traj = run_flow(rho0, tau=2e-2, horizon=0.04)
    res = weak_residuals(traj)
    zero_keys = [k for k in res if k.endswith("zero")]
    assert len(zero_keys) == 1
    assert abs(res[zero_keys[0]]) <= 1e-15


def test_flow_csv_writers(tmp_path):
    rho0 = _smooth_density(6, n=32)
    traj = run_flow(rho0, tau=2e-2, horizon=0.04)
    tpath = tmp_path / "traj.csv"
    dpath = tmp_path / "diag.csv"
    write_trajectory_csv(tpath, traj)
    write_diagnostics_csv(dpath, traj)
    tlines = tpath.read_text().strip().splitlines()
    assert tlines[0] == "k,t,x,rho"
    assert len(tlines) == 1 + 32 * 3  # initial plus two steps
    dlines = dpath.read_text().strip().splitlines()
    assert dlines[0] == ("k,t,w2sq_step,tv,energy,min_rho,max_rho,"
                         "max_abs_z,el_residual,complementarity,"
                         "eulerk2_residual")
    assert len(dlines) == 3
