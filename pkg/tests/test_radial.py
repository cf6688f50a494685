"""Radial reduction: weights, fold equivalence, ball law, lower bound."""

import numpy as np
import pytest

from tvjko import (GridSpec, GridDensity, JkoConfig, jko_step,
                   RadialDensity, radial_jko_step, sphere_surface_measure,
                   radial_min_principle_check, ball_alpha_next)
from tvjko.radial import read_radial_csv, write_radial_csv


def test_sphere_surface_measure_values():
    assert sphere_surface_measure(1) == pytest.approx(2.0)
    assert sphere_surface_measure(2) == pytest.approx(2.0 * np.pi)
    assert sphere_surface_measure(3) == pytest.approx(4.0 * np.pi)
    with pytest.raises(ValueError):
        sphere_surface_measure(0)


def test_radial_density_mass_and_weights():
    g = GridSpec(0.0, 2.0, 64)
    rho = RadialDensity.normalized(2, g, np.ones(64))
    assert np.sum(rho.cell_measures * rho.values) == pytest.approx(1.0)
    w = rho.interface_weights
    assert w[0] == 0.0 and w[-1] == 0.0
    np.testing.assert_allclose(w[1:-1], 2.0 * np.pi * g.interfaces[1:-1])


def test_radial_grid_must_anchor_at_origin():
    with pytest.raises(ValueError):
        RadialDensity.normalized(2, GridSpec(0.5, 2.0, 32), np.ones(32))


def test_d1_fold_matches_flat_even_solve():
    # even flat problems fold onto [0, R] with d = 1 weights; the two
    # solvers must agree to machine precision
    n = 128
    flat_grid = GridSpec(-2.0, 2.0, 2 * n)
    rng = np.random.default_rng(3)
    half = rng.random(n) + 0.3
    vals = np.concatenate([half[::-1], half])
    rho0 = GridDensity.normalized(flat_grid, vals)
    flat = jko_step(rho0, JkoConfig(tau=1e-2))

    fold = RadialDensity.normalized(1, GridSpec(0.0, 2.0, n), half)
    rad1, diag = radial_jko_step(fold, JkoConfig(tau=1e-2))
    assert flat.converged and diag.converged
    np.testing.assert_allclose(rad1.values, flat.rho1.values[n:], atol=1e-9)


def test_uniform_ball_is_exact_fixed_point_shape():
    # a uniform ball stays a uniform ball; its radius follows the cubic law
    d = 2
    tau = 1e-2
    g = GridSpec(0.0, 2.0, 256)
    r = g.centers
    rho0 = RadialDensity.normalized(d, g, np.where(r <= 1.0, 1.0, 0.0))
    rho1, diag = radial_jko_step(rho0, JkoConfig(tau=tau))
    assert diag.converged
    s_pred = ball_alpha_next(1.0, tau, d)
    v = rho1.values
    sup = np.nonzero(v > 0.5 * v.max())[0]
    s_obs = g.interfaces[sup[-1] + 1]
    assert s_obs == pytest.approx(s_pred, abs=2.0 * g.dx)
    # interior stays flat
    inner = r < s_pred - 2.0 * g.dx
    assert np.ptp(v[inner]) <= 1e-6 * v.max()


def test_radial_min_principle_positive_profile():
    d = 3
    g = GridSpec(0.0, 1.5, 192)
    rng = np.random.default_rng(5)
    vals = 0.4 + rng.random(192)
    rho0 = RadialDensity.normalized(d, g, vals)
    alpha = float(rho0.values.min())
    rho1, diag = radial_jko_step(rho0, JkoConfig(tau=1e-2))
    assert diag.converged
    rep = radial_min_principle_check(rho0, rho1, alpha)
    assert rep.checked and rep.satisfied


def test_radial_min_principle_skips_on_vacuum_start():
    g = GridSpec(0.0, 1.5, 64)
    vals = np.zeros(64)
    vals[:32] = 1.0
    rho0 = RadialDensity.normalized(2, g, vals)
    rep = radial_min_principle_check(rho0, rho0, 0.3)
    assert not rep.checked
    assert "precondition" in rep.reason


def test_lipschitz_monitor_is_finite_on_support():
    g = GridSpec(0.0, 1.5, 128)
    rng = np.random.default_rng(8)
    rho0 = RadialDensity.normalized(2, g, 0.3 + rng.random(128))
    _, diag = radial_jko_step(rho0, JkoConfig(tau=1e-2))
    assert diag.converged
    assert np.isfinite(diag.z_r_lipschitz)
    assert diag.z_r_lipschitz >= 0.0


def test_radial_csv_round_trip(tmp_path):
    g = GridSpec(0.0, 1.0, 48)
    rng = np.random.default_rng(11)
    rho = RadialDensity.normalized(3, g, rng.random(48) + 0.1)
    path = tmp_path / "radial.csv"
    write_radial_csv(path, rho)
    back = read_radial_csv(path, 3)
    assert back.grid == g
    np.testing.assert_allclose(back.values, rho.values, rtol=1e-14)
    with pytest.raises(ValueError):
        read_radial_csv(path, 0)
