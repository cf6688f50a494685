"""Dual certificates: exact reconstructions, closed-form fields, negative controls."""

import numpy as np
import pytest

from tvjko import (GridSpec, GridDensity, JkoConfig, jko_step, taut_string_solve,
                   build_certificate, build_certificate_general,
                   certificate_from_fields, check_sufficient_conditions,
                   uniform_block_density, uniform_step_profiles,
                   write_certificate_interface_csv, write_certificate_cell_csv)
from tvjko.transport1d import transport


def test_walk_recovers_prox_dual_exactly():
    # for u = prox(y) the cell balance (u - y) + Z'/w = 0 has an exact dual;
    # an additive constant in the drive must be absorbed into c
    rng = np.random.default_rng(0)
    n = 40
    y = rng.normal(size=n)
    w = rng.uniform(0.5, 2.0, n)
    box = np.ones(n + 1)
    box[0] = box[-1] = 0.0
    u = taut_string_solve(y, box[1:-1], w)
    cert = build_certificate_general(u, u - y + 3.7, w, box,
                                     support_mask=np.ones(n, dtype=bool))
    assert cert.c_fit == pytest.approx(3.7, abs=1e-9)
    assert cert.residual_el <= 1e-10
    assert cert.max_abs_z <= 1.0 + 1e-12
    assert cert.jump_alignment <= 1e-9
    assert cert.complementarity <= 1e-12


def test_converged_step_certificate_is_tight():
    g = GridSpec(-4.0, 4.0, 512)
    rho0 = uniform_block_density(g, 1.0)
    res = jko_step(rho0, JkoConfig(tau=1.0 / 3.0))
    assert res.converged
    c = res.certificate
    assert c.residual_el <= 1e-6
    assert c.complementarity <= 1e-6
    assert c.max_abs_z <= 1.0 + 1e-4
    assert c.jump_alignment <= 1e-3
    assert c.beta_negativity <= 1e-6
    # beta lives only on vacuum
    assert np.all(c.beta_values[c.support_mask] == 0.0)


def test_certificate_degrades_on_corrupted_iterate():
    g = GridSpec(-4.0, 4.0, 256)
    rho0 = uniform_block_density(g, 1.0)
    res = jko_step(rho0, JkoConfig(tau=1.0 / 3.0))
    bad_vals = res.rho1.values.copy()
    mid = g.n_cells // 2
    bad_vals[mid] *= 1.5
    bad = GridDensity.normalized(g, bad_vals)
    cert = build_certificate(bad, transport(bad, rho0).potential, 1.0 / 3.0)
    good = res.certificate
    worst = max(cert.residual_el, cert.jump_alignment,
                cert.max_abs_z - 1.0, cert.complementarity)
    assert worst > 10 * max(good.residual_el, good.jump_alignment,
                            good.max_abs_z - 1.0, good.complementarity, 1e-8)


def test_closed_form_fields_pass_metrics():
    g = GridSpec(-4.0, 4.0, 4096)
    tau = 1.0 / 3.0
    rho0 = uniform_block_density(g, 1.0)
    res = jko_step(rho0, JkoConfig(tau=tau))
    prof = uniform_step_profiles(1.0, tau, g)
    cert = certificate_from_fields(res.rho1, prof.phi_values, tau,
                                   prof.z_values)
    # closed-form z against the solved density: grid-resolution agreement
    assert cert.max_abs_z <= 1.0 + 1e-9
    assert cert.jump_alignment <= 2e-2
    assert cert.residual_el <= 5e-2


def test_sufficient_conditions_on_converged_step():
    g = GridSpec(-4.0, 4.0, 512)
    rho0 = uniform_block_density(g, 1.0)
    res = jko_step(rho0, JkoConfig(tau=1.0 / 3.0))
    rep = check_sufficient_conditions(res.rho1, rho0, 1.0 / 3.0,
                                      res.certificate)
    assert rep.satisfied
    assert rep.stationarity_min >= -1e-4
    assert rep.support_residual <= 1e-4

    rep_bad = check_sufficient_conditions(rho0, rho0, 1.0 / 3.0,
                                          res.certificate)
    assert not rep_bad.satisfied


def test_certificate_csv_writers(tmp_path):
    g = GridSpec(-4.0, 4.0, 128)
    rho0 = uniform_block_density(g, 1.0)
    res = jko_step(rho0, JkoConfig(tau=1.0 / 3.0))
    zpath = tmp_path / "z.csv"
    cpath = tmp_path / "cells.csv"
    write_certificate_interface_csv(zpath, res.rho1, res.certificate)
    write_certificate_cell_csv(cpath, res.rho1, res.certificate)
    zlines = zpath.read_text().strip().splitlines()
    clines = cpath.read_text().strip().splitlines()
    assert zlines[0] == "x_interface,z"
    assert clines[0] == "x_center,beta,residual_cell"
    assert len(zlines) == g.n_cells + 2
    assert len(clines) == g.n_cells + 1
