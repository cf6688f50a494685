"""End-to-end acceptance battery.

Each criterion is one test that prints a single verdict line with the
measured quantities against their stated tolerances (visible with -s;
the pytest outcome carries the same verdict either way).  Solves that
converge anywhere in this module register their certificates, and the
certificate criterion sweeps everything registered.
"""

import time

import numpy as np
import pytest

from tvjko import (GridSpec, GridDensity, JkoConfig, jko_step, run_flow,
                   total_variation, w2_squared, taut_string_solve,
                   uniform_block_density, uniform_alpha_next,
                   uniform_evolution, hat_ramp_density, hat_solution,
                   RadialDensity, radial_jko_step, grid_tolerance,
                   weak_solution_residual)
from tvjko.jko_solver import entropic_step_family
from tvjko.oracles import (w2_quadrature_reference, w2_assignment_reference,
                           tv_prox_reference, transport_gradient_fd)

# every converged solve in this module lands here; criterion 9 sweeps it
CERTIFICATE_REGISTRY = []


def _register(label, certificate, converged):
    if converged:
        CERTIFICATE_REGISTRY.append((label, certificate))


def _verdict(num, ok, detail):
    line = f"criterion {num:02d} {'PASS' if ok else 'FAIL'}: {detail}"
    print("\n" + line)
    assert ok, line


def _half_width(rho):
    v = rho.values
    sup = np.nonzero(v > 0.5 * v.max())[0]
    itf = rho.grid.interfaces
    return 0.5 * (itf[sup[-1] + 1] - itf[sup[0]])


def _smooth_positive(grid, seed, floor=0.05, width=7):
    rng = np.random.default_rng(seed)
    vals = rng.random(grid.n_cells) + floor
    vals = np.convolve(vals, np.ones(width) / width, mode="same")
    return GridDensity.normalized(grid, vals)


def test_criterion_01_uniform_step():
    t0 = time.perf_counter()
    g = GridSpec(-4.0, 4.0, 1024)
    tau = 1.0 / 3.0
    rho0 = uniform_block_density(g, 1.0)
    res = jko_step(rho0, JkoConfig(tau=tau))
    _register("c1 uniform step", res.certificate, res.converged)
    target = uniform_block_density(g, uniform_alpha_next(1.0, tau))
    l1 = float(np.sum(np.abs(res.rho1.values - target.values)) * g.dx)
    elapsed = time.perf_counter() - t0
    ok = res.converged and l1 <= 3.0 * g.dx and elapsed <= 30.0
    _verdict(1, ok, f"uniform step l1={l1:.3e} <= {3.0 * g.dx:.3e}, "
                    f"{elapsed:.1f}s <= 30s, converged={res.converged}")


def test_criterion_02_uniform_flow():
    t0 = time.perf_counter()
    g = GridSpec(-4.0, 4.0, 2048)
    tau = 1e-2
    rho0 = uniform_block_density(g, 1.0)
    traj = run_flow(rho0, tau, 1.0)
    for k, d in enumerate(traj.steps, start=1):
        _register(f"c2 flow step {k}", d.certificate, d.converged)
    alphas = uniform_evolution(1.0, tau, traj.n_steps).alphas
    widths = np.array([_half_width(r) for r in traj.densities])
    step_err = float(np.max(np.abs(widths[1:] - np.asarray(alphas[1:]))))
    terminal_err = abs(widths[-1] - 10.0 ** (1.0 / 3.0))
    elapsed = time.perf_counter() - t0
    ok = (traj.completed and terminal_err <= 0.02
          and step_err <= 2.0 * g.dx and elapsed <= 600.0)
    _verdict(2, ok, f"uniform flow terminal_err={terminal_err:.3e} <= 2e-2, "
                    f"per-step={step_err:.3e} <= {2.0 * g.dx:.3e}, "
                    f"{elapsed:.0f}s <= 600s")


def test_criterion_03_discontinuity_creation():
    t0 = time.perf_counter()
    g = GridSpec(-2.0, 2.0, 2048)
    tau = 1.0 / 270.0
    # pointwise 2% on the plateau needs a tighter dual gate than the
    # default 1e-6: at that gate the jump cell can lag by ~2% while the
    # certificate still passes
    res = jko_step(hat_ramp_density(g),
                   JkoConfig(tau=tau, el_tolerance=1e-8, max_outer_iter=120_000))
    _register("c3 hat step", res.certificate, res.converged)
    sol = hat_solution(tau)
    inner = np.abs(g.centers) <= sol.beta - 2.0 * g.dx
    plateau_err = float(np.max(np.abs(res.rho1.values[inner] - 0.75)) / 0.75)
    j = int(np.argmin(np.abs(g.interfaces - sol.beta)))
    z_jump = abs(float(res.certificate.z_values[j]))
    elapsed = time.perf_counter() - t0
    ok = (res.converged and plateau_err <= 0.02
          and abs(z_jump - 1.0) <= 1e-2 and elapsed <= 60.0)
    _verdict(3, ok, f"hat plateau_err={plateau_err:.3e} <= 2e-2, "
                    f"|z|={z_jump:.6f} in 1 +- 1e-2, {elapsed:.1f}s <= 60s")


def test_criterion_04_transport_oracle():
    t0 = time.perf_counter()
    g = GridSpec(-1.0, 1.0, 64)
    ga = GridSpec(0.0, 1.0, 16)
    units = 64
    worst_quad = 0.0
    worst_asg = 0.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        a = GridDensity.normalized(g, rng.random(64) + 0.05)
        b = GridDensity.normalized(g, rng.random(64) + 0.05)
        exact = w2_squared(a, b)
        ref = w2_quadrature_reference(a, b, n_samples=1_000_000)
        worst_quad = max(worst_quad, abs(exact - ref) / ref)
        ca = rng.multinomial(units, np.full(16, 1 / 16))
        cb = rng.multinomial(units, np.full(16, 1 / 16))
        aa = GridDensity(ga, ca / units / ga.dx)
        bb = GridDensity(ga, cb / units / ga.dx)
        ref2 = w2_assignment_reference(aa, bb, units)
        worst_asg = max(worst_asg,
                        abs(w2_squared(aa, bb) - ref2) / max(ref2, 1e-300))
    elapsed = time.perf_counter() - t0
    ok = worst_quad <= 1e-5 and worst_asg <= 1e-8 and elapsed <= 60.0
    _verdict(4, ok, f"transport oracle quad={worst_quad:.3e} <= 1e-5, "
                    f"assign={worst_asg:.3e} <= 1e-8, {elapsed:.1f}s <= 60s")


def test_criterion_05_tv_prox_oracle():
    worst = 0.0
    for seed in range(100):
        rng = np.random.default_rng(1000 + seed)
        n = int(rng.integers(2, 17))
        y = rng.normal(0.0, 1.0, n)
        lam = float(10.0 ** rng.uniform(-3, 0))
        ref = tv_prox_reference(y, np.full(n - 1, lam))
        assert ref is not None, f"reference failed to certify seed {seed}"
        u = taut_string_solve(y, np.full(n - 1, lam))
        worst = max(worst, float(np.max(np.abs(u - ref))))
    ok = worst <= 1e-8
    _verdict(5, ok, f"tv prox vs certified reference max_abs={worst:.3e} <= 1e-8, "
                    f"100 instances")


def test_criterion_06_gradient_check():
    g = GridSpec(-1.0, 1.0, 128)
    worst = 0.0
    for pair_seed in range(10):
        rng = np.random.default_rng(2000 + pair_seed)
        a = GridDensity.normalized(g, rng.random(128) + 0.1)
        b = GridDensity.normalized(g, rng.random(128) + 0.1)
        for _ in range(20):
            direction = rng.normal(0.0, 1.0, 128)
            direction -= direction.mean()
            analytic, fd = transport_gradient_fd(a, b, direction, eps=1e-5)
            worst = max(worst, abs(analytic - fd) / max(abs(fd), 1e-300))
    ok = worst <= 1e-4
    _verdict(6, ok, f"gradient pairing vs central differences rel={worst:.3e}"
                    f" <= 1e-4, 10 pairs x 20 directions")


def test_criterion_07_maximum_principle():
    g = GridSpec(-1.0, 1.0, 256)
    worst_excess = -np.inf
    count = 0
    for seed in range(10):
        rng = np.random.default_rng(3000 + seed)
        rho0 = GridDensity.normalized(g, rng.random(256) ** 2 + 1e-3)
        eps = grid_tolerance(float(rho0.values.max()), g.dx)
        for tau in (1e-1, 1e-2, 1e-3):
            for h in (0.0, 1e-2):
                res = jko_step(rho0, JkoConfig(tau=tau, entropy_h=h))
                _register(f"c7 s{seed} tau={tau} h={h}", res.certificate,
                          res.converged)
                excess = float(res.rho1.values.max() - rho0.values.max())
                worst_excess = max(worst_excess, excess - eps)
                count += 1
                assert excess <= eps, (seed, tau, h, excess, eps)
    ok = worst_excess <= 0.0
    _verdict(7, ok, f"maximum principle over {count} solves, worst margin "
                    f"{-worst_excess:.3e} above bound")


def test_criterion_08_minimum_principle():
    worst = -np.inf
    g = GridSpec(-1.0, 1.0, 256)
    for seed in range(10):
        rng = np.random.default_rng(4000 + seed)
        rho0 = GridDensity.normalized(g, 0.2 + rng.random(256))
        eps = grid_tolerance(float(rho0.values.max()), g.dx)
        res = jko_step(rho0, JkoConfig(tau=1e-2))
        _register(f"c8 flat s{seed}", res.certificate, res.converged)
        deficit = float(rho0.values.min() - res.rho1.values.min())
        worst = max(worst, deficit - eps)
        assert deficit <= eps, ("flat", seed, deficit, eps)
    gr = GridSpec(0.0, 1.5, 192)
    for d in (2, 3):
        for seed in range(4):
            rng = np.random.default_rng(5000 + 10 * d + seed)
            rho0 = RadialDensity.normalized(d, gr, 0.3 + rng.random(192))
            eps = grid_tolerance(float(rho0.values.max()), gr.dx)
            rho1, diag = radial_jko_step(rho0, JkoConfig(tau=1e-2))
            _register(f"c8 radial d{d} s{seed}", diag.certificate,
                      diag.converged)
            deficit = float(rho0.values.min() - rho1.values.min())
            worst = max(worst, deficit - eps)
            assert deficit <= eps, ("radial", d, seed, deficit, eps)
    ok = worst <= 0.0
    _verdict(8, ok, f"minimum principle 1d + radial d in {{2,3}}, worst "
                    f"margin {-worst:.3e} above bound")


def test_criterion_09_certificate_suite():
    # dedicated solves so the criterion stands alone, plus everything
    # registered by the other criteria when the whole module runs
    cases = []
    g = GridSpec(-4.0, 4.0, 512)
    cases.append(("uniform", jko_step(uniform_block_density(g, 1.0),
                                      JkoConfig(tau=1.0 / 3.0))))
    gh = GridSpec(-2.0, 2.0, 1024)
    cases.append(("hat", jko_step(hat_ramp_density(gh),
                                  JkoConfig(tau=1.0 / 270.0))))
    gs = GridSpec(-1.0, 1.0, 192)
    for seed in (0, 1):
        cases.append((f"smooth {seed}",
                      jko_step(_smooth_positive(gs, 6000 + seed),
                               JkoConfig(tau=2e-2))))
    for label, res in cases:
        _register(f"c9 {label}", res.certificate, res.converged)
        assert res.converged, label
    checked = 0
    for label, cert in CERTIFICATE_REGISTRY:
        assert cert.max_abs_z <= 1.0 + 1e-4, label
        assert cert.complementarity <= 1e-6, label
        assert cert.residual_el <= 1e-6, label
        assert cert.jump_alignment <= 1e-3, label
        checked += 1
    _verdict(9, checked >= 4,
             f"certificate bounds hold on all {checked} converged solves "
             f"(max|z| <= 1+1e-4, compl <= 1e-6, EL <= 1e-6, align <= 1e-3)")


def test_criterion_10_flow_energy_estimate():
    tau = 2e-2
    g = GridSpec(-1.0, 1.0, 128)
    worst_quad = worst_sup = -np.inf
    for seed in range(5):
        rho0 = _smooth_positive(g, 7000 + seed)
        traj = run_flow(rho0, tau, 0.2)
        assert traj.completed, seed
        for k, d in enumerate(traj.steps, start=1):
            _register(f"c10 s{seed} k{k}", d.certificate, d.converged)
        j0 = total_variation(traj.densities[0])
        quad = traj.sum_w2sq / (2.0 * tau)
        sup_tv = max(total_variation(r) for r in traj.densities)
        worst_quad = max(worst_quad, quad - j0)
        worst_sup = max(worst_sup, sup_tv - j0)
        assert quad <= j0, (seed, quad, j0)
        assert sup_tv <= j0, (seed, sup_tv, j0)
    ok = worst_quad <= 0.0 and worst_sup <= 0.0
    _verdict(10, ok, f"flow estimate on 5 flows: sum W2^2/(2 tau) - J0 <= "
                     f"{worst_quad:.3e}, sup J - J0 <= {worst_sup:.3e}, "
                     f"exact as computed")


def test_criterion_11_weak_residual_scaling():
    g = GridSpec(-4.0, 4.0, 1024)
    rho0 = uniform_block_density(g, 1.0)
    taus = (4e-2, 2e-2, 1e-2)
    residuals = []
    for tau in taus:
        traj = run_flow(rho0, tau, 0.4)
        assert traj.completed, tau
        residuals.append(weak_solution_residual(traj))
    r1 = residuals[0] / residuals[1]
    r2 = residuals[1] / residuals[2]
    ok = 1.5 <= r1 <= 2.5 and 1.5 <= r2 <= 2.5
    _verdict(11, ok, f"weak residual ratios under tau-halving "
                     f"{r1:.3f}, {r2:.3f} in [1.5, 2.5]")


def test_criterion_12_entropic_family():
    g = GridSpec(-1.05, 1.05, 2048)
    tau = 1.0 / 270.0
    rho0 = hat_ramp_density(g)
    base = jko_step(rho0, JkoConfig(tau=tau))
    _register("c12 h=0", base.certificate, base.converged)
    assert base.converged
    h_values = (1e-1, 1e-2, 1e-3)
    family = entropic_step_family(rho0, tau, h_values)
    gaps = []
    worst_el = 0.0
    min_hlog = np.inf
    for h, res in zip(h_values, family):
        _register(f"c12 h={h}", res.certificate, res.converged)
        assert res.converged, h
        gaps.append(float(np.sum(np.abs(res.rho1.values - base.rho1.values))
                          * g.dx))
        worst_el = max(worst_el, res.certificate.residual_el)
        min_hlog = min(min_hlog, float(h * np.log(res.rho1.values.min())))
    decreasing = all(a > b for a, b in zip(gaps, gaps[1:]))
    ok = decreasing and worst_el <= 1e-6 and np.isfinite(min_hlog)
    _verdict(12, ok, f"entropic family gaps {gaps[0]:.3e} > {gaps[1]:.3e} > "
                     f"{gaps[2]:.3e}, EL residual <= {worst_el:.3e}, "
                     f"min h log rho = {min_hlog:.3e} finite")
