import sys, time
import numpy as np

sys.path.insert(0, "/root/pkg/src")
from tvjko.grid_density import GridSpec, GridDensity
from tvjko.radial import (RadialDensity, radial_jko_step, radial_min_principle_check,
                          sphere_surface_measure)
from tvjko.jko_solver import JkoConfig, jko_step
from tvjko.analytic_reference import ball_alpha_next, ball_w2_squared, ball_weighted_tv
from tvjko.oracles import radial_disk_profile_search

# 1. d=2 uniform ball is a fixed point
grid = GridSpec(0.0, 2.0, 512)
rd = RadialDensity.normalized(2, grid, np.ones(512))
rho1, diag = radial_jko_step(rd, JkoConfig(tau=0.05))
print("uniform ball d=2: L1 move =", np.sum(np.abs(rho1.values - rd.values) * rd.cell_measures),
      "el =", diag.el_residual, "conv =", diag.converged, "it =", diag.iterations_used)

# 2. d=1 fold equivalence with flat even step
N = 512
gfull = GridSpec(-2.0, 2.0, 2 * N)
ghalf = GridSpec(0.0, 2.0, N)
rng = np.random.default_rng(7)
half_vals = np.convolve(rng.random(N) + 0.2, np.ones(9) / 9, mode="same")
full_vals = np.concatenate([half_vals[::-1], half_vals])
rho_full = GridDensity.normalized(gfull, full_vals)
rho_half = RadialDensity.normalized(1, ghalf, half_vals)
tau = 2e-2
res_flat = jko_step(rho_full, JkoConfig(tau=tau))
res_rad, diag_rad = radial_jko_step(rho_half, JkoConfig(tau=tau))
fold = res_flat.rho1.values[N:]
l1 = float(np.sum(np.abs(fold - res_rad.values)) * ghalf.dx) * 2
print(f"d=1 fold: L1 diff = {l1:.2e} (2dx = {2*ghalf.dx:.2e}) "
      f"flat conv={res_flat.converged} rad conv={diag_rad.converged}")

# 3. d=2 disk spreading vs recursion + brute force
for d in (2, 3):
    grid = GridSpec(0.0, 2.0, 1024)
    alpha0 = 1.0
    tau = 0.02
    vals = (grid.centers <= alpha0).astype(float)
    rd0 = RadialDensity.normalized(d, grid, vals)
    t0 = time.time()
    rho1, diag = radial_jko_step(rd0, JkoConfig(tau=tau))
    dt = time.time() - t0
    a1 = ball_alpha_next(alpha0, tau, dimension=d)
    # measured radius: last cell above half the plateau height
    plateau = rho1.values[10]
    above = np.nonzero(rho1.values > 0.5 * plateau)[0]
    a_obs = grid.interfaces[above[-1] + 1]
    a_or, h_or, e_or, _ = radial_disk_profile_search(rd0, tau, n_radii=1023)
    print(f"d={d}: recursion a1={a1:.6f} solver a_obs={a_obs:.6f} oracle a={a_or:.6f} "
          f"conv={diag.converged} it={diag.iterations_used} {dt:.1f}s "
          f"energy={diag.energy:.8f} oracle E={e_or:.8f} "
          f"w2 pred={ball_w2_squared(alpha0, a1, d):.3e} got={diag.w2_squared:.3e} "
          f"tvw pred={ball_weighted_tv(a1, d)*sphere_surface_measure(d)/ (2*np.pi if d==2 else 4*np.pi):.4f}")
    print(f"   plateau={plateau:.6f} predicted h={1/(sphere_surface_measure(d)*a1**d/d):.6f} "
          f"zlip={diag.z_r_lipschitz:.3f} maxz={diag.certificate.max_abs_z:.6f}")

# 4. min principle check + skip
grid = GridSpec(0.0, 1.0, 256)
base = 0.5 + 0.4 * np.exp(-((grid.centers - 0.4) ** 2) / 0.01)
rd0 = RadialDensity.normalized(2, grid, base)
alpha = float(rd0.values.min())
rho1, diag = radial_jko_step(rd0, JkoConfig(tau=1e-2))
rep = radial_min_principle_check(rd0, rho1, alpha)
print("min principle:", rep.checked, rep.satisfied, f"min={rep.min_value:.4f} thr={rep.threshold:.4f}")
touching = RadialDensity.normalized(2, grid, np.maximum(1.0 - grid.centers / 1.0, 0.0))
rep2 = radial_min_principle_check(touching, rho1, 0.1)
print("skip report:", rep2.checked, repr(rep2.reason))
