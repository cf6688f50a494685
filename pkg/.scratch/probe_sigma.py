import sys, time
import numpy as np

sys.path.insert(0, "/root/pkg/src")
from tvjko.grid_density import GridSpec, GridDensity
from tvjko.jko_solver import JkoConfig, jko_step

grid = GridSpec(-1.0, 1.0, 256)
tau = 1e-3
for seed in (1000, 1003, 1007):
    rng = np.random.default_rng(seed)
    rho0 = GridDensity.normalized(grid, rng.random(grid.n_cells) + 0.05)
    for mult in (1.0, 4.0, 16.0):
        t0 = time.time()
        cfg = JkoConfig(tau=tau, sigma0=mult * tau, max_outer_iter=30000)
        res = jko_step(rho0, cfg)
        c = res.certificate
        print(f"seed={seed} sigma0={mult:g}*tau: conv={res.converged} "
              f"it={res.iterations_used} {time.time()-t0:.0f}s "
              f"el={c.residual_el:.1e} align={c.jump_alignment:.1e} "
              f"maxz-1={c.max_abs_z-1:.1e}")
