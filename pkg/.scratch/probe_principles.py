import sys, time
import numpy as np

sys.path.insert(0, "/root/pkg/src")
from tvjko.grid_density import GridSpec, GridDensity
from tvjko.jko_solver import JkoConfig, jko_step

grid = GridSpec(-1.0, 1.0, 256)
eps_grid_of = lambda r0: 10 * 1e-6 + 2.0 * r0.values.max() * grid.dx

worst_max = -np.inf
worst_min = -np.inf
t0 = time.time()
for h in (0.0, 1e-2):
    n_conv = 0
    worst = {}
    for tau in (1e-1, 1e-2, 1e-3):
        for seed in range(10):
            rng = np.random.default_rng(1000 + seed)
            vals = rng.random(grid.n_cells) + 0.05
            rho0 = GridDensity.normalized(grid, vals)
            cfg = JkoConfig(tau=tau, entropy_h=h, max_outer_iter=4000)
            res = jko_step(rho0, cfg)
            eg = eps_grid_of(rho0)
            over = res.rho1.values.max() - rho0.values.max()   # <= eps_grid needed
            under = rho0.values.min() - res.rho1.values.min()  # <= eps_grid needed
            n_conv += res.converged
            key = tau
            rec = worst.setdefault(key, [-np.inf, -np.inf, 0, 0.0])
            rec[0] = max(rec[0], over / eg)
            rec[1] = max(rec[1], under / eg)
            rec[2] += res.converged
            rec[3] = max(rec[3], res.certificate.jump_alignment)
    for tau, (ov, un, nc, al) in worst.items():
        print(f"h={h:g} tau={tau:g}: conv {nc}/10  max-overshoot/eps={ov:+.3f} "
              f"min-undershoot/eps={un:+.3f}  worst align={al:.2e}")
print(f"total {time.time()-t0:.0f}s")
