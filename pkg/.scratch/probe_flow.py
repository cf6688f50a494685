import sys, time
import numpy as np

sys.path.insert(0, "/root/pkg/src")
from tvjko.grid_density import GridSpec, GridDensity
from tvjko.analytic_reference import uniform_block_density, uniform_evolution
from tvjko.flow_driver import run_flow, interpolate, weak_solution_residual, weak_residuals
from tvjko.jko_solver import JkoConfig

def half_width(rho):
    v = rho.values
    top = v.max()
    idx = np.nonzero(v > 0.5 * top)[0]
    g = rho.grid
    return 0.5 * (g.interfaces[idx[-1] + 1] - g.interfaces[idx[0]])

# criterion-2 rehearsal
grid = GridSpec(-4.0, 4.0, 2048)
rho0 = uniform_block_density(grid, 1.0)
t0 = time.time()
traj = run_flow(rho0, 1e-2, 1.0)
dt = time.time() - t0
print(f"flow: completed={traj.completed} steps={traj.n_steps} in {dt:.0f}s")
ev = uniform_evolution(1.0, 1e-2, traj.n_steps)
worst = 0.0
for k in range(1, traj.n_steps + 1):
    hw = half_width(traj.densities[k])
    worst = max(worst, abs(hw - ev.alphas[k]))
term = half_width(traj.densities[-1])
print(f"terminal half-width {term:.5f} vs 10^(1/3) {10**(1/3):.5f} "
      f"diff={abs(term - 10**(1/3)):.4f} (need <= 0.02)")
print(f"worst per-step |hw - recursion| = {worst:.5f} (2dx = {2*grid.dx:.5f})")
print(f"sum_w2sq={traj.sum_w2sq:.3e} bound 2*tau*J0={2*1e-2*1.0:.3e}")
tvs = [d.tv_value for d in traj.steps]
print("tv nonincreasing:", all(b <= a + 1e-12 for a, b in zip(tvs, tvs[1:])))
e2 = max(d.eulerk2_residual for d in traj.steps)
print(f"max eulerk2 residual over flow: {e2:.2e}")
md = interpolate(traj, 0.005), interpolate(traj, 0.0)
print("interpolate(0.005) is rho1:", md[0] is traj.densities[1],
      "interpolate(0) is rho0:", md[1] is traj.densities[0])

# criterion-11 rehearsal: tau-halving residual ratios
grid = GridSpec(-4.0, 4.0, 1024)
rho0 = uniform_block_density(grid, 1.0)
res = {}
for tau in (4e-2, 2e-2, 1e-2):
    t0 = time.time()
    tr = run_flow(rho0, tau, 0.4)
    r = weak_solution_residual(tr)
    res[tau] = r
    print(f"tau={tau:g}: steps={tr.n_steps} completed={tr.completed} "
          f"residual={r:.5e} ({time.time()-t0:.0f}s)")
print(f"ratios: {res[4e-2]/res[2e-2]:.3f} {res[2e-2]/res[1e-2]:.3f} (need in [1.5,2.5])")
