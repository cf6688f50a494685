import numpy as np
from tvjko.radial import RadialDensity, radial_jko_step
from tvjko.jko_solver import JkoConfig
from tvjko.grid_density import GridSpec

gr = GridSpec(0.0, 2.0, 192)
r = gr.centers
rv = np.where(r < 0.8, 1.0, 0.0) + 0.3 * np.exp(-((r - 0.4) / 0.15) ** 2)
rho0 = RadialDensity.normalized(2, gr, rv)
for cap in (50000, 200000):
    rho1, diag = radial_jko_step(rho0, JkoConfig(tau=0.01, max_outer_iter=cap))
    c = diag.certificate
    print(f"cap={cap} converged={diag.converged} iters={diag.iterations_used} "
          f"align={c.jump_alignment:.3e} gap={c.duality_gap:.3e}", flush=True)
