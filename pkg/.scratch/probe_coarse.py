import numpy as np
from tvjko import GridSpec, GridDensity, JkoConfig, jko_step

g = GridSpec(-2.0, 2.0, 64)
vals = np.maximum(1.0 - np.abs(g.centers), 0.0)
rho0 = GridDensity.normalized(g, vals)
for cap in (100000, 400000):
    res = jko_step(rho0, JkoConfig(tau=0.02, max_outer_iter=cap))
    c = res.certificate
    print(f"cap={cap} conv={res.converged} iters={res.iterations_used} "
          f"maxz={c.max_abs_z:.8f} align={c.jump_alignment:.2e} gap={c.duality_gap:.2e}",
          flush=True)
