"""Discontinuity creation: a smooth hat flattens into a plateau with jumps.

Start from the even ramp rho0(x) = 1 - |x| on [-1, 1]. A single step of
the scheme cuts the tip off and replaces it with a flat plateau between
two genuine jumps. For the step size tau = 1/270 the plateau sits at
height 3/4 on (-1/2, 1/2), and the dual variable z, the one the
optimality certificate carries, saturates to exactly 1 at the jump.

A smooth initial condition leaving the smooth class after one step is
the behavior that separates this flow from heat-type smoothing.
"""

import numpy as np

from tvjko import GridSpec, JkoConfig, jko_step, hat_ramp_density, hat_solution

grid = GridSpec(-2.0, 2.0, 2048)
tau = 1.0 / 270.0
sol = hat_solution(tau)

rho0 = hat_ramp_density(grid)
# pointwise plateau readout wants a tighter dual gate than the default
res = jko_step(rho0, JkoConfig(tau=tau, el_tolerance=1e-8,
                               max_outer_iter=120_000))

x = grid.centers
inner = np.abs(x) <= sol.beta - 2.0 * grid.dx
plateau = res.rho1.values[inner]

print(f"tau = 1/270, predicted jump location beta = {sol.beta}")
print(f"predicted plateau height {sol.plateau_height}")
print(f"observed plateau: mean {plateau.mean():.9f}, "
      f"spread {plateau.max() - plateau.min():.2e}")

# density on each side of the predicted jump
j = int(np.searchsorted(grid.interfaces, sol.beta))
print(f"density just inside the jump  {res.rho1.values[j - 1]:.9f}")
print(f"density just outside the jump {res.rho1.values[j]:.9f}")
print(f"|z| at the jump interface     {abs(res.certificate.z_values[j]):.9f}")
print(f"max |z| over all interfaces   {res.certificate.max_abs_z:.9f}")
print(f"converged = {res.converged} after {res.iterations_used} iterations")
