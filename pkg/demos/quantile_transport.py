"""Exact transport between two piecewise-constant densities.

On the line the optimal coupling is monotone, so the squared distance
is an integral over mass quantiles,

    W2^2(a, b) = int_0^1 (Qa(s) - Qb(s))^2 ds,

and with piecewise-constant densities both quantile functions are
piecewise linear. The integral is then a finite sum evaluated exactly,
no quadrature and no entropic smoothing. This script computes the
distance, the monotone map, and the dual potential for a random pair,
and cross-checks the distance against plain Monte Carlo on quantiles.
"""

import numpy as np

from tvjko import GridSpec, GridDensity, w2_squared, transport
from tvjko.oracles import w2_quadrature_reference

rng = np.random.default_rng(7)
grid = GridSpec(-1.0, 1.0, 256)

a = GridDensity.normalized(grid, rng.random(256) + 0.05)
b = GridDensity.normalized(grid, 0.5 + np.cos(3 * grid.centers) ** 2)

exact = w2_squared(a, b)
mc = w2_quadrature_reference(a, b, n_samples=2_000_000)
print(f"W2^2 exact       {exact:.12f}")
print(f"W2^2 Monte Carlo {mc:.12f}   relative gap {abs(exact - mc) / exact:.2e}")

data = transport(a, b)
T = data.map_values
print(f"\nmonotone map: range [{T.min():.4f}, {T.max():.4f}], "
      f"nondecreasing = {bool(np.all(np.diff(T) >= -1e-12))}")

# the map evaluated at cell centers recovers the cost by quadrature
disp = (grid.centers - T) ** 2
cost_from_map = float(np.sum(disp * a.values) * grid.dx)
print(f"cost from map    {cost_from_map:.12f}   "
      f"(cell-center quadrature, O(dx^2) off)")

# Kantorovich potential: gradient equals displacement, mean zero
phi = data.potential
grad = np.gradient(phi, grid.dx)
mid = slice(32, -32)
gap = np.max(np.abs(grad[mid] - (grid.centers - T)[mid]))
print(f"\npotential: mean {phi.mean():.2e}, "
      f"max |phi' - displacement| in the bulk {gap:.2e}")
