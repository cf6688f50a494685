"""Independent slow references used to validate the fast paths.

Nothing here shares code with the production solvers: the TV prox
reference runs an accelerated projected gradient on the dual box
problem and then polishes block means exactly; the transport references
integrate quantile differences by brute-force midpoint sampling or
solve a literal assignment problem between equal-mass slabs.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .grid_density import GridDensity, cumulative_masses, _quantile_core
from .transport1d import transport, w2_squared
from .tv_prox import prox_kkt_residual


def tv_prox_reference(y, tube, data_weights=None, max_iter=40000):
    """TV prox by dual ascent plus exact block polish.

    Returns the verified minimizer, or None when the KKT system cannot
    be certified to near machine precision (the caller must treat that
    as an oracle failure, not as agreement).
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    w = np.ones(n) if data_weights is None else np.asarray(data_weights, dtype=float)
    tube = np.asarray(tube, dtype=float)
    if n == 1:
        return y.copy()

    # dual: minimize 1/2 sum (z_i - z_{i-1})^2 / w_i - sum_j z_j (y_{j+1} - y_j)
    # over |z_j| <= tube_j; primal is u = y + diff(z with zero padding) / w
    def primal(z):
        zp = np.concatenate([[0.0], z, [0.0]])
        return y + np.diff(zp) / w

    lip = 4.0 * float(np.max(1.0 / w))
    z = np.zeros(n - 1)
    zv = z.copy()
    t_acc = 1.0
    for _ in range(max_iter):
        u = primal(zv)
        grad = -np.diff(u)
        z_new = np.clip(zv - grad / lip, -tube, tube)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_acc * t_acc))
        zv = z_new + ((t_acc - 1.0) / t_new) * (z_new - z)
        z, t_acc = z_new, t_new
    u = primal(z)

    # exact polish: freeze the block structure, recompute block means from
    # the force balance with the sign of each surviving jump
    scale = max(float(np.max(np.abs(u))), float(np.max(np.abs(y))), 1.0)
    breaks = np.nonzero(np.abs(np.diff(u)) > 1e-6 * scale)[0]
    starts = np.concatenate([[0], breaks + 1])
    ends = np.concatenate([breaks, [n - 1]])
    polished = np.empty_like(u)
    for s, e in zip(starts, ends):
        zl = 0.0 if s == 0 else tube[s - 1] * np.sign(u[s] - u[s - 1])
        zr = 0.0 if e == n - 1 else tube[e] * np.sign(u[e + 1] - u[e])
        seg = slice(s, e + 1)
        polished[seg] = ((w[seg] * y[seg]).sum() + zr - zl) / w[seg].sum()

    kkt_tol = 1e-9 * max(scale, float(np.max(tube, initial=0.0)), 1.0)
    if prox_kkt_residual(polished, y, tube, w) <= kkt_tol:
        return polished
    if prox_kkt_residual(u, y, tube, w) <= 100.0 * kkt_tol:
        return u
    return None


def w2_quadrature_reference(rho0: GridDensity, rho1: GridDensity,
                            n_samples: int = 1_000_000) -> float:
    """Midpoint-rule quadrature of the squared quantile difference."""
    s = (np.arange(n_samples) + 0.5) / n_samples
    interfaces = rho0.grid.interfaces
    q0 = _quantile_core(cumulative_masses(rho0), interfaces, rho0.values, s)
    q1 = _quantile_core(cumulative_masses(rho1), interfaces, rho1.values, s)
    d = q0 - q1
    return float(np.mean(d * d))


def _slab_endpoints(rho: GridDensity, counts: np.ndarray) -> np.ndarray:
    # split cell i into counts[i] equal-mass slabs; endpoints exact in the
    # grid geometry, independent of float cell masses
    total = int(counts.sum())
    out = np.empty((total, 2))
    pos = 0
    interfaces = rho.grid.interfaces
    for i, k in enumerate(counts):
        k = int(k)
        if k == 0:
            continue
        a, b = interfaces[i], interfaces[i + 1]
        edges = a + (b - a) * np.arange(k + 1) / k
        out[pos:pos + k, 0] = edges[:-1]
        out[pos:pos + k, 1] = edges[1:]
        pos += k
    return out


def w2_assignment_reference(rho0: GridDensity, rho1: GridDensity,
                            total_units: int) -> float:
    """Assignment-problem value between equal-mass uniform slabs.

    Requires both densities to put an integer number of 1/total_units
    mass units in every cell.  With equal masses the pairing problem is
    a plain linear assignment; within a pair the monotone map between
    two uniform slabs has closed-form cost.
    """
    def counts_of(rho):
        raw = rho.masses * total_units
        counts = np.rint(raw)
        if np.max(np.abs(raw - counts)) > 1e-6:
            raise ValueError("cell masses are not integer multiples of 1/total_units")
        return counts.astype(int)

    slabs0 = _slab_endpoints(rho0, counts_of(rho0))
    slabs1 = _slab_endpoints(rho1, counts_of(rho1))
    if slabs0.shape != slabs1.shape:
        raise ValueError("densities carry different unit counts")
    a0 = slabs0[:, 0][:, None]
    alen = (slabs0[:, 1] - slabs0[:, 0])[:, None]
    b0 = slabs1[:, 0][None, :]
    blen = (slabs1[:, 1] - slabs1[:, 0])[None, :]
    A = a0 - b0
    B = alen - blen
    cost = A * A + A * B + B * B / 3.0
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum() / total_units)


def pair_potential_direction(rho0: GridDensity, rho1: GridDensity,
                             direction: np.ndarray) -> float:
    """Exact directional derivative of 1/2 W2^2(rho0, .) at rho1.

    Weak pairing of the transport potential with a piecewise-constant,
    mass-neutral direction: after integration by parts this is
    -int (q1 - q0)(s) D(q1(s)) q1'(s) ds with D the cumulative of the
    direction, a piecewise quadratic in s on the merged quantile
    breakpoints, integrated exactly by two-point Gauss.
    """
    grid = rho1.grid
    interfaces = grid.interfaces
    cum0 = cumulative_masses(rho0)
    cum1 = cumulative_masses(rho1)
    s_knots = np.union1d(cum0, cum1)
    gap = np.diff(s_knots)
    off = gap / (2.0 * np.sqrt(3.0))
    mid = s_knots[:-1] + 0.5 * gap
    d_knots = np.concatenate([[0.0], np.cumsum(direction) * grid.dx])

    def integrand_parts(s):
        q0 = _quantile_core(cum0, interfaces, rho0.values, s)
        q1 = _quantile_core(cum1, interfaces, rho1.values, s)
        return q1 - q0, q1, np.interp(q1, interfaces, d_knots)

    da, q1a, Da = integrand_parts(mid - off)
    db, q1b, Db = integrand_parts(mid + off)
    slope = (q1b - q1a) / (2.0 * off)
    return float(-0.5 * np.sum(gap * (da * Da + db * Db) * slope))


def transport_gradient_fd(rho0: GridDensity, rho1: GridDensity,
                          direction: np.ndarray, eps: float = 1e-5):
    """(analytic, finite-difference) directional derivative of 1/2 W2^2."""
    grid = rho1.grid
    direction = np.asarray(direction, dtype=float)
    if abs(direction.sum() * grid.dx) > 1e-10:
        raise ValueError("direction must carry zero net mass")
    analytic = pair_potential_direction(rho0, rho1, direction)
    vp = rho1.values + eps * direction
    vm = rho1.values - eps * direction
    if np.any(vp < 0) or np.any(vm < 0):
        raise ValueError("perturbation leaves the nonnegative cone; shrink eps")
    fp = 0.5 * w2_squared(rho0, GridDensity(grid, vp))
    fm = 0.5 * w2_squared(rho0, GridDensity(grid, vm))
    fd = (fp - fm) / (2.0 * eps)
    return analytic, fd


def radial_disk_profile_search(rho0, tau: float, n_radii: int = 400):
    """Brute-force step oracle over uniform-disk profiles.

    Scans disk radii snapped to grid interfaces, with the height fixed
    by unit mass, and returns (best_radius, best_height, best_energy,
    energies).  Only meaningful when the true minimizer is itself a
    disk, which is what the matching solver test asserts.
    """
    from .radial import RadialDensity, sphere_surface_measure

    grid = rho0.grid
    d = rho0.dimension
    cd = sphere_surface_measure(d)
    m0 = rho0.mass_density()
    w = rho0.cell_measures
    box = rho0.interface_weights
    n = grid.n_cells
    # candidate disk edges live on interior interfaces
    idx = np.unique(np.linspace(1, n - 1, min(n_radii, n - 1)).astype(int))
    best = (np.inf, np.nan, np.nan)
    energies = []
    for j in idx:
        a = grid.interfaces[j]
        vals = np.zeros(n)
        vals[:j] = 1.0 / float(np.sum(w[:j]))
        height = vals[0]
        m = GridDensity(grid, cd * grid.centers ** (d - 1) * vals)
        energy = w2_squared(m, m0) / (2.0 * tau) + box[j] * height
        energies.append((float(a), float(energy)))
        if energy < best[0]:
            best = (energy, float(a), height)
    return best[1], best[2], best[0], energies
