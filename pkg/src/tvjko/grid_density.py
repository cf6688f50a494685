"""Probability densities on a uniform 1D grid.

A density is piecewise constant per cell (finite-volume view): the value
rho_i lives on the cell [x_i - dx/2, x_i + dx/2] and the cell mass is
rho_i * dx.  Total variation is the sum of interface jumps with no
boundary contribution, so block profiles whose jumps sit on cell
interfaces are represented exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

# construction tolerances: inputs further than MASS_INPUT_RTOL from unit
# mass are rejected, anything closer is silently renormalized to MASS_ATOL
MASS_ATOL = 1e-12
MASS_INPUT_RTOL = 1e-6

CSV_X_RTOL = 1e-9


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell-centered grid on [left, right] with n_cells cells."""

    left: float
    right: float
    n_cells: int

    def __post_init__(self) -> None:
        if not self.right > self.left:
            raise ValueError(f"need right > left, got [{self.left}, {self.right}]")
        if self.n_cells < 2:
            raise ValueError(f"need n_cells >= 2, got {self.n_cells}")

    @property
    def dx(self) -> float:
        return (self.right - self.left) / self.n_cells

    @cached_property
    def centers(self) -> np.ndarray:
        i = np.arange(self.n_cells)
        return self.left + (i + 0.5) * self.dx

    @cached_property
    def interfaces(self) -> np.ndarray:
        edges = self.left + np.arange(self.n_cells + 1) * self.dx
        edges[-1] = self.right
        return edges


@dataclass(frozen=True, eq=False)
class GridDensity:
    """Nonnegative cell values with unit total mass.

    Construction renormalizes the values so that sum(rho_i) * dx == 1 to
    MASS_ATOL and records the applied factor in renorm_factor.  Inputs
    whose mass deviates from 1 by more than MASS_INPUT_RTOL are rejected;
    use ``GridDensity.normalized`` to build from unnormalized values.
    """

    grid: GridSpec
    values: np.ndarray
    renorm_factor: float = field(default=1.0, compare=False)

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n_cells,):
            raise ValueError(f"values shape {vals.shape} does not match grid n_cells={self.grid.n_cells}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("density values must be finite")
        if np.any(vals < 0):
            raise ValueError(f"negative density value {vals.min()!r}")
        mass = float(vals.sum() * self.grid.dx)
        if abs(mass - 1.0) > MASS_INPUT_RTOL:
            raise ValueError(
                f"total mass {mass!r} deviates from 1 by more than {MASS_INPUT_RTOL}; "
                "normalize explicitly via GridDensity.normalized"
            )
        factor = 1.0 / mass
        vals = vals * factor
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "renorm_factor", factor)

    @classmethod
    def normalized(cls, grid: GridSpec, values: np.ndarray) -> "GridDensity":
        """Build a density from arbitrary nonnegative values with positive mass."""
        vals = np.asarray(values, dtype=float)
        mass = float(vals.sum() * grid.dx)
        if mass <= 0:
            raise ValueError("cannot normalize values with nonpositive mass")
        rho = cls(grid, vals / mass)
        object.__setattr__(rho, "renorm_factor", 1.0 / mass)
        return rho

    @property
    def masses(self) -> np.ndarray:
        return self.values * self.grid.dx

    def __repr__(self) -> str:  # arrays are noisy, keep it short
        g = self.grid
        return f"GridDensity(n={g.n_cells}, domain=[{g.left}, {g.right}], max={self.values.max():.6g})"


def total_variation(rho: GridDensity) -> float:
    """Sum of absolute interface jumps, no boundary terms."""
    return float(np.abs(np.diff(rho.values)).sum())


@dataclass(frozen=True, eq=False)
class CdfFunction:
    """Piecewise-linear CDF of a piecewise-constant density.

    Knots sit at the cell interfaces; the last knot is pinned to exactly 1.
    """

    x_knots: np.ndarray
    f_knots: np.ndarray

    def __call__(self, x):
        return np.interp(x, self.x_knots, self.f_knots)


def cumulative_masses(rho: GridDensity) -> np.ndarray:
    """Cumulative mass at each interface, pinned to [0, 1] exactly."""
    m = np.concatenate(([0.0], np.cumsum(rho.masses)))
    np.minimum(m, 1.0, out=m)
    m[-1] = 1.0
    return m


def cdf(rho: GridDensity) -> CdfFunction:
    return CdfFunction(rho.grid.interfaces, cumulative_masses(rho))


def quantile(rho: GridDensity, s):
    """Generalized inverse CDF, clipped to the support.

    Returns inf{x : F(x) >= s}; on flat CDF segments this is the left
    endpoint of the flat.  Values below the first positive cell are
    clipped up to the support's left edge (so quantile(rho, 0) is the
    left edge of the support, not of the domain), and symmetrically at
    the right.
    """
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0) or np.any(s_arr > 1):
        raise ValueError("quantile argument must lie in [0, 1]")
    x = _quantile_core(cumulative_masses(rho), rho.grid.interfaces, rho.values, s_arr)
    return float(x) if np.isscalar(s) or s_arr.ndim == 0 else x


def _quantile_core(cum: np.ndarray, interfaces: np.ndarray, values: np.ndarray, s: np.ndarray) -> np.ndarray:
    n = values.shape[0]
    idx = np.searchsorted(cum, s, side="left")
    cell = np.clip(idx, 1, n) - 1
    rho_c = values[cell]
    safe = np.where(rho_c > 0, rho_c, 1.0)
    x = interfaces[cell] + np.where(rho_c > 0, (s - cum[cell]) / safe, 0.0)
    pos = np.nonzero(values > 0)[0]
    # unit mass guarantees a nonempty support
    supp_left = interfaces[pos[0]]
    supp_right = interfaces[pos[-1] + 1]
    return np.clip(x, supp_left, supp_right)


def support_interval(rho: GridDensity) -> tuple[float, float]:
    """Interfaces bracketing the first and last strictly positive cell."""
    pos = np.nonzero(rho.values > 0)[0]
    edges = rho.grid.interfaces
    return float(edges[pos[0]]), float(edges[pos[-1] + 1])


def write_density_csv(path, rho: GridDensity) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "rho"])
        for x, v in zip(rho.grid.centers, rho.values):
            w.writerow([repr(float(x)), repr(float(v))])


def read_density_csv(path) -> GridDensity:
    """Read an `x,rho` file; the grid is inferred from the x column."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["x", "rho"]:
        raise ValueError(f"{path}: expected header 'x,rho'")
    try:
        data = np.array([[float(a), float(b)] for a, b in rows[1:]], dtype=float)
    except (ValueError, TypeError) as exc:
        raise ValueError(f"{path}: malformed row ({exc})") from exc
    if data.shape[0] < 2:
        raise ValueError(f"{path}: need at least 2 rows")
    x, vals = data[:, 0], data[:, 1]
    steps = np.diff(x)
    dx = steps.mean()
    if dx <= 0 or np.any(np.abs(steps - dx) > CSV_X_RTOL * max(abs(dx), 1.0)):
        raise ValueError(f"{path}: x column is not a uniform grid")
    neg = np.nonzero(vals < 0)[0]
    if neg.size:
        raise ValueError(f"{path}: negative density at row {neg[0] + 2}")
    grid = GridSpec(float(x[0] - dx / 2), float(x[-1] + dx / 2), len(x))
    return GridDensity(grid, vals)
