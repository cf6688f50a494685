"""Closed-form minimizers used to validate the numerical solvers.

Two exactly solvable step problems are provided: a centered uniform
block, which stays a uniform block with a computable half-width, and a
unit hat profile, which develops a flat plateau whose edge solves a
scalar algebraic equation.  Both come with the matching potential and
dual field so certificates can be cross-checked against closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .grid_density import GridSpec, GridDensity

# hat plateau times are only defined on this open interval
HAT_TAU_MAX = 0.1
_ROOT_XTOL = 1e-15
_ROOT_RTOL = 8.9e-16


def ball_alpha_next(alpha: float, tau: float, dimension: int = 1) -> float:
    """Radius after one step from a centered uniform ball of radius alpha.

    The minimizer is again a uniform ball; its radius is the root of
    s^2 (s - alpha) = (dimension + 2) tau, to full float accuracy.
    """
    if not (alpha > 0 and tau > 0):
        raise ValueError("alpha and tau must be positive")
    if dimension < 1:
        raise ValueError("dimension must be at least 1")
    rhs = (dimension + 2.0) * tau

    def f(s):
        return s * s * (s - alpha) - rhs

    hi = alpha + rhs / (alpha * alpha)
    # f(alpha) = -rhs < 0 and f(hi) >= 0 since s >= alpha on the bracket
    return float(brentq(f, alpha, hi * (1 + 1e-12), xtol=_ROOT_XTOL, rtol=_ROOT_RTOL))


def uniform_alpha_next(alpha: float, tau: float) -> float:
    return ball_alpha_next(alpha, tau, 1)


def ball_w2_squared(alpha: float, s: float, dimension: int = 1) -> float:
    """Squared distance between centered uniform balls of radii alpha, s."""
    d = float(dimension)
    return d / (d + 2.0) * (s - alpha) ** 2


def ball_weighted_tv(s: float, dimension: int = 1) -> float:
    """Weighted TV of the unit-mass uniform ball of radius s."""
    return float(dimension) / s


@dataclass(frozen=True, eq=False)
class UniformEvolution:
    """Half-widths of the uniform block under repeated steps of size tau."""

    alpha0: float
    tau: float
    alphas: np.ndarray

    def closed_form(self, t: float) -> float:
        # continuum limit of the recursion: alpha' = 3/alpha^2
        return float(np.cbrt(self.alpha0 ** 3 + 9.0 * t))


def uniform_evolution(alpha0: float, tau: float, n_steps: int) -> UniformEvolution:
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    alphas = np.empty(n_steps + 1)
    alphas[0] = alpha0
    for k in range(n_steps):
        alphas[k + 1] = uniform_alpha_next(alphas[k], tau)
    alphas.setflags(write=False)
    return UniformEvolution(alpha0=alpha0, tau=tau, alphas=alphas)


def hat_tau_of_beta(beta: float) -> float:
    """Step size for which the hat plateau edge lands exactly at beta."""
    if not (0 <= beta <= 1):
        raise ValueError("beta must lie in [0, 1]")
    b = float(beta)
    return (b ** 3 / 3.0 - b * b / 2.0
            + 4.0 * (1.0 - (1.0 - b) ** 5) / (15.0 * (2.0 - b) ** 2)
            - 2.0 * (1.0 - b) ** 3 * b / (3.0 * (2.0 - b)))


def hat_beta_of_tau(tau: float) -> float:
    """Inverse of hat_tau_of_beta on (0, 1/10); strictly monotone there."""
    if not (0 < tau < HAT_TAU_MAX):
        raise ValueError(f"tau must lie in (0, {HAT_TAU_MAX}) for a plateau solution")
    return float(brentq(lambda b: hat_tau_of_beta(b) - tau, 0.0, 1.0,
                        xtol=_ROOT_XTOL, rtol=_ROOT_RTOL))


@dataclass(frozen=True)
class HatSolution:
    tau: float
    beta: float
    plateau_height: float


def hat_solution(tau: float) -> HatSolution:
    beta = hat_beta_of_tau(tau)
    return HatSolution(tau=tau, beta=beta, plateau_height=1.0 - beta / 2.0)


def uniform_block_density(grid: GridSpec, alpha: float) -> GridDensity:
    """Unit-mass block of half-width alpha, sampled at cell centers."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    v = np.where(np.abs(grid.centers) < alpha, 1.0 / (2.0 * alpha), 0.0)
    return GridDensity.normalized(grid, v)


def hat_ramp_density(grid: GridSpec) -> GridDensity:
    """The unit hat (1 - |x|)_+ sampled at cell centers."""
    v = np.maximum(1.0 - np.abs(grid.centers), 0.0)
    return GridDensity.normalized(grid, v)


def hat_step_density(grid: GridSpec, beta: float) -> GridDensity:
    """Hat profile after one step: plateau of height 1 - beta/2 on |x| < beta."""
    x = np.abs(grid.centers)
    v = np.where(x < beta, 1.0 - beta / 2.0, np.maximum(1.0 - x, 0.0))
    return GridDensity.normalized(grid, v)


@dataclass(frozen=True, eq=False)
class StepProfiles:
    """Closed-form potential (cell centers) and dual field (interfaces)."""

    phi_values: np.ndarray
    z_values: np.ndarray


def _require_margin(grid: GridSpec, radius: float) -> None:
    margin = 2.0 * grid.dx
    if grid.left > -radius - margin or grid.right < radius + margin:
        raise ValueError("grid does not contain the support with a safety margin")
    if radius / grid.dx < 8:
        raise ValueError("grid too coarse: fewer than 8 cells across the feature")


def uniform_step_profiles(alpha0: float, tau: float, grid: GridSpec) -> StepProfiles:
    """Exact potential and dual field for one step from a uniform block."""
    a = float(alpha0)
    b = uniform_alpha_next(a, tau)
    _require_margin(grid, b)
    x = grid.centers
    ax = np.abs(x)
    inside = ax <= b
    phi = np.where(inside,
                   (b - a) / (2.0 * b) * x * x - 3.0 * tau / (2.0 * b),
                   0.5 * (ax - a) ** 2 - 0.5 * (b - a) ** 2)
    xi = grid.interfaces
    axi = np.abs(xi)
    core = (-(b - a) / (6.0 * b) * xi ** 3 + 3.0 * tau / (2.0 * b) * xi) / tau
    z = np.where(axi <= b, core, np.sign(xi))
    return StepProfiles(phi_values=phi, z_values=z)


def hat_step_profiles(tau: float, grid: GridSpec) -> StepProfiles:
    """Exact potential and dual field for one step from the unit hat."""
    beta = hat_beta_of_tau(tau)
    _require_margin(grid, 1.0)
    b = beta
    cb = 2.0 - b
    const = -b * b / 2.0 + b + 2.0 * (1.0 - b) ** 3 / (3.0 * cb)

    x = np.abs(grid.centers)
    phi = np.zeros_like(x)
    core = x < b
    xc = x[core]
    phi[core] = (xc * xc / 2.0 - xc
                 - (1.0 - xc * cb) ** 1.5 / (3.0 * (1.0 - b / 2.0)) + const)
    outer = x > 1.0
    phi[outer] = 0.5 * (x[outer] - 1.0) ** 2

    xi = grid.interfaces
    axi = np.abs(xi)
    z = np.sign(xi).astype(float)
    core_i = axi < b
    xc = axi[core_i]
    tz = (-xc ** 3 / 6.0 + xc * xc / 2.0
          - 4.0 / (15.0 * cb * cb) * (1.0 - xc * cb) ** 2.5
          + (b * b / 2.0 - b - 2.0 * (1.0 - b) ** 3 / (3.0 * cb)) * xc
          + 4.0 / (15.0 * cb * cb))
    z[core_i] = np.sign(xi[core_i]) * tz / tau
    return StepProfiles(phi_values=phi, z_values=z)
