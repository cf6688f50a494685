"""Exact proximal operator of weighted discrete total variation.

Solves min_u 1/2 sum_i w_i (u_i - y_i)^2 + sum_j t_j |u_{j+1} - u_j|
by the taut string construction: u is the derivative of the shortest
path through the tube of half-width t_j around the cumulative sums of
w*y, pinned at both ends.  The path is built in one sweep with a pair
of convex hulls (roof and floor of the funnel); when the funnel closes,
its apex becomes a fixed anchor of the string.  Exact in exact
arithmetic, O(n) work.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

# jump detection for the KKT alignment check, relative to data scale
_JUMP_RTOL = 1e-9


@njit(cache=True)
def _taut_core(X, Y, tube):
    # X: n+1 breakpoint positions, Y: n+1 cumulative values, tube: n-1
    # interior half-widths.  Returns the n per-segment slopes.
    n = Y.size - 1
    u = np.empty(n)
    cap = 2 * n + 8
    Uk = np.empty(cap, np.int64)
    Uv = np.empty(cap)
    Lk = np.empty(cap, np.int64)
    Lv = np.empty(cap)
    Ak = np.empty(cap, np.int64)
    Av = np.empty(cap)
    # roof chain U (kept convex), floor chain L (kept concave); both start
    # at the pinned left endpoint, which is also the first anchor
    uh = 0
    ut = 0
    lh = 0
    lt = 0
    na = 0
    Uk[ut] = 0
    Uv[ut] = Y[0]
    ut += 1
    Lk[lt] = 0
    Lv[lt] = Y[0]
    lt += 1
    Ak[na] = 0
    Av[na] = Y[0]
    na += 1
    for k in range(1, n + 1):
        if k < n:
            pu = Y[k] + tube[k - 1]
            pl = Y[k] - tube[k - 1]
        else:
            # right endpoint is pinned: enters both chains
            pu = Y[n]
            pl = Y[n]
        xk = X[k]
        # extend roof with (xk, pu)
        while ut - uh >= 2:
            c = (X[Uk[ut - 1]] - X[Uk[ut - 2]]) * (pu - Uv[ut - 2]) \
                - (Uv[ut - 1] - Uv[ut - 2]) * (xk - X[Uk[ut - 2]])
            if c <= 0.0:
                ut -= 1
            else:
                break
        while ut - uh == 1 and lt - lh >= 2:
            c = (X[Lk[lh + 1]] - X[Lk[lh]]) * (pu - Lv[lh]) \
                - (Lv[lh + 1] - Lv[lh]) * (xk - X[Lk[lh]])
            if c <= 0.0:
                # roof hits the floor: funnel apex advances, emit anchor
                lh += 1
                Ak[na] = Lk[lh]
                Av[na] = Lv[lh]
                na += 1
                uh = ut
                Uk[ut] = Lk[lh]
                Uv[ut] = Lv[lh]
                ut += 1
            else:
                break
        Uk[ut] = k
        Uv[ut] = pu
        ut += 1
        # extend floor with (xk, pl)
        while lt - lh >= 2:
            c = (X[Lk[lt - 1]] - X[Lk[lt - 2]]) * (pl - Lv[lt - 2]) \
                - (Lv[lt - 1] - Lv[lt - 2]) * (xk - X[Lk[lt - 2]])
            if c >= 0.0:
                lt -= 1
            else:
                break
        while lt - lh == 1 and ut - uh >= 2:
            c = (X[Uk[uh + 1]] - X[Uk[uh]]) * (pl - Uv[uh]) \
                - (Uv[uh + 1] - Uv[uh]) * (xk - X[Uk[uh]])
            if c >= 0.0:
                uh += 1
                Ak[na] = Uk[uh]
                Av[na] = Uv[uh]
                na += 1
                lh = lt
                Lk[lt] = Uk[uh]
                Lv[lt] = Uv[uh]
                lt += 1
            else:
                break
        Lk[lt] = k
        Lv[lt] = pl
        lt += 1
    Ak[na] = n
    Av[na] = Y[n]
    na += 1
    for a in range(na - 1):
        k0 = Ak[a]
        k1 = Ak[a + 1]
        if k1 <= k0:
            continue
        slope = (Av[a + 1] - Av[a]) / (X[k1] - X[k0])
        for i in range(k0, k1):
            u[i] = slope
    return u


def taut_string_solve(y, tube, data_weights=None) -> np.ndarray:
    """Weighted TV prox of the data vector y.

    tube holds the n-1 interface penalties t_j; data_weights the n
    positive quadratic weights w_i (all ones when omitted).
    """
    y = np.ascontiguousarray(y, dtype=float)
    n = y.size
    if n <= 1:
        return y.copy()
    if data_weights is None:
        X = np.arange(n + 1, dtype=float)
        Y = np.empty(n + 1)
        Y[0] = 0.0
        np.cumsum(y, out=Y[1:])
    else:
        w = np.ascontiguousarray(data_weights, dtype=float)
        if w.shape != y.shape or np.any(w <= 0):
            raise ValueError("data_weights must be positive and match y")
        X = np.empty(n + 1)
        X[0] = 0.0
        np.cumsum(w, out=X[1:])
        Y = np.empty(n + 1)
        Y[0] = 0.0
        np.cumsum(w * y, out=Y[1:])
    tube = np.ascontiguousarray(tube, dtype=float)
    if tube.shape != (n - 1,):
        raise ValueError(f"tube must have length {n - 1}, got {tube.shape}")
    if np.any(tube < 0):
        raise ValueError("tube half-widths must be nonnegative")
    return _taut_core(X, Y, tube)


@dataclass(frozen=True, eq=False)
class ProxProblem:
    """One TV prox instance: uniform penalty lam, optional interface weights."""

    input: np.ndarray
    lam: float
    weights: np.ndarray | None = None

    def __post_init__(self):
        values = np.ascontiguousarray(self.input, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("input must be a nonempty 1D array")
        if not np.all(np.isfinite(values)):
            raise ValueError("input must be finite")
        if not (self.lam > 0):
            raise ValueError(f"lam must be positive, got {self.lam}")
        object.__setattr__(self, "input", values)
        if self.weights is not None:
            w = np.ascontiguousarray(self.weights, dtype=float)
            if w.shape != (values.size - 1,):
                raise ValueError("weights must have one entry per interface")
            if np.any(w < 0) or not np.all(np.isfinite(w)):
                raise ValueError("weights must be finite and nonnegative")
            object.__setattr__(self, "weights", w)

    def tube(self) -> np.ndarray:
        n = self.input.size
        if self.weights is None:
            return np.full(n - 1, self.lam)
        return self.lam * self.weights


def tv_prox(problem: ProxProblem) -> np.ndarray:
    return taut_string_solve(problem.input, problem.tube())


def weighted_total_variation(values, interface_weights=None) -> float:
    jumps = np.abs(np.diff(values))
    if interface_weights is not None:
        jumps = jumps * interface_weights
    return float(jumps.sum())


def prox_kkt_residual(u, y, tube, data_weights=None) -> float:
    """Worst violation of the prox optimality system; 0 at the exact solution.

    Checks the dual variable recovered from the primal: box feasibility,
    alignment with the sign of each jump, and total force balance.
    """
    u = np.asarray(u, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.ones_like(y) if data_weights is None else np.asarray(data_weights, dtype=float)
    force = np.cumsum(w * (u - y))
    viol = abs(force[-1])
    if u.size == 1:
        return float(viol)
    z = force[:-1]
    viol = max(viol, float(np.max(np.abs(z) - tube)))
    du = np.diff(u)
    scale = max(float(np.max(np.abs(u))), float(np.max(np.abs(y))), 1.0)
    jumps = np.abs(du) > _JUMP_RTOL * scale
    if np.any(jumps):
        viol = max(viol, float(np.max(np.abs(z[jumps] - tube[jumps] * np.sign(du[jumps])))))
    return float(viol)
