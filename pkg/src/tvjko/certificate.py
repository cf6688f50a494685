"""Dual optimality certificates for one minimization step.

A candidate minimizer of  W2^2(rho0, .)/(2 tau) + TV  over the mass
simplex is certified by an interface field Z with |Z_j| <= box_j,
Z = -box * sign(jump) across every density jump, and a cell balance

    drive_i - c + (Z_{i+1} - Z_i)/w_i = beta_i >= 0,   beta_i rho_i = 0,

where drive_i = phi_i/tau + h (1 + log rho_i), w_i is the cell measure
and box_j the TV weight of interface j (1 in flat geometry, the sphere
area in radial geometry, 0 at the domain boundary).  The constant c is
the simplex multiplier; it is fitted, not prescribed, because the
transport potential is only defined up to a constant.

The builder integrates the balance exactly across the support of the
density and threads the vacuum gaps inside the dual box, never snapping
stored values to the feasible set: any infeasibility is left visible to
the reported metrics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .grid_density import GridDensity
from .transport1d import transport

# cells below this fraction of the peak count as vacuum
VACUUM_RTOL = 1e-10
# density jumps below this fraction of the value range are not pinned
JUMP_RTOL = 1e-5


@dataclass(frozen=True, eq=False)
class DualCertificate:
    """Certificate data and its violation metrics.

    z_values holds Z_j / box_j (0 where box_j = 0), so feasibility reads
    max_abs_z <= 1 and alignment compares z directly against -sign(jump).
    residual_el is the density-mass-weighted RMS of the cell balance,
    complementarity the mass carried by cells with active beta, and
    beta_negativity the worst infeasible (clamped) multiplier.
    """

    z_values: np.ndarray
    beta_values: np.ndarray
    residual_el: float
    max_abs_z: float
    complementarity: float
    jump_alignment: float
    residual_cells: np.ndarray
    duality_gap: float
    c_fit: float
    beta_negativity: float
    support_mask: np.ndarray


@njit(cache=True)
def _z_walk(r, w, box, support, pins):
    # integrate Z across support cells, thread vacuum runs inside the box;
    # pins[j] (NaN = free) is the value required when a vacuum run ends at j
    n = r.size
    Z = np.zeros(n + 1)
    beta = np.zeros(n)
    i = 0
    while i < n:
        if support[i] != 0:
            Z[i + 1] = Z[i] + r[i]
            i += 1
            continue
        j = i
        while j < n and support[j] == 0:
            j += 1
        zc = Z[i]
        if zc > box[i]:
            zc = box[i]
        elif zc < -box[i]:
            zc = -box[i]
        for k in range(i, j):
            cand = zc + r[k]
            if cand < -box[k + 1]:
                cand = -box[k + 1]
            elif cand > box[k + 1]:
                cand = box[k + 1]
            Z[k + 1] = cand
            beta[k] = (cand - zc - r[k]) / w[k]
            zc = cand
        t = pins[j]
        if not np.isnan(t) and Z[j] < t:
            # a nonnegative multiplier on the last vacuum cell lifts the
            # walk onto the pin; overshoot is left in place instead
            beta[j - 1] += (t - Z[j]) / w[j - 1]
            Z[j] = t
        i = j
    return Z, beta


def _jump_threshold(values: np.ndarray) -> float:
    vmax = float(values.max())
    return JUMP_RTOL * float(values.max() - values.min()) + 1e-14 * max(vmax, 1.0)


def _metrics(values, drive, w, box, Z, beta, cc, support):
    n = values.size
    dz_over_w = np.diff(Z) / w
    resid = drive - cc + dz_over_w - beta
    mass = w * values
    residual_el = float(np.sqrt(np.sum(mass * resid * resid)))
    complementarity = float(np.sum(beta * mass))
    interior = box[1:-1] > 0
    z_tilde = np.zeros(n + 1)
    pos = np.concatenate([[False], interior, [False]])
    z_tilde[pos] = Z[pos] / box[pos]
    max_abs_z = float(np.max(np.abs(z_tilde[1:-1]), initial=0.0))
    dv = np.diff(values)
    big = (np.abs(dv) > _jump_threshold(values)) & interior
    if np.any(big):
        jump_alignment = float(np.max(np.abs(z_tilde[1:-1][big] + np.sign(dv[big]))))
    else:
        jump_alignment = 0.0
    tv_w = float(np.sum(box[1:-1] * np.abs(dv)))
    pairing = float(np.sum(values * np.diff(Z)))
    duality_gap = abs(tv_w - pairing)
    return dict(
        z_values=z_tilde,
        residual_el=residual_el,
        max_abs_z=max_abs_z,
        complementarity=complementarity,
        jump_alignment=jump_alignment,
        residual_cells=resid,
        duality_gap=duality_gap,
        c_fit=float(cc),
        support_mask=support.copy(),
    )


def _fit_constants(values, drive, w, box, support):
    # every interface whose Z value is known a priori (domain ends, pinned
    # jumps) yields one linear equation in c per support-only span
    n = values.size
    thr = _jump_threshold(values)
    dv = np.diff(values)
    anchor_idx = [0]
    anchor_val = [0.0]
    for j in range(1, n):
        if box[j] > 0 and abs(dv[j - 1]) > thr:
            anchor_idx.append(j)
            anchor_val.append(-box[j] * np.sign(dv[j - 1]))
    anchor_idx.append(n)
    anchor_val.append(0.0)
    wd = w * drive
    cum_w = np.concatenate([[0.0], np.cumsum(w)])
    cum_wd = np.concatenate([[0.0], np.cumsum(wd)])
    cum_vac = np.concatenate([[0], np.cumsum(~support)])
    num = 0.0
    den = 0.0
    for (a, va), (b, vb) in zip(zip(anchor_idx[:-1], anchor_val[:-1]),
                                zip(anchor_idx[1:], anchor_val[1:])):
        if b <= a or cum_vac[b] != cum_vac[a]:
            continue
        span_w = cum_w[b] - cum_w[a]
        rhs = (cum_wd[b] - cum_wd[a]) + (vb - va)
        num += span_w * rhs
        den += span_w * span_w
    candidates = []
    if den > 0:
        candidates.append(num / den)
    mass_supp = float(np.sum(w[support]))
    if mass_supp > 0:
        fallback = float(np.sum(wd[support]) / mass_supp)
        if not candidates or abs(fallback - candidates[0]) > 1e-15 * (1 + abs(fallback)):
            candidates.append(fallback)
    if not candidates:
        candidates.append(0.0)
    return candidates


def build_certificate_general(values, drive, w, box,
                              support_mask=None) -> DualCertificate:
    """Certificate for arbitrary cell measures w and interface weights box.

    box must vanish at both domain ends; support_mask overrides the
    default vacuum detection when the caller knows the active set.
    """
    values = np.asarray(values, dtype=float)
    drive = np.asarray(drive, dtype=float)
    w = np.asarray(w, dtype=float)
    box = np.asarray(box, dtype=float)
    n = values.size
    if box.shape != (n + 1,) or box[0] != 0.0 or box[-1] != 0.0:
        raise ValueError("box must have n+1 entries and vanish at the ends")
    if support_mask is None:
        support = values > VACUUM_RTOL * float(values.max())
    else:
        support = np.asarray(support_mask, dtype=bool).copy()
    if not np.any(support):
        support = np.ones(n, dtype=bool)

    thr = _jump_threshold(values)
    dv = np.diff(values)
    pins = np.full(n + 1, np.nan)
    pins[n] = 0.0
    up_into_support = np.nonzero(support[1:] & ~support[:-1] & (np.abs(dv) > thr))[0] + 1
    pins[up_into_support] = -box[up_into_support] * np.sign(dv[up_into_support - 1])

    best = None
    best_score = np.inf
    support_u1 = support.astype(np.uint8)
    for cc in _fit_constants(values, drive, w, box, support):
        r = -w * (drive - cc)
        Z, beta_raw = _z_walk(r, w, box, support_u1, pins)
        if support[-1]:
            Z = Z.copy()
            Z[-1] = 0.0
        beta_neg = float(max(0.0, -np.min(beta_raw, initial=0.0)))
        beta = np.maximum(beta_raw, 0.0)
        m = _metrics(values, drive, w, box, Z, beta, cc, support)
        score = (m["residual_el"] + m["complementarity"] + m["jump_alignment"]
                 + max(0.0, m["max_abs_z"] - 1.0) + beta_neg)
        if score < best_score:
            best_score = score
            best = DualCertificate(beta_values=beta, beta_negativity=beta_neg, **m)
    return best


def _drive_of(rho: GridDensity, phi: np.ndarray, tau: float, h: float) -> np.ndarray:
    drive = np.asarray(phi, dtype=float) / tau
    if h > 0:
        drive = drive + h * (1.0 + np.log(np.maximum(rho.values, 1e-300)))
    return drive


def _flat_box(n: int) -> np.ndarray:
    box = np.ones(n + 1)
    box[0] = 0.0
    box[-1] = 0.0
    return box


def build_certificate(rho1: GridDensity, phi: np.ndarray, tau: float,
                      h: float = 0.0) -> DualCertificate:
    """Certificate for a flat 1D step; phi is the potential of rho1 -> rho0."""
    n = rho1.grid.n_cells
    w = np.full(n, rho1.grid.dx)
    return build_certificate_general(rho1.values, _drive_of(rho1, phi, tau, h),
                                     w, _flat_box(n))


def certificate_from_fields(rho1: GridDensity, phi: np.ndarray, tau: float,
                            z_values: np.ndarray, beta_values=None,
                            h: float = 0.0) -> DualCertificate:
    """Metrics for externally supplied fields (e.g. closed-form solutions).

    The constant c is chosen to minimize the weighted residual; beta
    defaults to zero.
    """
    n = rho1.grid.n_cells
    w = np.full(n, rho1.grid.dx)
    box = _flat_box(n)
    values = rho1.values
    drive = _drive_of(rho1, phi, tau, h)
    z_values = np.asarray(z_values, dtype=float)
    if z_values.shape != (n + 1,):
        raise ValueError(f"z_values must have {n + 1} entries")
    beta = np.zeros(n) if beta_values is None else np.asarray(beta_values, dtype=float)
    support = values > VACUUM_RTOL * float(values.max())
    if not np.any(support):
        support = np.ones(n, dtype=bool)
    Z = z_values * box
    base = drive + np.diff(Z) / w - beta
    mass = w * values
    cc = float(np.sum(mass * base) / np.sum(mass))
    m = _metrics(values, drive, w, box, Z, beta, cc, support)
    beta_neg = float(max(0.0, -np.min(beta, initial=0.0)))
    return DualCertificate(beta_values=np.maximum(beta, 0.0),
                           beta_negativity=beta_neg, **m)


@dataclass(frozen=True)
class SufficiencyReport:
    """Outcome of the closed sufficient conditions for step optimality."""

    stationarity_min: float
    support_residual: float
    box_excess: float
    jump_alignment: float
    satisfied: bool


def check_sufficient_conditions(rho1: GridDensity, rho0: GridDensity,
                                tau: float, cert: DualCertificate,
                                h: float = 0.0, tol: float = 1e-4) -> SufficiencyReport:
    """Verify the certificate against freshly recomputed transport data.

    Conditions: the cell balance drive - c + Z'/w must be nonnegative
    everywhere (within tol), vanish on the support, and Z must sit in
    the dual box with the correct sign at every density jump.
    """
    n = rho1.grid.n_cells
    w = np.full(n, rho1.grid.dx)
    box = _flat_box(n)
    drive = _drive_of(rho1, transport(rho1, rho0).potential, tau, h)
    Z = cert.z_values * box
    balance = drive - cert.c_fit + np.diff(Z) / w
    stationarity_min = float(balance.min())
    supp = cert.support_mask
    support_residual = float(np.max(np.abs(balance[supp]), initial=0.0))
    box_excess = max(0.0, cert.max_abs_z - 1.0)
    ok = (stationarity_min >= -tol and support_residual <= tol
          and box_excess <= tol and cert.jump_alignment <= tol)
    return SufficiencyReport(stationarity_min=stationarity_min,
                             support_residual=support_residual,
                             box_excess=box_excess,
                             jump_alignment=cert.jump_alignment,
                             satisfied=bool(ok))


def write_certificate_interface_csv(path, rho1: GridDensity,
                                    cert: DualCertificate) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x_interface", "z"])
        for x, z in zip(rho1.grid.interfaces, cert.z_values):
            w.writerow([repr(float(x)), repr(float(z))])


def write_certificate_cell_csv(path, rho1: GridDensity,
                               cert: DualCertificate) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x_center", "beta", "residual_cell"])
        for x, b, r in zip(rho1.grid.centers, cert.beta_values, cert.residual_cells):
            w.writerow([repr(float(x)), repr(float(b)), repr(float(r))])
