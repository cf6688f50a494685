"""Cross-module property checks: bound propagation, dissipation, duality.

Each case draws a seeded random instance, runs the relevant solver
path, and reports a signed margin (nonnegative means the property
held).  Skipped preconditions report as skips, never as passes.  The
suite doubles as a sensitivity harness: capping the solver at one
iteration must break the certificate cases, proving the assertions
actually bite.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from .grid_density import GridSpec, GridDensity, total_variation
from .jko_solver import JkoConfig, jko_step
from .flow_driver import run_flow
from .radial import RadialDensity, radial_jko_step, radial_min_principle_check
from .analytic_reference import uniform_block_density, hat_ramp_density

# single global slack for grid-scale violations of continuum bounds:
# solver accuracy plus one cell of mass rearranged across a jump
def grid_tolerance(max_rho0: float, dx: float, el_tolerance: float = 1e-6) -> float:
    return 10.0 * el_tolerance + 2.0 * max_rho0 * dx


# certificate bounds asserted for every converged solve
CERT_MAX_ABS_Z = 1.0 + 1e-4
CERT_COMPLEMENTARITY = 1e-6
CERT_EL_RESIDUAL = 1e-6
CERT_JUMP_ALIGNMENT = 1e-3


@dataclass(frozen=True)
class CaseResult:
    name: str
    seed: int
    margin: float
    tolerance: float
    verdict: str
    paper_anchor: str


@dataclass(frozen=True)
class SuiteReport:
    seed: int
    cases: tuple

    @property
    def n_failed(self) -> int:
        return sum(1 for c in self.cases if c.verdict == "fail")

    @property
    def all_passed(self) -> bool:
        return self.n_failed == 0


def _verdict(margin: float) -> str:
    return "pass" if margin >= 0 else "fail"


def _rough_density(grid: GridSpec, rng, floor=0.0, smooth=0) -> GridDensity:
    vals = rng.random(grid.n_cells) + floor
    if smooth:
        vals = np.convolve(vals, np.ones(smooth) / smooth, mode="same")
    return GridDensity.normalized(grid, vals)


def certificate_margin(cert) -> float:
    """Distance to the closest certified-solve bound; >= 0 means inside."""
    return min(CERT_MAX_ABS_Z - cert.max_abs_z,
               CERT_COMPLEMENTARITY - cert.complementarity,
               CERT_EL_RESIDUAL - cert.residual_el,
               CERT_JUMP_ALIGNMENT - cert.jump_alignment)


def _upper_bound_cases(seed, cfg_of, results):
    grid = GridSpec(-1.0, 1.0, 192)
    for h, count, tag in ((0.0, 10, "h0"), (1e-2, 5, "ent")):
        for i in range(count):
            rng = np.random.default_rng(seed + 17 * i + (0 if h == 0 else 911))
            rho0 = _rough_density(grid, rng, floor=0.02)
            tau = (1e-1, 1e-2, 1e-3)[i % 3]
            res = jko_step(rho0, cfg_of(JkoConfig(tau=tau, entropy_h=h,
                                                  max_outer_iter=3000)))
            eps = grid_tolerance(rho0.values.max(), grid.dx)
            margin = rho0.values.max() + eps - res.rho1.values.max()
            results.append(CaseResult(f"upper-bound-1d-{tag}-{i}", seed, margin,
                                      eps, _verdict(margin), "step-upper-bound"))
            if res.converged:
                cm = certificate_margin(res.certificate)
                results.append(CaseResult(f"certificate-on-converged-{tag}-{i}", seed,
                                          cm, 0.0, _verdict(cm),
                                          "step-optimality-certificate"))


def _lower_bound_cases(seed, cfg_of, results):
    grid = GridSpec(-1.0, 1.0, 192)
    for i in range(10):
        rng = np.random.default_rng(seed + 31 * i + 5000)
        rho0 = _rough_density(grid, rng, floor=0.15, smooth=5)
        worst = np.inf
        eps = grid_tolerance(rho0.values.max(), grid.dx)
        for tau in (1e-1, 1e-2, 1e-3):
            res = jko_step(rho0, cfg_of(JkoConfig(tau=tau, max_outer_iter=3000)))
            worst = min(worst, res.rho1.values.min() - (rho0.values.min() - eps))
        results.append(CaseResult(f"lower-bound-1d-{i}", seed, worst, eps,
                                  _verdict(worst), "step-lower-bound"))


def _dissipation_cases(seed, cfg_of, results):
    grid = GridSpec(-1.0, 1.0, 128)
    tau = 2e-2
    for i in range(5):
        rng = np.random.default_rng(seed + 101 * i + 20000)
        rho0 = _rough_density(grid, rng, floor=0.05, smooth=7)
        traj = run_flow(rho0, tau, 0.2, cfg_of(JkoConfig(tau=tau, max_outer_iter=6000)))
        j0 = total_variation(rho0)
        if not traj.completed:
            results.append(CaseResult(f"dissipation-flow-{i}", seed, -1.0, 0.0,
                                      "fail", "flow-energy-dissipation"))
            continue
        sup_j = max(d.tv_value for d in traj.steps)
        margin = min(j0 - traj.sum_w2sq / (2.0 * tau), j0 - sup_j)
        results.append(CaseResult(f"dissipation-flow-{i}", seed, margin, 0.0,
                                  _verdict(margin), "flow-energy-dissipation"))


def _certificate_cases(seed, cfg_of, results):
    tau = 1.0 / 3.0
    grid = GridSpec(-4.0, 4.0, 512)
    named = [("certificate-gate-uniform", uniform_block_density(grid, 1.0), tau),
             ("certificate-gate-hat",
              hat_ramp_density(GridSpec(-2.0, 2.0, 1024)), 1.0 / 270.0)]
    for i in range(2):
        rng = np.random.default_rng(seed + 57 * i + 40000)
        g = GridSpec(-1.0, 1.0, 192)
        named.append((f"certificate-gate-random-{i}",
                      _rough_density(g, rng, floor=0.05, smooth=3), 2e-2))
    for name, rho0, t in named:
        res = jko_step(rho0, cfg_of(JkoConfig(tau=t, max_outer_iter=8000)))
        margin = certificate_margin(res.certificate) if res.converged else -1.0
        results.append(CaseResult(name, seed, margin, 0.0, _verdict(margin),
                                  "step-optimality-certificate"))


def _radial_cases(seed, cfg_of, results):
    grid = GridSpec(0.0, 1.0, 192)
    for d in (2, 3):
        rng = np.random.default_rng(seed + d * 7777)
        alpha = 0.4
        bump = alpha + 0.5 * np.exp(-((grid.centers - 0.4 - 0.05 * d) ** 2) / 0.01)
        rho0 = RadialDensity.normalized(d, grid, bump)
        a_eff = float(rho0.values.min())
        rho1, diag = radial_jko_step(rho0, cfg_of(JkoConfig(tau=1e-2,
                                                            max_outer_iter=5000)))
        rep = radial_min_principle_check(rho0, rho1, a_eff)
        margin = (rep.min_value - rep.threshold) if rep.checked else -1.0
        results.append(CaseResult(f"radial-lower-bound-d{d}", seed, margin,
                                  a_eff - rep.threshold, _verdict(margin),
                                  "radial-lower-bound"))
        eps = grid_tolerance(rho0.values.max(), grid.dx)
        m2 = rho0.values.max() + eps - rho1.values.max()
        results.append(CaseResult(f"radial-upper-bound-d{d}", seed, m2, eps,
                                  _verdict(m2), "radial-upper-bound"))
        if diag.converged:
            cm = certificate_margin(diag.certificate)
            results.append(CaseResult(f"certificate-on-converged-radial-d{d}", seed,
                                      cm, 0.0, _verdict(cm),
                                      "step-optimality-certificate"))
    # precondition unmet: profile touches zero, so the check must skip
    touching = RadialDensity.normalized(2, grid, np.maximum(1.0 - grid.centers, 0.0))
    rho1, _ = radial_jko_step(touching, cfg_of(JkoConfig(tau=1e-2,
                                                         max_outer_iter=2000)))
    rep = radial_min_principle_check(touching, rho1, 0.1)
    verdict = "skip" if not rep.checked else "fail"
    results.append(CaseResult("radial-lower-bound-precondition", seed, 0.0, 0.0,
                              verdict, "radial-lower-bound"))


def run_suite(seed: int = 0, iteration_cap: int | None = None) -> SuiteReport:
    """Run every registered case; iteration_cap starves the solver to
    verify the harness actually detects broken optimality (negative
    control), so a capped run is expected to fail certificate cases."""

    def cfg_of(cfg: JkoConfig) -> JkoConfig:
        if iteration_cap is None:
            return cfg
        return replace(cfg, max_outer_iter=iteration_cap)

    results: list[CaseResult] = []
    _upper_bound_cases(seed, cfg_of, results)
    _lower_bound_cases(seed, cfg_of, results)
    _dissipation_cases(seed, cfg_of, results)
    _certificate_cases(seed, cfg_of, results)
    _radial_cases(seed, cfg_of, results)
    return SuiteReport(seed=seed, cases=tuple(results))


def write_report_csv(path, report: SuiteReport) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["case", "seed", "margin", "tolerance", "verdict", "paper_anchor"])
        for c in report.cases:
            w.writerow([c.name, c.seed, repr(c.margin), repr(c.tolerance),
                        c.verdict, c.paper_anchor])
