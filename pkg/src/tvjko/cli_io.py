"""Command-line runner: JSON-configured modes with CSV and manifest output.

Every run resolves its configuration up front (unknown keys rejected),
executes one mode, and emits a manifest.json recording the resolved
settings, library version, and summary metrics.  Outputs are
deterministic: same config and seed, byte-identical files.

Exit codes: 0 success, 1 input error, 2 solver non-convergence,
3 validation or oracle tolerance failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, asdict

import numpy as np

from . import __version__
from .grid_density import GridSpec, GridDensity, read_density_csv, write_density_csv
from .transport1d import write_transport_csv, w2_squared
from .certificate import write_certificate_interface_csv, write_certificate_cell_csv
from .jko_solver import JkoConfig, jko_step
from .flow_driver import (run_flow, write_trajectory_csv, write_diagnostics_csv,
                          weak_solution_residual)
from .radial import RadialDensity, radial_jko_step, read_radial_csv, write_radial_csv
from .analytic_reference import (uniform_block_density, uniform_alpha_next,
                                 hat_ramp_density, hat_solution)
from .oracles import (w2_quadrature_reference, w2_assignment_reference,
                      tv_prox_reference, transport_gradient_fd)
from .tv_prox import taut_string_solve
from .grid_density import total_variation

MODES = ("step", "flow", "radial_step", "radial_flow", "validate_uniform",
         "validate_hat", "oracle_check")

_TOP_KEYS = {"mode", "grid", "tau", "horizon", "entropy_h", "solver", "io",
             "radial", "seed", "oracle"}
_SECTION_KEYS = {
    "grid": {"left", "right", "n_cells"},
    "solver": {"max_outer_iter", "el_tolerance", "step_rule"},
    "io": {"input_path", "output_dir"},
    "radial": {"dimension", "radius"},
    "oracle": {"n_instances", "tolerance_scale"},
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    mode: str
    grid: GridSpec | None = None
    tau: float | None = None
    horizon: float | None = None
    entropy_h: float = 0.0
    max_outer_iter: int = 20000
    el_tolerance: float = 1e-6
    step_rule: str = "backtracking"
    input_path: str | None = None
    output_dir: str | None = None
    dimension: int | None = None
    radius: float | None = None
    seed: int = 0
    oracle_instances: int = 20
    oracle_tolerance_scale: float = 1.0

    def solver_config(self, tau: float) -> JkoConfig:
        return JkoConfig(tau=tau, entropy_h=self.entropy_h,
                         max_outer_iter=self.max_outer_iter,
                         el_tolerance=self.el_tolerance,
                         step_rule=self.step_rule)


def _reject_unknown(d: dict, allowed: set, where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")


def config_from_dict(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    _reject_unknown(raw, _TOP_KEYS, "config")
    for sec, keys in _SECTION_KEYS.items():
        if sec in raw:
            if not isinstance(raw[sec], dict):
                raise ConfigError(f"section {sec!r} must be an object")
            _reject_unknown(raw[sec], keys, f"section {sec!r}")

    mode = raw.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    grid = None
    if "grid" in raw:
        g = raw["grid"]
        missing = {"left", "right", "n_cells"} - set(g)
        if missing:
            raise ConfigError(f"grid section missing {sorted(missing)}")
        grid = GridSpec(float(g["left"]), float(g["right"]), int(g["n_cells"]))
    solver = raw.get("solver", {})
    io = raw.get("io", {})
    radial = raw.get("radial", {})
    oracle = raw.get("oracle", {})
    cfg = RunConfig(
        mode=mode,
        grid=grid,
        tau=float(raw["tau"]) if "tau" in raw else None,
        horizon=float(raw["horizon"]) if "horizon" in raw else None,
        entropy_h=float(raw.get("entropy_h", 0.0)),
        max_outer_iter=int(solver.get("max_outer_iter", 20000)),
        el_tolerance=float(solver.get("el_tolerance", 1e-6)),
        step_rule=str(solver.get("step_rule", "backtracking")),
        input_path=io.get("input_path"),
        output_dir=io.get("output_dir"),
        dimension=int(radial["dimension"]) if "dimension" in radial else None,
        radius=float(radial["radius"]) if "radius" in radial else None,
        seed=int(raw.get("seed", 0)),
        oracle_instances=int(oracle.get("n_instances", 20)),
        oracle_tolerance_scale=float(oracle.get("tolerance_scale", 1.0)),
    )
    _validate_mode_fields(cfg)
    return cfg


def _validate_mode_fields(cfg: RunConfig) -> None:
    need_tau = cfg.mode in ("step", "flow", "radial_step", "radial_flow")
    if need_tau and cfg.tau is None:
        raise ConfigError(f"mode {cfg.mode!r} requires tau")
    if cfg.mode in ("flow", "radial_flow") and cfg.horizon is None:
        raise ConfigError(f"mode {cfg.mode!r} requires horizon")
    if cfg.mode in ("step", "flow", "radial_step", "radial_flow") and not cfg.input_path:
        raise ConfigError(f"mode {cfg.mode!r} requires io.input_path")
    if cfg.mode in ("radial_step", "radial_flow") and cfg.dimension is None:
        raise ConfigError(f"mode {cfg.mode!r} requires radial.dimension")
    if cfg.tau is not None and not cfg.tau > 0:
        raise ConfigError("tau must be positive")
    if cfg.horizon is not None and not cfg.horizon > 0:
        raise ConfigError("horizon must be positive")


def apply_overrides(raw: dict, overrides: list[str]) -> dict:
    """key=value pairs with dotted paths; values parsed as JSON when possible."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        path, _, text = item.partition("=")
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        node = raw
        parts = path.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override path {path!r} crosses a non-object")
        node[parts[-1]] = value
    return raw


def _resolve_output_dir(cfg: RunConfig) -> str:
    out = cfg.output_dir or os.environ.get("TVJKO_OUTPUT_DIR") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _config_as_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    if cfg.grid is not None:
        d["grid"] = {"left": cfg.grid.left, "right": cfg.grid.right,
                     "n_cells": cfg.grid.n_cells}
    return d


def _json_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _write_manifest(out_dir: str, cfg: RunConfig, summary: dict,
                    files: list[str]) -> None:
    manifest = {
        "version": __version__,
        "mode": cfg.mode,
        "config": _config_as_dict(cfg),
        "summary": summary,
        "files": sorted(files),
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _cert_summary(cert) -> dict:
    return {
        "el_residual": cert.residual_el,
        "max_abs_z": cert.max_abs_z,
        "complementarity": cert.complementarity,
        "jump_alignment": cert.jump_alignment,
        "duality_gap": cert.duality_gap,
        "c_fit": cert.c_fit,
    }


def _load_density(cfg: RunConfig) -> GridDensity:
    rho = read_density_csv(cfg.input_path)
    if cfg.grid is not None and rho.grid != cfg.grid:
        raise ConfigError(f"grid in config disagrees with {cfg.input_path}")
    return rho


def _load_radial(cfg: RunConfig) -> RadialDensity:
    rho = read_radial_csv(cfg.input_path, cfg.dimension)
    if cfg.radius is not None and abs(rho.radius - cfg.radius) > 1e-9 * rho.radius:
        raise ConfigError(f"radial.radius disagrees with {cfg.input_path}")
    return rho


def _run_step(cfg: RunConfig, out: str) -> int:
    rho0 = _load_density(cfg)
    res = jko_step(rho0, cfg.solver_config(cfg.tau))
    files = ["rho1.csv", "transport.csv", "certificate_z.csv", "certificate_cells.csv"]
    write_density_csv(os.path.join(out, "rho1.csv"), res.rho1)
    write_transport_csv(os.path.join(out, "transport.csv"), res.rho1, res.transport)
    write_certificate_interface_csv(os.path.join(out, "certificate_z.csv"),
                                    res.rho1, res.certificate)
    write_certificate_cell_csv(os.path.join(out, "certificate_cells.csv"),
                               res.rho1, res.certificate)
    summary = {
        "converged": res.converged,
        "iterations_used": res.iterations_used,
        "energy": res.energy,
        "w2_squared": res.transport.w2_squared,
        "tv": total_variation(res.rho1),
        "entropy": res.entropy,
        "certificate": _cert_summary(res.certificate),
    }
    _write_manifest(out, cfg, summary, files)
    return 0 if res.converged else 2


def _run_flow(cfg: RunConfig, out: str) -> int:
    rho0 = _load_density(cfg)
    traj = run_flow(rho0, cfg.tau, cfg.horizon, cfg.solver_config(cfg.tau))
    files = ["trajectory.csv", "diagnostics.csv"]
    write_trajectory_csv(os.path.join(out, "trajectory.csv"), traj)
    write_diagnostics_csv(os.path.join(out, "diagnostics.csv"), traj)
    summary = {
        "completed": traj.completed,
        "abort_reason": traj.abort_reason,
        "n_steps": traj.n_steps,
        "sum_w2sq": traj.sum_w2sq,
        "tv_initial": total_variation(traj.densities[0]),
        "tv_terminal": total_variation(traj.densities[-1]),
        "weak_residual": weak_solution_residual(traj) if traj.n_steps else None,
    }
    _write_manifest(out, cfg, summary, files)
    return 0 if traj.completed else 2


def _run_radial_step(cfg: RunConfig, out: str) -> int:
    rho0 = _load_radial(cfg)
    rho1, diag = radial_jko_step(rho0, cfg.solver_config(cfg.tau))
    files = ["rho1_radial.csv", "certificate_z_radial.csv"]
    write_radial_csv(os.path.join(out, "rho1_radial.csv"), rho1)
    with open(os.path.join(out, "certificate_z_radial.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r_interface", "z"])
        for r, z in zip(rho1.grid.interfaces, diag.certificate.z_values):
            w.writerow([repr(float(r)), repr(float(z))])
    summary = {
        "converged": diag.converged,
        "iterations_used": diag.iterations_used,
        "energy": diag.energy,
        "w2_squared": diag.w2_squared,
        "tv_weighted": diag.tv_weighted,
        "z_r_lipschitz": diag.z_r_lipschitz,
        "certificate": _cert_summary(diag.certificate),
    }
    _write_manifest(out, cfg, summary, files)
    return 0 if diag.converged else 2


def _run_radial_flow(cfg: RunConfig, out: str) -> int:
    rho0 = _load_radial(cfg)
    n_target = int(np.floor(cfg.horizon / cfg.tau + 1e-12))
    if n_target < 1:
        raise ConfigError("horizon must cover at least one step")
    solver = cfg.solver_config(cfg.tau)
    prev = rho0
    diags = []
    completed = True
    abort_reason = None
    for k in range(1, n_target + 1):
        rho1, diag = radial_jko_step(prev, solver)
        diags.append((k, diag, rho1))
        if not diag.converged:
            completed = False
            abort_reason = (f"step {k} failed its certificate after "
                            f"{diag.iterations_used} iterations")
            break
        prev = rho1
    files = ["trajectory_radial.csv", "diagnostics_radial.csv"]
    with open(os.path.join(out, "trajectory_radial.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "t", "r", "rho"])
        chain = [(0, rho0)] + [(k, r1) for k, d, r1 in diags if d.converged]
        for k, rho in chain:
            for r, v in zip(rho.grid.centers, rho.values):
                w.writerow([k, repr(k * cfg.tau), repr(float(r)), repr(float(v))])
    with open(os.path.join(out, "diagnostics_radial.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "t", "w2sq_step", "tv_weighted", "energy", "min_rho",
                    "max_rho", "max_abs_z", "el_residual", "complementarity",
                    "z_r_lipschitz"])
        for k, d, r1 in diags:
            c = d.certificate
            w.writerow([k, repr(k * cfg.tau), repr(d.w2_squared), repr(d.tv_weighted),
                        repr(d.energy), repr(float(r1.values.min())),
                        repr(float(r1.values.max())), repr(c.max_abs_z),
                        repr(c.residual_el), repr(c.complementarity),
                        repr(d.z_r_lipschitz)])
    summary = {
        "completed": completed,
        "abort_reason": abort_reason,
        "n_steps": sum(1 for _, d, _ in diags if d.converged),
        "sum_w2sq": sum(d.w2_squared for _, d, _ in diags if d.converged),
    }
    _write_manifest(out, cfg, summary, files)
    return 0 if completed else 2


def _run_validate_uniform(cfg: RunConfig, out: str) -> int:
    grid = cfg.grid or GridSpec(-4.0, 4.0, 1024)
    tau = cfg.tau if cfg.tau is not None else 1.0 / 3.0
    alpha0 = 1.0
    rho0 = uniform_block_density(grid, alpha0)
    res = jko_step(rho0, cfg.solver_config(tau))
    alpha1 = uniform_alpha_next(alpha0, tau)
    target = uniform_block_density(grid, alpha1)
    l1 = float(np.sum(np.abs(res.rho1.values - target.values)) * grid.dx)
    v = res.rho1.values
    sup = np.nonzero(v > 0.5 * v.max())[0]
    alpha_obs = 0.5 * (grid.interfaces[sup[-1] + 1] - grid.interfaces[sup[0]])
    tol_l1 = 3.0 * grid.dx
    tol_alpha = 2.0 * grid.dx
    ok = res.converged and l1 <= tol_l1 and abs(alpha_obs - alpha1) <= tol_alpha
    write_density_csv(os.path.join(out, "rho1.csv"), res.rho1)
    summary = {
        "converged": res.converged,
        "alpha_predicted": alpha1,
        "alpha_observed": alpha_obs,
        "l1_distance": l1,
        "l1_tolerance": tol_l1,
        "alpha_tolerance": tol_alpha,
        "passed": ok,
    }
    _write_manifest(out, cfg, summary, ["rho1.csv"])
    return 0 if ok else 3


def _run_validate_hat(cfg: RunConfig, out: str) -> int:
    grid = cfg.grid or GridSpec(-2.0, 2.0, 2048)
    tau = cfg.tau if cfg.tau is not None else 1.0 / 270.0
    sol = hat_solution(tau)
    rho0 = hat_ramp_density(grid)
    res = jko_step(rho0, cfg.solver_config(tau))
    x = grid.centers
    inner = np.abs(x) <= sol.beta - 2.0 * grid.dx
    plateau_obs = float(np.mean(res.rho1.values[inner]))
    rel = abs(plateau_obs - sol.plateau_height) / sol.plateau_height
    # certificate z at the plateau edge, for the report
    j = int(np.searchsorted(grid.interfaces, sol.beta))
    z_at_jump = float(res.certificate.z_values[j])
    ok = res.converged and rel <= 0.02
    write_density_csv(os.path.join(out, "rho1.csv"), res.rho1)
    summary = {
        "converged": res.converged,
        "beta": sol.beta,
        "plateau_predicted": sol.plateau_height,
        "plateau_observed": plateau_obs,
        "relative_error": rel,
        "tolerance": 0.02,
        "z_at_jump": z_at_jump,
        "passed": ok,
    }
    _write_manifest(out, cfg, summary, ["rho1.csv"])
    return 0 if ok else 3


def _oracle_battery(cfg: RunConfig):
    rng = np.random.default_rng(cfg.seed)
    n_inst = cfg.oracle_instances
    grid = GridSpec(0.0, 1.0, 64)

    worst_quad = 0.0
    for _ in range(max(2, n_inst // 4)):
        a = GridDensity.normalized(grid, rng.random(64) + 0.05)
        b = GridDensity.normalized(grid, rng.random(64) + 0.05)
        exact = w2_squared(a, b)
        ref = w2_quadrature_reference(a, b, n_samples=200_000)
        worst_quad = max(worst_quad, abs(exact - ref) / max(ref, 1e-30))

    worst_asg = 0.0
    units = 256
    for _ in range(max(2, n_inst // 4)):
        ga = GridSpec(0.0, 1.0, 32)
        ca = rng.multinomial(units, np.full(32, 1 / 32))
        cb = rng.multinomial(units, np.full(32, 1 / 32))
        a = GridDensity(ga, ca / units / ga.dx)
        b = GridDensity(ga, cb / units / ga.dx)
        exact = w2_squared(a, b)
        ref = w2_assignment_reference(a, b, units)
        worst_asg = max(worst_asg, abs(exact - ref) / max(ref, 1e-30))

    worst_prox = 0.0
    for _ in range(n_inst):
        n = int(rng.integers(8, 64))
        y = rng.normal(0.0, 1.0, n)
        lam = float(10.0 ** rng.uniform(-3, 0))
        wts = rng.uniform(0.5, 2.0, n) if rng.random() < 0.5 else None
        u = taut_string_solve(y, np.full(n - 1, lam), wts)
        ref = tv_prox_reference(y, np.full(n - 1, lam), wts)
        if ref is None:
            raise RuntimeError("prox reference failed to certify an instance")
        worst_prox = max(worst_prox, float(np.max(np.abs(u - ref))))

    worst_grad = 0.0
    g2 = GridSpec(0.0, 1.0, 128)
    for _ in range(max(2, n_inst // 2)):
        a = GridDensity.normalized(g2, rng.random(128) + 0.2)
        b = GridDensity.normalized(g2, rng.random(128) + 0.2)
        direction = rng.normal(0.0, 1.0, 128)
        direction -= direction.mean()
        analytic, fd = transport_gradient_fd(a, b, direction, eps=1e-5)
        worst_grad = max(worst_grad, abs(analytic - fd) / max(abs(fd), 1e-30))

    scale = cfg.oracle_tolerance_scale
    return [
        ("w2_quadrature", worst_quad, 1e-5 * scale),
        ("w2_assignment", worst_asg, 1e-8 * scale),
        ("tv_prox", worst_prox, 1e-8 * scale),
        ("transport_gradient", worst_grad, 1e-4 * scale),
    ]


def _run_oracle_check(cfg: RunConfig, out: str) -> int:
    rows = _oracle_battery(cfg)
    ok = all(dev <= tol for _, dev, tol in rows)
    with open(os.path.join(out, "oracle_report.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["oracle", "max_deviation", "tolerance", "verdict"])
        for name, dev, tol in rows:
            w.writerow([name, repr(dev), repr(tol),
                        "pass" if dev <= tol else "fail"])
    summary = {name: {"max_deviation": dev, "tolerance": tol,
                      "passed": dev <= tol} for name, dev, tol in rows}
    summary["passed"] = ok
    _write_manifest(out, cfg, summary, ["oracle_report.csv"])
    return 0 if ok else 3


_RUNNERS = {
    "step": _run_step,
    "flow": _run_flow,
    "radial_step": _run_radial_step,
    "radial_flow": _run_radial_flow,
    "validate_uniform": _run_validate_uniform,
    "validate_hat": _run_validate_hat,
    "oracle_check": _run_oracle_check,
}


def run(cfg: RunConfig) -> int:
    out = _resolve_output_dir(cfg)
    return _RUNNERS[cfg.mode](cfg, out)


def _fail(code: int, mode: str, reason: str) -> int:
    reason = " ".join(str(reason).split())
    print(f"tvjko-error: code={code} mode={mode} reason={reason}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tvjko",
        description="Certified minimizing-movement steps for a TV-driven flow.")
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", help="path to a JSON run configuration")
    parser.add_argument("--override", action="append", default=[],
                        metavar="KEY=VALUE",
                        help="override a config entry (dotted path, JSON value)")
    args = parser.parse_args(argv)

    try:
        raw = {}
        if args.config:
            with open(args.config) as fh:
                raw = json.load(fh)
        raw = apply_overrides(raw, args.override)
        if "mode" in raw and raw["mode"] != args.mode:
            raise ConfigError(
                f"config mode {raw['mode']!r} disagrees with CLI mode {args.mode!r}")
        raw["mode"] = args.mode
        cfg = config_from_dict(raw)
    except (ConfigError, OSError, json.JSONDecodeError, ValueError) as exc:
        return _fail(1, args.mode, exc)

    try:
        code = run(cfg)
    except (ConfigError, OSError, ValueError) as exc:
        return _fail(1, cfg.mode, exc)
    if code == 2:
        return _fail(2, cfg.mode, "solver failed its optimality certificate")
    if code == 3:
        return _fail(3, cfg.mode, "validation outside stated tolerance")
    return code


if __name__ == "__main__":
    sys.exit(main())
