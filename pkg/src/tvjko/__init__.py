"""Certified minimizing-movement steps for total-variation-driven flows.

One-dimensional densities on uniform grids, exact quantile-based
transport, an exact taut-string prox, and step solvers that only report
convergence when a dual optimality certificate checks out.  Radial
symmetry reduces higher dimensions to the same machinery.
"""

from .grid_density import (GridSpec, GridDensity, total_variation,
                           read_density_csv, write_density_csv)
from .transport1d import (TransportData, w2_squared, monotone_map,
                          kantorovich_potential, transport, write_transport_csv)
from .tv_prox import (ProxProblem, taut_string_solve, tv_prox,
                      weighted_total_variation, prox_kkt_residual)
from .certificate import (DualCertificate, build_certificate,
                          build_certificate_general, certificate_from_fields,
                          check_sufficient_conditions,
                          write_certificate_interface_csv,
                          write_certificate_cell_csv)
from .jko_solver import JkoConfig, JkoStepResult, jko_step, solve_composite
from .analytic_reference import (uniform_alpha_next, uniform_evolution,
                                 UniformEvolution, ball_alpha_next,
                                 ball_w2_squared, ball_weighted_tv,
                                 hat_solution, HatSolution, hat_tau_of_beta,
                                 hat_beta_of_tau, uniform_block_density,
                                 hat_ramp_density, hat_step_density,
                                 uniform_step_profiles, hat_step_profiles)
from .radial import (RadialDensity, RadialStepDiagnostics, radial_jko_step,
                     sphere_surface_measure, radial_min_principle_check,
                     RadialMinPrincipleReport, read_radial_csv, write_radial_csv)
from .flow_driver import (FlowTrajectory, FlowStepDiagnostics, run_flow,
                          interpolate, weak_residuals, weak_solution_residual,
                          test_function_family, SpaceTimeTestFunction,
                          write_trajectory_csv, write_diagnostics_csv)
from .property_suite import (CaseResult, SuiteReport, run_suite,
                             grid_tolerance, certificate_margin,
                             write_report_csv)

__version__ = "0.1.0"

__all__ = [
    "GridSpec", "GridDensity", "total_variation", "read_density_csv",
    "write_density_csv", "TransportData", "w2_squared", "monotone_map",
    "kantorovich_potential", "transport", "write_transport_csv",
    "ProxProblem", "taut_string_solve", "tv_prox", "weighted_total_variation",
    "prox_kkt_residual", "DualCertificate", "build_certificate",
    "build_certificate_general", "certificate_from_fields",
    "check_sufficient_conditions", "write_certificate_interface_csv",
    "write_certificate_cell_csv", "JkoConfig", "JkoStepResult", "jko_step",
    "solve_composite", "uniform_alpha_next", "uniform_evolution",
    "UniformEvolution", "ball_alpha_next", "ball_w2_squared",
    "ball_weighted_tv", "hat_solution", "HatSolution", "hat_tau_of_beta",
    "hat_beta_of_tau", "uniform_block_density", "hat_ramp_density",
    "hat_step_density", "uniform_step_profiles", "hat_step_profiles",
    "RadialDensity", "RadialStepDiagnostics", "radial_jko_step",
    "sphere_surface_measure", "radial_min_principle_check",
    "RadialMinPrincipleReport", "read_radial_csv", "write_radial_csv",
    "FlowTrajectory", "FlowStepDiagnostics", "run_flow", "interpolate",
    "weak_residuals", "weak_solution_residual", "test_function_family",
    "SpaceTimeTestFunction", "write_trajectory_csv", "write_diagnostics_csv",
    "CaseResult", "SuiteReport", "run_suite", "grid_tolerance",
    "certificate_margin", "write_report_csv",
]
