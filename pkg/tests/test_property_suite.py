"""Property battery: green on healthy solver, red under an injected cap."""

import numpy as np
import pytest

from tvjko import run_suite, grid_tolerance, certificate_margin
from tvjko.property_suite import write_report_csv


def test_grid_tolerance_formula():
    assert grid_tolerance(2.0, 0.01) == pytest.approx(10e-6 + 2 * 2.0 * 0.01)
    assert grid_tolerance(1.0, 0.0) == pytest.approx(1e-5)


@pytest.fixture(scope="module")
def healthy_report():
    return run_suite(seed=0)


def test_suite_green(healthy_report):
    failed = [c for c in healthy_report.cases if c.verdict == "fail"]
    assert failed == []
    assert healthy_report.all_passed


def test_suite_covers_every_family(healthy_report):
    anchors = {c.paper_anchor for c in healthy_report.cases}
    assert "step-upper-bound" in anchors
    assert "step-lower-bound" in anchors
    assert "flow-energy-dissipation" in anchors
    assert "step-optimality-certificate" in anchors
    assert any(a.startswith("radial-lower-bound") for a in anchors)


def test_suite_margins_positive(healthy_report):
    for c in healthy_report.cases:
        if c.verdict == "pass":
            assert c.margin >= 0.0, c.name


def test_injected_iteration_cap_turns_cases_red():
    # negative control: a solver that cannot converge must be caught
    crippled = run_suite(seed=0, iteration_cap=1)
    assert crippled.n_failed >= 1
    cert_fails = [c for c in crippled.cases
                  if c.verdict == "fail"
                  and c.paper_anchor == "step-optimality-certificate"]
    assert cert_fails


def test_report_csv(tmp_path, healthy_report):
    path = tmp_path / "report.csv"
    write_report_csv(path, healthy_report)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "case,seed,margin,tolerance,verdict,paper_anchor"
    assert len(lines) == 1 + len(healthy_report.cases)
