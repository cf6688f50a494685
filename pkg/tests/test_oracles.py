"""Cross-checks between the exact kernels and their independent oracles."""

import numpy as np
import pytest

from tvjko import GridSpec, GridDensity, w2_squared, taut_string_solve
from tvjko.oracles import (tv_prox_reference, w2_quadrature_reference,
                           w2_assignment_reference, pair_potential_direction,
                           transport_gradient_fd)


def _pair(seed, n=96):
    g = GridSpec(-1.0, 1.0, n)
    rng = np.random.default_rng(seed)
    a = GridDensity.normalized(g, rng.random(n) + 0.05)
    b = GridDensity.normalized(g, rng.random(n) + 0.05)
    return a, b


def test_quadrature_reference_agrees():
    for seed in range(5):
        a, b = _pair(seed)
        exact = w2_squared(a, b)
        approx = w2_quadrature_reference(a, b, n_samples=400_000)
        assert approx == pytest.approx(exact, rel=2e-5)


def test_assignment_reference_agrees():
    # atomized densities: equal point masses make the LP value exact
    g = GridSpec(0.0, 1.0, 16)
    rng = np.random.default_rng(7)
    units = 128
    for _ in range(5):
        ca = rng.multinomial(units, np.full(16, 1 / 16))
        cb = rng.multinomial(units, np.full(16, 1 / 16))
        a = GridDensity(g, ca / units / g.dx)
        b = GridDensity(g, cb / units / g.dx)
        assert w2_assignment_reference(a, b, units) == pytest.approx(
            w2_squared(a, b), rel=1e-10)


def test_prox_reference_certifies_or_abstains():
    rng = np.random.default_rng(1)
    y = rng.normal(size=12)
    tube = np.full(11, 0.25)
    ref = tv_prox_reference(y, tube)
    assert ref is not None
    np.testing.assert_allclose(ref, taut_string_solve(y, tube), atol=1e-9)


def test_gradient_pairing_matches_fd():
    rng = np.random.default_rng(2)
    for seed in range(3):
        a, b = _pair(10 + seed, n=128)
        direction = rng.normal(size=128)
        direction -= direction.mean()  # keep the perturbation mass neutral
        analytic, fd = transport_gradient_fd(a, b, direction, eps=1e-5)
        assert analytic == pytest.approx(fd, rel=1e-6, abs=1e-12)


def test_gradient_rejects_mass_changing_direction():
    a, b = _pair(3)
    with pytest.raises(ValueError):
        transport_gradient_fd(a, b, np.ones(96), eps=1e-5)


def test_pairing_is_linear_in_direction():
    a, b = _pair(4, n=64)
    rng = np.random.default_rng(5)
    d1 = rng.normal(size=64)
    d1 -= d1.mean()
    d2 = rng.normal(size=64)
    d2 -= d2.mean()
    lhs = pair_potential_direction(a, b, 2.0 * d1 + 0.5 * d2)
    rhs = (2.0 * pair_potential_direction(a, b, d1)
           + 0.5 * pair_potential_direction(a, b, d2))
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-14)
