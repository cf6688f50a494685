"""Exact quantile-based transport: distances, maps, potentials."""

import numpy as np
import pytest

from tvjko import GridSpec, GridDensity, w2_squared, monotone_map, transport
from tvjko.transport1d import kantorovich_potential


def _pair(seed, n=128, grid=None):
    g = grid or GridSpec(-1.0, 1.0, n)
    rng = np.random.default_rng(seed)
    a = GridDensity.normalized(g, rng.random(n) + 0.05)
    b = GridDensity.normalized(g, rng.random(n) + 0.05)
    return a, b


def test_w2_squared_translation():
    # translating a block by s costs exactly s^2
    g = GridSpec(-4.0, 4.0, 1024)
    x = g.centers
    a = GridDensity.normalized(g, np.where(np.abs(x) <= 1.0, 1.0, 0.0))
    b = GridDensity.normalized(g, np.where(np.abs(x - 1.5) <= 1.0, 1.0, 0.0))
    assert w2_squared(a, b) == pytest.approx(1.5 ** 2, rel=1e-12)


def test_w2_squared_to_self_is_zero():
    a, _ = _pair(0)
    assert w2_squared(a, a) <= 1e-28


def test_w2_metric_symmetry_and_triangle():
    a, b = _pair(1)
    c, _ = _pair(2)
    dab = np.sqrt(w2_squared(a, b))
    dba = np.sqrt(w2_squared(b, a))
    dac = np.sqrt(w2_squared(a, c))
    dcb = np.sqrt(w2_squared(c, b))
    assert dab == pytest.approx(dba, rel=1e-12)
    assert dab <= dac + dcb + 1e-12


def test_monotone_map_pushes_quantiles():
    a, b = _pair(5)
    from tvjko.grid_density import cdf
    T = monotone_map(a, b)  # pushes a onto b, evaluated on cells of a
    x = a.grid.centers
    np.testing.assert_allclose(cdf(b)(T), cdf(a)(x), atol=1e-12)
    assert np.all(np.diff(T) >= -1e-12)


def test_potential_gradient_is_displacement():
    a, b = _pair(7)
    data = transport(a, b)
    g = b.grid
    dphi = np.diff(data.potential) / g.dx
    disp = g.centers - data.map_values
    mid = 0.5 * (disp[:-1] + disp[1:])
    np.testing.assert_allclose(dphi, mid, atol=1e-10)


def test_potential_zero_mean():
    a, b = _pair(8)
    phi = kantorovich_potential(a, b)
    assert abs(np.mean(phi)) <= 1e-12


def test_pairing_identity():
    # cell-center quadrature of |x - T|^2 against the moving density
    # approximates the exact distance, up to within-cell variation of T
    a, b = _pair(9)
    data = transport(a, b)
    disp2 = (a.grid.centers - data.map_values) ** 2
    quad = float(np.sum(disp2 * a.values) * a.grid.dx)
    assert quad == pytest.approx(data.w2_squared, rel=0.1)
