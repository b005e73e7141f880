import math

import numpy as np
import pytest

from semispec import ode
from semispec.potential import parse_potential


def test_free_particle_is_exact():
    m = parse_potential("0")
    k, hbar = 3.0, 0.5
    run = ode.integrate(m, hbar ** 2 * k ** 2, hbar, 0.0, [0.0, k], 2.0)
    v, d, ls = run.at(2.0)
    assert v * math.exp(ls) == pytest.approx(math.sin(2 * k), abs=1e-8)
    assert d * math.exp(ls) == pytest.approx(k * math.cos(2 * k), abs=1e-7)


def test_growth_is_renormalized():
    m = parse_potential("1")
    hbar = 0.01
    run = ode.integrate(m, 0.0, hbar, 0.0, [1.0, 1.0 / hbar], 10.0, record=False)
    v, _, ls = run.at(10.0)
    assert run.renormalizations > 0
    assert math.log(abs(v)) + ls == pytest.approx(1000.0, rel=1e-9)


def test_wronskian_is_conserved(harmonic):
    a = ode.integrate(harmonic, 1.3, 0.1, 0.0, [1.0, 0.0], 1.5, x_eval=[0.7])
    b = ode.integrate(harmonic, 1.3, 0.1, 0.0, [0.0, 1.0], 1.5, x_eval=[0.7])
    for x in (0.0, 0.7, 1.5):
        m, ls = ode.wronskian(a.at(x), b.at(x))
        assert m * math.exp(ls) == pytest.approx(-1.0, rel=1e-8)


def test_complex_data(harmonic):
    run = ode.integrate(harmonic, 1.0, 0.2, 0.0, np.array([1.0 + 0j, 1j]), 0.5)
    v, d, _ = run.at(0.5)
    assert isinstance(v, complex) and run.is_complex


def test_residual_is_small(harmonic):
    run = ode.integrate(harmonic, 1.0, 0.1, 0.0, [1.0, 0.0], 1.2)
    assert ode.residual(run, 0.6) < 1e-6


def test_outside_range():
    run = ode.integrate(parse_potential("0"), 1.0, 1.0, 0.0, [0.0, 1.0], 1.0)
    with pytest.raises(ode.IntegrationError):
        run.at(2.0)
