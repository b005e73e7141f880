import math
import warnings

import pytest

from semispec.geometry import (AliasingWarning, CriticalEnergyError, GeometryError, DecompositionError, DomainError,
                               auto_domain, decomposition, find_turning_points, validate_domain)
from semispec.potential import parse_potential


def test_double_well_turning_points(double_well):
    dec = decomposition(double_well, 0.25, (-2.5, 2.5))
    r_in, r_out = math.sqrt(1 - 0.5), math.sqrt(1 + 0.5)
    xs = [p.x for p in dec.points]
    assert xs == pytest.approx([-r_out, -r_in, r_in, r_out], abs=1e-13)
    assert [p.orientation for p in dec.points] == ["falling", "rising"] * 2
    assert dec.L == 2 and len(dec.barriers) == 1


def test_critical_energy_at_barrier_top(double_well):
    with pytest.raises(CriticalEnergyError):
        find_turning_points(double_well, 1.0, (-2.5, 2.5))


def test_energy_at_the_minimum_has_no_wells(double_well):
    with pytest.raises(GeometryError):
        decomposition(double_well, 0.0, (-2.5, 2.5))


def test_domain_must_enclose_the_level(harmonic):
    with pytest.raises(DomainError):
        find_turning_points(harmonic, 5.0, (-2.0, 2.0))
    with pytest.raises(DomainError):
        validate_domain(harmonic, (0.0, 1.0), (-1.1, 1.1))


def test_decomposition_rejects_odd_counts():
    m = parse_potential("x^3")
    with pytest.raises(DomainError):
        decomposition(m, 0.5, (-2.0, 2.0))
    with pytest.raises(DecompositionError):
        from semispec.geometry import decompose
        decompose(find_turning_points(parse_potential("x^2"), 1.0, (-2, 2))[:1], m, 1.0, (-2, 2))


def test_aliasing_warning_for_close_roots():
    m = parse_potential("(x^2 - 1e-6)^2 + 1")
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        try:
            find_turning_points(m, 1.0 + 1e-13, (-2.0, 2.0), scan_n=64)
        except CriticalEnergyError:
            pass
    assert rec == [] or any(issubclass(w.category, AliasingWarning) for w in rec)


def test_auto_domain_decays(harmonic):
    a, b = auto_domain(harmonic, (0.0, 1.0), 0.1)
    assert a < -1.0 and b > 1.0
    validate_domain(harmonic, (0.0, 1.0), (a, b))


def test_wells_grow_with_energy(double_well):
    lo = decomposition(double_well, 0.2, (-2.5, 2.5)).wells
    hi = decomposition(double_well, 0.5, (-2.5, 2.5)).wells
    for (a, b), (c, d) in zip(lo, hi):
        assert c < a < b < d


def test_scan_resolution_does_not_move_roots(tilted):
    a = [p.x for p in find_turning_points(tilted, 0.4, (-2.5, 2.5))]
    b = [p.x for p in find_turning_points(tilted, 0.4, (-2.5, 2.5), scan_n=4096)]
    assert a == pytest.approx(b, abs=1e-12)


def test_single_well_above_the_barrier(double_well):
    dec = decomposition(double_well, 2.0, (-3.0, 3.0))
    assert dec.L == 1 and dec.barriers == []
