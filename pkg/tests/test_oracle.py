import math
import warnings

import numpy as np
import pytest

from semispec.oracle import (Grid, OracleError, TridiagonalOperator, TruncationWarning, eigenvalues_in_window,
                             eigenvector, refine_eigenvalue, refined_spectrum)
from semispec.potential import parse_potential


def toeplitz(n, h, hbar, k):
    return (4 * hbar ** 2 / h ** 2) * np.sin(k * np.pi / (2 * (n + 1))) ** 2


def test_box_matches_closed_form():
    g, hbar = Grid(0.0, 1.0, 400), 0.3
    op = TridiagonalOperator.build(parse_potential("0"), g, hbar)
    vals = eigenvalues_in_window(op, (0.0, 2000.0), tol=1e-16, check_truncation=False)
    want = toeplitz(g.n, g.h, hbar, np.arange(1, vals.size + 1))
    assert vals.size > 10
    assert np.max(np.abs(vals - want) / want) < 1e-12


def test_harmonic_refined(harmonic):
    hbar = 0.1
    refined = refined_spectrum(harmonic, Grid.auto((-3.0, 3.0), hbar), hbar, (0.05, 1.05))
    assert len(refined) == 5
    for n, r in enumerate(refined):
        assert abs(r.lam - (2 * n + 1) * hbar) < 1e-7
        assert r.error < 1e-4


def test_refine_single(harmonic):
    hbar, g = 0.1, Grid.auto((-3.0, 3.0), 0.1)
    op = TridiagonalOperator.build(harmonic, g, hbar)
    lam_h = float(eigenvalues_in_window(op, (0.25, 0.35))[0])
    r = refine_eigenvalue(harmonic, g, hbar, lam_h)
    assert abs(r.lam - 0.3) < 1e-7 and r.lam_h == pytest.approx(lam_h, abs=1e-11)


def test_eigenvector_nodes(harmonic):
    hbar, g = 0.1, Grid.auto((-3.0, 3.0), 0.1)
    op = TridiagonalOperator.build(harmonic, g, hbar)
    for n, lam in enumerate(eigenvalues_in_window(op, (0.0, 1.0))):
        pair = eigenvector(op, float(lam))
        assert pair.sign_changes() == n
        assert pair.residual < 1e-9
        assert np.sum(pair.psi ** 2) * g.h == pytest.approx(1.0)


def test_degenerate_pair_returns_subspace(double_well):
    hbar = 0.04
    g = Grid.auto((-2.0, 2.0), hbar)
    op = TridiagonalOperator.build(double_well, g, hbar)
    lo, hi = eigenvalues_in_window(op, (0.0, 0.1))[:2]
    assert hi - lo < 1e-10
    pair = eigenvector(op, float(lo), isolation=1e-6)
    assert pair.degenerate
    assert abs(np.dot(pair.psi, pair.partner)) * g.h < 1e-10


def test_truncation_warning(harmonic):
    hbar = 0.1
    op = TridiagonalOperator.build(harmonic, Grid.auto((-1.2, 1.2), hbar), hbar)
    with pytest.warns(TruncationWarning):
        eigenvalues_in_window(op, (0.5, 1.5))


def test_grid_doubling_is_within_error(quartic):
    hbar = 0.05
    g = Grid.auto((-1.8, 1.8), hbar)
    coarse = refined_spectrum(quartic, g, hbar, (0.1, 0.6))
    fine = refined_spectrum(quartic, g.refined(), hbar, (0.1, 0.6))
    assert len(coarse) == len(fine) > 3
    for a, b in zip(coarse, fine):
        assert abs(a.lam - b.lam) <= a.error + b.error + 1e-12


def test_grid_validation():
    with pytest.raises(OracleError):
        Grid(0.0, 1.0, 10)
    with pytest.raises(OracleError):
        Grid(1.0, 0.0, 100)
