import math

import numpy as np
import pytest

from semispec import builtin
from semispec.geometry import auto_domain, decomposition
from semispec.oracle import Grid, TridiagonalOperator, eigenvalues_in_window, eigenvector, refined_spectrum
from semispec.semiclassics import (AnalysisError, PhaseMeasurement, barrier_decay_check, check_fixing,
                                   double_well_analysis, edge_passes, extract_phase, gamma_ratios,
                                   localization_ratio, match_spectrum, phase_report, phase_space_measure,
                                   predict_spectrum, splitting_fit, weyl_count, action_span)


def test_harmonic_prediction_is_exact(harmonic):
    p = predict_spectrum(harmonic, 0.1, (0.05, 1.05), (-3.0, 3.0))
    assert [lv.n for lv in p.levels] == [0, 1, 2, 3, 4]
    assert [lv.lam for lv in p.levels] == pytest.approx([0.1, 0.3, 0.5, 0.7, 0.9], abs=1e-10)
    assert p.levels[0].radius == pytest.approx(5 * 0.01)


def test_match_counts_and_unmatched(harmonic):
    p = predict_spectrum(harmonic, 0.1, (0.05, 1.05), (-3.0, 3.0))
    rep = match_spectrum(p, [0.1, 0.3, 0.5, 0.7, 0.9, 0.6])
    assert rep.unmatched == (0.6,)
    assert rep.empty == ()
    assert all(c == 1 for _, c in rep.interval_counts)


def test_merged_intervals_take_two(double_well):
    dom = (-2.0, 2.0)
    p = predict_spectrum(double_well, 0.05, (0.2, 0.8), dom)
    eig = [lv.lam + 1e-9 * lv.ell for lv in p.levels]
    assert len({lv.ell for lv in p.levels}) == 2
    rep = match_spectrum(p, eig)
    assert rep.unmatched == ()
    assert all(c == 2 for _, c in rep.interval_counts)
    rep = match_spectrum(p, eig + [p.levels[0].lam + 2e-9])
    assert len(rep.unmatched) == 1


def _tilted_state(tilted, hbar, window, k):
    dom = auto_domain(tilted, window, hbar)
    g = Grid.auto(dom, hbar)
    op = TridiagonalOperator.build(tilted, g, hbar)
    lam = float(eigenvalues_in_window(op, window)[k])
    return dom, g, lam, eigenvector(op, lam).psi


def test_phases_fix_at_pi_over_4(tilted):
    hbar = 0.04
    dom, g, lam, psi = _tilted_state(tilted, hbar, (0.3, 0.75), 0)
    rep = phase_report(g.x, psi, tilted, lam, hbar, dom)
    assert len(rep) == 4
    assert edge_passes(rep, hbar) >= 3
    assert check_fixing(rep[1], rep[2], hbar).passed


def test_phase_rejects_turning_point_samples(tilted):
    hbar = 0.04
    dom, g, lam, psi = _tilted_state(tilted, hbar, (0.3, 0.75), 0)
    well = decomposition(tilted, lam, dom).wells[0]
    from semispec.semiclassics import PhaseError
    with pytest.raises(PhaseError):
        extract_phase(g.x, psi, tilted, lam, hbar, well, "left", x_star=well[0] + 1e-3)


def test_indeterminate_passes():
    nan = PhaseMeasurement(0, "left", 0.0, 0.0, math.nan, math.nan)
    far = PhaseMeasurement(0, "right", 0.0, 1.0, 2.0, 1.0)
    assert check_fixing(nan, far, 0.1).passed
    assert not check_fixing(far, far, 0.1).passed
    assert edge_passes([nan, far], 0.1) == 1


def test_localization_ratio():
    a = PhaseMeasurement(0, "left", 0.0, 2.0, 0.0, 0.0)
    b = PhaseMeasurement(1, "left", 0.0, 2.0 * math.exp(-5), 0.0, 0.0)
    r, e = localization_ratio(b, a, 0.1)
    assert r == pytest.approx(math.exp(-5)) and e == pytest.approx(0.5)


def test_barrier_decay(double_well):
    hbar = 0.05
    dom = (-2.2, 2.2)
    g = Grid.auto(dom, hbar)
    op = TridiagonalOperator.build(double_well, g, hbar)
    lam = float(eigenvalues_in_window(op, (0.0, 0.5))[0])
    psi = eigenvector(op, lam).psi
    br = decomposition(double_well, lam, dom).barriers[0]
    assert barrier_decay_check(g.x, psi, double_well, lam, hbar, br, 1.0).passed


def test_weyl_harmonic(harmonic):
    win = (0.05, 1.05)
    span, L = action_span(harmonic, win, (-3, 3))
    assert span == pytest.approx(math.pi / 2) and L == 1
    w = weyl_count(harmonic, 0.1, win, (-3, 3), 5)
    assert w.weyl == pytest.approx(5.0) and w.passed and (w.lower, w.upper) == (4, 6)
    assert not weyl_count(harmonic, 0.1, win, (-3, 3), 7).passed
    area, err = phase_space_measure(harmonic, win, (-3, 3), samples=200_000)
    assert abs(area - math.pi) < 4 * err + 1e-3


@pytest.fixture(scope="module")
def splitting_reports(double_well):
    return [double_well_analysis(double_well, h, (0.2, 0.8), (-2.0, 2.0)) for h in (0.06, 0.05)]


def test_pairs_and_parities(splitting_reports):
    for rep in splitting_reports:
        assert rep.pairs and not rep.excluded
        for p in rep.pairs:
            assert p.lower_parity == 1
            assert p.parity_error < 1e-10
            assert 0 < p.splitting < 1e-3


def test_splitting_fit_needs_two(splitting_reports):
    fit = splitting_fit(splitting_reports)
    assert fit.kappa == pytest.approx(-1.0, abs=0.15)
    with pytest.raises(AnalysisError):
        splitting_fit(splitting_reports[:1])


def test_asymmetric_model_rejected(tilted):
    with pytest.raises(AnalysisError):
        double_well_analysis(tilted, 0.06, (0.2, 0.8), (-2.0, 2.0))


@pytest.mark.parametrize("hbar", [0.1, 0.08])
def test_two_well_condition_at_eigenvalues(double_well, hbar):
    dom = (-2.5, 2.5)
    lam = refined_spectrum(double_well, Grid.auto(dom, hbar), hbar, (0.1, 0.5))[0].lam
    g = gamma_ratios(double_well, lam, hbar, dom)
    assert abs(g.residual) <= 0.1 * hbar * g.omega0
    assert g.gamma1 * g.gamma2 == pytest.approx(g.omega0, rel=0.2)
