import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semispec import langer
from semispec.airy import airy
from semispec.geometry import decomposition

DOMAIN = (-2.5, 2.5)
# xi for v = x^2 at lam = 1, x = 1.5: (3/2 * int_1^1.5 sqrt(t^2 - 1) dt)^{2/3}, from mpmath
XI_HARMONIC = 0.659822707664428404
AI0 = 1 / (3 ** (2 / 3) * math.gamma(2 / 3))


@pytest.fixture(scope="module")
def harmonic_frame(harmonic):
    dec = decomposition(harmonic, 1.0, (-3.0, 3.0))
    return langer.frame_at(harmonic, 1.0, dec.points, 1, dec.domain)


@pytest.fixture(scope="module")
def dw_frames(double_well):
    dec = decomposition(double_well, 0.25, DOMAIN)
    return dec, [langer.frame_at(double_well, 0.25, dec.points, k, dec.domain) for k in range(4)]


def test_frame_at_a_linear_turning_point(harmonic_frame):
    f = harmonic_frame
    assert f.sign == 1 and f.x0 == pytest.approx(1.0, abs=1e-14)
    assert f.jet(f.x0)[1] == pytest.approx(2 ** (1 / 3), rel=1e-14)
    assert f.xi(1.5) == pytest.approx(XI_HARMONIC, rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.floats(-0.75, 2.8))
def test_langer_identity(harmonic_frame, x):
    f = harmonic_frame
    xi, xp, _ = f.jet(x)
    gap = x * x - 1.0
    assert xp ** 2 * xi == pytest.approx(gap, abs=2e-11)
    assert np.sign(xi) == np.sign(x - 1.0) or abs(x - 1.0) < 1e-12
    assert xp > 0


def test_taylor_and_action_branches_join(dw_frames):
    _, frames = dw_frames
    for f in frames:
        t = 1.0001 * f.near
        for s in (1, -1):
            a = f.jet(f.x0 + s * t)
            b = f._taylor(s * t)
            assert a[0] == pytest.approx(b[0], rel=1e-8)
            assert a[1] == pytest.approx(b[1], rel=1e-6)


def test_value_at_the_anchor(harmonic_frame):
    hbar = 0.1
    v, _, ls = langer.evaluate_langer("u", harmonic_frame, hbar, harmonic_frame.x0)
    want = math.sqrt(math.pi) * hbar ** (-1 / 6) * 2 ** (-1 / 6) * AI0
    assert v * math.exp(ls) == pytest.approx(want, rel=1e-12)


def test_decaying_region_uses_log_scale(harmonic_frame):
    v, d, ls = langer.evaluate_langer("u", harmonic_frame, 0.01, 2.8)
    assert ls < -100 and math.isfinite(v) and v > 0 and d < 0
    v, d, ls = langer.evaluate_langer("w", harmonic_frame, 0.01, 2.8)
    assert ls > 100 and v > 0 and d > 0


def test_well_side_matches_oscillatory_form(harmonic_frame):
    # deep in the well u ~ p^{-1/4} cos(S/hbar - pi/4)
    hbar, x = 0.01, 0.0
    v, _, ls = langer.evaluate_langer("u", harmonic_frame, hbar, x)
    s = math.pi / 4  # int_0^1 sqrt(1 - t^2) dt
    want = math.cos(s / hbar - math.pi / 4)
    assert v * math.exp(ls) == pytest.approx(want, abs=0.02)


def test_outside_interval(harmonic_frame):
    with pytest.raises(langer.FrameError):
        langer.evaluate_langer("u", harmonic_frame, 0.1, 10.0)


def test_frame_validation(double_well):
    with pytest.raises(langer.FrameError):
        langer.build_frame(double_well, 0.25, 0.2, 1, (-0.5, 0.5))
    x0 = math.sqrt(0.5)
    with pytest.raises(langer.FrameError):
        langer.build_frame(double_well, 0.25, x0, 1, (0.1, 1.1))
    with pytest.raises(langer.FrameError):
        langer.build_frame(double_well, 0.25, x0, 1, (-2.0, 1.0))


@pytest.mark.parametrize("hbar", [0.1, 0.05])
def test_canonical_wronskian(harmonic_frame, hbar):
    f = harmonic_frame
    u = langer.integrate_canonical("u", f, hbar, (0.0, 1.5))
    w = langer.integrate_canonical("w", f, hbar, (0.0, 1.5))
    vals = [hbar * langer.wronskian_value(u, w, x) for x in (0.0, 0.6, f.x0, 1.4)]
    assert max(abs(v + 1) for v in vals) <= 5 * hbar
    assert max(vals) - min(vals) < 1e-8
    assert max(u.residual(x) for x in (0.3, 1.2)) < 1e-8


def test_recessive_decay_rate(dw_frames):
    dec, frames = dw_frames
    b1, b2 = dec.barriers[0]
    hbar = 0.04
    u = langer.integrate_canonical("u", frames[1], hbar, (b1, 0.5 * (b1 + b2)))
    drop = u.log_abs(b1) - u.log_abs(0.5 * (b1 + b2))
    from semispec.actions import partial_action
    want = partial_action(frames[1].model, 0.25, b1, 0.5 * (b1 + b2), "barrier") / hbar
    assert drop == pytest.approx(want, rel=0.1)


def test_remainder_shrinks_with_hbar(dw_frames):
    """Numerical u, w approach the leading Langer form at a rate of at least hbar^{1/2}."""
    dec, frames = dw_frames
    f = frames[1]
    model, lam = f.model, f.lam
    xs = np.linspace(f.x0 - 0.35, f.x0 + 0.1, 13)
    hbars = [0.1, 0.05, 0.025]
    errs = {"u": [], "w": []}
    for hbar in hbars:
        for kind in errs:
            s = langer.integrate_canonical(kind, f, hbar, (xs[0], xs[-1]))
            worst = 0.0
            for x in xs:
                v, d, ls = s.at(x)
                lv, ld, ll = langer.evaluate_langer(kind, f, hbar, x)
                k = math.sqrt(abs(model(x) - lam)) + hbar ** (1 / 3)
                g = math.exp(ls - ll)
                worst = max(worst, math.hypot(v * g - lv, hbar * (d * g - ld) / k) / math.hypot(lv, hbar * ld / k))
            errs[kind].append(worst)
    for kind, e in errs.items():
        assert all(ei <= 2 * h for ei, h in zip(e, hbars)), (kind, e)
        assert np.polyfit(np.log(hbars), np.log(e), 1)[0] >= 0.5, (kind, e)


@pytest.mark.parametrize("kind", ["u", "w"])
@pytest.mark.parametrize("side", [-1, 1])
def test_remainder_at_sqrt_hbar(dw_frames, kind, side):
    """At |x - x0| = hbar^{1/2} the remainder bound hbar |x - x0|^{-3/2} is hbar^{1/4}."""
    _, frames = dw_frames
    f = frames[1]
    hbars = [0.1, 0.05, 0.025]
    errs = []
    for hbar in hbars:
        x = f.x0 + side * f.sign * hbar ** 0.5
        s = langer.integrate_canonical(kind, f, hbar, (min(x, f.x0), max(x, f.x0)))
        v, d, ls = s.at(x)
        lv, ld, ll = langer.evaluate_langer(kind, f, hbar, x)
        k = math.sqrt(abs(f.model(x) - f.lam)) + hbar ** (1 / 3)
        g = math.exp(ls - ll)
        errs.append(math.hypot(v * g - lv, hbar * (d * g - ld) / k) / math.hypot(lv, hbar * ld / k))
    assert all(e <= h ** 0.25 for e, h in zip(errs, hbars)), errs
    assert np.polyfit(np.log(hbars), np.log(errs), 1)[0] >= 0.25, errs
