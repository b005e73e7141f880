import math

import numpy as np
import pytest

from semispec.potential import parse_potential
from semispec.tunneling import TunnelingError, compute_rt, default_anchors, wronskian_suite

DOMAIN = (-2.5, 2.5)


@pytest.mark.parametrize("hbar", [0.1, 0.05])
def test_unitarity_and_rate(double_well, hbar):
    rep = compute_rt(double_well, 0.25, hbar, default_anchors(double_well, 0.25, DOMAIN))
    assert abs(rep.flux_defect) < 1e-9
    assert abs(abs(rep.R) - 1) <= 5 * hbar
    assert rep.abs_T * math.exp(rep.omega / hbar) == pytest.approx(1.0, rel=0.25)


def test_anchor_independence():
    m = parse_potential("exp(-x^2)")
    a = compute_rt(m, 0.5, 0.1, (-3.0, 3.0))
    k = math.sqrt(0.5) / 0.1
    b = compute_rt(m, 0.5, 0.1, (-3.0 - 2 * math.pi / k, 3.0 + 2 * math.pi / k))
    assert abs(abs(a.R) - abs(b.R)) < 1e-4
    assert abs(a.abs_T - b.abs_T) < 1e-4


def test_anchor_errors(double_well):
    with pytest.raises(TunnelingError):
        compute_rt(double_well, 0.25, 0.1, (0.5, -0.5))
    with pytest.raises(TunnelingError):
        compute_rt(double_well, 0.25, 0.1, (-1.0, 0.0))
    b = math.sqrt(0.5)
    with pytest.raises(TunnelingError):
        compute_rt(double_well, 0.25, 0.1, (-b - 1e-3, b + 1e-3))


def test_wronskian_suite(double_well):
    hbar = 0.05
    s = wronskian_suite(double_well, 0.25, hbar, DOMAIN)
    assert abs(s.uu_ratio - 1) <= 5 * hbar
    assert abs(s.ww_ratio - 1) <= 5 * hbar
    assert s.cross <= 1
    # {u, w} = -1/hbar where v rises through the turning point, +1/hbar where it falls
    assert abs(hbar * s._val(s.uw_left) + 1) <= 5 * hbar
    assert abs(hbar * s._val(s.uw_right) - 1) <= 5 * hbar
    assert s.f1f1 * hbar == pytest.approx(2j, abs=1e-12)
