"""Reflection and transmission through a single barrier, and the barrier Wronskians."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import langer, ode
from .actions import barrier_omega, partial_action
from .geometry import decomposition
from .potential import PotentialModel


class TunnelingError(ValueError):
    pass


@dataclass(frozen=True)
class TunnelingReport:
    hbar: float
    omega: float
    R: complex
    log_abs_T: float
    arg_T: float
    flux_defect: float
    drift: float
    barrier: tuple
    anchors: tuple

    @property
    def abs_T(self) -> float:
        return math.exp(self.log_abs_T)

    @property
    def T(self) -> complex:
        return cmath.rect(self.abs_T, self.arg_T)


def _barrier_between(model: PotentialModel, lam: float, xl: float, xr: float, scan: int = 4096):
    xs = np.linspace(xl, xr, scan + 1)
    f = model.value(xs) - lam
    if f[0] >= 0 or f[-1] >= 0:
        raise TunnelingError("anchors must lie in classically allowed regions (v < lam)")
    idx = np.flatnonzero(np.sign(f[:-1]) != np.sign(f[1:]))
    if idx.size != 2:
        raise TunnelingError(f"expected one barrier between the anchors, found {idx.size} sign changes")

    def root(i):
        return brentq(lambda x: model.value(x) - lam, xs[i], xs[i + 1], xtol=1e-15, rtol=1e-15)

    return root(idx[0]), root(idx[1])


def _wkb(model, lam, hbar, x, phase):
    """p^{-1/4} e^{i phase} and its derivative for a right-moving wave."""
    j = model.jet(x)
    p = lam - j.v
    val = p ** -0.25 * cmath.exp(1j * phase)
    return val, (0.25 * j.d1 / p + 1j * math.sqrt(p) / hbar) * val


def _check_anchor(model, x, tp, hbar, min_units):
    scale = hbar ** (2.0 / 3.0) * abs(model.jet(tp).d1) ** (-1.0 / 3.0)
    if abs(x - tp) < min_units * scale:
        raise TunnelingError(f"anchor {x} closer than {min_units} Airy lengths to the turning point {tp}")


def compute_rt(model: PotentialModel, lam: float, hbar: float, anchors, min_units: float = 1.0,
               rtol: float = ode.RTOL) -> TunnelingReport:
    """R and T for a wave incident from the left.

    f_2 is the transmitted wave, set from its WKB data at the right anchor
    and integrated leftward.  At the left anchor f_2 = A f_1 + B conj(f_1)
    with A = {f_2, conj f_1}/{f_1, conj f_1} and B = {f_1, f_2}/{f_1, conj f_1};
    T = 1/A and R = B/A.
    """
    xl, xr = map(float, anchors)
    if not xl < xr:
        raise TunnelingError("anchors must satisfy left < right")
    b1, b2 = _barrier_between(model, lam, xl, xr)
    _check_anchor(model, xl, b1, hbar, min_units)
    _check_anchor(model, xr, b2, hbar, min_units)
    s_r = partial_action(model, lam, b2, xr, "well")
    s_l = partial_action(model, lam, b1, xl, "well")
    f2v, f2d = _wkb(model, lam, hbar, xr, s_r / hbar + math.pi / 4)
    run = ode.integrate(model, lam, hbar, xr, np.array([f2v, f2d]), xl, rtol=rtol, record=False)
    g, gd, ls = run.at(xl)
    f1, f1d = _wkb(model, lam, hbar, xl, -s_l / hbar + math.pi / 4)
    c1, c1d = f1.conjugate(), f1d.conjugate()
    w11 = f1d * c1 - f1 * c1d
    a_m = (gd * c1 - g * c1d) / w11           # A = a_m e^{ls}
    b_m = (f1d * g - f1 * gd) / w11           # B = b_m e^{ls}
    omega = barrier_omega(model, (b1, b2), lam)
    r = b_m / a_m
    log_t = -(math.log(abs(a_m)) + ls)
    flux_in = (f2v.conjugate() * f2d).imag
    flux_out = (g.conjugate() * gd).imag * math.exp(2 * ls)
    # Im(conj f f') cancels to ~eps |f||f'| once f has grown across the barrier;
    # the drift is only reported when that floor is below 1e-6 of the flux
    floor = 1e-15 * abs(g) * abs(gd) * math.exp(2 * ls) / abs(flux_in)
    drift = abs(flux_out - flux_in) / abs(flux_in) if floor < 1e-6 else math.nan
    flux = abs(r) ** 2 + math.exp(2 * log_t) - 1.0
    return TunnelingReport(float(hbar), omega, complex(r), log_t, -cmath.phase(a_m), flux, drift,
                           (b1, b2), (xl, xr))


def default_anchors(model: PotentialModel, lam: float, domain, barrier: int = 0):
    """Geometric midpoints of the wells on either side of a barrier."""
    dec = decomposition(model, lam, domain)
    if barrier >= len(dec.barriers):
        raise TunnelingError("no such barrier at this energy")
    wl, wr = dec.wells[barrier], dec.wells[barrier + 1]
    return 0.5 * (wl[0] + wl[1]), 0.5 * (wr[0] + wr[1])


@dataclass(frozen=True)
class WronskianSuite:
    hbar: float
    omega: float
    uu: tuple
    ww: tuple
    uw: tuple
    wu: tuple
    uw_left: tuple
    uw_right: tuple
    f1f1: complex

    @staticmethod
    def _val(w):
        return w[0] * math.exp(w[1])

    @property
    def uu_ratio(self) -> float:
        """{u+(b1), u-(b2)} * (-2 hbar e^{Omega/hbar}); near 1."""
        return -2 * self.hbar * self.uu[0] * math.exp(self.uu[1] + self.omega / self.hbar)

    @property
    def ww_ratio(self) -> float:
        """{w+(b1), w-(b2)} * hbar e^{-Omega/hbar} / 2; near 1."""
        return 0.5 * self.hbar * self.ww[0] * math.exp(self.ww[1] - self.omega / self.hbar)

    @property
    def cross(self) -> float:
        """hbar * max |cross Wronskian| in units of e^{-0.8 Omega/hbar}; at most 1 passes."""
        worst = max(math.log(abs(w[0])) + w[1] for w in (self.uw, self.wu))
        return math.exp(worst + math.log(self.hbar) + 0.8 * self.omega / self.hbar)


def wronskian_suite(model: PotentialModel, lam: float, hbar: float, domain, barrier: int = 0,
                    margin: float = 0.1) -> WronskianSuite:
    dec = decomposition(model, lam, domain)
    if barrier >= len(dec.barriers):
        raise TunnelingError("no such barrier at this energy")
    b1, b2 = dec.barriers[barrier]
    k = 2 * barrier + 1
    f_left = langer.frame_at(model, lam, dec.points, k, dec.domain, margin)
    f_right = langer.frame_at(model, lam, dec.points, k + 1, dec.domain, margin)
    mid = 0.5 * (b1 + b2)
    u1 = langer.integrate_canonical("u", f_left, hbar, (b1, mid))
    w1 = langer.integrate_canonical("w", f_left, hbar, (b1, mid))
    u2 = langer.integrate_canonical("u", f_right, hbar, (mid, b2))
    w2 = langer.integrate_canonical("w", f_right, hbar, (mid, b2))
    wr = langer.wronskian
    xl, xr = default_anchors(model, lam, domain, barrier)
    j = model.jet(xl)
    p = lam - j.v
    f1, f1d = p ** -0.25, complex(0.25 * j.d1 / p, math.sqrt(p) / hbar) * p ** -0.25
    f1f1 = f1d * f1 - f1 * f1d.conjugate()
    return WronskianSuite(
        float(hbar), barrier_omega(model, (b1, b2), lam),
        wr(u1, u2, mid), wr(w1, w2, mid), wr(u1, w2, mid), wr(w1, u2, mid),
        wr(u1, w1, b1), wr(u2, w2, b2), complex(f1f1),
    )
