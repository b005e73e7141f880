"""Action integrals over wells and barriers, their energy derivatives and inverse."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import EnergyDecomposition, GeometryError, decomposition
from .potential import PotentialModel
from .quadrature import tanh_sinh

CLAMP = 1e-12


class ActionError(ArithmeticError):
    pass


class TopologyError(ActionError):
    pass


@dataclass(frozen=True)
class ActionProfile:
    lam: float
    phi: tuple
    phi_dot: tuple
    omega: tuple


def _gap_function(model: PotentialModel, lam: float, a: float, b: float, sign: float,
                  sing_a: bool, sing_b: bool):
    """g(x, da, db) = sign*(lam - v), positive on (a, b).

    Within 1e-3 of a singular end the value comes from a cubic expansion about
    that end with the end treated as an exact root, which keeps the relative
    accuracy of g where direct evaluation would cancel.
    """
    length = b - a
    cut = 1e-3 * length
    scale = max(1.0, abs(lam))
    ja = model.jet(a) if sing_a else None
    jb = model.jet(b) if sing_b else None
    ta = model.d3(a) if sing_a else 0.0
    tb = model.d3(b) if sing_b else 0.0

    def g(x, da, db):
        out = sign * (lam - model.value(x))
        if sing_a:
            m = da < cut
            d = da[m]
            out[m] = -sign * d * (ja.d1 + d * (0.5 * ja.d2 + d * ta / 6.0))
        if sing_b:
            m = db < cut
            d = db[m]
            out[m] = -sign * d * (-jb.d1 + d * (0.5 * jb.d2 - d * tb / 6.0))
        if np.any(out < -CLAMP * scale):
            bad = x[np.argmin(out)]
            raise ActionError(f"integrand has the wrong sign at x={bad} (inconsistent decomposition)")
        return np.maximum(out, 0.0)

    return g


def _integral(model, lam, a, b, sign, power, sing_a=True, sing_b=True, rtol=1e-11,
              max_level=12) -> float:
    if a == b:
        return 0.0
    if a > b:
        raise ActionError("interval endpoints out of order")
    g = _gap_function(model, lam, a, b, sign, sing_a, sing_b)

    def f(x, da, db):
        val = g(x, da, db)
        if power > 0:
            return val ** power
        with np.errstate(divide="ignore"):
            r = np.where(val > 0, val, np.inf) ** power
        return r

    return tanh_sinh(f, a, b, rtol=rtol, max_level=max_level).value


def action_phi(model: PotentialModel, well, lam: float, **kw) -> float:
    """Phi = int over the well of sqrt(lam - v)."""
    return _integral(model, lam, well[0], well[1], 1.0, 0.5, **kw)


def action_phi_dot(model: PotentialModel, well, lam: float, **kw) -> float:
    """dPhi/dlam = half-period, (1/2) int (lam - v)^(-1/2)."""
    return 0.5 * _integral(model, lam, well[0], well[1], 1.0, -0.5, **kw)


def barrier_omega(model: PotentialModel, barrier, lam: float, **kw) -> float:
    """Omega = int over the barrier of sqrt(v - lam)."""
    return _integral(model, lam, barrier[0], barrier[1], -1.0, 0.5, **kw)


def partial_action(model: PotentialModel, lam: float, anchor: float, x: float,
                   region: str = "well", power: float = 0.5, **kw) -> float:
    """|int_anchor^x| of |lam - v|^power, anchor being a turning point.

    ``region`` says on which side of lam the integrand lives; x on the wrong
    side of the anchor (v - lam with the other sign) is an error.
    """
    sign = 1.0 if region == "well" else -1.0
    if region not in ("well", "barrier"):
        raise ValueError("region must be 'well' or 'barrier'")
    if x == anchor:
        return 0.0
    probe = 0.5 * (x + anchor)
    if sign * (lam - model.value(probe)) <= 0:
        raise ActionError(f"x={x} is not in the {region} region adjacent to {anchor}")
    if x > anchor:
        return _integral(model, lam, anchor, x, sign, power, True, False, **kw)
    return _integral(model, lam, x, anchor, sign, power, False, True, **kw)


def action_profile(model: PotentialModel, lam: float, domain, dec: EnergyDecomposition | None = None
                   ) -> ActionProfile:
    dec = dec or decomposition(model, lam, domain)
    return ActionProfile(
        lam,
        tuple(action_phi(model, w, lam) for w in dec.wells),
        tuple(action_phi_dot(model, w, lam) for w in dec.wells),
        tuple(barrier_omega(model, br, lam) for br in dec.barriers),
    )


def phi_of(model: PotentialModel, lam: float, ell: int, domain, L: int | None = None):
    """(Phi_ell, Phi_dot_ell) at lam; ``L`` pins the expected well count."""
    try:
        dec = decomposition(model, lam, domain)
    except GeometryError as exc:
        raise TopologyError(str(exc)) from exc
    if L is not None and dec.L != L:
        raise TopologyError(f"well count changed to {dec.L} at lambda={lam} (expected {L})")
    w = dec.wells[ell]
    return action_phi(model, w, lam), action_phi_dot(model, w, lam)


def invert_phi(model: PotentialModel, ell: int, mu: float, bracket, domain) -> float:
    """lam in bracket with Phi_ell(lam) = mu (Newton with a bisection safeguard)."""
    lo, hi = map(float, bracket)
    L = decomposition(model, lo, domain).L
    f_lo = phi_of(model, lo, ell, domain, L)[0] - mu
    f_hi = phi_of(model, hi, ell, domain, L)[0] - mu
    if f_lo > 0 or f_hi < 0:
        raise ActionError(f"mu={mu} outside Phi range [{f_lo + mu}, {f_hi + mu}] on {bracket}")
    tol = 1e-11 * max(1.0, abs(mu))
    lam = lo + (hi - lo) * (-f_lo) / (f_hi - f_lo)
    for _ in range(100):
        phi, dphi = phi_of(model, lam, ell, domain, L)
        r = phi - mu
        if abs(r) <= tol:
            return lam
        if r < 0:
            lo = lam
        else:
            hi = lam
        nxt = lam - r / dphi
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if nxt == lam or hi - lo <= 4e-16 * max(1.0, abs(lam)):
            return nxt
        lam = nxt
    raise ActionError("invert_phi did not converge")

