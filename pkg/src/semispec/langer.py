"""Langer frames and the canonical solutions u (recessive) and w (dominant).

A frame is anchored at a simple turning point x0.  ``sign = +1`` means the
potential rises through x0 (barrier to the right), ``sign = -1`` that it
falls (barrier to the left).  The Langer variable satisfies
xi'^2 xi = v - lam, is positive on the barrier side and has sign(xi') = sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import ode
from .actions import partial_action
from .airy import airy, airy_log_scaled, zeta
from .potential import PotentialModel

SQRT_PI = math.sqrt(math.pi)


class FrameError(ValueError):
    pass


@dataclass(frozen=True)
class LangerFrame:
    model: PotentialModel
    lam: float
    x0: float
    sign: int
    interval: tuple
    xi_prime0: float
    near: float
    d1: float
    d2: float
    samples: tuple = field(repr=False, default=())

    def _taylor(self, t):
        c, d1, d2 = self.xi_prime0, self.d1, self.d2
        return (c * t * (1 + t * (d1 + t * d2)),
                c * (1 + t * (2 * d1 + 3 * d2 * t)),
                c * (2 * d1 + 6 * d2 * t))

    def barrier_side(self, x: float) -> bool:
        return self.sign * (x - self.x0) > 0

    def xi(self, x: float) -> float:
        return self.jet(x)[0]

    def jet(self, x: float):
        """(xi, xi', xi'') at x."""
        x = float(x)
        t = x - self.x0
        if abs(t) <= self.near:
            return self._taylor(t)
        region = "barrier" if self.barrier_side(x) else "well"
        s = partial_action(self.model, self.lam, self.x0, x, region)
        mag = (1.5 * s) ** (2.0 / 3.0)
        xi = mag if region == "barrier" else -mag
        j = self.model.jet(x)
        gap = j.v - self.lam
        xp = self.sign * math.sqrt(gap / xi)
        xpp = (j.d1 - xp ** 3) / (2.0 * xi * xp)
        return xi, xp, xpp


def build_frame(model: PotentialModel, lam: float, x0: float, sign: int, interval) -> LangerFrame:
    lo, hi = map(float, interval)
    if sign not in (1, -1):
        raise FrameError("sign must be +1 or -1")
    if not lo < x0 < hi:
        raise FrameError(f"anchor {x0} not inside the working interval ({lo}, {hi})")
    j = model.jet(x0)
    scale = max(1.0, abs(lam))
    if abs(j.v - lam) > 1e-10 * scale:
        raise FrameError(f"x0={x0} is not a turning point (v - lam = {j.v - lam:.3g})")
    if j.d1 * sign <= 0:
        raise FrameError(f"slope v'(x0)={j.d1:.6g} does not match sign {sign:+d}")
    xs = np.linspace(lo, hi, 1025)
    side = np.sign(model.value(xs) - lam) * sign * np.sign(xs - x0)
    far = np.abs(xs - x0) > 1e-6 * max(1.0, hi - lo)
    if np.any(side[far] <= 0):
        bad = float(xs[far][np.argmin(side[far])])
        raise FrameError(f"another turning point inside the working interval near x={bad}")
    a1, a2, a3 = j.d1, 0.5 * j.d2, model.d3(x0) / 6.0
    c = math.copysign(abs(a1) ** (1.0 / 3.0), a1)
    d1 = a2 / (5.0 * a1)
    d2 = (25.0 * a1 * a3 - 8.0 * a2 * a2) / (175.0 * a1 * a1)
    near = 1e-3 * min(1.0, x0 - lo, hi - x0)
    frame = LangerFrame(model, float(lam), float(x0), int(sign), (lo, hi), c, near, d1, d2)
    pts = np.linspace(lo, hi, 35)[1:-1]
    samples = tuple((float(x), *frame.jet(float(x))[:2]) for x in pts)
    return LangerFrame(model, float(lam), float(x0), int(sign), (lo, hi), c, near, d1, d2, samples)


def working_interval(points, index: int, domain, margin: float = 0.1):
    """Interval around points[index] stopping ``margin`` of the way short of its neighbours."""
    xs = [p.x for p in points]
    x0 = xs[index]
    lo = domain[0] if index == 0 else xs[index - 1] + margin * (x0 - xs[index - 1])
    hi = domain[1] if index == len(xs) - 1 else xs[index + 1] - margin * (xs[index + 1] - x0)
    return float(lo), float(hi)


def frame_at(model: PotentialModel, lam: float, points, index: int, domain, margin: float = 0.1):
    p = points[index]
    return build_frame(model, lam, p.x, 1 if p.slope > 0 else -1,
                       working_interval(points, index, domain, margin))


def evaluate_langer(kind: str, frame: LangerFrame, hbar: float, x: float):
    """Leading-order Langer value: (value, derivative, log_scale)."""
    if kind not in ("u", "w"):
        raise ValueError("kind must be 'u' or 'w'")
    lo, hi = frame.interval
    if not lo <= x <= hi:
        raise FrameError(f"x={x} outside the working interval ({lo}, {hi})")
    xi, xp, xpp = frame.jet(x)
    h23 = hbar ** (2.0 / 3.0)
    tau = xi / h23
    if tau > 0:
        a = airy_log_scaled(tau)
        z = float(zeta(tau))
        f, fp, ls = (a.ai, a.ai_prime, -z) if kind == "u" else (a.bi, a.bi_prime, z)
    else:
        a = airy(tau)
        f, fp, ls = (a.ai, a.ai_prime, 0.0) if kind == "u" else (a.bi, a.bi_prime, 0.0)
    pref = SQRT_PI * hbar ** (-1.0 / 6.0)
    m = abs(xp)
    value = pref * m ** -0.5 * f
    deriv = pref * (-0.5 * m ** -1.5 * frame.sign * xpp * f + m ** -0.5 * xp / h23 * fp)
    return value, deriv, ls


def _shift(sol: ode.IVPSolution, flip: float, dlog: float) -> ode.IVPSolution:
    sol.y = sol.y * flip
    sol.log_scale = sol.log_scale + dlog
    return sol


@dataclass
class SemiclassicalSolution:
    kind: str
    sign: int
    frame: LangerFrame
    hbar: float
    pieces: list

    def _piece(self, x):
        for p in self.pieces:
            if min(p.x[0], p.x[-1]) - 1e-12 <= x <= max(p.x[0], p.x[-1]) + 1e-12:
                return p
        raise ode.IntegrationError(f"x={x} outside the integrated range of this solution")

    def at(self, x: float):
        """(value, derivative, log_scale); the physical value is value*exp(log_scale)."""
        return self._piece(float(x)).at(float(x))

    def log_abs(self, x: float) -> float:
        v, _, ls = self.at(x)
        return math.log(abs(v)) + ls if v != 0 else -math.inf

    def nodes(self):
        return np.unique(np.concatenate([p.x for p in self.pieces]))

    def residual(self, x: float) -> float:
        return ode.residual(self._piece(float(x)), float(x))


def integrate_canonical(kind: str, frame: LangerFrame, hbar: float, target, rtol: float = ode.RTOL
                        ) -> SemiclassicalSolution:
    """Numerical u or w covering ``target``.

    w starts from Langer data at x0 and is integrated outward.  u starts
    deep in the barrier at the working-interval end, so it stays recessive,
    is integrated toward x0 and beyond, then rescaled so that its value at
    x0 equals the Langer value there.
    """
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    lo, hi = frame.interval
    t_lo, t_hi = sorted(map(float, target))
    if t_lo < lo - 1e-12 or t_hi > hi + 1e-12:
        raise FrameError(f"target ({t_lo}, {t_hi}) not inside the working interval ({lo}, {hi})")
    x0 = frame.x0
    model, lam = frame.model, frame.lam
    if kind == "w":
        v0, d0, l0 = evaluate_langer("w", frame, hbar, x0)
        ends = [e for e in (min(t_lo, x0), max(t_hi, x0)) if e != x0] or [x0]
        pieces = [ode.integrate(model, lam, hbar, x0, [v0, d0], e, rtol=rtol, log_scale=l0) for e in ends]
        return SemiclassicalSolution("w", frame.sign, frame, hbar, pieces)
    if kind != "u":
        raise ValueError("kind must be 'u' or 'w'")
    deep = hi if frame.sign > 0 else lo
    well_end = min(t_lo, x0) if frame.sign > 0 else max(t_hi, x0)
    vd, dd, ld = evaluate_langer("u", frame, hbar, deep)
    run = ode.integrate(model, lam, hbar, deep, [vd, dd], well_end, rtol=rtol, log_scale=ld, x_eval=[x0])
    i0 = int(np.argmin(np.abs(run.x - x0)))
    if run.x[i0] != x0:
        raise ode.IntegrationError("anchor was not an integration node")
    got = float(run.y[i0, 0, 0])
    want, _, lw = evaluate_langer("u", frame, hbar, x0)
    if got == 0.0:
        raise ode.IntegrationError("recessive solution vanishes at the anchor")
    flip = 1.0 if (got > 0) == (want > 0) else -1.0
    dlog = (math.log(abs(want)) + lw) - (math.log(abs(got)) + float(run.log_scale[i0]))
    return SemiclassicalSolution("u", frame.sign, frame, hbar, [_shift(run, flip, dlog)])


def wronskian(s1, s2, x: float):
    """{s1, s2} = s1' s2 - s1 s2' at x as (mantissa, log_scale)."""
    return ode.wronskian(s1.at(x), s2.at(x))


def wronskian_value(s1, s2, x: float) -> float:
    m, ls = wronskian(s1, s2, x)
    return m * math.exp(ls)
