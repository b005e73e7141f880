"""Adaptive Dormand-Prince 5(4) for -hbar^2 psi'' + (v - lam) psi = 0.

Real solutions use one column, complex ones two (real and imaginary part),
so a complex solution is a 4-component real system.  The state is kept as a
mantissa times exp(log_scale); whenever its size leaves [1e-100, 1e100] the
mantissa is renormalized and the factor is added to the log-scale ledger.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .potential import PotentialModel

RTOL = 1e-10
_BIG = 1e100
_SMALL = 1e-100

# Dormand-Prince tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


class IntegrationError(ArithmeticError):
    pass


@dataclass
class IVPSolution:
    """Accepted nodes of one integration run.

    ``y[i]`` has shape (2, m): row 0 values, row 1 derivatives, one column per
    real component.  The physical state at node i is ``y[i] * exp(log_scale[i])``.
    """

    model: PotentialModel
    lam: float
    hbar: float
    x: np.ndarray
    y: np.ndarray
    log_scale: np.ndarray
    renormalizations: int = 0
    rtol: float = RTOL

    @property
    def is_complex(self) -> bool:
        return self.y.shape[2] == 2

    def _node_state(self, i):
        return self.y[i], self.log_scale[i]

    def at(self, x: float):
        """(value, derivative, log_scale) at x, complex if the solution is."""
        lo, hi = min(self.x[0], self.x[-1]), max(self.x[0], self.x[-1])
        if not lo - 1e-12 <= x <= hi + 1e-12:
            raise IntegrationError(f"x={x} outside the integrated range [{lo}, {hi}]")
        i = int(np.argmin(np.abs(self.x - x)))
        y, ls = self._node_state(i)
        if self.x[i] != x:
            run = integrate(self.model, self.lam, self.hbar, float(self.x[i]), y, float(x),
                            rtol=self.rtol, log_scale=float(ls), record=False)
            y, ls = run.y[-1], run.log_scale[-1]
        if self.is_complex:
            return complex(y[0, 0], y[0, 1]), complex(y[1, 0], y[1, 1]), float(ls)
        return float(y[0, 0]), float(y[1, 0]), float(ls)

    def sample(self, xs):
        return [self.at(float(x)) for x in xs]


def _rhs_factory(model: PotentialModel, lam: float, hbar: float):
    inv = 1.0 / (hbar * hbar)
    v = model._scalar

    def q(x):
        return (v(x) - lam) * inv

    return q


def integrate(model: PotentialModel, lam: float, hbar: float, x0: float, y0, x1: float,
              rtol: float = RTOL, x_eval=None, log_scale: float = 0.0, record: bool = True,
              max_steps: int = 2_000_000, h_init: float | None = None) -> IVPSolution:
    """Integrate from x0 to x1 starting at y0 (shape (2,) or (2, m), or complex pair).

    Steps are clipped to land on every point of ``x_eval`` so those are nodes.
    """
    y0 = np.asarray(y0)
    if np.iscomplexobj(y0):
        y0 = np.stack([y0.real, y0.imag], axis=-1).reshape(2, 2)
    y0 = np.array(y0, dtype=float).reshape(2, -1)
    m = y0.shape[1]
    if hbar <= 0:
        raise IntegrationError("hbar must be positive")
    q = _rhs_factory(model, lam, hbar)
    direction = 1.0 if x1 >= x0 else -1.0
    span = abs(x1 - x0)
    stops = [] if x_eval is None else sorted({float(s) for s in x_eval if (s - x0) * direction > 0
                                              and (x1 - s) * direction > 0}, key=lambda s: direction * s)
    stops.append(float(x1))

    y = [list(y0[0]), list(y0[1])]
    ls = float(log_scale)
    xs, ys, lss = [float(x0)], [y0.copy()], [ls]
    x = float(x0)
    if span == 0.0:
        return IVPSolution(model, lam, hbar, np.array(xs), np.array(ys), np.array(lss), 0, rtol)
    qx = q(x)
    k_loc = math.sqrt(abs(qx)) + 1.0 / max(span, 1e-300)
    h = h_init if h_init else min(span, 0.05 / k_loc)
    renorm = 0
    steps = 0
    stop_i = 0
    hmin = 1e-14 * max(1.0, abs(x0), abs(x1))
    while stop_i < len(stops):
        target = stops[stop_i]
        remaining = abs(target - x)
        if remaining <= 1e-15 * max(1.0, abs(target)):
            x = target
            stop_i += 1
            if record or stop_i == len(stops):
                xs.append(x)
                ys.append(np.array(y))
                lss.append(ls)
            continue
        last = h >= remaining
        step = remaining if last else h
        s = direction * step
        # stages: k_i = (y', q y) for each column
        kv, kd = [], []
        for i in range(7):
            if i == 0:
                yv, yd = y[0], y[1]
            else:
                a = _A[i]
                yv = [y[0][c] + s * sum(a[j] * kv[j][c] for j in range(i)) for c in range(m)]
                yd = [y[1][c] + s * sum(a[j] * kd[j][c] for j in range(i)) for c in range(m)]
            qi = q(x + _C[i] * s)
            kv.append(yd)
            kd.append([qi * yv[c] for c in range(m)])
        nv = [y[0][c] + s * sum(_B[j] * kv[j][c] for j in range(6)) for c in range(m)]
        nd = [y[1][c] + s * sum(_B[j] * kd[j][c] for j in range(6)) for c in range(m)]
        ev = max(abs(s * sum(_E[j] * kv[j][c] for j in range(7))) for c in range(m))
        ed = max(abs(s * sum(_E[j] * kd[j][c] for j in range(7))) for c in range(m))
        nval = max(max(abs(t) for t in nv), max(abs(t) for t in y[0]), 1e-300)
        nder = max(max(abs(t) for t in nd), max(abs(t) for t in y[1]), 1e-300)
        err = max(ev / (rtol * nval), ed / (rtol * nder))
        steps += 1
        if steps > max_steps:
            raise IntegrationError("too many steps")
        if err <= 1.0:
            x = target if last else x + s
            y = [nv, nd]
            big = max(nval, nder)
            if big > _BIG or big < _SMALL:
                y = [[t / big for t in nv], [t / big for t in nd]]
                ls += math.log(big)
                renorm += 1
            if last:
                stop_i += 1
            if record or (last and stop_i == len(stops)):
                xs.append(x)
                ys.append(np.array(y))
                lss.append(ls)
            fac = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
            if not last:
                h = step * fac
        else:
            h = step * max(0.2, 0.9 * err ** -0.2)
            if h < hmin:
                raise IntegrationError(f"step size underflow at x={x}")
        if not math.isfinite(ls) or not all(math.isfinite(t) for t in y[0] + y[1]):
            raise IntegrationError(f"non-finite state at x={x}")
    return IVPSolution(model, lam, hbar, np.array(xs), np.array(ys), np.array(lss), renorm, rtol)


def wronskian(s1, s2):
    """{f, g} = f' g - f g' from (value, derivative, log_scale) triples."""
    f, fp, l1 = s1
    g, gp, l2 = s2
    return fp * g - f * gp, l1 + l2


def residual(sol: IVPSolution, x: float) -> float:
    """Relative ODE residual |-hbar^2 psi'' + (v - lam) psi| / ((hbar^2 + |v - lam|) |psi|).

    psi'' is rebuilt from a 4th-order central difference of the integrated
    derivative, so it does not reuse the right-hand side.
    """
    gap = sol.model.value(x) - sol.lam
    k = math.sqrt(abs(gap)) / sol.hbar + 1.0
    d = 1e-3 / k
    vals = [sol.at(x + j * d) for j in (-2, -1, 1, 2)]
    psi, _, ls0 = sol.at(x)
    der = [p * math.exp(l - ls0) for _, p, l in vals]
    psi2 = (der[0] - 8 * der[1] + 8 * der[2] - der[3]) / (12 * d)
    res = abs(-sol.hbar ** 2 * psi2 + gap * psi)
    return res / ((sol.hbar ** 2 + abs(gap)) * max(abs(psi), 1e-300))
