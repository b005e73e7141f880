"""Airy functions Ai, Bi and derivatives on the real line.

For |t| <= 8 values come from a table of (y, y') at nodes spaced 1/4 and a
local Taylor expansion built from the recurrence of y'' = t*y.  The table is
filled once at import: node 0 from the Gamma-function constants, Bi on t > 0
from its Maclaurin series (all terms positive), the oscillatory side by
stepping down from 0, and Ai on t > 0 by stepping down from the asymptotic
expansion at t = 9, which is the stable direction for the recessive solution.
For |t| > 8 the asymptotic expansions are summed to optimal truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

AI0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
AIP0 = -(3.0 ** (-1.0 / 3.0)) / math.gamma(1.0 / 3.0)
BI0 = math.sqrt(3.0) * AI0
BIP0 = -math.sqrt(3.0) * AIP0

SWITCH = 8.0
_STEP = 0.25
_TAYLOR_TERMS = 28
_ASYM_TERMS = 60
_LOG_MAX = math.log(np.finfo(float).max)


class AiryOverflowError(OverflowError):
    def __init__(self, t, log_magnitude):
        super().__init__(f"Bi({t}) overflows: log|Bi| = {log_magnitude}")
        self.log_magnitude = log_magnitude


@dataclass(frozen=True)
class AiryValues:
    ai: object
    ai_prime: object
    bi: object
    bi_prime: object

    def wronskian(self):
        return self.ai_prime * self.bi - self.ai * self.bi_prime


# ---------------------------------------------------------------- Taylor steps

def _taylor(t0, y, yp, h, terms=_TAYLOR_TERMS):
    """Advance (y, y') of y'' = t y from t0 by h; all arguments broadcast."""
    c_prev2 = y  # c_{n-2}
    c_prev1 = yp  # c_{n-1}
    hn = h  # h^{n-1} for the derivative sum at n
    val = y + yp * h
    der = yp + 0.0 * h
    c_nm3 = 0.0
    hpow = h * h  # h^n
    # c_n = (t0 c_{n-2} + c_{n-3}) / (n (n-1))
    for n in range(2, terms):
        c_n = (t0 * c_prev2 + c_nm3) / (n * (n - 1))
        val = val + c_n * hpow
        der = der + n * c_n * hn
        hn = hn * h
        hpow = hpow * h
        c_nm3, c_prev2, c_prev1 = c_prev2, c_prev1, c_n
    return val, der


def _walk(start_t, y, yp, stop_t):
    """Step from start_t to stop_t in increments of _STEP, returning all node states."""
    n = int(round(abs(stop_t - start_t) / _STEP))
    h = math.copysign(_STEP, stop_t - start_t)
    out = [(start_t, y, yp)]
    t = start_t
    for _ in range(n):
        y, yp = _taylor(t, y, yp, h)
        t = round(t + h, 12)
        out.append((t, y, yp))
    return out


# ---------------------------------------------------------------- asymptotics

def _uv_coefficients(k_max: int):
    u = [1.0]
    for k in range(1, k_max):
        # u_k = u_{k-1} * (6k-5)(6k-3)(6k-1) / ((2k-1) 216 k)
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k))
    v = [1.0] + [-(6 * k + 1) / (6 * k - 1) * u[k] for k in range(1, k_max)]
    return np.array(u), np.array(v)


_U, _V = _uv_coefficients(_ASYM_TERMS)


def _series(coeffs, zeta, sign_pattern):
    """Sum coeffs[k]*s_k/zeta^k to optimal truncation, vectorized in zeta.

    sign_pattern(k) gives the sign multiplying term k.
    """
    zeta = np.asarray(zeta, dtype=float)
    total = np.zeros_like(zeta)
    live = np.ones(zeta.shape, dtype=bool)
    prev = np.full(zeta.shape, np.inf)
    zk = np.ones_like(zeta)
    for k, c in enumerate(coeffs):
        term = sign_pattern(k) * c / zk
        mag = np.abs(term)
        live &= mag < prev
        total = np.where(live, total + term, total)
        live &= mag > 1e-17 * np.abs(total)
        if not live.any():
            break
        prev = mag
        zk = zk * zeta
    return total


def _asym_positive(t):
    """Scaled asymptotic forms for t > 0: (Ai e^z, Ai' e^z, Bi e^-z, Bi' e^-z)."""
    t = np.asarray(t, dtype=float)
    z = 2.0 / 3.0 * t ** 1.5
    q = t ** 0.25
    rpi = 1.0 / math.sqrt(math.pi)
    alt = lambda k: (-1.0) ** k
    one = lambda k: 1.0
    ai = 0.5 * rpi / q * _series(_U, z, alt)
    aip = -0.5 * rpi * q * _series(_V, z, alt)
    bi = rpi / q * _series(_U, z, one)
    bip = rpi * q * _series(_V, z, one)
    return ai, aip, bi, bip


def _asym_negative(t):
    """Modulus-phase asymptotic forms for t < 0."""
    x = -np.asarray(t, dtype=float)
    z = 2.0 / 3.0 * x ** 1.5
    q = x ** 0.25
    rpi = 1.0 / math.sqrt(math.pi)
    z2 = z * z
    alt = lambda k: (-1.0) ** k
    pu, qu = _series(_U[0::2], z2, alt), _series(_U[1::2], z2, alt) / z
    pv, qv = _series(_V[0::2], z2, alt), _series(_V[1::2], z2, alt) / z
    # cos/sin of z - pi/4 without losing the reduction of the large argument
    c, s = np.cos(z - math.pi / 4), np.sin(z - math.pi / 4)
    ai = rpi / q * (c * pu + s * qu)
    bi = rpi / q * (-s * pu + c * qu)
    aip = rpi * q * (s * pv - c * qv)
    bip = rpi * q * (c * pv + s * qv)
    return ai, aip, bi, bip


# ---------------------------------------------------------------- table

def _maclaurin_bi(t):
    # f = sum 3^k (1/3)_k t^{3k}/(3k)!, g = sum 3^k (2/3)_k t^{3k+1}/(3k+1)!
    f = g = 0.0
    fp = gp = 0.0
    tf, tg = 1.0, t
    k = 0
    while True:
        f += tf
        g += tg
        if k > 0:
            fp += 3 * k * tf / t
        gp += (3 * k + 1) * tg / t if t != 0.0 else (1.0 if k == 0 else 0.0)
        nf = tf * t ** 3 / ((3 * k + 2) * (3 * k + 3))
        ng = tg * t ** 3 / ((3 * k + 3) * (3 * k + 4))
        k += 1
        if nf < 1e-18 * f and ng < 1e-18 * g:
            break
        tf, tg = nf, ng
    return BI0 * f + BIP0 * g, BI0 * fp + BIP0 * gp


def _build_table():
    nodes = np.round(np.arange(-SWITCH - 0.5, SWITCH + 0.5 + 1e-9, _STEP), 12)
    ai = np.empty_like(nodes)
    aip = np.empty_like(nodes)
    bi = np.empty_like(nodes)
    bip = np.empty_like(nodes)
    index = {float(t): i for i, t in enumerate(nodes)}
    for t, y, yp in _walk(0.0, AI0, AIP0, nodes[0]):
        ai[index[t]], aip[index[t]] = y, yp
    for t, y, yp in _walk(0.0, BI0, BIP0, nodes[0]):
        bi[index[t]], bip[index[t]] = y, yp
    top = float(nodes[-1]) + 0.5
    a, ap, _, _ = _asym_positive(np.array([top]))
    scale = math.exp(-2.0 / 3.0 * top ** 1.5)
    for t, y, yp in _walk(top, a[0] * scale, ap[0] * scale, 0.0):
        if t in index:
            ai[index[t]], aip[index[t]] = y, yp
    for i, t in enumerate(nodes):
        if t > 0:
            bi[i], bip[i] = _maclaurin_bi(float(t))
    return nodes, ai, aip, bi, bip


_NODES, _TAI, _TAIP, _TBI, _TBIP = _build_table()


def _table_eval(t):
    t = np.asarray(t, dtype=float)
    idx = np.clip(np.rint((t - _NODES[0]) / _STEP).astype(int), 0, len(_NODES) - 1)
    t0 = _NODES[idx]
    h = t - t0
    ai, aip = _taylor(t0, _TAI[idx], _TAIP[idx], h)
    bi, bip = _taylor(t0, _TBI[idx], _TBIP[idx], h)
    return ai, aip, bi, bip


# ---------------------------------------------------------------- public

def _unscaled(t):
    t = np.asarray(t, dtype=float)
    ai = np.empty_like(t)
    aip = np.empty_like(t)
    bi = np.empty_like(t)
    bip = np.empty_like(t)
    mid = np.abs(t) <= SWITCH
    if mid.any():
        ai[mid], aip[mid], bi[mid], bip[mid] = _table_eval(t[mid])
    neg = t < -SWITCH
    if neg.any():
        ai[neg], aip[neg], bi[neg], bip[neg] = _asym_negative(t[neg])
    pos = t > SWITCH
    if pos.any():
        tp = t[pos]
        z = 2.0 / 3.0 * tp ** 1.5
        if np.any(z > _LOG_MAX - 5.0):
            bad = tp[z > _LOG_MAX - 5.0][0]
            s = _asym_positive(np.array([bad]))[2][0]
            raise AiryOverflowError(float(bad), float(2.0 / 3.0 * bad ** 1.5 + math.log(s)))
        a, ap, b, bp = _asym_positive(tp)
        em, ep = np.exp(-z), np.exp(z)
        ai[pos], aip[pos], bi[pos], bip[pos] = a * em, ap * em, b * ep, bp * ep
    return ai, aip, bi, bip


def airy(t) -> AiryValues:
    """Ai, Ai', Bi, Bi' at real t (scalar or array)."""
    if np.any(~np.isfinite(t)):
        raise ValueError("airy argument must be finite")
    vals = _unscaled(np.atleast_1d(np.asarray(t, dtype=float)))
    if np.ndim(t) == 0:
        vals = tuple(float(v[0]) for v in vals)
    return AiryValues(*vals)


def airy_log_scaled(t) -> AiryValues:
    """(Ai e^z, Ai' e^z, Bi e^-z, Bi' e^-z) with z = 2 t^{3/2}/3, for t >= 0."""
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(arr < 0) or np.any(~np.isfinite(arr)):
        raise ValueError("airy_log_scaled needs finite t >= 0")
    out = [np.empty_like(arr) for _ in range(4)]
    small = arr <= SWITCH
    if small.any():
        ts = arr[small]
        z = 2.0 / 3.0 * ts ** 1.5
        a, ap, b, bp = _table_eval(ts)
        ep, em = np.exp(z), np.exp(-z)
        for o, val in zip(out, (a * ep, ap * ep, b * em, bp * em)):
            o[small] = val
    if (~small).any():
        for o, val in zip(out, _asym_positive(arr[~small])):
            o[~small] = val
    if np.ndim(t) == 0:
        out = [float(o[0]) for o in out]
    return AiryValues(*out)


def zeta(t):
    """Exponent 2 t^{3/2}/3 used by the scaled forms."""
    return 2.0 / 3.0 * np.asarray(t, dtype=float) ** 1.5
