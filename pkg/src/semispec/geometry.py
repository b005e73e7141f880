"""Turning points and the well/barrier decomposition at a fixed energy."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .potential import PotentialModel

TAU_CRIT = 1e-6


class GeometryError(ValueError):
    pass


class CriticalEnergyError(GeometryError):
    pass


class DomainError(GeometryError):
    pass


class DecompositionError(GeometryError):
    pass


class AliasingWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TurningPoint:
    x: float
    slope: float

    @property
    def orientation(self) -> str:
        return "rising" if self.slope > 0 else "falling"


@dataclass(frozen=True)
class EnergyDecomposition:
    lam: float
    points: tuple
    domain: tuple

    @property
    def wells(self) -> list[tuple[float, float]]:
        p = self.points
        return [(p[2 * i].x, p[2 * i + 1].x) for i in range(len(p) // 2)]

    @property
    def barriers(self) -> list[tuple[float, float]]:
        p = self.points
        return [(p[2 * i + 1].x, p[2 * i + 2].x) for i in range(len(p) // 2 - 1)]

    @property
    def L(self) -> int:
        return len(self.points) // 2


def _refine(model: PotentialModel, lam: float, lo: float, hi: float) -> float:
    flo = model.value(lo) - lam
    if flo == 0.0:
        return lo
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        fm = model.value(mid) - lam
        if fm == 0.0 or hi - lo < 1e-9 * max(1.0, abs(mid)):
            lo = hi = mid
            break
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    width = 1e-8 * max(1.0, abs(x))
    left, right = x - width, x + width
    for _ in range(40):
        j = model.jet(x)
        if j.d1 == 0.0:
            break
        step = (j.v - lam) / j.d1
        xn = x - step
        if not left <= xn <= right:
            xn = min(max(xn, left), right)
        if xn == x or abs(step) <= 2e-16 * max(1.0, abs(x)):
            x = xn
            break
        x = xn
    return x


def find_turning_points(model: PotentialModel, lam: float, domain, scan_n: int = 2048,
                        tau_crit: float = TAU_CRIT) -> list[TurningPoint]:
    a, b = map(float, domain)
    if scan_n < 64:
        raise GeometryError("scan_n must be at least 64")
    if not a < b:
        raise DomainError("domain must satisfy a < b")
    if model.value(a) <= lam or model.value(b) <= lam:
        raise DomainError(f"v must exceed lambda={lam} at both domain ends {domain}")
    xs = np.linspace(a, b, scan_n + 1)
    f = model.value(xs) - lam
    roots = []
    cells = []
    for i in np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) <= 0):
        if f[i] == 0.0 and i > 0 and np.sign(f[i - 1]) * np.sign(f[i + 1]) > 0:
            raise CriticalEnergyError(f"tangential root near x={xs[i]}")
        if f[i + 1] == 0.0 and i + 1 < scan_n:
            continue  # handled as the left node of the next cell
        roots.append(_refine(model, lam, xs[i], xs[i + 1]))
        cells.append(i)
    scale = max(1.0, abs(lam))
    out = []
    for i, x in enumerate(roots):
        if out and abs(x - out[-1].x) < 1e-10:
            raise CriticalEnergyError(f"merged roots near x={x}")
        j = model.jet(x)
        if abs(j.v - lam) > 1e-13 * scale * 10:
            raise GeometryError(f"root refinement failed at x={x}")
        if abs(j.d1) < tau_crit:
            raise CriticalEnergyError(f"|v'| = {abs(j.d1):.3g} < {tau_crit} at x={x}")
        if i > 0 and cells[i] == cells[i - 1]:
            warnings.warn(f"two roots in one scan cell near x={x}", AliasingWarning, stacklevel=2)
        out.append(TurningPoint(float(x), float(j.d1)))
    return out


def decompose(points, model: PotentialModel, lam: float, domain) -> EnergyDecomposition:
    pts = tuple(points)
    if not pts or len(pts) % 2:
        raise DecompositionError(f"need a nonempty even number of turning points, got {len(pts)}")
    for i, p in enumerate(pts):
        want = "falling" if i % 2 == 0 else "rising"
        if p.orientation != want:
            raise DecompositionError(f"turning point {i} at x={p.x} is {p.orientation}, expected {want}")
    dec = EnergyDecomposition(float(lam), pts, (float(domain[0]), float(domain[1])))
    for (lo, hi), inside in [(w, True) for w in dec.wells] + [(br, False) for br in dec.barriers]:
        s = np.linspace(lo, hi, 34)[1:-1]
        gap = lam - model.value(s)
        if (inside and np.any(gap <= 0)) or (not inside and np.any(gap >= 0)):
            raise DecompositionError(f"sign of v - lambda not constant on ({lo}, {hi})")
    return dec


def decomposition(model: PotentialModel, lam: float, domain, scan_n: int = 2048,
                  tau_crit: float = TAU_CRIT) -> EnergyDecomposition:
    return decompose(find_turning_points(model, lam, domain, scan_n, tau_crit), model, lam, domain)


def validate_domain(model: PotentialModel, window, domain, margin_fraction: float = 0.5):
    lo, hi = window
    need = hi + margin_fraction * (hi - lo)
    va, vb = model.value(domain[0]), model.value(domain[1])
    if va <= need or vb <= need:
        raise DomainError(f"v(a)={va:.6g}, v(b)={vb:.6g} must exceed {need:.6g}")


def auto_domain(model: PotentialModel, window, hbar: float, decay: float = 36.0,
                margin_fraction: float = 0.5, search=(-50.0, 50.0), n: int = 20001):
    """Smallest symmetric-in-spirit domain where states in the window have decayed.

    Each end is pushed outward until the barrier action above the top of the
    window reaches ``decay * hbar`` and v exceeds the validation margin.
    """
    lo, hi = window
    need = hi + margin_fraction * (hi - lo)
    xs = np.linspace(search[0], search[1], n)
    v = model.value(xs)
    inside = np.flatnonzero(v < hi)
    if inside.size == 0:
        raise DomainError("no classically allowed region below the window top")
    gap = np.sqrt(np.clip(v - hi, 0.0, None))
    dx = xs[1] - xs[0]

    def walk(start, step):
        acc = 0.0
        i = start
        while 0 < i < n - 1:
            i += step
            acc += gap[i] * dx
            if acc >= decay * hbar and v[i] > need:
                return float(xs[i])
        raise DomainError("search interval too small for the requested decay")

    return walk(int(inside[0]), -1), walk(int(inside[-1]), +1)
