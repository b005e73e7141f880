"""Direct numerics: finite-difference eigensolver and an initial-value integrator.

Nothing here uses semiclassical formulas; it is the reference the
predictions are checked against.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from . import ode
from .kernels import bisect_eigenvalues, sturm_counts
from .potential import PotentialModel

SEED = 20240611


class TruncationWarning(UserWarning):
    pass


class OracleError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Grid:
    a: float
    b: float
    n: int

    def __post_init__(self):
        if self.n < 63:
            raise OracleError("grid needs at least 63 interior nodes")
        if not self.a < self.b:
            raise OracleError("grid needs a < b")

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n + 1)

    @property
    def x(self) -> np.ndarray:
        return self.a + self.h * np.arange(1, self.n + 1)

    def refined(self) -> "Grid":
        return Grid(self.a, self.b, 2 * self.n + 1)

    @classmethod
    def auto(cls, domain, hbar: float, factor: float = 0.25) -> "Grid":
        """Uniform grid with h <= factor * hbar^{3/2}."""
        a, b = map(float, domain)
        h_max = factor * hbar ** 1.5
        n = max(63, int(math.ceil((b - a) / h_max)) - 1)
        return cls(a, b, n)


@dataclass(frozen=True)
class TridiagonalOperator:
    grid: Grid
    hbar: float
    diag: np.ndarray
    off: float

    @classmethod
    def build(cls, model: PotentialModel, grid: Grid, hbar: float) -> "TridiagonalOperator":
        c = hbar * hbar / grid.h ** 2
        diag = 2.0 * c + model.value(grid.x)
        diag.setflags(write=False)
        return cls(grid, hbar, diag, -c)

    @property
    def off2(self) -> np.ndarray:
        return np.full(self.grid.n - 1, self.off * self.off)

    def matvec(self, psi):
        out = self.diag * psi
        out[1:] += self.off * psi[:-1]
        out[:-1] += self.off * psi[1:]
        return out

    def count_below(self, sigma, backend=None) -> np.ndarray:
        return sturm_counts(self.diag, self.off2, sigma, backend)


@dataclass(frozen=True)
class Eigenpair:
    lam: float
    psi: np.ndarray
    residual: float
    x: np.ndarray
    partner: np.ndarray | None = None

    @property
    def degenerate(self) -> bool:
        return self.partner is not None

    def sign_changes(self, rel: float = 1e-8) -> int:
        p = self.psi[np.abs(self.psi) > rel * np.abs(self.psi).max()]
        return int(np.sum(np.sign(p[1:]) != np.sign(p[:-1])))


def _scale(window) -> float:
    return max(1.0, abs(window[0]), abs(window[1]))


def eigenvalues_in_window(op: TridiagonalOperator, window, tol: float = 1e-12,
                          backend: str | None = None, check_truncation: bool = True) -> np.ndarray:
    lo, hi = map(float, window)
    if not lo < hi:
        raise OracleError("window must satisfy lo < hi")
    vals, _, _ = bisect_eigenvalues(op.diag, op.off2, lo, hi, tol * _scale(window), backend)
    if check_truncation and vals.size:
        pair = eigenvector(op, float(vals[-1]))
        edge = np.concatenate([pair.psi[:5], pair.psi[-5:]]) ** 2
        mass = float(edge.sum() * op.grid.h)
        if mass > 1e-8:
            warnings.warn(f"eigenvector mass {mass:.2e} near the domain ends; enlarge the domain",
                          TruncationWarning, stacklevel=2)
    return vals


def _banded(op: TridiagonalOperator, sigma: float) -> np.ndarray:
    n = op.grid.n
    ab = np.empty((3, n))
    ab[0, :] = op.off
    ab[1, :] = op.diag - sigma
    ab[2, :] = op.off
    return ab


def _normalize(v, h):
    return v / math.sqrt(float(np.dot(v, v)) * h)


def eigenvector(op: TridiagonalOperator, lam: float, steps: int = 3, isolation: float = 1e-10) -> Eigenpair:
    """Inverse iteration from a seeded start vector.

    If another eigenvalue lies within ``isolation`` (relative) of lam, the
    two-dimensional invariant subspace is returned: ``psi`` and ``partner``.
    """
    h = op.grid.h
    scale = max(1.0, abs(lam))
    delta = isolation * scale
    c = op.count_below(np.array([lam - delta, lam + delta]))
    cluster = int(c[1] - c[0])
    rng = np.random.default_rng(SEED)
    ab = _banded(op, lam)
    # a shift that is an exact eigenvalue of the matrix leaves the LU singular;
    # nudge by a few ulps in that case
    k = 2 if cluster >= 2 else 1
    block = rng.standard_normal((op.grid.n, k))
    for _ in range(steps):
        try:
            block = solve_banded((1, 1), ab, block)
        except np.linalg.LinAlgError:
            ab = _banded(op, lam * (1 + 4e-16) + 1e-300)
            block = solve_banded((1, 1), ab, block)
        block, _ = np.linalg.qr(block)
    psi = _normalize(block[:, 0], h)
    partner = _normalize(block[:, 1], h) if k == 2 else None
    if partner is not None:
        # Rayleigh-Ritz inside the pair so psi is the lower state
        basis = np.stack([psi, partner], axis=1)
        proj = basis.T @ np.stack([op.matvec(psi), op.matvec(partner)], axis=1) * h
        w, vecs = np.linalg.eigh(0.5 * (proj + proj.T))
        basis = basis @ vecs
        psi, partner = _normalize(basis[:, 0], h), _normalize(basis[:, 1], h)
    # fix the overall sign deterministically: first significant component positive
    i = int(np.argmax(np.abs(psi) > 1e-3 * np.abs(psi).max()))
    if psi[i] < 0:
        psi = -psi
    res = float(np.linalg.norm(op.matvec(psi) - lam * psi) * math.sqrt(h))
    return Eigenpair(float(lam), psi, res, op.grid.x, partner)


@dataclass(frozen=True)
class RefinedEigenvalue:
    index: int
    lam: float
    error: float
    lam_h: float
    lam_h2: float


def _indexed(op: TridiagonalOperator, lo: float, hi: float, tol: float, backend=None):
    vals, k_lo, _ = bisect_eigenvalues(op.diag, op.off2, lo, hi, tol, backend)
    return {k_lo + i: float(v) for i, v in enumerate(vals)}


def refine_by_index(model: PotentialModel, grid: Grid, hbar: float, indices, backend=None,
                    bounds=None) -> list[RefinedEigenvalue]:
    """Richardson extrapolation for the eigenvalues with the given Sturm indices.

    ``bounds`` is an interval known to contain those eigenvalues on the coarse
    grid; the fine-grid search widens it by the coarse-to-fine shift.
    """
    indices = sorted(int(k) for k in indices)
    if not indices:
        return []
    coarse = TridiagonalOperator.build(model, grid, hbar)
    fine = TridiagonalOperator.build(model, grid.refined(), hbar)
    if bounds is None:
        bounds = (float(coarse.diag.min() - 2 * abs(coarse.off)), float(coarse.diag.max() + 2 * abs(coarse.off)))
    lo, hi = map(float, bounds)
    tol = 1e-12 * max(1.0, abs(lo), abs(hi))
    cv = _indexed(coarse, lo, hi, tol, backend)
    missing = [k for k in indices if k not in cv]
    if missing:
        raise OracleError(f"eigenvalue indices {missing} not inside {bounds}")
    top = max(cv[k] for k in indices)
    pad = 0.05 * max(1.0, abs(top)) + 0.1 * (hi - lo)
    fv = _indexed(fine, lo - pad, hi + pad, tol, backend)
    out = []
    for k in indices:
        if k not in fv:
            raise OracleError(f"eigenvalue index {k} not resolved on the refined grid")
        lam_h, lam_h2 = cv[k], fv[k]
        out.append(RefinedEigenvalue(k, (4 * lam_h2 - lam_h) / 3, abs(lam_h2 - lam_h) / 3, lam_h, lam_h2))
    return out


def refine_eigenvalue(model: PotentialModel, grid: Grid, hbar: float, lam_h: float,
                      backend: str | None = None) -> RefinedEigenvalue:
    """Richardson-refined value of the eigenvalue lam_h found on ``grid``."""
    op = TridiagonalOperator.build(model, grid, hbar)
    delta = 1e-9 * max(1.0, abs(lam_h))
    index = int(op.count_below(np.array([lam_h - delta]), backend)[0])
    return refine_by_index(model, grid, hbar, [index], backend, (lam_h - 1e3 * delta, lam_h + 1e3 * delta))[0]


def refined_spectrum(model: PotentialModel, grid: Grid, hbar: float, window, backend=None
                     ) -> list[RefinedEigenvalue]:
    """Richardson-refined eigenvalues whose coarse-grid value lies in the window."""
    op = TridiagonalOperator.build(model, grid, hbar)
    lo, hi = float(window[0]), float(window[1])
    c = op.count_below(np.array([lo, hi]), backend)
    return refine_by_index(model, grid, hbar, range(int(c[0]), int(c[1])), backend, (lo, hi))


def integrate_ivp(model: PotentialModel, lam: float, hbar: float, x_s: float, data, x_e: float,
                  rtol: float = ode.RTOL, x_eval=None) -> ode.IVPSolution:
    """Integrate -hbar^2 psi'' + (v - lam) psi = 0 from x_s with (value, derivative) data.

    Complex data selects the 4-component real system.
    """
    value, derivative = data
    if isinstance(value, complex) or isinstance(derivative, complex):
        y0 = np.array([complex(value), complex(derivative)])
    else:
        y0 = np.array([float(value), float(derivative)])
    return ode.integrate(model, lam, hbar, x_s, y0, x_e, rtol=rtol, x_eval=x_eval)
