"""Semiclassical predictions and their comparison with direct numerics.

Covers quantization (predicted levels and matching), phase and amplitude
extraction from eigenvectors, fixing conditions, localization, barrier
decay, Weyl bounds and the symmetric two-well analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import langer
from .actions import action_phi, barrier_omega, invert_phi, partial_action, phi_of, TopologyError
from .geometry import GeometryError, decomposition
from .kernels import bisect_eigenvalues
from .oracle import Grid, TridiagonalOperator, eigenvalues_in_window, eigenvector
from .potential import PotentialModel

C_R = 5.0
C_F = 3.0
AIRY_UNITS = 2.0
QUIET = 1e-13


class PhaseError(ValueError):
    pass


class AnalysisError(ValueError):
    pass


# ---------------------------------------------------------------- quantization

@dataclass(frozen=True)
class PredictedLevel:
    ell: int
    n: int
    lam: float
    radius: float

    @property
    def interval(self):
        return self.lam - self.radius, self.lam + self.radius


@dataclass(frozen=True)
class PredictedSpectrum:
    hbar: float
    window: tuple
    L: int
    levels: tuple

    def for_well(self, ell: int):
        return [p for p in self.levels if p.ell == ell]


def _check_topology(model, window, domain, probes: int = 9) -> int:
    counts = set()
    for lam in np.linspace(window[0], window[1], probes):
        counts.add(decomposition(model, float(lam), domain).L)
    if len(counts) != 1:
        raise TopologyError(f"well count changes inside the window {window}: {sorted(counts)}")
    return counts.pop()


def _padded(model, lo, hi, r, domain):
    """Widen (lo, hi) by r on each side where that keeps the well count."""
    try:
        L = _check_topology(model, (lo, hi), domain)
    except (GeometryError, TopologyError):
        return lo, hi
    out = []
    for edge, wider in ((lo, lo - r), (hi, hi + r)):
        try:
            ok = _check_topology(model, (min(edge, wider), max(edge, wider)), domain, probes=3) == L
        except (GeometryError, TopologyError):
            ok = False
        out.append(wider if ok else edge)
    return out[0], out[1]


def predict_spectrum(model: PotentialModel, hbar: float, window, domain, c_r: float = C_R,
                     pad: bool = False) -> PredictedSpectrum:
    """Levels lam = Psi_ell(pi (n + 1/2) hbar) inside the window, with radius c_r hbar^2.

    ``pad`` widens the search by one radius on each side, so levels whose
    interval reaches into the window are kept for matching.
    """
    lo, hi = map(float, window)
    if hbar <= 0 or not lo < hi:
        raise ValueError("need hbar > 0 and lo < hi")
    if pad:
        lo, hi = _padded(model, lo, hi, c_r * hbar * hbar, domain)
    L = _check_topology(model, (lo, hi), domain)
    levels = []
    for ell in range(L):
        p_lo = phi_of(model, lo, ell, domain, L)[0]
        p_hi = phi_of(model, hi, ell, domain, L)[0]
        n = max(0, math.ceil(p_lo / (math.pi * hbar) - 0.5))
        while math.pi * (n + 0.5) * hbar < p_hi:
            mu = math.pi * (n + 0.5) * hbar
            if mu > p_lo:
                lam = invert_phi(model, ell, mu, (lo, hi), domain)
                levels.append(PredictedLevel(ell, n, lam, c_r * hbar * hbar))
            n += 1
    levels.sort(key=lambda p: (p.lam, p.ell, p.n))
    return PredictedSpectrum(float(hbar), (lo, hi), L, tuple(levels))


@dataclass(frozen=True)
class MatchedEigenvalue:
    lam: float
    level: PredictedLevel | None
    distance: float


@dataclass(frozen=True)
class MatchReport:
    eigenvalues: tuple
    interval_counts: tuple
    unmatched: tuple
    empty: tuple

    @property
    def max_distance(self) -> float:
        return max((m.distance for m in self.eigenvalues), default=0.0)


def _groups(levels, hbar):
    """Indices of levels whose predictions from different wells coincide within hbar^2."""
    groups, cur = [], []
    for i, p in enumerate(levels):
        if cur and p.lam - levels[cur[-1]].lam <= hbar * hbar and p.ell not in {levels[j].ell for j in cur}:
            cur.append(i)
        else:
            if cur:
                groups.append(cur)
            cur = [i]
    if cur:
        groups.append(cur)
    return groups


def match_spectrum(predicted: PredictedSpectrum, eigenvalues) -> MatchReport:
    """Greedy nearest matching; merged intervals take as many eigenvalues as levels they merge."""
    levels = list(predicted.levels)
    eig = sorted(float(e) for e in eigenvalues)
    group_of = {}
    for g, members in enumerate(_groups(levels, predicted.hbar)):
        for i in members:
            group_of[i] = g
    capacity = {g: sum(1 for i in group_of if group_of[i] == g) for g in set(group_of.values())}
    pairs = sorted((abs(e - p.lam), i, j) for i, e in enumerate(eig) for j, p in enumerate(levels))
    assigned: dict[int, int] = {}
    used: dict[int, list] = {}
    for d, i, j in pairs:
        if i in assigned:
            continue
        g = group_of[j]
        taken = used.setdefault(g, [])
        if len(taken) >= capacity[g]:
            continue
        # inside a merged group each eigenvalue takes a distinct level, nearest first
        free = [k for k in range(len(levels)) if group_of[k] == g and k not in taken]
        k = min(free, key=lambda k: abs(eig[i] - levels[k].lam))
        taken.append(k)
        assigned[i] = k
    records = []
    for i, e in enumerate(eig):
        nearest = min((abs(e - p.lam) for p in levels), default=math.inf)
        lvl = levels[assigned[i]] if i in assigned else None
        records.append(MatchedEigenvalue(e, lvl, nearest))
    counts = tuple((p, sum(1 for e in eig if abs(e - p.lam) <= p.radius)) for p in levels)
    unmatched = tuple(r.lam for r in records if r.level is None)
    empty = tuple(p for p, c in counts if c == 0)
    return MatchReport(tuple(records), counts, unmatched, empty)


# ---------------------------------------------------------------- phases

@dataclass(frozen=True)
class PhaseMeasurement:
    ell: int
    side: str
    x_star: float
    amplitude: float
    theta: float
    delta: float

    @property
    def indeterminate(self) -> bool:
        return math.isnan(self.theta)


def _pi_dist(theta: float, target: float = math.pi / 4) -> float:
    d = (theta - target) % math.pi
    return min(d, math.pi - d)


def action_midpoint(model: PotentialModel, lam: float, well) -> float:
    a, b = well
    half = 0.5 * action_phi(model, well, lam)
    return brentq(lambda x: partial_action(model, lam, a, x, "well") - half, a, b, xtol=1e-13, rtol=1e-13)


def _airy_length(model, x0, hbar):
    return hbar ** (2.0 / 3.0) * abs(model.jet(x0).d1) ** (-1.0 / 3.0)


def extract_phase(x, psi, model: PotentialModel, lam: float, hbar: float, well, side: str,
                  ell: int = 0, x_star: float | None = None, min_units: float = AIRY_UNITS
                  ) -> PhaseMeasurement:
    """Amplitude and phase of psi ~ A p^{-1/4} sin(S/hbar + theta) at a grid node in the well.

    S is the action measured from the ``side`` turning point of the well.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    x = np.asarray(x, dtype=float)
    psi = np.asarray(psi, dtype=float)
    h = float(x[1] - x[0])
    a, b = well
    target = action_midpoint(model, lam, well) if x_star is None else float(x_star)
    i = int(np.clip(np.searchsorted(x, target), 2, x.size - 3))
    if abs(x[i - 1] - target) < abs(x[i] - target) and i > 2:
        i -= 1
    xs = float(x[i])
    for tp in (a, b):
        if abs(xs - tp) < min_units * _airy_length(model, tp, hbar):
            raise PhaseError(f"sample point {xs:.6g} within {min_units} Airy lengths of the turning point {tp:.6g}")
    norm = math.sqrt(float(np.dot(psi, psi)) * h)
    if norm == 0:
        raise PhaseError("zero vector")
    val = psi[i] / norm
    der = (psi[i - 2] - 8 * psi[i - 1] + 8 * psi[i + 1] - psi[i + 2]) / (12 * h) / norm
    j = model.jet(xs)
    p = lam - j.v
    dp = -j.d1
    corrected = der + dp * val / (4 * p)
    s = partial_action(model, lam, a, xs, "well") if side == "left" else partial_action(model, lam, b, xs, "well")
    sin_part = val * p ** 0.25
    cos_part = hbar * corrected * p ** -0.25
    if side == "right":
        cos_part = -cos_part
    amp = math.hypot(sin_part, cos_part)
    if abs(val) < QUIET and abs(hbar * der) < QUIET:
        return PhaseMeasurement(ell, side, xs, amp, math.nan, math.nan)
    theta = (math.atan2(sin_part, cos_part) - s / hbar) % math.pi
    return PhaseMeasurement(ell, side, xs, amp, theta, _pi_dist(theta))


def phase_report(x, psi, model: PotentialModel, lam: float, hbar: float, domain, dec=None):
    """Measurements for every well and both sides, ordered (well, left/right)."""
    dec = dec or decomposition(model, lam, domain)
    out = []
    for ell, well in enumerate(dec.wells):
        xm = action_midpoint(model, lam, well)
        for side in ("left", "right"):
            out.append(extract_phase(x, psi, model, lam, hbar, well, side, ell, xm))
    return out


@dataclass(frozen=True)
class FixingVerdict:
    passed: bool
    delta_left: float
    delta_right: float
    tolerance: float


def check_fixing(left: PhaseMeasurement, right: PhaseMeasurement, hbar: float, c_f: float = C_F
                 ) -> FixingVerdict:
    """Fixing across a barrier: ``left`` is the phase at the barrier's left edge, ``right`` at its right."""
    tol = c_f * hbar
    ok = left.indeterminate or right.indeterminate or min(left.delta, right.delta) <= tol
    return FixingVerdict(bool(ok), left.delta, right.delta, tol)


def edge_passes(report, hbar: float, c_f: float = C_F) -> int:
    """How many well-edge phases sit within c_f hbar of pi/4 (indeterminate ones count)."""
    return sum(1 for m in report if m.indeterminate or m.delta <= c_f * hbar)


def localization_ratio(far: PhaseMeasurement, near: PhaseMeasurement, hbar: float):
    """(A_far / A_near, exponent -hbar ln of that ratio)."""
    if far.amplitude <= 0 or near.amplitude <= 0:
        raise PhaseError("amplitudes must be positive")
    r = far.amplitude / near.amplitude
    return r, -hbar * math.log(r)


@dataclass(frozen=True)
class DecayCheck:
    passed: bool
    worst_margin: float
    samples: int


def barrier_decay_check(x, psi, model: PotentialModel, lam: float, hbar: float, barrier,
                        amplitude: float, c: float = 10.0, eps: float = 0.2, samples: int = 41
                        ) -> DecayCheck:
    """|psi| <= c A e^{eps Omega/hbar} (e^{-S_1/hbar} + e^{-S_2/hbar}) inside the barrier.

    ``worst_margin`` is the largest log of lhs/rhs over the samples (<= 0 passes).
    """
    b1, b2 = barrier
    if not b1 < b2:
        raise AnalysisError("empty barrier")
    x = np.asarray(x, dtype=float)
    psi = np.asarray(psi, dtype=float)
    h = float(x[1] - x[0])
    psi = psi / math.sqrt(float(np.dot(psi, psi)) * h)
    gap = hbar ** (2.0 / 3.0)
    inside = np.flatnonzero((x > b1 + gap) & (x < b2 - gap))
    if inside.size == 0:
        raise AnalysisError("no grid nodes far enough inside the barrier")
    pick = inside[np.unique(np.linspace(0, inside.size - 1, samples).round().astype(int))]
    omega = barrier_omega(model, barrier, lam)
    worst = -math.inf
    for k in pick:
        xk = float(x[k])
        s1 = partial_action(model, lam, b1, xk, "barrier")
        s2 = partial_action(model, lam, b2, xk, "barrier")
        m = max(-s1, -s2) / hbar
        log_env = m + math.log(math.exp(-s1 / hbar - m) + math.exp(-s2 / hbar - m))
        rhs = math.log(c * amplitude) + eps * omega / hbar + log_env
        lhs = math.log(abs(psi[k])) if psi[k] != 0 else -math.inf
        worst = max(worst, lhs - rhs)
    return DecayCheck(worst <= 0, worst, int(pick.size))


# ---------------------------------------------------------------- Weyl

@dataclass(frozen=True)
class WeylCheck:
    weyl: float
    lower: int
    upper: int
    count: int
    L: int

    @property
    def passed(self) -> bool:
        return self.lower <= self.count <= self.upper


def action_span(model: PotentialModel, window, domain) -> tuple[float, int]:
    """(sum over wells of Phi_ell(hi) - Phi_ell(lo), L)."""
    lo, hi = window
    L = _check_topology(model, window, domain)
    d_lo, d_hi = decomposition(model, lo, domain), decomposition(model, hi, domain)
    tot = sum(action_phi(model, w, hi) - action_phi(model, v, lo) for w, v in zip(d_hi.wells, d_lo.wells))
    return tot, L


def weyl_count(model: PotentialModel, hbar: float, window, domain, count: int) -> WeylCheck:
    span, L = action_span(model, window, domain)
    w = span / (math.pi * hbar)
    return WeylCheck(w, math.ceil(w - L - 1e-9), math.floor(w + L + 1e-9), int(count), L)


def phase_space_measure(model: PotentialModel, window, domain, samples: int = 400_000,
                        seed: int = 20240611) -> tuple[float, float]:
    """Monte Carlo area of {lo < p^2 + v < hi} and its standard error."""
    lo, hi = window
    pts = decomposition(model, hi, domain).points
    xa, xb = pts[0].x, pts[-1].x
    xs = np.linspace(xa, xb, 4001)
    pmax = math.sqrt(hi - float(model.value(xs).min()))
    rng = np.random.default_rng(seed)
    x = rng.uniform(xa, xb, samples)
    p = rng.uniform(-pmax, pmax, samples)
    e = p * p + model.value(x)
    frac = float(np.mean((e > lo) & (e < hi)))
    box = (xb - xa) * 2 * pmax
    return box * frac, box * math.sqrt(frac * (1 - frac) / samples)


# ---------------------------------------------------------------- two wells

@dataclass(frozen=True)
class SplitPair:
    lower: float
    upper: float
    lower_parity: int
    omega: float
    parity_error: float

    @property
    def mean(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def splitting(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class SplittingReport:
    hbar: float
    window: tuple
    pairs: tuple
    excluded: tuple = field(default=())

    def exponent(self, i: int = 0) -> float:
        p = self.pairs[i]
        return -self.hbar * math.log(p.splitting)


def _symmetric(model: PotentialModel, domain, tol: float = 1e-12):
    xs = np.linspace(0.0, max(abs(domain[0]), abs(domain[1])), 201)
    v1, v2 = model.value(xs), model.value(-xs)
    scale = max(1.0, float(np.abs(v1).max()))
    if np.max(np.abs(v1 - v2)) > tol * scale:
        raise AnalysisError("potential is not symmetric about 0")


def _parity_blocks(op: TridiagonalOperator):
    """(diag, off2) of the even and odd blocks of an operator on a symmetric grid."""
    d, e = op.diag, op.off
    n = d.size
    if n % 2:
        c = n // 2
        even_off2 = np.full(c, e * e)
        even_off2[-1] = 2 * e * e
        return (d[:c + 1].copy(), even_off2), (d[:c].copy(), np.full(c - 1, e * e))
    m = n // 2
    de, do = d[:m].copy(), d[:m].copy()
    de[-1] += e
    do[-1] -= e
    return (de, np.full(m - 1, e * e)), (do, np.full(m - 1, e * e))


def _parity_error(op: TridiagonalOperator, lo: float, hi: float) -> float:
    """Largest deviation from exact parity of the pair's invariant subspace.

    Single vectors of a close pair are mixed by rounding at the level
    eps*|T|/splitting, so the pair is taken as one 2-dim subspace and
    rotated onto reflection eigenvectors.
    """
    mid = 0.5 * (lo + hi)
    pair = eigenvector(op, mid, steps=6, isolation=(hi - lo) / max(1.0, abs(mid)))
    if pair.partner is None:
        raise AnalysisError("pair subspace not resolved")
    b = np.stack([pair.psi, pair.partner], axis=1)
    m = b.T @ b[::-1]
    _, vecs = np.linalg.eigh(0.5 * (m + m.T))
    err = 0.0
    for k, parity in ((0, -1), (1, 1)):
        psi = b @ vecs[:, k]
        err = max(err, float(np.linalg.norm(psi - parity * psi[::-1]) / np.linalg.norm(psi)))
    return err


def double_well_analysis(model: PotentialModel, hbar: float, window, domain, backend=None,
                         check_parity: bool = True) -> SplittingReport:
    """Tunnel-split pairs of a symmetric double well from the direct eigensolver.

    Eigenvalues come from full-precision bisection on the even and odd
    blocks separately, which labels parities without eigenvectors.
    """
    _symmetric(model, domain)
    r = max(abs(domain[0]), abs(domain[1]))
    grid = Grid.auto((-r, r), hbar)
    op = TridiagonalOperator.build(model, grid, hbar)
    lo, hi = map(float, window)
    full = eigenvalues_in_window(op, (lo, hi), tol=0.0, backend=backend)
    (de, oe), (do, oo) = _parity_blocks(op)
    ev = bisect_eigenvalues(de, oe, lo, hi, 0.0, backend)[0]
    od = bisect_eigenvalues(do, oo, lo, hi, 0.0, backend)[0]
    if ev.size + od.size != full.size:
        raise AnalysisError("parity blocks disagree with the full operator")
    tagged = sorted([(float(v), 1) for v in ev] + [(float(v), -1) for v in od])
    pairs, excluded = [], []
    i = 0
    while i < len(tagged):
        if i + 1 < len(tagged) and tagged[i][1] != tagged[i + 1][1]:
            (l1, p1), (l2, _) = tagged[i], tagged[i + 1]
            gap_next = tagged[i + 2][0] - l2 if i + 2 < len(tagged) else math.inf
            gap_prev = l1 - tagged[i - 1][0] if i > 0 else math.inf
            if l2 - l1 < 0.1 * min(gap_next, gap_prev):
                mean = 0.5 * (l1 + l2)
                dec = decomposition(model, mean, (-r, r))
                if dec.L != 2:
                    raise AnalysisError(f"expected two wells at lambda={mean}")
                omega = barrier_omega(model, dec.barriers[0], mean)
                err = 0.0
                if check_parity:
                    err = _parity_error(op, l1, l2)
                pairs.append(SplitPair(l1, l2, p1, omega, err))
                i += 2
                continue
        excluded.append(tagged[i][0])
        i += 1
    return SplittingReport(float(hbar), (lo, hi), tuple(pairs), tuple(excluded))


@dataclass(frozen=True)
class SplittingFit:
    kappa: float
    raw_slope: float
    mean_omega: float


def splitting_fit(reports, index: int = 0) -> SplittingFit:
    """Fit ln s against Omega(mean)/hbar for pair ``index`` of each report.

    kappa = -1 is the e^{-Omega/hbar} rate; the raw slope against 1/hbar
    is returned too but mixes in the drift of the pair energy with hbar.
    """
    rows = [(r.hbar, r.pairs[index]) for r in reports if len(r.pairs) > index]
    if len(rows) < 2:
        raise AnalysisError("need at least two hbar values with the requested pair")
    y = np.array([math.log(p.splitting) for _, p in rows])
    u = np.array([p.omega / h for h, p in rows])
    inv = np.array([1.0 / h for h, _ in rows])
    kappa = float(np.polyfit(u, y, 1)[0])
    raw = float(np.polyfit(inv, y, 1)[0])
    return SplittingFit(kappa, raw, float(np.mean([p.omega for _, p in rows])))


@dataclass(frozen=True)
class GammaReport:
    gamma1: float
    gamma2: float
    omega0: float
    omega1: float
    omega2: float
    lhs: float

    @property
    def residual(self) -> float:
        return self.lhs - self.omega0


def _ratio(a, b) -> float:
    return a[0] / b[0] * math.exp(a[1] - b[1])


def _mul(a, b):
    return a[0] * b[0], a[1] + b[1]


def gamma_ratios(model: PotentialModel, lam: float, hbar: float, domain, margin: float = 0.1) -> GammaReport:
    """gamma_1, gamma_2 and the coupling terms of the two-well eigenvalue condition.

    With W = {w_1, w_2}: omega_1 = {u_1, w_2}/W, omega_2 = {w_1, u_2}/W and
    omega_0 = -{u_1, u_2}/W + {u_1, w_2}{w_1, u_2}/W^2, so that eigenvalues
    satisfy (gamma_1 + omega_1)(gamma_2 + omega_2) = omega_0.
    """
    dec = decomposition(model, lam, domain)
    if dec.L != 2:
        raise AnalysisError(f"need two wells at lambda={lam}, found {dec.L}")
    pts = dec.points
    frames = [langer.frame_at(model, lam, pts, k, dec.domain, margin) for k in range(4)]
    (a1, b1), (b2, a2) = dec.wells
    m1, m2, mb = 0.5 * (a1 + b1), 0.5 * (b2 + a2), 0.5 * (b1 + b2)

    def canon(kind, k, xs):
        return langer.integrate_canonical(kind, frames[k], hbar, (min(xs), max(xs)))

    u_left = canon("u", 0, [m1])
    u1, w1 = canon("u", 1, [m1, mb]), canon("w", 1, [m1, mb])
    u2, w2 = canon("u", 2, [m2, mb]), canon("w", 2, [m2, mb])
    u_right = canon("u", 3, [m2])
    wr = langer.wronskian
    g1 = -_ratio(wr(u_left, u1, m1), wr(u_left, w1, m1))
    g2 = -_ratio(wr(u_right, u2, m2), wr(u_right, w2, m2))
    big = wr(w1, w2, mb)
    c12 = wr(u1, w2, mb)
    c21 = wr(w1, u2, mb)
    om1 = _ratio(c12, big)
    om2 = _ratio(c21, big)
    om0 = -_ratio(wr(u1, u2, mb), big) + _ratio(_mul(c12, c21), _mul(big, big))
    return GammaReport(g1, g2, om0, om1, om2, (g1 + om1) * (g2 + om2))


# ---------------------------------------------------------------- localization study

@dataclass(frozen=True)
class LocalizedLevel:
    hbar: float
    lam: float
    omega: float
    ratio: float
    exponent: float
    detuning: float


def localized_level(model: PotentialModel, hbar: float, window, domain, ell: int = 0, other: int = 1,
                    min_detuning: float = 0.3) -> LocalizedLevel | None:
    """The eigenstate most clearly quantized in well ``ell`` alone, or None.

    Detuning is |cos(Phi_other(lam)/hbar)|: near zero the level is resonant
    with the other well and carries weight in both.
    """
    grid = Grid.auto(domain, hbar)
    op = TridiagonalOperator.build(model, grid, hbar)
    best = None
    for lam in eigenvalues_in_window(op, window):
        lam = float(lam)
        dec = decomposition(model, lam, domain)
        if dec.L <= max(ell, other) or dec.L != 2:
            continue
        try:
            rep = phase_report(grid.x, eigenvector(op, lam).psi, model, lam, hbar, domain, dec)
        except PhaseError:
            continue
        near, far = rep[2 * ell], rep[2 * other]
        if far.amplitude >= near.amplitude:
            continue
        det = abs(math.cos(action_phi(model, dec.wells[other], lam) / hbar))
        if det < min_detuning or (best is not None and det <= best.detuning):
            continue
        ratio, expo = localization_ratio(far, near, hbar)
        omega = barrier_omega(model, dec.barriers[min(ell, other)], lam)
        best = LocalizedLevel(float(hbar), lam, omega, ratio, expo, det)
    return best


def localization_fit(levels) -> float:
    """kappa in ln(A_far/A_near) = -kappa Omega/hbar, least squares through the origin."""
    u = np.array([lv.omega / lv.hbar for lv in levels])
    y = np.array([math.log(lv.ratio) for lv in levels])
    if u.size == 0:
        raise AnalysisError("no localized levels to fit")
    return float(-np.dot(u, y) / np.dot(u, u))
