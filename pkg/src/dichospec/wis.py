"""Weak integral separation certificates, growth bounds and containment checks.

All certificates are grid certificates: they are sound on the sampled
``(s, t)`` pairs and nothing is claimed off the grid.  On a finite grid any
slope ``a`` can be matched by pushing the intercept ``d`` far enough down, so a
certificate only counts as feasible when ``d >= -d_bound``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import PreconditionError
from .quad import build_cumulative
from .systems import DiagonalSystem, constant_coefficient

D_BOUND = 10.0
B_MAX = 10.0
SWEEP_POINTS = 32


@dataclass(frozen=True)
class PairGrid:
    s: np.ndarray
    t: np.ndarray
    description: str = ""

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float).ravel()
        t = np.asarray(self.t, dtype=float).ravel()
        if s.shape != t.shape:
            raise ValueError("s and t must have the same length")
        if np.any(s < 0) or np.any(t < s):
            raise PreconditionError("pairs must satisfy 0 <= s <= t")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "t", t)

    def __len__(self):
        return self.s.size

    @property
    def t_max(self):
        return float(self.t.max())


def pair_grid(T, n_s=32, n_d=32, max_pairs=4096, include_zero=False) -> PairGrid:
    """``s`` log-spaced on ``[1, T]``, ``t - s`` log-spaced on ``[1, T - s]``.

    ``include_zero`` adds a row with ``s = 0``.  At most ``max_pairs`` pairs are
    kept (evenly thinned, deterministic).
    """
    if T <= 1:
        raise PreconditionError("pair grid needs T > 1")
    starts = list(np.geomspace(1.0, T, n_s))
    if include_zero:
        starts = [0.0] + starts
    ss, tt = [], []
    for s in starts:
        span = T - s
        if span < 1:
            continue
        d = np.geomspace(1.0, span, n_d)
        ss.append(np.full(d.size, s))
        tt.append(np.minimum(s + d, T))
    s = np.concatenate(ss)
    t = np.concatenate(tt)
    if s.size > max_pairs:
        keep = np.unique(np.linspace(0, s.size - 1, max_pairs).round().astype(int))
        s, t = s[keep], t[keep]
    desc = f"s log[1,{T:g}] x{n_s}{' +s=0' if include_zero else ''}, t-s log[1,T-s] x{n_d}"
    return PairGrid(s, t, desc)


def _increments(F, grid):
    return F.value(grid.t) - F.value(grid.s)


# --- weak integral separation -------------------------------------------------------

@dataclass(frozen=True)
class SeparationCertificate:
    """``int_s^t (high - low) - a (t-s) + b s >= d`` on every grid pair.

    ``margin = d + d_bound`` is the slack against the admissible intercept;
    ``feasible`` requires ``a > 0`` and ``margin >= 0``.
    """

    pair: tuple
    a: float
    b: float
    d: float
    margin: float
    feasible: bool
    d_bound: float
    grid: PairGrid = field(repr=False, compare=False)

    def slack(self, gap, s, t):
        return gap - self.a * (t - s) + self.b * s - self.d


def _sweep(G, dt, s, A, B):
    """``D[i, j] = min_p (G_p - A_i dt_p + B_j s_p)``."""
    D = np.empty((A.size, B.size))
    sb = s[:, None] * B[None, :]
    for i, a in enumerate(A):
        D[i] = np.min((G - a * dt)[:, None] + sb, axis=0)
    return D


def _best(A, B, D, d_bound):
    feasible = (A[:, None] > 0) & (D >= -d_bound)
    if not feasible.any():
        return None
    # max a, then min b, then max d; lexicographic over the sweep order
    cand = [(-A[i], B[j], -D[i, j], i, j) for i, j in zip(*np.nonzero(feasible))]
    _, _, _, i, j = min(cand)
    return i, j


def check_weak_separation(F_low, F_high, grid: PairGrid, b_max=B_MAX, d_bound=D_BOUND,
                          n=SWEEP_POINTS, pair=("low", "high")) -> SeparationCertificate:
    """Best ``(a, b, d)`` with ``int_s^t (g_high - g_low) >= a (t-s) - b s + d`` on ``grid``.

    Two-level sweep: ``n x n`` over ``[0, a_max] x [0, b_max]``, then ``n x n``
    inside the winning cell.  ``a_max`` is the largest average gap
    ``G(s, t)/(t - s)`` on the grid, lowered to
    ``min (G + b_max s + d_bound)/(t - s)`` since no larger slope can meet the
    intercept floor for any admissible ``b``.
    """
    if len(grid) < 2:
        raise PreconditionError("degenerate grid: need at least 2 pairs")
    if b_max < 0:
        raise PreconditionError("b_max must be >= 0")
    G = _increments(F_high, grid) - _increments(F_low, grid)
    s, t = grid.s, grid.t
    dt = t - s
    pos = dt > 0
    a_max = 0.0
    if pos.any():
        Gp, dp, sp = G[pos], dt[pos], s[pos]
        a_max = min(float(np.max(Gp / dp)), float(np.min((Gp + b_max * sp + d_bound) / dp)))

    def cert(a, b, d):
        margin = d + d_bound
        return SeparationCertificate(pair, float(a), float(b), float(d), float(margin),
                                     bool(a > 0 and margin >= 0), float(d_bound), grid)

    if a_max <= 0:
        return cert(0.0, 0.0, float(np.min(G)))

    A = np.linspace(0.0, a_max, n)
    B = np.linspace(0.0, b_max, n)
    D = _sweep(G, dt, s, A, B)
    hit = _best(A, B, D, d_bound)
    if hit is None:
        a_lo, a_hi, b_lo, b_hi = 0.0, A[1], 0.0, b_max
    else:
        i, j = hit
        a_lo, a_hi = A[i], A[min(i + 1, n - 1)]
        b_lo, b_hi = B[max(j - 1, 0)], B[j]
    A2 = np.linspace(a_lo, a_hi, n)
    B2 = np.linspace(b_lo, b_hi, n)
    D2 = _sweep(G, dt, s, A2, B2)
    cands = []
    for AA, BB, DD in ((A, B, D), (A2, B2, D2)):
        h = _best(AA, BB, DD, d_bound)
        if h is not None:
            cands.append((-AA[h[0]], BB[h[1]], -DD[h]))
    if not cands:
        # report the best slope for the smallest b, even though it is infeasible
        return cert(0.0, 0.0, float(np.min(G)))
    na, b, nd = min(cands)
    return cert(-na, b, -nd)


def validate_certificate(cert: SeparationCertificate, F_low, F_high) -> bool:
    """Re-check ``cert`` pair by pair with scalar evaluations."""
    for s, t in zip(cert.grid.s, cert.grid.t):
        gap = (F_high.value(t) - F_high.value(s)) - (F_low.value(t) - F_low.value(s))
        if gap - cert.a * (t - s) + cert.b * s < cert.d:
            return False
    return True


def _component_cumulative(system, j, t_max, mode="auto", error_target=1e-8):
    return build_cumulative(system.coefficients[j - 1], 0.0, error_target, t_max, mode=mode)


def constant_cumulative(lam, t_max):
    return build_cumulative(constant_coefficient(lam), 0.0, 1e-8, t_max, mode="exact")


def wis_membership(system: DiagonalSystem, j, lam, grid: PairGrid, b_max=B_MAX,
                   d_bound=D_BOUND, mode="auto") -> bool:
    """Grid estimate of ``lam in Lambda_j``: true when neither planar system
    ``diag(lam, a_j)`` nor ``diag(a_j, lam)`` separates on ``grid``."""
    Fj = _component_cumulative(system, j, grid.t_max, mode)
    Fl = constant_cumulative(lam, grid.t_max)
    up = check_weak_separation(Fl, Fj, grid, b_max, d_bound, pair=(f"{lam!r}", f"a{j}"))
    if up.feasible:
        return False
    down = check_weak_separation(Fj, Fl, grid, b_max, d_bound, pair=(f"a{j}", f"{lam!r}"))
    return not down.feasible


# --- growth bounds -------------------------------------------------------------

@dataclass(frozen=True)
class GrowthBound:
    """``int_s^t a <= a_tilde |t - s| + b_tilde * s0 + d_tilde`` with ``s0`` the initial time."""

    a_tilde: float
    b_tilde: float
    d_tilde: float
    mode: str
    satisfied_on_grid: bool


def _minimal_b(r, weight, allowance, d_bound):
    """Smallest ``b >= 0`` with ``r - allowance - b*w <= d_bound`` on every sample."""
    lhs = r - allowance
    zero = weight == 0
    ok = bool(np.all(lhs[zero] <= d_bound)) if zero.any() else True
    pos = ~zero
    b = max(0.0, float(np.max((lhs[pos] - d_bound) / weight[pos]))) if pos.any() else 0.0
    d = float(np.max(lhs - b * weight))
    return b, d, ok and d <= d_bound


def estimate_growth_bounds(F, grid: PairGrid, a_candidates: Sequence[float],
                           f_abs=None, d_bound=D_BOUND):
    """Minimal ``b_tilde`` per candidate ``a_tilde`` with ``d_tilde <= d_bound``.

    Signed mode checks both orientations of every pair: forward transitions
    ``s -> t`` weighted by ``s`` and backward ``t -> s`` weighted by ``t``.
    ``f_abs`` (a cumulative integral of ``|a|``) adds absolute-mode entries.
    """
    s, t = grid.s, grid.t
    dt = t - s
    inc = _increments(F, grid)
    r = np.concatenate([inc, -inc])
    w = np.concatenate([s, t])
    span = np.concatenate([dt, dt])
    out = []
    for a in a_candidates:
        b, d, ok = _minimal_b(r, w, a * span, d_bound)
        out.append(GrowthBound(float(a), b, d, "signed", ok))
    if f_abs is not None:
        inc_abs = _increments(f_abs, grid)
        r = np.concatenate([inc_abs, inc_abs])
        for a in a_candidates:
            b, d, ok = _minimal_b(r, w, a * span, d_bound)
            out.append(GrowthBound(float(a), b, d, "absolute", ok))
    return out


# --- containment -----------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    component: int
    inner: str
    outer: str
    side: str
    inner_value: float
    outer_value: float

    @property
    def excess(self):
        return abs(self.inner_value - self.outer_value)


def _contain(inner, outer, tol, j):
    out = []
    if inner.lower < outer.lower - tol:
        out.append(Violation(j, inner.kind, outer.kind, "lower", inner.lower, outer.lower))
    if inner.upper > outer.upper + tol:
        out.append(Violation(j, inner.kind, outer.kind, "upper", inner.upper, outer.upper))
    return out


def check_containment(report, tolerance=0.05):
    """Per component, ``Lyapunov <= NED <= ED`` up to ``tolerance``.

    A divergent ED stands for the whole real line and is never violated.
    """
    violations = []
    for lyap, ned, ed in zip(report.lyapunov, report.ned, report.ed):
        j = lyap.component
        if not ned.divergent:
            violations += _contain(lyap, ned, tolerance, j)
        if not ed.divergent and not ned.divergent:
            violations += _contain(ned, ed, tolerance, j)
    return violations
