"""Steklov averages and the two gap functionals built from them.

Everything here is regime-agnostic: whether ``H >> t`` or ``t >> H`` is
required is checked by the callers in :mod:`dichospec.spectra`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._parallel import ordered_map
from .errors import PreconditionError
from .quad import CumulativeIntegral

OSCILLATION_STEP_LIMIT = math.pi / 4
GRID_CHUNK = 1 << 20


@dataclass(frozen=True)
class SteklovParams:
    H: float
    T1: float
    T2: float
    grid_step: float

    def __post_init__(self):
        if not self.H > 0:
            raise PreconditionError("H must be positive")
        if not 0 < self.T1 < self.T2:
            raise PreconditionError(f"need 0 < T1 < T2, got T1={self.T1}, T2={self.T2}")
        if not 0 < self.grid_step <= self.T2 - self.T1:
            raise PreconditionError("grid_step must lie in (0, T2 - T1]")
        if self.grid_step > OSCILLATION_STEP_LIMIT:
            raise PreconditionError(f"grid_step must not exceed pi/4 ({OSCILLATION_STEP_LIMIT:.6f})")


def default_grid_step(T1, T2):
    return min(math.pi / 8, (T2 - T1) / 1e4)


def steklov_average(F: CumulativeIntegral, t, H):
    """``(F(t+H) - F(t)) / H``, vectorized over ``t``."""
    if not H > 0:
        raise PreconditionError("H must be positive")
    t = np.asarray(t, dtype=float) if np.ndim(t) else float(t)
    return (F.value(t + H) - F.value(t)) / H


def steklov_gap(F1, F2, t, H):
    return steklov_average(F2, t, H) - steklov_average(F1, t, H)


def scaled_gap(F1, F2, t, H):
    """``(H/t) |f2^H(t) - f1^H(t)|``, the statistic that exposes a nonuniform term when ``t >> H``."""
    if np.any(np.asarray(t) <= 0):
        raise PreconditionError("scaled_gap needs t > 0")
    return (H / t) * np.abs(steklov_gap(F1, F2, t, H))


# --- sampling grids -----------------------------------------------------------

def grid_size(T1, T2, step):
    """Number of points of the closed grid ``{T1, T1+step, ...} U {T2}``."""
    k = int(math.floor((T2 - T1) / step))
    last = T1 + k * step
    return k + 1 + (last < T2)


def grid_points(T1, T2, step, start=0, stop=None):
    """Points ``start..stop-1`` of the closed grid; ``T1 + k*step`` then ``T2``.

    Points are always formed as ``T1 + k*step`` so that halving ``step``
    reproduces every earlier point bit for bit.
    """
    n = grid_size(T1, T2, step)
    stop = n if stop is None else min(stop, n)
    k = np.arange(start, stop, dtype=np.float64)
    t = T1 + k * step
    t = np.minimum(t, T2)
    if stop == n:
        t[-1:] = T2
    return t


@dataclass(frozen=True)
class GridExtrema:
    lower: float
    upper: float
    argmin: float
    argmax: float
    n_points: int


def _golden(fn, a, b, sign, iters=60):
    """Golden-section search maximizing ``sign * fn`` on ``[a, b]``."""
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = sign * fn(c), sign * fn(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = sign * fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = sign * fn(d)
    x = c if fc > fd else d
    return x, sign * max(fc, fd)


def grid_extrema(fn, T1, T2, step, workers=None, refine=False, chunk=GRID_CHUNK):
    """min/max of the vectorized ``fn`` over the closed grid on ``[T1, T2]``.

    The grid is processed in fixed chunks, so the result is independent of
    ``workers``.  ``refine`` runs a golden-section search on the two grid cells
    around each extremum (clipped to ``[T1, T2]``).
    """
    n = grid_size(T1, T2, step)
    bounds = [(i, min(n, i + chunk)) for i in range(0, n, chunk)]

    def one(b):
        t = grid_points(T1, T2, step, *b)
        v = np.asarray(fn(t), dtype=float)
        i, j = int(np.argmin(v)), int(np.argmax(v))
        return v[i], t[i], v[j], t[j]

    parts = ordered_map(one, bounds, workers)
    lo, tlo, _, _ = min(parts, key=lambda p: p[0])
    _, _, hi, thi = max(parts, key=lambda p: p[2])
    lo, hi, tlo, thi = float(lo), float(hi), float(tlo), float(thi)
    if refine:
        scalar = lambda x: float(np.asarray(fn(np.array([x])))[0])
        x, v = _golden(scalar, max(T1, thi - step), min(T2, thi + step), 1.0)
        if v > hi:
            hi, thi = v, x
        x, v = _golden(scalar, max(T1, tlo - step), min(T2, tlo + step), -1.0)
        if v < lo:
            lo, tlo = v, x
    return GridExtrema(lo, hi, tlo, thi, n)


def sample_series(fn, T1, T2, step, max_points=10_000):
    """Evenly strided ``(t, fn(t))`` samples of the grid for plotting."""
    n = grid_size(T1, T2, step)
    stride = max(1, -(-n // max_points))
    idx = np.arange(0, n, stride)
    if idx[-1] != n - 1:
        idx = np.append(idx, n - 1)
    t = np.minimum(T1 + idx * step, T2)
    t[-1] = grid_points(T1, T2, step, n - 1)[0]
    return t, np.asarray(fn(t), dtype=float)
