"""Cumulative integrals ``F(t) = int_ref^t a(tau) dtau`` over long, oscillatory ranges.

Numeric mode uses 7-point Gauss-Legendre on uniform panels of width at most
0.5, with prefix values cached at checkpoints every ``checkpoint_spacing``
time units.  A query costs one checkpoint lookup plus the panels between that
checkpoint and ``t``.  Exact mode just differences a closed-form
antiderivative.

Start-gap rule: when the reference time is 0 but the coefficient is not
evaluable there (``ln t`` style coefficients), numeric mode starts at
``START_GAP`` and assigns ``[0, START_GAP]`` the integral 0; exact mode uses the
limit of the antiderivative from the right.
"""
from __future__ import annotations

import math

import numpy as np

from ._parallel import ordered_map
from .errors import EvaluationError, OutOfRangeError, PreconditionError, ResourceLimitError
from .expr import CoefficientFunction

GL_ORDER = 7
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(GL_ORDER)
# Gauss-Legendre remainder constant (n!)^4 / ((2n+1) ((2n)!)^3) for n = 7
_GL_REMAINDER = math.factorial(GL_ORDER) ** 4 / (
    (2 * GL_ORDER + 1) * math.factorial(2 * GL_ORDER) ** 3)

MAX_PANEL_WIDTH = 0.5
CHECKPOINT_SPACING = 1e3
START_GAP = 1e-6
MAX_PANELS = 10 ** 9
MAX_ERROR_TARGET = 1e-3
_GRADE_RATIO = 1.1
_GRADE_FLOOR = 1e-12
_PANELS_PER_CHUNK = 1 << 19


def choose_panel_width(error_target, span, t_max, cap=MAX_PANEL_WIDTH):
    """A priori panel width for integrands with ``|f^(14)(t)| <= 1 + t``.

    Summing the Gauss-Legendre remainder over ``span / w`` panels gives
    ``C w^14 span (1 + t_max)``; the width is the largest one keeping that
    below ``error_target``, capped at ``cap`` (itself at most 0.5).
    """
    bound = error_target / (_GL_REMAINDER * max(span, 1.0) * (1.0 + t_max))
    return min(cap, MAX_PANEL_WIDTH, bound ** (1.0 / (2 * GL_ORDER)))


def _gl(f, lo, hi):
    half = 0.5 * (hi - lo)
    x = (0.5 * (hi + lo))[:, None] + half[:, None] * _NODES
    # row-wise reduction (not BLAS) so a panel's value never depends on the batch size
    return half * np.sum(f(x) * _WEIGHTS, axis=1)


def _bisect_roots(f, a, b, fa):
    for _ in range(80):
        m = 0.5 * (a + b)
        if np.all((m == a) | (m == b)):
            break
        fm = f(m)
        same = np.sign(fm) == np.sign(fa)
        a = np.where(same, m, a)
        fa = np.where(same, fm, fa)
        b = np.where(same, b, m)
    return 0.5 * (a + b)


def _gl_abs(f, lo, hi):
    """Panel integrals of ``|f|``; panels with a sign change are split at the roots."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = np.concatenate([lo[:, None], mid[:, None] + half[:, None] * _NODES, hi[:, None]], axis=1)
    y = f(x)
    out = half * np.sum(np.abs(y[:, 1:-1]) * _WEIGHTS, axis=1)
    crossing = y[:, :-1] * y[:, 1:] < 0
    touching = np.zeros_like(crossing)
    touching[:, 1:] = y[:, 1:-1] == 0
    flagged = crossing.any(axis=1) | touching.any(axis=1)
    if not flagged.any():
        return out
    pi, si = np.nonzero(crossing)
    roots = _bisect_roots(f, x[pi, si], x[pi, si + 1], y[pi, si])
    zi, zj = np.nonzero(touching)
    fp = np.nonzero(flagged)[0]
    pid = np.concatenate([fp, pi, zi, fp])
    pts = np.concatenate([lo[fp], roots, x[zi, zj], hi[fp]])
    order = np.lexsort((pts, pid))
    pid, pts = pid[order], pts[order]
    same = pid[:-1] == pid[1:]
    a, b, owner = pts[:-1][same], pts[1:][same], pid[:-1][same]
    vals = np.abs(_gl(f, a, b))
    out[fp] = 0.0
    np.add.at(out, owner, vals)
    return out


def _evaluable(f, t):
    try:
        f(t)
        return True
    except EvaluationError:
        return False


def _integration_start(f, ref):
    """Where numeric integration actually begins (``> ref`` only under the start-gap rule)."""
    if ref < f.domain_start:
        if ref != 0:
            raise PreconditionError(
                f"reference time {ref} precedes the coefficient domain start {f.domain_start}")
        return max(f.domain_start, START_GAP)
    if ref == 0 and not _evaluable(f, 0.0):
        return START_GAP
    return ref


def _graded_boundaries(start, width):
    """Geometric panel boundaries from ``start`` until panels reach ``width``.

    From ``start = 0`` the grading begins at ``_GRADE_FLOOR * width`` so that
    integrands with a weak singularity at the origin (``sqrt(t)``) keep their accuracy.
    """
    end = 10.0 * width
    if not (0 <= start < end):
        return np.array([start])
    first = start if start > 0 else _GRADE_FLOOR * width
    n = int(math.ceil(math.log(end / first) / math.log(_GRADE_RATIO)))
    b = first * _GRADE_RATIO ** np.arange(n)
    b = np.append(b[b < end], end)
    return b if start > 0 else np.concatenate([[0.0], b])


class CumulativeIntegral:
    """Queryable ``F(t) = int_{ref}^{t} a``, immutable once built.

    Use :func:`build_cumulative` rather than the constructor.
    """

    def __init__(self, source, ref_time, t_max, error_target, mode, absolute=False,
                 panel_width=None, checkpoint_spacing=CHECKPOINT_SPACING,
                 max_panels=MAX_PANELS, workers=None):
        self.source = source
        self.ref_time = float(ref_time)
        self.t_max = float(t_max)
        self.error_target = float(error_target)
        self.mode = mode
        self.absolute = bool(absolute)
        self.start = _integration_start(source, self.ref_time)
        self.gap_bias_bound = 0.0
        if self.start > self.ref_time:
            probe = np.geomspace(self.start, max(min(self.t_max, 1.0), 2 * self.start), 64)
            self.gap_bias_bound = float(np.max(np.abs(source(probe)))) * (self.start - self.ref_time)
        if mode == "exact":
            self._build_exact()
        else:
            self._build_numeric(panel_width, checkpoint_spacing, max_panels, workers)

    # -- construction ---------------------------------------------------------

    def _build_exact(self):
        f = self.source
        if self.start > self.ref_time:
            self._offset = f.primitive(float(np.nextafter(self.ref_time, np.inf)))
        else:
            self._offset = f.primitive(self.ref_time)
        self.panel_width = None
        self.panel_count = 0
        self.checkpoint_times = np.array([self.ref_time])

    def _rule(self, lo, hi):
        if self.absolute:
            return _gl_abs(self.source, lo, hi)
        return _gl(self.source, lo, hi)

    def _build_numeric(self, panel_width, checkpoint_spacing, max_panels, workers):
        span = self.t_max - self.start
        w = choose_panel_width(self.error_target, span, self.t_max,
                               cap=panel_width or MAX_PANEL_WIDTH)
        self.panel_width = w
        graded = _graded_boundaries(self.start, w)
        self._u0 = float(graded[-1])
        n_uniform = max(1, int(math.ceil((self.t_max - self._u0) / w)))
        total = n_uniform + len(graded) - 1
        if total > max_panels:
            raise ResourceLimitError(
                f"numeric integration up to t={self.t_max:g} needs {total} panels "
                f"(cap {max_panels}); supply a closed-form antiderivative to use exact mode")
        self.panel_count = total
        self._m = max(1, int(round(checkpoint_spacing / w)))
        self._n_uniform = n_uniform

        # graded head: every boundary is a checkpoint
        self._gb = graded
        head = self._rule(graded[:-1], graded[1:]) if len(graded) > 1 else np.zeros(0)
        self._gv = np.concatenate([[0.0], np.cumsum(head)])

        n_seg = -(-n_uniform // self._m)
        seg_per_chunk = max(1, _PANELS_PER_CHUNK // self._m)
        chunks = [(s, min(n_seg, s + seg_per_chunk)) for s in range(0, n_seg, seg_per_chunk)]
        sums = ordered_map(lambda c: self._segment_sums(*c), chunks, workers)
        seg_sums = np.concatenate(sums)
        self._cp = self._gv[-1] + np.concatenate([[0.0], np.cumsum(seg_sums)])
        self.checkpoint_times = np.concatenate(
            [graded, self._u0 + w * self._m * np.arange(1, n_seg + 1)])

    def _segment_panels(self, s0, s1):
        k = np.arange(s0 * self._m, min(s1 * self._m, self._n_uniform))
        lo = self._u0 + k * self.panel_width
        hi = self._u0 + (k + 1) * self.panel_width
        return k, lo, hi

    def _segment_sums(self, s0, s1):
        k, lo, hi = self._segment_panels(s0, s1)
        vals = self._rule(lo, hi)
        seg = k // self._m - s0
        return np.bincount(seg, weights=vals, minlength=s1 - s0)

    # -- queries --------------------------------------------------------------

    @property
    def covered(self):
        return (self.ref_time, self.t_max)

    def _check_range(self, t):
        lo, hi = np.min(t), np.max(t)
        if not (lo >= self.ref_time and hi <= self.t_max):
            raise OutOfRangeError(
                f"query range [{lo:g}, {hi:g}] outside covered range "
                f"[{self.ref_time:g}, {self.t_max:g}]")

    def value(self, t):
        """``F(t)``; accepts a float or an array."""
        scalar = np.ndim(t) == 0
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        if tt.size:
            self._check_range(tt)
        if self.mode == "exact":
            if tt.size and tt.min() > self.ref_time:
                out = self.source.primitive(tt) - self._offset
            else:
                out = np.zeros_like(tt)
                inside = tt > self.ref_time
                if inside.any():
                    out[inside] = self.source.primitive(tt[inside]) - self._offset
        else:
            out = self._value_numeric(tt.ravel()).reshape(tt.shape)
        return float(out[0]) if scalar else out

    __call__ = value

    def _value_numeric(self, t):
        out = np.zeros_like(t)
        head = (t >= self.start) & (t < self._u0)
        if head.any():
            th = t[head]
            i = np.searchsorted(self._gb, th, side="right") - 1
            out[head] = self._gv[i] + self._rule(self._gb[i], th)
        body = t >= self._u0
        if body.any():
            out[body] = self._value_uniform(t[body])
        return out

    def _value_uniform(self, t):
        w, m = self.panel_width, self._m
        k = np.clip(np.floor((t - self._u0) / w).astype(np.int64), 0, self._n_uniform - 1)
        seg = k // m
        j = k - seg * m
        full = np.zeros_like(t)
        for s in np.unique(seg):
            sel = seg == s
            jj = j[sel]
            if jj.max() == 0:
                continue
            kk = s * m + np.arange(jj.max())
            vals = self._rule(self._u0 + kk * w, self._u0 + (kk + 1) * w)
            full[sel] = np.concatenate([[0.0], np.cumsum(vals)])[jj]
        lo = self._u0 + k * w
        return self._cp[seg] + full + self._rule(lo, t)

    def __repr__(self):
        return (f"CumulativeIntegral({self.source}, ref={self.ref_time:g}, "
                f"t_max={self.t_max:g}, mode={self.mode})")


def build_cumulative(f: CoefficientFunction, ref_time=0.0, error_target=1e-8, max_time=1e3,
                     reserve=0.0, mode="auto", absolute=False, panel_width=None,
                     checkpoint_spacing=CHECKPOINT_SPACING, max_panels=MAX_PANELS,
                     workers=None) -> CumulativeIntegral:
    """Build ``F`` on ``[ref_time, max_time + reserve]``.

    ``mode`` is ``"exact"``, ``"numeric"`` or ``"auto"`` (exact whenever an
    antiderivative is present).  ``absolute=True`` integrates ``|f|`` and forces
    numeric mode.
    """
    if not (0 < error_target <= MAX_ERROR_TARGET):
        raise PreconditionError(f"error_target must lie in (0, {MAX_ERROR_TARGET}]")
    if ref_time < 0:
        raise PreconditionError("ref_time must be >= 0")
    if reserve < 0:
        raise PreconditionError("reserve must be >= 0")
    if not max_time > ref_time:
        raise PreconditionError("max_time must exceed ref_time")
    if mode not in ("auto", "exact", "numeric"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "auto":
        mode = "exact" if f.has_antiderivative and not absolute else "numeric"
    if mode == "exact":
        if absolute:
            raise PreconditionError("integrals of |f| are only available in numeric mode")
        if not f.has_antiderivative:
            raise PreconditionError("exact mode needs a closed-form antiderivative")
    return CumulativeIntegral(f, ref_time, max_time + reserve, error_target, mode,
                              absolute=absolute, panel_width=panel_width,
                              checkpoint_spacing=checkpoint_spacing,
                              max_panels=max_panels, workers=workers)


def integral_between(F: CumulativeIntegral, s, t):
    """``int_s^t a``; antisymmetric in ``(s, t)``."""
    return F.value(t) - F.value(s)


def integral_of_abs(f: CoefficientFunction, s, t, error_target=1e-8, panel_width=None):
    """Numeric ``int_s^t |f|`` for ``s <= t``, splitting panels at sign changes."""
    if t < s:
        raise PreconditionError("integral_of_abs needs s <= t")
    if not (0 < error_target <= MAX_ERROR_TARGET):
        raise PreconditionError(f"error_target must lie in (0, {MAX_ERROR_TARGET}]")
    start = _integration_start(f, float(s))
    if t <= start:
        return 0.0
    w = choose_panel_width(error_target, t - start, t, cap=panel_width or MAX_PANEL_WIDTH)
    graded = _graded_boundaries(start, w)
    graded = graded[graded < t]
    u0 = float(graded[-1])
    n = max(1, int(math.ceil((t - u0) / w)))
    if n + len(graded) > MAX_PANELS:
        raise ResourceLimitError(f"integral_of_abs over [{s:g}, {t:g}] needs {n} panels")
    parts = []
    if len(graded) > 1:
        parts.append(_gl_abs(f, graded[:-1], graded[1:]))
    for k0 in range(0, n, _PANELS_PER_CHUNK):
        k = np.arange(k0, min(n, k0 + _PANELS_PER_CHUNK))
        lo = u0 + k * w
        hi = np.minimum(u0 + (k + 1) * w, t)
        parts.append(_gl_abs(f, lo, hi))
    return math.fsum(np.concatenate(parts))
