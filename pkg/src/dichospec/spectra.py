"""Finite-time spectral procedures for diagonal systems.

* :func:`lyapunov_intervals` -- running averages ``F_j(t)/t`` over ``[T1, T2]``.
* :func:`ed_intervals` -- Steklov averages with ``t`` ranging far beyond ``H``
  (the classical bounded-growth recipe, which blows up for nonuniform terms).
* :func:`ned_intervals` -- Steklov averages with ``H >> T2``.
* :func:`nonuniform_bias` -- ``sup |(1/t) int_t^{t+H} a_j|`` with ``T1 >> H``.
* :func:`full_report` -- bias first, then ED or NED per component.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from ._parallel import ordered_map
from .errors import PreconditionError
from .quad import _integration_start, build_cumulative
from .steklov import OSCILLATION_STEP_LIMIT, SteklovParams, default_grid_step, grid_extrema
from .systems import DiagonalSystem

LYAPUNOV, ED, NED = "lyapunov", "ed", "ned"
KINDS = (LYAPUNOV, ED, NED)


@dataclass(frozen=True)
class Numerics:
    """Knobs shared by all procedures."""

    mode: str = "auto"                 # exact | numeric | auto
    error_target: float = 1e-8
    ratio_min: float = 10.0            # hard floor for H/T2 (NED) and T1/H (bias)
    ratio_warn: float = 100.0
    divergence_factor: float = 1e3
    doubling_check: bool = True
    refine: bool = False               # golden-section polish of grid extrema
    workers: Optional[int] = None


DEFAULT_NUMERICS = Numerics()


@dataclass(frozen=True)
class SpectralInterval:
    component: int
    lower: float
    upper: float
    divergent: bool = False
    kind: str = LYAPUNOV

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown interval kind {self.kind!r}")
        if not self.divergent and self.lower > self.upper:
            raise ValueError("lower > upper on a non-divergent interval")

    @property
    def width(self):
        return self.upper - self.lower


@dataclass(frozen=True)
class ComponentBias:
    component: int
    b_bar: float
    nonuniform: bool
    t_at_sup: float


@dataclass(frozen=True)
class BiasReport:
    components: tuple
    epsilon: float
    params: SteklovParams

    def __post_init__(self):
        for c in self.components:
            if c.nonuniform != (c.b_bar >= self.epsilon):
                raise ValueError("nonuniform flag disagrees with b_bar >= epsilon")

    def decision(self, j):
        return "nonuniform" if self.components[j - 1].nonuniform else "uniform"


@dataclass
class SpectrumReport:
    system: str
    parameters: dict
    lyapunov: list
    ed: list
    ned: list
    bias: BiasReport
    containment_violations: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def intervals(self, j):
        return self.lyapunov[j - 1], self.ned[j - 1], self.ed[j - 1]


# --- helpers -------------------------------------------------------------------

def _components(system, components):
    if components is None:
        return list(range(1, system.dimension + 1))
    out = [int(j) for j in components]
    for j in out:
        if not 1 <= j <= system.dimension:
            raise PreconditionError(f"component {j} out of range 1..{system.dimension}")
    return out


def _cumulatives(system, t_max, numerics, components):
    def build(j):
        return build_cumulative(system.coefficients[j - 1], 0.0, numerics.error_target,
                                t_max, mode=numerics.mode, workers=numerics.workers)
    return dict(zip(components, ordered_map(build, components, numerics.workers)))


def _step(T1, T2, grid_step):
    step = default_grid_step(T1, T2) if grid_step is None else float(grid_step)
    if not 0 < step <= T2 - T1:
        raise PreconditionError("grid_step must lie in (0, T2 - T1]")
    if step > OSCILLATION_STEP_LIMIT:
        raise PreconditionError(f"grid_step must not exceed pi/4 ({OSCILLATION_STEP_LIMIT:.6f})")
    return step


def _check_ratio(name, ratio, numerics):
    if ratio < numerics.ratio_min:
        raise PreconditionError(
            f"{name} = {ratio:g} is below the required ratio {numerics.ratio_min:g}")
    if ratio < numerics.ratio_warn:
        warnings.warn(f"{name} = {ratio:g} is below {numerics.ratio_warn:g}; "
                      "expect a visibly biased estimate", RuntimeWarning, stacklevel=3)


# --- procedures ----------------------------------------------------------------

def lyapunov_intervals(system: DiagonalSystem, T1, T2, grid_step=None,
                       numerics: Numerics = DEFAULT_NUMERICS, components=None):
    """``[inf, sup]`` of ``F_j(t)/t`` over the closed grid on ``[T1, T2]``."""
    if not 0 < T1 < T2:
        raise PreconditionError(f"need 0 < T1 < T2, got T1={T1}, T2={T2}")
    step = _step(T1, T2, grid_step)
    comps = _components(system, components)
    Fs = _cumulatives(system, T2, numerics, comps)
    out = []
    for j in comps:
        F = Fs[j]
        ex = grid_extrema(lambda t: F.value(t) / t, T1, T2, step,
                          numerics.workers, numerics.refine)
        out.append(SpectralInterval(j, ex.lower, ex.upper, False, LYAPUNOV))
    return out


def _steklov_extrema(F, H, T1, T2, step, numerics):
    return grid_extrema(lambda t: (F.value(t + H) - F.value(t)) / H, T1, T2, step,
                        numerics.workers, numerics.refine)


def widths_diverge(w_T, w_2T, rel=0.5, floor=1e-8):
    """True when the width at ``2T`` differs from the width at ``T`` by more than ``rel * w_T``."""
    return abs(w_2T - w_T) > max(rel * w_T, floor)


def ed_intervals(system: DiagonalSystem, H, t0, T, grid_step=None,
                 numerics: Numerics = DEFAULT_NUMERICS, components=None,
                 reference_widths: Optional[Sequence[float]] = None):
    """Steklov-average intervals over ``t in [t0, T - H]`` (bounded-growth regime).

    An interval is flagged divergent when its width exceeds
    ``divergence_factor * max(1, reference width)`` or, with
    ``numerics.doubling_check``, when extending the horizon to ``2T`` changes
    the width by more than 50%.  ``reference_widths`` (indexed like
    ``components``) are typically the Lyapunov or NED widths.
    """
    if not H > 0:
        raise PreconditionError("H must be positive")
    if not 0 < t0 < T - H:
        raise PreconditionError(f"need 0 < t0 < T - H, got t0={t0}, T={T}, H={H}")
    hi = T - H
    step = _step(t0, hi, grid_step)
    comps = _components(system, components)
    refs = [0.0] * len(comps) if reference_widths is None else list(reference_widths)
    horizon = 2 * T if numerics.doubling_check else T
    Fs = _cumulatives(system, horizon, numerics, comps)
    out = []
    for j, ref in zip(comps, refs):
        F = Fs[j]
        ex = _steklov_extrema(F, H, t0, hi, step, numerics)
        width = ex.upper - ex.lower
        divergent = width > numerics.divergence_factor * max(1.0, ref)
        if not divergent and numerics.doubling_check:
            ext = _steklov_extrema(F, H, hi, 2 * T - H, step, numerics)
            w2 = max(ex.upper, ext.upper) - min(ex.lower, ext.lower)
            divergent = widths_diverge(width, w2)
        out.append(SpectralInterval(j, ex.lower, ex.upper, divergent, ED))
    return out


def ned_intervals(system: DiagonalSystem, H, T1, T2, grid_step=None,
                  numerics: Numerics = DEFAULT_NUMERICS, components=None):
    """``[inf, sup]`` of ``a_j^t = (1/H) int_t^{t+H} a_j`` for ``t in [T1, T2]`` with ``H >> T2``."""
    step = _step(T1, T2, grid_step) if 0 < T1 < T2 else None
    SteklovParams(H, T1, T2, step)
    _check_ratio("H/T2", H / T2, numerics)
    comps = _components(system, components)
    Fs = _cumulatives(system, T2 + H, numerics, comps)
    out = []
    for j in comps:
        ex = _steklov_extrema(Fs[j], H, T1, T2, step, numerics)
        out.append(SpectralInterval(j, ex.lower, ex.upper, False, NED))
    return out


def nonuniform_bias(system: DiagonalSystem, H, T1, T2, grid_step=None, epsilon=0.01,
                    numerics: Numerics = DEFAULT_NUMERICS, components=None) -> BiasReport:
    """``b_j = sup_t |(1/t) int_t^{t+H} a_j|`` on ``[T1, T2]`` with ``T1 >> H``.

    A component is declared nonuniform when ``b_j >= epsilon``.
    """
    if not epsilon > 0:
        raise PreconditionError("epsilon must be positive")
    step = _step(T1, T2, grid_step) if 0 < T1 < T2 else None
    params = SteklovParams(H, T1, T2, step)
    _check_ratio("T1/H", T1 / H, numerics)
    comps = _components(system, components)
    Fs = _cumulatives(system, T2 + H, numerics, comps)
    rows = []
    for j in comps:
        F = Fs[j]
        ex = grid_extrema(lambda t: np.abs(F.value(t + H) - F.value(t)) / t, T1, T2, step,
                          numerics.workers, numerics.refine)
        rows.append(ComponentBias(j, ex.upper, ex.upper >= epsilon, ex.argmax))
    return BiasReport(tuple(rows), float(epsilon), params)


# --- pipeline ------------------------------------------------------------------

@dataclass(frozen=True)
class ReportConfig:
    """Window parameters of the three regimes; defaults follow the worked planar example."""

    lyap_T1: float = 1e2
    lyap_T2: float = 1e4
    bias_H: float = 1e2
    bias_T1: float = 1e5
    bias_T2: float = 1e6
    ed_H: float = 1e2
    ed_t0: float = 1e3
    ed_T: float = 1e6
    ned_H: float = 1e6
    ned_T1: float = 1e2
    ned_T2: float = 1e3
    epsilon: float = 0.01
    grid_step: Optional[float] = None
    containment_tolerance: float = 0.05
    numerics: Numerics = DEFAULT_NUMERICS


def full_report(system: DiagonalSystem, config: ReportConfig = ReportConfig()) -> SpectrumReport:
    """Bias first; uniform components get ``NED := ED``, nonuniform ones get a
    divergent ED and an NED from :func:`ned_intervals`."""
    from .wis import check_containment

    c, num = config, config.numerics
    bias = nonuniform_bias(system, c.bias_H, c.bias_T1, c.bias_T2, c.grid_step, c.epsilon, num)
    lyap = lyapunov_intervals(system, c.lyap_T1, c.lyap_T2, c.grid_step, num)
    ed = ed_intervals(system, c.ed_H, c.ed_t0, c.ed_T, c.grid_step, num,
                      reference_widths=[iv.width for iv in lyap])
    nonuniform = [row.component for row in bias.components if row.nonuniform]
    ned_nu = {}
    if nonuniform:
        ned_nu = {iv.component: iv for iv in
                  ned_intervals(system, c.ned_H, c.ned_T1, c.ned_T2, c.grid_step, num,
                                components=nonuniform)}
    ed_out, ned_out = [], []
    for iv in ed:
        j = iv.component
        if j in ned_nu:
            ed_out.append(replace(iv, divergent=True))
            ned_out.append(ned_nu[j])
        else:
            ed_out.append(iv)
            ned_out.append(replace(iv, kind=NED))
    report = SpectrumReport(
        system=system.name,
        parameters=dict(system.parameters),
        lyapunov=lyap, ed=ed_out, ned=ned_out, bias=bias,
        provenance=_provenance(system, c),
    )
    report.containment_violations = check_containment(report, c.containment_tolerance)
    return report


def _provenance(system, c):
    steps = {}
    for name, lo, hi in (("lyap", c.lyap_T1, c.lyap_T2), ("bias", c.bias_T1, c.bias_T2),
                         ("ed", c.ed_t0, c.ed_T - c.ed_H), ("ned", c.ned_T1, c.ned_T2)):
        steps[name] = c.grid_step if c.grid_step is not None else default_grid_step(lo, hi)
    cfg = asdict(c)
    cfg.pop("numerics")
    mode = c.numerics.mode
    if mode == "auto":
        mode = "exact" if system.exact else "numeric"
    gaps = []
    for j, f in enumerate(system.coefficients, 1):
        start = _integration_start(f, 0.0)
        if start > 0:
            probe = np.geomspace(start, 1.0, 64)
            bound = float(np.max(np.abs(f(probe)))) * start
            gaps.append({"component": j, "t_start": start,
                         "numeric_bias_bound": bound if mode == "numeric" else 0.0})
    return {
        "config": cfg,
        "start_gap": gaps,
        "numerics": asdict(c.numerics),
        "grid_steps": steps,
        "integration_mode": mode,
        "grid": "closed: T1 + k*step for k >= 0, plus T2",
    }
