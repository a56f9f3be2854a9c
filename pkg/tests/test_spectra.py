import math
import warnings
from dataclasses import replace

import numpy as np
import pytest

from dichospec.errors import PreconditionError
from dichospec.spectra import (BiasReport, ComponentBias, Numerics, ReportConfig,
                               SpectralInterval, ed_intervals, full_report, lyapunov_intervals,
                               ned_intervals, nonuniform_bias, widths_diverge)
from dichospec.steklov import SteklovParams
from dichospec.systems import builtin

PLANAR = builtin("planar-nubg")
QUICK = ReportConfig(lyap_T1=1e2, lyap_T2=1e3, bias_H=10.0, bias_T1=1e4, bias_T2=2e4,
                     ed_H=10.0, ed_t0=1e2, ed_T=2e3, ned_H=1e5, ned_T1=10.0, ned_T2=1e2)


def ends(ivs):
    return [(iv.lower, iv.upper) for iv in ivs]


@pytest.mark.parametrize("c", [0.0, 1.5, -3.25])
def test_constant_system_intervals_collapse(c):
    s = builtin("constant", {"c1": c, "c2": 2 * c})
    for ivs in (lyapunov_intervals(s, 1e2, 1e3),
                ed_intervals(s, 10.0, 1e2, 1e3),
                ned_intervals(s, 1e5, 1e2, 1e3)):
        for iv, cj in zip(ivs, (c, 2 * c)):
            assert iv.lower == pytest.approx(cj, abs=1e-12)
            assert iv.upper == pytest.approx(cj, abs=1e-12)
            assert not iv.divergent


@pytest.mark.parametrize("c, H, T1", [(0.0, 10.0, 1e3), (2.0, 10.0, 1e3), (-0.5, 100.0, 1e4)])
def test_bias_of_constant(c, H, T1):
    rep = nonuniform_bias(builtin("constant", {"c1": c}), H, T1, 10 * T1)
    row = rep.components[0]
    assert row.b_bar == pytest.approx(abs(c) * H / T1, rel=1e-12, abs=1e-15)
    if c:
        assert row.t_at_sup == T1
    assert rep.decision(1) == ("nonuniform" if row.b_bar >= 0.01 else "uniform")


def test_zero_coefficient_is_uniform():
    rep = nonuniform_bias(builtin("constant", {"c1": 0}), 10.0, 1e3, 1e4)
    assert rep.components[0].b_bar == 0.0 and not rep.components[0].nonuniform


@pytest.mark.parametrize("lam", [0.75, -2.0, 1.0 / 3.0])
def test_shift_equivariance(lam):
    shifted = PLANAR.shifted(lam)
    pairs = [
        (lyapunov_intervals(PLANAR, 1e2, 1e4), lyapunov_intervals(shifted, 1e2, 1e4)),
        (ned_intervals(PLANAR, 1e6, 1e2, 1e3), ned_intervals(shifted, 1e6, 1e2, 1e3)),
        (ed_intervals(PLANAR, 1e2, 1e3, 1e5, numerics=Numerics(doubling_check=False)),
         ed_intervals(shifted, 1e2, 1e3, 1e5, numerics=Numerics(doubling_check=False))),
    ]
    for base, moved in pairs:
        for (lo, hi), (lo2, hi2) in zip(ends(base), ends(moved)):
            assert abs((lo2 - lo) - lam) <= 1e-12
            assert abs((hi2 - hi) - lam) <= 1e-12


@pytest.mark.parametrize("step", [0.3, 0.1])
def test_monotone_refinement(step):
    def never_shrinks(coarse, fine):
        for (lo, hi), (flo, fhi) in zip(ends(coarse), ends(fine)):
            assert flo <= lo and fhi >= hi

    never_shrinks(lyapunov_intervals(PLANAR, 1e2, 1e4, step),
                  lyapunov_intervals(PLANAR, 1e2, 1e4, step / 2))
    never_shrinks(ned_intervals(PLANAR, 1e5, 1e2, 1e3, step),
                  ned_intervals(PLANAR, 1e5, 1e2, 1e3, step / 2))
    b1 = nonuniform_bias(PLANAR, 1e2, 1e4, 1e5, step)
    b2 = nonuniform_bias(PLANAR, 1e2, 1e4, 1e5, step / 2)
    for r1, r2 in zip(b1.components, b2.components):
        assert r2.b_bar >= r1.b_bar


def test_bias_decays_with_T1():
    values = [nonuniform_bias(PLANAR, 10.0, 10.0 ** k, 10.0 ** (k + 1), components=[1])
              .components[0].b_bar for k in (3, 4, 5)]
    assert values[0] > values[1] > values[2]


def test_ratio_guards():
    with pytest.raises(PreconditionError):
        ned_intervals(PLANAR, 5e3, 1e2, 1e3)
    with pytest.warns(RuntimeWarning):
        ned_intervals(PLANAR, 5e4, 1e2, 1e3)
    with pytest.raises(PreconditionError):
        nonuniform_bias(PLANAR, 1e3, 5e3, 1e4)
    with pytest.warns(RuntimeWarning):
        nonuniform_bias(PLANAR, 1e3, 5e4, 1e5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ned_intervals(PLANAR, 1e6, 1e2, 1e3)


def test_window_preconditions():
    with pytest.raises(PreconditionError):
        lyapunov_intervals(PLANAR, 10.0, 5.0)
    with pytest.raises(PreconditionError):
        lyapunov_intervals(PLANAR, 1.0, 10.0, grid_step=1.0)
    with pytest.raises(PreconditionError):
        ed_intervals(PLANAR, 1e3, 1e2, 1e3)
    with pytest.raises(PreconditionError):
        nonuniform_bias(PLANAR, 1.0, 1e2, 1e3, epsilon=0.0)
    with pytest.raises(PreconditionError):
        lyapunov_intervals(PLANAR, 1.0, 10.0, components=[3])


def test_ed_divergence_rules():
    intro = builtin("intro-diagonal")
    c1, c2 = ed_intervals(intro, 1e2, 1e3, 1e5)
    assert not c1.divergent and c2.divergent
    assert c2.width > 1e3
    assert widths_diverge(1.0, 1.6) and not widths_diverge(1.0, 1.4)
    assert widths_diverge(2.0, 0.9)
    assert not widths_diverge(0.0, 1e-9)


def test_results_independent_of_worker_count():
    a = lyapunov_intervals(PLANAR, 1e2, 1e4, numerics=Numerics(workers=1))
    b = lyapunov_intervals(PLANAR, 1e2, 1e4, numerics=Numerics(workers=4))
    assert ends(a) == ends(b)


def test_numeric_mode_agrees_with_exact():
    exact = lyapunov_intervals(PLANAR, 1e2, 1e3)
    numeric = lyapunov_intervals(PLANAR, 1e2, 1e3, numerics=Numerics(mode="numeric"))
    for (lo, hi), (nlo, nhi) in zip(ends(exact), ends(numeric)):
        assert abs(lo - nlo) < 1e-7 and abs(hi - nhi) < 1e-7


def test_domain_types_validate():
    with pytest.raises(ValueError):
        SpectralInterval(1, 2.0, 1.0)
    with pytest.raises(ValueError):
        SpectralInterval(1, 0.0, 1.0, kind="other")
    SpectralInterval(1, 2.0, 1.0, divergent=True, kind="ed")
    params = SteklovParams(1.0, 10.0, 20.0, 0.5)
    with pytest.raises(ValueError):
        BiasReport((ComponentBias(1, 0.5, False, 10.0),), 0.01, params)


def test_full_report_constant():
    rep = full_report(builtin("constant", {"c1": 0.0}))
    for ivs in (rep.lyapunov, rep.ned, rep.ed):
        assert ends(ivs) == [(0.0, 0.0)]
    assert rep.bias.decision(1) == "uniform"
    assert rep.containment_violations == []


def test_full_report_routing_on_intro_system():
    rep = full_report(builtin("intro-diagonal"), QUICK)
    lyap, ned, ed = rep.intervals(1)
    assert rep.bias.decision(1) == "uniform"
    assert (ned.lower, ned.upper) == (ed.lower, ed.upper) and ned.kind == "ned"
    assert not ed.divergent
    _, ned2, ed2 = rep.intervals(2)
    assert rep.bias.decision(2) == "nonuniform" and ed2.divergent
    assert ned2.lower == pytest.approx(-2.0, abs=0.05) and ned2.upper == pytest.approx(2.0, abs=0.05)


def test_provenance_records_grid_and_start_gap():
    rep = full_report(PLANAR, QUICK)
    prov = rep.provenance
    assert prov["integration_mode"] == "exact"
    assert prov["grid_steps"]["lyap"] == pytest.approx(min(math.pi / 8, 900 / 1e4))
    assert prov["start_gap"][0]["component"] == 1
    assert prov["config"]["ned_H"] == 1e5
