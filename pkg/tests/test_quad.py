import math
import warnings

import numpy as np
import pytest
from scipy import integrate, optimize

from dichospec.errors import OutOfRangeError, PreconditionError, ResourceLimitError
from dichospec.expr import CoefficientFunction
from dichospec.quad import (MAX_PANEL_WIDTH, START_GAP, build_cumulative, choose_panel_width,
                            integral_between, integral_of_abs)

C = CoefficientFunction.from_text


def scipy_integral(f, a, b):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(lambda x: f(x), a, b, limit=2000, epsabs=1e-13, epsrel=1e-13)
    return val


@pytest.mark.parametrize("body", ["t*sin(t)+1", "cos(3*t)*exp(-t/10)", "4-2*t*sin(t)", "sqrt(t)"])
def test_numeric_mode_against_scipy(body):
    f = C(body)
    F = build_cumulative(f, 0.0, 1e-10, 60.0, mode="numeric")
    for t in (0.3, 1.0, 7.5, 33.3, 60.0):
        assert F.value(t) == pytest.approx(scipy_integral(f, 0.0, t), abs=1e-9, rel=1e-10)


def test_exact_mode_differences_primitive():
    f = C("t*sin(t)+1", "sin(t)-t*cos(t)+t")
    F = build_cumulative(f, 2.0, max_time=100.0, mode="exact")
    t = np.array([2.0, 3.0, 50.0])
    expected = [0.0] + [(math.sin(x) - x * math.cos(x) + x) - (math.sin(2) - 2 * math.cos(2) + 2)
                        for x in t[1:]]
    np.testing.assert_allclose(F.value(t), expected, rtol=1e-14, atol=1e-13)
    assert F.mode == "exact" and F.panel_count == 0


def test_auto_mode_picks_exact_when_available():
    assert build_cumulative(C("1", "t")).mode == "exact"
    assert build_cumulative(C("1")).mode == "numeric"


def test_scalar_and_array_queries_agree_bitwise():
    F = build_cumulative(C("sin(t)*t"), 0.0, 1e-8, 5000.0, mode="numeric")
    t = np.array([0.0, 0.25, 1.1, 999.9, 1000.0, 1000.1, 4321.0, 5000.0])
    arr = F.value(t)
    assert [F.value(x) for x in t] == list(arr)
    assert F(1.1) == F.value(1.1)


def test_numeric_values_independent_of_worker_count():
    f = C("cos(t)+t/1000")
    a = build_cumulative(f, 0.0, 1e-8, 2e4, mode="numeric", workers=1)
    b = build_cumulative(f, 0.0, 1e-8, 2e4, mode="numeric", workers=3)
    t = np.linspace(0, 2e4, 1001)
    np.testing.assert_array_equal(a.value(t), b.value(t))


def test_panel_refinement_converges():
    f = C("t*sin(t)+1")
    coarse = build_cumulative(f, 0.0, 1e-8, 1e3, mode="numeric")
    fine = build_cumulative(f, 0.0, 1e-8, 1e3, mode="numeric", panel_width=coarse.panel_width / 2)
    t = np.linspace(1, 1e3, 50)
    np.testing.assert_allclose(coarse.value(t), fine.value(t), rtol=0, atol=1e-9)


def test_integral_between_is_antisymmetric():
    F = build_cumulative(C("cos(t)", "sin(t)"), max_time=10.0)
    assert integral_between(F, 1.0, 4.0) == -integral_between(F, 4.0, 1.0)
    assert integral_between(F, 1.0, 4.0) == pytest.approx(math.sin(4) - math.sin(1), abs=1e-14)


def test_out_of_range_queries():
    F = build_cumulative(C("1", "t"), 1.0, max_time=10.0)
    assert F.covered == (1.0, 10.0)
    with pytest.raises(OutOfRangeError):
        F.value(10.5)
    with pytest.raises(OutOfRangeError):
        F.value(np.array([2.0, 0.5]))
    with pytest.raises(OutOfRangeError):
        F.value(float("nan"))


def test_reserve_extends_coverage():
    F = build_cumulative(C("1", "t"), 0.0, max_time=10.0, reserve=5.0)
    assert F.value(15.0) == 15.0


def test_preconditions():
    with pytest.raises(PreconditionError):
        build_cumulative(C("1"), mode="exact")
    with pytest.raises(PreconditionError):
        build_cumulative(C("1", "t"), mode="exact", absolute=True)
    with pytest.raises(PreconditionError):
        build_cumulative(C("1"), error_target=0.1)
    with pytest.raises(PreconditionError):
        build_cumulative(C("1"), ref_time=5.0, max_time=5.0)
    with pytest.raises(ResourceLimitError):
        build_cumulative(C("sin(t)"), 0.0, 1e-8, 1e6, mode="numeric", max_panels=1000)


def test_start_gap_rule_for_log_coefficient():
    f = C("sin(ln(t))+cos(ln(t))", "t*sin(ln(t))", START_GAP)
    num = build_cumulative(f, 0.0, 1e-10, 1e3, mode="numeric")
    ex = build_cumulative(f, 0.0, 1e-10, 1e3, mode="exact")
    assert num.start == START_GAP
    assert 0 < num.gap_bias_bound <= 2 * START_GAP
    assert num.value(START_GAP / 2) == 0.0
    t = np.geomspace(1e-3, 1e3, 40)
    np.testing.assert_allclose(num.value(t), ex.value(t), rtol=0, atol=num.gap_bias_bound + 1e-9)


def test_choose_panel_width_caps():
    assert choose_panel_width(1e-3, 1.0, 1.0) == MAX_PANEL_WIDTH
    assert choose_panel_width(1e-12, 1e8, 1e8) < choose_panel_width(1e-8, 1e8, 1e8) <= 0.5


def test_integral_of_abs_sine():
    assert integral_of_abs(C("sin(t)"), 0.0, 2 * math.pi) == pytest.approx(4.0, abs=1e-12)
    assert integral_of_abs(C("sin(t)"), 1.0, 1.0) == 0.0
    with pytest.raises(PreconditionError):
        integral_of_abs(C("sin(t)"), 2.0, 1.0)


def test_integral_of_abs_against_root_oracle():
    # oracle: sum of |G(r_{k+1}) - G(r_k)| over the sign-constant pieces
    g = lambda t: t * math.sin(t) + 1
    G = lambda t: math.sin(t) - t * math.cos(t) + t
    xs = np.linspace(0, 20, 2001)
    cuts = [0.0] + [optimize.brentq(g, a, b, xtol=1e-15)
                    for a, b in zip(xs[:-1], xs[1:]) if g(a) * g(b) < 0] + [20.0]
    ref = math.fsum(abs(G(b) - G(a)) for a, b in zip(cuts[:-1], cuts[1:]))
    assert len(cuts) > 4
    assert integral_of_abs(C("t*sin(t)+1"), 0.0, 20.0) == pytest.approx(ref, rel=1e-12)


def test_absolute_cumulative_is_monotone():
    F = build_cumulative(C("t*sin(t)+1"), 0.0, 1e-8, 200.0, absolute=True)
    v = F.value(np.linspace(0, 200, 2001))
    assert np.all(np.diff(v) >= 0)
    assert F.value(20.0) == pytest.approx(integral_of_abs(C("t*sin(t)+1"), 0.0, 20.0), rel=1e-9)
