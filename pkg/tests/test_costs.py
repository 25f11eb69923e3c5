import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from congestlab.costs import (
    BPR,
    Affine,
    Constant,
    LimitCost,
    LimitMarker,
    Polynomial,
    RecursivePiecewise,
    derivative,
    evaluate,
    integral,
    limit_cost,
    marginal_cost,
    scaled_cost,
)

STD_BPR = BPR(t0=10, capacity=100, alpha=0.15, beta=4)


def test_bpr_free_flow_and_capacity():
    assert evaluate(STD_BPR, 0) == 10
    assert evaluate(STD_BPR, 100) == pytest.approx(11.5, rel=1e-15)


def test_bpr_expansion_matches_direct_form():
    for x in (0.0, 3.7, 100.0, 1234.5):
        expanded = STD_BPR.gamma * x**4 + STD_BPR.t0
        assert Polynomial(((STD_BPR.gamma, 4.0), (10.0, 0.0))).value(x) == pytest.approx(expanded, rel=1e-14)
        assert STD_BPR.value(x) == pytest.approx(expanded, rel=1e-14)


def test_piecewise_on_first_rising_piece():
    assert evaluate(RecursivePiecewise((0, 1, 3)), 2.0) == 2.0
    assert evaluate(RecursivePiecewise((0, 1, 3, 10)), 2.0) == 2.0


def test_piecewise_recursion_values():
    tau = RecursivePiecewise((0, 1, 3, 10, 50))
    assert tau.value(0.5) == 1.0
    # flat piece [3, 10): tau(3) = tau(0) * ((3 - 1) + 1)
    assert tau.value(3.0) == 3.0
    assert tau.value(9.99) == 3.0
    # rising piece [10, 50): ((x - 10) + 1) * tau(3)
    assert tau.value(20.0) == pytest.approx(33.0)
    assert tau.derivative(20.0) == 3.0
    assert tau.derivative(5.0) == 0.0


def test_piecewise_is_continuous_at_breakpoints():
    tau = RecursivePiecewise((0, 1, 3, 10, 50))
    for b in (1, 3, 10, 50, 200, 1000):
        assert tau.value(b - 1e-9) == pytest.approx(tau.value(b), rel=1e-8)


def test_piecewise_extension_and_limit():
    tau = RecursivePiecewise((0, 1, 3), max_index=6)
    # generated breakpoints grow with ratios 4, 5, 6, 7 after the stored 3
    assert tau.value(1e3) > 0
    with pytest.raises(ValueError):
        tau.value(1e9)


@pytest.mark.parametrize(
    "bad",
    [(1, 2, 3), (0, 1), (0, 2, 1), (0, 1, 3, 9)],
)
def test_piecewise_rejects_bad_breakpoints(bad):
    with pytest.raises(ValueError):
        RecursivePiecewise(bad)


def test_derivative_examples():
    assert derivative(Polynomial(((1, 4),)), 2) == 32
    assert derivative(Constant(5), 3.3) == 0
    # finite-difference oracle, h = 1e-4: 0.059999999999504894
    assert derivative(STD_BPR, 100) == pytest.approx(0.06, rel=1e-12)
    fd = (STD_BPR.value(100 + 1e-4) - STD_BPR.value(100 - 1e-4)) / 2e-4
    assert derivative(STD_BPR, 100) == pytest.approx(fd, rel=1e-6)


def test_marginal_examples():
    assert marginal_cost(Affine(1, 0), 1.75) == 3.5
    assert marginal_cost(Constant(1), 7) == 1
    assert marginal_cost(Polynomial(((1, 4),)), 1) == 5


def test_integral_examples():
    assert integral(Affine(1, 0), 2) == 2
    assert integral(Affine(1, 1), 1) == 1.5
    # adaptive quadrature oracle gives 1030.0
    assert integral(STD_BPR, 100) == pytest.approx(1030.0, rel=1e-12)
    quad, _ = integrate.quad(STD_BPR.value, 0, 100, epsabs=1e-13, epsrel=1e-13)
    assert integral(STD_BPR, 100) == pytest.approx(quad, rel=1e-8)


def test_piecewise_integral_matches_quadrature():
    tau = RecursivePiecewise((0, 1, 3, 10, 50))
    for x in (0.5, 2.0, 7.0, 30.0, 49.0):
        quad, _ = integrate.quad(tau.value, 0, x, points=[b for b in (1, 3, 10) if b < x], limit=200)
        assert tau.integral(x) == pytest.approx(quad, rel=1e-9)


def test_scaled_cost_examples():
    assert scaled_cost(Polynomial(((1, 4),)), 10, 1e4, 0.5) == pytest.approx(0.0625, rel=1e-15)
    assert scaled_cost(Constant(2.5), 1e6, 1, 0.3) == 2.5
    assert scaled_cost(STD_BPR, 1e4, 1e16, 1.0) == pytest.approx(evaluate(STD_BPR, 1e4) / 1e16, rel=1e-15)
    # 10 * (1 + 0.15 * 100**4) / 1e16
    assert scaled_cost(STD_BPR, 1e4, 1e16, 1.0) == pytest.approx(1.5e-8 + 1e-15, rel=1e-12)
    with pytest.raises(ValueError):
        scaled_cost(STD_BPR, 1.0, 0.0, 1.0)


def test_limit_cost_examples():
    lim = limit_cost(STD_BPR, 4)
    assert isinstance(lim, LimitCost)
    assert lim.gamma == pytest.approx(1.5e-8, rel=1e-12)
    assert lim.beta == 4
    assert limit_cost(Constant(1), 4) is LimitMarker.ZERO
    assert limit_cost(Polynomial(((4, 2),)), 1) is LimitMarker.INFINITE
    assert limit_cost(Polynomial(((2, 1), (1, 0))), 1) == LimitCost(2.0, 1.0)
    with pytest.raises(TypeError):
        limit_cost(RecursivePiecewise((0, 1, 3)), 1)


@pytest.mark.parametrize("fn", [evaluate, derivative, marginal_cost, integral])
def test_negative_flow_rejected(fn):
    with pytest.raises(ValueError):
        fn(STD_BPR, -1e-3)


def test_beta_zero_bpr_is_constant():
    c = BPR(2.0, 5.0, 0.5, 0.0)
    assert c.value(0) == c.value(1e6) == 3.0
    assert c.derivative(7.0) == 0.0


# property tests -----------------------------------------------------------

positive = st.floats(min_value=1e-3, max_value=50, allow_nan=False)
exponent = st.floats(min_value=0.0, max_value=5.0, allow_nan=False)

smooth_costs = st.one_of(
    st.builds(BPR, positive, positive, st.floats(0, 2), exponent),
    st.builds(
        lambda terms: Polynomial(tuple(terms)),
        st.lists(st.tuples(st.floats(0, 10), st.sampled_from([0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0])), min_size=1, max_size=4),
    ),
    st.builds(Affine, st.floats(0, 10), st.floats(0, 10)),
    st.builds(Constant, st.floats(0, 10)),
)
log_grid = np.logspace(-6, 9, 31)


def _grid_for(spec):
    # keep tau(x) comfortably inside double range for steep polynomials
    return [x for x in log_grid if spec.value(x) < 1e250]


@given(smooth_costs)
def test_derivative_matches_central_difference(spec):
    for x in _grid_for(spec):
        # step relative to x: fractional powers curve sharply near 0
        h = 1e-5 * x
        fd = (spec.value(x + h) - spec.value(x - h)) / (2 * h)
        d = spec.derivative(x)
        # rounding in the difference quotient scales with |tau| / h
        slack = 1e-6 + 1e-6 * abs(d) + 1e-9 * abs(spec.value(x)) / h
        assert abs(d - fd) <= max(slack, 1e-4 * abs(d)), (x, d, fd)


@given(smooth_costs)
def test_integral_differentiates_back(spec):
    for x in _grid_for(spec)[::3]:
        h = 1e-4 * x
        cd = (spec.integral(x + h) - spec.integral(x - h)) / (2 * h)
        val = spec.value(x)
        assert cd == pytest.approx(val, rel=1e-6, abs=1e-9 + 1e-12 * spec.integral(x + h) / h)


@given(smooth_costs)
def test_monotone_nonnegative_and_marginal_dominates(spec):
    vals = [spec.value(x) for x in _grid_for(spec)]
    assert all(v >= 0 for v in vals)
    assert all(b >= a * (1 - 1e-15) for a, b in zip(vals, vals[1:]))
    for x in _grid_for(spec):
        assert spec.marginal(x) >= spec.value(x) * (1 - 1e-14)


@given(st.lists(st.floats(1.5, 4.0), min_size=1, max_size=5), st.floats(0.0, 300.0))
def test_piecewise_properties(ratio_steps, x):
    b = [0.0, 1.0]
    ratio = 1.0
    for step in ratio_steps:
        ratio += step
        b.append(b[-1] * ratio)
    tau = RecursivePiecewise(tuple(b))
    xs = np.linspace(0, x, 50)
    vals = [tau.value(v) for v in xs]
    assert all(q >= p for p, q in zip(vals, vals[1:]))
    assert tau.marginal(x) >= tau.value(x)
    h = 1e-6 * max(1.0, x)
    assert (tau.integral(x + h) - tau.integral(x)) / h == pytest.approx(tau.value(x), rel=1e-4, abs=1e-6)
    assert math.isfinite(tau.integral(x))
