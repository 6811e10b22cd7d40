"""Threshold-constant computations against independently derived values.

The reference numbers below were produced by a 50-digit mpmath evaluation of
sup_l sum_k C(m,k) l^k (1-l)^(m-k) exp(m*phi(k/m, l)) and are frozen here.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pacbayes import (
    ConstantPolicy,
    DistanceKind,
    PacBayesError,
    ik_constant,
    log_binom,
    log_ik_at,
    log_sum_exp,
)

EXACT = ConstantPolicy.EXACT_LOGSPACE

# m -> sup value for the linear distance; argmax is m-independent
LIN_TABLE = {
    5: 1.852447629,
    10: 3.431562219,
    15: 6.356789296,
    20: 11.77561926,
    25: 21.81371798,
    30: 40.40877016,
}
LIN_ARGMAX = 0.58197671
LIN_LOG_SLOPE = 0.123301561482  # log value is exactly linear in m

# m -> sup value for the squared distance (supremum sits at l = 0.5)
SQ_TABLE = {
    3: 1.34442804129,
    10: 1.38574182562,
    50: 1.40750291615,
    100: 1.41077215741,
    200: 1.41246987977,
    500: 1.413510365,
    1000: 1.41386099113,
    2000: 1.41403703182,
}


@pytest.mark.parametrize("m, expected", sorted(LIN_TABLE.items()))
def test_lin_constant_table(m, expected):
    res = ik_constant(DistanceKind.LIN, m, EXACT)
    assert math.exp(res.log_value) == pytest.approx(expected, rel=1e-7)
    assert res.argmax_l == pytest.approx(LIN_ARGMAX, abs=1e-4)


@pytest.mark.parametrize("m", [5, 10, 20, 40, 80])
def test_lin_log_value_linear_in_m(m):
    res = ik_constant(DistanceKind.LIN, m, EXACT)
    assert res.log_value / m == pytest.approx(LIN_LOG_SLOPE, abs=1e-8)


@pytest.mark.parametrize("m, expected", sorted(SQ_TABLE.items()))
def test_sq_constant_table(m, expected):
    res = ik_constant(DistanceKind.SQ, m, EXACT)
    assert math.exp(res.log_value) == pytest.approx(expected, rel=1e-9)
    assert res.argmax_l == 0.5


def test_sq_constant_monotone_in_m():
    values = [ik_constant(DistanceKind.SQ, m, EXACT).log_value for m in (3, 10, 50, 200, 1000)]
    assert values == sorted(values)


@pytest.mark.parametrize("m", [500, 1000, 2000])
def test_sq_constant_approaches_sqrt_two(m):
    value = math.exp(ik_constant(DistanceKind.SQ, m, EXACT).log_value)
    assert abs(value - math.sqrt(2.0)) < 0.01


def test_sq_constant_finite_at_large_m():
    res = ik_constant(DistanceKind.SQ, 2000, EXACT)
    assert math.isfinite(res.log_value)
    assert math.isfinite(math.exp(res.log_value))


def test_sq_supremum_sits_at_half():
    best = log_ik_at(DistanceKind.SQ, 50, 0.5)
    for l in np.linspace(0.01, 0.99, 99):
        assert log_ik_at(DistanceKind.SQ, 50, float(l)) <= best + 1e-12


def test_sq_derivative_vanishes_at_half():
    h = 1e-6
    f = lambda l: log_ik_at(DistanceKind.SQ, 100, l)
    assert abs(f(0.5 + h) - f(0.5 - h)) / (2 * h) < 1e-4


def test_pinsker_constant_dominates_sq():
    # phi_P = 2 phi_sq, so the moment sum can only grow
    for m in (5, 20, 100):
        assert (
            ik_constant(DistanceKind.PINSKER, m, EXACT).log_value
            >= ik_constant(DistanceKind.SQ, m, EXACT).log_value
        )


def test_two_sqrt_m_policy_closed_form():
    for kind in (DistanceKind.LIN, DistanceKind.SQ, DistanceKind.PINSKER, DistanceKind.KL):
        res = ik_constant(kind, 36, ConstantPolicy.TWO_SQRT_M)
        assert res.log_value == pytest.approx(math.log(12.0), abs=1e-15)
        assert math.isnan(res.argmax_l)


def test_begin_exact_is_an_alias():
    a = ik_constant(DistanceKind.LIN, 17, EXACT)
    b = ik_constant(DistanceKind.LIN, 17, ConstantPolicy.BEGIN_EXACT)
    assert a.log_value == b.log_value


def test_ch_kind_has_no_moment_policy():
    with pytest.raises(PacBayesError) as exc:
        ik_constant(DistanceKind.CH, 10, EXACT)
    assert exc.value.code == "BAD_POLICY_FOR_KIND"
    with pytest.raises(PacBayesError):
        ik_constant(DistanceKind.CH, 10, ConstantPolicy.TWO_SQRT_M)


def test_kl_kind_exact_policy_rejected():
    with pytest.raises(PacBayesError) as exc:
        ik_constant(DistanceKind.KL, 10, EXACT)
    assert exc.value.code == "BAD_POLICY_FOR_KIND"


def test_ik_constant_rejects_bad_m():
    with pytest.raises(PacBayesError) as exc:
        ik_constant(DistanceKind.LIN, 0, EXACT)
    assert exc.value.code == "BAD_SAMPLE_SIZE"


def test_log_binom_values():
    assert log_binom(5, 2) == pytest.approx(math.log(10.0), abs=1e-12)
    assert log_binom(10, 0) == pytest.approx(0.0, abs=1e-12)
    assert log_binom(10, 10) == pytest.approx(0.0, abs=1e-12)
    assert log_binom(52, 5) == pytest.approx(math.log(2598960.0), rel=1e-12)


def test_log_binom_errors():
    with pytest.raises(PacBayesError) as exc:
        log_binom(0, 0)
    assert exc.value.code == "BAD_SAMPLE_SIZE"
    with pytest.raises(PacBayesError) as exc:
        log_binom(5, 6)
    assert exc.value.code == "K_OUT_OF_RANGE"
    with pytest.raises(PacBayesError):
        log_binom(5, -1)


def test_log_ik_at_endpoints_are_zero():
    # at l in {0, 1} the binomial collapses to one term with phi = 0
    for kind in (DistanceKind.LIN, DistanceKind.SQ, DistanceKind.PINSKER):
        assert log_ik_at(kind, 12, 0.0) == 0.0
        assert log_ik_at(kind, 12, 1.0) == 0.0


def test_log_ik_at_rejects_kl_and_ch():
    for kind in (DistanceKind.KL, DistanceKind.CH):
        with pytest.raises(PacBayesError) as exc:
            log_ik_at(kind, 10, 0.5)
        assert exc.value.code == "UNSUPPORTED_KIND"


def test_log_ik_at_rejects_bad_l():
    with pytest.raises(PacBayesError) as exc:
        log_ik_at(DistanceKind.LIN, 10, 1.5)
    assert exc.value.code == "RISK_OUT_OF_RANGE"


def test_log_sum_exp_basics():
    assert log_sum_exp([0.0, 0.0]) == pytest.approx(math.log(2.0), abs=1e-15)
    assert log_sum_exp([-np.inf, -np.inf]) == -np.inf
    assert log_sum_exp([]) == -np.inf
    assert log_sum_exp([1000.0, 1000.0]) == pytest.approx(1000.0 + math.log(2.0), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=0.0, max_value=1.0))
def test_lin_constant_is_the_supremum(l):
    res = ik_constant(DistanceKind.LIN, 12, EXACT)
    assert log_ik_at(DistanceKind.LIN, 12, l) <= res.log_value + 1e-10
