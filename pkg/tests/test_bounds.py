import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pacbayes import (
    BoundSpec,
    ConstantPolicy,
    DiscreteDistribution,
    DistanceKind,
    PacBayesError,
    RiskProfile,
    binary_kl,
    evaluate_bound,
    ik_constant,
    kl_divergence,
    log_threshold,
    make_distribution,
    rch,
    rch_prime,
)

EXACT = ConstantPolicy.EXACT_LOGSPACE
TWO_SQRT = ConstantPolicy.TWO_SQRT_M


def ch_poly(y: float) -> float:
    # the defining polynomial of rch, transcribed independently
    return y + (2.0 / 9.0) * y**2 + (16.0 / 135.0) * y**3


def test_kl_divergence_identity():
    p = DiscreteDistribution.uniform(5)
    assert kl_divergence(p, p) == 0.0


def test_kl_divergence_point_mass_vs_uniform():
    q = make_distribution([1.0, 0.0])
    p = DiscreteDistribution.uniform(2)
    assert kl_divergence(q, p) == pytest.approx(math.log(2.0), abs=1e-12)


def test_kl_divergence_support_violation():
    q = DiscreteDistribution.uniform(2)
    p = make_distribution([1.0, 0.0])
    with pytest.raises(PacBayesError) as exc:
        kl_divergence(q, p)
    assert exc.value.code == "NOT_ABS_CONTINUOUS"


def test_kl_divergence_size_mismatch():
    with pytest.raises(PacBayesError) as exc:
        kl_divergence(DiscreteDistribution.uniform(2), DiscreteDistribution.uniform(3))
    assert exc.value.code == "SIZE_MISMATCH"


@given(st.lists(st.floats(min_value=1e-3, max_value=1.0), min_size=2, max_size=20))
def test_kl_divergence_nonnegative(weights):
    q = make_distribution(weights)
    p = DiscreteDistribution.uniform(len(weights))
    assert kl_divergence(q, p) >= 0.0


# values from an mpmath bisection of the defining polynomial
RCH_TABLE = {
    0.0: 0.0,
    0.1: 0.097765241605332556,
    0.5: 0.44543399572512114,
    1.0: 0.79816474694546359,
    2.5: 1.5400462311740351,
    5.0: 2.3210011549924148,
}

RCH_PRIME_TABLE = {
    0.1: 0.955247026806,
    0.5: 0.788322138812,
    1.0: 0.632410033108,
    2.5: 0.395608558867,
    5.0: 0.253360168283,
}


@pytest.mark.parametrize("R, expected", sorted(RCH_TABLE.items()))
def test_rch_oracle_values(R, expected):
    assert rch(R) == pytest.approx(expected, abs=1e-12)


def test_rch_array_form():
    Rs = np.array(sorted(RCH_TABLE))
    np.testing.assert_allclose(rch(Rs), [RCH_TABLE[R] for R in Rs], atol=1e-12)


def test_rch_rejects_negative():
    with pytest.raises(PacBayesError) as exc:
        rch(-0.1)
    assert exc.value.code == "NEGATIVE_R"
    with pytest.raises(PacBayesError):
        rch(np.array([0.1, -0.2]))
    with pytest.raises(PacBayesError):
        rch(math.nan)


@pytest.mark.parametrize("R", [0.01, 0.5, 2.0])
def test_rch_round_trip_spot_values(R):
    assert ch_poly(rch(R)) == pytest.approx(R, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.0, max_value=5.0))
def test_rch_round_trip(R):
    assert ch_poly(rch(R)) == pytest.approx(R, abs=1e-9)


@pytest.mark.parametrize("R, expected", sorted(RCH_PRIME_TABLE.items()))
def test_rch_prime_oracle_values(R, expected):
    assert rch_prime(R) == pytest.approx(expected, rel=1e-9)


def test_rch_prime_matches_finite_differences():
    h = 1e-7
    for R in np.linspace(0.05, 5.0, 40):
        fd = (rch(R + h) - rch(R - h)) / (2.0 * h)
        assert rch_prime(R) == pytest.approx(fd, rel=1e-5)


def test_log_threshold_fixed_kinds():
    assert log_threshold(DistanceKind.CH, 50, EXACT) == pytest.approx(
        math.log(0.9334 * 50), abs=1e-15
    )
    assert log_threshold(DistanceKind.KL, 50, EXACT) == pytest.approx(
        math.log(2.0 * math.sqrt(50)), abs=1e-15
    )
    # the policy does not change the CH/KL constants
    assert log_threshold(DistanceKind.CH, 50, TWO_SQRT) == log_threshold(
        DistanceKind.CH, 50, EXACT
    )


def test_log_threshold_moment_kinds_defer_to_ik():
    assert log_threshold(DistanceKind.LIN, 10, EXACT) == ik_constant(
        DistanceKind.LIN, 10, EXACT
    ).log_value


def test_linear_bound_zero_risk_example():
    # uniform Q = P over two zero-risk classifiers: the bound is purely the
    # complexity term log(I/delta)/m
    profile = RiskProfile.from_risks([0.0, 0.0], sample_size=10)
    q = DiscreteDistribution.uniform(2)
    bv = evaluate_bound(BoundSpec(kind=DistanceKind.LIN, delta=0.1), q, profile)
    expected = math.log(3.431562219 / 0.1) / 10.0
    assert bv.value == pytest.approx(expected, rel=1e-7)
    assert bv.value == pytest.approx(0.3535, abs=3e-4)
    assert bv.gibbs_emp_risk == 0.0
    assert bv.kl_qp == 0.0
    assert not bv.saturated


def test_kl_bound_uniform_half_risk_example():
    profile = RiskProfile.from_risks([0.5] * 10, sample_size=100)
    q = DiscreteDistribution.uniform(10)
    bv = evaluate_bound(BoundSpec(kind=DistanceKind.KL, delta=0.05), q, profile)
    # KL[Q||P] = 0, so the level is ln(2 sqrt(100)/0.05)/100 = ln(400)/100
    assert bv.value == pytest.approx(0.66802391571354004, abs=1e-9)


def test_kl_bound_consistency_invariant():
    rng = np.random.default_rng(31)
    for _ in range(25):
        h = int(rng.integers(2, 12))
        m = int(rng.integers(20, 400))
        profile = RiskProfile.from_risks(rng.uniform(0.05, 0.7, h), sample_size=m)
        q = make_distribution(rng.exponential(1.0, h))
        bv = evaluate_bound(BoundSpec(kind=DistanceKind.KL, delta=0.05), q, profile)
        if bv.saturated:
            continue
        level = (bv.kl_qp + bv.log_ik - math.log(0.05)) / m
        assert binary_kl(bv.gibbs_emp_risk, bv.value) == pytest.approx(level, abs=1e-8)


def test_ch_bound_round_trip_invariant():
    rng = np.random.default_rng(32)
    for _ in range(25):
        h = int(rng.integers(2, 12))
        m = int(rng.integers(20, 400))
        profile = RiskProfile.from_risks(rng.uniform(0.0, 0.9, h), sample_size=m)
        q = make_distribution(rng.exponential(1.0, h))
        bv = evaluate_bound(BoundSpec(kind=DistanceKind.CH, delta=0.05), q, profile)
        R = (bv.kl_qp + math.log(0.9334 * m / 0.05)) / (2.0 * m - 1.0)
        assert ch_poly((bv.value - bv.gibbs_emp_risk) ** 2) == pytest.approx(R, abs=1e-8)


def test_pinsker_below_sq_fixed_q():
    profile = RiskProfile.from_risks([0.1, 0.3, 0.5], sample_size=80)
    q = make_distribution([0.6, 0.3, 0.1])
    b_p = evaluate_bound(BoundSpec(kind=DistanceKind.PINSKER, delta=0.1, constant_policy=TWO_SQRT), q, profile)
    b_sq = evaluate_bound(BoundSpec(kind=DistanceKind.SQ, delta=0.1, constant_policy=TWO_SQRT), q, profile)
    assert b_p.value <= b_sq.value


def test_dominance_chain_sample():
    # matched 2 sqrt(m) constants; the full 10^3-draw sweep runs in acceptance
    rng = np.random.default_rng(33)
    for _ in range(100):
        h = int(rng.integers(2, 15))
        m = int(rng.integers(5, 500))
        delta = float(rng.uniform(0.01, 0.5))
        profile = RiskProfile.from_risks(rng.uniform(0.0, 1.0, h), sample_size=m)
        q = make_distribution(rng.exponential(1.0, h))
        vals = {}
        for kind in (DistanceKind.KL, DistanceKind.PINSKER, DistanceKind.SQ):
            vals[kind] = evaluate_bound(
                BoundSpec(kind=kind, delta=delta, constant_policy=TWO_SQRT), q, profile
            ).value
        assert vals[DistanceKind.KL] <= vals[DistanceKind.PINSKER] + 1e-10
        assert vals[DistanceKind.PINSKER] <= vals[DistanceKind.SQ] + 1e-10


def test_monotone_in_kl_along_segment():
    # constant risks pin the Gibbs term; the bound must grow with KL[Q||P]
    profile = RiskProfile.from_risks([0.2] * 4, sample_size=100)
    prior = DiscreteDistribution.uniform(4)
    point = np.array([1.0, 0.0, 0.0, 0.0])
    for kind in DistanceKind:
        prev = -math.inf
        for t in np.linspace(0.0, 0.95, 12):
            q = make_distribution((1 - t) * prior.weights + t * point)
            bv = evaluate_bound(BoundSpec(kind=kind, delta=0.05), q, profile)
            assert bv.raw_value >= prev - 1e-12
            prev = bv.raw_value


def test_permutation_equivariance():
    rng = np.random.default_rng(34)
    risks = rng.uniform(0.0, 0.8, 6)
    weights = rng.exponential(1.0, 6)
    perm = rng.permutation(6)
    for kind in DistanceKind:
        spec = BoundSpec(kind=kind, delta=0.05)
        a = evaluate_bound(
            spec, make_distribution(weights), RiskProfile.from_risks(risks, sample_size=60)
        )
        b = evaluate_bound(
            spec,
            make_distribution(weights[perm]),
            RiskProfile.from_risks(risks[perm], sample_size=60),
        )
        assert a.value == pytest.approx(b.value, abs=1e-12)


def test_saturation_clamp_and_raw_value():
    # tiny m with a far-away posterior pushes the raw bound past 1
    profile = RiskProfile.from_risks([0.9] * 20, sample_size=5)
    q = make_distribution([1.0] + [1e-9] * 19)
    for kind in (DistanceKind.LIN, DistanceKind.SQ):
        bv = evaluate_bound(BoundSpec(kind=kind, delta=0.05), q, profile)
        assert bv.saturated
        assert bv.raw_value > 1.0
        assert bv.value == pytest.approx(1.0 - 1e-12, abs=1e-13)


def test_kl_bound_never_exceeds_one():
    profile = RiskProfile.from_risks([0.45, 0.9], sample_size=3)
    q = make_distribution([1e-8, 1.0])
    bv = evaluate_bound(BoundSpec(kind=DistanceKind.KL, delta=0.01), q, profile)
    assert bv.value < 1.0


def test_evaluate_bound_size_mismatch():
    profile = RiskProfile.from_risks([0.1, 0.2], sample_size=10)
    with pytest.raises(PacBayesError) as exc:
        evaluate_bound(
            BoundSpec(kind=DistanceKind.LIN, delta=0.05),
            DiscreteDistribution.uniform(3),
            profile,
        )
    assert exc.value.code == "SIZE_MISMATCH"


def test_evaluate_bound_custom_prior():
    profile = RiskProfile.from_risks([0.1, 0.2], sample_size=40)
    q = DiscreteDistribution.uniform(2)
    prior = make_distribution([0.9, 0.1])
    with_prior = evaluate_bound(BoundSpec(kind=DistanceKind.SQ, delta=0.05), q, profile, prior)
    uniform = evaluate_bound(BoundSpec(kind=DistanceKind.SQ, delta=0.05), q, profile)
    assert with_prior.kl_qp > 0.0
    assert uniform.kl_qp == pytest.approx(0.0, abs=1e-12)
    assert with_prior.value > uniform.value
