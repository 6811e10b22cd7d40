"""Assembling bound values from a posterior, a prior, and a risk profile.

Every kind shares the same skeleton: the Gibbs empirical risk plus a
complexity radius built from KL[Q||P] and a log threshold constant.  What
differs is how the radius maps to true-risk units: identity (LIN), square
root with sample-size scaling (SQ, PINSKER), the inverse of a degree-six
polynomial distance (CH), or inverting the binary kl itself (KL).
"""

from __future__ import annotations

import math
from typing import Optional, Union

import numpy as np

from .core import (
    BoundSpec,
    BoundValue,
    ConstantPolicy,
    DiscreteDistribution,
    DistanceKind,
    PacBayesError,
    RiskProfile,
    validate_profile,
)
from .klinverse import kl_upper_root_batch
from .special_fns import ik_constant

# Reporting clamp: a true-risk bound at or above 1 is vacuous.
SATURATION_CEILING = 1.0 - 1e-12

# Fixed threshold factor for the CH kind (the moment-sum policy does not apply).
CH_THRESHOLD_FACTOR = 0.9334


def _kl_div_arrays(q_weights: np.ndarray, q_logw: np.ndarray, ref_logw: np.ndarray) -> float:
    mask = q_logw > -np.inf
    if np.any(ref_logw[mask] == -np.inf):
        raise PacBayesError(
            "posterior puts mass where the prior has none", code="NOT_ABS_CONTINUOUS"
        )
    val = float(np.dot(q_weights[mask], q_logw[mask] - ref_logw[mask]))
    return max(0.0, val)


def kl_divergence(q: DiscreteDistribution, p: DiscreteDistribution) -> float:
    """KL[Q||P] with 0*log(0/p) = 0; >= 0 exactly (rounding is clamped)."""
    if q.size != p.size:
        raise PacBayesError(
            f"distribution sizes differ: {q.size} vs {p.size}", code="SIZE_MISMATCH"
        )
    return _kl_div_arrays(q.weights, q.log_weights, p.log_weights)


def rch(R: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Positive root, in y = delta^2, of y + (2/9) y^2 + (16/135) y^3 = R.

    Closed form via the cubic formula with signed cube roots; exact zero at
    R = 0 up to rounding.
    """
    arr = np.asarray(R, dtype=np.float64)
    if np.any(arr < 0.0) or not np.all(np.isfinite(arr)):
        raise PacBayesError(f"level must be finite and >= 0, got {R!r}", code="NEGATIVE_R")
    a = 1225.0 / 512.0 + (135.0 / 32.0) * arr
    disc = 729.0 * arr ** 2 + (6615.0 / 8.0) * arr + 208980.0 / 256.0
    b = (5.0 / 32.0) * np.sqrt(disc)
    y = -0.625 + np.cbrt(a + b) + np.cbrt(a - b)
    y = np.maximum(y, 0.0)
    return float(y) if np.ndim(R) == 0 else y


def rch_prime(R: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """d rch / dR, by implicit differentiation of the defining polynomial."""
    y = np.asarray(rch(R))
    out = 1.0 / (1.0 + (4.0 / 9.0) * y + (16.0 / 45.0) * y ** 2)
    return float(out) if np.ndim(R) == 0 else out


def log_threshold(kind: DistanceKind, m: int, policy: ConstantPolicy) -> float:
    """log of the threshold constant a bound of this kind uses at size m."""
    kind = DistanceKind(kind)
    if kind is DistanceKind.CH:
        return math.log(CH_THRESHOLD_FACTOR * m)
    if kind is DistanceKind.KL:
        return math.log(2.0) + 0.5 * math.log(m)
    return ik_constant(kind, m, policy).log_value


def bound_raw_batch(
    kind: DistanceKind,
    gibbs: np.ndarray,
    kl_qp: np.ndarray,
    m: int,
    delta: float,
    policy: ConstantPolicy,
) -> tuple[np.ndarray, float, np.ndarray]:
    """Unclamped bound values for arrays of (gibbs, KL) pairs.

    Returns (raw values, log threshold constant, saturation flags from the kl
    root solver; all-False for the closed-form kinds).
    """
    kind = DistanceKind(kind)
    gibbs = np.asarray(gibbs, dtype=np.float64)
    kl_qp = np.asarray(kl_qp, dtype=np.float64)
    log_ik = log_threshold(kind, m, policy)
    level = kl_qp + log_ik - math.log(delta)
    sat = np.zeros(gibbs.shape, dtype=bool)
    if kind is DistanceKind.LIN:
        raw = gibbs + level / m
    elif kind is DistanceKind.SQ:
        raw = gibbs + np.sqrt(level / m)
    elif kind is DistanceKind.PINSKER:
        raw = gibbs + np.sqrt(level / (2.0 * m))
    elif kind is DistanceKind.CH:
        # level < 0 only possible at m = 1 with delta near 1; an empty
        # feasible set means a zero radius.
        R = np.maximum(level / (2.0 * m - 1.0), 0.0)
        raw = gibbs + np.sqrt(rch(R))
    else:
        raw, _, sat = kl_upper_root_batch(gibbs, level / m)
    return raw, log_ik, sat


def bound_value_from_stats(
    kind: DistanceKind,
    gibbs: float,
    kl_qp: float,
    m: int,
    delta: float,
    policy: ConstantPolicy,
) -> BoundValue:
    """Assemble a clamped BoundValue from already-computed (gibbs, KL) stats."""
    raw, log_ik, sat = bound_raw_batch(
        kind, np.array([gibbs]), np.array([kl_qp]), m, delta, policy
    )
    raw_value = float(raw[0])
    ceiling = max(SATURATION_CEILING, gibbs)
    value = min(raw_value, ceiling)
    return BoundValue(
        value=value,
        gibbs_emp_risk=gibbs,
        kl_qp=kl_qp,
        log_ik=log_ik,
        raw_value=raw_value,
        saturated=bool(sat[0]) or raw_value > ceiling,
    )


def evaluate_bound(
    spec: BoundSpec,
    q: DiscreteDistribution,
    profile: RiskProfile,
    prior: Optional[DiscreteDistribution] = None,
) -> BoundValue:
    """Evaluate the bound of spec.kind at posterior q.

    The prior defaults to uniform.  The reported value is clamped at
    max(1 - 1e-12, gibbs) with ``saturated`` set when the clamp (or the kl
    root bracket) was hit; ``raw_value`` keeps the unclamped number.
    """
    validate_profile(profile)
    if q.size != len(profile):
        raise PacBayesError(
            f"posterior has {q.size} atoms for {len(profile)} classifiers", code="SIZE_MISMATCH"
        )
    if prior is None:
        prior = DiscreteDistribution.uniform(len(profile))
    gibbs = float(np.dot(q.weights, profile.risks))
    kl_qp = kl_divergence(q, prior)
    return bound_value_from_stats(
        spec.kind, gibbs, kl_qp, profile.sample_size, spec.delta, spec.constant_policy
    )
