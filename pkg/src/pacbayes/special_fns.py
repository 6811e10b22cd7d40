"""Log-space special functions and the bound threshold constants.

The threshold constant for a distance phi at sample size m is the supremum
over l in [0,1] of the binomial moment sum

    sum_k C(m,k) l^k (1-l)^(m-k) exp(m * phi(k/m, l)),

evaluated here entirely in log-space so it stays finite for every m float64
can index (naive summation overflows past m ~ 1000).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import backend
from .core import ConstantPolicy, DistanceKind, PacBayesError

# Grid used to locate the supremum before local refinement.
_GRID_STEP = 0.001
_REFINE_WIDTH = 1e-6

_PHI_CODES = {DistanceKind.LIN: 0, DistanceKind.SQ: 1, DistanceKind.PINSKER: 2}


@dataclass(frozen=True)
class IkResult:
    """Log of a threshold constant and the l achieving it.

    ``argmax_l`` is NaN when the constant does not come from a maximization
    (the TWO_SQRT_M policy).
    """

    log_value: float
    argmax_l: float


def log_sum_exp(values) -> float:
    """log(sum(exp(values))) without overflow; -inf for an all-(-inf) input."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return -np.inf
    return backend.logsumexp(arr.ravel())


def log_binom(m: int, k: int) -> float:
    """log C(m, k) through log-gamma."""
    if m < 1:
        raise PacBayesError(f"m must be a positive integer, got {m!r}", code="BAD_SAMPLE_SIZE")
    if not (0 <= k <= m):
        raise PacBayesError(f"k={k!r} outside 0..{m}", code="K_OUT_OF_RANGE")
    return math.lgamma(m + 1.0) - math.lgamma(k + 1.0) - math.lgamma(m - k + 1.0)


def log_ik_at(kind: DistanceKind, m: int, l: float) -> float:
    """Log of the binomial moment sum at a fixed true risk l.

    Only the three distances with a finite closed sum are supported here; the
    KL and CH kinds use fixed constants handled by the bound evaluator.
    """
    kind = DistanceKind(kind)
    if kind not in _PHI_CODES:
        raise PacBayesError(f"no moment sum for kind {kind.value!r}", code="UNSUPPORTED_KIND")
    if m < 1:
        raise PacBayesError(f"m must be a positive integer, got {m!r}", code="BAD_SAMPLE_SIZE")
    if not (0.0 <= l <= 1.0):
        raise PacBayesError(f"l={l!r} outside [0, 1]", code="RISK_OUT_OF_RANGE")
    if l == 0.0 or l == 1.0:
        # Single surviving term k = l*m, and phi(l, l) = 0 for these kinds.
        return 0.0
    return float(backend.log_ik_grid(m, np.array([l]), _PHI_CODES[kind])[0])


def _golden_max(f, a: float, b: float, width: float):
    """Golden-section maximization of f on [a, b] down to the given width."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > width:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


@lru_cache(maxsize=512)
def ik_constant(kind: DistanceKind, m: int, policy: ConstantPolicy) -> IkResult:
    """Threshold constant for a bound kind under the given policy.

    EXACT_LOGSPACE (and its BEGIN_EXACT alias) maximizes the moment sum over
    l: directly at l = 0.5 for SQ (the sum is symmetric with a vanishing
    derivative there), by a 0.001 grid plus golden-section refinement for LIN
    and PINSKER.  TWO_SQRT_M returns log(2*sqrt(m)) for any kind.
    """
    kind = DistanceKind(kind)
    policy = ConstantPolicy(policy)
    if m < 1:
        raise PacBayesError(f"m must be a positive integer, got {m!r}", code="BAD_SAMPLE_SIZE")
    if kind is DistanceKind.CH:
        raise PacBayesError(
            "the CH kind uses a fixed 0.9334*m threshold, not a moment-sum policy",
            code="BAD_POLICY_FOR_KIND",
        )
    if policy is ConstantPolicy.TWO_SQRT_M:
        return IkResult(log_value=0.5 * math.log(m) + math.log(2.0), argmax_l=math.nan)
    if kind is DistanceKind.KL:
        raise PacBayesError(
            "the KL kind has no finite moment sum; use the two-sqrt-m policy",
            code="BAD_POLICY_FOR_KIND",
        )
    if kind is DistanceKind.SQ:
        return IkResult(log_value=log_ik_at(kind, m, 0.5), argmax_l=0.5)

    code = _PHI_CODES[kind]
    ls = np.linspace(0.0, 1.0, int(round(1.0 / _GRID_STEP)) + 1)
    vals = np.empty(ls.size)
    vals[0] = vals[-1] = 0.0
    vals[1:-1] = backend.log_ik_grid(m, ls[1:-1], code)
    best = int(np.argmax(vals))
    lo = max(0.0, ls[best] - _GRID_STEP)
    hi = min(1.0, ls[best] + _GRID_STEP)
    x, fx = _golden_max(lambda l: log_ik_at(kind, m, l), lo, hi, _REFINE_WIDTH)
    if fx >= vals[best]:
        return IkResult(log_value=float(fx), argmax_l=float(x))
    return IkResult(log_value=float(vals[best]), argmax_l=float(ls[best]))
