"""The five distance functions phi(lhat, l) between empirical and true risk."""

from __future__ import annotations

import math

from .core import DistanceKind, PacBayesError


def binary_kl(p: float, q: float) -> float:
    """kl(p, q) for Bernoulli parameters, with the usual edge conventions.

    Zero-probability terms are dropped: kl(0, q) = -log(1-q) and
    kl(1, q) = -log(q); kl(p, p) = 0 including at the endpoints.  A boundary q
    against an interior p has no finite value and raises instead of returning
    inf silently.
    """
    if not (0.0 <= p <= 1.0) or not (0.0 <= q <= 1.0):
        raise PacBayesError(f"kl arguments ({p!r}, {q!r}) outside [0, 1]", code="RISK_OUT_OF_RANGE")
    if p == q:
        return 0.0
    if p == 0.0:
        return math.inf if q == 1.0 else -math.log1p(-q)
    if p == 1.0:
        return math.inf if q == 0.0 else -math.log(q)
    if q == 0.0 or q == 1.0:
        raise PacBayesError(
            f"kl({p!r}, {q!r}) is undefined: boundary second argument with interior first",
            code="KL_UNDEFINED",
        )
    return p * math.log(p / q) + (1.0 - p) * math.log((1.0 - p) / (1.0 - q))


def phi_eval(kind: DistanceKind, lhat: float, l: float) -> float:
    """Evaluate the distance of the given kind at (lhat, l)."""
    kind = DistanceKind(kind)
    if not (0.0 <= lhat <= 1.0) or not (0.0 <= l <= 1.0):
        raise PacBayesError(
            f"phi arguments ({lhat!r}, {l!r}) outside [0, 1]", code="RISK_OUT_OF_RANGE"
        )
    if kind is DistanceKind.LIN:
        return l - lhat
    if kind is DistanceKind.SQ:
        return (l - lhat) ** 2
    if kind is DistanceKind.PINSKER:
        return 2.0 * (l - lhat) ** 2
    if kind is DistanceKind.CH:
        d2 = (l - lhat) ** 2
        return d2 + (2.0 / 9.0) * d2 ** 2 + (16.0 / 135.0) * d2 ** 3
    return binary_kl(lhat, l)
