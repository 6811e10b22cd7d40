"""Inverting the binary kl divergence in its second argument.

For a fixed empirical risk phat and level x >= 0, kl(phat, r) = x has one root
on each side of phat.  Both are found by bisection on a log-spaced bracket,
which keeps full relative resolution where the curve is steep (r near 0 for
the lower root, 1 - r near 0 for the upper).  Levels beyond the bracket clamp
to the bracket edge and are flagged as saturated instead of failing.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import backend
from .core import PacBayesError

_MAX_HALVINGS = 200


class BoundSaturationWarning(UserWarning):
    """The requested level exceeds what the bracket can represent."""


@dataclass(frozen=True)
class KlRootRequest:
    """Inputs for a root query: kl(phat, r) = x.

    ``tol`` is on the residual |kl(phat, root) - x|; ``eps`` sets the bracket
    edges [eps, 1 - eps] and the saturation clamp.
    """

    phat: float
    x: float
    tol: float = 1e-12
    eps: float = 1e-12

    def __post_init__(self):
        if not (0.0 <= self.phat <= 1.0) or not np.isfinite(self.phat):
            raise PacBayesError(f"phat={self.phat!r} outside [0, 1]", code="RISK_OUT_OF_RANGE")
        if not np.isfinite(self.x) or self.x < 0.0:
            raise PacBayesError(f"level x={self.x!r} must be finite and >= 0", code="BAD_LEVEL")
        if not (0.0 < self.tol):
            raise PacBayesError("tol must be positive", code="BAD_CONFIG")
        if not (0.0 < self.eps < 0.5):
            raise PacBayesError("eps must lie in (0, 0.5)", code="BAD_CONFIG")


def kl_upper_root_batch(phats, xs, tol: float = 1e-12, eps: float = 1e-12):
    """Vectorized upper roots; returns (r, complement 1 - r, saturated).

    phat within eps of an endpoint uses the endpoint closed form: the root is
    1 - exp(-x) at phat = 0 and 1 at phat = 1.
    """
    phats = np.asarray(phats, dtype=np.float64)
    xs = np.asarray(xs, dtype=np.float64)
    r = np.empty(phats.shape)
    s = np.empty(phats.shape)
    sat = np.zeros(phats.shape, dtype=bool)

    zero_level = xs == 0.0
    at_one = (phats >= 1.0 - eps) & ~zero_level
    at_zero = (phats <= eps) & ~zero_level
    interior = ~(zero_level | at_one | at_zero)

    r[zero_level] = phats[zero_level]
    s[zero_level] = 1.0 - phats[zero_level]
    r[at_one] = 1.0
    s[at_one] = 0.0
    s[at_zero] = np.exp(-xs[at_zero])
    r[at_zero] = -np.expm1(-xs[at_zero])
    if interior.any():
        si, sati = backend.kl_upper_s_batch(phats[interior], xs[interior], tol, eps)
        s[interior] = si
        r[interior] = 1.0 - si
        sat[interior] = sati
    return r, s, sat


def kl_lower_root_batch(phats, xs, tol: float = 1e-12, eps: float = 1e-12):
    """Vectorized lower roots; returns (r, saturated)."""
    phats = np.asarray(phats, dtype=np.float64)
    xs = np.asarray(xs, dtype=np.float64)
    r = np.empty(phats.shape)
    sat = np.zeros(phats.shape, dtype=bool)

    zero_level = xs == 0.0
    at_zero = (phats <= eps) & ~zero_level
    at_one = (phats >= 1.0 - eps) & ~zero_level
    interior = ~(zero_level | at_zero | at_one)

    r[zero_level] = phats[zero_level]
    r[at_zero] = 0.0
    r[at_one] = np.exp(-xs[at_one])
    if interior.any():
        ri, sati = backend.kl_lower_batch(phats[interior], xs[interior], tol, eps)
        r[interior] = ri
        sat[interior] = sati
    return r, sat


def _warn_saturated(req: KlRootRequest, side: str):
    warnings.warn(
        f"kl {side} root saturated: level {req.x} exceeds the bracket at "
        f"phat={req.phat}, eps={req.eps} (code BOUND_SATURATED)",
        BoundSaturationWarning,
        stacklevel=3,
    )


def _as_request(phat, x, tol, eps) -> KlRootRequest:
    # scalar ops take either a prebuilt request or plain (phat, x) floats
    if isinstance(phat, KlRootRequest):
        return phat
    if x is None:
        raise PacBayesError("x is required when phat is a float", code="BAD_CONFIG")
    return KlRootRequest(phat=float(phat), x=float(x), tol=tol, eps=eps)


def kl_upper_root_status(
    phat, x=None, tol: float = 1e-12, eps: float = 1e-12
) -> tuple[float, float, bool]:
    """(root, complement 1 - root, saturated flag) for the upper root."""
    req = _as_request(phat, x, tol, eps)
    r, s, sat = kl_upper_root_batch(
        np.array([req.phat]), np.array([req.x]), req.tol, req.eps
    )
    return float(r[0]), float(s[0]), bool(sat[0])


def kl_upper_root(phat, x=None, tol: float = 1e-12, eps: float = 1e-12) -> float:
    """Largest r with kl(phat, r) = x; warns and clamps to 1 - eps past it."""
    req = _as_request(phat, x, tol, eps)
    r, _, sat = kl_upper_root_status(req)
    if sat:
        _warn_saturated(req, "upper")
    return r


def kl_upper_root_complement(phat, x=None, tol: float = 1e-12, eps: float = 1e-12) -> float:
    """1 - kl_upper_root(phat, x) at full relative precision.

    For roots within ~1e-7 of 1 the plain float return of kl_upper_root loses
    residual accuracy to the absolute spacing of doubles near 1; this form
    does not.
    """
    req = _as_request(phat, x, tol, eps)
    _, s, sat = kl_upper_root_status(req)
    if sat:
        _warn_saturated(req, "upper")
    return s


def kl_lower_root(phat, x=None, tol: float = 1e-12, eps: float = 1e-12) -> float:
    """Smallest r with kl(phat, r) = x; warns and clamps to eps past it."""
    req = _as_request(phat, x, tol, eps)
    r, sat = kl_lower_root_batch(np.array([req.phat]), np.array([req.x]), req.tol, req.eps)
    if sat[0]:
        _warn_saturated(req, "lower")
    return float(r[0])


def binary_kl_from_complement(phat: float, s: float) -> float:
    """kl(phat, 1 - s) computed from the complement s for near-one accuracy."""
    if phat == 0.0:
        return -math.log(s) if s > 0.0 else math.inf
    if phat == 1.0:
        return -math.log1p(-s)
    return phat * (math.log(phat) - math.log1p(-s)) + (1.0 - phat) * (
        math.log1p(-phat) - math.log(s)
    )
