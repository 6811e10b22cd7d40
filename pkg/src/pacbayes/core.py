"""Domain types shared by every module: risk profiles, distributions, configs.

All weight handling is in log-space so that posteriors with mass ratios far
beyond float range (e.g. exp(-2000)) keep exact relative structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from . import backend

# Interior-simplex floor: weights at or above this count as strictly positive.
POSITIVITY_EPS = 1e-15

LOG_POSITIVITY_EPS = float(np.log(POSITIVITY_EPS))


class PacBayesError(ValueError):
    """Domain error with a stable machine-readable ``code``."""

    def __init__(self, message: str, code: str = "GENERIC"):
        super().__init__(message)
        self.code = code


class DistanceKind(str, Enum):
    """Distance functions phi(lhat, l) a bound can be built from."""

    LIN = "lin"
    SQ = "sq"
    PINSKER = "pinsker"
    CH = "ch"
    KL = "kl"


class ConstantPolicy(str, Enum):
    """How the threshold constant inside the bound is obtained.

    EXACT_LOGSPACE evaluates the supremum of the binomial moment sum in
    log-space.  TWO_SQRT_M uses the universal 2*sqrt(m).  BEGIN_EXACT is an
    alias of EXACT_LOGSPACE kept so reports can label runs that asked for the
    exact constant explicitly.
    """

    EXACT_LOGSPACE = "exact"
    TWO_SQRT_M = "two-sqrt-m"
    BEGIN_EXACT = "begin-exact"


class InitScheme(str, Enum):
    """Initialization of the fixed-point iteration."""

    PRIOR = "prior"
    RANDOM = "random"
    GIVEN = "given"


@dataclass(frozen=True)
class ClassifierEntry:
    """One classifier: its empirical risk and optional held-out error."""

    id: int
    emp_risk: float
    param_value: Optional[float] = None
    test_err: Optional[float] = None


@dataclass(frozen=True)
class RiskProfile:
    """Finite classifier set with empirical risks on m training samples."""

    entries: tuple[ClassifierEntry, ...]
    sample_size: int

    def __len__(self) -> int:
        return len(self.entries)

    @cached_property
    def risks(self) -> np.ndarray:
        out = np.array([e.emp_risk for e in self.entries], dtype=np.float64)
        out.flags.writeable = False
        return out

    @cached_property
    def test_errors(self) -> Optional[np.ndarray]:
        if any(e.test_err is None for e in self.entries):
            return None
        out = np.array([e.test_err for e in self.entries], dtype=np.float64)
        out.flags.writeable = False
        return out

    @classmethod
    def from_risks(
        cls,
        risks: Sequence[float],
        sample_size: int,
        test_errors: Optional[Sequence[float]] = None,
        param_values: Optional[Sequence[float]] = None,
    ) -> "RiskProfile":
        entries = []
        for i, r in enumerate(risks):
            entries.append(
                ClassifierEntry(
                    id=i,
                    emp_risk=float(r),
                    param_value=None if param_values is None else float(param_values[i]),
                    test_err=None if test_errors is None else float(test_errors[i]),
                )
            )
        return validate_profile(cls(entries=tuple(entries), sample_size=int(sample_size)))


def validate_profile(profile: RiskProfile) -> RiskProfile:
    """Check ranges and well-formedness; returns the profile unchanged."""
    if len(profile.entries) == 0:
        raise PacBayesError("profile has no classifiers", code="EMPTY_PROFILE")
    if not isinstance(profile.sample_size, (int, np.integer)) or profile.sample_size < 1:
        raise PacBayesError(
            f"sample_size must be a positive integer, got {profile.sample_size!r}",
            code="BAD_SAMPLE_SIZE",
        )
    seen = set()
    for e in profile.entries:
        if e.id in seen:
            raise PacBayesError(f"duplicate classifier id {e.id}", code="DUPLICATE_ID")
        seen.add(e.id)
        if not (0.0 <= e.emp_risk <= 1.0) or not np.isfinite(e.emp_risk):
            raise PacBayesError(
                f"emp_risk {e.emp_risk!r} outside [0, 1] at classifier {e.id}",
                code="RISK_OUT_OF_RANGE",
            )
        if e.test_err is not None and (
            not np.isfinite(e.test_err) or not (0.0 <= e.test_err <= 1.0)
        ):
            raise PacBayesError(
                f"test_err {e.test_err!r} outside [0, 1] at classifier {e.id}",
                code="RISK_OUT_OF_RANGE",
            )
    return profile


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability vector over classifiers, stored as log-weights.

    The stored vector is always normalized: logsumexp(log_weights) == 0 up to
    float rounding, so sum(weights) is 1 within 1e-12.  Zero-mass entries are
    kept as -inf log-weights rather than dropped.
    """

    log_weights: np.ndarray

    def __post_init__(self):
        lw = np.asarray(self.log_weights, dtype=np.float64)
        if lw.ndim != 1 or lw.size == 0:
            raise PacBayesError("log_weights must be a non-empty 1-d array", code="EMPTY_PROFILE")
        object.__setattr__(self, "log_weights", lw)
        lw.flags.writeable = False

    @classmethod
    def from_log_weights(cls, log_weights: Sequence[float]) -> "DiscreteDistribution":
        lw = np.asarray(log_weights, dtype=np.float64)
        if np.isnan(lw).any() or np.any(lw == np.inf):
            raise PacBayesError("log_weights must be in [-inf, inf)", code="NEGATIVE_WEIGHT")
        total = backend.logsumexp(lw)
        if total == -np.inf:
            raise PacBayesError("all weights are zero", code="ALL_ZERO")
        return cls(log_weights=lw - total)

    @classmethod
    def uniform(cls, n: int) -> "DiscreteDistribution":
        if n < 1:
            raise PacBayesError("need at least one atom", code="EMPTY_PROFILE")
        return cls(log_weights=np.full(n, -np.log(n)))

    @property
    def size(self) -> int:
        return int(self.log_weights.size)

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.exp(self.log_weights)
        w.flags.writeable = False
        return w

    @property
    def is_strictly_positive(self) -> bool:
        return bool(np.all(self.log_weights >= LOG_POSITIVITY_EPS))

    def support_size(self, floor: float = POSITIVITY_EPS) -> int:
        return int(np.count_nonzero(self.weights > floor))


def make_distribution(weights: Sequence[float]) -> DiscreteDistribution:
    """Normalize non-negative weights into a DiscreteDistribution."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise PacBayesError("weights must be a non-empty 1-d array", code="EMPTY_PROFILE")
    if np.isnan(w).any() or (w < 0).any():
        bad = int(np.argmax(np.isnan(w) | (w < 0)))
        raise PacBayesError(f"negative weight {w[bad]!r} at index {bad}", code="NEGATIVE_WEIGHT")
    if not (w > 0).any():
        raise PacBayesError("all weights are zero", code="ALL_ZERO")
    with np.errstate(divide="ignore"):
        lw = np.log(w)
    return DiscreteDistribution.from_log_weights(lw)


@dataclass(frozen=True)
class BoundSpec:
    """Which bound to evaluate: distance kind, confidence delta, constant policy.

    The CH kind always uses the fixed threshold 0.9334*m and the KL kind always
    uses 2*sqrt(m); the policy only selects the constant for LIN/SQ/PINSKER.
    """

    kind: DistanceKind
    delta: float
    constant_policy: ConstantPolicy = ConstantPolicy.EXACT_LOGSPACE

    def __post_init__(self):
        if not isinstance(self.kind, DistanceKind):
            object.__setattr__(self, "kind", DistanceKind(self.kind))
        if not isinstance(self.constant_policy, ConstantPolicy):
            object.__setattr__(self, "constant_policy", ConstantPolicy(self.constant_policy))
        if not (0.0 < self.delta < 1.0):
            raise PacBayesError(
                f"delta must lie strictly inside (0, 1), got {self.delta!r}",
                code="BAD_DELTA",
            )


@dataclass(frozen=True)
class FixedPointConfig:
    """Knobs for the fixed-point solver.

    ``damping`` mixes (1-d)*q + d*T(q); it halves automatically (floor 0.125)
    when the step norm grows three iterations in a row.  ``positivity_floor``
    is applied to iterate log-weights so subsequent steps stay interior.
    """

    tol: float = 1e-10
    max_iters: int = 10000
    damping: float = 1.0
    init: InitScheme = InitScheme.PRIOR
    seed: Optional[int] = None
    init_distribution: Optional[DiscreteDistribution] = None
    positivity_floor: float = POSITIVITY_EPS

    def __post_init__(self):
        if not isinstance(self.init, InitScheme):
            object.__setattr__(self, "init", InitScheme(self.init))
        if not (self.tol > 0.0):
            raise PacBayesError("tol must be positive", code="BAD_CONFIG")
        if self.max_iters < 1:
            raise PacBayesError("max_iters must be at least 1", code="BAD_CONFIG")
        if not (0.0 < self.damping <= 1.0):
            raise PacBayesError("damping must lie in (0, 1]", code="BAD_CONFIG")
        if self.init is InitScheme.RANDOM and self.seed is None:
            raise PacBayesError("random init needs a seed", code="BAD_CONFIG")
        if self.init is InitScheme.GIVEN and self.init_distribution is None:
            raise PacBayesError("given init needs init_distribution", code="BAD_CONFIG")
        if not (0.0 < self.positivity_floor < 1.0):
            raise PacBayesError("positivity_floor must lie in (0, 1)", code="BAD_CONFIG")


@dataclass(frozen=True)
class BoundValue:
    """Evaluated bound plus the pieces it was assembled from.

    ``value`` is clamped to max(1 - 1e-12, gibbs_emp_risk) with ``saturated``
    set when the clamp was active (a true-risk bound at or above 1 is vacuous);
    ``raw_value`` keeps the unclamped number so optimizers can compare freely.
    ``log_ik`` is the log of the threshold constant that was used.
    """

    value: float
    gibbs_emp_risk: float
    kl_qp: float
    log_ik: float
    raw_value: float
    saturated: bool = False


@dataclass(frozen=True)
class PosteriorResult:
    """Outcome of a posterior optimization."""

    posterior: DiscreteDistribution
    bound: float
    iterations: int
    residual: float
    converged: bool
    support_size: int
    detail: Optional[BoundValue] = None
    diagnostics: dict = field(default_factory=dict)
