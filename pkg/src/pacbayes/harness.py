"""Synthetic profiles and the five-way comparison report."""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .core import (
    ConstantPolicy,
    DiscreteDistribution,
    DistanceKind,
    FixedPointConfig,
    PacBayesError,
    PosteriorResult,
    RiskProfile,
    validate_profile,
)
from .optimize import fp_solve, optimal_posterior_linear

# Seedable generator identity, recorded in generated-profile metadata so runs
# can state exactly which bit stream produced them.
RNG_ALGORITHM = "numpy:PCG64"

REPORT_KIND_ORDER = (
    DistanceKind.LIN,
    DistanceKind.SQ,
    DistanceKind.PINSKER,
    DistanceKind.CH,
    DistanceKind.KL,
)


class ProfileShape(str, Enum):
    """Latent true-risk regime of a generated profile."""

    SEPARABLE = "separable"
    MODERATE = "moderate"
    NOISY = "noisy"


# (low, high, jitter fraction of the band width)
_BANDS = {
    ProfileShape.SEPARABLE: (0.0, 0.02, 0.25),
    ProfileShape.MODERATE: (0.05, 0.25, 0.25),
    ProfileShape.NOISY: (0.20, 0.45, 0.50),
}


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for a synthetic profile: h classifiers, v training samples."""

    h: int
    v: int
    shape: ProfileShape
    seed: int
    test_size: Optional[int] = None

    def __post_init__(self):
        if not isinstance(self.shape, ProfileShape):
            object.__setattr__(self, "shape", ProfileShape(self.shape))
        if self.h < 1 or self.v < 1 or (self.test_size is not None and self.test_size < 1):
            raise PacBayesError("h, v and test_size must be positive", code="BAD_CONFIG")


def latent_risk_curve(spec: GeneratorSpec) -> np.ndarray:
    """True risks underlying a generated profile: an increasing curve across
    the parameter grid with shape-scaled jitter, clipped to the shape's band.

    Deterministic per seed and independent of the binomial draws, so tests can
    recompute the latent curve a profile was sampled from.
    """
    lo, hi, jitter = _BANDS[spec.shape]
    rng = np.random.default_rng([spec.seed, 0])
    t = np.linspace(0.0, 1.0, spec.h) if spec.h > 1 else np.zeros(1)
    width = hi - lo
    z = rng.standard_normal(spec.h)
    return np.clip(lo + width * t + width * jitter * z, lo, hi)


def generate_profile(spec: GeneratorSpec) -> RiskProfile:
    """Sample a profile: emp_risk_i ~ Binomial(v, l_i)/v on the latent curve.

    Risks are drawn independently per classifier (one binomial per atom, not a
    shared sample), and test errors, when test_size is set, use an independent
    binomial of the same latent risk.
    """
    latent = latent_risk_curve(spec)
    rng = np.random.default_rng([spec.seed, 1])
    emp = rng.binomial(spec.v, latent) / spec.v
    test = None
    if spec.test_size is not None:
        test = rng.binomial(spec.test_size, latent) / spec.test_size
    params = np.round(np.linspace(0.1, 20.0, spec.h), 6) if spec.h > 1 else np.array([0.1])
    return RiskProfile.from_risks(
        emp, sample_size=spec.v, test_errors=test, param_values=params
    )


def gibbs_test_error(q: DiscreteDistribution, profile: RiskProfile) -> float:
    """Posterior-averaged held-out error."""
    if profile.test_errors is None:
        raise PacBayesError("profile carries no test errors", code="MISSING_TEST_ERRORS")
    if q.size != len(profile):
        raise PacBayesError(
            f"posterior has {q.size} atoms for {len(profile)} classifiers", code="SIZE_MISMATCH"
        )
    return float(np.dot(q.weights, profile.test_errors))


def hhi(q: DiscreteDistribution) -> float:
    """Concentration of the posterior: sum of squared weights, in [1/H, 1]."""
    return float(np.dot(q.weights, q.weights))


@dataclass(frozen=True)
class ReportRow:
    """Outcome of one bound kind; bound is None only when error is set."""

    kind: DistanceKind
    bound: Optional[float]
    gibbs_emp_risk: Optional[float]
    gibbs_test_error: Optional[float]
    hhi: Optional[float]
    support_size: Optional[int]
    iterations: Optional[int]
    residual: Optional[float]
    converged: Optional[bool]
    wall_time: float
    error: Optional[str] = None


@dataclass(frozen=True)
class ComparisonReport:
    """Five rows, one per kind, in LIN/SQ/PINSKER/CH/KL order."""

    rows: tuple[ReportRow, ...]
    delta: float
    sample_size: int
    constant_policy: ConstantPolicy


def _one_row(kind, profile, prior, delta, config, policy) -> ReportRow:
    start = time.perf_counter()
    try:
        if kind is DistanceKind.LIN:
            res: PosteriorResult = optimal_posterior_linear(profile, prior, delta, policy)
        else:
            res = fp_solve(kind, profile, prior, delta, config, policy)
        test_err = None
        if profile.test_errors is not None:
            test_err = gibbs_test_error(res.posterior, profile)
        return ReportRow(
            kind=kind,
            bound=res.bound,
            gibbs_emp_risk=res.detail.gibbs_emp_risk,
            gibbs_test_error=test_err,
            hhi=hhi(res.posterior),
            support_size=res.support_size,
            iterations=res.iterations,
            residual=res.residual,
            converged=res.converged,
            wall_time=time.perf_counter() - start,
        )
    except PacBayesError as exc:
        return ReportRow(
            kind=kind,
            bound=None,
            gibbs_emp_risk=None,
            gibbs_test_error=None,
            hhi=None,
            support_size=None,
            iterations=None,
            residual=None,
            converged=None,
            wall_time=time.perf_counter() - start,
            error=exc.code,
        )


def compare_all(
    profile: RiskProfile,
    delta: float,
    config: Optional[FixedPointConfig] = None,
    policy: ConstantPolicy = ConstantPolicy.EXACT_LOGSPACE,
) -> ComparisonReport:
    """Optimize every kind under a uniform prior and report all five rows.

    A failing kind becomes a row with an error label; the report itself never
    aborts.  PACBAYES_THREADS caps the worker pool (default: serial).
    """
    validate_profile(profile)
    if config is None:
        config = FixedPointConfig()
    prior = DiscreteDistribution.uniform(len(profile))
    threads = int(os.environ.get("PACBAYES_THREADS", "1") or "1")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=min(threads, len(REPORT_KIND_ORDER))) as pool:
            rows = tuple(
                pool.map(
                    lambda k: _one_row(k, profile, prior, delta, config, policy),
                    REPORT_KIND_ORDER,
                )
            )
    else:
        rows = tuple(
            _one_row(k, profile, prior, delta, config, policy) for k in REPORT_KIND_ORDER
        )
    return ComparisonReport(
        rows=rows,
        delta=delta,
        sample_size=profile.sample_size,
        constant_policy=ConstantPolicy(policy),
    )
