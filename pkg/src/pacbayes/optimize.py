"""Posterior optimization for each bound kind.

The linear kind has an exact softmax solution.  The other kinds share one
fixed-point skeleton: every stationarity condition rearranges to

    q_i  proportional to  p_i * exp(-c(q) * lhat_i)

with a kind-specific scalar coefficient c(q) >= 0, so one step is a softmax
over log-prior minus scaled risks.  The subset (prefix) search reuses the same
machinery with an unnormalized log-reference so the complexity term keeps the
full-set offset.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from . import backend
from .bounds import (
    _kl_div_arrays,
    bound_raw_batch,
    bound_value_from_stats,
    rch,
)
from .core import (
    DiscreteDistribution,
    DistanceKind,
    ConstantPolicy,
    FixedPointConfig,
    InitScheme,
    PacBayesError,
    PosteriorResult,
    RiskProfile,
    validate_profile,
)
from .klinverse import kl_upper_root_batch
from .bounds import log_threshold

_FP_KINDS = (DistanceKind.SQ, DistanceKind.PINSKER, DistanceKind.CH, DistanceKind.KL)

# Gibbs risk floor/ceiling inside the KL-kind map; mixed zero/one profiles are
# pulled off the boundary so the map coefficient stays finite.
_LHAT_FLOOR = 1e-12

_DAMPING_FLOOR = 0.125
_GRID_STEPS = (0.01, 0.001)
_MAX_ORACLE_SIZE = 4


def _require_finite_logs(dist: DiscreteDistribution, who: str):
    if np.any(dist.log_weights == -np.inf):
        raise PacBayesError(f"{who} must be strictly positive", code="NOT_STRICTLY_POSITIVE")


def _softmax_floored(scores: np.ndarray, floor_log: float):
    lw = scores - backend.logsumexp(scores)
    lw = np.maximum(lw, floor_log)
    lw = lw - backend.logsumexp(lw)
    return np.exp(lw), lw


def _fp_step_arrays(
    kind: DistanceKind,
    q_w: np.ndarray,
    q_lw: np.ndarray,
    risks: np.ndarray,
    ref_lw: np.ndarray,
    m: int,
    delta: float,
    log_ik: float,
    floor_log: float,
):
    """One application of the fixed-point map; returns (weights, logs, info)."""
    info = {}
    if np.all(risks == risks[0]):
        # Constant risks: every map collapses to the (normalized) reference.
        w, lw = _softmax_floored(ref_lw, floor_log)
        return w, lw, info

    level = _kl_div_arrays(q_w, q_lw, ref_lw) + log_ik - math.log(delta)
    if kind is DistanceKind.SQ:
        c = 2.0 * math.sqrt(m * level)
    elif kind is DistanceKind.PINSKER:
        c = 2.0 * math.sqrt(2.0 * m * level)
    elif kind is DistanceKind.CH:
        R = max(level, 0.0) / (2.0 * m - 1.0)
        y = rch(R)
        # 2*sqrt(y)/rch'(R), with the derivative from the defining polynomial
        c = (2.0 * m - 1.0) * 2.0 * math.sqrt(y) * (
            1.0 + (4.0 / 9.0) * y + (16.0 / 45.0) * y * y
        )
    else:
        lhat = float(np.dot(q_w, risks))
        if lhat > 1.0 - _LHAT_FLOOR:
            raise PacBayesError(
                f"Gibbs empirical risk {lhat} too close to 1 for the kl map",
                code="KL_DEGENERATE",
            )
        if lhat < _LHAT_FLOOR:
            lhat = _LHAT_FLOOR
            info["lhat_floored"] = True
        r, s, sat = kl_upper_root_batch(np.array([lhat]), np.array([level / m]))
        if sat[0]:
            info["kl_root_saturated"] = True
        # g = log((1-r) lhat / (r (1-lhat))) <= 0, via the complement of r
        g = (math.log(s[0]) + math.log(lhat)) - (math.log1p(-s[0]) + math.log1p(-lhat))
        c = -m * g
    w, lw = _softmax_floored(ref_lw - c * risks, floor_log)
    return w, lw, info


def _init_weights(config: FixedPointConfig, ref_lw: np.ndarray, n: int):
    if config.init is InitScheme.PRIOR:
        lw = ref_lw - backend.logsumexp(ref_lw)
        return np.exp(lw), lw
    if config.init is InitScheme.RANDOM:
        draws = np.random.default_rng(config.seed).exponential(1.0, n)
        w = draws / draws.sum()
        return w, np.log(w)
    q0 = config.init_distribution
    if q0.size != n:
        raise PacBayesError(
            f"init distribution has {q0.size} atoms, expected {n}", code="SIZE_MISMATCH"
        )
    _require_finite_logs(q0, "init distribution")
    return q0.weights.copy(), q0.log_weights.copy()


def _fp_solve_core(
    kind: DistanceKind,
    risks: np.ndarray,
    m: int,
    ref_lw: np.ndarray,
    delta: float,
    config: FixedPointConfig,
    policy: ConstantPolicy,
):
    log_ik = log_threshold(kind, m, policy)
    floor_log = math.log(config.positivity_floor)
    q_w, q_lw = _init_weights(config, ref_lw, risks.size)

    damping = config.damping
    streak = 0
    prev_step = math.inf
    residual = math.inf
    converged = False
    iterations = 0
    info_acc: dict = {}

    for it in range(1, config.max_iters + 1):
        t_w, t_lw, info = _fp_step_arrays(
            kind, q_w, q_lw, risks, ref_lw, m, delta, log_ik, floor_log
        )
        info_acc.update(info)
        iterations = it
        residual = float(np.max(np.abs(q_w - t_w)))
        if residual <= config.tol:
            converged = True
            break
        if it == config.max_iters:
            break
        if damping == 1.0:
            q_w, q_lw = t_w, t_lw
            step = residual
        else:
            q_w = (1.0 - damping) * q_w + damping * t_w
            q_lw = np.log(q_w)
            step = damping * residual
        if step > prev_step:
            streak += 1
            if streak >= 3:
                damping = max(0.5 * damping, _DAMPING_FLOOR)
                streak = 0
        else:
            streak = 0
        prev_step = step

    info_acc["damping_final"] = damping
    return q_w, q_lw, iterations, residual, converged, info_acc


def _result_from_arrays(
    kind, q_w, q_lw, risks, ref_lw, m, delta, policy, iterations, residual, converged, diag, floor
):
    gibbs = float(np.dot(q_w, risks))
    kl_qp = _kl_div_arrays(q_w, q_lw, ref_lw)
    detail = bound_value_from_stats(kind, gibbs, kl_qp, m, delta, policy)
    posterior = DiscreteDistribution(log_weights=q_lw)
    return PosteriorResult(
        posterior=posterior,
        bound=detail.value,
        iterations=iterations,
        residual=residual,
        converged=converged,
        support_size=int(np.count_nonzero(np.exp(q_lw) > floor)),
        detail=detail,
        diagnostics=diag,
    )


def optimal_posterior_linear(
    profile: RiskProfile,
    prior: DiscreteDistribution,
    delta: float = 0.05,
    policy: ConstantPolicy = ConstantPolicy.EXACT_LOGSPACE,
) -> PosteriorResult:
    """Exact minimizer of the linear-distance bound: q_i ~ p_i exp(-m lhat_i).

    Pure log-space softmax, so mass ratios keep exact structure even when the
    weights underflow float64 (log-weights like -2000 stay finite).
    """
    validate_profile(profile)
    if prior.size != len(profile):
        raise PacBayesError(
            f"prior has {prior.size} atoms for {len(profile)} classifiers", code="SIZE_MISMATCH"
        )
    if np.any(prior.log_weights == -np.inf):
        raise PacBayesError("prior must be strictly positive", code="PRIOR_NOT_POSITIVE")
    m = profile.sample_size
    scores = prior.log_weights - m * profile.risks
    q_lw = scores - backend.logsumexp(scores)
    q_w = np.exp(q_lw)
    diag = {"backend": backend.active()}
    if np.allclose(prior.log_weights, -math.log(prior.size), rtol=0.0, atol=1e-12):
        diag["complexity_free_objective"] = complexity_free_objective(profile)
    return _result_from_arrays(
        DistanceKind.LIN,
        q_w,
        q_lw,
        profile.risks,
        prior.log_weights,
        m,
        delta,
        policy,
        0,
        0.0,
        True,
        diag,
        1e-15,
    )


def complexity_free_objective(profile: RiskProfile) -> float:
    """(log H - log sum_i exp(-m lhat_i)) / m: the uniform-prior linear bound
    minus its constant terms; strictly decreasing as low-risk atoms are added."""
    validate_profile(profile)
    m = profile.sample_size
    return float(
        (math.log(len(profile)) - backend.logsumexp(-m * profile.risks)) / m
    )


def fp_step(
    kind: DistanceKind,
    q: DiscreteDistribution,
    profile: RiskProfile,
    prior: DiscreteDistribution,
    delta: float,
    policy: ConstantPolicy = ConstantPolicy.EXACT_LOGSPACE,
    positivity_floor: float = 1e-15,
) -> DiscreteDistribution:
    """One application of the fixed-point map T for the given kind."""
    kind = DistanceKind(kind)
    if kind not in _FP_KINDS:
        raise PacBayesError(f"no fixed-point map for kind {kind.value!r}", code="UNSUPPORTED_KIND")
    validate_profile(profile)
    if q.size != len(profile) or prior.size != len(profile):
        raise PacBayesError("posterior/prior size does not match profile", code="SIZE_MISMATCH")
    _require_finite_logs(q, "posterior iterate")
    _require_finite_logs(prior, "prior")
    if not (0.0 < delta < 1.0):
        raise PacBayesError(f"delta must lie strictly inside (0, 1), got {delta!r}", code="BAD_DELTA")
    log_ik = log_threshold(kind, profile.sample_size, policy)
    _, lw, _ = _fp_step_arrays(
        kind,
        q.weights,
        q.log_weights,
        profile.risks,
        prior.log_weights,
        profile.sample_size,
        delta,
        log_ik,
        math.log(positivity_floor),
    )
    return DiscreteDistribution(log_weights=lw)


def stationarity_residual(
    kind: DistanceKind,
    q: DiscreteDistribution,
    profile: RiskProfile,
    prior: DiscreteDistribution,
    delta: float,
    policy: ConstantPolicy = ConstantPolicy.EXACT_LOGSPACE,
) -> float:
    """Infinity norm of q - T(q); zero exactly at a fixed point."""
    t = fp_step(kind, q, profile, prior, delta, policy)
    return float(np.max(np.abs(q.weights - t.weights)))


def fp_solve(
    kind: DistanceKind,
    profile: RiskProfile,
    prior: DiscreteDistribution,
    delta: float,
    config: Optional[FixedPointConfig] = None,
    policy: ConstantPolicy = ConstantPolicy.EXACT_LOGSPACE,
) -> PosteriorResult:
    """Iterate the fixed-point map to a stationary posterior.

    Stops when ||q - T(q)||_inf <= tol (the reported residual is exactly that
    norm at the returned posterior, so converged implies residual <= tol even
    when damping was active).  Non-convergence is reported, not raised.
    """
    kind = DistanceKind(kind)
    if kind not in _FP_KINDS:
        raise PacBayesError(
            "the linear kind has a closed-form optimum; no fixed-point map",
            code="UNSUPPORTED_KIND",
        )
    validate_profile(profile)
    if prior.size != len(profile):
        raise PacBayesError(
            f"prior has {prior.size} atoms for {len(profile)} classifiers", code="SIZE_MISMATCH"
        )
    _require_finite_logs(prior, "prior")
    if not (0.0 < delta < 1.0):
        raise PacBayesError(f"delta must lie strictly inside (0, 1), got {delta!r}", code="BAD_DELTA")
    if config is None:
        config = FixedPointConfig()
    q_w, q_lw, iterations, residual, converged, diag = _fp_solve_core(
        kind, profile.risks, profile.sample_size, prior.log_weights, delta, config, policy
    )
    diag["backend"] = backend.active()
    return _result_from_arrays(
        kind,
        q_w,
        q_lw,
        profile.risks,
        prior.log_weights,
        profile.sample_size,
        delta,
        policy,
        iterations,
        residual,
        converged,
        diag,
        config.positivity_floor,
    )


def _sorted_order(profile: RiskProfile) -> np.ndarray:
    # stable: ties broken by original id
    ids = np.array([e.id for e in profile.entries])
    return np.lexsort((ids, profile.risks))


def prefix_search(
    kind: DistanceKind,
    profile: RiskProfile,
    delta: float,
    config: Optional[FixedPointConfig] = None,
    policy: ConstantPolicy = ConstantPolicy.EXACT_LOGSPACE,
    prior: Optional[DiscreteDistribution] = None,
) -> PosteriorResult:
    """Best posterior over risk-sorted prefixes of the classifier set.

    Requires a uniform prior; the complexity term of a size-H' prefix keeps
    the full-set offset log(H) (mass restricted to a subset of a uniform
    reference over all H classifiers), which is what makes prefixes the only
    candidates worth searching.  Ties prefer the larger support.
    """
    kind = DistanceKind(kind)
    validate_profile(profile)
    H = len(profile)
    m = profile.sample_size
    if prior is not None:
        if prior.size != H:
            raise PacBayesError(
                f"prior has {prior.size} atoms for {H} classifiers", code="SIZE_MISMATCH"
            )
        if not np.allclose(prior.log_weights, -math.log(H), rtol=0.0, atol=1e-9):
            raise PacBayesError("prefix search requires a uniform prior", code="NON_UNIFORM_PRIOR")
    if config is None:
        config = FixedPointConfig()
    if kind is not DistanceKind.LIN and kind not in _FP_KINDS:
        raise PacBayesError(f"unknown kind {kind!r}", code="UNSUPPORTED_KIND")

    order = _sorted_order(profile)
    sorted_risks = profile.risks[order]
    log_ref_full = -math.log(H)

    best = None
    for hp in range(1, H + 1):
        sub = sorted_risks[:hp]
        ref_lw = np.full(hp, log_ref_full)
        if kind is DistanceKind.LIN:
            scores = -m * sub
            q_lw = scores - backend.logsumexp(scores)
            q_w = np.exp(q_lw)
            iters, resid, conv = 0, 0.0, True
        else:
            q_w, q_lw, iters, resid, conv, _ = _fp_solve_core(
                kind, sub, m, ref_lw, delta, config, policy
            )
        gibbs = float(np.dot(q_w, sub))
        kl_qp = _kl_div_arrays(q_w, q_lw, ref_lw)
        raw = float(
            bound_raw_batch(kind, np.array([gibbs]), np.array([kl_qp]), m, delta, policy)[0][0]
        )
        if best is None or raw <= best[0]:
            best = (raw, hp, q_w, q_lw, gibbs, kl_qp, iters, resid, conv)

    raw, hp, q_w, q_lw, gibbs, kl_qp, iters, resid, conv = best
    full_lw = np.full(H, -np.inf)
    full_lw[order[:hp]] = q_lw
    detail = bound_value_from_stats(kind, gibbs, kl_qp, m, delta, policy)
    return PosteriorResult(
        posterior=DiscreteDistribution(log_weights=full_lw),
        bound=detail.value,
        iterations=iters,
        residual=resid,
        converged=conv,
        support_size=hp,
        detail=detail,
        diagnostics={
            "best_prefix": hp,
            "full_support_optimal": hp == H,
            "backend": backend.active(),
        },
    )


def _lattice_blocks(h: int, n: int):
    """Yield blocks of lattice compositions (k_1..k_h), k_i >= 1, sum = n."""
    if h == 1:
        yield np.array([[n]], dtype=np.float64)
        return
    if h == 2:
        k = np.arange(1, n, dtype=np.float64)
        yield np.stack([k, n - k], axis=1)
        return

    def rec(prefix, remaining, depth):
        if depth == h - 2:
            k = np.arange(1, remaining, dtype=np.float64)
            block = np.empty((k.size, h))
            block[:, : h - 2] = prefix
            block[:, h - 2] = k
            block[:, h - 1] = remaining - k
            yield block
        else:
            for v in range(1, remaining - (h - depth - 1) + 1):
                yield from rec(prefix + [v], remaining - v, depth + 1)

    yield from rec([], n, 0)


def grid_oracle(
    kind: DistanceKind,
    profile: RiskProfile,
    prior: DiscreteDistribution,
    delta: float,
    step: float = 0.01,
    policy: ConstantPolicy = ConstantPolicy.EXACT_LOGSPACE,
) -> PosteriorResult:
    """Brute-force minimum of the bound over a simplex lattice.

    Ground truth for small sets: enumerates every weight vector with entries
    k*step >= step summing to 1, so the search space is interior by
    construction.  Only feasible for a handful of classifiers.
    """
    kind = DistanceKind(kind)
    validate_profile(profile)
    H = len(profile)
    if H > _MAX_ORACLE_SIZE:
        raise PacBayesError(
            f"lattice search over {H} classifiers is not tractable", code="TOO_MANY_CLASSIFIERS"
        )
    if step not in _GRID_STEPS:
        raise PacBayesError(f"step must be one of {_GRID_STEPS}", code="BAD_CONFIG")
    if prior.size != H:
        raise PacBayesError(
            f"prior has {prior.size} atoms for {H} classifiers", code="SIZE_MISMATCH"
        )
    _require_finite_logs(prior, "prior")
    if not (0.0 < delta < 1.0):
        raise PacBayesError(f"delta must lie strictly inside (0, 1), got {delta!r}", code="BAD_DELTA")

    n = int(round(1.0 / step))
    m = profile.sample_size
    risks = profile.risks
    ref_lw = prior.log_weights
    best_raw = math.inf
    best_w = None
    examined = 0
    for block in _lattice_blocks(H, n):
        W = block / n
        gibbs = W @ risks
        kl_qp = np.einsum("ij,ij->i", W, np.log(W) - ref_lw[None, :])
        np.maximum(kl_qp, 0.0, out=kl_qp)
        raw = bound_raw_batch(kind, gibbs, kl_qp, m, delta, policy)[0]
        examined += W.shape[0]
        i = int(np.argmin(raw))
        if raw[i] < best_raw:
            best_raw = float(raw[i])
            best_w = W[i].copy()

    q_lw = np.log(best_w)
    gibbs = float(np.dot(best_w, risks))
    kl_qp = _kl_div_arrays(best_w, q_lw, ref_lw)
    detail = bound_value_from_stats(kind, gibbs, kl_qp, m, delta, policy)
    return PosteriorResult(
        posterior=DiscreteDistribution(log_weights=q_lw),
        bound=detail.value,
        iterations=0,
        residual=0.0,
        converged=True,
        support_size=int(np.count_nonzero(best_w > 1e-15)),
        detail=detail,
        diagnostics={"lattice_points": examined, "backend": backend.active()},
    )
