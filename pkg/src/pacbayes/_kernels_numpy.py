"""Vectorized numpy kernels (fallback path when numba is disabled/absent).

Same contracts as _kernels_numba: callers strip special cases first, so
log_ik_grid only sees interior l and the root kernels only see interior phat
with x > 0.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln

NAME = "numpy"

# Keep the (m+1) x chunk term matrix around this many cells.
_CHUNK_CELLS = 4_000_000


def logsumexp(x: np.ndarray) -> float:
    m = np.max(x)
    if m == -np.inf:
        return -np.inf
    return float(m + np.log(np.sum(np.exp(x - m))))


def log_ik_grid(m: int, ls: np.ndarray, phi_code: int) -> np.ndarray:
    """log of sum_k C(m,k) l^k (1-l)^(m-k) exp(m*phi(k/m, l)) for each l in ls."""
    k = np.arange(m + 1, dtype=np.float64)
    log_c = gammaln(m + 1.0) - gammaln(k + 1.0) - gammaln(m - k + 1.0)
    kr = k / m
    out = np.empty(ls.size, dtype=np.float64)
    block = max(1, _CHUNK_CELLS // (m + 1))
    for start in range(0, ls.size, block):
        l = ls[start : start + block][None, :]
        if phi_code == 0:
            phi = l - kr[:, None]
        elif phi_code == 1:
            phi = (kr[:, None] - l) ** 2
        else:
            phi = 2.0 * (kr[:, None] - l) ** 2
        t = log_c[:, None] + k[:, None] * np.log(l) + (m - k)[:, None] * np.log1p(-l) + m * phi
        mx = t.max(axis=0)
        out[start : start + block] = mx + np.log(np.exp(t - mx).sum(axis=0))
    return out


def _kl_at_complement(phat: np.ndarray, s: np.ndarray) -> np.ndarray:
    # kl(phat, 1 - s) evaluated from the complement for near-one accuracy
    return phat * (np.log(phat) - np.log1p(-s)) + (1.0 - phat) * (np.log1p(-phat) - np.log(s))


def _kl_interior(phat: np.ndarray, r: np.ndarray) -> np.ndarray:
    return phat * np.log(phat / r) + (1.0 - phat) * np.log((1.0 - phat) / (1.0 - r))


def _geometric_bisect(f, target, la, lb, tol, max_iter):
    # f decreasing on the bracket; f(exp(la)) >= target >= f(exp(lb))
    best = 0.5 * (la + lb)
    best_res = np.full(target.shape, np.inf)
    for _ in range(max_iter):
        mid = 0.5 * (la + lb)
        fm = f(np.exp(mid))
        res = np.abs(fm - target)
        better = res < best_res
        best = np.where(better, mid, best)
        best_res = np.where(better, res, best_res)
        high = fm >= target
        la = np.where(high, mid, la)
        lb = np.where(high, lb, mid)
        if np.all((best_res <= tol) | (lb - la <= 1e-15)):
            break
    return np.exp(best)


def kl_upper_s_batch(phats, xs, tol, eps, max_iter=200):
    """Complement s = 1 - r of the upper kl inverse; returns (s, saturated)."""
    phats = np.asarray(phats, dtype=np.float64)
    xs = np.asarray(xs, dtype=np.float64)
    ceiling = _kl_at_complement(phats, np.full(phats.shape, eps))
    saturated = xs > ceiling
    f = lambda s: _kl_at_complement(phats, s)
    s = _geometric_bisect(f, xs, np.full(phats.shape, np.log(eps)), np.log1p(-phats), tol, max_iter)
    return np.where(saturated, eps, s), saturated


def kl_lower_batch(phats, xs, tol, eps, max_iter=200):
    """Lower kl inverse root on [eps, phat]; returns (r, saturated)."""
    phats = np.asarray(phats, dtype=np.float64)
    xs = np.asarray(xs, dtype=np.float64)
    ceiling = _kl_interior(phats, np.full(phats.shape, eps))
    saturated = xs > ceiling
    f = lambda r: _kl_interior(phats, r)
    r = _geometric_bisect(f, xs, np.full(phats.shape, np.log(eps)), np.log(phats), tol, max_iter)
    return np.where(saturated, eps, r), saturated
