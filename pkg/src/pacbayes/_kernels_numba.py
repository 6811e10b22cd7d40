"""numba-jitted kernels; see _kernels_numpy for the contract notes."""

from __future__ import annotations

import math

import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True)
def logsumexp(x):
    m = -np.inf
    for i in range(x.size):
        if x[i] > m:
            m = x[i]
    if m == -np.inf:
        return -np.inf
    s = 0.0
    for i in range(x.size):
        s += math.exp(x[i] - m)
    return m + math.log(s)


@njit(cache=True)
def _log_ik_one(m, l, phi_code, log_c):
    mx = -np.inf
    for k in range(m + 1):
        d = k / m - l
        if phi_code == 0:
            phi = -d
        elif phi_code == 1:
            phi = d * d
        else:
            phi = 2.0 * d * d
        t = log_c[k] + k * math.log(l) + (m - k) * math.log1p(-l) + m * phi
        if t > mx:
            mx = t
    s = 0.0
    for k in range(m + 1):
        d = k / m - l
        if phi_code == 0:
            phi = -d
        elif phi_code == 1:
            phi = d * d
        else:
            phi = 2.0 * d * d
        t = log_c[k] + k * math.log(l) + (m - k) * math.log1p(-l) + m * phi
        s += math.exp(t - mx)
    return mx + math.log(s)


@njit(cache=True)
def log_ik_grid(m, ls, phi_code):
    log_c = np.empty(m + 1)
    lg_m1 = math.lgamma(m + 1.0)
    for k in range(m + 1):
        log_c[k] = lg_m1 - math.lgamma(k + 1.0) - math.lgamma(m - k + 1.0)
    out = np.empty(ls.size)
    for j in range(ls.size):
        out[j] = _log_ik_one(m, ls[j], phi_code, log_c)
    return out


@njit(cache=True)
def _kl_at_complement(phat, s):
    return phat * (math.log(phat) - math.log1p(-s)) + (1.0 - phat) * (
        math.log1p(-phat) - math.log(s)
    )


@njit(cache=True)
def _kl_interior(phat, r):
    return phat * math.log(phat / r) + (1.0 - phat) * math.log((1.0 - phat) / (1.0 - r))


@njit(cache=True)
def kl_upper_s_batch(phats, xs, tol, eps, max_iter=200):
    n = phats.size
    out = np.empty(n)
    saturated = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        phat = phats[i]
        x = xs[i]
        if x > _kl_at_complement(phat, eps):
            out[i] = eps
            saturated[i] = True
            continue
        la = math.log(eps)
        lb = math.log1p(-phat)
        best = 0.5 * (la + lb)
        best_res = np.inf
        for _ in range(max_iter):
            mid = 0.5 * (la + lb)
            fm = _kl_at_complement(phat, math.exp(mid))
            res = abs(fm - x)
            if res < best_res:
                best_res = res
                best = mid
            if fm >= x:
                la = mid
            else:
                lb = mid
            if best_res <= tol or lb - la <= 1e-15:
                break
        out[i] = math.exp(best)
    return out, saturated


@njit(cache=True)
def kl_lower_batch(phats, xs, tol, eps, max_iter=200):
    n = phats.size
    out = np.empty(n)
    saturated = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        phat = phats[i]
        x = xs[i]
        if x > _kl_interior(phat, eps):
            out[i] = eps
            saturated[i] = True
            continue
        la = math.log(eps)
        lb = math.log(phat)
        best = 0.5 * (la + lb)
        best_res = np.inf
        for _ in range(max_iter):
            mid = 0.5 * (la + lb)
            fm = _kl_interior(phat, math.exp(mid))
            res = abs(fm - x)
            if res < best_res:
                best_res = res
                best = mid
            if fm >= x:
                la = mid
            else:
                lb = mid
            if best_res <= tol or lb - la <= 1e-15:
                break
        out[i] = math.exp(best)
    return out, saturated
