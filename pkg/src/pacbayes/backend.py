"""Numeric kernel backend: numba-jitted loops or a pure-numpy fallback.

Selection happens once at import from PACBAYES_BACKEND: "numba", "numpy", or
"auto" (default; numba when importable).  `use()` swaps the backend at runtime
for benchmarks and the cross-backend tests.
"""

from __future__ import annotations

import os

import numpy as np

_VALID = ("auto", "numba", "numpy")


def _load(name: str):
    if name == "numba":
        from . import _kernels_numba as impl
    else:
        from . import _kernels_numpy as impl
    return impl


def _choose(requested: str):
    if requested not in _VALID:
        raise RuntimeError(
            f"PACBAYES_BACKEND must be one of {_VALID}, got {requested!r}"
        )
    if requested == "numpy":
        return _load("numpy")
    if requested == "numba":
        return _load("numba")
    try:
        return _load("numba")
    except ImportError:
        return _load("numpy")


_impl = _choose(os.environ.get("PACBAYES_BACKEND", "auto").strip().lower() or "auto")


def active() -> str:
    return _impl.NAME


def use(name: str) -> str:
    """Swap the kernel backend ("numba" or "numpy"); returns the active name."""
    global _impl
    _impl = _choose(name)
    return _impl.NAME


def logsumexp(x) -> float:
    return float(_impl.logsumexp(np.ascontiguousarray(x, dtype=np.float64)))


def log_ik_grid(m: int, ls, phi_code: int) -> np.ndarray:
    return _impl.log_ik_grid(int(m), np.ascontiguousarray(ls, dtype=np.float64), int(phi_code))


def kl_upper_s_batch(phats, xs, tol: float, eps: float):
    s, sat = _impl.kl_upper_s_batch(
        np.ascontiguousarray(phats, dtype=np.float64),
        np.ascontiguousarray(xs, dtype=np.float64),
        float(tol),
        float(eps),
    )
    return np.asarray(s), np.asarray(sat)


def kl_lower_batch(phats, xs, tol: float, eps: float):
    r, sat = _impl.kl_lower_batch(
        np.ascontiguousarray(phats, dtype=np.float64),
        np.ascontiguousarray(xs, dtype=np.float64),
        float(tol),
        float(eps),
    )
    return np.asarray(r), np.asarray(sat)


def warmup() -> None:
    """Trigger JIT compilation of every kernel (no-op on the numpy path)."""
    logsumexp(np.array([0.0, -1.0]))
    log_ik_grid(4, np.array([0.3, 0.6]), 0)
    log_ik_grid(4, np.array([0.5]), 1)
    log_ik_grid(4, np.array([0.5]), 2)
    kl_upper_s_batch(np.array([0.3]), np.array([0.1]), 1e-12, 1e-12)
    kl_lower_batch(np.array([0.3]), np.array([0.1]), 1e-12, 1e-12)
