"""Exponentially scaled modified Bessel function I0 and the propagation kernel."""
import numpy as np

from .errors import DomainError

SPLICE = 15.0
_EPS = 1.0e-18


def _series(x):
    # sum_k (x/2)^(2k) / (k!)^2, all terms positive
    q = 0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    k = 0
    while True:
        k += 1
        term = term * q / (k * k)
        total += term
        if np.all(term <= _EPS * total):
            return total * np.exp(-x)


def _asymptotic(x):
    # 1/sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! 8^k x^k); terms still decrease
    # at k = 2*SPLICE, so the loop never passes the smallest term
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, int(2 * SPLICE) + 1):
        term = term * ((2 * k - 1) ** 2 / (8.0 * k)) / x
        total += term
        if np.all(term <= _EPS * total):
            break
    return total / np.sqrt(2.0 * np.pi * x)


def i0_scaled(x):
    """``exp(-x) * I0(x)`` for real ``x >= 0``.

    Power series up to ``x = 15``, asymptotic expansion above. Scalar input
    returns a float.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError("i0_scaled needs finite x >= 0")
    flat = arr.ravel()
    out = np.empty_like(flat)
    low = flat <= SPLICE
    if np.any(low):
        out[low] = _series(flat[low])
    if not np.all(low):
        out[~low] = _asymptotic(flat[~low])
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def i0_series_branch(x):
    """Series branch alone, for checking the splice."""
    return _series(np.atleast_1d(np.asarray(x, dtype=float)))


def i0_asymptotic_branch(x):
    """Asymptotic branch alone, for checking the splice."""
    return _asymptotic(np.atleast_1d(np.asarray(x, dtype=float)))


def kernel(z, alpha):
    """Propagation kernel ``exp(-z - alpha) * I0(2 sqrt(z alpha))``.

    Evaluated as ``exp(-(sqrt z - sqrt alpha)**2) * i0_scaled(2 sqrt(z alpha))``,
    which never overflows.
    """
    z = np.asarray(z, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if np.any(z < 0) or np.any(alpha < 0):
        raise DomainError("kernel needs z >= 0 and alpha >= 0")
    rz = np.sqrt(z)
    ra = np.sqrt(alpha)
    out = np.exp(-((rz - ra) ** 2)) * i0_scaled(2.0 * rz * ra)
    return float(out) if np.ndim(out) == 0 else out
