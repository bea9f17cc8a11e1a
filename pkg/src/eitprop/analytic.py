"""Closed-form propagation of the mixing angle and its asymptotic limits.

The full solution is

    theta(z, t) = int_{t_min}^t [theta_0(t1) Gamma_1(t1) + theta_0'(t1)]
                  * exp(-z - alpha(t1, t)) I0(2 sqrt(z alpha(t1, t))) dt1

with ``alpha`` the opacity accumulated between ``t1`` and ``t``. It is
evaluated on the time grid with the trapezoid rule plus Gregory end
corrections, skipping (t1, t) pairs where the kernel or the weight is
negligible.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.special import j0

from .errors import DomainError, RegimeWarning, ResolutionWarning
from .physics import (
    CouplingProfile,
    CumulativeIntegral,
    MediumParams,
    Model,
    ProbeEnvelope,
    TimeGrid,
    check_weak_probe,
    gamma1_of_t,
    opacity_integral,
    xi_nonlinear_time,
)
from .special import kernel

POLARITON_THRESHOLD = 4.0 * np.sqrt(np.log(2.0))

# Gregory coefficients; seven difference terms make the end correction
# exact for polynomials of degree 7.
_GREGORY = (1 / 12, 1 / 24, 19 / 720, 3 / 160, 863 / 60480, 275 / 24192,
            33953 / 3628800)
# kernel values below exp(-LOG_CUTOFF) are dropped
LOG_CUTOFF = 50.0
SUPPORT_FRACTION = 1.0e-14
PAIR_BUDGET = 2_000_000


class Method(str, enum.Enum):
    FULL = "full"
    FULL_GAMMA = "full_gamma"
    POLARITON = "polariton"
    BLURRING = "blurring"
    MATCHED = "matched"
    ORACLE_MB = "oracle_mb"
    ORACLE_PDE = "oracle_pde"


@dataclass
class SolutionField:
    """Mixing angle theta(z, t) sampled on ``grid`` at each depth in ``z_values``.

    ``extras`` holds further per-depth arrays with the same shape as ``theta``
    (the oracles store ``omega_p`` and ``rho21`` there).
    """

    z_values: np.ndarray
    grid: TimeGrid
    theta: np.ndarray
    method: Method
    metadata: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def column(self, z) -> np.ndarray:
        idx = np.flatnonzero(np.isclose(self.z_values, z, rtol=0, atol=1e-12))
        if idx.size == 0:
            raise KeyError(f"depth {z} not in field")
        return self.theta[idx[0]]

    @property
    def warnings(self) -> list:
        return self.metadata.setdefault("warnings", [])


def gregory_end_weights(order=len(_GREGORY)) -> np.ndarray:
    """Trapezoid weights at offsets 0..order from an interval end, corrected."""
    w = np.ones(order + 1)
    w[0] = 0.5
    for k, gk in enumerate(_GREGORY[:order], start=1):
        for m in range(k + 1):
            w[m] -= gk * (-1) ** m * comb(k, m)
    return w


_END = gregory_end_weights()
_NEND = _END.size
# rows shorter than this use the plain trapezoid rule
_MIN_CORRECTED = 2 * _NEND


def _pair_weights(rows, cols):
    w = np.ones(rows.shape)
    long_row = rows >= _MIN_CORRECTED
    mr = rows - cols
    near_r = long_row & (mr < _NEND)
    w[near_r] = _END[mr[near_r]]
    near_l = long_row & (cols < _NEND)
    w[near_l] += _END[cols[near_l]] - 1.0
    short = ~long_row
    w[short & (mr == 0)] -= 0.5
    w[short & (cols == 0)] -= 0.5
    return w


def _blocks(counts, budget=PAIR_BUDGET):
    """Split row indices into consecutive blocks holding ~budget pairs each."""
    start = 0
    n = counts.size
    csum = np.cumsum(counts)
    while start < n:
        base = csum[start - 1] if start else 0
        stop = int(np.searchsorted(csum, base + budget, side="right"))
        stop = max(stop, start + 1)
        yield start, min(stop, n)
        start = stop


def _expand(rows, lo, counts):
    total = int(counts.sum())
    rr = np.repeat(rows, counts)
    offs = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    return rr, np.repeat(lo, counts) + offs


def kernel_quadrature(weight, bessel_cum, dt, z, decay_cum=None):
    """theta(z, t_i) = sum_j w_ij weight_j K_ij on a uniform grid.

    ``bessel_cum`` is the running integral entering the Bessel argument
    (alpha = C_i - C_j). ``decay_cum`` is the running integral in the
    exponent when it differs from ``bessel_cum``; both are node arrays.
    """
    weight = np.asarray(weight, dtype=float)
    c = np.asarray(bessel_cum, dtype=float)
    n = c.size
    out = np.zeros(n)
    peak = np.max(np.abs(weight)) if n else 0.0
    if peak == 0 or n < 2:
        return out
    support = np.flatnonzero(np.abs(weight) > SUPPORT_FRACTION * peak)
    a = c if decay_cum is None else np.asarray(decay_cum, dtype=float)
    rows = np.arange(n)
    rz = np.sqrt(z)
    monotone = bool(np.all(np.diff(c) >= 0))
    r = np.sqrt(LOG_CUTOFF)
    last = np.searchsorted(support, rows, side="right")
    if monotone:
        c_s = c[support]
        a_lo = max(rz - r, 0.0) ** 2
        a_hi = (rz + r) ** 2
        lo = np.searchsorted(c_s, c - a_hi, side="left")
        hi = np.minimum(np.searchsorted(c_s, c - a_lo, side="right"), last)
    else:
        lo = np.zeros(n, dtype=int)
        hi = last
    counts = np.maximum(hi - lo, 0)
    for r0, r1 in _blocks(counts):
        cnt = counts[r0:r1]
        if cnt.sum() == 0:
            continue
        ii, pos = _expand(rows[r0:r1], lo[r0:r1], cnt)
        jj = support[pos]
        alpha = c[ii] - c[jj]
        vals = np.zeros(alpha.shape)
        if decay_cum is None:
            alpha = np.maximum(alpha, 0.0)
            vals = kernel(z, alpha)
        else:
            extra = (a[ii] - a[jj]) - alpha
            pos_a = alpha >= 0
            ra = np.sqrt(np.where(pos_a, alpha, 0.0))
            logb = np.where(pos_a, -extra - (rz - ra) ** 2,
                            -z - (a[ii] - a[jj]))
            keep = logb > -LOG_CUTOFF
            kp = keep & pos_a
            vals[kp] = np.exp(-extra[kp]) * kernel(z, alpha[kp])
            kn = keep & ~pos_a
            if np.any(kn):
                arg = 2.0 * np.sqrt(-z * alpha[kn])
                vals[kn] = np.exp(-z - (a[ii[kn]] - a[jj[kn]])) * j0(arg)
        contrib = weight[jj] * _pair_weights(ii, jj) * vals
        out[r0:r1] = np.bincount(ii - r0, weights=contrib, minlength=r1 - r0)
    return out * dt


def _coarse_check(weight, bessel_cum, decay_cum, dt, z, fine, tol, meta):
    n = weight.size
    m = n if n % 2 else n - 1
    if m < 2 * _MIN_CORRECTED:
        return
    coarse = kernel_quadrature(weight[:m:2], bessel_cum[:m:2], 2 * dt, z,
                               None if decay_cum is None else decay_cum[:m:2])
    ref = fine[:m:2]
    scale = np.linalg.norm(ref)
    err = np.linalg.norm(coarse - ref) / scale if scale > 0 else 0.0
    meta["resolution_estimate"] = float(err)
    meta["resolution_check_z"] = float(z)
    if err > tol:
        msg = (f"half-resolution comparison at z={z:g} differs by {err:.2e} "
               f"(tolerance {tol:.1e}); refine the time grid")
        meta.setdefault("warnings", []).append(msg)
        warnings.warn(msg, ResolutionWarning, stacklevel=3)


def _prepare(probe, coupling, medium, grid, z_values):
    z_values = np.atleast_1d(np.asarray(z_values, dtype=float))
    if np.any(z_values < 0):
        raise DomainError("depths must be non-negative")
    t = grid.times
    theta0, theta0_dot = probe.mixing_angle(coupling, t)
    meta = {"warnings": []}
    if not check_weak_probe(theta0):
        meta["warnings"].append("probe exceeds the weak-probe bound")
    tail = grid.tail_warning(theta0)
    if tail:
        meta["warnings"].append(tail)
    return z_values, t, theta0, theta0_dot, meta


def _solve(probe, coupling, medium, grid, z_values, model, method, resolution_tol):
    if probe.kind == "constant":
        raise DomainError("constant probes start in the matched regime; use matched_pulse")
    z_values, t, theta0, theta0_dot, meta = _prepare(probe, coupling, medium, grid, z_values)
    g1 = gamma1_of_t(medium, coupling, t, model)
    weight = theta0 * g1 + theta0_dot
    gam = medium.gamma_coherence if model is Model.DEPHASED else 0.0
    if gam == 0:
        bessel = CumulativeIntegral(grid, g1).values
        decay = None
    else:
        bessel = CumulativeIntegral(grid, g1 - gam).values
        decay = CumulativeIntegral(grid, g1).values
    theta = np.vstack([kernel_quadrature(weight, bessel, grid.dt, z, decay)
                       for z in z_values])
    if z_values.size:
        k = z_values.size // 2
        _coarse_check(weight, bessel, decay, grid.dt, z_values[k], theta[k],
                      resolution_tol, meta)
    meta.update(model=model.value, gamma_coherence=gam,
                depth_scale=medium.depth_scale(model))
    return SolutionField(z_values, grid, theta, method, meta)


def solve_full(probe: ProbeEnvelope, coupling: CouplingProfile, medium: MediumParams,
               grid: TimeGrid, z_values, *, resolution_tol=1e-3) -> SolutionField:
    """Full quadrature solution, neglecting ground-coherence decay.

    A non-zero ``medium.gamma_coherence`` is ignored here; use
    :func:`solve_full_gamma` to include it.
    """
    field_ = _solve(probe, coupling, medium, grid, z_values, Model.STANDARD,
                    Method.FULL, resolution_tol)
    if medium.gamma_coherence:
        field_.warnings.append("gamma_coherence ignored by the standard model")
    return field_


def solve_full_gamma(probe: ProbeEnvelope, coupling: CouplingProfile, medium: MediumParams,
                     grid: TimeGrid, z_values, *, resolution_tol=1e-3) -> SolutionField:
    """Full solution with first-order ground-coherence decay.

    Gamma_1 takes the dephased form, the Bessel argument uses the integral of
    ``Gamma_1 - gamma`` and the exponent the integral of ``Gamma_1``. Depth is
    normalized by ``Gamma + gamma``. Where the Bessel argument turns negative
    the kernel continues as J0. For ``gamma = 0`` the result is identical to
    :func:`solve_full`.
    """
    return _solve(probe, coupling, medium, grid, z_values, Model.DEPHASED,
                  Method.FULL_GAMMA, resolution_tol)


def pulse_duration(theta0, grid: TimeGrid) -> float:
    """Duration T = FWHM / (2 sqrt(ln 2)) of the main lobe of theta_0.

    The main lobe is the connected region around the global maximum of
    ``|theta_0|`` above half of it; crossings are linearly interpolated.
    """
    y = np.abs(np.asarray(theta0, dtype=float))
    k = int(np.argmax(y))
    half = 0.5 * y[k]
    if half == 0:
        return 0.0
    t = grid.times
    i = k
    while i > 0 and y[i - 1] >= half:
        i -= 1
    j = k
    while j < y.size - 1 and y[j + 1] >= half:
        j += 1
    left = t[0] if i == 0 else t[i - 1] + (half - y[i - 1]) / (y[i] - y[i - 1]) * grid.dt
    right = t[-1] if j == y.size - 1 else t[j] + (y[j] - half) / (y[j] - y[j + 1]) * grid.dt
    return (right - left) / (2.0 * np.sqrt(np.log(2.0)))


def polariton_ratio(gamma1_max, duration, z):
    return np.inf if z == 0 else gamma1_max * duration / np.sqrt(z)


def asymptote_polariton(probe: ProbeEnvelope, coupling: CouplingProfile,
                        medium: MediumParams, grid: TimeGrid, z_values) -> SolutionField:
    """Dark-state polariton limit with first nonadiabatic correction.

    theta(z, t) = theta_0(xi) + theta_0'(xi) / Gamma_1(xi), where xi is the
    nonlinear retarded time; zero before the pulse reaches depth z.
    """
    z_values, t, theta0, _, meta = _prepare(probe, coupling, medium, grid, z_values)
    g1_grid = gamma1_of_t(medium, coupling, t)
    duration = pulse_duration(theta0, grid)
    g1m = float(np.max(g1_grid))
    cum = opacity_integral(medium, coupling, grid)
    cap = float(np.max(np.abs(theta0)))
    theta = np.zeros((z_values.size, t.size))
    clamped = 0
    for k, z in enumerate(z_values):
        ratio = polariton_ratio(g1m, duration, z)
        if ratio < POLARITON_THRESHOLD:
            msg = (f"z={z:g}: Gamma_1m T / sqrt(z) = {ratio:.3g} is below "
                   f"{POLARITON_THRESHOLD:.4g}; polariton limit is inaccurate")
            meta["warnings"].append(msg)
            warnings.warn(msg, RegimeWarning, stacklevel=2)
        xi = xi_nonlinear_time(coupling, t, z, medium, grid, cum)
        arrived = ~np.isnan(xi)
        x = xi[arrived]
        th, thd = probe.mixing_angle(coupling, x)
        g1 = gamma1_of_t(medium, coupling, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            corr = np.where(g1 > 0, thd / g1, np.inf * np.sign(thd))
        corr = np.where(thd == 0, 0.0, corr)
        bad = ~np.isfinite(corr) | (np.abs(corr) > cap)
        clamped += int(np.count_nonzero(bad))
        corr = np.where(bad, np.clip(np.nan_to_num(corr), -cap, cap), corr)
        theta[k, arrived] = th + corr
    if clamped:
        meta["warnings"].append(f"correction term clamped at {clamped} points "
                                "where Gamma_1(xi) vanishes")
    meta["clamped_points"] = clamped
    return SolutionField(z_values, grid, theta, Method.POLARITON, meta)


def _parabolic_peak(t, y, k):
    if 0 < k < y.size - 1:
        y0, y1, y2 = y[k - 1], y[k], y[k + 1]
        den = y0 - 2 * y1 + y2
        if den != 0:
            return t[k] + 0.5 * (y0 - y2) / den * (t[1] - t[0])
    return t[k]


def asymptote_blurring(probe: ProbeEnvelope, coupling: CouplingProfile,
                       medium: MediumParams, grid: TimeGrid, z_values) -> SolutionField:
    """Long-distance limit where the pulse forgets its initial shape.

    theta(z, t) = R exp(-(sqrt z - sqrt a)^2) (z a)^(-1/4) / (2 sqrt pi) with
    a = alpha(t_0, t), R the area of Gamma_1 theta_0 and t_0 the peak time of
    theta_0. Zero where a <= 0.
    """
    z_values, t, theta0, _, meta = _prepare(probe, coupling, medium, grid, z_values)
    g1 = gamma1_of_t(medium, coupling, t)
    area = float(np.trapezoid(g1 * theta0, dx=grid.dt))
    k0 = int(np.argmax(np.abs(theta0)))
    t0 = float(_parabolic_peak(t, np.abs(theta0), k0))
    cum = opacity_integral(medium, coupling, grid)
    a = np.zeros_like(t)
    after = t > t0
    a[after] = cum.between(np.full(np.count_nonzero(after), t0), t[after])
    duration = pulse_duration(theta0, grid)
    g1m = float(np.max(g1))
    theta = np.zeros((z_values.size, t.size))
    for k, z in enumerate(z_values):
        ratio = polariton_ratio(g1m, duration, z)
        if ratio > POLARITON_THRESHOLD:
            msg = (f"z={z:g}: Gamma_1m T / sqrt(z) = {ratio:.3g} exceeds "
                   f"{POLARITON_THRESHOLD:.4g}; blurring limit is inaccurate")
            meta["warnings"].append(msg)
            warnings.warn(msg, RegimeWarning, stacklevel=2)
        if z == 0 or area == 0:
            continue
        pos = a > 0
        ap = a[pos]
        theta[k, pos] = (area * np.exp(-(np.sqrt(z) - np.sqrt(ap)) ** 2)
                         * (z * ap) ** -0.25 / (2.0 * np.sqrt(np.pi)))
    meta.update(area=area, t0=t0)
    return SolutionField(z_values, grid, theta, Method.BLURRING, meta)


def matched_pulse(theta0: float, z_values, grid: TimeGrid) -> SolutionField:
    """Matched pulses: a constant mixing angle propagates unchanged."""
    z_values = np.atleast_1d(np.asarray(z_values, dtype=float))
    theta = np.full((z_values.size, grid.n_points), float(theta0))
    return SolutionField(z_values, grid, theta, Method.MATCHED, {"warnings": []})


def relative_l2(a, b) -> float:
    """||a - b|| / ||b||, or ||a|| when b vanishes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    nb = np.linalg.norm(b)
    if nb == 0:
        return float(np.linalg.norm(a))
    return float(np.linalg.norm(a - b) / nb)


def shape_distance(a, b) -> float:
    """L2 distance between the two profiles after each is scaled to unit norm."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0 if na == nb else 1.0
    return float(np.linalg.norm(a / na - b / nb))
