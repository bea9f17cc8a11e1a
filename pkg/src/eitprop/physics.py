"""Medium parameters, field envelopes and the rates derived from them.

All quantities are nondimensional: times are measured in units of 1/Gamma
(the upper-level width), rates and Rabi frequencies in units of Gamma and
propagation distance as the optical depth ``z``.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline

from .errors import (
    DomainError,
    InvalidInterval,
    NotYetArrived,
    SingularLogDerivative,
    WeakProbeWarning,
)

WEAK_PROBE_BOUND = 0.1
LOG_DERIVATIVE_CLAMP = 1.0e3
TAIL_FRACTION = 1.0e-6


class Model(str, enum.Enum):
    """Which reduced propagation model a quantity belongs to.

    ``STANDARD`` neglects decay of the ground-state coherence; ``DEPHASED``
    keeps it to first order.
    """

    STANDARD = "standard"
    DEPHASED = "dephased"


def _as_model(model) -> Model:
    return model if isinstance(model, Model) else Model(model)


@dataclass(frozen=True)
class MediumParams:
    """Relaxation rates and absorption coefficient of the medium.

    ``gamma_upper`` is the total width of the excited level, ``gamma_coherence``
    the decay rate of the ground-state coherence and ``q_p`` the probe
    absorption coefficient (inverse length times rate).
    """

    gamma_upper: float = 1.0
    gamma_coherence: float = 0.0
    q_p: float = 1.0

    def __post_init__(self):
        if not self.gamma_upper > 0:
            raise DomainError(f"gamma_upper must be positive, got {self.gamma_upper}")
        if not self.gamma_coherence >= 0:
            raise DomainError(
                f"gamma_coherence must be non-negative, got {self.gamma_coherence}")
        if not self.q_p > 0:
            raise DomainError(f"q_p must be positive, got {self.q_p}")

    def depth_scale(self, model=Model.STANDARD) -> float:
        if _as_model(model) is Model.DEPHASED:
            return self.gamma_upper + self.gamma_coherence
        return self.gamma_upper

    def optical_depth(self, x, model=Model.STANDARD):
        """Normalized depth z for a physical distance x."""
        return self.q_p * np.asarray(x, dtype=float) / self.depth_scale(model)

    def length(self, z, model=Model.STANDARD):
        return np.asarray(z, dtype=float) * self.depth_scale(model) / self.q_p


# Switching function used for storage scenarios: on, two Gaussian edges, on.
PIECEWISE_WINDOW = (1000.0, 2500.0)
PIECEWISE_CENTERS = (1000.0, 2000.0)
PIECEWISE_WIDTH = 100.0

COUPLING_KINDS = ("constant", "piecewise", "switch_off", "tabulated")


@dataclass(frozen=True)
class CouplingProfile:
    """Time dependence of the coupling Rabi frequency.

    Kinds:

    ``constant``
        ``amplitude`` for all times.
    ``piecewise``
        ``amplitude * f(t)`` with ``f = 1`` outside ``[1000, 2500]`` and
        ``f = exp(-(t/100 - 10)**2) + exp(-(t/100 - 20)**2)`` inside. A scaled
        variant is the same kind with a different ``amplitude``.
    ``switch_off``
        ``amplitude`` until ``t_off``, then ``amplitude * exp(-rate*(t - t_off))``.
    ``tabulated``
        Cubic spline through ``(samples_t, samples_value)``; held constant
        outside the sampled range.
    """

    kind: str = "constant"
    amplitude: float = 1.0
    rate: float = 1.0
    t_off: float = 0.0
    samples_t: tuple = ()
    samples_value: tuple = ()
    _spline: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in COUPLING_KINDS:
            raise DomainError(f"unknown coupling kind {self.kind!r}")
        if self.kind == "tabulated":
            ts = np.asarray(self.samples_t, dtype=float)
            vs = np.asarray(self.samples_value, dtype=float)
            if ts.ndim != 1 or ts.size < 4 or ts.shape != vs.shape:
                raise DomainError("tabulated coupling needs >= 4 matching samples")
            if np.any(np.diff(ts) <= 0):
                raise DomainError("tabulated coupling times must increase")
            if np.any(vs < 0):
                raise DomainError("coupling Rabi frequency must be non-negative")
            if not np.any(vs > 0):
                raise DomainError("coupling vanishes everywhere; mixing angle undefined")
            object.__setattr__(self, "_spline", CubicSpline(ts, vs))
        else:
            if not self.amplitude > 0:
                raise DomainError("coupling vanishes everywhere; mixing angle undefined")
            if self.kind == "switch_off" and not self.rate > 0:
                raise DomainError("switch-off rate must be positive")

    @property
    def has_analytic_log_derivative(self) -> bool:
        return self.kind != "tabulated"

    def _piecewise_parts(self, t):
        s = t / PIECEWISE_WIDTH
        c1, c2 = (c / PIECEWISE_WIDTH for c in PIECEWISE_CENTERS)
        inside = (t >= PIECEWISE_WINDOW[0]) & (t <= PIECEWISE_WINDOW[1])
        e1 = -((s - c1) ** 2)
        e2 = -((s - c2) ** 2)
        return inside, s, c1, c2, e1, e2

    def omega(self, t):
        """Coupling Rabi frequency at ``t``."""
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.amplitude)
        if self.kind == "piecewise":
            inside, _, _, _, e1, e2 = self._piecewise_parts(t)
            f = np.where(inside, np.exp(e1) + np.exp(e2), 1.0)
            return self.amplitude * f
        if self.kind == "switch_off":
            dt = np.maximum(t - self.t_off, 0.0)
            return self.amplitude * np.exp(-self.rate * dt)
        return np.maximum(self._tabulated(t, 0), 0.0)

    def omega_dot(self, t):
        """Time derivative of the coupling Rabi frequency."""
        t = np.asarray(t, dtype=float)
        if self.kind == "tabulated":
            return self._tabulated(t, 1)
        return self.omega(t) * self._analytic_log_derivative(t)

    def _tabulated(self, t, nu):
        ts = self.samples_t
        tc = np.clip(t, ts[0], ts[-1])
        out = self._spline(tc, nu)
        if nu:
            out = np.where((t < ts[0]) | (t > ts[-1]), 0.0, out)
        return out

    def _analytic_log_derivative(self, t):
        if self.kind == "constant":
            return np.zeros_like(t)
        if self.kind == "switch_off":
            return np.where(t > self.t_off, -self.rate, 0.0)
        inside, s, c1, c2, e1, e2 = self._piecewise_parts(t)
        # weights of the two Gaussians, computed without forming tiny ratios
        top = np.maximum(e1, e2)
        w1 = np.exp(e1 - top)
        w2 = np.exp(e2 - top)
        slope = (-2.0 * (s - c1) * w1 - 2.0 * (s - c2) * w2) / (w1 + w2)
        return np.where(inside, slope / PIECEWISE_WIDTH, 0.0)

    def log_derivative(self, t, return_clamped=False):
        """Logarithmic derivative d(ln Omega_c)/dt.

        Analytic kinds return the exact value everywhere. Tabulated profiles are
        clamped to ``|value| <= 1e3`` (units of Gamma); ``return_clamped`` also
        returns whether the clamp was hit. A tabulated profile that vanishes
        exactly raises :class:`SingularLogDerivative`.
        """
        t = np.asarray(t, dtype=float)
        if self.has_analytic_log_derivative:
            out = self._analytic_log_derivative(t)
            return (out, False) if return_clamped else out
        om = self.omega(t)
        if np.any(om <= 0):
            raise SingularLogDerivative(
                "tabulated coupling vanishes; logarithmic derivative undefined")
        raw = self.omega_dot(t) / om
        out = np.clip(raw, -LOG_DERIVATIVE_CLAMP, LOG_DERIVATIVE_CLAMP)
        clamped = bool(np.any(out != raw))
        return (out, clamped) if return_clamped else out


PROBE_KINDS = ("gaussian", "double_gaussian", "split_gaussian", "plateau",
               "constant", "tabulated")


@dataclass(frozen=True)
class ProbeEnvelope:
    """Boundary probe field.

    The envelope describes the probe Rabi frequency at the medium entrance,
    ``Omega_p(0, t)``; the boundary mixing angle is ``Omega_p / Omega_c``. With
    ``mixing=True`` the envelope gives the mixing angle itself (the probe is
    then proportional to the coupling). The ``constant`` kind always describes
    a constant mixing angle ``value``.

    Kinds: ``gaussian`` (any number of terms ``a*exp(-((t-c)/w)**2)``),
    ``double_gaussian`` (exactly two terms), ``split_gaussian`` (first term for
    ``t < split``, second term otherwise), ``plateau`` (smooth switch-on
    ``a*(1 + tanh((t-c)/w))/2``), ``constant`` and ``tabulated``.
    """

    kind: str = "gaussian"
    amplitudes: tuple = (0.01,)
    centers: tuple = (0.0,)
    widths: tuple = (100.0,)
    split: float | None = None
    value: float = 0.0
    mixing: bool = False
    samples_t: tuple = ()
    samples_value: tuple = ()
    _spline: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in PROBE_KINDS:
            raise DomainError(f"unknown probe kind {self.kind!r}")
        if self.kind in ("gaussian", "double_gaussian", "split_gaussian", "plateau"):
            n = len(self.amplitudes)
            if n == 0 or len(self.centers) != n or len(self.widths) != n:
                raise DomainError("amplitudes, centers and widths must have equal length")
            if any(not w > 0 for w in self.widths):
                raise DomainError("widths must be positive")
            expected = {"double_gaussian": 2, "split_gaussian": 2, "plateau": 1}
            if self.kind in expected and n != expected[self.kind]:
                raise DomainError(f"{self.kind} takes {expected[self.kind]} term(s), got {n}")
            if self.kind == "split_gaussian" and self.split is None:
                raise DomainError("split_gaussian needs a split time")
        if self.kind == "tabulated":
            ts = np.asarray(self.samples_t, dtype=float)
            vs = np.asarray(self.samples_value, dtype=float)
            if ts.ndim != 1 or ts.size < 4 or ts.shape != vs.shape:
                raise DomainError("tabulated probe needs >= 4 matching samples")
            if np.any(np.diff(ts) <= 0):
                raise DomainError("tabulated probe times must increase")
            object.__setattr__(self, "_spline", CubicSpline(ts, vs))

    @property
    def describes_mixing_angle(self) -> bool:
        return self.mixing or self.kind == "constant"

    def _terms(self, t, deriv):
        out = np.zeros_like(t)
        for k, (a, c, w) in enumerate(zip(self.amplitudes, self.centers, self.widths)):
            x = (t - c) / w
            g = a * np.exp(-x * x)
            term = g * (-2.0 * x / w) if deriv else g
            if self.kind == "split_gaussian":
                mask = t < self.split if k == 0 else t >= self.split
                term = np.where(mask, term, 0.0)
            out += term
        return out

    def envelope(self, t):
        """Envelope value: Omega_p(0, t), or the mixing angle when it describes one."""
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.value)
        if self.kind == "plateau":
            a, c, w = self.amplitudes[0], self.centers[0], self.widths[0]
            return 0.5 * a * (1.0 + np.tanh((t - c) / w))
        if self.kind == "tabulated":
            ts = self.samples_t
            return self._spline(np.clip(t, ts[0], ts[-1]))
        return self._terms(t, deriv=False)

    def envelope_dot(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.zeros_like(t)
        if self.kind == "plateau":
            a, c, w = self.amplitudes[0], self.centers[0], self.widths[0]
            return 0.5 * a / w / np.cosh((t - c) / w) ** 2
        if self.kind == "tabulated":
            # 4th-order central differences of the interpolant
            ts = np.asarray(self.samples_t)
            h = 0.25 * float(np.min(np.diff(ts)))
            f = self.envelope
            d = (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h)
            return np.where((t < ts[0]) | (t > ts[-1]), 0.0, d)
        return self._terms(t, deriv=True)

    def rabi(self, t, coupling: CouplingProfile | None = None):
        """Probe Rabi frequency at the entrance, Omega_p(0, t)."""
        if self.describes_mixing_angle:
            if coupling is None:
                raise DomainError("a mixing-angle probe needs the coupling to give Omega_p")
            return self.envelope(t) * coupling.omega(t)
        return self.envelope(t)

    def mixing_angle(self, coupling: CouplingProfile, t):
        """Boundary mixing angle theta_0(t) and its time derivative."""
        t = np.asarray(t, dtype=float)
        if self.describes_mixing_angle:
            return self.envelope(t), self.envelope_dot(t)
        om = coupling.omega(t)
        p = self.envelope(t)
        dp = self.envelope_dot(t)
        dark = om <= 0
        if np.any(dark & (p != 0)):
            raise DomainError("probe present where the coupling vanishes; mixing angle undefined")
        safe = np.where(dark, 1.0, om)
        theta = np.where(dark, 0.0, p / safe)
        if np.any(dark):
            logd = np.where(dark, 0.0, coupling.omega_dot(t) / safe)
        else:
            logd = coupling.log_derivative(t)
        theta_dot = np.where(dark, 0.0, dp / safe - theta * logd)
        return theta, theta_dot


def check_weak_probe(theta0, bound=WEAK_PROBE_BOUND) -> bool:
    """Warn when the probe is not weak; return whether it is."""
    peak = float(np.max(np.abs(theta0))) if np.size(theta0) else 0.0
    if peak > bound:
        warnings.warn(f"max |theta_0| = {peak:.3g} exceeds the weak-probe bound {bound}",
                      WeakProbeWarning, stacklevel=2)
        return False
    return True


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of retarded time, in units of 1/Gamma."""

    t_min: float
    t_max: float
    n_points: int

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise DomainError("a time grid needs at least two points")
        if not self.t_max > self.t_min:
            raise DomainError("t_max must exceed t_min")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, int(self.n_points))

    @property
    def dt(self) -> float:
        return (self.t_max - self.t_min) / (self.n_points - 1)

    def refined(self) -> "TimeGrid":
        """Grid with half the step; every old point is kept."""
        return TimeGrid(self.t_min, self.t_max, 2 * self.n_points - 1)

    def tail_warning(self, theta0) -> str | None:
        """Message if theta_0 is not negligible at the grid ends."""
        peak = float(np.max(np.abs(theta0)))
        if peak == 0:
            return None
        ends = max(abs(theta0[0]), abs(theta0[-1]))
        if ends >= TAIL_FRACTION * peak:
            return (f"boundary mixing angle at the grid edge is {ends / peak:.2e} of its "
                    "peak; widen the time grid")
        return None


def gamma1_of_t(medium: MediumParams, coupling: CouplingProfile, t, model=Model.STANDARD):
    """Coupling-induced coherence decay rate Gamma_1(t).

    ``STANDARD`` gives ``Omega_c**2 / Gamma``. ``DEPHASED`` gives
    ``(Omega_c**2 + gamma*(Gamma + dOmega_c/dt / Omega_c)) / (Gamma + gamma)``,
    which reduces to the standard value for ``gamma = 0``.
    """
    model = _as_model(model)
    om2 = coupling.omega(t) ** 2
    big = medium.gamma_upper
    gam = medium.gamma_coherence
    if model is Model.STANDARD or gam == 0:
        return om2 / big
    if not coupling.has_analytic_log_derivative and np.any(coupling.omega(t) <= 0):
        raise SingularLogDerivative(
            "coupling vanishes and has no analytic logarithmic derivative")
    logd = coupling.log_derivative(t)
    return (om2 + gam * (big + logd)) / (big + gam)


def gamma1_slope(medium: MediumParams, coupling: CouplingProfile, t):
    """Time derivative of the standard-model Gamma_1."""
    return 2.0 * coupling.omega(t) * coupling.omega_dot(t) / medium.gamma_upper


class CumulativeIntegral:
    """Running integral of a rate sampled on a uniform grid.

    Built in one prefix pass with the trapezoid rule; queries are O(1). When
    ``slope`` (the derivative of the rate at the nodes) is supplied, the
    endpoint derivative correction is added, which makes the running integral
    fourth-order accurate for smooth rates. Values between nodes come from
    cubic Hermite interpolation.
    """

    def __init__(self, grid: TimeGrid, rate, slope=None):
        rate = np.asarray(rate, dtype=float)
        if rate.shape != (grid.n_points,):
            raise DomainError("rate samples must match the grid")
        self.grid = grid
        self.rate = rate
        h = grid.dt
        values = cumulative_trapezoid(rate, dx=h, initial=0.0)
        if slope is not None:
            slope = np.asarray(slope, dtype=float)
            values = values - h * h / 12.0 * (slope - slope[0])
        self.values = values

    @property
    def nondecreasing(self) -> bool:
        return bool(np.all(np.diff(self.values) >= 0))

    def at(self, t):
        t = np.asarray(t, dtype=float)
        g = self.grid
        if np.any((t < g.t_min) | (t > g.t_max)):
            raise DomainError("time outside the grid")
        h = g.dt
        pos = (t - g.t_min) / h
        j = np.clip(np.floor(pos).astype(int), 0, g.n_points - 2)
        s = pos - j
        c0, c1 = self.values[j], self.values[j + 1]
        f0, f1 = self.rate[j], self.rate[j + 1]
        s2, s3 = s * s, s * s * s
        return ((2 * s3 - 3 * s2 + 1) * c0 + (s3 - 2 * s2 + s) * h * f0
                + (-2 * s3 + 3 * s2) * c1 + (s3 - s2) * h * f1)

    def between(self, t1, t):
        """Integral from ``t1`` to ``t``."""
        t1 = np.asarray(t1, dtype=float)
        t = np.asarray(t, dtype=float)
        if np.any(t1 > t):
            raise InvalidInterval("lower limit exceeds upper limit")
        return self.at(t) - self.at(t1)

    def invert(self, level):
        """Earliest time at which the running integral reaches ``level``.

        Requires a nondecreasing integral. Levels outside the attained range
        give NaN.
        """
        level = np.atleast_1d(np.asarray(level, dtype=float))
        c = self.values
        g = self.grid
        out = np.full(level.shape, np.nan)
        ok = (level >= c[0]) & (level <= c[-1])
        if not np.any(ok):
            return out
        lv = level[ok]
        j = np.searchsorted(c, lv, side="left")
        first = j == 0
        j = np.clip(j, 1, c.size - 1)
        h = g.dt
        lo = g.t_min + (j - 1) * h
        hi = np.minimum(lo + h, g.t_max)
        # bisection on the Hermite cubic inside the bracketing cell
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = self.at(mid) < lv
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out[ok] = np.where(first, g.t_min, 0.5 * (lo + hi))
        return out


def alpha_integral(gamma1_samples, grid: TimeGrid, t1, t, gamma_subtract=0.0):
    """Accumulated opacity, the integral of ``Gamma_1 - gamma_subtract`` over [t1, t]."""
    if np.any(np.asarray(t1) > np.asarray(t)):
        raise InvalidInterval("lower limit exceeds upper limit")
    rate = np.asarray(gamma1_samples, dtype=float) - gamma_subtract
    return CumulativeIntegral(grid, rate).between(t1, t)


def opacity_integral(medium, coupling, grid, *, corrected=True) -> CumulativeIntegral:
    """Running integral of the standard-model Gamma_1 on ``grid``."""
    t = grid.times
    rate = gamma1_of_t(medium, coupling, t, Model.STANDARD)
    slope = gamma1_slope(medium, coupling, t) if corrected else None
    return CumulativeIntegral(grid, rate, slope)


def xi_nonlinear_time(coupling: CouplingProfile, t, z, medium: MediumParams,
                      grid: TimeGrid, cumulative: CumulativeIntegral | None = None):
    """Retarded time xi solving  int_xi^t Omega_c^2 dt1 = q_p x  (i.e. = z * Gamma).

    Array input returns NaN where the pulse has not yet reached depth ``z``;
    scalar input raises :class:`NotYetArrived` instead.
    """
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if z < 0:
        raise DomainError("depth must be non-negative")
    if cumulative is None:
        cumulative = opacity_integral(medium, coupling, grid)
    if z == 0:
        xi = t.copy()
    else:
        xi = cumulative.invert(cumulative.at(t) - z)
        xi = np.minimum(xi, t)
    if scalar:
        if np.isnan(xi[0]):
            raise NotYetArrived(f"pulse has not reached depth z={z} by t={t[0]}")
        return float(xi[0])
    return xi
