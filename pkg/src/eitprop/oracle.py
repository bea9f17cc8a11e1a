"""Direct numerical integration used as ground truth for the closed forms.

Two oracles march in depth with a midpoint step:

* :func:`oracle_mb` integrates the full three-level Bloch equations (real
  form, resonance) over time at each depth and feeds the probe absorption
  back into the field equation.
* :func:`oracle_pde` integrates the reduced second-order propagation equation
  written as a first-order system, ``dtheta/dz = v - theta`` with
  ``dv/dt = -Gamma_1 v + (Gamma_1 - gamma) theta``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .analytic import Method, SolutionField
from .errors import DomainError, StepSizeError
from .physics import (
    CouplingProfile,
    MediumParams,
    Model,
    ProbeEnvelope,
    TimeGrid,
    _as_model,
    check_weak_probe,
    gamma1_of_t,
)

# no gain mechanism exists, so growth past this factor means instability
GROWTH_LIMIT = 1.5
DARK_FRACTION = 1.0e-6


@njit(cache=True)
def _relax(rate, source, dt, v0):
    # trapezoidal rule for dv/dt = -rate v + source, solved per step
    n = rate.size
    v = np.empty(n)
    v[0] = v0
    for j in range(n - 1):
        a = 0.5 * dt * rate[j]
        b = 0.5 * dt * rate[j + 1]
        v[j + 1] = ((1.0 - a) * v[j] + 0.5 * dt * (source[j] + source[j + 1])) / (1.0 + b)
    return v


@njit(cache=True)
def _bloch_rhs(u, v, p, c, big, gam):
    return -big * u + p + c * v, -gam * v - c * u


@njit(cache=True)
def _bloch_rk4(omega_p, omega_c, omega_c_mid, big, gam, dt, u0, v0):
    n = omega_p.size
    u = np.empty(n)
    v = np.empty(n)
    u[0] = u0
    v[0] = v0
    for j in range(n - 1):
        p0 = omega_p[j]
        p1 = omega_p[j + 1]
        if 1 <= j <= n - 3:
            pm = (-omega_p[j - 1] + 9.0 * p0 + 9.0 * p1 - omega_p[j + 2]) / 16.0
        else:
            pm = 0.5 * (p0 + p1)
        c0 = omega_c[j]
        cm = omega_c_mid[j]
        c1 = omega_c[j + 1]
        k1u, k1v = _bloch_rhs(u[j], v[j], p0, c0, big, gam)
        k2u, k2v = _bloch_rhs(u[j] + 0.5 * dt * k1u, v[j] + 0.5 * dt * k1v, pm, cm, big, gam)
        k3u, k3v = _bloch_rhs(u[j] + 0.5 * dt * k2u, v[j] + 0.5 * dt * k2v, pm, cm, big, gam)
        k4u, k4v = _bloch_rhs(u[j] + dt * k3u, v[j] + dt * k3v, p1, c1, big, gam)
        u[j + 1] = u[j] + dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        v[j + 1] = v[j] + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return u, v


@dataclass(frozen=True)
class BlochState:
    """Atomic response at one depth: rho_31 = i*u and rho_21 = v."""

    u: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class PropagationGrid:
    """Depth marching grid sharing a time grid.

    Steps never exceed ``z_max / n_z``; requested output depths are hit
    exactly by splitting each interval between them into equal steps.
    """

    time: TimeGrid
    z_max: float
    n_z: int

    def __post_init__(self):
        if not self.z_max >= 0 or self.n_z < 1:
            raise DomainError("propagation grid needs z_max >= 0 and n_z >= 1")

    @property
    def dz(self) -> float:
        return self.z_max / self.n_z

    @classmethod
    def with_step(cls, time: TimeGrid, z_max: float, dz: float) -> "PropagationGrid":
        return cls(time, float(z_max), max(1, int(np.ceil(z_max / dz - 1e-9))))

    def segments(self, z_values):
        """(target depth, number of steps, step) for each sorted target."""
        z_sorted = np.sort(np.unique(np.asarray(z_values, dtype=float)))
        if z_sorted.size and (z_sorted[0] < 0 or z_sorted[-1] > self.z_max + 1e-12):
            raise DomainError("output depths must lie in [0, z_max]")
        out = []
        z_prev = 0.0
        dz = self.dz if self.dz > 0 else 1.0
        for z in z_sorted:
            span = z - z_prev
            steps = int(np.ceil(span / dz - 1e-9)) if span > 0 else 0
            out.append((float(z), steps, span / steps if steps else 0.0))
            z_prev = z
        return out


def bloch_sweep(omega_p, coupling: CouplingProfile, medium: MediumParams,
                grid: TimeGrid) -> BlochState:
    """Integrate the Bloch equations over the grid for a given probe history.

    Starts in the dark state; fourth-order Runge-Kutta in time.
    """
    t = grid.times
    om_c = coupling.omega(t)
    om_mid = coupling.omega(t[:-1] + 0.5 * grid.dt)
    omega_p = np.ascontiguousarray(omega_p, dtype=float)
    v0 = -omega_p[0] / om_c[0] if om_c[0] > 0 else 0.0
    u, v = _bloch_rk4(omega_p, om_c, om_mid, medium.gamma_upper,
                      medium.gamma_coherence, grid.dt, 0.0, v0)
    return BlochState(u, v)


def _check_growth(values, reference, depth, step):
    peak = np.max(np.abs(values))
    if not np.isfinite(peak) or peak > GROWTH_LIMIT * reference + 1e-300:
        raise StepSizeError(
            f"field grew to {peak:.3g} (input peak {reference:.3g}) at z={depth:g}; "
            f"reduce the depth step below {step / 2:g}", suggested_dz=step / 2)


def _march(state0, slope, pgrid, z_values):
    """Midpoint marching in depth; returns {z: (state, aux)} for each target."""
    ref = np.max(np.abs(state0))
    state = state0
    z_now = 0.0
    results = {}
    for target, steps, h in pgrid.segments(z_values):
        for _ in range(steps):
            k1, _aux = slope(state)
            half = state + 0.5 * h * k1
            k2, _aux = slope(half)
            state = state + h * k2
            z_now += h
            _check_growth(state, ref, z_now, h)
        z_now = target
        results[target] = (state, slope(state)[1])
    return results


def oracle_pde(probe: ProbeEnvelope, coupling: CouplingProfile, medium: MediumParams,
               pgrid: PropagationGrid, z_values, model=Model.STANDARD) -> SolutionField:
    """March the reduced propagation equation in depth.

    ``extras`` holds ``omega_p`` (theta times the coupling) and ``rho21``.
    """
    model = _as_model(model)
    grid = pgrid.time
    t = grid.times
    theta0, _ = probe.mixing_angle(coupling, t)
    check_weak_probe(theta0)
    g1 = gamma1_of_t(medium, coupling, t, model)
    gam = medium.gamma_coherence if model is Model.DEPHASED else 0.0
    drive = g1 - gam
    dt = grid.dt

    def slope(theta):
        v0 = drive[0] / g1[0] * theta[0] if g1[0] > 0 else 0.0
        v = _relax(g1, drive * theta, dt, v0)
        return v - theta, v

    res = _march(np.ascontiguousarray(theta0, dtype=float), slope, pgrid, z_values)
    z_arr = np.atleast_1d(np.asarray(z_values, dtype=float))
    theta = np.vstack([res[float(z)][0] for z in z_arr])
    rho21 = -np.vstack([res[float(z)][1] for z in z_arr])
    om_c = coupling.omega(t)
    meta = {"warnings": [], "model": model.value, "dz": pgrid.dz, "dt": dt,
            "gamma1_max_dt": float(np.max(g1) * dt)}
    return SolutionField(z_arr, grid, theta, Method.ORACLE_PDE, meta,
                         {"omega_p": theta * om_c, "rho21": rho21})


def oracle_mb(probe: ProbeEnvelope, coupling: CouplingProfile, medium: MediumParams,
              pgrid: PropagationGrid, z_values) -> SolutionField:
    """March the Maxwell-Bloch equations in depth.

    Depth is normalized by ``Gamma + gamma``. ``theta`` is reported as zero
    where the coupling is below ``1e-6`` of its peak; ``extras`` carries the
    probe Rabi frequency ``omega_p`` and the coherence ``rho21`` everywhere.
    """
    grid = pgrid.time
    t = grid.times
    omega_p0 = np.ascontiguousarray(probe.rabi(t, coupling), dtype=float)
    om_c = coupling.omega(t)
    om_mid = coupling.omega(t[:-1] + 0.5 * grid.dt)
    theta_in, _ = probe.mixing_angle(coupling, t)
    check_weak_probe(theta_in)
    big = medium.gamma_upper
    gam = medium.gamma_coherence
    scale = big + gam
    dt = grid.dt

    def slope(omega_p):
        v0 = -omega_p[0] / om_c[0] if om_c[0] > 0 else 0.0
        u, v = _bloch_rk4(omega_p, om_c, om_mid, big, gam, dt, 0.0, v0)
        return -scale * u, v

    res = _march(omega_p0, slope, pgrid, z_values)
    z_arr = np.atleast_1d(np.asarray(z_values, dtype=float))
    omega_p = np.vstack([res[float(z)][0] for z in z_arr])
    rho21 = np.vstack([res[float(z)][1] for z in z_arr])
    lit = om_c > DARK_FRACTION * np.max(om_c)
    theta = np.where(lit, omega_p / np.where(lit, om_c, 1.0), 0.0)
    meta = {"warnings": [], "dz": pgrid.dz, "dt": dt,
            "gamma_dt": big * dt, "depth_scale": scale}
    return SolutionField(z_arr, grid, theta, Method.ORACLE_MB, meta,
                         {"omega_p": omega_p, "rho21": rho21})


def coherence_dynamics(theta_field: SolutionField, coupling: CouplingProfile,
                       medium: MediumParams) -> np.ndarray:
    """Ground-state coherence rho_21(z, t) driven by a mixing-angle field.

    Integrates d rho21/dt = -Gamma_1 (rho21 + theta) from the dark state.
    """
    grid = theta_field.grid
    g1 = gamma1_of_t(medium, coupling, grid.times)
    out = np.empty_like(theta_field.theta)
    for k, th in enumerate(theta_field.theta):
        th = np.ascontiguousarray(th, dtype=float)
        out[k] = _relax(g1, -g1 * th, grid.dt, -th[0])
    return out
