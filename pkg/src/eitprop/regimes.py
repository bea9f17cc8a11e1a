"""Dimensionless regime conditions and storage quality."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import correlate

from .analytic import POLARITON_THRESHOLD, SolutionField, pulse_duration
from .errors import DomainError
from .physics import (
    CouplingProfile,
    MediumParams,
    Model,
    ProbeEnvelope,
    TimeGrid,
    gamma1_of_t,
)

STORAGE_THRESHOLD = 16.0 * np.log(2.0)
SATISFIED_MARGIN = 10.0
MARGINAL_MARGIN = 1.0
T_DEFINITION = ("T = FWHM / (2 sqrt(ln 2)) of the main lobe of |theta_0|, "
                "so theta_0 ~ exp(-(t/T)^2) has duration T")
VERDICT_RULE = "Satisfied: margin >= 10; Marginal: 1 <= margin < 10; Violated: margin < 1"

CONDITIONS = {
    "adiabatic_upper": "Gamma T >> 1",
    "adiabatic_eit": "Gamma_1m T >> 1",
    "polariton": "Gamma_1m T / sqrt(z) >> 4 sqrt(ln 2)",
    "blurring": "Gamma_1m T / sqrt(z) << 4 sqrt(ln 2)",
    "fitting": "z >~ Gamma_1m T",
    "good_storage": "Gamma_1m T >> 16 ln 2",
}


class Verdict(str, enum.Enum):
    SATISFIED = "Satisfied"
    MARGINAL = "Marginal"
    VIOLATED = "Violated"

    @classmethod
    def from_margin(cls, margin: float) -> "Verdict":
        if margin >= SATISFIED_MARGIN:
            return cls.SATISFIED
        if margin >= MARGINAL_MARGIN:
            return cls.MARGINAL
        return cls.VIOLATED


def _num(x):
    x = float(x)
    return "inf" if np.isinf(x) else x


@dataclass
class RegimeReport:
    """Evaluated regime parameters for one depth, with a verdict per condition."""

    z: float
    gamma_T: float
    gamma1m_T: float
    ratio_polariton: float
    fitting_ratio: float
    storage_margin: float
    threshold_polariton: float = POLARITON_THRESHOLD
    verdicts: dict = field(default_factory=dict)
    T_definition: str = T_DEFINITION

    def to_dict(self) -> dict:
        return {
            "z": _num(self.z),
            "gamma_T": _num(self.gamma_T),
            "gamma1m_T": _num(self.gamma1m_T),
            "ratio_polariton": _num(self.ratio_polariton),
            "threshold_polariton": _num(self.threshold_polariton),
            "fitting_ratio": _num(self.fitting_ratio),
            "storage_margin": _num(self.storage_margin),
            "verdicts": {
                name: {"condition": CONDITIONS[name], "margin": _num(m), "verdict": v.value}
                for name, (v, m) in self.verdicts.items()
            },
            "verdict_rule": VERDICT_RULE,
            "T_definition": self.T_definition,
        }


def classify(probe: ProbeEnvelope, coupling: CouplingProfile, medium: MediumParams,
             z: float, grid: TimeGrid, duration: float | None = None,
             model=None) -> RegimeReport:
    """Evaluate every regime condition at depth ``z``.

    ``duration`` overrides the pulse duration taken from the boundary mixing
    angle. The dephased form of Gamma_1 is used when the medium has ground
    coherence decay, unless ``model`` says otherwise.
    """
    if z < 0:
        raise DomainError("depth must be non-negative")
    if model is None:
        model = Model.DEPHASED if medium.gamma_coherence > 0 else Model.STANDARD
    t = grid.times
    if duration is None:
        theta0, _ = probe.mixing_angle(coupling, t)
        duration = pulse_duration(theta0, grid)
    g1m = float(np.max(gamma1_of_t(medium, coupling, t, model)))
    gT = medium.gamma_upper * duration
    g1T = g1m * duration
    ratio = np.inf if z == 0 else g1T / np.sqrt(z)
    fitting = np.inf if g1T == 0 and z > 0 else (z / g1T if g1T > 0 else 0.0)
    storage = g1T / STORAGE_THRESHOLD
    margins = {
        "adiabatic_upper": gT,
        "adiabatic_eit": g1T,
        "polariton": ratio / POLARITON_THRESHOLD,
        "blurring": POLARITON_THRESHOLD / ratio if ratio > 0 else np.inf,
        "fitting": fitting,
        "good_storage": storage,
    }
    verdicts = {k: (Verdict.from_margin(m), float(m)) for k, m in margins.items()}
    return RegimeReport(float(z), gT, g1T, ratio, fitting, storage, verdicts=verdicts)


def _parabolic_offset(y0, y1, y2):
    den = y0 - 2.0 * y1 + y2
    return 0.0 if den == 0 else 0.5 * (y0 - y2) / den


def storage_fidelity(retrieved, reference, *, coupling: CouplingProfile | None = None,
                     window=None, z=None) -> float:
    """Delay-maximized normalized overlap between a retrieved pulse and the input.

    F = max_tau [int out(t) ref(t - tau) dt]^2 / (int out^2 int ref^2), in [0, 1].

    ``retrieved`` is a SolutionField (``z`` picks the column when it holds
    several depths) or a sampled array; ``reference`` is a ProbeEnvelope or an
    array on the same grid. With an envelope, both sides are compared as probe
    Rabi frequencies: the input ``Omega_p(0, t)`` against ``theta * Omega_c``
    (which needs ``coupling``). Comparing mixing angles instead would fold the
    coupling switching into the reference shape. ``window = (t_start, t_end)``
    restricts the retrieved pulse to the post-retrieval interval; either end
    may be None.
    """
    if isinstance(retrieved, SolutionField):
        grid = retrieved.grid
        if z is None:
            if retrieved.theta.shape[0] != 1:
                raise DomainError("pick a depth with z= for a multi-depth field")
            out = retrieved.theta[0]
        else:
            out = retrieved.column(z)
        t = grid.times
    else:
        out = np.asarray(retrieved, dtype=float)
        t = None
    if isinstance(reference, ProbeEnvelope):
        if t is None or coupling is None:
            raise DomainError("an envelope reference needs a field with a grid and a coupling")
        ref = reference.rabi(t, coupling)
        out = out * coupling.omega(t)
    else:
        ref = np.asarray(reference, dtype=float)
    if ref.shape != out.shape:
        raise DomainError("retrieved and reference samples must have the same length")
    out = np.array(out, dtype=float)
    if window is not None:
        if t is None:
            raise DomainError("a time window needs a field with a grid")
        lo, hi = window
        keep = np.ones(t.size, dtype=bool)
        if lo is not None:
            keep &= t >= lo
        if hi is not None:
            keep &= t <= hi
        out[~keep] = 0.0
    e_out = float(np.dot(out, out))
    e_ref = float(np.dot(ref, ref))
    if e_out == 0.0 or e_ref == 0.0:
        return 0.0
    c2 = correlate(out, ref, mode="full", method="direct") ** 2
    k = int(np.argmax(c2))
    peak = c2[k]
    if 0 < k < c2.size - 1:
        # parabolic refinement of the squared overlap between lags
        d = _parabolic_offset(c2[k - 1], c2[k], c2[k + 1])
        peak = c2[k] - 0.25 * (c2[k - 1] - c2[k + 1]) * d
    return float(np.clip(peak / (e_out * e_ref), 0.0, 1.0))
