"""Probe pulse propagation, storage and retrieval in a medium with induced transparency."""
from .analytic import (
    Method,
    SolutionField,
    asymptote_blurring,
    asymptote_polariton,
    matched_pulse,
    solve_full,
    solve_full_gamma,
)
from .config import ScenarioConfig, load_config, parse_config
from .oracle import PropagationGrid, coherence_dynamics, oracle_mb, oracle_pde
from .physics import (
    CouplingProfile,
    MediumParams,
    Model,
    ProbeEnvelope,
    TimeGrid,
    alpha_integral,
    gamma1_of_t,
    xi_nonlinear_time,
)
from .regimes import RegimeReport, Verdict, classify, storage_fidelity
from .special import i0_scaled, kernel

__all__ = [
    "CouplingProfile", "MediumParams", "Method", "Model", "ProbeEnvelope",
    "PropagationGrid", "RegimeReport", "ScenarioConfig", "SolutionField", "TimeGrid",
    "Verdict", "alpha_integral", "asymptote_blurring", "asymptote_polariton", "classify",
    "coherence_dynamics", "gamma1_of_t", "i0_scaled", "kernel", "load_config",
    "matched_pulse", "oracle_mb", "oracle_pde", "parse_config", "solve_full",
    "solve_full_gamma", "storage_fidelity", "xi_nonlinear_time",
]
