"""Execute a scenario: solve, compare, classify and write artifacts."""
from __future__ import annotations

import json
import logging
import os
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analytic, oracle
from .analytic import Method, SolutionField, relative_l2, shape_distance
from .config import ScenarioConfig
from .errors import WeakProbeWarning
from .physics import Model, check_weak_probe, gamma1_of_t
from .regimes import classify, storage_fidelity

log = logging.getLogger(__name__)

# reference picked for cross-method comparisons when none is configured
_REFERENCE_ORDER = (Method.FULL, Method.FULL_GAMMA, Method.MATCHED, Method.ORACLE_PDE)
_ORACLES = (Method.ORACLE_PDE, Method.ORACLE_MB)
SETTLED_GAMMA1 = 1.0e-6


@dataclass
class RunResult:
    report: dict
    files: list = field(default_factory=list)
    fields: dict = field(default_factory=dict)


def _clean(obj):
    """Make metadata JSON-safe with deterministic content."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if np.isnan(x):
            return "nan"
        if np.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def solve_method(method: Method, cfg: ScenarioConfig) -> SolutionField:
    z = np.asarray(cfg.z_values, dtype=float)
    args = (cfg.probe, cfg.coupling, cfg.medium, cfg.grid)
    if method is Method.FULL:
        return analytic.solve_full(*args, z, resolution_tol=cfg.resolution_tol)
    if method is Method.FULL_GAMMA:
        return analytic.solve_full_gamma(*args, z, resolution_tol=cfg.resolution_tol)
    if method is Method.POLARITON:
        return analytic.asymptote_polariton(*args, z)
    if method is Method.BLURRING:
        return analytic.asymptote_blurring(*args, z)
    if method is Method.MATCHED:
        return analytic.matched_pulse(cfg.probe.value, z, cfg.grid)
    pgrid = oracle.PropagationGrid.with_step(cfg.grid, float(np.max(z)) if z.size else 0.0,
                                             cfg.dz)
    if method is Method.ORACLE_PDE:
        return oracle.oracle_pde(*args[:3], pgrid, z, cfg.model)
    return oracle.oracle_mb(*args[:3], pgrid, z)


def _absorption_fit(fields, cfg):
    """Fit theta(z, t_end) ~ exp(-rate z) per method."""
    z = np.asarray(cfg.z_values, dtype=float)
    t_end = cfg.grid.times[-1]
    g1 = float(gamma1_of_t(cfg.medium, cfg.coupling, t_end, Model.DEPHASED))
    expected = cfg.medium.gamma_coherence / g1
    out = {"expected_rate": expected, "gamma1": g1, "t": float(t_end)}
    for name, fld in fields.items():
        amp = fld.theta[:, -1]
        if z.size < 2 or np.any(amp <= 0):
            out[name] = {"rate": "nan", "relative_error": "nan"}
            continue
        rate = -float(np.polyfit(z, np.log(amp), 1)[0])
        out[name] = {"rate": rate,
                     "relative_error": abs(rate / expected - 1.0) if expected else "inf"}
    return out


def _switch_off_summary(cfg):
    t = cfg.grid.times
    g1 = gamma1_of_t(cfg.medium, cfg.coupling, t, Model.DEPHASED)
    above = np.flatnonzero(np.abs(g1) > SETTLED_GAMMA1 * cfg.medium.gamma_upper)
    settle = t[above[-1] + 1] if above.size and above[-1] + 1 < t.size else \
        (t[0] if not above.size else None)
    out = {"threshold": SETTLED_GAMMA1 * cfg.medium.gamma_upper,
           "gamma1_at_end": float(g1[-1]),
           "settle_time": None if settle is None else float(settle)}
    if settle is not None:
        out["gamma1_max_after_settle"] = float(np.max(np.abs(g1[t >= settle])))
    return out


def compute(cfg: ScenarioConfig, methods=None) -> tuple:
    """Solve every requested method; returns (fields, case report)."""
    methods = cfg.methods if methods is None else tuple(methods)
    fields = {}
    case = {"coupling_amplitude": cfg.coupling.amplitude, "methods": {}}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        theta0, _ = cfg.probe.mixing_angle(cfg.coupling, cfg.grid.times)
        case["weak_probe"] = check_weak_probe(theta0, cfg.weak_probe_bound)
        # the configured bound replaces the solvers' fixed one
        warnings.simplefilter("ignore", WeakProbeWarning)
        case["regimes"] = [classify(cfg.probe, cfg.coupling, cfg.medium, z, cfg.grid)
                           .to_dict() for z in cfg.z_values]
        for m in methods:
            log.info("%s: solving %s", cfg.name, m.value)
            fld = solve_method(m, cfg)
            fields[m.value] = fld
            case["methods"][m.value] = {"metadata": _clean(fld.metadata)}
    case["warnings"] = sorted({str(w.message) for w in caught})
    ref = cfg.reference
    if ref is None or ref.value not in fields:
        ref = next((r for r in _REFERENCE_ORDER if r.value in fields), None)
    case["reference"] = None if ref is None else ref.value
    disc = {}
    if ref is not None:
        base = fields[ref.value]
        for name, fld in fields.items():
            if name == ref.value:
                continue
            disc[name] = {
                f"{z:g}": {"relative_l2": relative_l2(fld.theta[k], base.theta[k]),
                           "shape_distance": shape_distance(fld.theta[k], base.theta[k])}
                for k, z in enumerate(base.z_values)}
    case["discrepancies"] = disc
    if cfg.fidelity_window is not None and cfg.probe.kind != "constant":
        case["fidelity"] = {
            name: {f"{z:g}": storage_fidelity(fld, cfg.probe, coupling=cfg.coupling,
                                              window=cfg.fidelity_window, z=z)
                   for z in fld.z_values}
            for name, fld in fields.items()}
    if cfg.analysis == "absorption_fit":
        case["absorption_fit"] = _absorption_fit(fields, cfg)
    elif cfg.analysis == "switch_off":
        case["switch_off"] = _switch_off_summary(cfg)
    return fields, _clean(case)


def _csv_text(fld: SolutionField, k: int, time_unit_us):
    t = fld.grid.times
    cols = [("Gamma_t", t)]
    if time_unit_us is not None:
        cols.append(("t_us", t * time_unit_us))
    cols.append(("theta", fld.theta[k]))
    if fld.method in _ORACLES:
        cols.append(("Omega_p", fld.extras["omega_p"][k]))
        cols.append(("rho21", fld.extras["rho21"][k]))
    rows = [",".join(name for name, _ in cols)]
    data = [c.tolist() for _, c in cols]
    rows.extend(",".join(repr(v) for v in row) for row in zip(*data))
    return "\n".join(rows) + "\n"


def _write(path: Path, text: str):
    path.write_text(text, encoding="utf-8", newline="\n")


def run_scenario(cfg: ScenarioConfig, out_dir=None, methods=None, figures=None) -> RunResult:
    """Run one scenario and write CSV fields and the JSON report.

    Sweeps over the coupling amplitude run one case each; file names then
    carry an ``_amp<k>`` suffix. Artifacts depend only on the configuration.
    """
    out = Path(cfg.out_dir if out_dir is None else out_dir)
    out.mkdir(parents=True, exist_ok=True)
    figures = cfg.figures if figures is None else figures
    cases = [("", cfg)]
    if cfg.sweep_amplitudes:
        cases = [(f"_amp{k}", cfg.for_amplitude(a)) for k, a in enumerate(cfg.sweep_amplitudes)]
    result = RunResult(report={})
    case_reports = []
    for suffix, case_cfg in cases:
        fields, case = compute(case_cfg, methods)
        files = []
        for name, fld in fields.items():
            for k, z in enumerate(fld.z_values):
                path = out / f"{name}_z{z:g}{suffix}.csv"
                _write(path, _csv_text(fld, k, cfg.time_unit_us))
                files.append(path.name)
                result.files.append(path)
        case["files"] = files
        if figures and fields:
            from .plotting import plot_fields
            theta0, _ = case_cfg.probe.mixing_angle(case_cfg.coupling, case_cfg.grid.times)
            for png in plot_fields(fields, theta0, out, suffix=suffix, title=cfg.name):
                case["files"].append(png.name)
                result.files.append(png)
        case_reports.append(case)
        result.fields[suffix or "main"] = fields
    report = {
        "scenario": cfg.name,
        "description": cfg.description,
        "config": _clean(cfg.values),
        "cases": case_reports,
        "warnings": sorted({w for c in case_reports for w in c["warnings"]}),
    }
    path = out / "report.json"
    _write(path, json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n")
    result.files.append(path)
    result.report = report
    return result


def worker_count() -> int:
    raw = os.environ.get("EITPROP_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
