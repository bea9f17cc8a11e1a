"""Built-in scenarios, named after the figure each one sets up.

Each preset is stored as configuration text, so ``dump-preset`` output can be
edited and fed back to ``run``.
"""
from __future__ import annotations

from math import sqrt

from .config import ScenarioConfig, parse_config

# double-humped probe used by most scenarios: 0.012 exp(-(t/100-7.5)^2) + 0.01 exp(-(t/100-10)^2)
_DOUBLE_HUMP = {
    "kind": "double_gaussian",
    "amplitudes": "0.012, 0.01",
    "centers": "750.0, 1000.0",
    "widths": "100.0, 100.0",
}
_FIG2_COUPLING = {"kind": "constant", "amplitude": repr(sqrt(0.4))}
_FIG2_GRID = {"t_min": "0.0", "t_max": "3000.0", "n_points": "4096"}
_STORAGE_GRID = {"t_min": "0.0", "t_max": "4500.0", "n_points": "9001"}
# retrieval starts once the coupling is back on for good
_RETRIEVAL_WINDOW = "2500.0"


def _text(name, description, sections):
    lines = ["[scenario]", f"name = {name}", f"description = {description}"]
    for key, value in sections.pop("scenario").items():
        lines.append(f"{key} = {value}")
    for section, keys in sections.items():
        lines.append("")
        lines.append(f"[{section}]")
        lines.extend(f"{k} = {v}" for k, v in keys.items())
    return "\n".join(lines) + "\n"


def _fig2(letter, z, methods):
    return _text(
        f"fig2{letter}",
        f"double-humped probe, constant coupling Gamma_1 T = 40, z = {z}",
        {
            "scenario": {"z": z, "methods": methods},
            "probe": dict(_DOUBLE_HUMP),
            "coupling": dict(_FIG2_COUPLING),
            "grid": dict(_FIG2_GRID),
            "run": {"reference": "full"},
            "output": {"dir": f"out/fig2{letter}"},
        },
    )


def _fig3(letter, probe):
    return _text(
        f"fig3{letter}",
        "equal-area probe, constant coupling Gamma_1 T = 4, z = 400",
        {
            "scenario": {"z": "400.0", "methods": "full, blurring"},
            "probe": probe,
            "coupling": {"kind": "constant", "amplitude": "0.2"},
            "grid": {"t_min": "0.0", "t_max": "16000.0", "n_points": "4096"},
            "run": {"reference": "full"},
            "output": {"dir": f"out/fig3{letter}"},
        },
    )


def _storage(name, description, amplitude, z, n_points, methods):
    return _text(
        name,
        description,
        {
            "scenario": {"z": z, "methods": methods},
            "probe": dict(_DOUBLE_HUMP),
            "coupling": {"kind": "piecewise", "amplitude": amplitude},
            "grid": {"t_min": "0.0", "t_max": "4500.0", "n_points": n_points},
            "run": {"reference": "full", "fidelity_window": _RETRIEVAL_WINDOW},
            "output": {"dir": f"out/{name}"},
        },
    )


_PRESETS = {
    "fig2a": _fig2("a", "4.0", "full, polariton, oracle_pde, oracle_mb"),
    "fig2b": _fig2("b", "40.0", "full, polariton, oracle_pde, oracle_mb"),
    "fig2c": _fig2("c", "400.0", "full, blurring, oracle_pde"),
    "fig3a": _fig3("a", dict(_DOUBLE_HUMP)),
    "fig3b": _fig3("b", {"kind": "gaussian", "amplitudes": "0.022", "centers": "850.0",
                         "widths": "100.0"}),
    "fig4": _text(
        "fig4",
        "double-humped probe at z = 20 for several constant coupling amplitudes",
        {
            "scenario": {"z": "20.0", "methods": "full, polariton"},
            "probe": dict(_DOUBLE_HUMP),
            "coupling": {"kind": "constant", "amplitude": repr(sqrt(0.4))},
            "grid": dict(_FIG2_GRID),
            "run": {"reference": "full"},
            "output": {"dir": "out/fig4"},
            "sweep": {"coupling_amplitude": ", ".join(
                repr(sqrt(g)) for g in (0.1, 0.2, 0.4, 1.0))},
        },
    ),
    "fig5": _storage("fig5", "storage and retrieval, coupling f(t), z = 50 and 600",
                     "1.0", "50.0, 600.0", "9001", "full, polariton, oracle_pde"),
    "fig6": _storage("fig6", "storage and retrieval, coupling f(t)/sqrt(10), z = 4 and 100",
                     repr(1 / sqrt(10)), "4.0, 100.0", "4501", "full, oracle_pde"),
    "fig7b": _text(
        "fig7b",
        "probe and coupling from the experimental comparison, time also in microseconds",
        {
            "scenario": {"z": "5.0", "methods": "full"},
            "probe": {"kind": "split_gaussian", "amplitudes": "1.0, 1.0",
                      "centers": "4000.0, " + repr(1000.0 / 3.0),
                      "widths": "400.0, " + repr(100.0 / 3.0), "split": "1000.0"},
            "coupling": {"kind": "piecewise", "amplitude": "0.1"},
            "grid": dict(_STORAGE_GRID),
            "run": {"reference": "full", "fidelity_window": _RETRIEVAL_WINDOW,
                    "time_unit_us": "0.0277"},
            "output": {"dir": "out/fig7b"},
        },
    ),
    "matched": _text(
        "matched",
        "constant mixing angle 0.05 propagating unchanged",
        {
            "scenario": {"z": "0.0, 10.0, 100.0", "methods": "matched, oracle_pde"},
            "probe": {"kind": "constant", "value": "0.05"},
            "coupling": {"kind": "constant", "amplitude": "1.0"},
            "grid": {"t_min": "0.0", "t_max": "500.0", "n_points": "1001"},
            "run": {"reference": "matched"},
            "output": {"dir": "out/matched"},
        },
    ),
    "gammaV_cw": _text(
        "gammaV_cw",
        "ground coherence decay gamma = 0.01 with a quasi-continuous probe",
        {
            "scenario": {"z": ", ".join(f"{5.0 * k!r}" for k in range(11)),
                         "methods": "full_gamma, oracle_pde"},
            "medium": {"gamma_coherence": "0.01"},
            "probe": {"kind": "plateau", "amplitudes": "0.005", "centers": "300.0",
                      "widths": "50.0"},
            "coupling": {"kind": "constant", "amplitude": "0.5"},
            "grid": {"t_min": "0.0", "t_max": "2000.0", "n_points": "2049"},
            "propagation": {"model": "dephased"},
            "run": {"reference": "full_gamma", "analysis": "absorption_fit"},
            "output": {"dir": "out/gammaV_cw"},
        },
    ),
    "gammaV_stop": _text(
        "gammaV_stop",
        "coupling switched off at rate Gamma with gamma = 0.01; the pulse stops",
        {
            "scenario": {"z": "0.0, 200.0, 400.0", "methods": "full_gamma, oracle_pde"},
            "medium": {"gamma_coherence": "0.01"},
            "probe": {"kind": "gaussian", "amplitudes": "0.01", "centers": "800.0",
                      "widths": "100.0", "mixing": "true"},
            "coupling": {"kind": "switch_off", "amplitude": "1.0", "rate": "1.0",
                         "t_off": "1200.0"},
            "grid": {"t_min": "0.0", "t_max": "2000.0", "n_points": "4001"},
            "propagation": {"model": "dephased"},
            "run": {"reference": "full_gamma", "analysis": "switch_off"},
            "output": {"dir": "out/gammaV_stop"},
        },
    ),
}


def preset_names() -> list:
    return list(_PRESETS)


def preset_text(name: str) -> str:
    try:
        return _PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(_PRESETS)}") from None


def load_preset(name: str) -> ScenarioConfig:
    return parse_config(preset_text(name))
