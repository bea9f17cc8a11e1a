"""Scenario configuration: an INI file with a fixed schema.

Every key is optional except where noted; unknown sections and keys are
rejected with the line they appear on. Lists are comma separated. The full
schema, with defaults, is ``SCHEMA`` below; ``docs/config.md`` describes it
for users.
"""
from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field

import numpy as np

from .analytic import Method
from .errors import ConfigError, DomainError
from .physics import (
    COUPLING_KINDS,
    PROBE_KINDS,
    WEAK_PROBE_BOUND,
    CouplingProfile,
    MediumParams,
    Model,
    ProbeEnvelope,
    TimeGrid,
)

ANALYSES = ("none", "absorption_fit", "switch_off")

# section -> key -> (type, default); type is one of
# str, float, int, bool, floats (list), methods (list), choice tuples
SCHEMA = {
    "scenario": {
        "name": ("str", "scenario"),
        "description": ("str", ""),
        "z": ("floats", "0"),
        "methods": ("methods", "full"),
    },
    "medium": {
        "gamma_upper": ("float", "1.0"),
        "gamma_coherence": ("float", "0.0"),
        "q_p": ("float", "1.0"),
        "weak_probe_bound": ("float", repr(WEAK_PROBE_BOUND)),
    },
    "probe": {
        "kind": (PROBE_KINDS, "gaussian"),
        "amplitudes": ("floats", "0.01"),
        "centers": ("floats", "0.0"),
        "widths": ("floats", "100.0"),
        "split": ("float?", ""),
        "value": ("float", "0.0"),
        "mixing": ("bool", "false"),
        "samples_t": ("floats", ""),
        "samples_value": ("floats", ""),
    },
    "coupling": {
        "kind": (COUPLING_KINDS, "constant"),
        "amplitude": ("float", "1.0"),
        "rate": ("float", "1.0"),
        "t_off": ("float", "0.0"),
        "samples_t": ("floats", ""),
        "samples_value": ("floats", ""),
    },
    "grid": {
        "t_min": ("float", "0.0"),
        "t_max": ("float", "3000.0"),
        "n_points": ("int", "4096"),
    },
    "propagation": {
        "dz": ("float", "0.25"),
        "model": (tuple(m.value for m in Model), "standard"),
    },
    "run": {
        "reference": ("str", ""),
        "fidelity_window": ("floats?", ""),
        "analysis": (ANALYSES, "none"),
        "time_unit_us": ("float?", ""),
    },
    "output": {
        "dir": ("str", "out"),
        "figures": ("bool", "false"),
    },
    "tolerances": {
        "resolution": ("float", "1e-3"),
    },
    "sweep": {
        "coupling_amplitude": ("floats", ""),
    },
}

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^\s=:#;][^=:]*?)\s*[=:]")


def _locate(text):
    """Map (section, key) to the line number where each appears."""
    where = {}
    section = None
    for n, line in enumerate(text.splitlines(), start=1):
        if line.lstrip().startswith(("#", ";")):
            continue
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1).strip()
            where.setdefault((section, None), n)
            continue
        m = _KEY_RE.match(line)
        if m and section is not None and not line[:1].isspace():
            where.setdefault((section, m.group(1).strip().lower()), n)
    return where


def _floats(raw):
    raw = raw.strip()
    if not raw:
        return ()
    return tuple(float(x) for x in raw.split(","))


def _convert(kind, raw, err):
    raw = raw.strip()
    try:
        if isinstance(kind, tuple):
            if raw not in kind:
                raise ValueError(f"expected one of {', '.join(kind)}, got {raw!r}")
            return raw
        if kind == "str":
            return raw
        if kind == "float":
            return float(raw)
        if kind == "float?":
            return float(raw) if raw else None
        if kind == "int":
            return int(raw)
        if kind == "bool":
            low = raw.lower()
            if low not in ("true", "false", "yes", "no", "1", "0", "on", "off"):
                raise ValueError(f"expected a boolean, got {raw!r}")
            return low in ("true", "yes", "1", "on")
        if kind == "floats":
            return _floats(raw)
        if kind == "floats?":
            return _floats(raw) or None
        if kind == "methods":
            names = [x.strip() for x in raw.split(",") if x.strip()]
            return tuple(Method(x) for x in names)
    except ValueError as exc:
        raise err(str(exc)) from None
    raise AssertionError(kind)


def _format(kind, value):
    if value is None:
        return ""
    if kind == "bool":
        return "true" if value else "false"
    if kind in ("floats", "floats?"):
        return ", ".join(repr(float(v)) for v in value)
    if kind == "methods":
        return ", ".join(m.value for m in value)
    if kind in ("float", "float?"):
        return repr(float(value))
    return str(value)


@dataclass
class ScenarioConfig:
    """A fully validated scenario.

    ``values`` keeps the parsed value of every schema key so the scenario can
    be written back with :meth:`to_ini`.
    """

    name: str
    description: str
    medium: MediumParams
    probe: ProbeEnvelope
    coupling: CouplingProfile
    grid: TimeGrid
    z_values: tuple
    methods: tuple
    dz: float
    model: Model
    reference: Method | None
    fidelity_window: tuple | None
    analysis: str
    time_unit_us: float | None
    out_dir: str
    figures: bool
    resolution_tol: float
    weak_probe_bound: float
    sweep_amplitudes: tuple = ()
    values: dict = field(default_factory=dict, repr=False)

    def to_ini(self) -> str:
        lines = []
        for section, keys in SCHEMA.items():
            lines.append(f"[{section}]")
            for key, (kind, _) in keys.items():
                text = _format(kind, self.values[section][key])
                lines.append(f"{key} = {text}".rstrip())
            lines.append("")
        return "\n".join(lines)

    def with_overrides(self, overrides: dict) -> "ScenarioConfig":
        """Copy with ``{(section, key): raw_text}`` applied."""
        text = self.to_ini()
        parser = _read(text)
        for (section, key), raw in overrides.items():
            if section not in SCHEMA or key not in SCHEMA[section]:
                raise ConfigError("unknown key", section=section, key=key)
            parser[section][key] = raw
        return _build(parser, _locate(text))

    def for_amplitude(self, amplitude: float) -> "ScenarioConfig":
        return self.with_overrides({("coupling", "amplitude"): repr(float(amplitude)),
                                    ("sweep", "coupling_amplitude"): ""})


def _read(text):
    parser = configparser.ConfigParser(interpolation=None, strict=True,
                                       inline_comment_prefixes=None)
    parser.optionxform = str.lower
    try:
        parser.read_string(text)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError("duplicate key", section=exc.section, key=exc.option,
                          line=exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError("duplicate section", section=exc.section, line=exc.lineno) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside any section", line=exc.lineno) from None
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", line=line) from None
    return parser


def _build(parser, where) -> ScenarioConfig:
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError("unknown section", section=section,
                              line=where.get((section, None)))
        for key in parser[section]:
            if key not in SCHEMA[section]:
                raise ConfigError("unknown key", section=section, key=key,
                                  line=where.get((section, key)))
    values = {}
    for section, keys in SCHEMA.items():
        values[section] = {}
        for key, (kind, default) in keys.items():
            raw = parser.get(section, key, fallback=default) if parser.has_section(section) \
                else default

            def err(msg, section=section, key=key):
                return ConfigError(msg, section=section, key=key,
                                   line=where.get((section, key)))

            values[section][key] = _convert(kind, raw, err)

    def fail(section, key, msg):
        return ConfigError(msg, section=section, key=key, line=where.get((section, key)))

    sc, md, pr, cp = values["scenario"], values["medium"], values["probe"], values["coupling"]
    gr, pg, rn = values["grid"], values["propagation"], values["run"]
    try:
        medium = MediumParams(md["gamma_upper"], md["gamma_coherence"], md["q_p"])
    except DomainError as exc:
        raise fail("medium", None, str(exc)) from None
    try:
        probe = ProbeEnvelope(pr["kind"], pr["amplitudes"], pr["centers"], pr["widths"],
                              pr["split"], pr["value"], pr["mixing"], pr["samples_t"],
                              pr["samples_value"])
    except DomainError as exc:
        raise fail("probe", None, str(exc)) from None
    try:
        coupling = CouplingProfile(cp["kind"], cp["amplitude"], cp["rate"], cp["t_off"],
                                   cp["samples_t"], cp["samples_value"])
    except DomainError as exc:
        raise fail("coupling", None, str(exc)) from None
    try:
        grid = TimeGrid(gr["t_min"], gr["t_max"], gr["n_points"])
    except DomainError as exc:
        raise fail("grid", None, str(exc)) from None
    z = sc["z"]
    if any(not np.isfinite(v) or v < 0 for v in z):
        raise fail("scenario", "z", "depths must be finite and non-negative")
    if not pg["dz"] > 0:
        raise fail("propagation", "dz", "depth step must be positive")
    reference = None
    if rn["reference"]:
        try:
            reference = Method(rn["reference"])
        except ValueError:
            raise fail("run", "reference", f"unknown method {rn['reference']!r}") from None
    window = rn["fidelity_window"]
    if window is not None:
        if len(window) == 1:
            window = (window[0], None)
        elif len(window) != 2 or window[0] > window[1]:
            raise fail("run", "fidelity_window", "expected 'start' or 'start, end'")
    if Method.MATCHED in sc["methods"] and probe.kind != "constant":
        raise fail("scenario", "methods", "matched needs a constant probe")
    if not md["weak_probe_bound"] > 0:
        raise fail("medium", "weak_probe_bound", "bound must be positive")
    if not values["tolerances"]["resolution"] > 0:
        raise fail("tolerances", "resolution", "tolerance must be positive")
    sweep = values["sweep"]["coupling_amplitude"]
    if any(not a > 0 for a in sweep):
        raise fail("sweep", "coupling_amplitude", "amplitudes must be positive")
    return ScenarioConfig(
        name=sc["name"], description=sc["description"], medium=medium, probe=probe,
        coupling=coupling, grid=grid, z_values=z, methods=sc["methods"], dz=pg["dz"],
        model=Model(pg["model"]), reference=reference, fidelity_window=window,
        analysis=rn["analysis"], time_unit_us=rn["time_unit_us"],
        out_dir=values["output"]["dir"], figures=values["output"]["figures"],
        resolution_tol=values["tolerances"]["resolution"],
        weak_probe_bound=md["weak_probe_bound"], sweep_amplitudes=sweep, values=values)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate scenario text; raises ConfigError with the line."""
    return _build(_read(text), _locate(text))


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
