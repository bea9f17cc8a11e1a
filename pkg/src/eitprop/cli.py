"""Command line entry point: ``eitprop run | list-presets | validate | dump-preset``.

Exit status is 0 on success, 1 for configuration errors and 2 when a solver
fails. ``EITPROP_WORKERS`` sets how many scenarios run in parallel.
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .analytic import Method
from .config import ScenarioConfig, load_config
from .errors import ConfigError, EitpropError
from .presets import load_preset, preset_names
from .runner import run_scenario, worker_count

log = logging.getLogger("eitprop")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2


def _parse_methods(text):
    names = [x.strip() for x in text.split(",") if x.strip()]
    try:
        return tuple(Method(n) for n in names)
    except ValueError as exc:
        raise ConfigError(f"--methods: {exc}") from None


def _parse_overrides(items):
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        section, dot, name = key.strip().partition(".")
        if not sep or not dot:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        out[(section.strip(), name.strip().lower())] = value.strip()
    return out


def _load(args) -> list:
    if args.config and args.preset:
        raise ConfigError("give either a config file or --preset, not both")
    if args.preset == "all":
        cfgs = [load_preset(n) for n in preset_names()]
    elif args.preset:
        if args.preset not in preset_names():
            raise ConfigError(f"unknown preset {args.preset!r}; "
                              f"choose from {', '.join(preset_names())}")
        cfgs = [load_preset(args.preset)]
    elif args.config:
        cfgs = [load_config(args.config)]
    else:
        raise ConfigError("run needs a config file or --preset")
    overrides = _parse_overrides(args.set)
    if overrides:
        cfgs = [c.with_overrides(overrides) for c in cfgs]
    return cfgs


def _run_one(cfg: ScenarioConfig, out_dir, methods, figures):
    try:
        result = run_scenario(cfg, out_dir, methods, figures)
    except (EitpropError, ArithmeticError, ValueError) as exc:
        return cfg.name, EXIT_SOLVER, f"{type(exc).__name__}: {exc}"
    return cfg.name, EXIT_OK, f"{len(result.files)} files in {result.files[-1].parent}"


def cmd_run(args) -> int:
    try:
        cfgs = _load(args)
        methods = _parse_methods(args.methods) if args.methods is not None else None
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    figures = True if args.figures else None
    jobs = []
    for cfg in cfgs:
        out = None
        if args.out is not None:
            out = Path(args.out) / cfg.name if len(cfgs) > 1 else Path(args.out)
        jobs.append((cfg, out, methods, figures))
    workers = min(worker_count(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_one, *zip(*jobs)))
    else:
        outcomes = [_run_one(*job) for job in jobs]
    status = EXIT_OK
    for name, code, msg in outcomes:
        stream = sys.stdout if code == EXIT_OK else sys.stderr
        print(f"{name}: {'ok' if code == EXIT_OK else 'failed'}, {msg}", file=stream)
        status = max(status, code)
    return status


def _summary(cfg: ScenarioConfig) -> str:
    p, c = cfg.probe, cfg.coupling
    if p.kind == "constant":
        probe = f"theta_0 = {p.value:g}"
    else:
        terms = ", ".join(f"{a:g}@{m:g}/{w:g}" for a, m, w in
                          zip(p.amplitudes, p.centers, p.widths))
        probe = f"{p.kind} [{terms}]" + (" (mixing angle)" if p.mixing else "")
    amp = (", ".join(f"{a:.4g}" for a in cfg.sweep_amplitudes)
           if cfg.sweep_amplitudes else f"{c.amplitude:.4g}")
    z = ", ".join(f"{v:g}" for v in cfg.z_values)
    extra = f", gamma={cfg.medium.gamma_coherence:g}" if cfg.medium.gamma_coherence else ""
    return f"probe {probe}; coupling {c.kind} x {amp}; z = {z}{extra}"


def cmd_list(args) -> int:
    for name in preset_names():
        cfg = load_preset(name)
        print(f"{name:12s} {cfg.description}")
        print(f"{'':12s} {_summary(cfg)}")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{args.config}: ok ({cfg.name}; {_summary(cfg)})")
    return EXIT_OK


def cmd_dump(args) -> int:
    if args.name not in preset_names():
        print(f"config error: unknown preset {args.name!r}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(load_preset(args.name).to_ini())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eitprop",
                                     description="Probe propagation, storage and retrieval "
                                                 "in a medium with induced transparency.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario from a config file or preset")
    run.add_argument("config", nargs="?", help="scenario file (INI)")
    run.add_argument("--preset", help="built-in scenario name, or 'all'")
    run.add_argument("--out", help="output directory (per scenario subdirectory for 'all')")
    run.add_argument("--methods", help="comma-separated methods; empty for a report-only run")
    run.add_argument("--figures", action="store_true", help="also render PNG figures")
    run.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                     help="override a config key (repeatable)")
    run.set_defaults(func=cmd_run)

    lst = sub.add_parser("list-presets", help="list built-in scenarios")
    lst.set_defaults(func=cmd_list)

    val = sub.add_parser("validate", help="check a config file")
    val.add_argument("config")
    val.set_defaults(func=cmd_validate)

    dump = sub.add_parser("dump-preset", help="print a preset as a config file")
    dump.add_argument("name")
    dump.set_defaults(func=cmd_dump)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
