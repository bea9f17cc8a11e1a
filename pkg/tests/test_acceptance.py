"""Acceptance criteria, one test each, at the stated tolerances."""
import time

import mpmath
import numpy as np
import pytest
from scipy.signal import argrelmax

from eitprop.analytic import (
    asymptote_blurring,
    asymptote_polariton,
    matched_pulse,
    relative_l2,
    shape_distance,
    solve_full,
    solve_full_gamma,
)
from eitprop.cli import main
from eitprop.oracle import PropagationGrid, oracle_mb, oracle_pde
from eitprop.physics import (
    CouplingProfile,
    MediumParams,
    Model,
    ProbeEnvelope,
    TimeGrid,
    gamma1_of_t,
)
from eitprop.presets import load_preset
from eitprop.regimes import classify
from eitprop.runner import compute
from eitprop.special import i0_scaled, kernel

HUMP = ProbeEnvelope("double_gaussian", (0.012, 0.01), (750.0, 1000.0), (100.0, 100.0))
COUPLING = CouplingProfile("constant", amplitude=np.sqrt(0.4))
MEDIUM = MediumParams()
GRID = TimeGrid(0.0, 3000.0, 4096)


def test_01_boundary_identity(acceptance):
    start = time.perf_counter()
    out = solve_full(HUMP, COUPLING, MEDIUM, GRID, [0.0])
    elapsed = time.perf_counter() - start
    theta0, _ = HUMP.mixing_angle(COUPLING, GRID.times)
    err = np.max(np.abs(out.theta[0] - theta0)) / np.max(theta0)
    ok = acceptance(1, err <= 1e-6 and elapsed < 1.0,
                    f"boundary identity max error {err:.2e} (<= 1e-6), {elapsed:.2f} s (< 1 s)")
    assert ok


def test_02_oracle_equivalence(acceptance):
    start = time.perf_counter()
    z = [4.0, 40.0]
    full = solve_full(HUMP, COUPLING, MEDIUM, GRID, z)
    pde = oracle_pde(HUMP, COUPLING, MEDIUM, PropagationGrid.with_step(GRID, 40.0, 0.25), z)
    fine_grid = GRID.refined()
    full2 = solve_full(HUMP, COUPLING, MEDIUM, fine_grid, z)
    pde2 = oracle_pde(HUMP, COUPLING, MEDIUM, PropagationGrid.with_step(fine_grid, 40.0, 0.125),
                      z)
    elapsed = time.perf_counter() - start
    coarse = [relative_l2(pde.theta[k], full.theta[k]) for k in range(2)]
    fine = [relative_l2(pde2.theta[k], full2.theta[k]) for k in range(2)]
    factors = [c / f for c, f in zip(coarse, fine)]
    ok = max(coarse) <= 1e-3 and min(factors) >= 3.5 and elapsed < 30.0
    acceptance(2, ok, f"relative L2 z=4: {coarse[0]:.2e}, z=40: {coarse[1]:.2e} (<= 1e-3); "
                      f"halving steps reduces by {factors[0]:.2f}x, {factors[1]:.2f}x (>= 3.5); "
                      f"{elapsed:.1f} s (< 30 s)")
    assert ok


def test_03_model_error_bound(acceptance):
    theta0, _ = HUMP.mixing_angle(COUPLING, GRID.times)
    duration = classify(HUMP, COUPLING, MEDIUM, 40.0, GRID).gamma_T
    omega_c_T = float(COUPLING.omega(0.0)) * duration
    start = time.perf_counter()
    z = [4.0, 40.0]
    full = solve_full(HUMP, COUPLING, MEDIUM, GRID, z)
    mb = oracle_mb(HUMP, COUPLING, MEDIUM, PropagationGrid.with_step(GRID, 40.0, 0.25), z)
    elapsed = time.perf_counter() - start
    errs = [relative_l2(mb.theta[k], full.theta[k]) for k in range(2)]
    ok = (omega_c_T >= 20 and np.max(np.abs(theta0)) <= 0.05 and max(errs) <= 0.05
          and elapsed < 60.0)
    acceptance(3, ok, f"Maxwell-Bloch vs full: z=4 {errs[0]:.2e}, z=40 {errs[1]:.2e} (<= 5%); "
                      f"Omega_c T = {omega_c_T:.0f}, max theta_0 = {np.max(theta0):.3f}; "
                      f"{elapsed:.1f} s (< 60 s)")
    assert ok


def test_04_polariton_regime(acceptance):
    z = 4.0
    full = solve_full(HUMP, COUPLING, MEDIUM, GRID, [z])
    pol = asymptote_polariton(HUMP, COUPLING, MEDIUM, GRID, [z])
    err = relative_l2(pol.theta[0], full.theta[0])
    humps = len(argrelmax(full.theta[0])[0])
    margin = classify(HUMP, COUPLING, MEDIUM, z, GRID, duration=100.0).verdicts["polariton"][1]
    ok = err <= 0.05 and humps == 2
    acceptance(4, ok, f"polariton asymptote vs full {err:.2e} (<= 5%), {humps} maxima "
                      f"(expect 2), margin {margin:.2f} at Gamma_1 T = 40")
    assert ok


@pytest.mark.filterwarnings("ignore::eitprop.errors.WeakProbeWarning")
def test_05_blurring_regime(acceptance):
    a, b = load_preset("fig3a"), load_preset("fig3b")
    t = a.grid.times
    g1 = gamma1_of_t(a.medium, a.coupling, t)
    areas = [np.trapezoid(g1 * c.probe.mixing_angle(c.coupling, t)[0], t) for c in (a, b)]
    area_gap = abs(areas[0] - areas[1]) / areas[0]
    fa = solve_full(a.probe, a.coupling, a.medium, a.grid, a.z_values)
    fb = solve_full(b.probe, b.coupling, b.medium, b.grid, b.z_values)
    ba = asymptote_blurring(a.probe, a.coupling, a.medium, a.grid, a.z_values)
    bb = asymptote_blurring(b.probe, b.coupling, b.medium, b.grid, b.z_values)
    between = shape_distance(fa.theta[0], fb.theta[0])
    to_asym = [shape_distance(fa.theta[0], ba.theta[0]), shape_distance(fb.theta[0], bb.theta[0])]
    ok = area_gap <= 0.01 and between <= 0.02 and max(to_asym) <= 0.10
    acceptance(5, ok, f"areas differ by {area_gap:.1e} (<= 1%); shapes a vs b {between:.4f} "
                      f"(<= 0.02); vs blurring asymptote {to_asym[0]:.4f}, {to_asym[1]:.4f} "
                      f"(<= 0.10)")
    assert ok


def test_06_storage_ordering(acceptance):
    start = time.perf_counter()
    good = load_preset("fig5").with_overrides({("scenario", "methods"): "full"})
    poor = load_preset("fig6").with_overrides({("scenario", "methods"): "full"})
    _, good_case = compute(good)
    _, poor_case = compute(poor)
    elapsed = time.perf_counter() - start
    z_good = good.z_values[-1]
    z_poor = poor.z_values[-1]
    regime = next(r for r in good_case["regimes"] if r["z"] == z_good)
    margins = (regime["verdicts"]["fitting"]["margin"], regime["verdicts"]["good_storage"]["margin"])
    smear = next(r for r in poor_case["regimes"] if r["z"] == z_poor)
    f_good = good_case["fidelity"]["full"][f"{z_good:g}"]
    f_poor = poor_case["fidelity"]["full"][f"{z_poor:g}"]
    ok = (min(margins) >= 1 and f_good > 0.9 and f_poor < f_good
          and smear["verdicts"]["polariton"]["verdict"] == "Violated"
          and smear["verdicts"]["fitting"]["margin"] >= 1 and elapsed < 60.0)
    acceptance(6, ok, f"fidelity f(t) coupling z={z_good:g}: {f_good:.3f} (> 0.9, margins "
                      f"{margins[0]:.2f}, {margins[1]:.2f} >= 1); f(t)/sqrt(10) z={z_poor:g}: "
                      f"{f_poor:.3f} (lower); {elapsed:.1f} s (< 60 s)")
    assert ok


def test_07_stationary_absorption(acceptance):
    cfg = load_preset("gammaV_cw")
    _, case = compute(cfg)
    fit = case["absorption_fit"]
    errs = {m: fit[m]["relative_error"] for m in ("full_gamma", "oracle_pde")}
    ok = max(errs.values()) <= 0.02 and cfg.model is Model.DEPHASED
    acceptance(7, ok, f"fitted decay rate vs gamma/Gamma_1 = {fit['expected_rate']:.5f}: "
                      f"full_gamma {errs['full_gamma']:.1e}, oracle_pde {errs['oracle_pde']:.1e}"
                      f" (<= 2%)")
    assert ok


def test_08_complete_stop(acceptance):
    m = MediumParams(gamma_coherence=0.01)
    c = CouplingProfile("switch_off", amplitude=1.0, rate=1.0, t_off=1200.0)
    t = np.linspace(1200.0, 2000.0, 80001)
    g1 = gamma1_of_t(m, c, t, Model.DEPHASED)
    # Omega_c^2 falls below 1e-6 after ln(1e6)/2 ~ 6.9 decay times
    settled = t >= 1200.0 + 0.5 * np.log(1e6)
    worst = float(np.max(np.abs(g1[settled])))
    ok = worst <= 1e-6 and np.all(np.diff(g1) <= 0)
    acceptance(8, ok, f"max |Gamma_1| after switch-off settles: {worst:.2e} (<= 1e-6), "
                      "decreasing throughout")
    assert ok


def test_09_matched_pulses(acceptance):
    cfg = load_preset("matched")
    fields, _ = compute(cfg)
    worst = max(float(np.max(np.abs(f.theta - 0.05))) for f in fields.values())
    direct = float(np.max(np.abs(matched_pulse(0.05, [0.0, 1e3, 1e6], cfg.grid).theta - 0.05)))
    ok = max(worst, direct) <= 1e-6
    acceptance(9, ok, f"constant theta_0 = 0.05 preserved to {max(worst, direct):.1e} "
                      f"(<= 1e-6) by {', '.join(fields)}")
    assert ok


def _series_oracle(x):
    with mpmath.workdps(60):
        x = mpmath.mpf(x)
        q = x * x / 4
        term = total = mpmath.mpf(1)
        k = 0
        while term > mpmath.mpf(10) ** -40 * total:
            k += 1
            term *= q / (k * k)
            total += term
        return float(total * mpmath.exp(-x))


def test_10_special_functions(acceptance):
    low = np.linspace(0.0, 30.0, 301)
    high = np.geomspace(30.001, 1.0e6, 60)
    err_low = max(abs(i0_scaled(x) / _series_oracle(x) - 1) for x in low)
    err_high = max(abs(i0_scaled(x) / _series_oracle(x) - 1) for x in high[:20])
    with mpmath.workdps(40):
        err_high = max(err_high, max(abs(i0_scaled(x) / float(mpmath.besseli(0, x)
                                                            * mpmath.exp(-x)) - 1)
                                     for x in high))
    rng = np.random.default_rng(20240601)
    z = rng.uniform(0.0, 500.0, 100)
    a = rng.uniform(0.0, 500.0, 100)
    zz, aa = np.meshgrid(z, a)
    asym = float(np.max(np.abs(kernel(zz, aa) - kernel(aa, zz))))
    ok = err_low <= 1e-12 and err_high <= 1e-10 and asym <= np.finfo(float).eps
    acceptance(10, ok, f"i0_scaled error {err_low:.1e} on [0,30] (<= 1e-12), {err_high:.1e} on "
                       f"(30,1e6] (<= 1e-10); kernel asymmetry {asym:.1e} on 100x100")
    assert ok


def test_11_determinism(acceptance, tmp_path):
    times = []
    for run in ("first", "second"):
        start = time.perf_counter()
        assert main(["run", "--preset", "all", "--out", str(tmp_path / run)]) == 0
        times.append(time.perf_counter() - start)
    files = {}
    for run in ("first", "second"):
        root = tmp_path / run
        files[run] = {p.relative_to(root).as_posix(): p.read_bytes()
                      for p in sorted(root.rglob("*")) if p.is_file()}
    same = files["first"] == files["second"]
    ok = same and len(files["first"]) > 0 and max(times) < 300.0
    acceptance(11, ok, f"{len(files['first'])} artifacts byte-identical: {same}; suite runtime "
                       f"{times[0]:.0f} s, {times[1]:.0f} s (< 300 s)")
    assert ok
