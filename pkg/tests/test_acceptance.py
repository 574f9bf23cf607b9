"""Acceptance criteria, one PASS/FAIL line each (also collected in the terminal summary)."""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from maglattice.analytic import AnalyticParams, analytic_field, curvature_analytic, model_for_spec
from maglattice.config import RB87, BiasField, LatticeSpec
from maglattice.fieldmodel import maxwell_residuals
from maglattice.magnetostatics import PrismModel, build_prisms
from maglattice.sweep import SweepPlan, compare_models, run_sweep, table3_report
from maglattice.traps import classify_bands, extract_sites, site_lookup, trap_frequency, well_depth

CENTER, EDGE = (0, 5, 5), (0, 10, 5)


def report(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def within_rel(v, ref, tol):
    return math.isfinite(v) and abs(v - ref) <= tol * abs(ref)


def within_abs(v, ref, tol):
    return math.isfinite(v) and abs(v - ref) <= tol


@pytest.fixture(scope="module")
def zero_bias_run(t1_spec):
    t0 = time.perf_counter()
    sites = extract_sites(build_prisms(t1_spec), t1_spec)
    return site_lookup(sites), time.perf_counter() - t0


def test_criterion_1_reference_table_zero_bias(zero_bias_run):
    lut, elapsed = zero_bias_run
    c, e = lut[CENTER], lut[EDGE]
    checks = {
        "center b_min": within_rel(c.b_min, 0.5, 0.15),
        "center d_min": within_abs(c.d_min, 0.718, 0.07),
        "edge b_min": within_rel(e.b_min, 0.37, 0.15),
        "edge d_min": within_abs(e.d_min, 0.8451, 0.07),
        "runtime": elapsed < 60.0,
    }
    ok = all(checks.values())
    report(1, "zero-bias center/edge vs 0.5 G, 0.718 um / 0.37 G, 0.8451 um", ok,
           f"center ({c.b_min:.3g} G, {c.d_min:.4f} um), edge ({e.b_min:.3g} G, {e.d_min:.4f} um), "
           f"runtime {elapsed:.1f} s; failed: {[k for k, v in checks.items() if not v]}")
    assert ok


def test_criterion_2_reference_table_x_bias(t1_spec, zero_bias_run):
    lut0, _ = zero_bias_run
    spec = t1_spec.replace(bias=BiasField(2.0, 0.0, 0.0))
    lut = site_lookup(extract_sites(build_prisms(spec), spec, indices=[CENTER, EDGE], metrics=False))
    c, e = lut[CENTER], lut[EDGE]
    checks = {
        "edge b_min": within_rel(e.b_min, 2.03, 0.15),
        "center b_min": within_rel(c.b_min, 2.1, 0.15),
        "center d_min shift": within_abs(c.d_min, lut0[CENTER].d_min, 0.01),
        "edge d_min shift": within_abs(e.d_min, lut0[EDGE].d_min, 0.01),
    }
    ok = all(checks.values())
    report(2, "B_x bias 2 G: edge 2.03 G, center 2.1 G, d_min shift < 0.01 um", ok,
           f"center ({c.b_min:.3g} G, {c.d_min:.4f} um), edge ({e.b_min:.3g} G, {e.d_min:.4f} um); "
           f"failed: {[k for k, v in checks.items() if not v]}")
    assert ok


def test_criterion_3_periodicity_table():
    rep = table3_report(0.2, 0.1)
    parts = []
    for r in rep.rows:
        parts.append(f"Mz={r['Mz_gauss']:.0f} ah={r['alpha_h_um']} as={r['alpha_s_um']}: "
                     f"center ({r['center'][0]:.3g} G, {r['center'][1]:.4f} um) "
                     f"edge ({r['edge'][0]:.3g} G, {r['edge'][1]:.4f} um) {'ok' if r['pass'] else 'off'}")
    report(3, "four periodicity rows within 20% / 0.1 um", rep.passed, "; ".join(parts))
    assert rep.passed


def test_criterion_4_cross_model(t1_spec):
    spec = t1_spec.replace(holes_n=20)
    rep = compare_models(spec)
    ok = rep.p95 < 0.10
    report(4, "n=20 central cell analytic vs prism p95 < 10% for z - tau in [0.5, 2] alpha", ok,
           f"p95 {rep.p95:.3g}, mean {rep.mean:.3g}, max {rep.max:.3g} over {rep.count} points")
    assert ok


def test_criterion_5_maxwell(t1_spec, rng):
    alpha = t1_spec.alpha_h
    pts = np.column_stack([rng.uniform(-12, 12, 1000), rng.uniform(-12, 12, 1000),
                           t1_spec.film_top + rng.uniform(0.3 * alpha, 3 * alpha, 1000)])
    worst = {}
    for name, model in (("analytic", model_for_spec(t1_spec)), ("prism", PrismModel(build_prisms(t1_spec)))):
        div, curl = maxwell_residuals(model, pts, 0.005 * alpha)
        worst[name] = (float(np.abs(div).max()), float(curl.max()))
    ok = all(d < 1e-6 and c < 1e-6 for d, c in worst.values())
    report(5, "|div B|, |curl B| < 1e-6 G/um at 1000 probes, both models", ok,
           ", ".join(f"{k}: div {d:.2g}, curl {c:.2g}" for k, (d, c) in worst.items()))
    assert ok


def test_criterion_6_analytic_identities(rng):
    p = AnalyticParams.from_values(2000.0, 1.0, 2.0)
    pts = np.column_stack([rng.uniform(-3, 3, 2000), rng.uniform(-3, 3, 2000), 2.0 + rng.uniform(0, 3, 2000)])
    b = analytic_field(pts, p)
    env2 = p.b_ref**2 * np.exp(-2 * p.beta * (pts[:, 2] - p.tau))
    ref = env2 * (2 + 2 * np.cos(p.beta * pts[:, 0]) * np.cos(p.beta * pts[:, 1]))
    ident = float(np.max(np.abs((b**2).sum(axis=1) - ref) / (4 * env2)))
    diag = []
    for t in rng.uniform(-1, 1, 50):
        cx, cy = curvature_analytic((t, t, 2.6), p)
        diag.append(cx == cy)
    lo = analytic_field(pts, p)
    hi = analytic_field(pts + [0, 0, p.alpha], p)
    ratio = np.linalg.norm(hi, axis=1) / np.linalg.norm(lo, axis=1)
    keep = np.linalg.norm(lo, axis=1) > 1e-6
    decay = float(np.max(np.abs(ratio[keep] - math.exp(-math.pi))))
    ok = ident < 1e-12 and all(diag) and decay < 1e-12
    report(6, "|B|^2 identity 1e-12, diagonal curvature equality, e^-pi decay per alpha", ok,
           f"identity err {ident:.2g}, diagonal equal {sum(diag)}/{len(diag)}, decay err {decay:.2g}")
    assert ok


def test_criterion_7_trends(t1_spec):
    flat_wall = t1_spec.replace(tau_wall=2.0)  # 2 kG, tau = 2 um, no wall feature
    d = run_sweep(SweepPlan(flat_wall, "alpha_um", (1, 3, 5, 7), probes="center", metrics=False)).series("d_min", "center")
    bz = run_sweep(SweepPlan(t1_spec, "bias_z_gauss", (0, -2, -5, -10), probes="center"))
    dbx = bz.series("dBx", "center")
    values = (0.0, 2.0, 5.0, 10.0)
    per_bias = []
    for v in values:
        spec = t1_spec.replace(bias=BiasField(v, 0.0, 0.0))
        per_bias.append([s.b_min for s in extract_sites(build_prisms(spec), spec, metrics=False)])
    per_bias = np.array(per_bias)  # (bias, site)
    mono_sites = int(np.sum(np.all(np.diff(per_bias, axis=0) > 0, axis=0)))
    checks = {
        "d_min(alpha)": bool(np.all(np.diff(d) > 0)),
        "dBx(-bz)": bool(np.all(np.diff(dbx) < 0)),
        "b_min(bx) every site": mono_sites == per_bias.shape[1],
    }
    ok = all(checks.values())
    report(7, "d_min up in alpha, center dBx down in -B_z, b_min up in B_x at every site", ok,
           f"d_min {np.round(d, 4).tolist()}, dBx {np.round(dbx, 3).tolist()}, "
           f"b_min monotone at {mono_sites}/{per_bias.shape[1]} sites "
           f"(b_min range {per_bias.min():.2g}..{per_bias.max():.2g} G); "
           f"failed: {[k for k, v in checks.items() if not v]}")
    assert ok


def _large_spec():
    return LatticeSpec(holes_n=100, alpha_h=10.0, alpha_s=10.0, tau_btm=3.0, tau_wall=2.5, remanence_Mz=2800.0)


def test_criterion_8_symmetry_and_bands(t1_sites):
    # part 1: symmetric spec, partners co-banded at 1e-6 G
    part = classify_bands(t1_sites, 1e-6, assign=False)
    n = 11
    co = all(part.band_of(s.site_index) == part.band_of((0, a, b))
             for s in t1_sites for a, b in [(n - 1 - s.i, s.j), (s.i, n - 1 - s.j), (s.j, s.i)])
    # part 2: n = 100 negative wall
    spec = _large_spec()
    n = spec.holes_n
    interior = [(0, i, j) for i in range(40, 60) for j in range(40, 60)]
    ring = [(0, i, j) for i in range(n) for j in range(n) if min(i, j) == 0 or max(i, j) == n - 1]
    t0 = time.perf_counter()
    sites = extract_sites(build_prisms(spec), spec, method="lattice", metrics=False, indices=interior + ring)
    elapsed = time.perf_counter() - t0
    lut = site_lookup(sites)
    bi = np.array([lut[k].b_min for k in interior])
    be = np.array([lut[k].b_min for k in ring])
    failed = sum(not s.ok for s in sites)
    spread_i = float(np.nanmax(bi) - np.nanmin(bi))
    spread_e = float(np.nanmax(be) - np.nanmin(be))
    large_ok = failed == 0 and spread_i < 0.1 * spread_e and elapsed < 900
    ok = co and large_ok
    report(8, "4-fold partners co-banded at 1e-6 G; n=100 interior spread < 10% of edge-ring spread", ok,
           f"co-banded {co}; interior spread {spread_i:.3g} G, edge-ring spread {spread_e:.3g} G, "
           f"failed sites {failed}, runtime {elapsed:.0f} s")
    assert ok


def test_criterion_9_constants():
    depth = well_depth(1.0, RB87)
    nu = trap_frequency(1.0, RB87).standard_hz
    ok = abs(depth - 67.2) <= 0.001 * 67.2 and abs(nu - 12.8e3) <= 0.01 * 12.8e3
    report(9, "well depth 67.2 uK +/-0.1%, Rb-87 frequency 12.8 kHz +/-1% at 1 G/um^2", ok,
           f"depth {depth:.4f} uK, frequency {nu:.1f} Hz")
    assert ok
