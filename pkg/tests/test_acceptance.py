"""Acceptance gate: one test per criterion, each reporting a single PASS/FAIL line.

Lines are collected in ``RESULTS`` and printed in the terminal summary.
"""
import time

import numpy as np
import pytest

from conftest import THETA_BUMP
from oracles import critical_angle, normal_shock, sonic_angle
from transonic_wedge.driver import (GridSpec, ProblemSpec, SolverSpec, WedgeBump, euler_residuals, run,
                                    stability_probe)
from transonic_wedge.elliptic.comparison import (Decay, barrier_on_annulus, corner_barrier, oblique_corner_test,
                                                 random_comparison_suite)
from transonic_wedge.elliptic.mms import mms_study
from transonic_wedge.gas import GasModel, horizontal_state, mach
from transonic_wedge.shock_polar import (Arc, Root, _point, classify_arc, kp_formula, normal_shock_pressure,
                                         polar_summary, solve_downstream)

pytestmark = pytest.mark.acceptance

RESULTS = []
GAS = GasModel(1.4)
UP = horizontal_state(2.0, GAS)
BUMP = WedgeBump("compact-poly", 1e-3, 2.0, 1.5)


def bump_spec(n=128, R=8.0, ratio=1.0, amplitude=1e-3, **kw):
    return ProblemSpec(mach=2.0, theta0=THETA_BUMP, bump=BUMP if amplitude == 1e-3 else
                       WedgeBump("compact-poly", amplitude, 2.0, 1.5), grid=GridSpec(R, n, n, 1.0, ratio), **kw)


def report(num, name, ok, detail, t0, budget):
    dt = time.perf_counter() - t0
    ok = bool(ok) and dt < budget
    RESULTS.append(f"[{'PASS' if ok else 'FAIL'}] {num:2d} {name}: {detail} ({dt:.1f} s / {budget:.0f} s)")
    assert ok, RESULTS[-1]


def test_01_normal_shock():
    t0 = time.perf_counter()
    d = solve_downstream(UP, 0.0, Root.STRONG, GAS).downstream
    p, rho, u, M = normal_shock(2.0)
    errs = [abs(d.p / p - 1), abs(d.rho / rho - 1), abs(float(mach(d, GAS)) / M - 1)]
    report(1, "normal shock", max(errs) <= 1e-8, f"max rel err {max(errs):.1e}", t0, 1)


def test_02_polar_angles():
    t0 = time.perf_counter()
    s = polar_summary(UP, GAS)
    tc, ts = np.degrees(s.theta_critical), np.degrees(s.theta_sonic)
    oc, os_ = np.degrees(critical_angle(2.0)[0]), np.degrees(sonic_angle(2.0)[0])
    ok = abs(tc - 22.97) <= 0.05 and abs(ts - 22.71) <= 0.05 and ts < tc and abs(tc - oc) < 1e-6 and abs(ts - os_) < 1e-6
    report(2, "polar angles", ok, f"theta_c {tc:.5f} deg, theta_s {ts:.5f} deg", t0, 5)


def test_03_kp_formula():
    t0 = time.perf_counter()
    s = polar_summary(UP, GAS)
    pn = normal_shock_pressure(UP, GAS)
    # subsonic part of the polar minus the normal-shock point, where k vanishes
    ps = np.linspace(s.p_sonic, pn, 52)[1:-1]
    worst, signs_ok, counts = 0.0, True, {Arc.TS: 0, Arc.TH: 0}
    for p in ps:
        pt = _point(UP, p, GAS)
        h = 1e-5 * p
        fd = (_point(UP, p + h, GAS).k - _point(UP, p - h, GAS).k) / (2 * h)
        kp = kp_formula(pt, UP, GAS)
        worst = max(worst, abs(kp - fd) / abs(fd))
        arc = classify_arc(pt, UP, GAS)[0]
        if arc in counts:
            counts[arc] += 1
            signs_ok &= np.sign(kp) == (1 if arc is Arc.TS else -1)
    ok = worst <= 1e-5 and signs_ok and counts[Arc.TS] > 0 and counts[Arc.TH] > 0
    report(3, "kp formula", ok, f"max rel err {worst:.1e} over {ps.size} points, "
           f"{counts[Arc.TS]} TS / {counts[Arc.TH]} TH signs ok={signs_ok}", t0, 5)


def test_04_euler_residuals():
    t0 = time.perf_counter()
    res = [euler_residuals(*run(bump_spec(n), decay=False)) for n in (64, 128, 256)]
    parts, ok = [], True
    for k in res[0]:
        e = np.array([r[k] for r in res])
        if e[-1] <= 1e-11:
            parts.append(f"{k} at roundoff ({e[-1]:.0e})")
            continue
        orders = np.log2(e[:-1] / e[1:])
        ok &= bool(np.all(orders >= 1.5))
        parts.append(f"{k} orders {orders[0]:.2f},{orders[1]:.2f}")
    report(4, "Euler residual order", ok, "; ".join(parts), t0, 300)


def test_05_background():
    t0 = time.perf_counter()
    sol, eul = run(bump_spec(amplitude=0.0), decay=False)
    rep = sol.report
    sr = rep.shock_residuals
    worst = max(rep.background_deviation, sr["phi_jump"], sr["g_tilde"], sr["h_tilde"],
                rep.rh_residual_sup, rep.slip_residual)
    ok = rep.converged and rep.outer_iterations == 1 and worst <= 1e-10
    report(5, "background fixed point", ok, f"max residual {worst:.1e}, {rep.outer_iterations} outer", t0, 30)


def test_06_free_boundary():
    t0 = time.perf_counter()
    sol, _ = run(bump_spec(), decay=False)
    sr = sol.report.shock_residuals
    shock = max(sr.values())
    rh = sol.report.rh_residual_sup
    ok = sol.report.converged and shock <= 1e-8 and rh <= 1e-6
    report(6, "free-boundary conditions", ok, f"shock {shock:.1e}, RH {rh:.1e}", t0, 120)


def test_07_decay():
    t0 = time.perf_counter()
    beta = 0.25
    out = []
    for R, n in ((256.0, 128), (512.0, 146)):
        sol, _ = run(bump_spec(n, R, 1.04))
        d = sol.report.decay
        out.append((d.get("state_exponent"), d.get("slope_exponent"), len(d.get("state_annuli", [])),
                    len(d.get("slope_annuli", []))))
    (s1, k1, a1, b1), (s2, k2, a2, b2) = out
    first = s1 is not None and k1 is not None and s1 >= 1.0 and k1 >= 0.15 and min(a1, b1) >= 3
    # under doubling the measured rates must not fall below the claimed rates 1+beta and beta
    second = s2 is not None and k2 is not None and s2 >= 1 + beta and k2 >= beta
    report(7, "decay", first and second, f"R=256 state {s1:.2f} slope {k1:.2f}; R=512 state {s2:.2f} "
           f"slope {k2:.2f}", t0, 600)


def test_08_stability():
    t0 = time.perf_counter()
    probe = stability_probe(bump_spec(64))
    ratios = ", ".join(f"{r['ratio']:.3f}" for r in probe["rows"])
    report(8, "stability collapse", probe["spread"] <= 2.0, f"ratios {ratios}, spread {probe['spread']:.3f}", t0, 600)


def test_09_comparison():
    t0 = time.perf_counter()
    trials = random_comparison_suite(100, seed=0)
    passed = sum(a.holds and b.holds for a, b in trials)
    disc, _, _, _ = barrier_on_annulus(corner_barrier(Decay(0.25, 0.5, 0.1), power_term=True))
    ok = passed == 100 and all(a.slack <= 1e-8 and b.slack <= 1e-8 for a, b in trials) and np.all(disc < 0)
    report(9, "comparison harness", ok, f"{passed}/100 trials, max L v3 = {disc.max():.2e}", t0, 60)


def test_10_mms():
    t0 = time.perf_counter()
    st = mms_study((16, 32, 64, 128))
    report(10, "MMS order", st.min_order >= 1.9, "orders " + ", ".join(f"{o:.3f}" for o in st.orders), t0, 120)


def test_11_counterexample():
    t0 = time.perf_counter()
    rep = oblique_corner_test()
    ok = abs(rep.holder_exponent - 0.5) <= 0.05 and rep.oblique_residual < 1e-10 and rep.dirichlet_residual < 1e-10
    report(11, "oblique-corner counterexample", ok, f"Holder exponent {rep.holder_exponent:.4f}, "
           f"gradient unbounded={rep.gradient_unbounded}", t0, 30)
