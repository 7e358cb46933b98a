import numpy as np
import pytest

from oracles import critical_angle, normal_shock, oblique_pressure, sonic_angle, strong_beta
from transonic_wedge.errors import Detached, DegeneratePoint, NearSonic, NotSupersonic
from transonic_wedge.gas import FlowState, bernoulli_B, entropy_A, horizontal_state, mach
from transonic_wedge.shock_polar import (Arc, Root, classify_arc, derivative_system, kp_formula, polar_curve,
                                         polar_summary, rh_residuals, solve_downstream)

# frozen oracle values (theta-beta-M relation, computed independently)
THETA_C_DEG = 22.97353176093794
THETA_S_DEG = 22.705986752585883
P_STRONG_15 = 4.354556264491546


def test_oracle_values_frozen():
    assert np.degrees(critical_angle(2.0)[0]) == pytest.approx(THETA_C_DEG, abs=1e-9)
    assert np.degrees(sonic_angle(2.0)[0]) == pytest.approx(THETA_S_DEG, abs=1e-9)
    assert oblique_pressure(strong_beta(np.radians(15), 2.0), 2.0) == pytest.approx(P_STRONG_15, rel=1e-12)


def test_normal_shock(m2, gas):
    pt = solve_downstream(m2, 0.0, Root.STRONG, gas)
    p, rho, u, M = normal_shock(2.0)
    d = pt.downstream
    assert d.p == pytest.approx(p, rel=1e-12)
    assert d.rho == pytest.approx(rho, rel=1e-12)
    assert d.u1 == pytest.approx(u, rel=1e-12)
    assert d.u2 == 0.0
    assert mach(d, gas) == pytest.approx(M, rel=1e-12)


def test_weak_root_at_zero_angle_is_trivial(m2, gas):
    assert solve_downstream(m2, 0.0, Root.WEAK, gas).downstream == m2


def test_roots_coincide_at_detachment(m2, gas):
    tc = polar_summary(m2, gas).theta_critical
    a = solve_downstream(m2, tc, Root.STRONG, gas).downstream
    b = solve_downstream(m2, tc, Root.WEAK, gas).downstream
    assert a.p == pytest.approx(b.p, rel=1e-6)
    with pytest.raises(Detached):
        solve_downstream(m2, tc * 1.001, Root.STRONG, gas)


def test_strong_root_matches_oblique_oracle(m2, gas):
    pt = solve_downstream(m2, np.radians(15), Root.STRONG, gas)
    assert pt.downstream.p == pytest.approx(P_STRONG_15, rel=1e-10)
    assert np.degrees(pt.wedge_angle) == pytest.approx(15.0, abs=1e-10)


def test_summary_angles(m2, gas):
    s = polar_summary(m2, gas)
    assert np.degrees(s.theta_critical) == pytest.approx(THETA_C_DEG, abs=1e-7)
    assert np.degrees(s.theta_sonic) == pytest.approx(THETA_S_DEG, abs=1e-7)
    assert 0 < s.theta_sonic < s.theta_critical < np.pi / 2


def test_near_unit_mach_angles_vanish(gas):
    s = polar_summary(horizontal_state(1.01, gas), gas)
    assert 0 < np.degrees(s.theta_sonic) < np.degrees(s.theta_critical) < 1.0


def test_upstream_checks(gas):
    with pytest.raises(NotSupersonic):
        polar_summary(horizontal_state(0.8, gas), gas)
    with pytest.raises(NearSonic):
        polar_summary(horizontal_state(1.0 + 1e-9, gas), gas)


def test_curve_endpoints_and_invariants(m2, gas):
    pts = polar_curve(m2, gas, 200)
    p, *_ = normal_shock(2.0)
    assert pts[0].downstream.u2 == 0 and pts[0].pressure == pytest.approx(p)
    assert pts[-1].pressure - m2.p < 1e-5
    theta = np.array([q.wedge_angle for q in pts])
    assert np.degrees(theta.max()) == pytest.approx(THETA_C_DEG, abs=0.05)
    Bu = bernoulli_B(m2, gas)
    for q in pts[:-1]:
        assert bernoulli_B(q.downstream, gas) == pytest.approx(Bu, rel=1e-10)
        assert entropy_A(q.downstream, gas) > entropy_A(m2, gas)
        assert np.all(rh_residuals(m2, q.downstream, q.shock_slope_s, gas) <= 1e-10)


def test_angle_increases_from_normal_shock_to_tangency(m2, gas):
    s = polar_summary(m2, gas)
    pts = [q for q in polar_curve(m2, gas, 400) if q.pressure >= s.p_tangent]
    theta = np.array([q.wedge_angle for q in pts])
    assert np.all(np.diff(theta) > 0)


def test_arc_labels(m2, gas):
    s = polar_summary(m2, gas)
    assert classify_arc(solve_downstream(m2, 0.0, Root.STRONG, gas), m2, gas)[0] is Arc.NORMAL_S
    assert classify_arc(solve_downstream(m2, s.theta_critical, Root.STRONG, gas), m2, gas)[0] is Arc.TANGENT
    near = s.theta_critical - 1e-3
    weak = solve_downstream(m2, near, Root.WEAK, gas)
    strong = solve_downstream(m2, near, Root.STRONG, gas)
    assert classify_arc(weak, m2, gas)[0] is Arc.TS and weak.Cp < 0
    assert classify_arc(strong, m2, gas)[0] is Arc.TH and strong.Cp > 0


def test_kp_signs_and_finite_difference(m2, gas):
    from transonic_wedge.shock_polar import _point
    pt = solve_downstream(m2, np.radians(15), Root.STRONG, gas)
    h = 1e-5
    kp = (_point(m2, pt.pressure + h, gas).k - _point(m2, pt.pressure - h, gas).k) / (2 * h)
    assert kp_formula(pt, m2, gas) == pytest.approx(kp, rel=1e-5)
    assert kp_formula(pt, m2, gas) < 0
    s = polar_summary(m2, gas)
    ts = solve_downstream(m2, 0.5 * (s.theta_sonic + s.theta_critical), Root.WEAK, gas)
    assert kp_formula(ts, m2, gas) > 0
    with pytest.raises(DegeneratePoint):
        kp_formula(solve_downstream(m2, 0.0, Root.STRONG, gas), m2, gas)


def test_derivative_system_consistency(m2, gas):
    from transonic_wedge.shock_polar import _point
    pt = _point(m2, 3.0, gas)
    h = 1e-6
    a, b = _point(m2, 3.0 + h, gas), _point(m2, 3.0 - h, gas)
    X = np.array([(a.downstream.rho - b.downstream.rho), (a.downstream.u1 - b.downstream.u1), (a.k - b.k)]) / (2 * h)
    M, f = derivative_system(pt, m2, gas)
    assert np.allclose(M @ X, f, rtol=1e-5, atol=1e-5 * np.abs(f).max())
