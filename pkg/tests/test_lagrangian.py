import numpy as np
import pytest

from transonic_wedge.errors import NoSubsonicRoot, ParallelJump, SonicDegeneracy, Stagnation
from transonic_wedge.gas import FlowState, bernoulli_B, entropy_A, is_subsonic
from transonic_wedge.lagrangian import (LagrangianGradient, StreamData, density, drho_dA, flux_N, flux_N_jacobian,
                                        n_jacobian_arrays, shock_slope_from_jump, sonic_density,
                                        state_from_gradient, stream_data, stream_function, to_lagrangian_gradient)
from transonic_wedge.shock_polar import Root, solve_downstream

SUB = FlowState(0.8, 0.15, 1.7, 1.4)


def test_round_trip(gas):
    grad = to_lagrangian_gradient(SUB)
    back = state_from_gradient(grad, stream_data(SUB, gas), gas)
    for a, b in zip((back.u1, back.u2, back.p, back.rho), (SUB.u1, SUB.u2, SUB.p, SUB.rho)):
        assert a == pytest.approx(b, rel=1e-12)


def test_gradient_validation():
    with pytest.raises(ValueError):
        LagrangianGradient(0.1, -1.0)
    with pytest.raises(ValueError):
        StreamData(-1.0, 2.0)
    with pytest.raises(Stagnation):
        to_lagrangian_gradient(FlowState(0.0, 0.3, 1.0, 1.0))


def test_density_is_subsonic_root(gas):
    sd = stream_data(SUB, gas)
    grad = to_lagrangian_gradient(SUB)
    rho = density(grad.phi_y1, grad.phi_y2, sd.A, sd.B, gas)
    assert rho > sonic_density(sd.A, sd.B, gas)
    assert rho == pytest.approx(SUB.rho, rel=1e-13)


def test_sonic_density_is_where_mach_is_one(gas):
    A, B = 1.0, 4.0
    rs = sonic_density(A, B, gas)
    c2 = gas.gamma * A * rs ** (gas.gamma - 1)
    q2 = 2 * (B - c2 / (gas.gamma - 1))
    assert q2 == pytest.approx(c2, rel=1e-12)


def test_choked_gradient_has_no_subsonic_root(gas):
    grad = to_lagrangian_gradient(SUB)
    sd = stream_data(SUB, gas)
    with pytest.raises(NoSubsonicRoot):
        density(grad.phi_y1, 0.2 * grad.phi_y2, sd.A, sd.B, gas)


def test_supersonic_state_is_the_other_root(gas, m2):
    grad = to_lagrangian_gradient(m2)
    sd = stream_data(m2, gas)
    rho = density(grad.phi_y1, grad.phi_y2, sd.A, sd.B, gas)
    assert rho > m2.rho


def test_flux_jacobian_matches_differences(gas):
    grad = to_lagrangian_gradient(SUB)
    sd = stream_data(SUB, gas)
    J, disc = flux_N_jacobian(grad, sd, gas)
    h = 1e-6
    fd = np.zeros((2, 2))
    for k in range(2):
        e = np.array([grad.phi_y1, grad.phi_y2])
        ep, em = e.copy(), e.copy()
        ep[k] += h
        em[k] -= h
        fd[:, k] = (np.array(flux_N(LagrangianGradient(*ep), sd, gas)) - np.array(flux_N(LagrangianGradient(*em), sd, gas))) / (2 * h)
    assert np.allclose(J, fd, rtol=1e-6)
    assert J[0, 1] == J[1, 0]
    assert J[0, 0] > 0 and disc > 0
    assert np.linalg.det(J) == pytest.approx(disc, rel=1e-10)


def test_jacobian_rejects_sonic(gas):
    c = np.sqrt(gas.gamma)
    with pytest.raises(SonicDegeneracy):
        n_jacobian_arrays(c, 0.0, 1.0, 1.0, gas)


def test_drho_dA_matches_difference(gas):
    grad = to_lagrangian_gradient(SUB)
    sd = stream_data(SUB, gas)
    h = 1e-7 * sd.A
    fd = (density(grad.phi_y1, grad.phi_y2, sd.A + h, sd.B, gas) - density(grad.phi_y1, grad.phi_y2, sd.A - h, sd.B, gas)) / (2 * h)
    assert drho_dA(SUB.u1, SUB.u2, SUB.p, SUB.rho, gas) == pytest.approx(fd, rel=1e-6)


def test_shock_slope_from_polar_jump(gas, m2):
    pt = solve_downstream(m2, np.radians(15), Root.STRONG, gas)
    s = shock_slope_from_jump(to_lagrangian_gradient(m2), to_lagrangian_gradient(pt.downstream))
    assert s == pytest.approx(pt.shock_slope_s, rel=1e-10)
    with pytest.raises(ParallelJump):
        shock_slope_from_jump(LagrangianGradient(0.0, 1.0), LagrangianGradient(0.0, 2.0))


def test_polar_states_share_bernoulli(gas, m2):
    pt = solve_downstream(m2, np.radians(10), Root.WEAK, gas)
    assert bernoulli_B(pt.downstream, gas) == pytest.approx(bernoulli_B(m2, gas))
    assert entropy_A(pt.downstream, gas) > entropy_A(m2, gas)
    assert not is_subsonic(pt.downstream, gas)


def test_stream_function_uniform():
    x1 = np.linspace(0, 1, 5)
    x2 = np.linspace(0, 2, 9)
    psi = stream_function(x1, x2, np.full((5, 9), 1.5))
    assert np.allclose(psi, 1.5 * x2[None, :])
