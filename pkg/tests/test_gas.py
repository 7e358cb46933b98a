import numpy as np
import pytest

from oracles import normal_shock
from transonic_wedge.gas import (FlowState, GasModel, bernoulli_B, entropy_A, horizontal_state, is_subsonic, mach,
                                 sonic_speed)

P2, RHO2, U2, M2 = normal_shock(2.0)


def test_gamma_must_exceed_one():
    with pytest.raises(ValueError):
        GasModel(1.0)


def test_state_requires_positive_thermodynamics():
    with pytest.raises(ValueError):
        FlowState(1.0, 0.0, -1.0, 1.0)
    with pytest.raises(ValueError):
        FlowState(1.0, 0.0, 1.0, 0.0)


@pytest.mark.parametrize("p, rho, c", [(1.4, 1.4, np.sqrt(1.4)), (1.0, 1.4, 1.0), (P2, RHO2, 1.5370426148939398)])
def test_sonic_speed(gas, p, rho, c):
    assert sonic_speed(FlowState(0.0, 0.0, p, rho), gas) == pytest.approx(c, rel=1e-12)


def test_mach_limits(gas):
    rest = FlowState(0.0, 0.0, 1.0, 1.0)
    assert mach(rest, gas) == 0.0 and is_subsonic(rest, gas)
    c = float(sonic_speed(rest, gas))
    sonic = FlowState(c, 0.0, 1.0, 1.0)
    assert mach(sonic, gas) == pytest.approx(1.0, abs=1e-15)
    assert not is_subsonic(FlowState(c * (1 + 1e-12), 0.0, 1.0, 1.0), gas)
    assert mach(horizontal_state(2.0, gas), gas) == pytest.approx(2.0, rel=1e-14)


def test_entropy(gas):
    assert entropy_A(FlowState(0, 0, 1.0, 1.0), gas) == 1.0
    # substitution of the normal-shock downstream state
    assert entropy_A(FlowState(U2, 0, P2, RHO2), gas) == pytest.approx(4.5 / (8 / 3) ** 1.4, rel=1e-14)
    assert entropy_A(FlowState(0, 0, 2.0, 1.3), gas) == pytest.approx(2 * entropy_A(FlowState(0, 0, 1.0, 1.3), gas))


def test_bernoulli(gas):
    assert bernoulli_B(FlowState(0, 0, 1.0, 1.0), gas) == pytest.approx(3.5)
    up = horizontal_state(2.0, gas)
    assert bernoulli_B(up, gas) == pytest.approx(6.3, rel=1e-14)
    assert bernoulli_B(FlowState(U2, 0, P2, RHO2), gas) == pytest.approx(6.3, rel=1e-14)


def test_horizontal_state(gas):
    s = horizontal_state(2.0, gas, p=2.0, rho=3.0)
    assert s.u2 == 0 and s.p == 2.0 and s.rho == 3.0
    assert mach(s, gas) == pytest.approx(2.0)
