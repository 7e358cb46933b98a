"""Potential formulation of the steady Euler system in streamline coordinates.

With ``y1 = x1`` and ``y2`` the stream function, the potential ``phi``
(equal to ``x2``) has gradient ``(u2/u1, 1/(rho u1))``.  Given the entropy
``A`` and Bernoulli value ``B`` carried by a streamline, the state is a
function of that gradient; the density comes from the subsonic root of
Bernoulli's law.

All functions are vectorized over numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import NoSubsonicRoot, ParallelJump, SonicDegeneracy, Stagnation
from .gas import FlowState, GasModel, bernoulli_B, entropy_A


@dataclass(frozen=True)
class LagrangianGradient:
    phi_y1: np.ndarray | float
    phi_y2: np.ndarray | float

    def __post_init__(self):
        if not np.all(np.asarray(self.phi_y2) > 0):
            raise ValueError("phi_y2 must be positive")


@dataclass(frozen=True)
class StreamData:
    A: np.ndarray | float
    B: np.ndarray | float

    def __post_init__(self):
        if not (np.all(np.asarray(self.A) > 0) and np.all(np.asarray(self.B) > 0)):
            raise ValueError("A and B must be positive")


def to_lagrangian_gradient(s: FlowState) -> LagrangianGradient:
    if not np.all(np.asarray(s.u1) > 0):
        raise Stagnation("horizontal velocity must be positive")
    return LagrangianGradient(s.u2 / s.u1, 1.0 / (s.rho * s.u1))


def stream_data(s: FlowState, g: GasModel) -> StreamData:
    return StreamData(entropy_A(s, g), bernoulli_B(s, g))


def sonic_density(A, B, g: GasModel):
    """Density at which the Bernoulli relation switches from subsonic to supersonic."""
    gam = g.gamma
    return (2.0 * (gam - 1.0) * B / (gam * (gam + 1.0) * A)) ** (1.0 / (gam - 1.0))


_EPS = np.finfo(float).eps


def _bernoulli_residual(rho, K, A, B, gam):
    return B * rho**2 - gam / (gam - 1.0) * A * rho ** (gam + 1.0) - K


def density(phi_y1, phi_y2, A, B, g: GasModel, check: bool = True):
    """Subsonic root of Bernoulli's law for the given potential gradient.

    The residual is concave and decreasing on the subsonic side, so Newton
    started from any point above the root converges monotonically.
    """
    gam = g.gamma
    phi_y1, phi_y2, A, B = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (phi_y1, phi_y2, A, B)))
    K = (phi_y1**2 + 1.0) / (2.0 * phi_y2**2)
    rs = sonic_density(A, B, g)
    fs = _bernoulli_residual(rs, K, A, B, gam)
    if check and np.any(~(fs > 0)):
        raise NoSubsonicRoot("gradient admits no subsonic density (supersonic or choked data)")
    rho = ((gam - 1.0) * B / (gam * A)) ** (1.0 / (gam - 1.0))
    # f' = 0 at rs and f''' < 0, so the quadratic Taylor root lies above the root
    d2 = gam**2 * (gam + 1.0) / (gam - 1.0) * A * rs ** (gam - 1.0) - 2.0 * B
    # unchecked choked entries get the limiting (sonic) density
    ok = fs > 0
    rho = np.where(ok, np.minimum(rho, rs + np.sqrt(2.0 * np.where(ok, fs, 0.0) / d2)), rs)
    done = False
    for _ in range(200):
        f = _bernoulli_residual(rho, K, A, B, gam)
        df = 2.0 * B * rho - gam * (gam + 1.0) / (gam - 1.0) * A * rho**gam
        step = np.where(ok, f / np.where(ok, df, 1.0), 0.0)
        rho = rho - step
        if done:
            break
        # quadratic convergence: one more step after 1e-13 lands at roundoff; next to a
        # double root the residual reaches roundoff before the step does
        done = bool(np.all((np.abs(step) <= 1e-13 * rho) | (np.abs(f) <= 8 * _EPS * (B * rho**2 + K))))
    return rho


def rho_from_gradient(grad: LagrangianGradient, sd: StreamData, g: GasModel):
    return density(grad.phi_y1, grad.phi_y2, sd.A, sd.B, g)


def state_arrays(phi_y1, phi_y2, A, B, g: GasModel, check: bool = True):
    """(u1, u2, p, rho) as arrays."""
    rho = density(phi_y1, phi_y2, A, B, g, check)
    u1 = 1.0 / (rho * phi_y2)
    return u1, phi_y1 * u1, A * rho**g.gamma, rho


def state_from_gradient(grad: LagrangianGradient, sd: StreamData, g: GasModel) -> FlowState:
    u1, u2, p, rho = state_arrays(grad.phi_y1, grad.phi_y2, sd.A, sd.B, g)
    if np.ndim(u1) == 0:
        return FlowState(float(u1), float(u2), float(p), float(rho))
    return FlowState(u1, u2, p, rho)


def flux_N(grad: LagrangianGradient, sd: StreamData, g: GasModel):
    """The pair (u2, p) whose divergence in (y1, y2) vanishes."""
    u1, u2, p, rho = state_arrays(grad.phi_y1, grad.phi_y2, sd.A, sd.B, g)
    return u2, p


def n_jacobian_arrays(u1, u2, p, rho, g: GasModel):
    """dN/d(grad phi) from the state: returns (N1_1, N1_2, N2_2, disc)."""
    c2 = g.gamma * p / rho
    q2 = u1**2 + u2**2
    d = c2 - q2
    if np.any(d <= 0):
        raise SonicDegeneracy("state is not strictly subsonic")
    n11 = u1 * (c2 - u1**2) / d
    n12 = -c2 * rho * u1 * u2 / d
    n22 = c2 * rho**2 * q2 * u1 / d
    disc = c2 * rho**2 * u1**4 / d  # determinant of the entries above
    return n11, n12, n22, disc


def flux_N_jacobian(grad: LagrangianGradient, sd: StreamData, g: GasModel):
    """Jacobian [[N1_1, N1_2], [N2_1, N2_2]] and its determinant."""
    u1, u2, p, rho = state_arrays(grad.phi_y1, grad.phi_y2, sd.A, sd.B, g)
    n11, n12, n22, disc = n_jacobian_arrays(u1, u2, p, rho, g)
    return np.array([[n11, n12], [n12, n22]]), disc


def drho_dA(u1, u2, p, rho, g: GasModel):
    gam = g.gamma
    c2 = gam * p / rho
    return -gam * rho**gam / ((gam - 1.0) * (c2 - u1**2 - u2**2))


def shock_slope_from_jump(up: LagrangianGradient, down: LagrangianGradient) -> float:
    """Slope of the shock y1 = sigma(y2) from the gradient jump."""
    j1 = np.asarray(down.phi_y1) - np.asarray(up.phi_y1)
    if np.any(j1 == 0):
        raise ParallelJump("no jump in phi_y1; the shock slope is undefined")
    return -(np.asarray(down.phi_y2) - np.asarray(up.phi_y2)) / j1


def stream_function(x1, x2, rho_u1):
    """Trapezoidal stream function on a tensor grid, zero along x2 = x2[0].

    ``rho_u1`` has shape (len(x1), len(x2)).
    """
    return cumulative_trapezoid(rho_u1, x2, axis=1, initial=0.0)
