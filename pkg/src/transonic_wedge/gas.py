"""Polytropic gas relations in nondimensional variables.

The entropy is carried through the single quantity ``A = p / rho**gamma``;
the specific heat and the scaling constant of the equation of state never
appear separately.  All functions accept scalars or numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GasModel:
    gamma: float = 1.4

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"adiabatic exponent must exceed 1, got {self.gamma}")


@dataclass(frozen=True)
class FlowState:
    """Primitive state (u1, u2, p, rho).  Fields may be numpy arrays."""

    u1: float
    u2: float
    p: float
    rho: float

    def __post_init__(self):
        if not (np.all(np.asarray(self.p) > 0) and np.all(np.asarray(self.rho) > 0)):
            raise ValueError("pressure and density must be positive")

    @property
    def speed(self):
        return np.hypot(self.u1, self.u2)

    def as_array(self) -> np.ndarray:
        return np.array([self.u1, self.u2, self.p, self.rho], dtype=float)


def sonic_speed(s: FlowState, g: GasModel):
    return np.sqrt(g.gamma * s.p / s.rho)


def mach(s: FlowState, g: GasModel):
    return s.speed / sonic_speed(s, g)


def is_subsonic(s: FlowState, g: GasModel):
    return mach(s, g) < 1.0


def entropy_A(s: FlowState, g: GasModel):
    return s.p / s.rho**g.gamma


def enthalpy(p, rho, g: GasModel):
    return g.gamma * p / ((g.gamma - 1.0) * rho)


def bernoulli_B(s: FlowState, g: GasModel):
    return 0.5 * (s.u1**2 + s.u2**2) + enthalpy(s.p, s.rho, g)


def horizontal_state(mach_number: float, g: GasModel, p: float = 1.0, rho: float = 1.0) -> FlowState:
    """Uniform horizontal stream with the requested Mach number."""
    c = np.sqrt(g.gamma * p / rho)
    return FlowState(mach_number * c, 0.0, p, rho)
