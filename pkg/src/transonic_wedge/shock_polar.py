"""Oblique shocks off a uniform horizontal supersonic stream.

The polar is parameterized by the downstream pressure ``p``.  Writing the
Rankine-Hugoniot relations in Lagrangian form and eliminating the shock
slope, the momentum relations combine into ``u1 = u1- - [p]/(rho- u1-)``;
the energy relation then gives ``rho`` explicitly and the mass relation
gives ``k**2 = (u2/u1)**2``.  Every quantity on the polar is therefore an
explicit rational function of ``p`` and no branch tracking is needed.

Arc labels follow the sign of the classification quantity ``Cp``: the arc
with ``Cp < 0`` (TS) joins the tangency point T to the sonic point and
carries the weak subsonic solutions; the arc with ``Cp > 0`` (TH) joins T
to the normal shock.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DegeneratePoint, Detached, NearSonic, NotSubsonic, NotSupersonic
from .gas import FlowState, GasModel, bernoulli_B, mach, sonic_speed

NEAR_SONIC_BAND = 1e-6


class Root(enum.Enum):
    STRONG = "strong"
    WEAK = "weak"


class Arc(enum.Enum):
    TS = "TS"
    TH = "TH"
    TANGENT = "Tangent"
    SONIC = "Sonic"
    NORMAL_S = "NormalS"
    OTHER = "Other"


@dataclass(frozen=True)
class PolarPoint:
    upstream: FlowState
    downstream: FlowState
    shock_slope_s: float  # Lagrangian slope: shock is y1 = s * y2
    wedge_angle: float
    arc: Arc
    Cp: float

    @property
    def pressure(self) -> float:
        return self.downstream.p

    @property
    def k(self) -> float:
        return self.downstream.u2 / self.downstream.u1

    @property
    def eulerian_slope(self) -> float:
        """Slope s0 of the shock x1 = s0 * x2 in physical coordinates."""
        return self.shock_slope_s * self.upstream.rho * self.upstream.u1


@dataclass(frozen=True)
class PolarSummary:
    theta_sonic: float
    theta_critical: float
    upstream: FlowState
    p_tangent: float
    p_sonic: float
    p_normal: float


def check_upstream(upstream: FlowState, g: GasModel) -> None:
    if abs(upstream.u2) > 1e-14 * abs(upstream.u1):
        raise ValueError("the shock polar is built for a horizontal upstream stream")
    m = float(mach(upstream, g))
    if m <= 1.0:
        raise NotSupersonic(f"upstream Mach number {m:.6g} is not supersonic")
    if m - 1.0 < NEAR_SONIC_BAND:
        raise NearSonic(f"upstream Mach number {m:.12g} is within {NEAR_SONIC_BAND} of 1")


def normal_shock_pressure(upstream: FlowState, g: GasModel) -> float:
    # nontrivial root of k(p) = 0 from the eliminated relations
    gam = g.gamma
    return float(upstream.p + 2.0 / (gam + 1.0) * (upstream.rho * upstream.u1**2 - gam * upstream.p))


def _polar_primitives(upstream: FlowState, p, g: GasModel):
    """(rho, u1, k**2) on the polar at downstream pressure ``p``.

    Written without branches so it accepts complex ``p`` (complex-step
    derivatives in the tests and in the tangency search).
    """
    gam = g.gamma
    m = upstream.rho * upstream.u1
    B = 0.5 * upstream.u1**2 + gam * upstream.p / ((gam - 1.0) * upstream.rho)
    jp = p - upstream.p
    u1 = upstream.u1 - jp / m
    rho = (gam * p / (gam - 1.0) - 0.5 * jp) / (B - 0.5 * u1**2 - 0.5 * u1 * jp / m)
    k2 = -(1.0 / (rho * u1) - 1.0 / m) * jp / u1
    return rho, u1, k2


def downstream_at_pressure(upstream: FlowState, p: float, g: GasModel) -> FlowState:
    rho, u1, k2 = _polar_primitives(upstream, p, g)
    k = np.sqrt(max(k2, 0.0))
    return FlowState(float(u1), float(u1 * k), float(p), float(rho))


def lagrangian_slope(upstream: FlowState, down: FlowState) -> float:
    jp = down.p - upstream.p
    if jp == 0.0:
        return float("nan")
    return down.u2 / jp


def classification_quantity(down: FlowState, upstream: FlowState, g: GasModel) -> float:
    """The sign indicator ``Cp``; jumps are downstream minus upstream."""
    gam = g.gamma
    u1, u2, p, rho = down.u1, down.u2, down.p, down.rho
    c2 = gam * p / rho
    q2 = u1**2 + u2**2
    jp = p - upstream.p
    jm = 1.0 / (rho * u1) - 1.0 / (upstream.rho * upstream.u1)
    return (jp * (c2 + (gam - 1.0) * q2 - gam * u1**2)
            + (gam - 1.0) * rho * q2 * u2**2
            + jm * rho**2 * c2 * u1 * q2)


def _cp_of_pressure(upstream, p, g):
    return classification_quantity(downstream_at_pressure(upstream, p, g), upstream, g)


def _tangency_pressure(upstream: FlowState, g: GasModel) -> float:
    pn = normal_shock_pressure(upstream, g)
    lo = upstream.p + 1e-9 * (pn - upstream.p)
    # Cp < 0 next to the vanishing shock, Cp > 0 at the normal shock
    return brentq(lambda p: _cp_of_pressure(upstream, p, g), lo, pn, xtol=1e-15, rtol=1e-15)


def _sonic_pressure(upstream: FlowState, g: GasModel, p_tangent: float) -> float:
    def f(p):
        return float(mach(downstream_at_pressure(upstream, p, g), g)) - 1.0

    lo = upstream.p * (1.0 + 1e-12)
    return brentq(f, lo, p_tangent, xtol=1e-15, rtol=1e-15)


def polar_summary(upstream: FlowState, g: GasModel) -> PolarSummary:
    check_upstream(upstream, g)
    pn = normal_shock_pressure(upstream, g)
    pt = _tangency_pressure(upstream, g)
    ps = _sonic_pressure(upstream, g, pt)
    tc = np.arctan(downstream_at_pressure(upstream, pt, g).u2 / downstream_at_pressure(upstream, pt, g).u1)
    dsn = downstream_at_pressure(upstream, ps, g)
    ts = np.arctan(dsn.u2 / dsn.u1)
    return PolarSummary(float(ts), float(tc), upstream, pt, ps, pn)


def _point(upstream: FlowState, p: float, g: GasModel, summary: PolarSummary | None = None) -> PolarPoint:
    down = downstream_at_pressure(upstream, p, g)
    s = lagrangian_slope(upstream, down)
    theta = float(np.arctan2(down.u2, down.u1))
    arc, cp = _arc_for(down, upstream, g, summary)
    return PolarPoint(upstream, down, s, theta, arc, cp)


def _arc_for(down, upstream, g, summary):
    cp = float(classification_quantity(down, upstream, g))
    try:
        arc, cp = classify_state(down, upstream, g)
    except NotSubsonic:
        arc = Arc.OTHER
    return arc, cp


def solve_downstream(upstream: FlowState, wedge_angle: float, root: Root = Root.STRONG,
                     g: GasModel = GasModel(), summary: PolarSummary | None = None) -> PolarPoint:
    """Downstream state deflected by ``wedge_angle`` (radians)."""
    summary = summary or polar_summary(upstream, g)
    if wedge_angle < 0:
        raise ValueError("wedge angle must be nonnegative")
    tc = summary.theta_critical
    if wedge_angle > tc * (1.0 + 1e-12):
        raise Detached(f"wedge angle {np.degrees(wedge_angle):.6f} deg exceeds the detachment "
                       f"angle {np.degrees(tc):.6f} deg")
    if wedge_angle >= tc:
        return _point(upstream, summary.p_tangent, g, summary)
    if wedge_angle == 0.0:
        if root is Root.WEAK:
            return PolarPoint(upstream, upstream, float("nan"), 0.0, Arc.OTHER, 0.0)
        return _point(upstream, summary.p_normal, g, summary)

    def f(p):
        d = downstream_at_pressure(upstream, p, g)
        return np.arctan2(d.u2, d.u1) - wedge_angle

    if root is Root.STRONG:
        p = brentq(f, summary.p_tangent, summary.p_normal, xtol=1e-15, rtol=1e-15)
    else:
        p = brentq(f, upstream.p, summary.p_tangent, xtol=1e-15, rtol=1e-15)
    return _point(upstream, p, g, summary)


def polar_curve(upstream: FlowState, g: GasModel, n_samples: int) -> list[PolarPoint]:
    """Samples from the normal shock down to a vanishing-strength shock."""
    if n_samples < 3:
        raise ValueError("need at least 3 samples")
    summary = polar_summary(upstream, g)
    t = np.linspace(1.0, 0.0, n_samples)
    t[-1] = 1e-6
    ps = upstream.p + t * (summary.p_normal - upstream.p)
    return [_point(upstream, float(p), g, summary) for p in ps]


def classify_state(down: FlowState, upstream: FlowState, g: GasModel) -> tuple[Arc, float]:
    m = float(mach(down, g))
    cp = float(classification_quantity(down, upstream, g))
    if abs(m - 1.0) <= 1e-12:
        return Arc.SONIC, cp
    if m > 1.0:
        raise NotSubsonic(f"downstream Mach {m:.6g} is supersonic")
    jp = down.p - upstream.p
    if abs(down.u2) <= 1e-14 * abs(down.u1) and jp > 0:
        return Arc.NORMAL_S, cp
    tol = 1e-10 * abs(jp) * float(sonic_speed(down, g)) ** 2
    if cp < -tol:
        return Arc.TS, cp
    if cp > tol:
        return Arc.TH, cp
    return Arc.TANGENT, cp


def classify_arc(pt: PolarPoint, upstream: FlowState, g: GasModel) -> tuple[Arc, float]:
    return classify_state(pt.downstream, upstream, g)


def kp_formula(pt: PolarPoint, upstream: FlowState, g: GasModel) -> float:
    """Derivative of k = u2/u1 with respect to downstream pressure along the polar."""
    d = pt.downstream
    if abs(d.u2) <= 1e-14 * abs(d.u1):
        raise DegeneratePoint("k_p is undefined at the normal shock (u2 = 0)")
    gam = g.gamma
    c0 = d.u1**3 * d.u2 * d.rho**2 * ((gam + 1.0) * d.p + (gam - 1.0) * upstream.p)
    cp = classification_quantity(d, upstream, g)
    return float(-d.rho * cp / c0)


def rh_residuals(upstream: FlowState, down: FlowState, s: float, g: GasModel) -> np.ndarray:
    """Relative residuals of the four Lagrangian jump relations for a straight shock y1 = s*y2."""
    gam = g.gamma
    k = down.u2 / down.u1
    km = upstream.u2 / upstream.u1
    jp = down.p - upstream.p
    a = 1.0 / (down.rho * down.u1)
    am = 1.0 / (upstream.rho * upstream.u1)
    mom_d = down.u1 + down.p * a
    mom_u = upstream.u1 + upstream.p * am
    r1 = (a - am) + (k - km) * s
    r2 = (mom_d - mom_u) + (down.p * k - upstream.p * km) * s
    r3 = (down.u2 - upstream.u2) - jp * s
    Bd = bernoulli_B(down, g)
    Bu = bernoulli_B(upstream, g)
    r4 = Bd - Bu
    scale = np.array([am, mom_u, abs(upstream.u1), Bu])
    return np.abs(np.array([r1, r2, r3, r4])) / scale


def derivative_system(pt: PolarPoint, upstream: FlowState, g: GasModel):
    """Matrix and right side of the linear system for (rho_p, (u1)_p, k_p).

    Obtained by differentiating the eliminated mass, momentum and energy
    relations with respect to the downstream pressure.
    """
    gam = g.gamma
    d = pt.downstream
    rho, u1, p = d.rho, d.u1, d.p
    k = d.u2 / d.u1
    jp = p - upstream.p
    m = upstream.rho * upstream.u1
    mat = np.array([
        [-jp / (rho**2 * u1), k * k - jp / (rho * u1**2), 2.0 * u1 * k],
        [-p * jp / (rho**2 * u1), p * k * k - p * jp / (rho * u1**2) + jp, 2.0 * p * u1 * k],
        [gam * p / ((gam - 1.0) * rho**2), -u1 * (k * k + 1.0), -u1**2 * k],
    ])
    jump_mass = 1.0 / (rho * u1) - 1.0 / m
    jump_mom = (u1 + p / (rho * u1)) - (upstream.u1 + upstream.p / m)
    rhs = np.array([
        -jump_mass,
        -jump_mom - jp / (rho * u1) - u1 * k * k,
        gam / ((gam - 1.0) * rho),
    ])
    return mat, rhs
