"""Partial hodograph transform that pins the shock to the z2-axis.

New variables: ``z1 = phi - phi_minus``, ``z2 = y2``; the unknown is
``varphi(z) = y1``.  The downstream potential gradient in terms of varphi is

    phi_y1 = d1 phi_minus + 1/varphi_z1
    phi_y2 = d2 phi_minus - varphi_z2/varphi_z1

where ``phi_minus`` is evaluated at ``(varphi, z2)``.  Everything here is
vectorized; scalar calls work through numpy broadcasting.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import RootBracketFail, TransformDegenerate
from .gas import FlowState, GasModel, bernoulli_B, entropy_A, horizontal_state
from .lagrangian import drho_dA, n_jacobian_arrays, state_arrays
from .shock_polar import PolarPoint, Root, polar_summary, solve_downstream

_GL8_X, _GL8_W = np.polynomial.legendre.leggauss(8)
_GL4_X, _GL4_W = np.polynomial.legendre.leggauss(4)


def smoothstep(t):
    """Quintic C2 step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


def smoothstep_prime(t):
    inside = (t > 0.0) & (t < 1.0)
    tc = np.clip(t, 0.0, 1.0)
    return np.where(inside, 30.0 * tc**2 * (1.0 - tc) ** 2, 0.0)


@dataclass(frozen=True)
class Background:
    """Uniform upstream stream, straight wedge, straight attached shock."""

    gas: GasModel
    upstream: FlowState
    theta0: float
    polar: PolarPoint

    @classmethod
    def build(cls, mach: float, theta0: float, gas: GasModel = GasModel(), p: float = 1.0,
              rho: float = 1.0, root: Root = Root.WEAK) -> "Background":
        up = horizontal_state(mach, gas, p, rho)
        pt = solve_downstream(up, theta0, root, gas, polar_summary(up, gas))
        return cls(gas, up, theta0, pt)

    @property
    def downstream(self) -> FlowState:
        return self.polar.downstream

    @property
    def s1(self) -> float:
        """Lagrangian slope of the background shock y1 = s1*y2."""
        return self.polar.shock_slope_s

    @property
    def s0(self) -> float:
        return self.polar.eulerian_slope

    @property
    def A0(self) -> float:
        return float(entropy_A(self.downstream, self.gas))

    @property
    def B0(self) -> float:
        return float(bernoulli_B(self.upstream, self.gas))

    @property
    def p0(self) -> float:
        return self.downstream.p

    @property
    def mass_minus(self) -> float:
        return self.upstream.rho * self.upstream.u1

    @property
    def mass_plus(self) -> float:
        return self.downstream.rho * self.downstream.u1

    def varphi0(self, z1, z2):
        return z1 / np.tan(self.theta0) + self.s1 * z2


def envelope_profile(amplitude: float, beta: float) -> Callable:
    """Relative perturbation ``amplitude * (1 + y2)**(-1 - beta)``."""
    def f(y2):
        return amplitude * (1.0 + np.asarray(y2, dtype=float)) ** (-1.0 - beta)
    return f


def gaussian_profile(amplitude: float, center: float, width: float) -> Callable:
    def f(y2):
        return amplitude * np.exp(-(((np.asarray(y2, dtype=float) - center) / width) ** 2))
    return f


@dataclass(frozen=True)
class UpstreamField:
    """Supersonic incoming flow: a parallel shear stream in the x1 direction.

    ``rho = rho0 (1 + d_rho(y2))`` and ``u1 = u0 (1 + d_u(y2))`` at constant
    pressure; such streams solve the Euler equations exactly.  The upstream
    potential is extended to the downstream side and replaced by the
    background potential beyond the band ``0 < y1 - 2 s1 y2 < 1``.
    """

    background: Background
    d_rho: Callable | None = None
    d_u: Callable | None = None
    _knots: np.ndarray = field(init=False, repr=False, compare=False)
    _table: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        knots = np.concatenate([np.linspace(0.0, 1.0, 41)[:-1], np.geomspace(1.0, 1e5, 1200)])
        object.__setattr__(self, "_knots", knots)
        if self.uniform:
            table = knots / self.background.mass_minus
        else:
            pieces = self._gl(knots[:-1], knots[1:], _GL8_X, _GL8_W)
            table = np.concatenate([[0.0], np.cumsum(pieces)])
        object.__setattr__(self, "_table", table)

    @property
    def uniform(self) -> bool:
        return self.d_rho is None and self.d_u is None

    @property
    def gas(self) -> GasModel:
        return self.background.gas

    def rho_u(self, y2):
        up = self.background.upstream
        y2 = np.asarray(y2, dtype=float)
        rho = up.rho * (1.0 + (self.d_rho(y2) if self.d_rho else 0.0)) * np.ones_like(y2)
        u = up.u1 * (1.0 + (self.d_u(y2) if self.d_u else 0.0)) * np.ones_like(y2)
        return rho, u

    def state(self, y2) -> FlowState:
        rho, u = self.rho_u(y2)
        return FlowState(u, np.zeros_like(u), self.background.upstream.p * np.ones_like(u), rho)

    def A(self, y2):
        rho, _ = self.rho_u(y2)
        return self.background.upstream.p / rho**self.gas.gamma

    def B(self, y2):
        rho, u = self.rho_u(y2)
        gam = self.gas.gamma
        return 0.5 * u**2 + gam * self.background.upstream.p / ((gam - 1.0) * rho)

    def _inv_mass(self, y2):
        rho, u = self.rho_u(y2)
        return 1.0 / (rho * u)

    def _gl(self, a, b, x, w):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        half = 0.5 * (b - a)
        pts = 0.5 * (a + b)[..., None] + half[..., None] * x
        return half * np.sum(w * self._inv_mass(pts), axis=-1)

    def phi_true(self, y2):
        """Upstream potential: integral of 1/(rho u) along x2 = const lines."""
        y2 = np.asarray(y2, dtype=float)
        if self.uniform:
            return y2 / self.background.mass_minus
        k = np.clip(np.searchsorted(self._knots, y2, side="right") - 1, 0, len(self._knots) - 1)
        return self._table[k] + self._gl(self._knots[k], y2, _GL8_X, _GL8_W)

    def potential(self, y1, y2):
        """Extended upstream potential and its gradient at (y1, y2)."""
        y1 = np.asarray(y1, dtype=float)
        y2 = np.asarray(y2, dtype=float)
        m0 = 1.0 / self.background.mass_minus
        if self.uniform:
            shape = np.broadcast(y1, y2).shape
            return m0 * y2 * np.ones(shape), np.zeros(shape), m0 * np.ones(shape)
        t = y1 - 2.0 * self.background.s1 * y2
        chi = 1.0 - smoothstep(t)
        dchi = -smoothstep_prime(t)
        delta = self.phi_true(y2) - m0 * y2
        ddelta = self._inv_mass(y2) - m0
        phi = m0 * y2 + chi * delta
        return phi, dchi * delta, m0 + chi * ddelta - 2.0 * self.background.s1 * dchi * delta


@dataclass(frozen=True)
class HodographPoint:
    z1: float
    z2: float
    varphi: float
    grad_varphi: tuple[float, float]

    def __post_init__(self):
        if not (self.varphi >= 0 and self.grad_varphi[0] > 0):
            raise TransformDegenerate("need varphi >= 0 and varphi_z1 > 0")


def downstream_gradient(fld: UpstreamField, varphi, z2, pz1, pz2):
    """(phi_y1, phi_y2, [phi_y1], [phi_y2]) from hodograph data."""
    pz1 = np.asarray(pz1, dtype=float)
    if np.any(pz1 <= 0):
        raise TransformDegenerate("varphi_z1 must stay positive")
    _, m1, m2 = fld.potential(varphi, z2)
    j1 = 1.0 / pz1
    j2 = -np.asarray(pz2) / pz1
    return m1 + j1, m2 + j2, j1, j2


def mbar_flux(fld: UpstreamField, z2, A, varphi, pz1, pz2, B=None):
    """Transformed fluxes (M1bar, M2bar)."""
    B = fld.B(z2) if B is None else B
    py1, py2, _, _ = downstream_gradient(fld, varphi, z2, pz1, pz2)
    u1, u2, p, rho = state_arrays(py1, py2, A, B, fld.gas)
    return -u2 + p * pz2, -p * pz1


def mbar_jacobian(fld: UpstreamField, z2, A, varphi, pz1, pz2, B=None):
    """Closed-form d(Mbar)/d(grad varphi).

    Returns (a11, a12, a21, a22, det) with a_ij = dMbar^i/dvarphi_zj and
    det = a11 a22 - a12 a21.
    """
    B = fld.B(z2) if B is None else B
    py1, py2, j1, j2 = downstream_gradient(fld, varphi, z2, pz1, pz2)
    u1, u2, p, rho = state_arrays(py1, py2, A, B, fld.gas)
    n11, n12, n22, _ = n_jacobian_arrays(u1, u2, p, rho, fld.gas)
    x = n12 * j1 + n22 * j2
    a11 = j1**2 * n11 + 2.0 * j1 * j2 * n12 + j2**2 * n22
    det = p**2 + j1**2 * (n11 * n22 - n12**2)
    return a11, x + p, x - p, n22, det


def _choke_A(B, py1, py2, gam):
    kk = (1.0 + py1**2) / py2**2
    rho_s = np.sqrt(kk * (gam + 1.0) / (2.0 * (gam - 1.0) * B))
    return kk / (gam * rho_s ** (gam + 1.0))


def _state_A(A, B, py1, py2, gas):
    """State and its A-derivative at fixed potential gradient (rho u1 and u2/u1 stay fixed)."""
    u1, u2, p, rho = state_arrays(py1, py2, A, B, gas, check=False)
    gam = gas.gamma
    rho_A = drho_dA(u1, u2, p, rho, gas)
    u1_A = -u1 * rho_A / rho
    p_A = rho**gam + gam * p / rho * rho_A
    return (u1, u2, p, rho), (u1_A, py1 * u1_A, p_A)


def _G(A, B, py1, py2, j1, j2, um, pm, rhom, gas, deriv=False):
    (u1, u2, p, rho), (u1_A, u2_A, p_A) = _state_A(A, B, py1, py2, gas)
    val = j1 * ((u1 + p * py2) - (um + pm / (rhom * um))) - j2 * (p * py1)
    return (val, j1 * (u1_A + py2 * p_A) - j2 * py1 * p_A) if deriv else val


def _H(A, B, py1, py2, j1, j2, um, pm, rhom, gas, deriv=False):
    (u1, u2, p, rho), (u1_A, u2_A, p_A) = _state_A(A, B, py1, py2, gas)
    val = j1 * u2 + j2 * (p - pm)
    return (val, j1 * u2_A + j2 * p_A) if deriv else val


def _shock_data(fld, z2, varphi, pz1, pz2):
    z2, varphi, pz1, pz2 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (z2, varphi, pz1, pz2)))
    py1, py2, j1, j2 = downstream_gradient(fld, varphi, z2, pz1, pz2)
    rhom, um = fld.rho_u(z2)
    pm = fld.background.upstream.p * np.ones_like(um)
    return fld.B(z2), py1, py2, j1, j2, um, pm, rhom


def _solve_A(fn, fld, data, bracket_scale, max_iter: int = 100):
    """Monotone scalar root in A per node: Newton safeguarded by bisection on a sign bracket."""
    B, py1, py2 = data[0], data[1], data[2]
    gas = fld.gas
    hi = _choke_A(B, py1, py2, gas.gamma) * (1.0 - 1e-12)
    hi = np.minimum(hi, bracket_scale * fld.background.A0)
    lo = fld.background.A0 / bracket_scale * np.ones_like(hi)
    flo = fn(lo, *data, gas)
    fhi = fn(hi, *data, gas)
    if np.any(~(np.sign(flo) * np.sign(fhi) < 0)):
        bad = np.flatnonzero(~(np.sign(flo) * np.sign(fhi) < 0))
        raise RootBracketFail(f"no sign change in the entropy bracket at {bad.size} shock node(s)")
    up = fhi > 0
    x = np.clip(fld.background.A0 * np.ones_like(hi), lo, hi)
    done = np.zeros(x.shape, dtype=bool)
    for _ in range(max_iter):
        f, df = fn(x, *data, gas, deriv=True)
        pos = (f > 0) == up
        hi = np.where(pos, x, hi)
        lo = np.where(pos, lo, x)
        xn = x - f / df
        bad = ~((xn >= lo) & (xn <= hi)) | ~np.isfinite(xn)
        xn = np.where(bad, 0.5 * (lo + hi), xn)
        step = np.abs(xn - x)
        x = np.where(done, x, xn)
        # the step that lands within 1e-14 was itself a Newton step: error is now quadratic in it
        done |= step <= 1e-14 * np.abs(x)
        if np.all(done):
            break
    else:
        raise RootBracketFail("entropy root solve did not converge")
    return x


def shock_roots(fld: UpstreamField, z2, varphi, pz1, pz2, bracket_scale: float = 2.0):
    """(g1, g2): entropy values solving the momentum (G) and transverse (H) conditions."""
    data = _shock_data(fld, z2, varphi, pz1, pz2)
    return _solve_A(_G, fld, data, bracket_scale), _solve_A(_H, fld, data, bracket_scale)


def shock_condition_g(fld: UpstreamField, z2, varphi, pz1, pz2, bracket_scale: float = 2.0):
    g1, g2 = shock_roots(fld, z2, varphi, pz1, pz2, bracket_scale)
    return g2 - g1


def entropy_update_H(fld: UpstreamField, z2, varphi, pz1, pz2, bracket_scale: float = 2.0):
    """Entropy value making the transverse shock condition hold."""
    return _solve_A(_H, fld, _shock_data(fld, z2, varphi, pz1, pz2), bracket_scale)


def shock_residuals(fld: UpstreamField, z2, A, varphi, pz1, pz2):
    """(G, H) evaluated at a given entropy."""
    data = _shock_data(fld, z2, varphi, pz1, pz2)
    A = np.asarray(A, dtype=float) * np.ones_like(data[0])
    return _G(A, *data, fld.gas), _H(A, *data, fld.gas)


def shock_obliqueness(fld: UpstreamField, z2, varphi, pz1, pz2, rel_step: float = 1e-6):
    """Central-difference (nu1, nu2, c) = dg/d(varphi_z1, varphi_z2, varphi)."""
    z2, varphi, pz1, pz2 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (z2, varphi, pz1, pz2)))
    h1 = rel_step * np.abs(pz1)
    h2 = rel_step * np.maximum(np.abs(pz2), np.abs(pz1))
    h0 = rel_step * np.maximum(np.abs(varphi), 1.0)
    zz = np.concatenate([z2] * 6)
    vv = np.concatenate([varphi, varphi, varphi, varphi, varphi + h0, varphi - h0])
    p1 = np.concatenate([pz1 + h1, pz1 - h1, pz1, pz1, pz1, pz1])
    p2 = np.concatenate([pz2, pz2, pz2 + h2, pz2 - h2, pz2, pz2])
    gv = shock_condition_g(fld, zz, vv, p1, p2).reshape(6, -1)
    if fld.uniform:
        c = np.zeros_like(z2)
    else:
        c = (gv[4] - gv[5]) / (2 * h0)
    return (gv[0] - gv[1]) / (2 * h1), (gv[2] - gv[3]) / (2 * h2), c


@dataclass
class FarFieldState:
    """Limit potential at infinity, built from the entropy along the shock."""

    fld: UpstreamField
    z2_nodes: np.ndarray
    A_nodes: np.ndarray
    w0: float
    l_nodes: np.ndarray = field(init=False)

    def __post_init__(self):
        a, b = self.z2_nodes[:-1], self.z2_nodes[1:]
        half = 0.5 * (b - a)
        pts = 0.5 * (a + b)[:, None] + half[:, None] * _GL4_X
        pieces = half * np.sum(_GL4_W * self.l_prime(pts), axis=-1)
        self.l_nodes = self.w0 + np.concatenate([[0.0], np.cumsum(pieces)])

    @property
    def theta0(self) -> float:
        return self.fld.background.theta0

    def A_of(self, z2):
        return np.interp(z2, self.z2_nodes, self.A_nodes)

    def rho_inf(self, z2):
        return (self.fld.background.p0 / self.A_of(z2)) ** (1.0 / self.fld.gas.gamma)

    def l_prime(self, z2):
        gam = self.fld.gas.gamma
        rho = self.rho_inf(z2)
        rhs = self.fld.B(z2) * rho**2 - gam / (gam - 1.0) * self.fld.background.p0 * rho
        return np.sqrt((1.0 + np.tan(self.theta0) ** 2) / (2.0 * rhs))

    def l(self, z2):
        """l(z2) by exact quadrature of the piecewise-linear entropy interpolant."""
        z2 = np.asarray(z2, dtype=float)
        k = np.clip(np.searchsorted(self.z2_nodes, z2, side="right") - 1, 0, len(self.z2_nodes) - 2)
        a = self.z2_nodes[k]
        half = 0.5 * (z2 - a)
        pts = 0.5 * (a + z2)[..., None] + half[..., None] * _GL4_X
        return self.l_nodes[k] + half * np.sum(_GL4_W * self.l_prime(pts), axis=-1)

    def state(self, z2) -> FlowState:
        """Parallel far-field state along the streamline z2."""
        gam = self.fld.gas.gamma
        rho = self.rho_inf(z2)
        p0 = self.fld.background.p0
        q = np.sqrt(2.0 * (self.fld.B(z2) - gam * p0 / ((gam - 1.0) * rho)))
        return FlowState(q * np.cos(self.theta0), q * np.sin(self.theta0), p0 * np.ones_like(q), rho)

    def b_tilde0(self, z1):
        return (np.asarray(z1, dtype=float) - self.w0) / np.tan(self.theta0)

    def varphi_inf(self, z1, z2, lz=None):
        """Pointwise root of z1 = tan(theta0) varphi + l(z2) - phi_minus(varphi, z2)."""
        z1, z2 = np.broadcast_arrays(np.asarray(z1, dtype=float), np.asarray(z2, dtype=float))
        t0 = np.tan(self.theta0)
        lz = self.l(z2) if lz is None else lz
        if self.fld.uniform:
            return (z1 - lz + z2 / self.fld.background.mass_minus) / t0
        x = (z1 - lz + self.fld.phi_true(z2)) / t0
        for _ in range(60):
            pm, pm1, _ = self.fld.potential(x, z2)
            step = (t0 * x + lz - pm - z1) / (t0 - pm1)
            x = x - step
            if np.all(np.abs(step) <= 1e-15 * np.maximum(np.abs(x), 1.0)):
                break
        return x

    def varphi_inf_gradient(self, varphi, z2):
        """Exact (d/dz1, d/dz2) of varphi_inf, given its values, from the defining relation."""
        _, m1, m2 = self.fld.potential(varphi, z2)
        den = np.tan(self.theta0) - m1
        return 1.0 / den, (m2 - self.l_prime(z2)) / den

    def l_inverse(self, s):
        """g = l^{-1} on the sampled range, by monotone interpolation then Newton."""
        s = np.asarray(s, dtype=float)
        y = np.interp(s, self.l_nodes, self.z2_nodes)
        for _ in range(30):
            step = (self.l(y) - s) / self.l_prime(y)
            y = y - step
            if np.all(np.abs(step) <= 1e-14 * np.maximum(np.abs(y), 1.0)):
                break
        return y


def far_field(fld: UpstreamField, z2_nodes, A_nodes, w0: float = 0.0) -> FarFieldState:
    return FarFieldState(fld, np.asarray(z2_nodes, dtype=float), np.asarray(A_nodes, dtype=float), float(w0))


def anchor_entropy(fld: UpstreamField, wedge_slope0: float, root: Root = Root.WEAK) -> float:
    """Entropy behind the shock at the wedge tip from the local polar."""
    up0 = fld.state(0.0)
    up0 = FlowState(float(up0.u1), 0.0, float(up0.p), float(up0.rho))
    pt = solve_downstream(up0, float(np.arctan(wedge_slope0)), root, fld.gas)
    return float(entropy_A(pt.downstream, fld.gas))
