"""End-to-end pipeline: entropy fixed point, Eulerian reconstruction, diagnostics."""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from .elliptic.grid import PotentialField, Tag, TruncatedGrid
from .elliptic.nonlinear import HodographProblem, solve_nonlinear
from .elliptic.norms import decay_report, weighted_sup
from .errors import (ConfigError, Detached, DivergenceError, JacobianDegenerate, MaxIterations, OuterDiverged,
                     PreconditionViolated, TransonicError)
from .gas import FlowState, GasModel, bernoulli_B, entropy_A, horizontal_state
from .hodograph import (Background, FarFieldState, UpstreamField, anchor_entropy, downstream_gradient,
                        envelope_profile, entropy_update_H, far_field, shock_condition_g, smoothstep)
from .lagrangian import state_arrays
from .shock_polar import Root, check_upstream, polar_summary


# -- problem data ------------------------------------------------------------

@dataclass(frozen=True)
class WedgeBump:
    """Perturbation b - b0 of the straight wedge, vanishing with its slope at the tip."""

    kind: str = "compact-poly"
    amplitude: float = 0.0
    center: float = 2.0
    width: float = 1.5

    def __post_init__(self):
        if self.kind not in ("gaussian", "compact-poly"):
            raise ConfigError(f"unknown bump kind {self.kind!r}")
        if self.width <= 0:
            raise ConfigError("bump width must be positive")
        if self.kind == "compact-poly" and self.center < self.width:
            raise ConfigError("compact-poly bump must vanish at the tip (center >= width)")
        if self.kind == "gaussian" and self.center <= 0:
            raise ConfigError("gaussian bump needs a positive center")

    def value(self, x):
        return self._eval(x)[0]

    def slope(self, x):
        return self._eval(x)[1]

    def _eval(self, x):
        x = np.asarray(x, dtype=float)
        a, c, w = self.amplitude, self.center, self.width
        if a == 0.0:
            z = np.zeros_like(x)
            return z, z
        if self.kind == "compact-poly":
            s = (x - c) / w
            inside = np.abs(s) < 1.0
            q = np.where(inside, 1.0 - s**2, 0.0)
            return a * q**4, a * 4.0 * q**3 * (-2.0 * s / w)
        # gaussian switched on by a smoothstep over [0, c]
        e = np.exp(-(((x - c) / w) ** 2))
        t = x / c
        st = smoothstep(t)
        dst = np.where((t > 0) & (t < 1), 30.0 * t**2 * (1 - t) ** 2, 0.0) / c
        return a * e * st, a * e * (dst - 2.0 * (x - c) / w**2 * st)


@dataclass(frozen=True)
class UpstreamPerturbation:
    """Shear perturbation of the incoming stream with envelope (1 + y2)^(-1-beta)."""

    density: float = 0.0
    velocity: float = 0.0
    beta: float = 0.25

    def callbacks(self):
        d_rho = envelope_profile(self.density, self.beta) if self.density else None
        d_u = envelope_profile(self.velocity, self.beta) if self.velocity else None
        return d_rho, d_u


@dataclass(frozen=True)
class GridSpec:
    R: float = 8.0
    n1: int = 64
    n2: int = 64
    k: float = 1.0
    ratio: float = 1.0

    def build(self) -> TruncatedGrid:
        return TruncatedGrid(self.R, self.n1, self.n2, self.k, self.ratio)


@dataclass(frozen=True)
class SolverSpec:
    inner_tol: float = 1e-9
    outer_tol: float = 1e-8
    damping: float = 0.7
    max_inner: int = 60
    max_outer: int = 200
    newton: bool = False
    delta: float = 0.1
    C0: float = 10.0
    outer: str = "anderson"
    anderson_depth: int = 5


@dataclass(frozen=True)
class ProblemSpec:
    mach: float
    theta0: float
    gamma: float = 1.4
    p: float = 1.0
    rho: float = 1.0
    bump: WedgeBump = WedgeBump()
    upstream: UpstreamPerturbation = UpstreamPerturbation()
    w0: float | None = 0.0
    grid: GridSpec = GridSpec()
    solver: SolverSpec = SolverSpec()
    beta: float = 0.25
    alpha: float = 0.5

    @property
    def gas(self) -> GasModel:
        return GasModel(self.gamma)

    @property
    def epsilon(self) -> float:
        return max(abs(self.bump.amplitude), abs(self.upstream.density), abs(self.upstream.velocity))

    def validate(self):
        up = horizontal_state(self.mach, self.gas, self.p, self.rho)
        check_upstream(up, self.gas)
        summ = polar_summary(up, self.gas)
        if self.theta0 > summ.theta_critical:
            raise Detached(f"wedge angle {np.degrees(self.theta0):.4f} deg exceeds detachment angle "
                           f"{np.degrees(summ.theta_critical):.4f} deg")
        if not summ.theta_sonic < self.theta0:
            raise PreconditionViolated(f"wedge angle {np.degrees(self.theta0):.4f} deg is not above the sonic "
                                       f"angle {np.degrees(summ.theta_sonic):.4f} deg")
        if abs(self.bump.value(0.0)) > 0:
            raise ConfigError("wedge must pass through the origin")
        if not 0 < self.beta < self.alpha < 1:
            raise ConfigError("need 0 < beta < alpha < 1")
        return summ

    def wedge(self, x):
        return np.tan(self.theta0) * np.asarray(x, dtype=float) + self.bump.value(x)

    def wedge_slope(self, x):
        return np.tan(self.theta0) + self.bump.slope(x)

    def wedge_inverse(self, z1):
        """b~ = b^{-1}, by Newton from the straight-wedge inverse."""
        z1 = np.asarray(z1, dtype=float)
        x = z1 / np.tan(self.theta0)
        for _ in range(100):
            step = (self.wedge(x) - z1) / self.wedge_slope(x)
            x = x - step
            if np.all(np.abs(step) <= 1e-15 * np.maximum(np.abs(x), 1.0)):
                break
        return x

    def resolved_w0(self) -> float:
        if self.w0 is not None:
            return float(self.w0)
        return float(self.bump.value(self.grid.R))

    def with_amplitude(self, amplitude: float) -> "ProblemSpec":
        from dataclasses import replace
        return replace(self, bump=replace(self.bump, amplitude=amplitude))


def build_upstream(spec: ProblemSpec) -> UpstreamField:
    bg = Background.build(spec.mach, spec.theta0, spec.gas, spec.p, spec.rho, root=Root.WEAK)
    return UpstreamField(bg, *spec.upstream.callbacks())


# -- entropy profile -----------------------------------------------------------

def anchor_A0(fld: UpstreamField, wedge_slope0: float) -> float:
    """Entropy at the wedge tip fixed by the local shock polar."""
    return anchor_entropy(fld, wedge_slope0, Root.WEAK)


def cutoff_chi(z2):
    """1 on [0, 1], 0 on [2, inf), quintic bridge in between."""
    return 1.0 - smoothstep(np.asarray(z2, dtype=float) - 1.0)


def cutoff_wt(anchor: float, A0: float) -> Callable:
    def wt(z2):
        return A0 + (anchor - A0) * cutoff_chi(z2)
    return wt


@dataclass
class EntropyProfile:
    z2: np.ndarray
    A: np.ndarray
    anchor: float
    A0: float

    @property
    def w_t(self) -> np.ndarray:
        return cutoff_wt(self.anchor, self.A0)(self.z2)

    @property
    def lam(self) -> np.ndarray:
        return self.A - self.w_t

    def x_norm(self, beta: float) -> float:
        return weighted_sup(self.A - self.A0, self.z2, 1.0 + beta)


def x_norm(values, z2, beta: float) -> float:
    return weighted_sup(values, z2, 1.0 + beta)


# -- report --------------------------------------------------------------------

@dataclass
class SolveReport:
    converged: bool = False
    outer_iterations: int = 0
    outer_history: list = field(default_factory=list)
    inner_history: list = field(default_factory=list)
    shock_residuals: dict = field(default_factory=dict)
    rh_residual_sup: float | None = None
    slip_residual: float | None = None
    entropy_streamline: float | None = None
    background_deviation: float | None = None
    contraction_ratio: float | None = None
    decay: dict = field(default_factory=dict)
    sensitivity: dict = field(default_factory=dict)
    anchor: float | None = None
    timings: dict = field(default_factory=dict)
    error: dict | None = None

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, (np.floating, float)):
        v = float(o)
        return v if np.isfinite(v) else None
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    return o


def error_record(exc: BaseException) -> dict:
    return {"type": type(exc).__name__, "message": str(exc),
            "exit_code": getattr(exc, "exit_code", 1)}


# -- outer iteration -----------------------------------------------------------

@dataclass
class Solution:
    spec: ProblemSpec
    fld: UpstreamField
    grid: TruncatedGrid
    profile: EntropyProfile
    field: PotentialField
    problem: HodographProblem
    report: SolveReport

    @property
    def far(self) -> FarFieldState:
        return self.problem.far


def entropy_fixed_point(spec: ProblemSpec, log: Callable | None = None, fld: UpstreamField | None = None) -> Solution:
    """Fixed point A = h(z, phi_A, grad phi_A) on the shock nodes around inner nonlinear solves.

    ``outer="picard"`` is the damped map A <- A + w (h - A).  ``outer="anderson"``
    mixes the same damped steps with a short history of previous residuals.
    """
    t_start = time.perf_counter()
    spec.validate()
    fld = fld or build_upstream(spec)
    grid = spec.grid.build()
    sv = spec.solver
    js = grid.operators().shock_j
    z2 = grid.z2
    wedge_vals = spec.wedge_inverse(grid.z1)
    A0 = fld.background.A0
    anchor = anchor_A0(fld, float(spec.wedge_slope(0.0)))
    w0 = spec.resolved_w0()
    report = SolveReport(anchor=anchor)
    mode = "newton" if sv.newton else "picard"
    state = {"phi": None, "first": None, "prev": None, "n": 0}

    def profile_from(x):
        A = cutoff_wt(anchor, A0)(z2)
        A[js] = x
        A[js.max() + 1:] = x[-1]
        A[0] = anchor
        return A

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        if "x" in state and np.array_equal(x, state["x"]):
            return state["res"].copy()
        state["n"] += 1
        outer = state["n"]
        A = profile_from(np.asarray(x, dtype=float))
        prob = HodographProblem(grid, fld, A, far_field(fld, z2, A, w0), wedge_vals)

        def inner_log(rec):
            rec = dict(rec, outer=outer, stage="inner")
            report.inner_history.append(rec)
            if log:
                log(rec)

        fieldv = solve_nonlinear(prob, phi0=state["phi"], mode=mode, tol=sv.inner_tol, max_iter=sv.max_inner,
                                 delta_ball=sv.delta, beta=spec.beta, log=inner_log)
        state["phi"] = fieldv.values.ravel()
        h = entropy_update_H(fld, *prob.shock_data(state["phi"]))
        res = h - A[js]
        xn = weighted_sup(res, z2[js], 1.0 + spec.beta)
        prev = state["prev"]
        rec = {"stage": "outer", "outer": outer, "x_norm": xn,
               "ratio": None if not prev else xn / prev,
               "inner_iterations": fieldv.meta["iterations"], "inner_residual": fieldv.meta["final_residual"]}
        report.outer_history.append(rec)
        if log:
            log(rec)
        first = state["first"] = xn if state["first"] is None else state["first"]
        if not np.isfinite(xn) or xn > 1e3 * max(first, 1e-12):
            raise OuterDiverged(f"entropy iteration diverged: X-norm {xn:.3e}")
        state.update(prev=xn, A=A, prob=prob, field=fieldv, xn=xn, x=x.copy(), res=res.copy())
        return res

    x = cutoff_wt(anchor, A0)(z2[js])
    if sv.outer == "picard":
        for _ in range(sv.max_outer):
            res = evaluate(x)
            if state["xn"] <= sv.outer_tol:
                break
            x = x + sv.damping * res
        else:
            raise MaxIterations(f"entropy iteration did not converge in {sv.max_outer} outer steps")
    elif sv.outer == "anderson":
        res = evaluate(x)
        if state["xn"] > sv.outer_tol:
            try:
                optimize.anderson(evaluate, x, alpha=sv.damping, M=sv.anderson_depth, maxiter=sv.max_outer,
                                  f_tol=sv.outer_tol, tol_norm=lambda r: weighted_sup(r, z2[js], 1.0 + spec.beta),
                                  line_search=None)
            except optimize.NoConvergence as exc:
                raise MaxIterations(f"entropy iteration did not converge in {sv.max_outer} outer steps") from exc
    else:
        raise ConfigError(f"unknown outer method {sv.outer!r}")
    report.converged = True
    ratios = [r["ratio"] for r in report.outer_history if r["ratio"] is not None]
    report.contraction_ratio = float(np.exp(np.mean(np.log(ratios)))) if ratios and min(ratios) > 0 else None
    report.outer_iterations = state["n"]
    report.timings["solve_s"] = time.perf_counter() - t_start
    profile = EntropyProfile(z2.copy(), state["A"].copy(), anchor, A0)
    return Solution(spec, fld, grid, profile, state["field"], state["prob"], report)


# -- reconstruction --------------------------------------------------------------

@dataclass
class EulerianField:
    """Node cloud of the downstream flow and the shock curve."""

    z1: np.ndarray
    z2: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    state: FlowState
    tag: np.ndarray
    jacobian: np.ndarray
    phi_z1: np.ndarray
    phi_z2: np.ndarray
    shock_x2: np.ndarray
    shock_sigma: np.ndarray
    shock_slope: np.ndarray
    shock_z2: np.ndarray

    def rows(self, mask=None):
        keep = self.tag != Tag.UNUSED if mask is None else mask
        s = self.state
        return (self.x1[keep], self.x2[keep], s.u1[keep], s.u2[keep], s.p[keep], s.rho[keep], self.tag[keep])


def nodal_gradient(sol: Solution, values=None):
    """Nodal gradient of varphi: exact far-field part plus second-order differences of the rest.

    Differencing varphi_inf itself would leave an error that is carried along
    streamlines and never decays.  The shock row uses the one-sided stencil of
    the discrete shock condition so that its jump relations stay consistent;
    the wedge tangential derivative uses the exact boundary data.
    """
    g = sol.grid
    v = sol.field.values if values is None else values
    Z1, Z2 = g.mesh
    pinf = sol.problem.phi_inf
    e1, e2 = sol.far.varphi_inf_gradient(pinf, Z2)
    d1, d2 = np.gradient(v - pinf, g.z1, g.z2, edge_order=2)
    d1 = d1 + e1
    d2 = d2 + e2
    s1, s2 = np.gradient(v[:3] - pinf[:3], g.z1[:3], g.z2, edge_order=2)
    d1[0], d2[0] = s1[0] + e1[0], s2[0] + e2[0]
    d1[:, 0] = 1.0 / sol.spec.wedge_slope(v[:, 0])
    return d1, d2


def reconstruct_eulerian(sol: Solution) -> EulerianField:
    g = sol.grid
    fld = sol.fld
    Z1, Z2 = g.mesh
    v = sol.field.values
    d1, d2 = nodal_gradient(sol)
    py1, py2, _, _ = downstream_gradient(fld, v, Z2, d1, d2)
    A = np.interp(Z2, sol.profile.z2, sol.profile.A)
    u1, u2, p, rho = state_arrays(py1, py2, A, fld.B(Z2), fld.gas)
    phm, phm1, phm2 = fld.potential(v, Z2)
    x1 = v.copy()
    x2 = Z1 + phm
    jac = d1 * phm2 - d2
    used = g.tags != Tag.UNUSED
    if np.any(~(jac[used] > 0)):
        raise JacobianDegenerate("hodograph-to-physical map lost orientation")
    js = np.concatenate([[0], g.operators().shock_j])
    sx1 = v[0, js]
    _, a1, a2 = fld.potential(sx1, g.z2[js])
    slope = d2[0, js] / (a1 * d2[0, js] + a2)
    return EulerianField(Z1, Z2, x1, x2, FlowState(u1, u2, p, rho), g.tags.copy(), jac, d1, d2,
                         x2[0, js], sx1, slope, g.z2[js])


def eulerian_rh_residuals(sol: Solution, eul: EulerianField) -> np.ndarray:
    """Relative jumps of mass, momentum and Bernoulli fluxes across the reconstructed shock."""
    g = sol.grid
    js = g.operators().shock_j
    gas = sol.fld.gas
    y2 = g.z2[js]
    up = sol.fld.state(y2)
    d = eul.state
    dn = FlowState(d.u1[0, js], d.u2[0, js], d.p[0, js], d.rho[0, js])
    sl = eul.shock_slope[1:]
    nrm = np.hypot(1.0, sl)
    n1, n2 = 1.0 / nrm, -sl / nrm

    def fluxes(s: FlowState):
        un = s.u1 * n1 + s.u2 * n2
        m = s.rho * un
        return np.stack([m, m * s.u1 + s.p * n1, m * s.u2 + s.p * n2, bernoulli_B(s, gas)])

    fu, fd = fluxes(up), fluxes(dn)
    scale = np.stack([np.abs(fu[0]), np.abs(fu[1]) + up.p, np.abs(fu[2]) + up.p, np.abs(fu[3])])
    return np.abs(fd - fu) / scale


def shock_residuals(sol: Solution) -> dict:
    """Continuity of phi, g~ and the entropy-update residual at shock nodes (corner excluded)."""
    prob = sol.problem
    phi = sol.field.values.ravel()
    z2, v, p1, p2 = prob.shock_data(phi)
    gt = shock_condition_g(sol.fld, z2, v, p1, p2)
    h = entropy_update_H(sol.fld, z2, v, p1, p2)
    js = sol.grid.operators().shock_j
    # downstream x2 = z1 + phi_minus(varphi, z2), upstream x2 = phi_minus at the same Lagrangian point
    z1 = sol.grid.z1[0]
    jump = np.abs(z1 + sol.fld.potential(v, z2)[0] - sol.fld.potential(sol.field.values[0, js], z2)[0])
    return {"phi_jump": float(np.max(jump)), "g_tilde": float(np.max(np.abs(gt))),
            "h_tilde": float(np.max(np.abs(h - sol.profile.A[js])))}


def slip_residual(sol: Solution, eul: EulerianField) -> float:
    s = eul.state
    x1 = eul.x1[:, 0]
    return float(np.max(np.abs(s.u2[:, 0] / s.u1[:, 0] - sol.spec.wedge_slope(x1))))


def streamline_entropy_spread(sol: Solution, eul: EulerianField) -> float:
    s = eul.state
    A = entropy_A(s, sol.fld.gas)
    used = sol.grid.active | (sol.grid.tags == Tag.WEDGE)
    spread = 0.0
    for j in range(sol.grid.n2 + 1):
        col = A[:, j][used[:, j]]
        if col.size:
            spread = max(spread, float((col.max() - col.min()) / col.mean()))
    return spread


def background_deviation(sol: Solution, eul: EulerianField) -> float:
    """Max relative deviation of the downstream state from the background state."""
    d = sol.fld.background.downstream
    s = eul.state
    used = sol.grid.tags != Tag.UNUSED
    dev = max(np.max(np.abs(s.u1 - d.u1)[used]) / abs(d.u1), np.max(np.abs(s.u2 - d.u2)[used]) / abs(d.u1),
              np.max(np.abs(s.p - d.p)[used]) / d.p, np.max(np.abs(s.rho - d.rho)[used]) / d.rho)
    return float(dev)


def euler_residuals(sol: Solution, eul: EulerianField, window=(0.25, 0.5)) -> dict:
    """Max residual of the four Lagrangian Euler equations in an interior window.

    The window is the box [lo*R', hi*R']^2 in z with R' the truncation size, away from
    the corner, the shock axis and the cutoff.
    """
    g = sol.grid
    s = eul.state
    j1, j2 = eul.phi_z1, eul.phi_z2
    lo, hi = window[0] * g.R, window[1] * g.R
    Z1, Z2 = g.mesh
    box = (Z1 >= lo) & (Z1 <= hi) & (Z2 >= lo * g.k) & (Z2 <= hi * g.k) & g.active
    B = sol.fld.B(Z2) * np.ones_like(Z1)

    def dy(f):
        f1, f2 = np.gradient(f, g.z1, g.z2, edge_order=2)
        return f1 / j1, f2 - j2 * f1 / j1

    out = {}
    pairs = {
        "mass": (1.0 / (s.rho * s.u1), -s.u2 / s.u1),
        "momentum1": (s.u1 + s.p / (s.rho * s.u1), -s.p * s.u2 / s.u1),
        "momentum2": (s.u2, s.p),
    }
    for name, (f, gq) in pairs.items():
        a = dy(f)[0]
        b = dy(gq)[1]
        out[name] = float(np.max(np.abs(a + b)[box]))
    out["bernoulli"] = float(np.max(np.abs(dy(B)[0])[box]))
    return out


# -- decay and stability --------------------------------------------------------

def decay_diagnostics(sol: Solution, eul: EulerianField, fraction: float = 0.5, min_annuli: int = 3) -> dict:
    """Fitted exponents of |U - V_inf(x2 - tan(theta0) x1)| and |sigma' - s0| over dyadic annuli.

    Only the part of the domain within ``fraction`` of the truncation size is used,
    since the far-field Dirichlet data pins the solution near the cutoff.
    """
    g = sol.grid
    far = sol.far
    t0 = np.tan(sol.spec.theta0)
    Z1, Z2 = g.mesh
    keep = g.active & (Z1 + Z2 / g.k <= fraction * g.R)
    svar = eul.x2 - t0 * eul.x1
    y = far.l_inverse(svar[keep])
    vinf = far.state(y)
    s = eul.state
    d = sol.fld.background.downstream
    diff = np.max(np.abs(np.stack([(s.u1[keep] - vinf.u1) / d.u1, (s.u2[keep] - vinf.u2) / d.u1,
                                   (s.p[keep] - vinf.p) / d.p, (s.rho[keep] - vinf.rho) / d.rho])), axis=0)
    r = np.hypot(eul.x1[keep], eul.x2[keep])
    state_rep = decay_report(diff, r, 1.0 + sol.spec.beta, min_annuli=min_annuli)
    s0 = sol.fld.background.s0
    sk = eul.shock_z2[1:] <= fraction * g.k * g.R
    sr = np.hypot(eul.shock_sigma[1:], eul.shock_x2[1:])[sk]
    slope_rep = decay_report(np.abs(eul.shock_slope[1:] - s0)[sk], sr, sol.spec.beta, min_annuli=min_annuli)
    ginv = far.l(far.l_inverse(far.l_nodes[1:]))
    return {"state_exponent": state_rep.fitted_decay_exponent,
            "state_annuli": state_rep.annulus_sups, "state_centers": state_rep.annulus_centers,
            "state_zero": state_rep.identically_zero,
            "slope_exponent": slope_rep.fitted_decay_exponent,
            "slope_annuli": slope_rep.annulus_sups, "slope_centers": slope_rep.annulus_centers,
            "slope_zero": slope_rep.identically_zero,
            "inverse_error": float(np.max(np.abs(ginv - far.l_nodes[1:])))}


def bump_y_norm(spec: ProblemSpec, x) -> float:
    """Discrete wedge-data norm: weighted sups of b - b0 and its slope."""
    x = np.asarray(x, dtype=float)
    return (weighted_sup(spec.bump.value(x), x, spec.beta) + weighted_sup(spec.bump.slope(x), x, 1.0 + spec.beta))


def upstream_z_norm(spec: ProblemSpec, y2) -> float:
    y2 = np.asarray(y2, dtype=float)
    d_rho, d_u = spec.upstream.callbacks()
    tot = 0.0
    for f in (d_rho, d_u):
        if f is not None:
            tot += weighted_sup(f(y2), y2, 1.0 + spec.beta)
    return tot


def sensitivity_ratio(base: Solution, pert: Solution) -> dict:
    """X-norm of the entropy difference over the size of the data difference."""
    z2 = base.grid.z2
    dA = x_norm(pert.profile.A - base.profile.A, z2, base.spec.beta)
    x = np.linspace(0.0, base.grid.R, 4 * base.grid.n1 + 1)
    dY = abs(bump_y_norm(pert.spec, x) - bump_y_norm(base.spec, x))
    dZ = abs(upstream_z_norm(pert.spec, z2) - upstream_z_norm(base.spec, z2))
    den = dY + dZ
    if den == 0.0:
        return {"x_diff": dA, "data_diff": 0.0, "ratio": 0.0 if dA == 0 else float("inf"), "exact_zero": dA == 0}
    return {"x_diff": dA, "data_diff": den, "ratio": dA / den, "exact_zero": False}


def stability_probe(spec: ProblemSpec, amplitudes=(1e-3, 5e-4, 2.5e-4), log: Callable | None = None,
                    bound: float | None = None) -> dict:
    """Solve the unperturbed problem and a family of bump amplitudes; report sensitivity ratios."""
    base = entropy_fixed_point(spec.with_amplitude(0.0), log=log)
    rows = []
    for a in amplitudes:
        sol = entropy_fixed_point(spec.with_amplitude(a), log=log)
        r = sensitivity_ratio(base, sol)
        r["amplitude"] = a
        r["outer_iterations"] = sol.report.outer_iterations
        rows.append(r)
    ratios = np.array([r["ratio"] for r in rows])
    spread = float(ratios.max() / ratios.min()) if ratios.size and ratios.min() > 0 else float("inf")
    out = {"rows": rows, "spread": spread, "collapsed": bool(spread <= 2.0)}
    if bound is not None:
        out["bounded"] = bool(np.all(ratios <= bound))
    return out


# -- pipeline ------------------------------------------------------------------

def run(spec: ProblemSpec, log: Callable | None = None, decay: bool = True) -> tuple[Solution, EulerianField]:
    """Fixed point, reconstruction and all diagnostics recorded on the report."""
    sol = entropy_fixed_point(spec, log=log)
    t = time.perf_counter()
    eul = reconstruct_eulerian(sol)
    rep = sol.report
    rep.shock_residuals = shock_residuals(sol)
    rep.rh_residual_sup = float(np.max(eulerian_rh_residuals(sol, eul)))
    rep.slip_residual = slip_residual(sol, eul)
    rep.entropy_streamline = streamline_entropy_spread(sol, eul)
    rep.background_deviation = background_deviation(sol, eul)
    if decay:
        try:
            rep.decay = decay_diagnostics(sol, eul)
        except TransonicError as exc:
            rep.decay = {"error": error_record(exc)}
    rep.timings["postprocess_s"] = time.perf_counter() - t
    return sol, eul
