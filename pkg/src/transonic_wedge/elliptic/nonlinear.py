"""Nonlinear hodograph problem on the truncated domain.

Unknown: ``varphi`` at interior and shock nodes.  Interior rows hold the
finite-volume divergence of the transformed fluxes; shock rows hold the
free-boundary condition ``g = 0``; wedge, corner and cutoff nodes are
Dirichlet (wedge inverse map and far-field trace).

The iteration is the frozen-coefficient map written in correction form:
with coefficients averaged along the segment from the far-field state to
the current iterate, solve ``L delta = -R(varphi)`` and update.  A fixed
point therefore satisfies the discrete nonlinear equations exactly.  The
``newton`` mode uses the tangent coefficients instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse.linalg as spla

from ..errors import LeftDeltaBall, MaxIterations, ObliquenessLost
from ..hodograph import FarFieldState, UpstreamField, downstream_gradient, shock_condition_g, shock_obliqueness
from ..lagrangian import n_jacobian_arrays, state_arrays
from .assembly import FaceCoefficients, assemble_operator
from .grid import PotentialField, Tag, TruncatedGrid
from .norms import weighted_sup

_GAUSS3 = np.polynomial.legendre.leggauss(3)


@dataclass
class HodographProblem:
    grid: TruncatedGrid
    fld: UpstreamField
    A_nodes: np.ndarray
    far: FarFieldState
    wedge_values: np.ndarray
    phi_inf: np.ndarray = field(init=False)
    dirichlet: np.ndarray = field(init=False)

    def __post_init__(self):
        g = self.grid
        ops = g.operators()
        Z1, Z2 = g.mesh
        lz = self.far.l(g.z2)
        self.phi_inf = self.far.varphi_inf(Z1, Z2, np.broadcast_to(lz, Z1.shape))
        d = self.phi_inf.copy()
        d[:, 0] = self.wedge_values
        self.dirichlet = d
        A = np.asarray(self.A_nodes, dtype=float)
        ux, uy = ops.x_face_used, ops.y_face_used
        zx = ops.x_face_z[1].ravel()[ux]
        zy = ops.y_face_z[1].ravel()[uy]
        jx = np.tile(np.arange(g.n2 + 1), g.n1)[ux]
        jy = np.tile(np.arange(g.n2), g.n1 + 1)[uy]
        self._x = dict(z2=zx, A=A[jx], B=self.fld.B(zx))
        self._y = dict(z2=zy, A=0.5 * (A[jy] + A[jy + 1]), B=self.fld.B(zy))
        self._shock_z2 = g.z2[ops.shock_j]
        # exact far-field gradient replaces its difference quotient on the shock row
        e1, e2 = self.far.varphi_inf_gradient(self.phi_inf[0, ops.shock_j], self._shock_z2)
        pinf = self.phi_inf.ravel()
        self._shock_shift = (e1 - ops.S1 @ pinf, e2 - ops.S2 @ pinf)

    def initial_guess(self) -> np.ndarray:
        return self.phi_inf.ravel().copy()

    def with_dirichlet(self, phi: np.ndarray) -> np.ndarray:
        v = phi.ravel().copy()
        cols = self.grid.operators().dirichlet_cols
        v[cols] = self.dirichlet.ravel()[cols]
        return v

    # -- face evaluations -------------------------------------------------
    def _faces(self, phi):
        ops = self.grid.operators()
        xv, x1, x2, yv, y1, y2 = ops.face_gradients(phi)
        ux, uy = ops.x_face_used, ops.y_face_used
        return (xv[ux], x1[ux], x2[ux]), (yv[uy], y1[uy], y2[uy])

    def _flux_and_jac(self, fam, val, p1, p2):
        py1, py2, j1, j2 = downstream_gradient(self.fld, val, fam["z2"], p1, p2)
        u1, u2, p, rho = state_arrays(py1, py2, fam["A"], fam["B"], self.fld.gas)
        n11, n12, n22, _ = n_jacobian_arrays(u1, u2, p, rho, self.fld.gas)
        x = n12 * j1 + n22 * j2
        a11 = j1**2 * n11 + 2.0 * j1 * j2 * n12 + j2**2 * n22
        return (-u2 + p * p2, -p * p1), (a11, x + p, x - p, n22)

    def _flux(self, fam, val, p1, p2):
        py1, py2, _, _ = downstream_gradient(self.fld, val, fam["z2"], p1, p2)
        u1, u2, p, rho = state_arrays(py1, py2, fam["A"], fam["B"], self.fld.gas)
        return -u2 + p * p2, -p * p1

    def fluxes(self, phi):
        (xv, x1, x2), (yv, y1, y2) = self._faces(phi)
        return self._flux(self._x, xv, x1, x2)[0], self._flux(self._y, yv, y1, y2)[1]

    def shock_data(self, phi):
        ops = self.grid.operators()
        c1, c2 = self._shock_shift
        return self._shock_z2, ops.S0 @ phi, ops.S1 @ phi + c1, ops.S2 @ phi + c2

    def residual(self, phi: np.ndarray) -> np.ndarray:
        """Discrete equations at the unknown nodes, in unknown order."""
        ops = self.grid.operators()
        m1, m2 = self.fluxes(phi)
        full = np.zeros(phi.size)
        fx = np.zeros(ops.X_avg.shape[0])
        fy = np.zeros(ops.Y_avg.shape[0])
        fx[ops.x_face_used] = m1
        fy[ops.y_face_used] = m2
        full += ops.Div1 @ fx + ops.Div2 @ fy
        z2, v, p1, p2 = self.shock_data(phi)
        full[ops.shock_rows] = shock_condition_g(self.fld, z2, v, p1, p2)
        return full[ops.active_cols]

    def interior_residual(self, phi: np.ndarray) -> np.ndarray:
        ops = self.grid.operators()
        m1, m2 = self.fluxes(phi)
        fx = np.zeros(ops.X_avg.shape[0])
        fy = np.zeros(ops.Y_avg.shape[0])
        fx[ops.x_face_used] = m1
        fy[ops.y_face_used] = m2
        return (ops.Div1 @ fx + ops.Div2 @ fy)[ops.interior_rows]

    def _b_terms(self, fam, val, p1, p2):
        if self.fld.uniform:
            return 0.0, 0.0
        h = 1e-6 * np.maximum(np.abs(val), 1.0)
        fp = self._flux(fam, val + h, p1, p2)
        fm = self._flux(fam, val - h, p1, p2)
        return (fp[0] - fm[0]) / (2 * h), (fp[1] - fm[1]) / (2 * h)

    def tangent(self, phi: np.ndarray):
        """Face coefficients and shock coefficients of the linearization at phi."""
        ops = self.grid.operators()
        (xv, x1, x2), (yv, y1, y2) = self._faces(phi)
        _, (a11, a12, _, _) = self._flux_and_jac(self._x, xv, x1, x2)
        _, (_, _, a21, a22) = self._flux_and_jac(self._y, yv, y1, y2)
        b1, _ = self._b_terms(self._x, xv, x1, x2)
        _, b2 = self._b_terms(self._y, yv, y1, y2)
        nx, ny = ops.X_avg.shape[0], ops.Y_avg.shape[0]
        coeffs = FaceCoefficients(*(np.zeros(n) for n in (nx, nx, nx, ny, ny, ny)))
        coeffs.a11[ops.x_face_used] = a11
        coeffs.a12[ops.x_face_used] = a12
        coeffs.b1[ops.x_face_used] = b1
        coeffs.a21[ops.y_face_used] = a21
        coeffs.a22[ops.y_face_used] = a22
        coeffs.b2[ops.y_face_used] = b2
        z2, v, p1, p2 = self.shock_data(phi)
        nu1, nu2, c = shock_obliqueness(self.fld, z2, v, p1, p2)
        return coeffs, (nu1, nu2, c)

    def secant(self, phi: np.ndarray, phi_ref: np.ndarray):
        """Coefficients averaged over the segment phi_ref -> phi (3-point Gauss)."""
        xs, ws = _GAUSS3
        acc = None
        for s, w in zip(0.5 * (xs + 1.0), 0.5 * ws):
            c, (n1, n2, cc) = self.tangent(phi_ref + s * (phi - phi_ref))
            part = [w * getattr(c, k) for k in ("a11", "a12", "b1", "a21", "a22", "b2")] + [w * n1, w * n2, w * cc]
            acc = part if acc is None else [a + p for a, p in zip(acc, part)]
        return FaceCoefficients(*acc[:6]), tuple(acc[6:])

    def linear_operator(self, coeffs: FaceCoefficients, shock):
        """(unknown-unknown block, unknown-Dirichlet block) of the linearized operator."""
        ops = self.grid.operators()
        L = assemble_operator(self.grid, coeffs, *shock)[ops.active_cols]
        return L[:, ops.active_cols].tocsc(), L[:, ops.dirichlet_cols].tocsr()

    def scaled_residual(self, phi: np.ndarray) -> float:
        """Max of control-volume flux imbalance and shock-condition residual."""
        ops = self.grid.operators()
        full = np.zeros(phi.size)
        full[ops.active_cols] = self.residual(phi)
        vol = np.abs(full[ops.interior_rows]) * ops.cell_area[ops.interior_rows]
        sh = np.abs(full[ops.shock_rows])
        return float(max(vol.max(initial=0.0), sh.max(initial=0.0)))


def solve_nonlinear(problem: HodographProblem, phi0: np.ndarray | None = None, mode: str = "picard",
                    tol: float = 1e-9, max_iter: int = 60, delta_ball: float | None = None,
                    beta: float = 0.25, log: Callable | None = None) -> PotentialField:
    """Iterate to a discrete solution of the transformed equation with shock condition."""
    g = problem.grid
    ops = g.operators()
    r = g.radius().ravel()
    ref = problem.phi_inf.ravel()
    # the Dirichlet mismatch of the starting guess is lifted into the first correction
    phi = (problem.initial_guess() if phi0 is None else np.asarray(phi0, dtype=float).ravel()).copy()
    target = problem.dirichlet.ravel()[ops.dirichlet_cols]
    history = []
    for it in range(1, max_iter + 1):
        res = problem.residual(phi)
        if mode == "newton":
            coeffs, shock = problem.tangent(phi)
        elif mode == "picard":
            coeffs, shock = problem.secant(phi, ref)
        else:
            raise ValueError(f"unknown mode {mode!r}")
        coeffs.check_ellipticity(g)
        if np.any(shock[0] <= 0) or np.any(shock[1] >= 0):
            raise ObliquenessLost("shock condition lost its oblique sign structure (nu1 > 0 > nu2)")
        J, JD = problem.linear_operator(coeffs, shock)
        lift = target - phi[ops.dirichlet_cols]
        delta = spla.spsolve(J, -res - JD @ lift)
        step = np.zeros_like(phi)
        step[ops.active_cols] = delta
        step[ops.dirichlet_cols] = lift
        phi += step
        dnorm = weighted_sup(step, r, beta)
        vnorm = weighted_sup(phi - ref, r, beta, mask=g.active.ravel())
        rec = {"iteration": it, "residual": float(np.max(np.abs(res))) if res.size else 0.0,
               "update": dnorm, "delta_ball": vnorm}
        history.append(rec)
        if log:
            log(rec)
        if delta_ball is not None and vnorm > delta_ball:
            raise LeftDeltaBall(f"iterate left the delta ball: {vnorm:.3e} > {delta_ball:.3e}")
        if dnorm <= tol:
            break
    else:
        raise MaxIterations(f"nonlinear iteration did not reach {tol:.1e} in {max_iter} steps")
    meta = {"iterations": it, "history": history, "mode": mode,
            "final_residual": problem.scaled_residual(phi)}
    return PotentialField(g, phi.reshape(g.shape), meta)
