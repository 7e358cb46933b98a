"""Linear divergence-form problems on the truncated quarter plane.

Equation (flux index i, gradient index j):

    sum_i d/dz_i ( sum_j a_ij v_zj + b_i v ) = f     at interior nodes
    nu1 v_z1 + nu2 v_z2 + c v = g0                   on the shock axis z1 = 0
    v = dirichlet                                    on the wedge and the cutoff
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import EllipticityLost, ObliquenessLost, SolverDiverged
from .grid import PotentialField, Tag, TruncatedGrid

COEFF_NAMES = ("a11", "a12", "a21", "a22", "b1", "b2")


@dataclass
class FaceCoefficients:
    """Coefficient values on z1-faces (a11, a12, b1) and z2-faces (a21, a22, b2)."""

    a11: np.ndarray
    a12: np.ndarray
    b1: np.ndarray
    a21: np.ndarray
    a22: np.ndarray
    b2: np.ndarray

    @classmethod
    def from_callable(cls, grid: TruncatedGrid, fn: Callable) -> "FaceCoefficients":
        ops = grid.operators()
        cx = fn(*(c.ravel() for c in ops.x_face_z))
        cy = fn(*(c.ravel() for c in ops.y_face_z))
        nx, ny = ops.x_face_z[0].size, ops.y_face_z[0].size

        def arr(d, key, n):
            return np.broadcast_to(np.asarray(d.get(key, 0.0), dtype=float), (n,)).copy()

        return cls(arr(cx, "a11", nx), arr(cx, "a12", nx), arr(cx, "b1", nx),
                   arr(cy, "a21", ny), arr(cy, "a22", ny), arr(cy, "b2", ny))

    @classmethod
    def constant(cls, grid: TruncatedGrid, a11=1.0, a12=0.0, a21=0.0, a22=1.0, b1=0.0, b2=0.0):
        return cls.from_callable(grid, lambda z1, z2: dict(a11=a11, a12=a12, a21=a21, a22=a22, b1=b1, b2=b2))

    def check_ellipticity(self, grid: TruncatedGrid, floor: float = 0.0) -> float:
        """Positive-definite symmetric part at every interior node.

        Coefficients of each face family are averaged onto the node first.
        """
        ops = grid.operators()
        rows = ops.interior_rows
        a11 = _node_avg(ops.Div1, self.a11)[rows]
        a12 = _node_avg(ops.Div1, self.a12)[rows]
        a21 = _node_avg(ops.Div2, self.a21)[rows]
        a22 = _node_avg(ops.Div2, self.a22)[rows]
        det = a11 * a22 - (0.5 * (a12 + a21)) ** 2
        bad = (a11 <= floor) | (det <= floor)
        if np.any(bad):
            raise EllipticityLost(f"symmetric part not positive definite at {int(bad.sum())} node(s)")
        return float(det.min()) if det.size else np.inf


def _node_avg(div: sp.csr_matrix, face_vals: np.ndarray) -> np.ndarray:
    w = abs(div)
    s = w.sum(axis=1).A1
    s[s == 0] = 1.0
    return (w @ face_vals) / s


@dataclass
class BoundaryData:
    """Dirichlet values on every non-unknown node plus the oblique data on shock nodes.

    With ``shock_dirichlet`` the shock nodes take their Dirichlet values too and
    only interior nodes are unknown.
    """

    dirichlet: np.ndarray
    nu1: np.ndarray
    nu2: np.ndarray
    c: np.ndarray
    g0: np.ndarray
    shock_dirichlet: bool = False

    @classmethod
    def from_callables(cls, grid: TruncatedGrid, dirichlet: Callable, nu=(1.0, -1.0), c=0.0,
                       g0: Callable | float = 0.0, shock_dirichlet: bool = False) -> "BoundaryData":
        Z1, Z2 = grid.mesh
        d = np.asarray(dirichlet(Z1, Z2), dtype=float) * np.ones(grid.shape)
        z2s = grid.z2[grid.operators().shock_j]
        n = z2s.size

        def ev(q):
            return np.broadcast_to(np.asarray(q(z2s) if callable(q) else q, dtype=float), (n,)).copy()

        return cls(d, ev(nu[0]), ev(nu[1]), ev(c), ev(g0), shock_dirichlet)


@dataclass
class LinearSystem:
    grid: TruncatedGrid
    matrix: sp.csr_matrix
    rhs: np.ndarray
    dirichlet: np.ndarray
    full_operator: sp.csr_matrix = field(repr=False)
    unknowns: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.unknowns is None:
            self.unknowns = self.grid.operators().active_cols

    def expand(self, x: np.ndarray) -> np.ndarray:
        v = self.dirichlet.ravel().copy()
        v[self.unknowns] = x
        return v.reshape(self.grid.shape)


def assemble_operator(grid: TruncatedGrid, coeffs: FaceCoefficients, nu1, nu2, c) -> sp.csr_matrix:
    """Full-grid operator whose rows at unknown nodes hold the discrete equations."""
    ops = grid.operators()
    L = ops.flux_operator(coeffs.a11, coeffs.a12, coeffs.b1, coeffs.a21, coeffs.a22, coeffs.b2)
    N = L.shape[0]
    P = sp.csr_matrix((np.ones(ops.shock_rows.size), (ops.shock_rows, np.arange(ops.shock_rows.size))),
                      shape=(N, ops.shock_rows.size))
    return (L + P @ ops.oblique_operator(nu1, nu2, c)).tocsr()


def check_obliqueness(nu1, nu2, tol: float = 1e-12):
    nrm = np.hypot(nu1, nu2)
    if np.any(~(np.abs(nu1) > tol * np.maximum(nrm, 1e-300))):
        raise ObliquenessLost("boundary vector field is tangential to the shock axis")


def assemble_linearized(grid: TruncatedGrid, coeffs: FaceCoefficients | Callable, bc: BoundaryData,
                        source: Callable | np.ndarray | None = None) -> LinearSystem:
    if callable(coeffs):
        coeffs = FaceCoefficients.from_callable(grid, coeffs)
    coeffs.check_ellipticity(grid)
    if not bc.shock_dirichlet:
        check_obliqueness(bc.nu1, bc.nu2)
    ops = grid.operators()
    Lf = assemble_operator(grid, coeffs, bc.nu1, bc.nu2, bc.c)
    rows = ops.interior_rows if bc.shock_dirichlet else ops.active_cols
    known = np.setdiff1d(np.arange(Lf.shape[1]), rows)
    Lr = Lf[rows]
    A = Lr[:, rows].tocsr()
    D = Lr[:, known]
    f = np.zeros(grid.shape)
    if source is not None:
        Z1, Z2 = grid.mesh
        f = np.asarray(source(Z1, Z2) if callable(source) else source, dtype=float) * np.ones(grid.shape)
    f = f.ravel().copy()
    f[ops.shock_rows] = bc.g0
    rhs = f[rows] - D @ bc.dirichlet.ravel()[known]
    return LinearSystem(grid, A, rhs, bc.dirichlet.copy(), Lf, rows)


def solve_linear(system: LinearSystem, method: str = "direct", tol: float = 1e-10) -> PotentialField:
    meta: dict = {"method": method}
    if method == "direct":
        x = spla.spsolve(system.matrix.tocsc(), system.rhs)
    elif method == "cg":
        # area-weighted rows are symmetric negative definite for symmetric
        # coefficients once every boundary node is Dirichlet
        w = system.grid.operators().cell_area[system.unknowns]
        M = -(sp.diags(w) @ system.matrix)
        b = w * system.rhs
        if abs(M - M.T).max() > 1e-12 * abs(M).max():
            raise ValueError("cg needs a symmetric system (symmetric coefficients, Dirichlet shock data)")
        energies = []

        def cb(xk):
            energies.append(float(0.5 * xk @ (M @ xk) + xk @ b))

        x, info = spla.cg(M, -b, rtol=1e-13, maxiter=20 * system.rhs.size, callback=cb)
        meta["energy_history"] = energies
        if info != 0:
            raise SolverDiverged(f"conjugate gradients stopped with info={info}")
    else:
        raise ValueError(f"unknown method {method!r}")
    r = system.matrix @ x - system.rhs
    scale = max(np.max(np.abs(system.rhs)), np.max(np.abs(system.matrix).max(axis=1).toarray()) * np.max(np.abs(x)), 1e-300)
    meta["residual"] = float(np.max(np.abs(r)) / scale)
    if not np.all(np.isfinite(x)) or meta["residual"] > tol:
        raise SolverDiverged(f"linear solve residual {meta['residual']:.3e} exceeds {tol:.1e}")
    return PotentialField(system.grid, system.expand(x), meta)
