"""Discrete comparison principles, corner barriers and the oblique-corner counterexample.

For a divergence-form operator ``L`` whose discrete stencil has nonnegative
off-diagonal weights, the ratio ``v/w`` of a subsolution to a positive
supersolution cannot have an interior positive maximum above its boundary
values.  ``comparison_check`` verifies the discrete preconditions and then
the ratio bound; the random suite drives it with assembled operators.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import BadExponents, PreconditionViolated
from .assembly import FaceCoefficients, assemble_operator
from .grid import Tag, TruncatedGrid


# -- comparison check -----------------------------------------------------

@dataclass
class DiscreteOperator:
    """Rows of a discrete operator at interior nodes, acting on full-grid vectors."""

    matrix: sp.csr_matrix
    interior: np.ndarray
    boundary: np.ndarray

    @classmethod
    def from_grid(cls, grid: TruncatedGrid, coeffs: FaceCoefficients) -> "DiscreteOperator":
        """Assembled divergence-form operator; every non-interior node is treated as boundary."""
        ops = grid.operators()
        n = ops.shock_j.size
        L = assemble_operator(grid, coeffs, np.ones(n), np.zeros(n), np.zeros(n))
        interior = np.flatnonzero(grid.tags.ravel() == Tag.INTERIOR)
        M = L[interior]
        touched = np.zeros(M.shape[1], dtype=bool)
        touched[M.indices] = True
        touched[interior] = False
        return cls(M.tocsr(), interior, np.flatnonzero(touched))

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ np.ravel(v)

    def min_offdiagonal(self) -> float:
        M = self.matrix.tocoo()
        off = M.col != self.interior[M.row]
        return float(M.data[off].min()) if np.any(off) else 0.0

    def solve(self, f: np.ndarray, boundary_values: np.ndarray) -> np.ndarray:
        """Full-grid vector with the given boundary values and L v = f on interior rows."""
        v = np.zeros(self.matrix.shape[1])
        v[self.boundary] = boundary_values
        A = self.matrix[:, self.interior].tocsc()
        B = self.matrix[:, self.boundary]
        v[self.interior] = spla.spsolve(A, f - B @ v[self.boundary])
        return v


@dataclass
class ComparisonVerdict:
    variant: str
    interior_sup: float
    boundary_sup: float
    bound: float
    slack: float
    holds: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def comparison_check(op: DiscreteOperator, v: np.ndarray, w: np.ndarray, variant: str = "max1",
                     slack: float = 1e-8, tol: float = 1e-10) -> ComparisonVerdict:
    """Check sup_int(v/w) <= sup_bdry(v+/w), capped below by 1 for ``variant="max2"``.

    Preconditions are checked on the discrete operator with relative tolerance ``tol``:
    ``max1`` needs Lv >= 0 >= Lw, ``max2`` needs Lv >= Lw and Lw < 0; both need w > 0.
    """
    v = np.ravel(v).astype(float)
    w = np.ravel(w).astype(float)
    nodes = np.concatenate([op.interior, op.boundary])
    if not np.all(w[nodes] > 0):
        raise PreconditionViolated("comparison function must be positive on the closure")
    Lv, Lw = op.apply(v), op.apply(w)
    scale = abs(op.matrix).max() * max(np.max(np.abs(v[nodes])), np.max(np.abs(w[nodes])))
    eps = tol * scale
    if variant == "max1":
        if np.any(Lv < -eps) or np.any(Lw > eps):
            raise PreconditionViolated("need L v >= 0 and L w <= 0 at every interior node")
    elif variant == "max2":
        if np.any(Lv - Lw < -eps) or np.any(~(Lw < 0)):
            raise PreconditionViolated("need L v >= L w and L w < 0 at every interior node")
    else:
        raise ValueError(f"unknown variant {variant!r}")
    inner = float(np.max(v[op.interior] / w[op.interior]))
    outer = float(np.max(np.maximum(v[op.boundary], 0.0) / w[op.boundary]))
    bound = outer if variant == "max1" else max(outer, 1.0)
    return ComparisonVerdict(variant, inner, outer, bound, slack, inner <= bound + slack)


def _smooth_field(rng: np.random.Generator, Z1, Z2, scale: float, modes: int = 3):
    out = np.zeros_like(Z1)
    for _ in range(modes):
        k1, k2 = rng.uniform(0.2, 1.5, size=2) / scale
        ph = rng.uniform(0, 2 * np.pi)
        out += rng.uniform(-1, 1) * np.cos(k1 * Z1 + k2 * Z2 + ph)
    return out / modes


def random_elliptic_case(rng: np.random.Generator, grid: TruncatedGrid, cross: float = 0.0,
                         drift: float = 0.5) -> FaceCoefficients:
    """Random smooth coefficients with a11, a22 in [0.5, 2.5] and |b| <= drift."""
    ops = grid.operators()

    def fam(z):
        Z1, Z2 = (c.ravel() for c in z)
        return Z1, Z2

    x1, x2 = fam(ops.x_face_z)
    y1, y2 = fam(ops.y_face_z)
    s = grid.R
    seeds = rng.integers(0, 2**31, size=5)

    def f(i, Z1, Z2):
        return _smooth_field(np.random.default_rng(seeds[i]), Z1, Z2, s)

    a11x = 1.5 + f(0, x1, x2)
    a12x = cross * f(1, x1, x2)
    b1x = drift * f(2, x1, x2)
    a22y = 1.5 + f(3, y1, y2)
    a21y = cross * f(1, y1, y2)
    b2y = drift * f(4, y1, y2)
    return FaceCoefficients(a11x, a12x, b1x, a21y, a22y, b2y)


def random_comparison_trial(rng: np.random.Generator, grid: TruncatedGrid, slack: float = 1e-8,
                            cross: float = 0.2) -> tuple[ComparisonVerdict, ComparisonVerdict]:
    """One randomized trial of both comparison principles on an assembled operator.

    w solves L w = -g (g > 0) with boundary values 1 + a quadratic barrier; v solves
    L v = f (f >= 0) for max1 and L v = L w + f for max2, with signed boundary data.
    """
    coeffs = random_elliptic_case(rng, grid, cross=cross)
    op = DiscreteOperator.from_grid(grid, coeffs)
    Z1, Z2 = (c.ravel() for c in grid.mesh)
    nb, ni = op.boundary.size, op.interior.size
    rr = (Z1**2 + Z2**2) / grid.R**2
    w = op.solve(-rng.uniform(0.1, 1.0, ni), 1.0 + rr[op.boundary])
    bv = rng.uniform(-1.0, 1.0, nb) * (1.0 + rr[op.boundary])
    v1 = op.solve(rng.uniform(0.0, 1.0, ni), bv)
    v2 = op.solve(op.apply(w) + rng.uniform(0.0, 1.0, ni), 0.5 * bv)
    return comparison_check(op, v1, w, "max1", slack), comparison_check(op, v2, w, "max2", slack)


def random_comparison_suite(n_cases: int = 100, seed: int = 0, n: int = 24, R: float = 4.0,
                            cross: float = 0.2) -> list[tuple[ComparisonVerdict, ComparisonVerdict]]:
    rng = np.random.default_rng(seed)
    grid = TruncatedGrid(R, n, n)
    return [random_comparison_trial(rng, grid, cross=cross) for _ in range(n_cases)]


# -- corner barriers ----------------------------------------------------------

def k_factor(a: np.ndarray) -> np.ndarray:
    """Upper-triangular K with K K^T = a, positive diagonal."""
    a = np.asarray(a, dtype=float)
    if a.shape != (2, 2) or abs(a[0, 1] - a[1, 0]) > 1e-14 * np.abs(a).max():
        raise ValueError("need a symmetric 2x2 matrix")
    k22 = np.sqrt(a[1, 1])
    k12 = a[0, 1] / k22
    d = a[0, 0] - k12**2
    if not (a[1, 1] > 0 and d > 0):
        raise ValueError("matrix is not positive definite")
    return np.array([[np.sqrt(d), k12], [0.0, k22]])


@dataclass(frozen=True)
class Decay:
    beta: float
    alpha: float
    tau: float = 0.0


@dataclass(frozen=True)
class Regularity:
    alpha: float
    tau: float


@dataclass
class CornerBarrier:
    """r^s sin(t theta + tau) (+ r^s sin^t theta) in coordinates zbar = K^{-1} z."""

    s: float
    t: float
    tau: float
    K: np.ndarray = field(default_factory=lambda: np.eye(2))
    power_term: bool = False

    def polar(self, z1, z2):
        zb = np.linalg.solve(self.K, np.stack([np.ravel(z1), np.ravel(z2)]))
        shape = np.shape(z1)
        r = np.hypot(zb[0], zb[1]).reshape(shape)
        th = np.arctan2(zb[1], zb[0]).reshape(shape)
        return r, th

    def __call__(self, z1, z2):
        r, th = self.polar(z1, z2)
        out = r**self.s * np.sin(self.t * th + self.tau)
        if self.power_term:
            out = out + r**self.s * np.sin(th) ** self.t
        return out

    def laplacian_bar(self, z1, z2):
        """Closed-form Laplacian in the zbar variables."""
        r, th = self.polar(z1, z2)
        s, t = self.s, self.t
        out = (s**2 - t**2) * r ** (s - 2) * np.sin(t * th + self.tau)
        if self.power_term:
            sn = np.sin(th)
            with np.errstate(divide="ignore"):
                out = out + (s**2 - t**2) * r ** (s - 2) * sn**t - t * (1 - t) * r ** (s - 2) * sn ** (t - 2)
        return out


def corner_barrier(kind: Decay | Regularity, K=None, power_term: bool = False) -> CornerBarrier:
    K = np.eye(2) if K is None else np.asarray(K, dtype=float)
    if isinstance(kind, Decay):
        if not 0 < kind.beta < kind.alpha < 1:
            raise BadExponents(f"need 0 < beta < alpha < 1, got beta={kind.beta}, alpha={kind.alpha}")
        if kind.tau < 0 or kind.alpha * np.pi + kind.tau >= np.pi:
            raise BadExponents("phase shift must keep sin(alpha theta + tau) positive")
        return CornerBarrier(-kind.beta, kind.alpha, kind.tau, K, power_term)
    if isinstance(kind, Regularity):
        t = 1 + kind.alpha + kind.tau
        if not (0 < kind.alpha < 1 and kind.tau > 0 and t * np.pi / 2 + kind.tau < np.pi):
            raise BadExponents("need 0 < alpha < 1 and a small positive tau")
        return CornerBarrier(1 + kind.alpha, t, kind.tau, K, power_term)
    raise BadExponents(f"unknown barrier kind {kind!r}")


def polar_laplacian(u, r, th):
    """Five-point Laplacian on a tensor (r, theta) grid at interior nodes."""
    dr = np.diff(r)
    dt = np.diff(th)
    R = r[1:-1, None]
    hm, hp = dr[:-1, None], dr[1:, None]
    urr = 2 * (hm * u[2:, 1:-1] - (hm + hp) * u[1:-1, 1:-1] + hp * u[:-2, 1:-1]) / (hm * hp * (hm + hp))
    ur = (u[2:, 1:-1] - u[:-2, 1:-1]) / (hm + hp)
    km, kp = dt[None, :-1], dt[None, 1:]
    utt = 2 * (km * u[1:-1, 2:] - (km + kp) * u[1:-1, 1:-1] + kp * u[1:-1, :-2]) / (km * kp * (km + kp))
    return urr + ur / R + utt / R**2


def barrier_on_annulus(barrier: CornerBarrier, r_in: float = 1.0, r_out: float = 4.0, n_r: int = 64,
                       n_t: int = 64):
    """(discrete Laplacian, closed form, r, theta) of the barrier at interior nodes of a quarter annulus."""
    r = np.linspace(r_in, r_out, n_r + 1)
    th = np.linspace(0.0, np.pi / 2, n_t + 1)
    Rm, Tm = np.meshgrid(r, th, indexing="ij")
    u = barrier(Rm * np.cos(Tm), Rm * np.sin(Tm))
    exact = barrier.laplacian_bar(Rm * np.cos(Tm), Rm * np.sin(Tm))[1:-1, 1:-1]
    return polar_laplacian(u, r, th), exact, Rm[1:-1, 1:-1], Tm[1:-1, 1:-1]


# -- oblique-corner counterexample -------------------------------------------

def sqrt_corner_field(z1, z2):
    """r^(1/2) sin(theta/2): harmonic, zero on z2 = 0, -u_z1 - u_z2 = 0 on z1 = 0."""
    r = np.hypot(z1, z2)
    return np.sqrt(r) * np.sin(0.5 * np.arctan2(z2, z1))


def sqrt_corner_gradient(z1, z2):
    w = 0.5 / np.sqrt(np.asarray(z1, dtype=float) + 1j * np.asarray(z2, dtype=float))
    return w.imag, w.real


def corner_holder_exponent(u: Callable | np.ndarray, z1=None, z2=None, r_min: float = 1e-4,
                           r_max: float = 1.0, n_levels: int = 12) -> float:
    """Exponent gamma in osc_{B_r} u ~ r^gamma at the corner, fitted over dyadic radii.

    ``u`` is either a callable sampled on quarter circles or nodal values with their
    coordinates.
    """
    radii = r_max * 2.0 ** -np.arange(n_levels)
    radii = radii[radii >= r_min]
    osc = []
    if callable(u):
        th = np.linspace(0, np.pi / 2, 257)
        u0 = float(u(np.array(0.0), np.array(0.0)))
        for rad in radii:
            rr = np.linspace(0, rad, 65)[1:, None]
            osc.append(np.max(np.abs(u(rr * np.cos(th), rr * np.sin(th)) - u0)))
    else:
        u = np.ravel(u)
        rr = np.hypot(np.ravel(z1), np.ravel(z2))
        u0 = u[np.argmin(rr)]
        for rad in radii:
            sel = rr <= rad
            osc.append(np.max(np.abs(u[sel] - u0)))
    slope, _ = np.polyfit(np.log(radii), np.log(np.asarray(osc)), 1)
    return float(slope)


@dataclass
class ObliqueCornerReport:
    laplacian_residual: float
    dirichlet_residual: float
    oblique_residual: float
    holder_exponent: float
    gradient_unbounded: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def oblique_corner_test(u: Callable = sqrt_corner_field, grad: Callable = sqrt_corner_gradient,
                        nu=(-1.0, -1.0), h: float = 1e-3) -> ObliqueCornerReport:
    """Check a candidate corner solution: harmonic, zero on the wedge, oblique-null on the shock axis."""
    s = np.geomspace(1e-3, 1.0, 40)
    th = np.linspace(0.1, np.pi / 2 - 0.1, 17)
    Rm, Tm = np.meshgrid(s, th, indexing="ij")
    X, Y = Rm * np.cos(Tm), Rm * np.sin(Tm)
    hh = h * Rm
    lap = (u(X + hh, Y) + u(X - hh, Y) + u(X, Y + hh) + u(X, Y - hh) - 4 * u(X, Y)) / hh**2
    lap_res = float(np.max(np.abs(lap) * Rm**1.5))
    dir_res = float(np.max(np.abs(u(s, 0 * s))))
    g1, g2 = grad(0 * s, s)
    obl_res = float(np.max(np.abs(nu[0] * g1 + nu[1] * g2) * np.sqrt(s)))
    gn = np.hypot(*grad(s, s))
    return ObliqueCornerReport(lap_res, dir_res, obl_res, corner_holder_exponent(u),
                               bool(gn[0] > 10 * gn[-1]))
