"""Tensor grids on the truncated quarter plane and the discrete operators on them.

Nodes carry one of the tags below.  Interior and shock nodes are unknowns;
everything else is Dirichlet data.  Divergence-form operators are built as
compositions of sparse face operators so that the nonlinear residual and
its linearization share one stencil.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


class Tag(enum.IntEnum):
    UNUSED = 0
    INTERIOR = 1
    SHOCK = 2
    WEDGE = 3
    CORNER = 4
    CUTOFF = 5


def graded_nodes(length: float, n: int, ratio: float) -> np.ndarray:
    """n+1 nodes on [0, length] with cell sizes growing geometrically by ``ratio``."""
    if ratio == 1.0:
        return np.linspace(0.0, length, n + 1)
    h = ratio ** np.arange(n)
    x = np.concatenate([[0.0], np.cumsum(h)])
    return x * (length / x[-1])


def _central_weights(x):
    """Three-point nonuniform first-derivative weights at x[1:-1]."""
    h1 = x[1:-1] - x[:-2]
    h2 = x[2:] - x[1:-1]
    wm = -h2 / (h1 * (h1 + h2))
    w0 = (h2 - h1) / (h1 * h2)
    wp = h1 / (h2 * (h1 + h2))
    return wm, w0, wp


def one_sided_weights(x0, x1, x2):
    """Second-order forward first-derivative weights at x0."""
    h1 = x1 - x0
    h2 = x2 - x1
    return (-(2 * h1 + h2) / (h1 * (h1 + h2)), (h1 + h2) / (h1 * h2), -h1 / (h2 * (h1 + h2)))


@dataclass
class TruncatedGrid:
    R: float
    n1: int
    n2: int
    k: float = 1.0
    ratio: float = 1.0
    z1: np.ndarray = field(init=False)
    z2: np.ndarray = field(init=False)
    tags: np.ndarray = field(init=False)
    index: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.k <= 0 or self.R <= 0:
            raise ValueError("R and k must be positive")
        if not 1.0 <= self.ratio <= 1.2:
            raise ValueError("grading ratio must lie in [1, 1.2]")
        if self.n1 < 4 or self.n2 < 4:
            raise ValueError("need at least 4 cells per direction")
        self.z1 = graded_nodes(self.R, self.n1, self.ratio)
        self.z2 = graded_nodes(self.k * self.R, self.n2, self.ratio)
        Z1, Z2 = self.mesh
        inside = Z2 < self.k * (self.R - Z1) - 1e-12 * self.R
        tags = np.full(Z1.shape, Tag.UNUSED, dtype=int)
        tags[(Z1 > 0) & (Z2 > 0) & inside] = Tag.INTERIOR
        tags[0, 1:][inside[0, 1:]] = Tag.SHOCK
        tags[:, 0] = Tag.WEDGE
        tags[0, 0] = Tag.CORNER
        active = (tags == Tag.INTERIOR) | (tags == Tag.SHOCK)
        near = np.zeros_like(active)
        ii, jj = np.nonzero(active)
        for di in (-1, 0, 1, 2):
            for dj in (-1, 0, 1):
                a, b = ii + di, jj + dj
                ok = (a >= 0) & (a <= self.n1) & (b >= 0) & (b <= self.n2)
                near[a[ok], b[ok]] = True
        tags[near & (tags == Tag.UNUSED)] = Tag.CUTOFF
        self.tags = tags
        index = -np.ones(Z1.shape, dtype=int)
        index.ravel()[np.flatnonzero(active.ravel())] = np.arange(active.sum())
        self.index = index

    @property
    def shape(self):
        return (self.n1 + 1, self.n2 + 1)

    @property
    def mesh(self):
        return np.meshgrid(self.z1, self.z2, indexing="ij")

    @property
    def active(self) -> np.ndarray:
        return (self.tags == Tag.INTERIOR) | (self.tags == Tag.SHOCK)

    @property
    def n_active(self) -> int:
        return int(self.active.sum())

    def mask(self, tag: Tag) -> np.ndarray:
        return self.tags == tag

    @property
    def dirichlet(self) -> np.ndarray:
        return ~self.active

    def flat(self, i, j):
        return np.asarray(i) * (self.n2 + 1) + np.asarray(j)

    def radius(self) -> np.ndarray:
        Z1, Z2 = self.mesh
        return np.hypot(Z1, Z2)

    def operators(self) -> "GridOperators":
        if not hasattr(self, "_ops"):
            self._ops = GridOperators(self)
        return self._ops


class GridOperators:
    """Sparse matrices acting on flattened full-grid node vectors."""

    def __init__(self, grid: TruncatedGrid):
        self.grid = grid
        n1, n2 = grid.n1, grid.n2
        N = (n1 + 1) * (n2 + 1)
        x, y = grid.z1, grid.z2
        fl = grid.flat

        # nodal central derivatives
        I, J = np.meshgrid(np.arange(1, n1), np.arange(n2 + 1), indexing="ij")
        wm, w0, wp = (w[:, None] * np.ones(n2 + 1) for w in _central_weights(x))
        r = fl(I, J).ravel()
        self.D1 = sp.csr_matrix((np.concatenate([wm.ravel(), w0.ravel(), wp.ravel()]),
                                 (np.tile(r, 3), np.concatenate([fl(I - 1, J).ravel(), r, fl(I + 1, J).ravel()]))),
                                shape=(N, N))
        I, J = np.meshgrid(np.arange(n1 + 1), np.arange(1, n2), indexing="ij")
        wm, w0, wp = (np.ones(n1 + 1)[:, None] * w[None, :] for w in _central_weights(y))
        r = fl(I, J).ravel()
        self.D2 = sp.csr_matrix((np.concatenate([wm.ravel(), w0.ravel(), wp.ravel()]),
                                 (np.tile(r, 3), np.concatenate([fl(I, J - 1).ravel(), r, fl(I, J + 1).ravel()]))),
                                shape=(N, N))

        # z1-faces (i+1/2, j): shape (n1, n2+1)
        I, J = np.meshgrid(np.arange(n1), np.arange(n2 + 1), indexing="ij")
        hx = (x[1:] - x[:-1])[:, None] * np.ones(n2 + 1)
        F = I.size
        rows = np.arange(F)
        left, right = fl(I, J).ravel(), fl(I + 1, J).ravel()
        self.X_diff = sp.csr_matrix((np.concatenate([-1 / hx.ravel(), 1 / hx.ravel()]),
                                     (np.tile(rows, 2), np.concatenate([left, right]))), shape=(F, N))
        self.X_avg = sp.csr_matrix((np.full(2 * F, 0.5), (np.tile(rows, 2), np.concatenate([left, right]))),
                                   shape=(F, N))
        self.x_face_z = ((0.5 * (x[:-1] + x[1:]))[:, None] * np.ones(n2 + 1), np.ones(n1)[:, None] * y[None, :])
        self.x_face_nodes = (left, right)

        # z2-faces (i, j+1/2): shape (n1+1, n2)
        I, J = np.meshgrid(np.arange(n1 + 1), np.arange(n2), indexing="ij")
        hy = np.ones(n1 + 1)[:, None] * (y[1:] - y[:-1])[None, :]
        F2 = I.size
        rows = np.arange(F2)
        lo, hi = fl(I, J).ravel(), fl(I, J + 1).ravel()
        self.Y_diff = sp.csr_matrix((np.concatenate([-1 / hy.ravel(), 1 / hy.ravel()]),
                                     (np.tile(rows, 2), np.concatenate([lo, hi]))), shape=(F2, N))
        self.Y_avg = sp.csr_matrix((np.full(2 * F2, 0.5), (np.tile(rows, 2), np.concatenate([lo, hi]))),
                                   shape=(F2, N))
        self.y_face_z = (x[:, None] * np.ones(n2), np.ones(n1 + 1)[:, None] * (0.5 * (y[:-1] + y[1:]))[None, :])
        self.y_face_nodes = (lo, hi)

        # divergence back to nodes, scaled by dual cell widths
        act = grid.mask(Tag.INTERIOR)
        ii, jj = np.nonzero(act)
        dx = 0.5 * (x[ii + 1] - x[ii - 1])
        dy = 0.5 * (y[jj + 1] - y[jj - 1])
        rn = fl(ii, jj)
        fp = ii * (n2 + 1) + jj
        fm = (ii - 1) * (n2 + 1) + jj
        self.Div1 = sp.csr_matrix((np.concatenate([1 / dx, -1 / dx]), (np.tile(rn, 2), np.concatenate([fp, fm]))),
                                  shape=(N, F))
        gp = ii * n2 + jj
        gm = ii * n2 + jj - 1
        self.Div2 = sp.csr_matrix((np.concatenate([1 / dy, -1 / dy]), (np.tile(rn, 2), np.concatenate([gp, gm]))),
                                  shape=(N, F2))
        self.cell_area = np.zeros(N)
        self.cell_area[rn] = dx * dy

        # faces touched by interior rows
        self.x_face_used = np.abs(self.Div1).sum(axis=0).A1 > 0
        self.y_face_used = np.abs(self.Div2).sum(axis=0).A1 > 0

        # shock rows: one-sided z1 derivative and central z2 derivative at (0, j)
        js = np.nonzero(grid.tags[0] == Tag.SHOCK)[0]
        self.shock_j = js
        w = one_sided_weights(x[0], x[1], x[2])
        rs = fl(0, js)
        self.S1 = sp.csr_matrix((np.concatenate([np.full(js.size, w[0]), np.full(js.size, w[1]), np.full(js.size, w[2])]),
                                 (np.tile(np.arange(js.size), 3), np.concatenate([rs, fl(1, js), fl(2, js)]))),
                                shape=(js.size, N))
        self.S2 = self.D2[rs]
        self.S0 = sp.csr_matrix((np.ones(js.size), (np.arange(js.size), rs)), shape=(js.size, N))

        self.X_cross = self.X_avg @ self.D2
        self.Y_cross = self.Y_avg @ self.D1

        flat_active = grid.active.ravel()
        self.active_cols = np.flatnonzero(flat_active)
        self.dirichlet_cols = np.flatnonzero(~flat_active)
        self.interior_rows = rn
        self.shock_rows = rs

    def face_gradients(self, v: np.ndarray):
        """Values and gradients on both face families for a flattened node vector."""
        return (self.X_avg @ v, self.X_diff @ v, self.X_cross @ v,
                self.Y_avg @ v, self.Y_cross @ v, self.Y_diff @ v)

    def flux_operator(self, a11, a12, b1, a21, a22, b2) -> sp.csr_matrix:
        """Linear map v -> discrete div(a grad v + b v) on interior rows (full-grid rows)."""
        F1 = sp.diags(a11) @ self.X_diff + sp.diags(a12) @ self.X_cross + sp.diags(b1) @ self.X_avg
        F2 = sp.diags(a21) @ self.Y_cross + sp.diags(a22) @ self.Y_diff + sp.diags(b2) @ self.Y_avg
        return (self.Div1 @ F1 + self.Div2 @ F2).tocsr()

    def oblique_operator(self, nu1, nu2, c) -> sp.csr_matrix:
        return (sp.diags(nu1) @ self.S1 + sp.diags(nu2) @ self.S2 + sp.diags(c) @ self.S0).tocsr()


@dataclass
class PotentialField:
    grid: TruncatedGrid
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(self.grid.shape)
        if not np.all(np.isfinite(self.values[self.grid.tags != Tag.UNUSED])):
            raise ValueError("field has non-finite values")

    def to_rows(self):
        Z1, Z2 = self.grid.mesh
        keep = self.grid.tags != Tag.UNUSED
        return Z1[keep], Z2[keep], self.values[keep], self.grid.tags[keep]
