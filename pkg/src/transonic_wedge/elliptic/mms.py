"""Manufactured-solution convergence study for the linear oblique problem.

The exact field is sin(z1) exp(-z2); coefficients vary smoothly and are not
symmetric, and the shock axis carries the oblique condition
nu1 v_z1 + nu2 v_z2 + c v = g0 with data taken from the exact field.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assembly import BoundaryData, assemble_linearized, solve_linear
from .grid import TruncatedGrid

NU = (1.0, -0.5)
C_OBL = 0.3


def exact(z1, z2):
    return np.sin(z1) * np.exp(-z2)


def exact_gradient(z1, z2):
    e = np.exp(-z2)
    return np.cos(z1) * e, -np.sin(z1) * e


def coefficients(z1, z2):
    return dict(a11=2.0 + 0.3 * np.sin(z1) * np.cos(z2), a12=0.3 + 0.0 * z1, a21=0.2 + 0.0 * z1,
                a22=1.5 + 0.2 * np.cos(z1 * z2), b1=0.1 * np.cos(z2), b2=0.2 * np.sin(z1))


def source(z1, z2):
    """div(a grad v + b v) for the exact field, differentiated by hand."""
    c = coefficients(z1, z2)
    v = exact(z1, z2)
    v1, v2 = exact_gradient(z1, z2)
    v11, v12, v22 = -v, -v1, v
    a11_1 = 0.3 * np.cos(z1) * np.cos(z2)
    a22_2 = -0.2 * z1 * np.sin(z1 * z2)
    d1 = a11_1 * v1 + c["a11"] * v11 + c["a12"] * v12 + c["b1"] * v1
    d2 = c["a21"] * v12 + a22_2 * v2 + c["a22"] * v22 + c["b2"] * v2
    return d1 + d2


def oblique_data(z2):
    v1, v2 = exact_gradient(0.0 * z2, z2)
    return NU[0] * v1 + NU[1] * v2 + C_OBL * exact(0.0 * z2, z2)


@dataclass
class MMSStudy:
    sizes: list
    errors: list
    orders: list = field(default_factory=list)

    @property
    def min_order(self) -> float:
        return float(min(self.orders)) if self.orders else float("nan")

    def as_dict(self) -> dict:
        return {"sizes": self.sizes, "errors": self.errors, "orders": self.orders, "min_order": self.min_order}


def mms_error(n: int, R: float = 2.0, ratio: float = 1.0) -> float:
    grid = TruncatedGrid(R, n, n, 1.0, ratio)
    bc = BoundaryData.from_callables(grid, exact, nu=NU, c=C_OBL, g0=oblique_data)
    field_ = solve_linear(assemble_linearized(grid, coefficients, bc, source))
    Z1, Z2 = grid.mesh
    return float(np.max(np.abs(field_.values - exact(Z1, Z2))[grid.active]))


def mms_study(sizes=(16, 32, 64, 128), R: float = 2.0) -> MMSStudy:
    errs = [mms_error(n, R) for n in sizes]
    orders = [float(np.log2(errs[i] / errs[i + 1]) / np.log2(sizes[i + 1] / sizes[i]))
              for i in range(len(sizes) - 1)]
    return MMSStudy(list(sizes), errs, orders)
