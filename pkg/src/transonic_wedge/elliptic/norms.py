"""Discrete weighted norms and decay fits over dyadic annuli."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InsufficientAnnuli


def weighted_sup(v, r, power: float, mask=None) -> float:
    """max (1+r)^power |v| over the (masked) nodes."""
    v = np.abs(np.asarray(v, dtype=float))
    w = (1.0 + np.asarray(r, dtype=float)) ** power
    if mask is not None:
        v, w = v[mask], w[mask]
    return float(np.max(w * v)) if v.size else 0.0


def annulus_sups(values, r, r_min: float = 1.0, r_max: float | None = None):
    """(centers, sups) of |values| over r in [2^j, 2^(j+1)) that fit inside [r_min, r_max]."""
    values = np.abs(np.asarray(values, dtype=float)).ravel()
    r = np.asarray(r, dtype=float).ravel()
    if r_max is None:
        r_max = r.max()
    j0 = int(np.ceil(np.log2(r_min) - 1e-12))
    centers, sups = [], []
    j = j0
    while 2.0 ** (j + 1) <= r_max * (1 + 1e-12):
        sel = (r >= 2.0**j) & (r < 2.0 ** (j + 1))
        if np.any(sel):
            centers.append(2.0**j * np.sqrt(2.0))
            sups.append(float(values[sel].max()))
        j += 1
    return np.array(centers), np.array(sups)


def fit_exponent(centers, sups) -> float:
    """Decay exponent p in sup ~ C r^(-p), by least squares in log-log."""
    slope, _ = np.polyfit(np.log(centers), np.log(sups), 1)
    return float(-slope)


@dataclass
class WeightedNormReport:
    sup_weighted_value: float
    fitted_decay_exponent: float
    annulus_centers: list = field(default_factory=list)
    annulus_sups: list = field(default_factory=list)
    gradient_exponent: float | None = None
    identically_zero: bool = False
    meets_target: bool | None = None

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def decay_report(values, r, beta: float = 0.25, r_min: float = 1.0, r_max: float | None = None,
                 grad=None, min_annuli: int = 3, zero_tol: float = 0.0) -> WeightedNormReport:
    """Annulus sups, weighted sup (1+r)^beta |v| and fitted exponent of a nodal field."""
    values = np.asarray(values, dtype=float).ravel()
    r = np.asarray(r, dtype=float).ravel()
    c, s = annulus_sups(values, r, r_min, r_max)
    if c.size < min_annuli:
        raise InsufficientAnnuli(f"only {c.size} dyadic annuli available, need {min_annuli}")
    wsup = weighted_sup(values, r, beta)
    if np.all(s <= zero_tol):
        return WeightedNormReport(wsup, float("nan"), c.tolist(), s.tolist(), identically_zero=True)
    if np.any(s <= 0):
        raise InsufficientAnnuli("field vanishes on some annuli; exponent undefined")
    p = fit_exponent(c, s)
    gp = None
    if grad is not None:
        gc, gs = annulus_sups(r * np.asarray(grad, dtype=float).ravel(), r, r_min, r_max)
        if gc.size >= min_annuli and np.all(gs > 0):
            gp = fit_exponent(gc, gs)
    return WeightedNormReport(wsup, p, c.tolist(), s.tolist(), gp, False, bool(p >= beta - 0.1))


def measure_decay(field, reference=None, beta: float = 0.25, min_annuli: int = 3) -> WeightedNormReport:
    """Decay of v = field - reference on a PotentialField, with r-weighted first differences."""
    g = field.grid
    v = field.values - (0.0 if reference is None else np.asarray(reference).reshape(g.shape))
    keep = g.active
    gz1, gz2 = np.gradient(np.where(keep | (g.tags > 0), v, 0.0), g.z1, g.z2, edge_order=1)
    grad = np.hypot(gz1, gz2)
    return decay_report(v[keep], g.radius()[keep], beta, grad=grad[keep], min_annuli=min_annuli)
