import numpy as np
import pytest

from transonic_wedge.errors import EllipticityLost, InsufficientAnnuli, ObliquenessLost
from transonic_wedge.elliptic.assembly import BoundaryData, FaceCoefficients, assemble_linearized, solve_linear
from transonic_wedge.elliptic.grid import Tag, TruncatedGrid, graded_nodes, one_sided_weights
from transonic_wedge.elliptic.mms import mms_error, mms_study
from transonic_wedge.elliptic.norms import annulus_sups, decay_report, fit_exponent, weighted_sup


def laplace(z1, z2):
    return dict(a11=1.0, a22=1.0)


def test_grid_tags():
    g = TruncatedGrid(4.0, 8, 8)
    assert g.tags[0, 0] == Tag.CORNER
    assert np.all(g.tags[1:, 0] == Tag.WEDGE)
    assert g.tags[0, 1] == Tag.SHOCK
    assert g.tags[1, 1] == Tag.INTERIOR
    Z1, Z2 = g.mesh
    outside = Z1 + Z2 > 4.0 + 1e-12
    assert np.all(np.isin(g.tags[outside], [Tag.UNUSED, Tag.CUTOFF]))
    assert not np.any(g.tags[Z1 + Z2 < 4.0 - 1e-12] == Tag.CUTOFF)
    assert g.n_active == int(np.sum((g.tags == Tag.INTERIOR) | (g.tags == Tag.SHOCK)))


@pytest.mark.parametrize("kw", [dict(ratio=1.5), dict(n1=3), dict(R=-1.0)])
def test_grid_validation(kw):
    args = dict(R=4.0, n1=8, n2=8, ratio=1.0)
    args.update(kw)
    with pytest.raises(ValueError):
        TruncatedGrid(**args)


def test_graded_nodes():
    x = graded_nodes(10.0, 20, 1.1)
    assert x[0] == 0 and x[-1] == pytest.approx(10.0)
    h = np.diff(x)
    assert np.allclose(h[1:] / h[:-1], 1.1)


def test_one_sided_weights_exact_for_quadratics():
    w = one_sided_weights(0.0, 0.3, 0.8)
    x = np.array([0.0, 0.3, 0.8])
    assert np.dot(w, 2 + 3 * x + 5 * x**2) == pytest.approx(3.0)


@pytest.mark.parametrize("ratio", [1.0, 1.1])
def test_linear_fields_are_reproduced(ratio):
    g = TruncatedGrid(3.0, 12, 12, 1.0, ratio)
    exact = lambda z1, z2: 1.0 + 2.0 * z1 - 0.5 * z2
    bc = BoundaryData.from_callables(g, exact, nu=(1.0, -1.0), c=0.0, g0=2.5)
    coef = lambda z1, z2: dict(a11=2.0, a12=0.3, a21=0.3, a22=1.0)
    sol = solve_linear(assemble_linearized(g, coef, bc))
    Z1, Z2 = g.mesh
    assert np.max(np.abs(sol.values - exact(Z1, Z2))[g.active]) < 1e-11


def _two_point(n):
    g = TruncatedGrid(2.0, n, n)
    exact = lambda z1, z2: np.sin(z1) + 0 * z2
    bc = BoundaryData.from_callables(g, exact, nu=(1.0, 0.0), g0=1.0)
    sol = solve_linear(assemble_linearized(g, laplace, bc, lambda z1, z2: -np.sin(z1)))
    Z1, Z2 = g.mesh
    return np.max(np.abs(sol.values - exact(Z1, Z2))[g.active])


def test_two_point_problem_second_order():
    e = [_two_point(n) for n in (16, 32, 64)]
    orders = np.log2(np.array(e[:-1]) / np.array(e[1:]))
    assert np.all(orders > 1.8)


def test_ellipticity_and_obliqueness_checks():
    g = TruncatedGrid(2.0, 8, 8)
    bc = BoundaryData.from_callables(g, lambda z1, z2: 0 * z1)
    with pytest.raises(EllipticityLost):
        assemble_linearized(g, lambda z1, z2: dict(a11=1.0, a12=2.0, a21=2.0, a22=1.0), bc)
    bad = BoundaryData.from_callables(g, lambda z1, z2: 0 * z1, nu=(0.0, 1.0))
    with pytest.raises(ObliquenessLost):
        assemble_linearized(g, laplace, bad)


def test_cg_rejects_oblique_rows():
    g = TruncatedGrid(2.0, 8, 8)
    sys_ = assemble_linearized(g, laplace, BoundaryData.from_callables(g, lambda z1, z2: 0 * z1, nu=(1.0, 0.0)))
    with pytest.raises(ValueError):
        solve_linear(sys_, "cg")


def test_zero_data_gives_zero():
    g = TruncatedGrid(2.0, 8, 8)
    sol = solve_linear(assemble_linearized(g, laplace, BoundaryData.from_callables(g, lambda z1, z2: 0 * z1)))
    assert np.all(sol.values == 0)


@pytest.mark.parametrize("ratio", [1.0, 1.08])
def test_cg_matches_direct_with_monotone_energy(ratio):
    g = TruncatedGrid(2.0, 16, 16, 1.0, ratio)
    bc = BoundaryData.from_callables(g, lambda z1, z2: z1 * z2, shock_dirichlet=True)
    sys_ = assemble_linearized(g, laplace, bc, lambda z1, z2: np.exp(-z1))
    direct = solve_linear(sys_)
    cg = solve_linear(sys_, "cg")
    assert np.max(np.abs(direct.values - cg.values)) < 1e-8
    e = np.array(cg.meta["energy_history"])
    assert np.all(np.diff(e) <= 1e-12 * np.abs(e).max())


def test_mms_second_order():
    st = mms_study((16, 32, 64))
    assert st.min_order > 1.9
    assert mms_error(32) < mms_error(16)


def test_weighted_sup():
    r = np.array([0.0, 1.0, 3.0])
    assert weighted_sup([1.0, 1.0, 1.0], r, 0.5) == pytest.approx(2.0)
    assert weighted_sup([1.0, 1.0, 1.0], r, 0.5, mask=np.array([True, True, False])) == pytest.approx(np.sqrt(2))


def test_synthetic_power_decay():
    r = np.geomspace(0.5, 300.0, 4000)
    rep = decay_report(r**-0.5, r, beta=0.25)
    assert rep.fitted_decay_exponent == pytest.approx(0.5, abs=0.05)
    assert rep.meets_target
    c, s = annulus_sups(r**-0.5, r)
    assert fit_exponent(c, s) == pytest.approx(0.5, abs=0.05)


def test_zero_field_flagged():
    r = np.geomspace(0.5, 300.0, 100)
    rep = decay_report(np.zeros_like(r), r)
    assert rep.identically_zero and np.isnan(rep.fitted_decay_exponent)


def test_too_few_annuli():
    r = np.linspace(0.5, 3.0, 20)
    with pytest.raises(InsufficientAnnuli):
        decay_report(1 / r, r)


def test_one_dimensional_reduction_matches_closed_form():
    # a11 = 1 + z1, source 3 + 4 z1: the two-point solution is z1^2 + z1
    g = TruncatedGrid(2.0, 24, 24)
    exact = lambda z1, z2: z1**2 + z1 + 0 * z2
    bc = BoundaryData.from_callables(g, exact, nu=(1.0, 0.0), g0=1.0)
    sol = solve_linear(assemble_linearized(g, lambda z1, z2: dict(a11=1.0 + z1, a22=1.0), bc,
                                           lambda z1, z2: 3.0 + 4.0 * z1))
    Z1, Z2 = g.mesh
    assert np.max(np.abs(sol.values - exact(Z1, Z2))[g.active]) < 1e-8
