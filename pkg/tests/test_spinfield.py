import numpy as np
import pytest

from skewspin import clifford as cl
from skewspin.fields import AD, FD
from skewspin.geometry import GeometryError
from skewspin.spinfield import (
    SpinorSection,
    covariant_derivative_values,
    dirac,
    killing_type_residual,
    ricci_identity_residual,
    spinorial_curvature,
)

RNG = np.random.default_rng(4)


def killing_matrices(rep, lam):
    return np.stack([lam * g for g in rep.gammas])


def test_hyperbolic_covariant_derivative_triple(hyperbolic, hyperbolic_grid):
    psi = hyperbolic.sections["constant"]
    pts = hyperbolic_grid
    nab = covariant_derivative_values(psi, pts)
    pv = psi.values(pts)
    g = psi.rep.gammas
    assert np.max(np.abs(nab[:, 2])) == 0.0  # the kernel direction
    assert np.max(np.abs(nab[:, 0] - 0.5 * cl.apply_matrix(g[1], pv))) == 0.0
    assert np.max(np.abs(nab[:, 1] + 0.5 * cl.apply_matrix(g[0], pv))) == 0.0


def test_flat_constant_section_is_parallel(flat3):
    psi = SpinorSection.constant(flat3, 0.3 + 1j, -0.2)
    pts = flat3.grid(4)
    assert np.max(np.abs(covariant_derivative_values(psi, pts))) == 0.0
    assert np.max(np.abs(dirac(psi, pts))) == 0.0
    assert np.max(np.abs(spinorial_curvature(psi, pts))) == 0.0


def test_sphere_killing_residual(sphere):
    psi = sphere.sections["killing"]
    pts = sphere.chart.grid(11)
    lam = sphere.aux["lam"]
    res = killing_type_residual(psi, pts, killing_matrices(psi.rep, lam))
    assert res < 1e-7
    anti = sphere.sections["anti-killing"]
    res2 = killing_type_residual(anti, pts, killing_matrices(psi.rep, -lam))
    assert res2 < 1e-7


def test_dirac_identities(sphere, hyperbolic, hyperbolic_grid):
    # 2d Killing: D psi = -2 lam psi
    psi = sphere.sections["killing"]
    pts = sphere.chart.grid(9)
    lam = sphere.aux["lam"]
    dv = dirac(psi, pts)
    assert np.max(np.abs(dv + 2 * lam * psi.values(pts))) < 1e-10
    # definitional consistency: D = sum_i E_i . nabla_i across code paths
    nab = covariant_derivative_values(psi, pts)
    direct = sum(
        cl.apply_matrix(psi.rep.gammas[i], nab[:, i]) for i in range(2)
    )
    assert np.max(np.abs(dv - direct)) == 0.0
    # 3d: D psi = 2 b xi . psi
    psi3 = hyperbolic.sections["constant"]
    dv3 = dirac(psi3, hyperbolic_grid)
    xi_psi = cl.apply_matrix(psi3.rep.gammas[2], psi3.values(hyperbolic_grid))
    assert np.max(np.abs(dv3 - 2 * 0.5 * xi_psi)) == 0.0


def test_spinorial_curvature_hyperbolic(hyperbolic, hyperbolic_grid):
    psi = hyperbolic.sections["constant"]
    pts = hyperbolic_grid
    curv = spinorial_curvature(psi, pts)
    pv = psi.values(pts)
    g = psi.rep.gammas
    # R(e_1, e_2) psi = (-2b^2 + b tr h) xi . psi = 1/2 xi . psi
    assert np.max(np.abs(curv[:, 0, 1] - 0.5 * cl.apply_matrix(g[2], pv))) < 1e-14
    # antisymmetry
    assert np.max(np.abs(curv + curv.transpose(0, 2, 1, 3))) == 0.0
    # linearity over constants
    psi2 = psi.apply_matrix(2.5 * np.eye(2))
    curv2 = spinorial_curvature(psi2, pts)
    assert np.max(np.abs(curv2 - 2.5 * curv)) < 1e-14


def test_ricci_identity_residuals(hyperbolic, hyperbolic_grid, flat3):
    psi = hyperbolic.sections["constant"]
    for i in range(3):
        assert ricci_identity_residual(psi, hyperbolic_grid, i) < 1e-12
    # explicit check: with Ric = -2g both sides equal e_1 . psi for i = 0
    pv = psi.values(hyperbolic_grid)
    curv = spinorial_curvature(psi, hyperbolic_grid)
    rhs = sum(
        cl.apply_matrix(psi.rep.gammas[j], curv[:, 0, j]) for j in range(3)
    )
    assert np.max(np.abs(rhs - cl.apply_matrix(psi.rep.gammas[0], pv))) < 1e-14
    flat_psi = SpinorSection.constant(flat3, 1.0, 0.0)
    assert ricci_identity_residual(flat_psi, flat3.grid(4), 0) == 0.0


def test_ricci_identity_warped_product_flat_direction():
    # line times unit sphere, f = 1: Ric(xi, xi) = 0 since f'' = 0
    from skewspin import catalog

    built = catalog.build("warped-line-sphere")
    psi = built.sections["skew-killing"]
    pts = built.chart.grid(6)
    from skewspin.geometry import riemann

    ric = riemann(built.chart).at(pts).ricci
    assert np.max(np.abs(ric[:, 0, 0])) < 1e-12
    for i in range(3):
        assert ricci_identity_residual(psi, pts, i) < 1e-10


def test_ricci_identity_on_arbitrary_sections():
    # the Ricci identity is an identity of the connection and must hold for
    # any twice-differentiable section, not only the Killing-type ones
    rows = (
        ("1", "0", "0"),
        ("0", "(1 + x^2/4)", "0"),
        ("0", "exp(-x/3)/5", "exp(-x/3)"),
    )
    from skewspin.geometry import chart_from_frame_exprs

    chart = chart_from_frame_exprs(3, ("x", "y", "z"), ((-1, 1),) * 3, rows, name="bumpy")
    psi = SpinorSection.from_exprs(
        chart, "1 + x*y/3", "sin(z)/2", "cos(x) - y/4", "x*z/5"
    )
    pts = chart.grid(5)
    for i in range(3):
        assert ricci_identity_residual(psi, pts, i) < 1e-9, i


def test_leibniz_rule_over_scalar_multiplication(sphere):
    # nabla_i (f psi) = E_i(f) psi + f nabla_i psi for a scalar field f
    chart = sphere.chart
    pts = chart.grid(7)
    psi = sphere.sections["killing"]
    from skewspin.fields import ExprField

    f = ExprField("1 + x*y/2", chart.coords)
    scaled = SpinorSection(
        tuple(c.mul_field(f) for c in psi.comps), chart, psi.rep
    )
    lhs = covariant_derivative_values(scaled, pts)
    nab = covariant_derivative_values(psi, pts)
    a = chart.frame_values(pts)
    df = np.einsum("nim,nm->ni", a, f.jet(pts, 1).grad)
    pv = psi.values(pts)
    rhs = df[:, :, None] * pv[:, None, :] + f.values(pts)[:, None, None] * nab
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_metric_compatibility_random_sections(sphere):
    chart = sphere.chart
    pts = chart.grid(8)
    psi = SpinorSection.from_exprs(
        chart, "x*y + 1/2", "sin(x)", "cos(y) + x", "x - y/3"
    )
    nab = covariant_derivative_values(psi, pts)
    vv = psi.values(pts)
    lhs = np.real(np.einsum("nic,nc->ni", nab, np.conj(vv)))
    jets = psi.component_jets(pts, 1)
    a = chart.frame_values(pts)
    dn = np.zeros((pts.shape[0], 2))
    for j in jets:
        dn += 2 * np.real(np.conj(j.value)[:, None] * j.grad)
    rhs = 0.5 * np.einsum("nim,nm->ni", a, dn)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_section_ad_derivatives_match_fd(sphere):
    psi = sphere.sections["twistor-sum"]
    pts = sphere.chart.grid(7)
    ad = covariant_derivative_values(psi, pts, AD)
    fd = covariant_derivative_values(psi, pts, FD(1e-5))
    assert np.max(np.abs(ad - fd)) < 1e-5


def test_vanishing_section_diagnostic(flat3):
    psi = SpinorSection.from_exprs(flat3, "x", "0", "0", "0")
    with pytest.raises(GeometryError):
        ricci_identity_residual(psi, flat3.grid(3), 0)


def test_structure_only_chart_requires_constant_sections(hyperbolic):
    chart = hyperbolic.chart
    from skewspin.geometry import FrameChart

    bare = FrameChart(
        3, chart.coords, chart.bounds, structure=chart.structure, name="bare"
    )
    psi = SpinorSection.constant(bare, 1.0, 0.0)
    nab = covariant_derivative_values(psi, bare.grid(3))
    assert nab.shape[1] == 3
    varying = SpinorSection.from_exprs(bare, "x", "0", "1", "0")
    with pytest.raises(GeometryError):
        covariant_derivative_values(varying, bare.grid(3))
