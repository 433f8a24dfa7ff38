import numpy as np
import pytest

from skewspin import catalog
from skewspin import clifford as cl
from skewspin import skewcheck as sc
from skewspin.fields import ExprField, FD
from skewspin.geometry import GeometryError, curvature_fd_oracle
from skewspin.skewcheck import EndoField, PreconditionError, SkewData
from skewspin.spinfield import SpinorSection, dirac


def test_skew_killing_residual_cases(hyperbolic, hyperbolic_grid, flat3, sphere):
    c = sc.skew_killing_residual(
        hyperbolic.sections["constant"], hyperbolic.endo, hyperbolic_grid
    )
    assert c.residual <= 1e-7 and c.passed
    flat_psi = SpinorSection.constant(flat3, 1.0, 2.0j)
    c2 = sc.skew_killing_residual(flat_psi, EndoField.zero(3), flat3.grid(4))
    assert c2.residual == 0.0
    pts2 = sphere.chart.grid(11)
    c3 = sc.skew_killing_residual(sphere.sections["killing"], sphere.endo, pts2)
    assert c3.residual <= 1e-7


def test_imaginary_killing_residual_on_hyperbolic_disk(hyperbolic_disk):
    chart, psi, a = hyperbolic_disk
    pts = chart.grid(11)
    endo = EndoField.from_ab_2d(a, 0.0)
    c = sc.skew_killing_residual(psi, endo, pts, mode="imaginary")
    assert c.residual <= 1e-10
    # the real-coupling residual must NOT vanish for the same data
    c_real = sc.skew_killing_residual(psi, endo, pts, mode="real")
    assert c_real.residual > 0.1


def test_gauss_codazzi_sphere_and_flat(sphere, flat2):
    pts = sphere.chart.grid(11)
    oracle = curvature_fd_oracle(sphere.chart, pts[:60]).sectional(0, 1)
    g, c = sc.gauss_codazzi_2d(
        sphere.endo, sphere.chart, pts[:60], "spherical", r1212=oracle
    )
    assert g.residual <= 1e-6 and c.residual <= 1e-6
    gflat, cflat = sc.gauss_codazzi_2d(EndoField.zero(2), flat2, flat2.grid(5))
    assert gflat.residual == 0.0 and cflat.residual == 0.0


def test_gauss_codazzi_nonconstant_a_fails_codazzi(flat2):
    # A = a Id + a J with a = x: the Codazzi vector cannot vanish
    a = "x"
    endo = EndoField.from_exprs(
        ((a, f"-({a})"), (a, a)), flat2.coords
    )
    g, c = sc.gauss_codazzi_2d(endo, flat2, flat2.grid(7))
    assert c.residual > 0.5 and not c.passed


def test_lorentzian_gauss_flags_flat_halfj(flat2):
    endo = EndoField.from_ab_2d(0.0, 0.5)
    g, c = sc.gauss_codazzi_2d(endo, flat2, flat2.grid(5), "lorentzian")
    assert abs(g.residual - 1.0) < 1e-12 and not g.passed
    assert c.residual == 0.0


def test_skew_part_analysis(flat2, sphere):
    b, db, check = sc.skew_part_analysis(
        EndoField.from_ab_2d(0.0, 0.5), flat2, flat2.grid(5)
    )
    assert np.allclose(b, 0.5) and db == 0.0 and check.passed
    bx = EndoField.from_exprs((("0", "-x"), ("x", "0")), flat2.coords)
    b2, db2, check2 = sc.skew_part_analysis(bx, flat2, flat2.grid(5))
    assert abs(db2 - 1.0) < 1e-12 and not check2.passed
    # b recovered from the twistor construction is constant
    lam = sphere.aux["lam"]
    psi_ab = catalog.sphere_ab_section(sphere.chart, 0.0, lam, lam)
    a_vals, b_vals, checks = sc.twistor_decompose(psi_ab, sphere.chart.grid(9))
    assert np.ptp(b_vals) <= 1e-8


def test_twistor_decompose_killing(sphere):
    pts = sphere.chart.grid(11)
    lam = sphere.aux["lam"]
    a, b, checks = sc.twistor_decompose(sphere.sections["killing"], pts)
    assert np.max(np.abs(a - lam)) < 1e-9
    assert np.max(np.abs(b)) < 1e-9
    assert all(c.passed for c in checks)


def test_twistor_decompose_ab_section(sphere):
    lam = sphere.aux["lam"]
    psi = catalog.sphere_ab_section(sphere.chart, 0.0, lam, lam)
    pts = sphere.chart.grid(11)
    a, b, checks = sc.twistor_decompose(psi, pts)
    assert np.max(np.abs(a - 0.0)) < 1e-9
    assert np.max(np.abs(b - lam)) < 1e-9
    assert all(c.passed for c in checks)
    # general (a, b) with matching curvature
    psi2 = catalog.sphere_ab_section(sphere.chart, 0.3, 0.4, lam)
    a2, b2, checks2 = sc.twistor_decompose(psi2, pts)
    assert np.max(np.abs(a2 - 0.3)) < 1e-9 and np.max(np.abs(b2 - 0.4)) < 1e-9
    endo = EndoField.from_ab_2d(0.3, 0.4)
    res = sc.skew_killing_residual(psi2, endo, pts)
    assert res.residual <= 1e-7


def test_twistor_sum(sphere):
    psi = sphere.sections["twistor-sum"]
    pts = sphere.chart.grid(11)
    assert np.max(np.abs(psi.norms(pts) - 1.0)) < 1e-12
    assert sc.twistor_residual(psi, pts) < 1e-12
    dv = dirac(psi, pts)
    got = np.real(cl.herm(dv, psi.values(pts)))
    expected = sphere.aux["ctheta"] ** 2 - sphere.aux["cphi"] ** 2
    assert np.max(np.abs(got - expected)) < 1e-7
    a, b, checks = sc.twistor_decompose(psi, pts)
    assert all(c.passed for c in checks)


def test_twistor_preconditions(sphere):
    pts = sphere.chart.grid(7)
    doubled = sphere.sections["killing"].apply_matrix(2.0 * np.eye(2))
    with pytest.raises(PreconditionError) as exc:
        sc.twistor_decompose(doubled, pts)
    assert exc.value.measured is not None
    non_twistor = SpinorSection.from_exprs(sphere.chart, "1", "0", "x", "0")
    with pytest.raises(PreconditionError):
        sc.twistor_decompose(non_twistor, pts)


def test_imaginary_pair_flat(flat2):
    pts = flat2.grid(5)
    phi = SpinorSection.constant(flat2, 1.0, 0.0)
    psi = SpinorSection.constant(flat2, 0.0, 1.0)
    checks = sc.imaginary_pair_check(phi, psi, EndoField.zero(2), pts)
    assert all(c.passed for c in checks)
    # A = J/2 on the flat chart: the Lorentzian Gauss scalar equals 1
    checks2 = sc.imaginary_pair_check(phi, psi, EndoField.from_ab_2d(0.0, 0.5), pts)
    bad = {c.name: c for c in checks2}
    assert abs(bad["gauss-residual"].residual - 1.0) < 1e-12
    assert not bad["gauss-residual"].passed


def test_hyperbolic_disk_lorentzian_gauss_codazzi(hyperbolic_disk):
    # the imaginary Killing model has S = a Id, T = 0, so the Lorentzian
    # Gauss scalar R_1212 + 4 det S vanishes: curvature -4a^2 against 4a^2
    chart, psi, a = hyperbolic_disk
    pts = chart.grid(9)
    endo = EndoField.from_ab_2d(a, 0.0)
    checks = sc.imaginary_pair_check(psi, psi, endo, pts)
    named = {c.name: c for c in checks}
    assert named["gauss-residual"].residual < 1e-9
    assert named["codazzi-residual"].residual < 1e-12
    assert named["skew-killing-residual-imag-phi"].residual < 1e-10


def test_imaginary_twistor_decompose(hyperbolic_disk):
    chart, psi, a = hyperbolic_disk
    pts = chart.grid(9)
    assert sc.twistor_residual(psi, pts) < 1e-10
    av, bv, res = sc.imaginary_twistor_decompose(psi, pts)
    assert np.max(np.abs(av - a)) < 1e-9
    assert np.max(np.abs(bv)) < 1e-9
    assert res < 1e-10


def test_integrability_and_ricci_system_nontrivial_warped():
    built = catalog.build(
        "warped-plane-line", {"theta": "exp(z)", "c": "1/5", "d": "1/10", "e": "1"}
    )
    pts = built.chart.grid(7)
    for c in sc.integrability_3d(built.skew, pts):
        assert c.residual <= 1e-6, c.name
    for c in sc.ricci_system_3d(built.skew, pts):
        assert c.residual <= 1e-6, c.name
    # both sides of e'_1(b) = b g(kappa, e'_1) equal -theta' f_x / (2 theta^2 f^2)
    d = sc.SkewFrameData(built.skew, pts)
    theta = np.exp(pts[:, 2])
    f = 0.2 * pts[:, 0] + 0.1 * pts[:, 1] + 1.0
    expected = -theta * 0.2 / (2 * theta**2 * f**2)
    assert np.max(np.abs(d.e_b[:, 0] - expected)) < 1e-12
    assert np.max(np.abs(d.b * d.kappa[:, 0] - expected)) < 1e-12


def test_tau_zeta_hyperbolic(hyperbolic, hyperbolic_grid):
    psi = hyperbolic.sections["constant"]
    checks = sc.tau_zeta_diagnostics(hyperbolic.skew, hyperbolic_grid, psi=psi)
    for c in checks:
        assert c.residual <= 1e-7, c.name
    # zeta from the constant section is the kernel frame vector itself
    zj = sc.zeta_jets(psi, hyperbolic_grid)
    zeta = np.stack([z.value for z in zj], axis=1)
    assert np.max(np.abs(zeta - np.array([0.0, 0.0, 1.0]))) < 1e-12


def test_tau_zeta_parallel_case(flat3):
    psi = SpinorSection.constant(flat3, 1.0, 0.0)
    sk = SkewData(flat3, 2, 1.0, (0, 1), 0.0)
    for c in sc.tau_zeta_diagnostics(sk, flat3.grid(4), psi=psi):
        assert c.residual == 0.0


def test_sign_covariance(hyperbolic, hyperbolic_grid):
    assert sc.sign_covariance_residual(hyperbolic.skew, hyperbolic_grid) == 0.0
    built = catalog.build("warped-plane-line", {"c": "1/5"})
    assert sc.sign_covariance_residual(built.skew, built.chart.grid(5)) < 1e-12


def test_skew_data_extraction(flat3, hyperbolic):
    pts = hyperbolic.chart.grid(4)
    sk = sc.skew_data_from_endo(hyperbolic.endo, hyperbolic.chart, pts)
    assert sk.xi_index == 2 and sk.sign == 1.0 and sk.q == (0, 1)
    assert np.allclose(sk.b.values(pts), 0.5)
    # negative b pins the opposite sign and swaps the complement order
    neg = SkewData(hyperbolic.chart, 2, 1.0, (0, 1), -0.5).endo()
    sk2 = sc.skew_data_from_endo(neg, hyperbolic.chart, pts)
    assert sk2.sign == -1.0 and sk2.q == (1, 0)
    assert np.allclose(sk2.b.values(pts), 0.5)
    # b = 0 defaults to the third frame direction
    sk3 = sc.skew_data_from_endo(EndoField.zero(3), flat3, flat3.grid(3))
    assert sk3.xi_index == 2 and sk3.sign == 1.0
    # a kernel line off the frame axes is rejected
    w = 1 / np.sqrt(3)
    askew = EndoField(
        ((0.0, -w, w), (w, 0.0, -w), (-w, w, 0.0))
    )
    with pytest.raises(GeometryError):
        sc.skew_data_from_endo(askew, flat3, flat3.grid(3))
    # non-skew input is rejected
    with pytest.raises(GeometryError):
        sc.skew_data_from_endo(
            EndoField(((0.0, 1.0, 0.0), (1.0, 0.0, 0.0), (0.0, 0.0, 0.0))),
            flat3,
            flat3.grid(3),
        )


def test_conformal_to_parallel_cases(hyperbolic, hyperbolic_grid, flat3):
    psi = hyperbolic.sections["constant"]
    barred, psibar, u, checks = sc.conformal_to_parallel(
        psi, hyperbolic.skew, hyperbolic_grid
    )
    assert checks[-1].residual <= 1e-6
    uv = u.values(hyperbolic_grid)
    z0 = hyperbolic.chart.base_point[2]
    assert np.max(np.abs(uv - (hyperbolic_grid[:, 2] - z0))) < 1e-12
    # b = 0: the potential vanishes and the transform is the identity
    psi0 = SpinorSection.constant(flat3, 1.0, 0.0)
    sk0 = SkewData(flat3, 2, 1.0, (0, 1), 0.0)
    barred0, psibar0, u0, checks0 = sc.conformal_to_parallel(psi0, sk0, flat3.grid(4))
    assert np.max(np.abs(u0.values(flat3.grid(4)))) == 0.0
    assert checks0[-1].residual == 0.0


def test_conformal_to_parallel_warped_line_sphere():
    built = catalog.build("warped-line-sphere")
    psi = built.sections["skew-killing"]
    pts = built.chart.grid(7)
    barred, psibar, u, checks = sc.conformal_to_parallel(psi, built.skew, pts)
    assert checks[-1].residual <= 1e-6
    # u = -(t - t0)
    assert np.max(np.abs(u.values(pts) + (pts[:, 0] - 0.0))) < 1e-12


def test_parallel_to_skew_and_roundtrip(flat3):
    pts = flat3.grid(5)
    psi0 = SpinorSection.constant(flat3, 1.0, 0.0)
    alpha = 0.4
    u = ExprField(f"{alpha}*x", flat3.coords)
    endo, sk, barred, psibar, checks = sc.parallel_to_skew(psi0, u, flat3, pts)
    assert checks[0].residual <= 1e-7
    assert checks[1].residual <= 1e-8
    # A(e_1) = 0; A(e_2) = e_1(u) e_3 / 2; A(e_3) = -e_1(u) e_2 / 2 with the
    # recorded orientation, where e_1(u) = alpha e^{-u}
    av = endo.values(pts)
    e1u = alpha * np.exp(-alpha * pts[:, 0])
    assert np.max(np.abs(av[:, :, 0])) < 1e-14
    assert np.max(np.abs(av[:, 2, 1] - 0.5 * e1u)) < 1e-14
    assert np.max(np.abs(av[:, 1, 2] + 0.5 * e1u)) < 1e-14
    # u = 0 keeps the section parallel with A = 0
    endo0, sk0, _, psibar0, checks0 = sc.parallel_to_skew(
        psi0, ExprField("0", flat3.coords), flat3, pts
    )
    assert np.max(np.abs(endo0.values(pts))) == 0.0
    assert checks0[0].residual == 0.0
    # round trip: undoing the factor returns a parallel section
    _, _, _, round_checks = sc.conformal_to_parallel(psibar, sk, pts)
    assert round_checks[-1].residual <= 1e-6
    # non-parallel seed is rejected with the measured violation
    with pytest.raises(PreconditionError):
        sc.parallel_to_skew(
            SpinorSection.from_exprs(flat3, "1 + x", "0", "0", "0"), u, flat3, pts
        )


def test_parallel_to_skew_general_exponent(flat3):
    # u with a position-dependent gradient direction: the construction and
    # the formula match hold pointwise even though no frame-aligned kernel
    # (hence no adapted round-trip data) exists
    pts = flat3.grid(5)
    psi0 = SpinorSection.constant(flat3, 0.6, 0.8j)
    u = ExprField("x/4 + y^2/10", flat3.coords)
    endo, sk, barred, psibar, checks = sc.parallel_to_skew(psi0, u, flat3, pts)
    assert checks[0].residual <= 1e-7
    assert checks[1].residual <= 1e-8
    assert sk is None


def test_dirac_identity_2d(sphere):
    pts = sphere.chart.grid(9)
    c = sc.dirac_identity_2d(sphere.sections["killing"], sphere.endo, pts)
    assert c.residual <= 1e-10


def test_norm_constancy(sphere):
    pts = sphere.chart.grid(9)
    for name in ("killing", "anti-killing", "twistor-sum"):
        c = sc.norm_constancy(sphere.sections[name], pts)
        assert c.residual <= 1e-10, name


def test_fd_engine_reproduces_residuals(hyperbolic, hyperbolic_grid):
    engine = FD(1e-4)
    ad = sc.skew_killing_residual(
        hyperbolic.sections["constant"], hyperbolic.endo, hyperbolic_grid
    ).residual
    fd = sc.skew_killing_residual(
        hyperbolic.sections["constant"], hyperbolic.endo, hyperbolic_grid, engine=engine
    ).residual
    assert abs(ad - fd) <= 1e-4
    for c_ad, c_fd in zip(
        sc.ricci_system_3d(hyperbolic.skew, hyperbolic_grid),
        sc.ricci_system_3d(hyperbolic.skew, hyperbolic_grid, engine=engine),
    ):
        assert abs(c_ad.residual - c_fd.residual) <= 1e-4


def test_incompleteness_demo_figures():
    lengths, check = sc.incompleteness_demo(lambda t: np.full_like(t, 0.5))
    assert check.passed and check.residual <= 1e-2
    exact = np.exp(-5.0) - np.exp(-20.0)
    assert abs(lengths[20] - exact) < 1e-12
    assert "e^-2q" in check.notes or "e^-2" in check.notes
    # lengths increase with the endpoint but stay bounded
    vals = [lengths[n] for n in sorted(lengths)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert max(vals) < np.exp(-5.0)
