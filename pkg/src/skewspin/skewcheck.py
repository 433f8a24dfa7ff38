"""Residual checkers for skew Killing spinor geometry.

Every checker measures a sup-norm residual over a sample grid (normalized by
|psi| when a spinor is involved) and packages it as a named
:class:`~skewspin.report.Check`.  Checks are pure functions of immutable
inputs; nothing here mutates charts, sections or fields.
"""

import numpy as np

from .clifford import apply_matrix, herm, omega
from .fields import AD, ConstField, DerivField, Field, as_field
from .geometry import (
    HODGE_ORIENT,
    GeometryError,
    _EPS3,
    christoffel,
    conformal_rescale,
    d_oneform,
    riemann,
)
from .jets import Jet
from .report import Check, make_check
from .spinfield import covariant_derivative_values, dirac, killing_type_residual

DEFAULT_TOL = 1e-6


class PreconditionError(ValueError):
    """A checker's stated precondition failed; carries the measured value."""

    def __init__(self, message, measured=None):
        self.measured = measured
        if measured is not None:
            message = f"{message} (measured {measured:.3e})"
        super().__init__(message)


# -- endomorphism fields -------------------------------------------------------


class EndoField:
    """Matrix of scalar fields in the frame; A(E_j) = sum_i entries[i][j] E_i."""

    def __init__(self, entries):
        self.entries = [[as_field(e) for e in row] for row in entries]
        self.dim = len(self.entries)

    @staticmethod
    def from_exprs(rows, coords, params=None):
        from .fields import ExprField

        return EndoField(
            [[ExprField(e, coords, params) for e in row] for row in rows]
        )

    @staticmethod
    def zero(dim):
        return EndoField([[0.0] * dim for _ in range(dim)])

    @staticmethod
    def from_ab_2d(a, b):
        """a*Id + b*J in dimension 2 (J(e_1) = e_2, J(e_2) = -e_1)."""
        a = as_field(a)
        b = as_field(b)
        return EndoField([[a, -b], [b, a]])

    def values(self, pts):
        pts = np.atleast_2d(pts)
        return np.stack(
            [
                np.stack([self.entries[i][j].values(pts) for j in range(self.dim)], 1)
                for i in range(self.dim)
            ],
            axis=1,
        )

    def jets(self, pts, order=1, engine=AD):
        return [
            [self.entries[i][j].jet(pts, order, engine) for j in range(self.dim)]
            for i in range(self.dim)
        ]

    def sym_skew_values(self, pts):
        a = self.values(pts)
        at = a.transpose(0, 2, 1)
        return (a + at) / 2.0, (a - at) / 2.0


# -- adapted skew data (dimension 3) ------------------------------------------


class SkewData:
    """Frame-adapted data of a skew endomorphism with frame-aligned kernel:
    xi = sign * E_s spans Ker A, A(e'_1) = b e'_2, A(e'_2) = -b e'_1 for the
    direct completion (xi, e'_1, e'_2) = (sign*E_s, E_q1, E_q2)."""

    def __init__(self, chart, xi_index, sign, q, b):
        self.chart = chart
        self.xi_index = int(xi_index)
        self.sign = float(sign)
        self.q = (int(q[0]), int(q[1]))
        self.b = as_field(b)

    def flipped(self):
        """The other representative (-xi, e'_2, e'_1, -b) of the same A."""
        return SkewData(
            self.chart, self.xi_index, -self.sign, (self.q[1], self.q[0]), -self.b
        )

    def tau_frame_fields(self):
        """tau = b * xi-flat in frame components (a list of d fields)."""
        zero = ConstField(0.0)
        out = [zero] * self.chart.dim
        out[self.xi_index] = self.b * self.sign
        return out

    def endo(self):
        """The endomorphism field this data describes."""
        d = self.chart.dim
        rows = [[ConstField(0.0)] * d for _ in range(d)]
        q1, q2 = self.q
        rows[q2][q1] = self.b
        rows[q1][q2] = -self.b
        return EndoField(rows)


def skew_data_from_endo(endo: EndoField, chart, pts, tol=1e-8) -> SkewData:
    """Extract (xi, b) from a skew endomorphism field whose kernel follows a
    fixed frame direction; the sign is pinned by b >= 0 at the chart base
    point, and b identically zero defaults to xi = E_3."""
    if chart.dim != 3:
        raise GeometryError("skew data extraction lives in dimension 3")
    pts = np.atleast_2d(pts)
    vals = endo.values(pts)
    if np.max(np.abs(vals + vals.transpose(0, 2, 1))) > tol:
        raise GeometryError("endomorphism is not skew-symmetric")
    # axial vector fields: A x = w x x  ->  w = (A_32, A_13, A_21)
    w_fields = (endo.entries[2][1], endo.entries[0][2], endo.entries[1][0])
    w = np.stack([np.abs(f.values(pts)) for f in w_fields], axis=1)
    mags = w.max(axis=0)
    if mags.max() <= tol:
        return SkewData(chart, 2, 1.0, (0, 1), 0.0)
    s = int(np.argmax(mags))
    others = mags[[k for k in range(3) if k != s]]
    if others.max() > max(tol, 1e-6 * mags[s]):
        raise GeometryError(
            "kernel line of the skew endomorphism is not frame-aligned; "
            "adapted checks need a frame-aligned kernel"
        )
    base = chart.base_point[None, :]
    wbase = float(w_fields[s].values(base)[0])
    sign = 1.0 if wbase >= 0 else -1.0
    q = {0: (1, 2), 1: (2, 0), 2: (0, 1)}[s]
    if sign < 0:
        q = (q[1], q[0])
    return SkewData(chart, s, sign, q, w_fields[s] * sign)


class SkewFrameData:
    """Pointwise adapted quantities: b, its frame derivatives, h = grad(xi)
    on the orthogonal complement, and kappa = nabla_xi xi."""

    def __init__(self, sk: SkewData, pts, engine=AD):
        chart = sk.chart
        pts = np.atleast_2d(pts)
        gam = christoffel(chart).values(pts, engine)
        bjet = sk.b.jet(pts, 1, engine)
        frame_vals = (
            chart.frame_values(pts, engine) if chart.frame is not None else None
        )
        db = chart.directional_values(bjet, frame_vals)  # (N, k) = E_k(b)
        s, sg = sk.xi_index, sk.sign
        q1, q2 = sk.q
        self.b = bjet.value
        self.xi_b = sg * db[:, s]
        self.e_b = np.stack([db[:, q1], db[:, q2]], axis=1)
        self.h = np.empty((pts.shape[0], 2, 2))
        for i, qi in enumerate((q1, q2)):
            for j, qj in enumerate((q1, q2)):
                self.h[:, i, j] = sg * gam[:, qi, s, qj]
        self.kappa = np.stack([gam[:, s, s, q1], gam[:, s, s, q2]], axis=1)
        self.trh = self.h[:, 0, 0] + self.h[:, 1, 1]


# -- first-order residuals -----------------------------------------------------


def skew_killing_residual(
    psi, endo: EndoField, pts, mode="real", engine=AD, tol=1e-7, chart=None
) -> Check:
    """sup_i |nabla_{E_i} psi - (i) A(E_i) . psi| / |psi| over the grid."""
    chart = chart or psi.chart
    pts = np.atleast_2d(pts)
    avals = endo.values(pts)
    factor = 1j if mode == "imaginary" else 1.0
    gam = np.stack(psi.rep.gammas)
    m = factor * np.einsum("nki,kab->niab", avals, gam)
    res = killing_type_residual(psi, pts, m, engine, chart)
    return make_check(
        "skew-killing-residual" if mode == "real" else "skew-killing-residual-imag",
        "covariant derivative of the section matches Clifford action of A "
        + ("(imaginary coupling i*A)" if mode == "imaginary" else "(real coupling)"),
        res,
        tol,
    )


def norm_constancy(psi, pts, engine=AD, tol=DEFAULT_TOL, chart=None) -> Check:
    """sup_i |E_i(|psi|^2)|; solutions with skew A have constant length."""
    chart = chart or psi.chart
    pts = np.atleast_2d(pts)
    jets = psi.component_jets(pts, 1, engine)
    frame_vals = chart.frame_values(pts, engine) if chart.frame is not None else None
    dn = np.zeros((pts.shape[0], chart.dim))
    for j in jets:
        dn += 2 * np.real(np.conj(j.value)[:, None] * j.grad)
    from .jets import Jet

    dn_dir = chart.directional_values(Jet(np.zeros(pts.shape[0]), dn), frame_vals)
    return make_check(
        "norm-constancy",
        "the squared length of the section has vanishing frame derivatives",
        np.max(np.abs(dn_dir)),
        tol,
    )


def dirac_identity_3d(psi, sk: SkewData, pts, engine=AD, tol=1e-7, chart=None) -> Check:
    """|D psi - 2 b xi . psi| / |psi|."""
    chart = chart or psi.chart
    pts = np.atleast_2d(pts)
    dv = dirac(psi, pts, engine, chart)
    pv = psi.values(pts)
    b = sk.b.values(pts)
    xipsi = sk.sign * apply_matrix(psi.rep.gammas[sk.xi_index], pv)
    gap = np.linalg.norm(dv - 2 * b[:, None] * xipsi, axis=-1) / psi.norms(pts)
    return make_check(
        "dirac-identity",
        "D psi = 2 b xi . psi for the adapted kernel direction",
        np.max(gap),
        tol,
    )


def dirac_identity_2d(psi, endo: EndoField, pts, engine=AD, tol=DEFAULT_TOL, chart=None) -> Check:
    """|D psi - H psi - 2 b omega . psi| / |psi| with H = -tr(sym A)."""
    chart = chart or psi.chart
    pts = np.atleast_2d(pts)
    s, t = endo.sym_skew_values(pts)
    hval = -(s[:, 0, 0] + s[:, 1, 1])
    b = t[:, 1, 0]
    dv = dirac(psi, pts, engine, chart)
    pv = psi.values(pts)
    target = hval[:, None] * pv + 2 * b[:, None] * apply_matrix(omega(psi.rep), pv)
    gap = np.linalg.norm(dv - target, axis=-1) / psi.norms(pts)
    return make_check(
        "dirac-identity",
        "D psi = H psi + 2 b omega . psi with H = -tr(sym A)",
        np.max(gap),
        tol,
    )


# -- 2d Gauss-Codazzi ----------------------------------------------------------


def gauss_codazzi_2d(
    endo: EndoField,
    chart,
    pts,
    sign="spherical",
    engine=AD,
    tol=DEFAULT_TOL,
    r1212=None,
):
    """Gauss scalar and Codazzi vector residuals of the immersion system.

    sign='spherical' checks R_1212 - 4 det S - 4 det T = 0; 'lorentzian'
    flips both determinant signs.  ``r1212`` overrides the curvature scalar
    (e.g. with the finite-difference oracle value).
    """
    if chart.dim != 2:
        raise GeometryError("Gauss-Codazzi checks live in dimension 2")
    pts = np.atleast_2d(pts)
    if r1212 is None:
        r1212 = riemann(chart).at(pts, engine).sectional(0, 1)
    s, t = endo.sym_skew_values(pts)
    det_s = s[:, 0, 0] * s[:, 1, 1] - s[:, 0, 1] * s[:, 1, 0]
    det_t = t[:, 0, 0] * t[:, 1, 1] - t[:, 0, 1] * t[:, 1, 0]
    pm = -1.0 if sign == "spherical" else 1.0
    g = r1212 + pm * 4 * (det_s + det_t)
    gam = christoffel(chart).values(pts, engine)
    cjets = chart.structure_jets(pts, 0, engine)
    ajets = endo.jets(pts, 1, engine)
    frame_vals = chart.frame_values(pts, engine) if chart.frame is not None else None
    avals = endo.values(pts)
    da = np.empty((pts.shape[0], 2, 2, 2))  # (N, i, k, j) = E_i(A_kj)
    for k in range(2):
        for j in range(2):
            da[:, :, k, j] = chart.directional_values(ajets[k][j], frame_vals)
    # (nabla_i A(e_j))_k = E_i(A_kj) + sum_m Gamma_imk A_mj
    nab = da + np.einsum("nimk,nmj->nikj", gam, avals)
    c12 = np.stack([cjets[0][1][m].value for m in range(2)], axis=1)
    cvec = (
        nab[:, 0, :, 1]
        - nab[:, 1, :, 0]
        - np.einsum("nm,nkm->nk", c12, avals)
    )
    gauss = make_check(
        "gauss-residual",
        f"Gauss equation R_1212 {'-' if pm < 0 else '+'} 4 det S "
        f"{'-' if pm < 0 else '+'} 4 det T = 0 ({sign} target)",
        np.max(np.abs(g)),
        tol,
    )
    codazzi = make_check(
        "codazzi-residual",
        "Codazzi equation nabla_1(A e_2) - nabla_2(A e_1) - A([e_1,e_2]) = 0",
        np.max(np.linalg.norm(cvec, axis=1)),
        tol,
    )
    return gauss, codazzi


def skew_part_analysis(endo: EndoField, chart, pts, engine=AD, tol=1e-8):
    """Extract b = g(A e_1, e_2) and measure sup |grad b|, which vanishes
    exactly when the skew part is Codazzi."""
    if chart.dim != 2:
        raise GeometryError("skew part analysis lives in dimension 2")
    pts = np.atleast_2d(pts)
    s, t = endo.sym_skew_values(pts)
    b = t[:, 1, 0]
    bfield = (endo.entries[1][0] - endo.entries[0][1]) * 0.5
    bjet = bfield.jet(pts, 1, engine)
    frame_vals = chart.frame_values(pts, engine) if chart.frame is not None else None
    db = chart.directional_values(bjet, frame_vals)
    res = float(np.max(np.linalg.norm(db, axis=1)))
    check = make_check(
        "skew-part-constancy",
        "the coefficient b of the skew part b*J has vanishing gradient",
        res,
        tol,
    )
    return b, res, check


# -- twistor decomposition (dimension 2) ----------------------------------------


def twistor_residual(psi, pts, engine=AD, chart=None):
    """sup_i |nabla_{E_i} psi + 1/2 E_i . D psi| / |psi|."""
    chart = chart or psi.chart
    pts = np.atleast_2d(pts)
    nab = covariant_derivative_values(psi, pts, engine, chart)
    dv = dirac(psi, pts, engine, chart)
    nrm = psi.norms(pts)
    gaps = []
    for i in range(chart.dim):
        gi = apply_matrix(psi.rep.gammas[i], dv)
        gaps.append(np.linalg.norm(nab[:, i] + 0.5 * gi, axis=-1) / nrm)
    return float(np.max(np.stack(gaps)))


def twistor_decompose(psi, pts, engine=AD, tol=DEFAULT_TOL, pre_tol=1e-6):
    """Recover (a, b) with nabla_X psi = a X . psi + b J(X) . psi from a
    unit-norm twistor section: a = -1/2 Re<D psi, psi>,
    b = Re<nabla_{e_1} psi, e_2 . psi>.

    Returns (a values, b values, checks).  Non-unit or non-twistor input
    raises PreconditionError with the measured violation.
    """
    chart = psi.chart
    rep = psi.rep
    pts = np.atleast_2d(pts)
    nrm = psi.norms(pts)
    unit_gap = float(np.max(np.abs(nrm - 1.0)))
    if unit_gap > pre_tol:
        raise PreconditionError("twistor decomposition needs |psi| = 1", unit_gap)
    tw = twistor_residual(psi, pts, engine)
    if tw > pre_tol:
        raise PreconditionError("section is not a twistor spinor", tw)
    nab = covariant_derivative_values(psi, pts, engine)
    dv = dirac(psi, pts, engine)
    pv = psi.values(pts)
    a = -0.5 * np.real(herm(dv, pv))
    b = np.real(herm(nab[:, 0], apply_matrix(rep.gammas[1], pv)))
    b_alt = -np.real(herm(nab[:, 1], apply_matrix(rep.gammas[0], pv)))
    om = omega(rep)
    r0 = max(
        float(np.max(np.abs(np.real(herm(nab[:, i], pv))))) for i in range(2)
    )
    r3 = max(
        float(np.max(np.abs(np.real(herm(nab[:, i], apply_matrix(om, pv))))))
        for i in range(2)
    )
    gam = np.stack(rep.gammas)
    m = a[:, None, None, None] * gam[None] + b[:, None, None, None] * np.stack(
        [gam[1], -gam[0]]
    )
    recon = killing_type_residual(psi, pts, m, engine)
    checks = [
        make_check(
            "twistor-residual",
            "nabla_X psi + 1/2 X . D psi = 0 on the grid",
            tw,
            pre_tol,
        ),
        make_check(
            "twistor-decompose-reconstruction",
            "recovered (a, b) reproduce nabla psi = (a Id + b J) . psi",
            recon,
            tol,
        ),
        make_check(
            "twistor-vanishing-components",
            "Re<nabla psi, psi> and the e_1.e_2.psi component vanish",
            max(r0, r3),
            tol,
        ),
        make_check(
            "twistor-antisymmetry",
            "Re<nabla_1 psi, e_2.psi> = -Re<nabla_2 psi, e_1.psi>",
            float(np.max(np.abs(b - b_alt))),
            tol,
        ),
    ]
    return a, b, checks


def imaginary_twistor_decompose(psi, pts, engine=AD):
    """Pointwise least-squares (a, b) for nabla_X psi = i(a X + b J X).psi.

    Returns (a, b, fit residual sup-norm / |psi|)."""
    chart = psi.chart
    rep = psi.rep
    pts = np.atleast_2d(pts)
    n = pts.shape[0]
    nab = covariant_derivative_values(psi, pts, engine)
    pv = psi.values(pts)
    cols = []
    cols.append(
        np.stack([1j * apply_matrix(rep.gammas[i], pv) for i in range(2)], axis=1)
    )
    jg = [rep.gammas[1], -rep.gammas[0]]
    cols.append(np.stack([1j * apply_matrix(jg[i], pv) for i in range(2)], axis=1))
    x = np.stack(
        [c.reshape(n, -1) for c in cols], axis=-1
    )  # (N, 4 complex eqs, 2)
    y = nab.reshape(n, -1)
    xr = np.concatenate([x.real, x.imag], axis=1)  # (N, 8, 2)
    yr = np.concatenate([y.real, y.imag], axis=1)
    gram = np.einsum("nea,neb->nab", xr, xr)
    rhs = np.einsum("nea,ne->na", xr, yr)
    sol = np.linalg.solve(gram, rhs[:, :, None])[:, :, 0]
    fit = np.einsum("nea,na->ne", xr, sol) - yr
    res = np.max(np.linalg.norm(fit, axis=1) / psi.norms(pts))
    return sol[:, 0], sol[:, 1], float(res)


def imaginary_pair_check(phi, psi, endo: EndoField, pts, engine=AD, tol=DEFAULT_TOL):
    """Orthogonality, both imaginary-coupling residuals, and the Lorentzian
    Gauss-Codazzi residuals for a pair of sections sharing one A."""
    chart = phi.chart
    pts = np.atleast_2d(pts)
    nphi, npsi = phi.norms(pts), psi.norms(pts)
    if min(nphi.min(), npsi.min()) < 1e-12:
        raise PreconditionError(
            "both sections must be nowhere vanishing", float(min(nphi.min(), npsi.min()))
        )
    orth = float(np.max(np.abs(herm(phi.values(pts), psi.values(pts))) / (nphi * npsi)))
    checks = [
        make_check(
            "pair-orthogonality",
            "<phi, psi> = 0 pointwise for the Hermitian product",
            orth,
            tol,
        )
    ]
    for tag, sec in (("phi", phi), ("psi", psi)):
        c = skew_killing_residual(sec, endo, pts, "imaginary", engine, tol)
        c.name = f"skew-killing-residual-imag-{tag}"
        checks.append(c)
    g, c = gauss_codazzi_2d(endo, chart, pts, "lorentzian", engine, tol)
    checks.extend([g, c])
    return checks


# -- 3d integrability and Ricci system ------------------------------------------


def integrability_3d(sk: SkewData, pts, engine=AD, tol=DEFAULT_TOL):
    """The three scalar integrability conditions of the adapted frame plus
    the normal-bundle integrability scalar g([e'_1, e'_2], xi)."""
    chart = sk.chart
    pts = np.atleast_2d(pts)
    d = SkewFrameData(sk, pts, engine)
    c = chart.structure_jets(pts, 0, engine)
    q1, q2 = sk.q
    normal = sk.sign * c[q1][q2][sk.xi_index].value
    checks = [
        make_check(
            "integrability-h-symmetry",
            "g(h e'_1, e'_2) = g(h e'_2, e'_1) for h = grad(xi) on the"
            " complement of the kernel line",
            np.max(np.abs(d.h[:, 0, 1] - d.h[:, 1, 0])),
            tol,
        ),
        make_check(
            "integrability-db1",
            "e'_1(b) = b g(kappa, e'_1) with kappa = nabla_xi xi",
            np.max(np.abs(d.e_b[:, 0] - d.b * d.kappa[:, 0])),
            tol,
        ),
        make_check(
            "integrability-db2",
            "e'_2(b) = b g(kappa, e'_2)",
            np.max(np.abs(d.e_b[:, 1] - d.b * d.kappa[:, 1])),
            tol,
        ),
        make_check(
            "normal-bundle-integrability",
            "g([e'_1, e'_2], xi) = 0: the complement of the kernel line is"
            " integrable",
            np.max(np.abs(normal)),
            tol,
        ),
    ]
    return checks


def _ricci_rhs_coefficients(d: SkewFrameData):
    """Right-hand sides of the three adapted Ricci identities, as
    coefficient arrays over the basis (psi, xi.psi, e'_1.psi, e'_2.psi)."""
    b, xib = d.b, d.xi_b
    h, k, trh = d.h, d.kappa, d.trh
    e1b, e2b = d.e_b[:, 0], d.e_b[:, 1]
    rhs1 = np.stack(
        [
            e2b - b * k[:, 1],
            e1b,
            -2 * b * b + b * trh + b * h[:, 0, 0] + xib,
            b * h[:, 0, 1],
        ],
        axis=1,
    )
    rhs2 = np.stack(
        [
            -e1b + b * k[:, 0],
            e2b,
            b * h[:, 1, 0],
            -2 * b * b + b * trh + b * h[:, 1, 1] + xib,
        ],
        axis=1,
    )
    rhs_xi = np.stack(
        [
            b * (h[:, 0, 1] - h[:, 1, 0]),
            2 * xib + b * trh,
            b * k[:, 0],
            b * k[:, 1],
        ],
        axis=1,
    )
    return rhs1, rhs2, rhs_xi


def ricci_system_3d(sk: SkewData, pts, engine=AD, tol=DEFAULT_TOL):
    """Compare the adapted Ricci identities against the geometric Ricci
    tensor, coefficient by coefficient, plus the scalar curvature identity
    Scal = 8(b^2 - xi(b) - b tr h)."""
    chart = sk.chart
    pts = np.atleast_2d(pts)
    d = SkewFrameData(sk, pts, engine)
    curv = riemann(chart).at(pts, engine)
    ric = curv.ricci
    s, sg = sk.xi_index, sk.sign
    q1, q2 = sk.q
    rhs = _ricci_rhs_coefficients(d)
    rows = (q1, q2, s)
    signs = (1.0, 1.0, sg)
    checks = []
    names = ("ricci-system-e1", "ricci-system-e2", "ricci-system-xi")
    for eqi in range(3):
        r, pre = rows[eqi], signs[eqi]
        lhs = np.stack(
            [
                np.zeros(pts.shape[0]),
                -0.5 * pre * sg * ric[:, r, s],
                -0.5 * pre * ric[:, r, q1],
                -0.5 * pre * ric[:, r, q2],
            ],
            axis=1,
        )
        checks.append(
            make_check(
                names[eqi],
                "adapted Ricci identity: -1/2 Ric(E) . psi expanded over"
                " (psi, xi.psi, e'_1.psi, e'_2.psi) matches the h/kappa/b"
                " coefficient formulas",
                np.max(np.abs(lhs - rhs[eqi])),
                tol,
            )
        )
    scal_formula = 8 * (d.b**2 - d.xi_b - d.b * d.trh)
    checks.append(
        make_check(
            "scal-formula",
            "Scal = 8 (b^2 - xi(b) - b tr h) against the curvature tensor",
            np.max(np.abs(curv.scal - scal_formula)),
            tol,
        )
    )
    return checks


# -- tau and zeta diagnostics ----------------------------------------------------


def zeta_jets(psi, pts, engine=AD, chart=None):
    """Order-1 jets of the real vector field zeta with
    g(zeta, E_k) = i <E_k . psi, psi>."""
    chart = chart or psi.chart
    rep = psi.rep
    pts = np.atleast_2d(pts)
    pj = psi.component_jets(pts, 1, engine)
    out = []
    for k in range(chart.dim):
        g = rep.gammas[k]
        acc = None
        for a_ in range(2):
            for b_ in range(2):
                if g[a_, b_] == 0:
                    continue
                t = (pj[b_] * pj[a_].conj()) * g[a_, b_]
                acc = t if acc is None else acc + t
        out.append((acc * 1j).real_part())
    return out


def tau_zeta_diagnostics(sk: SkewData, pts, engine=AD, tol=1e-7, psi=None):
    """Residuals: d tau = 0; and with a section, the zeta identities
    nabla_X zeta = 2 g(zeta,tau) X - 2 g(X,zeta) tau, |zeta| constant,
    d zeta-flat = -2 zeta-flat wedge tau."""
    chart = sk.chart
    pts = np.atleast_2d(pts)
    n = pts.shape[0]
    dim = chart.dim
    dtau = d_oneform(sk.tau_frame_fields(), chart, pts, engine)
    checks = [
        make_check(
            "tau-closed",
            "d(b xi-flat) = 0: the torsion 1-form is closed",
            np.max(np.abs(dtau)),
            tol,
        )
    ]
    if psi is None:
        return checks
    zj = zeta_jets(psi, pts, engine, chart)
    zval = np.stack([z.value for z in zj], axis=1)
    frame_vals = chart.frame_values(pts, engine) if chart.frame is not None else None
    dz = np.stack(
        [chart.directional_values(zj[k], frame_vals) for k in range(dim)], axis=2
    )  # (N, i, k) = E_i(zeta_k)
    gam = christoffel(chart).values(pts, engine)
    nabz = dz + np.einsum("nikj,nk->nij", gam, zval)
    tau = np.zeros((n, dim))
    tau[:, sk.xi_index] = sk.sign * sk.b.values(pts)
    ztau = np.einsum("nk,nk->n", zval, tau)
    rhs = 2 * ztau[:, None, None] * np.eye(dim)[None] - 2 * np.einsum(
        "ni,nj->nij", zval, tau
    )
    checks.append(
        make_check(
            "zeta-covariant-derivative",
            "nabla_X zeta = 2 g(zeta,tau) X - 2 g(X,zeta) tau",
            np.max(np.abs(nabz - rhs)),
            tol,
        )
    )
    dznorm = 2 * np.einsum("nik,nk->ni", dz, zval)
    checks.append(
        make_check(
            "zeta-norm-constancy",
            "the length of zeta is constant",
            np.max(np.abs(dznorm)),
            tol,
        )
    )
    cjets = chart.structure_jets(pts, 0, engine)
    dzeta = dz - dz.transpose(0, 2, 1)
    for i in range(dim):
        for j in range(dim):
            for k in range(dim):
                dzeta[:, i, j] -= cjets[i][j][k].value * zval[:, k]
    pfaff = dzeta + 2 * (
        np.einsum("ni,nj->nij", zval, tau) - np.einsum("nj,ni->nij", zval, tau)
    )
    checks.append(
        make_check(
            "zeta-pfaff",
            "d zeta-flat + 2 zeta-flat wedge tau = 0 (transversally affine"
            " Pfaff pair)",
            np.max(np.abs(pfaff)),
            tol,
        )
    )
    return checks


def sign_covariance_residual(sk: SkewData, pts, engine=AD):
    """Replacing (xi, e'_1, e'_2, b) by (-xi, e'_2, e'_1, -b) must leave all
    adapted residuals unchanged; returns the sup difference."""
    def residual_vector(data):
        vals = []
        for c in integrability_3d(data, pts, engine):
            vals.append(c.residual)
        for c in ricci_system_3d(data, pts, engine):
            vals.append(c.residual)
        for c in tau_zeta_diagnostics(data, pts, engine):
            vals.append(c.residual)
        return np.array(vals)

    r0 = residual_vector(sk)
    r1 = residual_vector(sk.flipped())
    return float(np.max(np.abs(r0 - r1)))


# -- conformal correspondence ------------------------------------------------------


def tau_coordinate_jets(sk: SkewData, pts, order=1, engine=AD):
    """Coordinate components of tau = b xi-flat (requires a realization)."""
    chart = sk.chart
    m = chart.inverse_frame_jets(pts, order, engine)
    bjet = sk.b.jet(pts, order, engine)
    return [m[mu][sk.xi_index] * bjet * sk.sign for mu in range(chart.dim)]


class PotentialField(Field):
    """u with du = -2 tau, defined by composite Gauss-Legendre line
    integration of the coordinate components of tau along axis-parallel
    polylines from the chart base point (u(base) = 0).

    The closedness residual of tau bounds the path dependence.  Jets reuse
    the analytic relation: grad u = -2 tau and hess u = -2 grad tau.
    """

    def __init__(self, sk: SkewData, gl_order=32, bounds_slack=0.05):
        self.sk = sk
        self.chart = sk.chart
        self.base = self.chart.base_point
        nodes, weights = np.polynomial.legendre.leggauss(gl_order)
        self._nodes = (nodes + 1.0) / 2.0
        self._weights = weights / 2.0
        self.bounds_slack = bounds_slack

    def _check_inside(self, pts):
        for mu, (lo, hi) in enumerate(self.chart.bounds):
            pad = self.bounds_slack * (hi - lo)
            if np.any(pts[:, mu] < lo - pad) or np.any(pts[:, mu] > hi + pad):
                raise GeometryError(
                    "line-integration path leaves the chart bounds"
                )

    def values(self, pts):
        pts = np.atleast_2d(pts)
        self._check_inside(pts)
        n, d = pts.shape
        total = np.zeros(n)
        for mu in range(d):
            start = np.tile(self.base, (n, 1))
            start[:, :mu] = pts[:, :mu]
            delta = pts[:, mu] - self.base[mu]
            # quadrature points along the axis segment
            seg = np.repeat(start[:, None, :], len(self._nodes), axis=1)
            seg[:, :, mu] = self.base[mu] + np.outer(delta, self._nodes)
            flat = seg.reshape(-1, d)
            tau_mu = tau_coordinate_jets(self.sk, flat, 0)[mu].value.reshape(
                n, len(self._nodes)
            )
            total += delta * (tau_mu @ self._weights)
        return -2.0 * total

    def _jet_ad(self, pts, order):
        pts = np.atleast_2d(pts)
        v = self.values(pts)
        if order == 0:
            return Jet(v)
        tau = tau_coordinate_jets(self.sk, pts, 1)
        g = -2.0 * np.stack([t.value for t in tau], axis=1)
        if order == 1:
            return Jet(v, g)
        h = -2.0 * np.stack([t.grad for t in tau], axis=1)
        h = 0.5 * (h + h.transpose(0, 2, 1))
        return Jet(v, g, h)


def conformal_to_parallel(
    psi, sk: SkewData, pts, engine=AD, tol=DEFAULT_TOL, dtau_tol=1e-7
):
    """Rescale by e^{2u} with du = -2 tau and transport the section; for a
    skew Killing section the result is parallel.

    Returns (barred chart, barred section, u field, checks)."""
    chart = sk.chart
    pts = np.atleast_2d(pts)
    dtau = np.max(np.abs(d_oneform(sk.tau_frame_fields(), chart, pts, engine)))
    if dtau > dtau_tol:
        raise PreconditionError("tau is not closed; no local potential", float(dtau))
    u = PotentialField(sk)
    barred = conformal_rescale(chart, u)
    psibar = psi.on_chart(barred)
    nab = covariant_derivative_values(psibar, pts, engine)
    res = np.max(
        np.linalg.norm(nab, axis=-1) / psibar.norms(pts)[:, None]
    )
    checks = [
        make_check(
            "tau-closed",
            "d(b xi-flat) = 0: the torsion 1-form is closed",
            dtau,
            dtau_tol,
        ),
        make_check(
            "conformal-parallel-residual",
            "the section is parallel for the rescaled metric e^{2u} g with"
            " du = -2 tau",
            res,
            tol,
        ),
    ]
    return barred, psibar, u, checks


def parallel_to_skew(psi0, u, chart, pts, engine=AD, tol=1e-7, match_tol=1e-8):
    """From a parallel section on a flat chart and a conformal factor u,
    build the rescaled chart, the transported section, and the skew
    endomorphism A(X) = -1/2 star(du wedge X); verify the skew Killing
    equation and the componentwise derivative formulas.

    Returns (A endo field, skew data, barred chart, barred section, checks).
    """
    if chart.dim != 3:
        raise GeometryError("the conformal construction lives in dimension 3")
    pts = np.atleast_2d(pts)
    par = np.max(
        np.linalg.norm(covariant_derivative_values(psi0, pts, engine, chart), axis=-1)
        / psi0.norms(pts)[:, None]
    )
    if par > tol:
        raise PreconditionError("input section is not parallel", float(par))
    u = as_field(u)
    barred = conformal_rescale(chart, u)
    psibar = psi0.on_chart(barred)
    # du in barred frame components, as fields
    dparts = [DerivField(u, mu) for mu in range(3)]
    du_fields = []
    for i in range(3):
        acc = barred.frame[i][0] * dparts[0]
        for mu in range(1, 3):
            acc = acc + barred.frame[i][mu] * dparts[mu]
        du_fields.append(acc)
    rows = [[ConstField(0.0)] * 3 for _ in range(3)]
    for j in range(3):
        for k in range(3):
            acc = None
            for i in range(3):
                coeff = -0.5 * HODGE_ORIENT * _EPS3[i, j, k]
                if coeff == 0.0:
                    continue
                t = du_fields[i] * coeff
                acc = t if acc is None else acc + t
            if acc is not None:
                rows[k][j] = acc
    endo = EndoField(rows)
    sks = skew_killing_residual(psibar, endo, pts, "real", engine, tol, barred)
    sks.name = "parallel-to-skew-residual"
    # displayed derivative formulas: A(e_1) = -1/2 e_2(u) e_3 + 1/2 e_3(u) e_2, etc.
    duv = np.stack([f.values(pts) for f in du_fields], axis=1)
    aform = np.zeros((pts.shape[0], 3, 3))
    aform[:, 2, 0] = -0.5 * duv[:, 1]
    aform[:, 1, 0] = 0.5 * duv[:, 2]
    aform[:, 2, 1] = 0.5 * duv[:, 0]
    aform[:, 0, 1] = -0.5 * duv[:, 2]
    aform[:, 1, 2] = -0.5 * duv[:, 0]
    aform[:, 0, 2] = 0.5 * duv[:, 1]
    match = np.max(np.abs(endo.values(pts) - aform))
    checks = [
        sks,
        make_check(
            "hodge-formula-match",
            "A from -1/2 star(du wedge X) matches the three displayed"
            " componentwise derivative formulas",
            match,
            match_tol,
        ),
    ]
    # adapted data exists only for frame-aligned kernel lines; the
    # construction and its residuals above are valid either way
    try:
        sk = skew_data_from_endo(endo, barred, pts)
    except GeometryError:
        sk = None
    return endo, sk, barred, psibar, checks


# -- incompleteness demonstration ---------------------------------------------


def curve_length_along_axis(u_field_1d, q, p, gl_order=64):
    """Length of t -> (t, fixed) for e^{2u} g when the curve has unit g-speed:
    integral of e^{u(t)} dt from q to p, by Gauss-Legendre quadrature."""
    nodes, weights = np.polynomial.legendre.leggauss(gl_order)
    t = q + (p - q) * (nodes + 1.0) / 2.0
    return float((p - q) / 2.0 * np.sum(weights * np.exp(u_field_1d(t))))


def incompleteness_demo(b_of_t, t0=0.0, start=5.0, ends=range(6, 21), bound=1e-2):
    """Bounded forward curve lengths against divergent coordinate separation.

    u(t) = -2 * integral of b from t0; returns (lengths, check).  The check
    passes when every length from ``start`` stays below ``bound`` while the
    coordinate separation grows without bound.
    """
    nodes, weights = np.polynomial.legendre.leggauss(64)

    def u_of(t):
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        out = np.empty_like(t)
        for i, ti in enumerate(t):
            s = t0 + (ti - t0) * (nodes + 1.0) / 2.0
            out[i] = -2.0 * (ti - t0) / 2.0 * np.sum(weights * b_of_t(s))
        return out

    lengths = {int(n): curve_length_along_axis(u_of, start, float(n)) for n in ends}
    worst = max(lengths.values())
    closed_exact = np.exp(-start) - np.exp(-max(ends))
    alt_figure = 0.5 * (np.exp(-2 * start) - np.exp(-2 * max(ends)))
    notes = (
        f"length({start}->{max(ends)}) = {lengths[max(ends)]:.6e}; "
        f"closed form e^-q - e^-p = {closed_exact:.6e}; the alternative "
        f"figure (e^-2q - e^-2p)/2 = {alt_figure:.6e} integrates the metric "
        "coefficient e^{2u} instead of the line element e^u; coordinate "
        f"separation grows to {max(ends) - start:.0f} while lengths stay "
        "bounded; the Cauchy-but-divergent conclusion holds for both figures"
    )
    check = make_check(
        "incompleteness-cauchy",
        "the rescaled metric admits a divergent Cauchy sequence: forward"
        " t-curve lengths are uniformly small",
        worst,
        bound,
        notes=notes,
        extras={f"length_to_{n}": v for n, v in lengths.items()},
    )
    return lengths, check
