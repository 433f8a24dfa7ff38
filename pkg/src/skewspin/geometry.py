"""Charts with orthonormal frames and the classical tensor layer.

A chart fixes local coordinates, rectangular bounds and an orthonormal frame
given either by coordinate vector fields E_i = sum_mu a_i^mu d_mu (the frame
*realization*; the induced metric is the one making the frame orthonormal)
or by structure constants c_ij^k with [E_i, E_j] = sum_k c_ij^k E_k.  The
frame order is declared direct.

Curvature convention: R(X,Y) = nabla_X nabla_Y - nabla_Y nabla_X -
nabla_[X,Y], stored as R_ijkl = g(R(E_i,E_j)E_k, E_l), with
Ric(X,Y) = sum_i g(R(E_i,X)Y, E_i) and sectional curvature R_ijji.
"""

from dataclasses import dataclass

import numpy as np

from .fields import AD, Field, as_field, jet_matrix_inverse, jet_partial
from .jets import Jet

# Orientation sign of the 3d Hodge star on the direct frame, frozen so that
# A(X) = -1/2 * star(du wedge X) is exactly the skew endomorphism produced by
# a conformal change with factor e^{2u} acting on a parallel spinor.  The
# opposite (right-handed eps_123 = +1) convention differs by a global sign.
HODGE_ORIENT = -1.0

_EPS3 = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _EPS3[_i, _j, _k] = 1.0
    _EPS3[_j, _i, _k] = -1.0


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class FrameChart:
    """Coordinate chart plus orthonormal frame specification."""

    dim: int
    coords: tuple
    bounds: tuple  # ((lo, hi), ...) per coordinate
    frame: tuple | None = None  # frame[i][mu] Field: coordinate components of E_i
    structure: dict | None = None  # {(i, j, k): Field} for i < j
    name: str = ""

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise GeometryError(f"dimension must be 2 or 3, got {self.dim}")
        if len(self.coords) != self.dim or len(self.bounds) != self.dim:
            raise GeometryError("coords/bounds do not match the dimension")
        if self.frame is None and self.structure is None:
            raise GeometryError("chart needs a frame realization or structure constants")

    @property
    def base_point(self):
        return np.array([(lo + hi) / 2.0 for lo, hi in self.bounds])

    def grid(self, n, margin=0.05):
        """Sample grid of n points per axis, shrunk from the boundary."""
        if np.isscalar(n):
            n = (int(n),) * self.dim
        axes = []
        for (lo, hi), ni in zip(self.bounds, n):
            pad = margin * (hi - lo)
            axes.append(np.linspace(lo + pad, hi - pad, ni))
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    # -- frame data ---------------------------------------------------------

    def frame_jets(self, pts, order=2, engine=AD):
        if self.frame is None:
            raise GeometryError(
                f"chart {self.name!r} has no coordinate frame realization"
            )
        return [
            [self.frame[i][mu].jet(pts, order, engine) for mu in range(self.dim)]
            for i in range(self.dim)
        ]

    def frame_values(self, pts, engine=AD):
        jets = self.frame_jets(pts, 0, engine)
        return np.stack(
            [np.stack([jets[i][mu].value for mu in range(self.dim)], 1) for i in range(self.dim)],
            axis=1,
        )  # (N, i, mu)

    def inverse_frame_jets(self, pts, order=2, engine=AD):
        """m[mu][k] jets with d_mu = sum_k m[mu][k] E_k; checks degeneracy."""
        a = self.frame_jets(pts, order, engine)
        det_val = _det_values([[a[i][m].value for m in range(self.dim)] for i in range(self.dim)])
        bad = np.abs(det_val) < 1e-12
        if np.any(bad):
            where = pts[np.argmax(bad)]
            raise GeometryError(f"frame degenerate near {where.tolist()} (det ~ 0)")
        inv, _ = jet_matrix_inverse(a)
        return inv

    def structure_jets(self, pts, order=2, engine=AD):
        """c[i][j][k] jets.  Declared structure constants take priority;
        otherwise they are derived from the frame realization (one
        derivative order below the frame fields)."""
        d = self.dim
        n = np.atleast_2d(pts).shape[0]
        if self.structure is not None:
            zero = Jet.constant(0.0, n, d, order)
            c = [[[zero for _ in range(d)] for _ in range(d)] for _ in range(d)]
            for (i, j, k), f in self.structure.items():
                jet = as_field(f).jet(pts, order, engine)
                c[i][j][k] = jet
                c[j][i][k] = -jet
            return c
        a = self.frame_jets(pts, min(order + 1, 2), engine)
        m = self.inverse_frame_jets(pts, order, engine)
        c = [[[None] * d for _ in range(d)] for _ in range(d)]
        for i in range(d):
            c[i][i] = [Jet.constant(0.0, n, d, order) for _ in range(d)]
        for i in range(d):
            for j in range(i + 1, d):
                bracket = []
                for mu in range(d):
                    term = None
                    for nu in range(d):
                        t = a[i][nu] * jet_partial(a[j][mu], nu) - a[j][nu] * jet_partial(
                            a[i][mu], nu
                        )
                        term = t if term is None else term + t
                    bracket.append(term)
                for k in range(d):
                    ck = None
                    for mu in range(d):
                        t = bracket[mu] * m[mu][k]
                        ck = t if ck is None else ck + t
                    c[i][j][k] = ck.truncate(order)
                    c[j][i][k] = (-ck).truncate(order)
        return c

    def directional_values(self, jet, frame_vals=None):
        """E_i applied to a scalar jet, as values (N, d): a_i^mu d_mu.

        Charts without a realization only support coordinate-independent
        data (zero gradient)."""
        if jet.grad is None:
            raise GeometryError("jet carries no gradient")
        if self.frame is None:
            if np.max(np.abs(jet.grad)) > 1e-12:
                raise GeometryError(
                    "structure-constant chart without realization cannot "
                    "differentiate position-dependent fields"
                )
            return np.zeros((jet.value.shape[0], self.dim), dtype=jet.value.dtype)
        return np.einsum("nim,nm->ni", frame_vals, jet.grad)


def _det_values(a):
    d = len(a)
    if d == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    return (
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    )


def chart_from_frame_exprs(dim, coords, bounds, rows, params=None, name=""):
    """Build a chart from expression strings: rows[i][mu] = a_i^mu."""
    from .fields import ExprField

    frame = tuple(
        tuple(
            f if isinstance(f, Field) else ExprField(f, coords, params) for f in row
        )
        for row in rows
    )
    return FrameChart(dim, tuple(coords), tuple(bounds), frame=frame, name=name)


def flat_chart(dim, size=1.0, name="flat"):
    coords = ("x", "y", "z")[:dim]
    bounds = ((-size, size),) * dim
    rows = [["1" if mu == i else "0" for mu in range(dim)] for i in range(dim)]
    return chart_from_frame_exprs(dim, coords, bounds, rows, name=name)


def check_direct(chart, pts):
    """det of the frame realization must be positive (direct frame)."""
    if chart.frame is None:
        return
    a = chart.frame_values(pts)
    det = np.linalg.det(a)
    if np.any(det <= 0):
        where = pts[int(np.argmin(det))]
        raise GeometryError(f"frame is not direct near {where.tolist()}")


def jacobi_residual(chart, pts, engine=AD):
    """Sup-norm Jacobi identity residual of the structure constants:
    sum over cyclic (i,j,k) of [ sum_m c_ij^m c_mk^l - E_k(c_ij^l) ]."""
    d = chart.dim
    pts = np.atleast_2d(pts)
    n = pts.shape[0]
    c = chart.structure_jets(pts, 1, engine)
    frame_vals = chart.frame_values(pts, engine) if chart.frame is not None else None
    cval = np.empty((n, d, d, d))
    dc = np.empty((n, d, d, d, d))  # dc[:, m, i, j, l] = E_m(c_ij^l)
    for i in range(d):
        for j in range(d):
            for l in range(d):
                cval[:, i, j, l] = c[i][j][l].value
                dc[:, :, i, j, l] = chart.directional_values(c[i][j][l], frame_vals)
    res = 0.0
    for i in range(d):
        for j in range(d):
            for k in range(d):
                for l in range(d):
                    acc = np.zeros(n)
                    for a_, b_, c_ in ((i, j, k), (j, k, i), (k, i, j)):
                        acc += np.einsum(
                            "nm,nm->n", cval[:, a_, b_, :], cval[:, :, c_, l]
                        )
                        acc -= dc[:, c_, a_, b_, l]
                    res = max(res, float(np.max(np.abs(acc))))
    return res


# -- connection ---------------------------------------------------------------


class ConnectionData:
    """Levi-Civita connection coefficients Gamma_ij^k = g(nabla_{E_i}E_j, E_k)
    from the Koszul formula on an orthonormal frame:
    Gamma_ij^k = (c_ij^k - c_jk^i + c_ki^j) / 2."""

    def __init__(self, chart):
        self.chart = chart

    def jets(self, pts, order=1, engine=AD):
        d = self.chart.dim
        c = self.chart.structure_jets(pts, order, engine)
        g = [[[None] * d for _ in range(d)] for _ in range(d)]
        for i in range(d):
            for j in range(d):
                for k in range(d):
                    g[i][j][k] = (c[i][j][k] - c[j][k][i] + c[k][i][j]) * 0.5
        return g

    def values(self, pts, engine=AD):
        d = self.chart.dim
        g = self.jets(pts, 0, engine)
        return np.stack(
            [np.stack([np.stack([g[i][j][k].value for k in range(d)], 1)
                       for j in range(d)], 1)
             for i in range(d)],
            axis=1,
        )  # (N, i, j, k)


def christoffel(chart) -> ConnectionData:
    return ConnectionData(chart)


# -- curvature ----------------------------------------------------------------


@dataclass
class CurvatureData:
    riemann: np.ndarray  # (N, i, j, k, l) = g(R(E_i,E_j)E_k, E_l)
    ricci: np.ndarray  # (N, j, k)
    scal: np.ndarray  # (N,)
    schouten: np.ndarray | None  # (N, j, k), dim 3 only

    def sectional(self, i, j):
        return self.riemann[:, i, j, j, i]


class CurvatureField:
    def __init__(self, chart, conn):
        self.chart = chart
        self.conn = conn

    def at(self, pts, engine=AD) -> CurvatureData:
        chart, d = self.chart, self.chart.dim
        n = np.atleast_2d(pts).shape[0]
        gam = self.conn.jets(pts, 1, engine)
        c = chart.structure_jets(pts, 0, engine)
        frame_vals = chart.frame_values(pts, engine) if chart.frame is not None else None
        gval = np.empty((n, d, d, d))
        dgam = np.empty((n, d, d, d, d))  # (N, m, j, k, l): E_m(Gamma_jk^l)
        for j in range(d):
            for k in range(d):
                for l in range(d):
                    gval[:, j, k, l] = gam[j][k][l].value
                    dgam[:, :, j, k, l] = chart.directional_values(
                        gam[j][k][l], frame_vals
                    )
        cval = np.empty((n, d, d, d))
        for i in range(d):
            for j in range(d):
                for k in range(d):
                    cval[:, i, j, k] = c[i][j][k].value
        # R_ijkl = E_i(G_jkl) - E_j(G_ikl)
        #          + sum_m (G_jkm G_iml - G_ikm G_jml) - sum_m c_ijm G_mkl
        riem = np.empty((n, d, d, d, d))
        for i in range(d):
            for j in range(d):
                riem[:, i, j] = dgam[:, i, j] - dgam[:, j, i]
        riem += np.einsum("njkm,niml->nijkl", gval, gval)
        riem -= np.einsum("nikm,njml->nijkl", gval, gval)
        riem -= np.einsum("nijm,nmkl->nijkl", cval, gval)
        ricci = np.einsum("nijki->njk", riem)
        scal = np.einsum("njj->n", ricci)
        schouten = None
        if d == 3:
            schouten = (scal / 4.0)[:, None, None] * np.eye(3)[None] - ricci
        return CurvatureData(riem, ricci, scal, schouten)


def riemann(chart, conn=None) -> CurvatureField:
    return CurvatureField(chart, conn or christoffel(chart))


def curvature_fd_oracle(chart, pts, step=1e-4) -> CurvatureData:
    """Independent curvature oracle: coordinate metric from the frame
    realization, coordinate Christoffels and Riemann tensor by central
    finite differences, projected back onto the frame."""
    d = chart.dim
    pts = np.atleast_2d(pts)
    n = pts.shape[0]

    def metric_at(q):
        a = chart.frame_values(q)  # (M, i, mu)
        ginv = np.einsum("nim,niv->nmv", a, a)
        return np.linalg.inv(ginv)

    def christ_at(q):
        g = metric_at(q)
        m = q.shape[0]
        dg = np.empty((m, d, d, d))  # dg[:, s, u, v] = d_s g_uv
        for s in range(d):
            e = np.zeros(d)
            e[s] = step
            dg[:, s] = (metric_at(q + e) - metric_at(q - e)) / (2 * step)
        ginv = np.linalg.inv(g)
        gam = np.empty((m, d, d, d))  # gam[:, l, u, v] = Gamma^l_{uv}
        for l in range(d):
            for u in range(d):
                for v in range(d):
                    acc = np.zeros(m)
                    for r in range(d):
                        acc += ginv[:, l, r] * (
                            dg[:, u, r, v] + dg[:, v, r, u] - dg[:, r, u, v]
                        )
                    gam[:, l, u, v] = 0.5 * acc
        return gam

    gam = christ_at(pts)  # (N, l, mu, nu) = Gamma^l_{mu nu}
    dgam = np.empty((n, d, d, d, d))
    for s in range(d):
        e = np.zeros(d)
        e[s] = step
        dgam[:, s] = (christ_at(pts + e) - christ_at(pts - e)) / (2 * step)
    # R^l_{s mu nu} = d_mu Gamma^l_{nu s} - d_nu Gamma^l_{mu s}
    #                 + Gamma^l_{mu r} Gamma^r_{nu s} - Gamma^l_{nu r} Gamma^r_{mu s}
    riem_up = np.zeros((n, d, d, d, d))  # (N, l, s, mu, nu)
    for l in range(d):
        for s in range(d):
            for mu in range(d):
                for nu in range(d):
                    val = dgam[:, mu, l, nu, s] - dgam[:, nu, l, mu, s]
                    for r in range(d):
                        val = val + gam[:, l, mu, r] * gam[:, r, nu, s]
                        val = val - gam[:, l, nu, r] * gam[:, r, mu, s]
                    riem_up[:, l, s, mu, nu] = val
    a = chart.frame_values(pts)  # (N, i, mu)
    g = metric_at(pts)
    alow = np.einsum("nit,ntl->nil", a, g)  # frame vectors lowered
    riem = np.einsum("nim,njv,nks,nlt,ntsmv->nijkl", a, a, a, alow, riem_up)
    ricci = np.einsum("nijki->njk", riem)
    scal = np.einsum("njj->n", ricci)
    schouten = None
    if d == 3:
        schouten = (scal / 4.0)[:, None, None] * np.eye(3)[None] - ricci
    return CurvatureData(riem, ricci, scal, schouten)


def schouten_symmetry_residual(chart, pts, engine=AD, step=1e-4):
    """sup |(nabla_{E_i} P)E_j - (nabla_{E_j} P)E_i| for the Schouten tensor;
    vanishing characterizes conformal flatness in dimension 3."""
    if chart.dim != 3:
        raise GeometryError("the Schouten symmetry test lives in dimension 3")
    d = 3
    pts = np.atleast_2d(pts)
    n = pts.shape[0]
    curv = riemann(chart)
    if engine.kind == "fd":
        # widen both steps so the outer differencing amplifies neither the
        # inner roundoff (~eps/step^2 in the curvature) nor its own
        from .fields import FD as _FD

        engine = _FD(max(engine.step, 1e-3))
        step = max(step, engine.step)

    def p_at(q):
        return curv.at(q, engine).schouten

    p0 = p_at(pts)
    gval = christoffel(chart).values(pts, engine)
    if chart.frame is not None:
        a = chart.frame_values(pts, engine)
        dp = np.empty((n, d, d, d))  # coordinate partials d_mu P_jk
        for mu in range(d):
            e = np.zeros(d)
            e[mu] = step
            dp[:, mu] = (p_at(pts + e) - p_at(pts - e)) / (2 * step)
        ep = np.einsum("nim,nmjk->nijk", a, dp)  # E_i(P_jk)
    else:
        # homogeneous data: P must be coordinate-independent
        probe = p_at(pts + 1e-3) - p0
        if np.max(np.abs(probe)) > 1e-9:
            raise GeometryError(
                "structure-constant chart without realization has "
                "position-dependent curvature"
            )
        ep = np.zeros((n, d, d, d))
    # (nabla_i P)_mj = E_i(P_mj) + Gamma_ik^m P_kj - Gamma_ij^k P_mk
    nab = (
        ep.transpose(0, 1, 2, 3)
        + np.einsum("nikm,nkj->nimj", gval, p0)
        - np.einsum("nijk,nmk->nimj", gval, p0)
    )  # (n, i, m, j)
    asym = nab - nab.transpose(0, 3, 2, 1)  # swap i <-> j
    return float(np.max(np.abs(asym)))


# -- exterior calculus on the frame --------------------------------------------


def d_oneform(alpha, chart, pts, engine=AD):
    """Exterior derivative of a 1-form given in frame components.

    Computed covariantly as (d alpha)_ij = (nabla_i alpha)_j -
    (nabla_j alpha)_i; returns an antisymmetric (N, d, d) array.
    """
    d = chart.dim
    pts = np.atleast_2d(pts)
    n = pts.shape[0]
    jets = [as_field(f).jet(pts, 1, engine) for f in alpha]
    frame_vals = chart.frame_values(pts, engine) if chart.frame is not None else None
    gval = christoffel(chart).values(pts, engine)
    aval = np.stack([j.value for j in jets], axis=1)
    ea = np.stack(
        [chart.directional_values(jets[k], frame_vals) for k in range(d)], axis=2
    )  # (N, i, k) = E_i(alpha_k)
    nab = ea - np.einsum("nijk,nk->nij", gval, aval)  # (N, i, j) = (nabla_i alpha)_j
    return nab - nab.transpose(0, 2, 1)


def hodge_star3(alpha, beta, chart=None):
    """star(alpha wedge beta) of two covectors in direct-frame components.

    Arrays are (N, 3); the orientation carries the recorded HODGE_ORIENT
    sign (see module docstring).
    """
    alpha = np.asarray(alpha)
    beta = np.asarray(beta)
    return HODGE_ORIENT * np.einsum("ijk,ni,nj->nk", _EPS3, alpha, beta)


def skew_endo_from_gradient(du):
    """A(X) = -1/2 star(du wedge X) as matrices (N, 3, 3), columns = images
    of the frame vectors; skew-symmetric by construction."""
    du = np.asarray(du)
    n = du.shape[0]
    a = np.empty((n, 3, 3))
    for j in range(3):
        basis = np.zeros((n, 3))
        basis[:, j] = 1.0
        a[:, :, j] = -0.5 * hodge_star3(du, basis)
    return a


# -- conformal rescale ----------------------------------------------------------


def conformal_rescale(chart, u_field, name_suffix="~conformal"):
    """Chart for e^{2u} g with frame E_i -> e^{-u} E_i (same coordinates)."""
    if chart.frame is None:
        raise GeometryError("conformal rescaling needs a frame realization")
    from .fields import FuncField

    scale = FuncField("exp", -as_field(u_field))
    frame = tuple(
        tuple(scale * chart.frame[i][mu] for mu in range(chart.dim))
        for i in range(chart.dim)
    )
    return FrameChart(
        chart.dim,
        chart.coords,
        chart.bounds,
        frame=frame,
        name=chart.name + name_suffix,
    )
