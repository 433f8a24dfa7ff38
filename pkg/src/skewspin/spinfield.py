"""Spinor sections, the spin covariant derivative, Dirac operator and
spinorial curvature.

Sections live in the frame-adapted trivialization of a single chart, so the
spin connection is exactly

    nabla_{E_i} psi = E_i(psi) + 1/2 sum_{j<k} Gamma_ij^k gamma_j gamma_k psi

and no transition functions appear.  Second covariant derivatives are
obtained by differentiating the closed-form first derivative with forward
jets, not by nested numerical differencing.
"""

import numpy as np

from .clifford import CliffordRep, apply_matrix, clifford_rep
from .fields import AD, ComplexField, jet_partial
from .geometry import FrameChart, GeometryError, christoffel
from .jets import Jet


class SpinorSection:
    """Two complex component fields over a chart, with its Clifford rep."""

    def __init__(self, comps, chart: FrameChart, rep: CliffordRep | None = None):
        self.comps = tuple(comps)
        self.chart = chart
        self.rep = rep or clifford_rep(chart.dim)

    @staticmethod
    def from_exprs(chart, re1, im1, re2, im2, params=None, rep=None):
        from .fields import ExprField

        mk = lambda s: ExprField(s, chart.coords, params)
        return SpinorSection(
            (ComplexField(mk(re1), mk(im1)), ComplexField(mk(re2), mk(im2))),
            chart,
            rep,
        )

    @staticmethod
    def constant(chart, c0, c1, rep=None):
        from .fields import ConstField

        c0, c1 = complex(c0), complex(c1)
        return SpinorSection(
            (
                ComplexField(ConstField(c0.real), ConstField(c0.imag)),
                ComplexField(ConstField(c1.real), ConstField(c1.imag)),
            ),
            chart,
            rep,
        )

    def values(self, pts):
        return np.stack([c.values(pts) for c in self.comps], axis=-1)

    def component_jets(self, pts, order=2, engine=AD):
        return [c.jet(pts, order, engine) for c in self.comps]

    def norms(self, pts):
        v = self.values(pts)
        return np.sqrt(np.sum(np.abs(v) ** 2, axis=-1))

    def apply_matrix(self, m):
        """Section with components M psi for a constant 2x2 complex matrix."""
        m = np.asarray(m, dtype=np.complex128)
        comps = tuple(
            self.comps[0].scaled(m[c, 0]) + self.comps[1].scaled(m[c, 1])
            for c in range(2)
        )
        return SpinorSection(comps, self.chart, self.rep)

    def __add__(self, other):
        return SpinorSection(
            (self.comps[0] + other.comps[0], self.comps[1] + other.comps[1]),
            self.chart,
            self.rep,
        )

    def on_chart(self, chart):
        """Same component functions read in another chart's trivialization
        (the conformal spinor-bundle isometry in adapted frames)."""
        return SpinorSection(self.comps, chart, self.rep)


def _zero_like(jet, order):
    n = jet.value.shape[0]
    d = jet.dim
    return Jet.constant(0.0 + 0.0j, n, d or 1, order, dtype=np.complex128)


def covariant_derivative(psi, pts, order=0, engine=AD, chart=None):
    """Jets of nabla_{E_i} psi for every frame index.

    Returns out[i][c], complex jets of the requested order (one below the
    section's own jets).
    """
    chart = chart or psi.chart
    rep = psi.rep
    d = chart.dim
    pts = np.atleast_2d(pts)
    pj = psi.component_jets(pts, min(order + 1, 2), engine)
    gam = christoffel(chart).jets(pts, order, engine)
    have_frame = chart.frame is not None
    if have_frame:
        a = chart.frame_jets(pts, order, engine)
    else:
        for j in pj:
            if j.grad is not None and np.max(np.abs(j.grad)) > 1e-12:
                raise GeometryError(
                    "structure-constant chart without realization cannot "
                    "differentiate a position-dependent section"
                )
    out = []
    for i in range(d):
        comps = []
        for c in range(2):
            if have_frame:
                term = None
                for mu in range(d):
                    t = a[i][mu] * jet_partial(pj[c], mu)
                    term = t if term is None else term + t
            else:
                term = _zero_like(pj[c], order)
            for j in range(d):
                for k in range(j + 1, d):
                    m = rep.gammas[j] @ rep.gammas[k]
                    mix = pj[0] * (0.5 * m[c, 0]) + pj[1] * (0.5 * m[c, 1])
                    term = term + gam[i][j][k] * mix
            comps.append(term.truncate(order))
        out.append(comps)
    return out


def covariant_derivative_values(psi, pts, engine=AD, chart=None):
    """nabla_{E_i} psi as an (N, d, 2) complex array."""
    nab = covariant_derivative(psi, pts, 0, engine, chart)
    d = (chart or psi.chart).dim
    return np.stack(
        [np.stack([nab[i][c].value for c in range(2)], axis=-1) for i in range(d)],
        axis=1,
    )


def spin_covariant_derivative(psi, pts, i, engine=AD, chart=None):
    """nabla_{E_i} psi for one frame index, as (N, 2) complex values."""
    return covariant_derivative_values(psi, pts, engine, chart)[:, i]


def dirac(psi, pts, engine=AD, chart=None):
    """D psi = sum_i E_i . nabla_{E_i} psi, as (N, 2) complex values."""
    chart = chart or psi.chart
    nab = covariant_derivative_values(psi, pts, engine, chart)
    out = np.zeros(nab.shape[::2], dtype=np.complex128)
    for i in range(chart.dim):
        out += apply_matrix(psi.rep.gammas[i], nab[:, i])
    return out


def spinorial_curvature(psi, pts, engine=AD, chart=None):
    """R(E_i, E_j) psi as an (N, d, d, 2) complex array, antisymmetric in
    (i, j): nabla_i nabla_j psi - nabla_j nabla_i psi - nabla_{[E_i,E_j]} psi.
    """
    chart = chart or psi.chart
    rep = psi.rep
    d = chart.dim
    pts = np.atleast_2d(pts)
    n = pts.shape[0]
    phi = covariant_derivative(psi, pts, 1, engine, chart)
    gam = christoffel(chart).jets(pts, 0, engine)
    c = chart.structure_jets(pts, 0, engine)
    frame_vals = chart.frame_values(pts, engine) if chart.frame is not None else None
    phival = np.empty((n, d, 2), dtype=np.complex128)
    for j in range(d):
        for comp in range(2):
            phival[:, j, comp] = phi[j][comp].value
    # nabla_i of the spinor field Phi_j
    nab2 = np.empty((n, d, d, 2), dtype=np.complex128)
    for j in range(d):
        dphi = np.stack(
            [chart.directional_values(phi[j][comp], frame_vals) for comp in range(2)],
            axis=-1,
        )  # (N, i, comp)
        nab2[:, :, j, :] = dphi
        for i in range(d):
            for a_ in range(d):
                for b_ in range(a_ + 1, d):
                    m = rep.gammas[a_] @ rep.gammas[b_]
                    nab2[:, i, j, :] += (0.5 * gam[i][a_][b_].value)[:, None] * (
                        phival[:, j] @ m.T
                    )
    curv = nab2 - nab2.transpose(0, 2, 1, 3)
    for i in range(d):
        for j in range(d):
            for k in range(d):
                curv[:, i, j, :] -= c[i][j][k].value[:, None] * phival[:, k]
    return curv


def ricci_identity_residual(psi, pts, i, engine=AD, chart=None):
    """Sup-norm gap in the Ricci identity for frame index i:

        -1/2 Ric(E_i) . psi  =  sum_j E_j . R(E_i, E_j) psi

    normalized by |psi|; the section must not vanish on the grid.
    """
    from .geometry import riemann

    chart = chart or psi.chart
    rep = psi.rep
    pts = np.atleast_2d(pts)
    nrm = psi.norms(pts)
    if np.min(nrm) < 1e-12:
        raise GeometryError("section vanishes on the grid; cannot normalize")
    curv = spinorial_curvature(psi, pts, engine, chart)
    rhs = np.zeros((pts.shape[0], 2), dtype=np.complex128)
    for j in range(chart.dim):
        rhs += apply_matrix(rep.gammas[j], curv[:, i, j])
    ric = riemann(chart).at(pts, engine).ricci
    pv = psi.values(pts)
    lhs = np.zeros_like(rhs)
    for k in range(chart.dim):
        lhs += -0.5 * ric[:, i, k, None] * apply_matrix(rep.gammas[k], pv)
    return float(np.max(np.linalg.norm(lhs - rhs, axis=-1) / nrm))


def killing_type_residual(psi, pts, coeff_matrix, engine=AD, chart=None):
    """sup_i |nabla_{E_i} psi - M_i psi| / |psi| for constant or pointwise
    spinor operators M_i given as (N, d, 2, 2) or (d, 2, 2)."""
    chart = chart or psi.chart
    pts = np.atleast_2d(pts)
    nab = covariant_derivative_values(psi, pts, engine, chart)
    pv = psi.values(pts)
    m = np.asarray(coeff_matrix, dtype=np.complex128)
    if m.ndim == 3:
        m = np.broadcast_to(m, (pts.shape[0],) + m.shape)
    target = np.einsum("nijk,nk->nij", m, pv)
    nrm = psi.norms(pts)
    if np.min(nrm) < 1e-12:
        raise GeometryError("section vanishes on the grid; cannot normalize")
    gap = np.linalg.norm(nab - target, axis=-1)
    return float(np.max(gap / nrm[:, None]))
