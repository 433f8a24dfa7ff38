"""Built-in parameterized manifold + spinor + endomorphism bundles.

Every entry packages a chart, optional sections, the skew endomorphism data
and the list of checks it is expected to pass at default parameters; the
test suite re-validates those lists, so the catalog is self-checking.
Parameter values are numbers or expression strings (for the free functions
of the warped families).
"""

from dataclasses import dataclass, field

import numpy as np

from .fields import ConstField, DerivField, ExprField
from .geometry import FrameChart, chart_from_frame_exprs, flat_chart
from .skewcheck import EndoField, SkewData, incompleteness_demo
from .spinfield import SpinorSection


class ConstraintViolation(ValueError):
    """A parameter set violates one of the entry's constraint relations."""

    def __init__(self, relation, detail=""):
        self.relation = relation
        msg = f"parameter constraint violated: {relation}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


@dataclass(frozen=True)
class ParamSpec:
    default: object
    kind: str = "number"  # "number" | "expr"
    doc: str = ""


@dataclass
class BuiltEntry:
    name: str
    chart: FrameChart
    params: dict
    sections: dict = field(default_factory=dict)
    endo: EndoField | None = None
    skew: SkewData | None = None
    mode: str = "real"
    expected_pass: tuple = ()
    notes: str = ""
    extra_checks: tuple = ()  # (suite, callable(built, pts, engine) -> [Check])
    section_endos: dict | None = None  # section name -> EndoField, when not endo
    aux: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    description: str
    params: dict
    builder: object

    def build(self, overrides=None) -> BuiltEntry:
        values = {k: spec.default for k, spec in self.params.items()}
        for k, v in (overrides or {}).items():
            if k not in self.params:
                raise ConstraintViolation(
                    f"unknown parameter {k!r}",
                    f"known: {', '.join(sorted(self.params))}",
                )
            values[k] = v
        for k, spec in self.params.items():
            if spec.kind == "number":
                values[k] = float(values[k])
            else:
                values[k] = str(values[k])
        return self.builder(values)


def _expr_is_zero(src):
    try:
        return float(src) == 0.0
    except (TypeError, ValueError):
        return False


# -- entries --------------------------------------------------------------------



def _require_positive(field_src, coords, bounds, relation, n=9):
    """Reject parameter sets whose scale function crosses zero on the chart."""
    from .geometry import FrameChart

    probe = FrameChart(
        len(coords), tuple(coords), tuple(bounds),
        frame=tuple(
            tuple(ExprField("1" if i == j else "0", coords) for j in range(len(coords)))
            for i in range(len(coords))
        ),
    ).grid(n)
    vals = ExprField(field_src, coords).values(probe)
    if np.min(vals) <= 0:
        raise ConstraintViolation(relation, f"minimum {np.min(vals):.3e} on the chart")


def _build_flat_r3(p):
    chart = flat_chart(3, name="flat-r3")
    psi = SpinorSection.constant(chart, p["psi_re1"] + 1j * p["psi_im1"], p["psi_re2"])
    sk = SkewData(chart, 2, 1.0, (0, 1), 0.0)
    return BuiltEntry(
        "flat-r3",
        chart,
        p,
        sections={"constant": psi},
        endo=EndoField.zero(3),
        skew=sk,
        expected_pass=(
            "skew-killing-residual",
            "dirac-identity",
            "integrability-h-symmetry",
            "integrability-db1",
            "integrability-db2",
            "normal-bundle-integrability",
            "ricci-system-e1",
            "ricci-system-e2",
            "ricci-system-xi",
            "scal-formula",
            "tau-closed",
            "zeta-covariant-derivative",
            "zeta-norm-constancy",
            "zeta-pfaff",
            "schouten-symmetry",
        ),
        notes="Euclidean 3-space, constant parallel section, A = 0",
    )


def _build_hyperbolic_group(p):
    coords = ("x", "y", "z")
    structure = {(0, 2, 0): ConstField(1.0), (1, 2, 1): ConstField(1.0)}
    rows = (("exp(z)", "0", "0"), ("0", "-exp(z)", "0"), ("0", "0", "-1"))
    frame = tuple(tuple(ExprField(s, coords) for s in r) for r in rows)
    chart = FrameChart(
        3,
        coords,
        ((-1.0, 1.0),) * 3,
        frame=frame,
        structure=structure,
        name="hyperbolic-group",
    )
    psi = SpinorSection.constant(chart, 1.0, 0.0)
    sk = SkewData(chart, 2, 1.0, (0, 1), p["b"])
    return BuiltEntry(
        "hyperbolic-group",
        chart,
        p,
        sections={"constant": psi},
        endo=sk.endo(),
        skew=sk,
        expected_pass=(
            "skew-killing-residual",
            "dirac-identity",
            "integrability-h-symmetry",
            "integrability-db1",
            "integrability-db2",
            "normal-bundle-integrability",
            "ricci-system-e1",
            "ricci-system-e2",
            "ricci-system-xi",
            "scal-formula",
            "tau-closed",
            "zeta-covariant-derivative",
            "zeta-norm-constancy",
            "zeta-pfaff",
            "schouten-symmetry",
            "conformal-parallel-residual",
        ),
        notes=(
            "solvable group presentation of hyperbolic 3-space: brackets"
            " [e1,e2]=0, [e1,e3]=e1, [e2,e3]=e2; constant section, b = 1/2"
        ),
    )


def _build_warped_plane_line(p):
    coords = ("x", "y", "z")
    params = {}
    theta = p["theta"]
    fsrc = f"(({p['c']}) * x + ({p['d']}) * y + ({p['e']}))"
    rows = (
        ("0", "0", f"1/{fsrc}"),
        (f"1/({theta})", "0", "0"),
        ("0", f"1/({theta})", "0"),
    )
    _require_positive(theta, coords, ((-1.0, 1.0),) * 3, "theta > 0 on the chart")
    _require_positive(fsrc, coords, ((-1.0, 1.0),) * 3, "f > 0 on the chart")
    chart = chart_from_frame_exprs(
        3, coords, ((-1.0, 1.0),) * 3, rows, params, name="warped-plane-line"
    )
    theta_f = ExprField(theta, coords, params)
    f_f = ExprField(fsrc, coords, params)
    b = DerivField(theta_f, 2) / (theta_f * f_f * 2.0)
    sk = SkewData(chart, 0, 1.0, (1, 2), b)
    sections = {}
    expected = [
        "integrability-h-symmetry",
        "integrability-db1",
        "integrability-db2",
        "normal-bundle-integrability",
        "ricci-system-e1",
        "ricci-system-e2",
        "ricci-system-xi",
        "scal-formula",
        "tau-closed",
        "schouten-symmetry",
    ]
    if _expr_is_zero(p["c"]) and _expr_is_zero(p["d"]):
        # f = e(z): kappa vanishes and a constant section solves the system
        sections["constant"] = SpinorSection.constant(chart, 1.0, 0.0)
        expected = [
            "skew-killing-residual",
            "dirac-identity",
            *expected,
            "zeta-covariant-derivative",
            "zeta-norm-constancy",
            "zeta-pfaff",
            "conformal-parallel-residual",
        ]
    return BuiltEntry(
        "warped-plane-line",
        chart,
        p,
        sections=sections,
        endo=sk.endo(),
        skew=sk,
        expected_pass=tuple(expected),
        notes=(
            "plane times line with metric theta(z)^2 (dx^2+dy^2) + f^2 dz^2,"
            " f = c(z) x + d(z) y + e(z), b = theta'/(2 theta f)"
        ),
    )


def _build_example1_frame2_periodic(p):
    coords = ("x", "y", "z")
    b = p["b"]
    if b == 0.0:
        raise ConstraintViolation("b != 0", "b scales the oscillation of f")
    fsrc = (
        f"(({p['c']}) / (2*{b})) * exp(2*{b}*x)"
        f" + ({p['d']}) * cos(2*{b}*y) + ({p['e']}) * sin(2*{b}*y)"
    )
    # the kernel direction lies in the flat (x, y) plane: dx^2+dy^2+f^2 dz^2
    _require_positive(fsrc, coords, ((-1.0, 1.0),) * 3, "f > 0 on the chart")
    rows = (("1", "0", "0"), ("0", "1", "0"), ("0", "0", f"1/({fsrc})"))
    chart = chart_from_frame_exprs(
        3,
        coords,
        ((-1.0, 1.0),) * 3,
        rows,
        name="example1-frame2-periodic",
    )
    sk = SkewData(chart, 0, 1.0, (1, 2), b)
    descends = _expr_is_zero(p["c"])
    return BuiltEntry(
        "example1-frame2-periodic",
        chart,
        p,
        endo=sk.endo(),
        skew=sk,
        expected_pass=(
            "integrability-h-symmetry",
            "integrability-db1",
            "integrability-db2",
            "normal-bundle-integrability",
            "ricci-system-e1",
            "ricci-system-e2",
            "ricci-system-xi",
            "scal-formula",
            "tau-closed",
            "schouten-symmetry",
        ),
        notes=(
            "metric dx^2 + dy^2 + f^2 dz^2 with the kernel direction along"
            " x, constant b, and"
            " f = (c/2b) e^{2bx} + d(z) cos(2by) + e(z) sin(2by); "
            + (
                "c = 0: f descends to the product of a 2-torus with a line"
                " (and to the 3-torus when d, e are periodic)"
                if descends
                else "c != 0: f does not descend to the torus quotients"
            )
        ),
        aux={"torus_descent": descends},
    )


def _build_example1_frame2_exp(p):
    c, d, hh, aa, bb = p["c"], p["d"], p["H"], p["A"], p["B"]
    if hh <= 0:
        raise ConstraintViolation("H > 0")
    if c == 0:
        raise ConstraintViolation("c != 0")
    if abs(4 * aa * bb * hh - c * c) > 1e-12:
        raise ConstraintViolation(
            "4*A*B*H = c^2", f"got 4*{aa}*{bb}*{hh} = {4*aa*bb*hh} vs c^2 = {c*c}"
        )
    coords = ("x", "y", "z")
    theta = f"({c}*z + {d})"
    froot = np.sqrt(hh)
    fsrc = f"({aa}*exp({froot}*x) + {bb}*exp(-({froot})*x))"
    # metric theta(z)^2 (dx^2+dy^2) + f(x)^2 dz^2, kernel direction along x
    rows = (
        (f"1/({theta})", "0", "0"),
        ("0", f"1/({theta})", "0"),
        ("0", "0", f"1/({fsrc})"),
    )
    # theta = cz + d must stay positive on the chart
    bounds = ((-1.0, 1.0), (-1.0, 1.0), (0.0, 1.0))
    zlo = bounds[2][0]
    if c * zlo + d <= 0 or c * bounds[2][1] + d <= 0:
        raise ConstraintViolation("c*z + d > 0 on the chart bounds")
    _require_positive(fsrc, coords, bounds, "f > 0 on the chart")
    chart = chart_from_frame_exprs(
        3, coords, bounds, rows, name="example1-frame2-exp"
    )
    theta_f = ExprField(theta, coords)
    f_f = ExprField(fsrc, coords)
    b = DerivField(f_f, 0) / (theta_f * f_f * 2.0)
    sk = SkewData(chart, 0, 1.0, (1, 2), b)
    return BuiltEntry(
        "example1-frame2-exp",
        chart,
        p,
        endo=sk.endo(),
        skew=sk,
        expected_pass=(
            "integrability-h-symmetry",
            "integrability-db1",
            "integrability-db2",
            "normal-bundle-integrability",
            "ricci-system-e1",
            "ricci-system-e2",
            "ricci-system-xi",
            "scal-formula",
            "tau-closed",
            "schouten-symmetry",
        ),
        notes=(
            "metric (cz+d)^2 (dx^2+dy^2) + f^2 dz^2 with"
            " f = A e^{sqrt(H)x} + B e^{-sqrt(H)x}, constraint 4ABH = c^2,"
            " kernel direction along x, b = f_x/(2 theta f)"
        ),
    )


def _wls_incompleteness(built, pts, engine):
    bexpr = ExprField(built.params["b"], ("t",))
    lengths, check = incompleteness_demo(
        lambda t: bexpr.values(np.atleast_2d(t).reshape(-1, 1))
    )
    return [check]


def _build_warped_line_sphere(p):
    coords = ("t", "x", "y")
    fsrc, bsrc = p["f"], p["b"]
    # constraint (f' - 2 b f)^2 = 1 along the t-axis
    f1 = ExprField(fsrc, ("t",))
    b1 = ExprField(bsrc, ("t",))
    tgrid = np.linspace(-1.0, 1.0, 41).reshape(-1, 1)
    fj = f1.jet(tgrid, 1)
    rel = (fj.grad[:, 0] - 2.0 * b1.values(tgrid) * fj.value) ** 2 - 1.0
    if np.max(np.abs(rel)) > 1e-12:
        raise ConstraintViolation(
            "(df/dt - 2*b*f)^2 = 1", f"max deviation {np.max(np.abs(rel)):.3e}"
        )
    gsrc = "((1 + x^2 + y^2)/2)"
    rows = (
        ("1", "0", "0"),
        ("0", f"{gsrc}/({fsrc})", "0"),
        ("0", "0", f"{gsrc}/({fsrc})"),
    )
    chart = chart_from_frame_exprs(
        3, coords, ((-1.0, 1.0),) * 3, rows, name="warped-line-sphere"
    )
    b = ExprField(bsrc, coords)
    sk = SkewData(chart, 0, 1.0, (1, 2), b)
    sections = {}
    expected = [
        "integrability-h-symmetry",
        "integrability-db1",
        "integrability-db2",
        "normal-bundle-integrability",
        "ricci-system-e1",
        "ricci-system-e2",
        "ricci-system-xi",
        "scal-formula",
        "tau-closed",
        "schouten-symmetry",
        "incompleteness-cauchy",
    ]
    fv = f1.values(tgrid)
    bv = b1.values(tgrid)
    if np.min(fv) <= 0:
        raise ConstraintViolation("f > 0 on the chart", f"minimum {np.min(fv):.3e}")
    special = np.max(np.abs(fv - 1.0)) < 1e-15 and np.max(np.abs(bv - 0.5)) < 1e-15
    if special:
        h2 = "(1/sqrt(2*(1 + x^2 + y^2)))"
        sections["skew-killing"] = SpinorSection.from_exprs(
            chart,
            f"(1 + y)*{h2}",
            f"-x*{h2}",
            f"(1 - y)*{h2}",
            f"x*{h2}",
        )
        expected = [
            "skew-killing-residual",
            "dirac-identity",
            *expected,
            "zeta-covariant-derivative",
            "zeta-norm-constancy",
            "zeta-pfaff",
            "conformal-parallel-residual",
        ]
    return BuiltEntry(
        "warped-line-sphere",
        chart,
        p,
        sections=sections,
        endo=sk.endo(),
        skew=sk,
        expected_pass=tuple(expected),
        extra_checks=(("conformal", _wls_incompleteness),) if special else (),
        notes=(
            "line times round sphere, dt^2 + f(t)^2 g_round in a"
            " stereographic sphere chart; constraint (f' - 2bf)^2 = 1;"
            " f = 1, b = 1/2 carries the explicit section and rescales to a"
            " parallel one under e^{-2t}"
        ),
    )


def _sphere_killing_exprs(sign):
    h = "(1/sqrt(1 + x^2 + y^2))"
    if sign > 0:
        # h (1 + P) (i, 0): components (i h, h(-x - i y))
        return ("0", h, f"-x*{h}", f"-y*{h}")
    # h (1 - P) (1, 0): components (h, h(y - i x))
    return (h, "0", f"y*{h}", f"-x*{h}")


def sphere_ab_section(chart, a, b, lam):
    """Unit section solving nabla_X psi = a X.psi + b J(X).psi on the round
    sphere of curvature 4 lam^2 = 4(a^2 + b^2), built from the Killing
    section via the volume element."""
    if abs(a * a + b * b - lam * lam) > 1e-12:
        raise ConstraintViolation("a^2 + b^2 = lam^2")
    phi = SpinorSection.from_exprs(chart, *_sphere_killing_exprs(+1))
    if b == 0.0 and a == lam:
        return phi
    from .clifford import omega

    m = b * np.eye(2) + (lam - a) * omega(phi.rep)
    scale = 1.0 / np.sqrt(b * b + (lam - a) ** 2)
    return phi.apply_matrix(scale * m)


def _rs2_dirac_product(built, pts, engine):
    """Re<D psi, psi> is constant for the twistor sum: the summands have
    D = -2 lam and +2 lam, so the product is 2 lam (|theta|^2 - |phi|^2),
    i.e. |theta|^2 - |phi|^2 itself at lam = 1/2."""
    from .report import make_check
    from .spinfield import dirac
    from .clifford import herm

    lam = built.aux["lam"]
    psi = built.sections["twistor-sum"]
    expected = 2 * lam * (built.aux["ctheta"] ** 2 - built.aux["cphi"] ** 2)
    val = np.real(herm(dirac(psi, pts, engine), psi.values(pts)))
    return [
        make_check(
            "dirac-product-constancy",
            "Re<D psi, psi> is the constant 2 lam (|theta|^2 - |phi|^2) for"
            " the sum of the two opposite-constant sections",
            np.max(np.abs(val - expected)),
            1e-7,
            extras={"expected": expected},
        )
    ]


def _build_round_s2(p):
    lam, cphi, ctheta = p["lam"], p["cphi"], p["ctheta"]
    if lam <= 0:
        raise ConstraintViolation("lam > 0")
    if abs(cphi**2 + ctheta**2 - 1.0) > 1e-12:
        raise ConstraintViolation("cphi^2 + ctheta^2 = 1")
    coords = ("x", "y")
    finv = f"({lam} * (1 + x^2 + y^2))"
    chart = chart_from_frame_exprs(
        2, coords, ((-1.0, 1.0),) * 2, ((finv, "0"), ("0", finv)), name="round-s2"
    )
    killing = SpinorSection.from_exprs(chart, *_sphere_killing_exprs(+1))
    anti = SpinorSection.from_exprs(chart, *_sphere_killing_exprs(-1))
    psi_sum = killing.apply_matrix(cphi * np.eye(2)) + anti.apply_matrix(
        ctheta * np.eye(2)
    )
    endo = EndoField.from_ab_2d(lam, 0.0)
    section_endos = {
        "killing": endo,
        "anti-killing": EndoField.from_ab_2d(-lam, 0.0),
    }
    return BuiltEntry(
        "round-s2",
        chart,
        p,
        sections={
            "killing": killing,
            "anti-killing": anti,
            "twistor-sum": psi_sum,
        },
        endo=endo,
        skew=None,
        expected_pass=(
            "skew-killing-residual",
            "dirac-identity",
            "norm-constancy",
            "gauss-residual",
            "codazzi-residual",
            "skew-part-constancy",
            "twistor-residual",
            "twistor-decompose-reconstruction",
            "twistor-vanishing-components",
            "twistor-antisymmetry",
            "dirac-product-constancy",
        ),
        extra_checks=(("twistor", _rs2_dirac_product),),
        section_endos=section_endos,
        aux={"cphi": cphi, "ctheta": ctheta, "lam": lam},
        notes=(
            "round sphere of curvature 4 lam^2 in the stereographic chart;"
            " unit Killing section (A = lam Id), its opposite-constant"
            " partner, and their twistor sum"
        ),
    )


def _cf3_checks(built, pts, engine):
    from .skewcheck import conformal_to_parallel, parallel_to_skew

    chart = built.chart
    psi0 = built.sections["parallel-seed"]
    endo, sk, barred, psibar, checks = parallel_to_skew(
        psi0, ExprField(built.params["u"], chart.coords), chart, pts, engine
    )
    if sk is None:
        # kernel line off the frame axes: the construction is verified, the
        # round trip needs the adapted data and is skipped
        return checks
    _, _, _, round_checks = conformal_to_parallel(psibar, sk, pts, engine)
    rc = round_checks[-1]
    rc.name = "conformal-roundtrip"
    rc.citation = (
        "undoing the conformal factor recovers a parallel section"
        " (round trip through both constructions)"
    )
    return [*checks, rc]


def _build_conformal_flat_3d(p):
    chart = flat_chart(3, name="conformal-flat-3d")
    psi0 = SpinorSection.constant(chart, 1.0, 0.0)
    return BuiltEntry(
        "conformal-flat-3d",
        chart,
        p,
        sections={"parallel-seed": psi0},
        endo=None,
        skew=None,
        expected_pass=(
            "parallel-to-skew-residual",
            "hodge-formula-match",
            "conformal-roundtrip",
        ),
        extra_checks=(("conformal", _cf3_checks),),
        notes=(
            "flat chart rescaled by e^{2u}: the parallel seed becomes a skew"
            " Killing section with A(X) = -1/2 star(du wedge X)"
        ),
    )


CATALOG = {
    e.name: e
    for e in (
        CatalogEntry(
            "flat-r3",
            "Euclidean 3-space with a constant section and A = 0",
            {
                "psi_re1": ParamSpec(1.0, "number", "first component, real part"),
                "psi_im1": ParamSpec(0.0, "number", "first component, imag part"),
                "psi_re2": ParamSpec(0.0, "number", "second component, real part"),
            },
            _build_flat_r3,
        ),
        CatalogEntry(
            "hyperbolic-group",
            "hyperbolic 3-space as a solvable group with left-invariant frame",
            {"b": ParamSpec(0.5, "number", "rotation speed of A on the kernel complement")},
            _build_hyperbolic_group,
        ),
        CatalogEntry(
            "warped-plane-line",
            "theta(z)^2 (dx^2+dy^2) + f^2 dz^2 with f affine in (x, y)",
            {
                "theta": ParamSpec("exp(z)", "expr", "conformal factor of the plane"),
                "c": ParamSpec("0", "expr", "x-slope of f (function of z)"),
                "d": ParamSpec("0", "expr", "y-slope of f (function of z)"),
                "e": ParamSpec("1", "expr", "offset of f (function of z)"),
            },
            _build_warped_plane_line,
        ),
        CatalogEntry(
            "example1-frame2-periodic",
            "dx^2 + dy^2 + f^2 dz^2 with constant b and oscillatory f",
            {
                "b": ParamSpec(0.5, "number", "constant rotation speed"),
                "c": ParamSpec("0", "expr", "coefficient of the e^{2bx} term"),
                "d": ParamSpec("1", "expr", "cos(2by) coefficient (function of z)"),
                "e": ParamSpec("0", "expr", "sin(2by) coefficient (function of z)"),
            },
            _build_example1_frame2_periodic,
        ),
        CatalogEntry(
            "example1-frame2-exp",
            "(cz+d)^2 (dx^2+dy^2) + f^2 dz^2, f = A e^{sqrt(H)x} + B e^{-sqrt(H)x}",
            {
                "c": ParamSpec(2.0, "number", "slope of theta = cz + d"),
                "d": ParamSpec(1.0, "number", "offset of theta"),
                "H": ParamSpec(1.0, "number", "squared exponential rate of f"),
                "A": ParamSpec(1.0, "number", "growing coefficient of f"),
                "B": ParamSpec(1.0, "number", "decaying coefficient of f"),
            },
            _build_example1_frame2_exp,
        ),
        CatalogEntry(
            "warped-line-sphere",
            "dt^2 + f(t)^2 g_round over a stereographic sphere chart",
            {
                "f": ParamSpec("1", "expr", "warping function of t"),
                "b": ParamSpec("1/2", "expr", "rotation speed (function of t)"),
            },
            _build_warped_line_sphere,
        ),
        CatalogEntry(
            "round-s2",
            "round 2-sphere of curvature 4 lam^2, stereographic chart",
            {
                "lam": ParamSpec(0.5, "number", "Killing constant; curvature is 4 lam^2"),
                "cphi": ParamSpec(0.6, "number", "weight of the +lam section in the sum"),
                "ctheta": ParamSpec(0.8, "number", "weight of the -lam section in the sum"),
            },
            _build_round_s2,
        ),
        CatalogEntry(
            "conformal-flat-3d",
            "flat chart rescaled by e^{2u}; skew data from the gradient of u",
            {"u": ParamSpec("0.3*x", "expr", "conformal exponent")},
            _build_conformal_flat_3d,
        ),
    )
}


def list_entries():
    return sorted(CATALOG)


def get_entry(name) -> CatalogEntry:
    if name not in CATALOG:
        raise KeyError(
            f"unknown catalog entry {name!r}; available: {', '.join(list_entries())}"
        )
    return CATALOG[name]


def build(name, params=None) -> BuiltEntry:
    """Build a catalog entry with parameter overrides."""
    return get_entry(name).build(params)
