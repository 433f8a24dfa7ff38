"""Command-line front end: list/describe catalog entries, run check suites
on catalog entries or config files, and evaluate expressions with
derivatives.

Exit status: 0 when every executed check passes, 1 when any check fails,
2 for usage, config or parameter-constraint errors.
"""

import argparse
import sys
from dataclasses import dataclass, field

import numpy as np

from . import catalog as _catalog
from . import geometry as geo
from . import skewcheck as sc
from .config import ConfigError, load_config
from .exprlang import ExprError, eval_diff, parse
from .fields import AD, FD
from .geometry import GeometryError
from .report import CheckReport, failed_check, make_check
from .skewcheck import PreconditionError

SUITES = (
    "all",
    "skew",
    "gauss-codazzi",
    "integrability",
    "conformal",
    "curvature",
    "twistor",
    "diagnostics",
)


@dataclass
class RunConfig:
    target: str
    params: dict = field(default_factory=dict)
    suite: str = "all"
    grid: int | None = None
    tol: float | None = None
    fd_step: float = 1e-4
    engine: str = "ad"
    fmt: str = "text"
    out: str | None = None

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}; choose from {SUITES}")
        if self.grid is not None and self.grid < 3:
            raise ValueError("grid resolution must be at least 3")
        if self.tol is not None and self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.fd_step <= 0:
            raise ValueError("finite-difference step must be positive")


def _guard(checks, name, tol, fn):
    """Run one check block; evaluation faults become failed checks instead
    of aborting the remaining blocks."""
    try:
        got = fn()
    except (ExprError, GeometryError, PreconditionError) as e:
        checks.append(failed_check(name, "check aborted by evaluation fault", tol, str(e)))
        return
    if got is None:
        return
    checks.extend(got if isinstance(got, (list, tuple)) else [got])


def run_suites(built, suite="all", grid=None, engine=AD, fd_step=1e-4):
    """Execute the selected suites on a built entry; returns a CheckReport."""
    chart = built.chart
    dim = chart.dim
    n = grid or (11 if dim == 3 else 21)
    pts = chart.grid(n)
    checks = []
    want = lambda s: suite in ("all", s)

    if want("curvature"):
        def curvature_block():
            out = []
            if chart.frame is not None:
                geo.check_direct(chart, pts)
                out.append(
                    make_check(
                        "frame-direct",
                        "the declared frame order is direct (positive"
                        " determinant) at every sampled point",
                        0.0,
                        1e-12,
                    )
                )
            cd = geo.riemann(chart).at(pts, engine)
            r = cd.riemann
            asym = max(
                np.max(np.abs(r + r.transpose(0, 2, 1, 3, 4))),
                np.max(np.abs(r + r.transpose(0, 1, 2, 4, 3))),
            )
            out.append(
                make_check(
                    "curvature-antisymmetry",
                    "R_ijkl = -R_jikl = -R_ijlk on the grid",
                    asym,
                    1e-10,
                )
            )
            bianchi = np.max(
                np.abs(
                    r
                    + r.transpose(0, 2, 3, 1, 4)
                    + r.transpose(0, 3, 1, 2, 4)
                )
            )
            out.append(
                make_check(
                    "first-bianchi",
                    "cyclic sum of R over the first three slots vanishes",
                    bianchi,
                    1e-7,
                )
            )
            out.append(
                make_check(
                    "ricci-symmetry",
                    "the Ricci tensor is symmetric",
                    np.max(np.abs(cd.ricci - cd.ricci.transpose(0, 2, 1))),
                    1e-9,
                )
            )
            if chart.frame is not None:
                oracle = geo.curvature_fd_oracle(chart, pts[:: max(1, len(pts) // 200)], fd_step)
                sub = pts[:: max(1, len(pts) // 200)]
                cd_sub = geo.riemann(chart).at(sub, engine)
                out.append(
                    make_check(
                        "ricci-vs-fd-oracle",
                        "Ricci from the frame path matches the coordinate"
                        " finite-difference oracle",
                        np.max(np.abs(cd_sub.ricci - oracle.ricci)),
                        1e-4,
                    )
                )
            if chart.structure is not None:
                out.append(
                    make_check(
                        "jacobi-identity",
                        "structure constants satisfy the Jacobi identity",
                        geo.jacobi_residual(chart, pts, engine),
                        1e-8,
                    )
                )
            return out

        _guard(checks, "curvature-suite", 1e-7, curvature_block)
        if dim == 3 and built.skew is not None:
            _guard(
                checks,
                "schouten-symmetry",
                1e-5,
                lambda: make_check(
                    "schouten-symmetry",
                    "(nabla_X P)Y = (nabla_Y P)X for the Schouten tensor"
                    " (conformal flatness)",
                    geo.schouten_symmetry_residual(
                        chart, pts[:: max(1, len(pts) // 150)], engine, fd_step
                    ),
                    1e-5,
                ),
            )

    section_endos = built.section_endos
    if section_endos is None and built.endo is not None:
        section_endos = {name: built.endo for name in built.sections}
    if want("skew") and section_endos:
        for name, endo in section_endos.items():
            section = built.sections[name]

            def skew_block(s=section, e=endo, nm=name):
                out = [
                    sc.skew_killing_residual(s, e, pts, built.mode, engine),
                    sc.norm_constancy(s, pts, engine),
                ]
                if dim == 3 and built.skew is not None:
                    out.append(sc.dirac_identity_3d(s, built.skew, pts, engine))
                elif dim == 2:
                    out.append(sc.dirac_identity_2d(s, e, pts, engine))
                for c in out:
                    c.name = f"{c.name}[{nm}]"
                return out

            _guard(checks, f"skew[{name}]", 1e-7, skew_block)

    if want("gauss-codazzi") and dim == 2 and built.endo is not None:
        _guard(
            checks,
            "gauss-codazzi",
            1e-6,
            lambda: list(sc.gauss_codazzi_2d(built.endo, chart, pts, "spherical", engine)),
        )
        _guard(
            checks,
            "skew-part-constancy",
            1e-8,
            lambda: sc.skew_part_analysis(built.endo, chart, pts, engine)[2],
        )

    if want("twistor") and dim == 2:
        for name, section in built.sections.items():

            def twistor_block(s=section, nm=name):
                try:
                    out = sc.twistor_decompose(s, pts, engine)[2]
                except PreconditionError:
                    return []  # not unit-norm twistor data: nothing to check
                for c in out:
                    c.name = f"{c.name}[{nm}]"
                return out

            _guard(checks, f"twistor[{name}]", 1e-6, twistor_block)

    if want("integrability") and dim == 3 and built.skew is not None:
        _guard(checks, "integrability", 1e-6, lambda: sc.integrability_3d(built.skew, pts, engine))
        _guard(checks, "ricci-system", 1e-6, lambda: sc.ricci_system_3d(built.skew, pts, engine))

    if want("diagnostics") and dim == 3 and built.skew is not None:
        psi = next(iter(built.sections.values()), None)
        _guard(
            checks,
            "tau-zeta",
            1e-7,
            lambda: sc.tau_zeta_diagnostics(built.skew, pts, engine, psi=psi),
        )
        _guard(
            checks,
            "sign-covariance",
            1e-10,
            lambda: make_check(
                "sign-covariance",
                "flipping (xi, e'_1, e'_2, b) to (-xi, e'_2, e'_1, -b) leaves"
                " every adapted residual unchanged",
                sc.sign_covariance_residual(built.skew, pts, engine),
                1e-10,
            ),
        )

    if (
        want("conformal")
        and dim == 3
        and built.skew is not None
        and built.sections
        and chart.frame is not None
    ):
        psi = next(iter(built.sections.values()))
        def conformal_block():
            _, _, _, cks = sc.conformal_to_parallel(psi, built.skew, pts, engine)
            return cks
        _guard(checks, "conformal-to-parallel", 1e-6, conformal_block)

    # a config-supplied conformal exponent drives the parallel-to-skew flow
    u_field = built.aux.get("u")
    if want("conformal") and dim == 3 and u_field is not None and built.sections:
        seed = next(iter(built.sections.values()))
        def parallel_block():
            _, sk, _, _, cks = sc.parallel_to_skew(seed, u_field, chart, pts, engine)
            return cks
        _guard(checks, "parallel-to-skew", 1e-7, parallel_block)

    for hook_suite, hook in built.extra_checks:
        if want(hook_suite):
            _guard(checks, f"{hook_suite}-extra", 1e-6, lambda h=hook: h(built, pts, engine))

    # deduplicate by name, keeping first occurrence (tau-closed can repeat)
    seen = {}
    for c in checks:
        if c.name not in seen:
            seen[c.name] = c
            c.extras.setdefault("grid_points", pts.shape[0])
    return CheckReport(built.name, dict(built.params), list(seen.values()))


def resolve_target(target, params=None):
    """Catalog entry name or config file path -> built entry."""
    from pathlib import Path

    if target in _catalog.CATALOG:
        return _catalog.build(target, params)
    if Path(target).exists():
        return load_config(target, param_overrides=params)
    raise KeyError(
        f"unknown target {target!r}: not a catalog entry"
        f" ({', '.join(_catalog.list_entries())}) and not a config file"
    )


def run(config: RunConfig):
    """Execute a run configuration; returns (exit_status, report|None)."""
    try:
        built = resolve_target(config.target, config.params)
    except (KeyError, _catalog.ConstraintViolation, ConfigError, ExprError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2, None
    engine = AD if config.engine == "ad" else FD(config.fd_step)
    report = run_suites(built, config.suite, config.grid, engine, config.fd_step)
    if config.tol is not None:
        for c in report.checks:
            c.tolerance = config.tol
            c.passed = c.residual <= config.tol
    text = report.to_json() if config.fmt == "json" else report.to_text()
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return (0 if report.passed else 1), report


def _parse_params(items):
    params = {}
    for item in items or ():
        if "=" not in item:
            raise ValueError(f"--param expects k=v, got {item!r}")
        k, v = item.split("=", 1)
        try:
            params[k.strip()] = float(v)
        except ValueError:
            params[k.strip()] = v.strip()
    return params


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="skewspin",
        description="numerical checks for skew Killing spinor geometry in"
        " dimensions 2 and 3",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    sub.add_parser("list", help="list catalog entries")

    p_desc = sub.add_parser("describe", help="describe a catalog entry")
    p_desc.add_argument("entry")

    p_check = sub.add_parser("check", help="run check suites on a target")
    p_check.add_argument("target", help="catalog entry name or config file path")
    p_check.add_argument("--suite", default="all", choices=SUITES)
    p_check.add_argument("--grid", type=int, default=None, help="points per axis")
    p_check.add_argument("--tol", type=float, default=None, help="override all tolerances")
    p_check.add_argument("--fd-step", type=float, default=1e-4)
    p_check.add_argument("--engine", default="ad", choices=("ad", "fd"))
    p_check.add_argument("--format", dest="fmt", default="text", choices=("text", "json"))
    p_check.add_argument("--out", default=None, help="write the report to a file")
    p_check.add_argument(
        "--param", action="append", default=[], metavar="K=V", help="parameter override"
    )

    p_eval = sub.add_parser("eval", help="evaluate an expression with derivatives")
    p_eval.add_argument("expr")
    p_eval.add_argument(
        "--at", required=True, help="comma-separated coordinate bindings, e.g. x=1,y=2"
    )
    p_eval.add_argument(
        "--param", action="append", default=[], metavar="K=V", help="constant binding"
    )

    args = parser.parse_args(argv)

    if args.cmd == "list":
        for name in _catalog.list_entries():
            entry = _catalog.get_entry(name)
            print(f"{name:26s} {entry.description}")
            for pname, spec in entry.params.items():
                print(f"    {pname} = {spec.default!r}  ({spec.kind}) {spec.doc}")
        return 0

    if args.cmd == "describe":
        try:
            entry = _catalog.get_entry(args.entry)
            built = entry.build()
        except (KeyError, _catalog.ConstraintViolation) as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        print(f"{entry.name}: {entry.description}")
        print(f"  dimension: {built.chart.dim}, coordinates: {', '.join(built.chart.coords)}")
        print(f"  {built.notes}")
        if entry.params:
            print("  parameters:")
            for pname, spec in entry.params.items():
                print(f"    {pname} = {spec.default!r} ({spec.kind}) {spec.doc}")
        print("  sections:", ", ".join(built.sections) or "none")
        print("  expected to pass:", ", ".join(built.expected_pass) or "n/a")
        return 0

    if args.cmd == "eval":
        try:
            node = parse(args.expr)
            point = {}
            for item in args.at.split(","):
                k, v = item.split("=", 1)
                point[k.strip()] = float(v)
            params = _parse_params(args.param)
            ds = eval_diff(node, point, params)
        except (ExprError, ValueError) as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        names = list(point)
        print(f"value: {ds.value!r}")
        print("gradient:", {n: float(ds.grad[i]) for i, n in enumerate(names)})
        print("hessian:")
        for i, n in enumerate(names):
            row = "  ".join(f"{ds.hess[i, j]: .12g}" for j in range(len(names)))
            print(f"  d{n}: {row}")
        return 0

    # check
    try:
        cfg = RunConfig(
            target=args.target,
            params=_parse_params(args.param),
            suite=args.suite,
            grid=args.grid,
            tol=args.tol,
            fd_step=args.fd_step,
            engine=args.engine,
            fmt=args.fmt,
            out=args.out,
        )
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    status, _ = run(cfg)
    return status


if __name__ == "__main__":
    sys.exit(main())
