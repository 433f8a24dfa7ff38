"""Numerical verification of skew Killing spinor geometry on 2- and
3-dimensional Riemannian spin manifolds: Clifford representations, frame
geometry and curvature, the spin connection, the residual checkers for the
integrability system and the conformal correspondence with parallel
sections, plus a catalog of example manifolds and a CLI.
"""

from .backend import backend_name
from .catalog import BuiltEntry, CatalogEntry, ConstraintViolation, build, get_entry, list_entries
from .clifford import CliffordRep, clifford_mul, clifford_rep, conjugate, herm
from .config import ConfigError, load_config, parse_config
from .exprlang import EvalFault, ParseError, eval_diff, free_symbols, parse, pretty
from .fields import AD, FD, ComplexField, ExprField, Field
from .geometry import (
    CurvatureData,
    FrameChart,
    GeometryError,
    chart_from_frame_exprs,
    christoffel,
    curvature_fd_oracle,
    d_oneform,
    flat_chart,
    hodge_star3,
    riemann,
    schouten_symmetry_residual,
)
from .jets import DiffScalar, Jet
from .report import Check, CheckReport
from .skewcheck import (
    EndoField,
    PreconditionError,
    SkewData,
    conformal_to_parallel,
    gauss_codazzi_2d,
    imaginary_pair_check,
    imaginary_twistor_decompose,
    incompleteness_demo,
    integrability_3d,
    parallel_to_skew,
    ricci_system_3d,
    skew_data_from_endo,
    skew_killing_residual,
    skew_part_analysis,
    tau_zeta_diagnostics,
    twistor_decompose,
)
from .spinfield import (
    SpinorSection,
    covariant_derivative_values,
    dirac,
    ricci_identity_residual,
    spin_covariant_derivative,
    spinorial_curvature,
)

__version__ = "0.1.0"
