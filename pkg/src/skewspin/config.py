"""Declarative manifold config files.

Line-oriented ``key = value`` with optional ``[section]`` headers that
prefix the keys that follow.  Keys:

    dimension = 2 | 3
    coordinates = x, y, z
    bounds.<coord> = lo, hi
    frame.<i> = expr, expr[, expr]          (coordinate components of E_i)
    structure.<i><j>.<k> = expr             (c_ij^k, i < j)
    spinor.re1 / im1 / re2 / im2 = expr
    A.<i><j> = expr
    u = expr
    param.<name> = number

Expressions use the library's expression syntax verbatim and may reference
declared coordinates and parameters.  Diagnostics carry line and column.
"""

import re
from pathlib import Path

from .catalog import BuiltEntry
from .exprlang import ExprError
from .fields import ExprField
from .geometry import FrameChart, GeometryError
from .skewcheck import EndoField, skew_data_from_endo
from .spinfield import SpinorSection


class ConfigError(ValueError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        where = "" if line is None else f" (line {line}" + (
            f", column {col})" if col is not None else ")"
        )
        super().__init__(message + where)


_KEY_RE = re.compile(r"^[A-Za-z_][\w.]*$")


def _parse_lines(text):
    entries = {}
    prefix = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            prefix = stripped[1:-1].strip()
            prefix = prefix + "." if prefix else ""
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", lineno, len(line))
        key, value = line.split("=", 1)
        col = line.index("=") + 2
        key = prefix + key.strip()
        if not _KEY_RE.match(key):
            raise ConfigError(f"bad key {key!r}", lineno)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        entries[key] = (value.strip(), lineno, col)
    return entries


def parse_config(text, name="config", param_overrides=None):
    """Parse config text into a built entry; raises ConfigError."""
    entries = _parse_lines(text)

    def take(key, default=None):
        if key in entries:
            return entries.pop(key)
        return (default, None, None)

    dim_raw, dim_line, _ = take("dimension")
    if dim_raw is None:
        raise ConfigError("missing required key 'dimension'")
    try:
        dim = int(dim_raw)
    except ValueError:
        raise ConfigError(f"dimension must be an integer, got {dim_raw!r}", dim_line)
    if dim not in (2, 3):
        raise ConfigError(f"dimension must be 2 or 3, got {dim}", dim_line)

    coords_raw, cl, _ = take("coordinates", ", ".join(("x", "y", "z")[:dim]))
    coords = tuple(c.strip() for c in coords_raw.split(","))
    if len(coords) != dim or not all(coords):
        raise ConfigError(f"expected {dim} coordinate names, got {coords_raw!r}", cl)

    params = {}
    for key in [k for k in entries if k.startswith("param.")]:
        val, ln, col = entries.pop(key)
        pname = key[len("param."):]
        try:
            params[pname] = float(val)
        except ValueError:
            raise ConfigError(f"parameter {pname!r} must be a number", ln, col)
    for k, v in (param_overrides or {}).items():
        params[k] = float(v)

    bounds = []
    for c in coords:
        val, ln, col = take(f"bounds.{c}", "-1, 1")
        parts = val.split(",")
        try:
            lo, hi = (float(x) for x in parts)
        except ValueError:
            raise ConfigError(f"bounds.{c} needs 'lo, hi'", ln, col)
        if not lo < hi:
            raise ConfigError(f"bounds.{c}: need lo < hi", ln)
        bounds.append((lo, hi))

    def mk_expr(src, ln, col):
        try:
            return ExprField(src, coords, params)
        except ExprError as e:
            raise ConfigError(str(e), ln, col) from None

    frame_rows = {}
    structure = {}
    spinor = {}
    endo_entries = {}
    u_field = None
    for key in list(entries):
        val, ln, col = entries.pop(key)
        if m := re.fullmatch(r"frame\.(\d)", key):
            i = int(m.group(1))
            if not 1 <= i <= dim:
                raise ConfigError(f"frame index {i} out of range 1..{dim}", ln)
            comps = val.split(",")
            if len(comps) != dim:
                raise ConfigError(
                    f"frame.{i} needs {dim} comma-separated expressions", ln, col
                )
            frame_rows[i - 1] = tuple(mk_expr(c.strip(), ln, col) for c in comps)
        elif m := re.fullmatch(r"structure\.(\d)(\d)\.(\d)", key):
            i, j, k = (int(g) for g in m.groups())
            if not all(1 <= v <= dim for v in (i, j, k)) or i >= j:
                raise ConfigError(
                    f"structure.{i}{j}.{k}: need 1 <= i < j <= {dim}, 1 <= k <= {dim}",
                    ln,
                )
            structure[(i - 1, j - 1, k - 1)] = mk_expr(val, ln, col)
        elif m := re.fullmatch(r"spinor\.(re|im)([12])", key):
            spinor[m.group(1) + m.group(2)] = (val, ln, col)
        elif m := re.fullmatch(r"A\.(\d)(\d)", key):
            i, j = int(m.group(1)), int(m.group(2))
            if not (1 <= i <= dim and 1 <= j <= dim):
                raise ConfigError(f"A.{i}{j} out of range 1..{dim}", ln)
            endo_entries[(i - 1, j - 1)] = mk_expr(val, ln, col)
        elif key == "u":
            u_field = mk_expr(val, ln, col)
        else:
            raise ConfigError(f"unknown key {key!r}", ln)

    if frame_rows:
        missing = [i + 1 for i in range(dim) if i not in frame_rows]
        if missing:
            raise ConfigError(f"missing frame rows: {missing}")
        frame = tuple(frame_rows[i] for i in range(dim))
    else:
        frame = None
    if frame is None and not structure:
        raise ConfigError("need frame.<i> rows or structure.<ij>.<k> constants")

    chart = FrameChart(
        dim,
        coords,
        tuple(bounds),
        frame=frame,
        structure=structure or None,
        name=name,
    )

    sections = {}
    if spinor:
        comps = {}
        for part in ("re1", "im1", "re2", "im2"):
            src, ln, col = spinor.get(part, ("0", None, None))
            comps[part] = src
            if part in spinor:
                mk_expr(src, ln, col)  # surface diagnostics with location
        sections["spinor"] = SpinorSection.from_exprs(
            chart, comps["re1"], comps["im1"], comps["re2"], comps["im2"], params
        )

    endo = None
    if endo_entries:
        rows = [
            [endo_entries.get((i, j), ExprField("0", coords)) for j in range(dim)]
            for i in range(dim)
        ]
        endo = EndoField(rows)

    skew = None
    notes = ""
    if endo is not None and dim == 3:
        try:
            skew = skew_data_from_endo(endo, chart, chart.grid(5))
        except GeometryError as e:
            notes = f"no adapted skew data: {e}"

    return BuiltEntry(
        name,
        chart,
        dict(params),
        sections=sections,
        endo=endo,
        skew=skew,
        notes=notes,
        aux={"u": u_field} if u_field is not None else {},
    )


def load_config(path, param_overrides=None) -> BuiltEntry:
    p = Path(path)
    return parse_config(
        p.read_text(), name=f"config:{p.stem}", param_overrides=param_overrides
    )
