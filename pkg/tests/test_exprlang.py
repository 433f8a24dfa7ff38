import math
import random

import numpy as np
import pytest

from skewspin import exprlang as el
from skewspin.jets import fd_jet

COORDS = ("x", "y", "z")
PARAMS = ("A", "B", "H", "c", "d")


def sample_ast(rng, depth):
    """Random well-formed AST; literals are non-negative so that printing
    round-trips structurally (unary minus is its own node)."""
    if depth <= 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.4:
            return el.Num(round(rng.uniform(0, 4), 3))
        if r < 0.8:
            return el.Sym(rng.choice(COORDS))
        return el.Sym(rng.choice(PARAMS))
    r = rng.random()
    if r < 0.55:
        op = rng.choice("+-*/")
        return el.BinOp(op, sample_ast(rng, depth - 1), sample_ast(rng, depth - 1))
    if r < 0.65:
        return el.BinOp("^", sample_ast(rng, depth - 1), el.Num(float(rng.choice([2, 3]))))
    if r < 0.8:
        return el.Neg(sample_ast(rng, depth - 1))
    fn = rng.choice(el.FUNCTIONS)
    return el.Call(fn, sample_ast(rng, depth - 1))


def test_parse_examples():
    e = el.parse("c*x + d*y + e")
    assert el.free_symbols(e) == {"c", "d", "e", "x", "y"}
    assert el.free_symbols(e) - set(COORDS) == {"c", "d", "e"}
    assert el.parse("0") == el.Num(0.0)
    e2 = el.parse("A*exp(sqrt(H)*x) + B*exp(-sqrt(H)*x)")
    assert el.free_symbols(e2) - {"x"} == {"A", "B", "H"}


def test_parse_errors_carry_location():
    with pytest.raises(el.ParseError) as exc:
        el.parse("x + * y")
    assert "offset 4" in str(exc.value)
    with pytest.raises(el.ParseError):
        el.parse("sin(x")
    with pytest.raises(el.ParseError) as exc:
        el.parse("foo(x)")
    assert "known" in str(exc.value)
    with pytest.raises(el.ParseError):
        el.parse("x 3")


def test_precedence_and_associativity():
    assert el.parse("1 - 2 - 3") == el.BinOp(
        "-", el.BinOp("-", el.Num(1.0), el.Num(2.0)), el.Num(3.0)
    )
    assert el.parse("2^3^2") == el.BinOp(
        "^", el.Num(2.0), el.BinOp("^", el.Num(3.0), el.Num(2.0))
    )
    assert el.parse("-x^2") == el.Neg(el.BinOp("^", el.Sym("x"), el.Num(2.0)))
    assert el.pretty(el.parse("(x + y) * z")) == "(x + y) * z"


def test_roundtrip_fixed_point_on_random_asts():
    rng = random.Random(20260809)
    for _ in range(1000):
        ast = sample_ast(rng, 6)
        printed = el.pretty(ast)
        reparsed = el.parse(printed)
        assert reparsed == ast, printed
        assert el.pretty(reparsed) == printed


def test_eval_diff_examples():
    ds = el.eval_diff(el.parse("x*y"), {"x": 2.0, "y": 3.0})
    assert ds.value == 6.0
    assert np.allclose(ds.grad, [3.0, 2.0])
    assert ds.hess[0, 1] == 1.0 and ds.hess[1, 0] == 1.0

    ds = el.eval_diff(el.parse("exp(2*b*x)"), {"x": 1.0}, {"b": 0.5})
    oracle = (math.exp(2 * 0.5 * (1 + 1e-5)) - math.exp(2 * 0.5 * (1 - 1e-5))) / 2e-5
    assert abs(ds.value - math.e) < 1e-12
    assert abs(ds.grad[0] - oracle) <= 1e-8 * abs(oracle)

    with pytest.raises(el.UnknownSymbolError):
        el.eval_diff(el.parse("x + q"), {"x": 1.0})


def test_eval_faults_carry_subexpression():
    with pytest.raises(el.EvalFault) as exc:
        el.eval_diff(el.parse("1/(x - 1)"), {"x": 1.0})
    assert "x - 1" in str(exc.value)
    with pytest.raises(el.EvalFault) as exc:
        el.eval_diff(el.parse("log(x - 2)"), {"x": 1.0})
    assert "log" in str(exc.value)
    with pytest.raises(el.EvalFault):
        el.eval_diff(el.parse("sqrt(-x)"), {"x": 1.0})
    # same guards on the value-only path
    with pytest.raises(el.EvalFault):
        el.eval_values(el.parse("1/x"), np.array([[0.0]]), ("x",))


def test_ad_matches_finite_differences_on_random_expressions():
    rng = random.Random(99)
    nprng = np.random.default_rng(99)
    params = {p: 1.3 for p in PARAMS}
    checked = 0
    attempts = 0
    while checked < 1000 and attempts < 6000:
        attempts += 1
        ast = sample_ast(rng, 6)
        pts = nprng.uniform(0.15, 1.1, size=(3, 3))
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                jet = el.eval_jets(ast, pts, COORDS, params)
                vals = el.eval_values(ast, pts, COORDS, params)
        except el.ExprError:
            continue
        if not np.all(np.isfinite(jet.value)) or np.max(np.abs(jet.value)) > 100:
            continue
        if not (np.all(np.isfinite(jet.grad)) and np.all(np.isfinite(jet.hess))):
            continue
        # "safe" points: derivative scales stay tame, so the fourth
        # derivative entering the FD truncation error stays tame too
        if max(np.max(np.abs(jet.grad)), np.max(np.abs(jet.hess))) > 100:
            continue
        try:
            oracle = fd_jet(
                lambda q: el.eval_values(ast, q, COORDS, params), pts, 2, 1e-5
            )
        except el.ExprError:
            continue
        assert np.allclose(vals, jet.value)
        # FD noise scales with the function magnitude (roundoff |f|/h in the
        # gradient, |f|/h^2 in the Hessian), so "relative" includes it
        fmag = np.max(np.abs(jet.value))
        scale_g = 1.0 + np.max(np.abs(oracle.grad)) + fmag
        scale_h = 1.0 + np.max(np.abs(oracle.hess)) + fmag
        assert np.max(np.abs(jet.grad - oracle.grad)) <= 1e-6 * scale_g, el.pretty(ast)
        assert np.max(np.abs(jet.hess - oracle.hess)) <= 1e-4 * scale_h, el.pretty(ast)
        checked += 1
    assert checked == 1000


def test_eval_is_deterministic():
    ast = el.parse("sin(x*y) + exp(x/3)*sqrt(1 + y^2)")
    pts = np.random.default_rng(0).uniform(0.1, 1.0, size=(8, 2))
    a = el.eval_jets(ast, pts, ("x", "y"))
    b = el.eval_jets(ast, pts, ("x", "y"))
    assert np.array_equal(a.value, b.value)
    assert np.array_equal(a.grad, b.grad)
    assert np.array_equal(a.hess, b.hess)
