import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from skewspin.exprlang import ExprError
from skewspin.fields import (
    AD,
    FD,
    ComplexField,
    ConstField,
    DerivField,
    ExprField,
    FuncField,
    jet_matrix_inverse,
)

COORDS = ("x", "y")
RNG = np.random.default_rng(31)


def test_field_algebra_matches_expression():
    pts = RNG.uniform(0.2, 1.0, size=(7, 2))
    x = ExprField("x", COORDS)
    y = ExprField("y", COORDS)
    built = (x * y + 1.0) / (y + 2.0) - FuncField("sin", x * 0.5)
    direct = ExprField("(x*y + 1)/(y + 2) - sin(x/2)", COORDS)
    a = built.jet(pts, 2)
    b = direct.jet(pts, 2)
    assert np.max(np.abs(a.value - b.value)) < 1e-14
    assert np.max(np.abs(a.grad - b.grad)) < 1e-14
    assert np.max(np.abs(a.hess - b.hess)) < 1e-13
    assert np.max(np.abs(built.values(pts) - direct.values(pts))) < 1e-14


def test_deriv_field_is_the_partial():
    pts = RNG.uniform(0.2, 1.0, size=(6, 2))
    f = ExprField("exp(x) * cos(y)", COORDS)
    fx = DerivField(f, 0)
    target = ExprField("exp(x) * cos(y)", COORDS)  # d/dx of itself
    assert np.max(np.abs(fx.values(pts) - target.values(pts))) < 1e-14
    # one derivative order is spent: jets cap at order 1
    jet = fx.jet(pts, 2)
    assert jet.order == 1
    dy = ExprField("-exp(x) * sin(y)", COORDS).jet(pts, 1)
    assert np.max(np.abs(jet.grad[:, 1] - dy.value)) < 1e-14


def test_fd_engine_on_composed_fields():
    pts = RNG.uniform(0.3, 0.9, size=(5, 2))
    f = ExprField("x^2 * y", COORDS) / ExprField("1 + y^2", COORDS)
    ad = f.jet(pts, 2, AD)
    fd = f.jet(pts, 2, FD(1e-5))
    assert np.max(np.abs(ad.grad - fd.grad)) < 1e-9
    assert np.max(np.abs(ad.hess - fd.hess)) < 1e-4


def test_division_by_zero_field():
    pts = np.array([[0.0, 1.0]])
    f = ConstField(1.0) / ExprField("x", COORDS)
    with pytest.raises(ExprError):
        f.values(pts)


def test_complex_field_linear_combinations():
    pts = RNG.uniform(0.1, 1.0, size=(6, 2))
    c = ComplexField(ExprField("x", COORDS), ExprField("y", COORDS))
    w = c.scaled(2.0 - 1.5j) + ComplexField(ConstField(1.0))
    expect = (2.0 - 1.5j) * (pts[:, 0] + 1j * pts[:, 1]) + 1.0
    assert np.max(np.abs(w.values(pts) - expect)) < 1e-14
    jet = w.jet(pts, 1)
    assert np.max(np.abs(jet.value - expect)) < 1e-14
    scaled = c.mul_field(ExprField("y", COORDS))
    expect2 = (pts[:, 0] + 1j * pts[:, 1]) * pts[:, 1]
    assert np.max(np.abs(scaled.values(pts) - expect2)) < 1e-14


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.integers(min_value=2, max_value=3))
def test_jet_matrix_inverse_property(seed, d):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.3, 1.0, size=(4, d))
    from skewspin.jets import Jet

    rows = []
    for i in range(d):
        row = []
        for j in range(d):
            base = Jet.coordinate(pts, (i + j) % d) * rng.uniform(0.2, 1.0)
            row.append(base + (2.0 if i == j else rng.uniform(-0.2, 0.2)))
        rows.append(row)
    inv, det = jet_matrix_inverse(rows)
    assume(np.min(np.abs(det.value)) > 0.2)
    # value-level inverse matches numpy
    mat = np.stack([np.stack([rows[i][j].value for j in range(d)], 1) for i in range(d)], 1)
    ref = np.linalg.inv(mat)
    got = np.stack([np.stack([inv[i][j].value for j in range(d)], 1) for i in range(d)], 1)
    assert np.max(np.abs(got - ref)) < 1e-10
    # gradient of the inverse obeys d(A^-1) = -A^-1 dA A^-1
    for mu in range(d):
        da = np.stack(
            [np.stack([rows[i][j].grad[:, mu] for j in range(d)], 1) for i in range(d)], 1
        )
        dinv = np.stack(
            [np.stack([inv[i][j].grad[:, mu] for j in range(d)], 1) for i in range(d)], 1
        )
        expect = -np.einsum("nij,njk,nkl->nil", ref, da, ref)
        assert np.max(np.abs(dinv - expect)) < 1e-9
