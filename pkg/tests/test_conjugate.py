import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from exptail import (
    ConjugateGrid, YoungFunction, capital_conjugate, double_conjugate_residual, legendre_transform,
    phi_capital,
)


def power_conjugate(beta, y):
    q = beta / (beta - 1.0)
    return (beta - 1.0) / beta * np.abs(y) ** q


def brute_force_sup(f, y, box=6.0, k=801):
    """Dense-grid oracle for phi* in two dimensions."""
    t = np.linspace(-box, box, k)
    g = np.stack(np.meshgrid(t, t, indexing="ij"), axis=-1).reshape(-1, 2)
    return float(np.max(g @ np.asarray(y) - f(g)))


def test_quadratic_self_conjugate(quad1):
    assert legendre_transform(quad1, 3.0).value == pytest.approx(4.5, rel=1e-12)


def test_power_beta3():
    f = YoungFunction.power(3.0, 1)
    assert float(legendre_transform(f, 2.0)) == pytest.approx((2 / 3) * 2 ** 1.5, rel=1e-10)


def test_anisotropic_quadratic_against_brute_force():
    f = YoungFunction.quadratic(np.diag([1.0, 4.0]))
    val = float(legendre_transform(f, np.array([1.0, 1.0])))
    assert val == pytest.approx(0.625, rel=1e-9)
    assert val == pytest.approx(brute_force_sup(f, [1.0, 1.0]), abs=1e-4)


def test_truncation_flag():
    f = YoungFunction.quadratic([[1.0]], truncation_radius=5.0)
    res = legendre_transform(f, 10.0)
    assert res.truncated
    assert res.value < 50.0  # truncated sup under-estimates


def test_empty_domain():
    f = YoungFunction.from_callable(lambda p: np.full(p.shape[0], np.inf), 1)
    with pytest.raises(ValueError, match="empty effective domain"):
        legendre_transform(f, 1.0)


def test_double_conjugate_quadratic(quad1):
    rep = double_conjugate_residual(quad1, np.linspace(-3, 3, 13))
    assert rep.residual < 1e-6
    assert not rep.truncated


def test_double_conjugate_power_25():
    rep = double_conjugate_residual(YoungFunction.power(2.5, 1), np.linspace(-2, 2, 9))
    assert rep.residual < 1e-4


def test_double_conjugate_noisy_table():
    x = np.linspace(-6, 6, 241)
    rng = np.random.default_rng(3)
    f = YoungFunction.tabulated([x], 0.5 * x ** 2 + 1e-3 * rng.uniform(-1, 1, x.size), truncation_radius=6.0)
    rep = double_conjugate_residual(f, np.linspace(-2, 2, 9), radius=6.0)
    assert rep.residual <= 1e-2


def test_phi_capital_examples(quad1):
    assert phi_capital(quad1, 0.0).value == pytest.approx(0.5)
    assert phi_capital(quad1, math.log(2.0)).value == pytest.approx(2.0)
    f = YoungFunction.power(3.0, 2)
    assert phi_capital(f, np.zeros(2)).value == pytest.approx(brute_force_sup(f, [1.0, 1.0], 3.0), abs=1e-4)


@pytest.mark.parametrize("r", [1.0, 2.0, 4.0, 9.5])
def test_capital_conjugate_quadratic(quad1, r):
    assert float(capital_conjugate(quad1, r)) == pytest.approx(0.5 * r * (math.log(r) - 1), abs=1e-9)


def test_capital_conjugate_separable():
    f = YoungFunction.quadratic(np.eye(2))
    r = np.array([2.0, 3.0])
    expected = sum(0.5 * v * (math.log(v) - 1) for v in r)
    assert float(capital_conjugate(f, r)) == pytest.approx(expected, abs=1e-7)


def test_grid_interpolation_and_csv(tmp_path):
    f = YoungFunction.quadratic(np.diag([1.0, 2.0]))
    grid = ConjugateGrid.build(f, n_knots=48)
    pts = np.array([[0.3, 1.1], [2.0, 0.5], [-1.0, 4.0]])
    exact = 0.5 * (pts[:, 0] ** 2 + pts[:, 1] ** 2 / 2)
    assert np.allclose(grid.evaluate(pts), exact, rtol=2e-2)
    path = tmp_path / "grid.csv"
    grid.to_csv(path)
    back = ConjugateGrid.from_csv(path)
    assert np.array_equal(back.evaluate(pts), grid.evaluate(pts))


def test_grid_outside_box_is_infinite(quad1):
    grid = ConjugateGrid.build(quad1, radius=10.0)
    assert grid(11.0) == math.inf


@given(st.floats(1.2, 4.0), st.floats(0.5, 10.0))
def test_power_closed_form(beta, y):
    f = YoungFunction.power(beta, 1, truncation_radius=200.0)
    res = legendre_transform(f, y)
    if res.truncated:
        # maximiser y^(1/(beta-1)) outside the box: only a lower estimate
        assert y ** (1 / (beta - 1)) > 199.0
        assert res.value <= power_conjugate(beta, y)
    else:
        assert res.value == pytest.approx(power_conjugate(beta, y), rel=1e-6)


@given(st.floats(-4, 4), st.floats(-4, 4))
def test_young_inequality(lam, y):
    f = YoungFunction.power(2.5, 1)
    assert lam * y <= f(lam) + float(legendre_transform(f, y)) + 1e-9


@given(st.floats(0.1, 2.0), st.floats(0.0, 5.0))
def test_order_reversal(c, y):
    # f <= g implies g* <= f*
    f = YoungFunction.quadratic([[1.0]])
    g = YoungFunction.quadratic([[1.0 + c]])
    assert float(legendre_transform(g, y)) <= float(legendre_transform(f, y)) + 1e-9


@given(st.floats(0.2, 5.0), st.floats(-5.0, 5.0))
def test_scaling_rule(c, y):
    # (phi(. c))*(y) = phi*(y / c)
    f = YoungFunction.power(3.0, 1)
    lhs = float(legendre_transform(f.scaled(c), y, radius=50.0 / c))
    assert lhs == pytest.approx(float(legendre_transform(f, y / c)), rel=1e-6, abs=1e-9)


@given(st.floats(0, 2 * math.pi), st.floats(0.1, 4.0))
def test_radial_preservation(theta, rad):
    f = YoungFunction.power(3.0, 2)
    y = rad * np.array([math.cos(theta), math.sin(theta)])
    assert float(legendre_transform(f, y)) == pytest.approx(power_conjugate(3.0, rad), rel=1e-6)
