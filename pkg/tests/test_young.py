import numpy as np
import pytest
from hypothesis import given, strategies as st

from exptail import YoungFunction, hessian_at_zero, matrix_dominates, validate_young_function
from exptail.young import MatrixD

RADII = [0.5, 2.0, 50.0]


def test_quadratic_is_valid():
    assert validate_young_function(YoungFunction.quadratic(np.eye(2)), RADII) == []


def test_power_15_valid_and_growth_heuristic_passes():
    report = validate_young_function(YoungFunction.power(1.5, 1), RADII)
    assert report == []


def test_flat_coordinate_fails_hessian_check():
    f = YoungFunction.from_callable(lambda p: np.abs(p[:, 0]), 2)
    report = validate_young_function(f, RADII)
    assert any(r.startswith("hessian-at-zero") for r in report)


def test_odd_function_flagged_as_not_even():
    f = YoungFunction.from_callable(lambda p: 0.5 * p[:, 0] ** 2 + 0.1 * p[:, 0] ** 3, 1)
    report = validate_young_function(f, RADII)
    assert any("even" in r for r in report)


def test_validator_needs_radius_at_truncation():
    with pytest.raises(ValueError):
        validate_young_function(YoungFunction.quadratic([[1.0]]), [0.5, 1.0, 2.0])


def test_non_finite_value_is_a_diagnostic():
    f = YoungFunction.from_callable(lambda p: np.where(np.abs(p[:, 0]) < 10, 0.5 * p[:, 0] ** 2, np.inf), 1)
    report = validate_young_function(f, RADII)
    assert any("domain violation" in r for r in report)


def test_bounded_domain_rejected():
    with pytest.raises(ValueError, match="bounded effective domain"):
        YoungFunction("quadratic-matrix", 1, {"B": [[1.0]]}, domain="interval")


def test_hessian_quadratic():
    D = hessian_at_zero(YoungFunction.quadratic(np.diag([2.0, 3.0])))
    assert np.allclose(D.entries, np.diag([1.0, 1.5]), atol=1e-6)
    assert not D.degenerate


def test_hessian_cosh():
    D = hessian_at_zero(YoungFunction.from_callable(lambda p: np.cosh(p[:, 0]) - 1.0, 1))
    assert D.entries[0, 0] == pytest.approx(0.5, abs=1e-6)


def test_hessian_quartic_degenerate():
    D = hessian_at_zero(YoungFunction.from_callable(lambda p: p[:, 0] ** 4, 1))
    assert abs(D.entries[0, 0]) < 1e-6
    assert D.degenerate


def test_hessian_step_too_small():
    with pytest.raises(ValueError, match="step too small"):
        hessian_at_zero(YoungFunction.quadratic([[1.0]]), h=1e-300)


def test_matrix_dominates_examples():
    assert matrix_dominates(2 * np.eye(2), np.eye(2))
    assert not matrix_dominates(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
    rng = np.random.default_rng(0)
    S = np.cov(rng.standard_normal((100_000, 2)), rowvar=False)
    assert matrix_dominates(S, 0.9 * np.eye(2), 0.05)
    with pytest.raises(ValueError):
        matrix_dominates(np.eye(2), np.eye(3))


def test_matrixd_full_hessian():
    assert np.allclose(MatrixD(np.eye(2), False).full_hessian, 2 * np.eye(2))


def test_config_round_trip():
    for f in (YoungFunction.quadratic([[2.0, 0.5], [0.5, 1.0]]), YoungFunction.power(3.0, 2),
              YoungFunction.slowly_varying(2.5, 1.0, 1)):
        g = YoungFunction.from_config(f.to_config())
        pts = np.array([[0.3, -1.2], [2.0, 0.1]])[:, : f.dimension]
        assert np.array_equal(f(pts), g(pts))


@given(st.floats(1.1, 5.0), st.floats(-20, 20), st.floats(0.1, 3.0))
def test_power_family_scaling(beta, lam, c):
    f = YoungFunction.power(beta, 1)
    assert f.scaled(c)(lam) == pytest.approx(f(c * lam), rel=1e-12)
    assert f(lam) == pytest.approx(f(-lam))


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=2), st.lists(st.floats(-5, 5), min_size=2, max_size=2),
       st.floats(0, 1))
def test_shipped_families_convex(a, b, t):
    a, b = np.array(a), np.array(b)
    for f in (YoungFunction.quadratic([[2.0, 0.5], [0.5, 1.0]]), YoungFunction.power(1.7, 2),
              YoungFunction.slowly_varying(2.0, 0.5, 2)):
        mid = f(t * a + (1 - t) * b)
        assert mid <= t * f(a) + (1 - t) * f(b) + 1e-9 * (1 + abs(mid))
