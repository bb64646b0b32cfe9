import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from exptail import (
    DistributionModel, YoungFunction, analytic_tail, bound_curve, chernov_bound, empirical_tail,
    min_coordinate_bound, sample, subgaussian_bound,
)


@pytest.fixture(scope="module")
def rad2():
    return sample(DistributionModel.rademacher(2), 1_000_000, 5)


def test_rademacher_tail(rad2):
    est = empirical_tail(rad2, [0.5, 0.5])
    assert abs(est.value - 0.25) < 0.0013 * 3
    assert set(est.argmax_orbit) <= {-1, 1}


def test_infinite_query_is_empty(rad2):
    assert empirical_tail(rad2, [math.inf, 0.0]).value == 0.0


def test_gaussian_tail(gauss1_samples):
    est = empirical_tail(gauss1_samples, [2.0])
    assert est.value == pytest.approx(0.02275, abs=3 * est.se + 1e-4)


def test_strict_inequality_on_ties():
    data = np.array([[1.0], [1.0], [2.0], [-3.0]])
    assert empirical_tail(data, [1.0]).value == 0.25
    assert empirical_tail(data, [0.0]).value == 0.75


def test_negative_query_and_dimension_cap():
    with pytest.raises(ValueError):
        empirical_tail(np.zeros((2, 1)), [-1.0])
    with pytest.raises(ValueError, match="sign-orbit enumeration cap exceeded"):
        empirical_tail(np.zeros((2, 26)), np.zeros(26))


def test_orbit_symmetry_at_zero():
    from exptail.tails import orbit_counts
    s = sample(DistributionModel.uniform(2), 400_000, 6)
    counts = orbit_counts(s.data, np.zeros(2))
    p = counts / s.n
    se = math.sqrt(0.25 * 0.75 / s.n)
    assert np.ptp(p) < 6 * se


def test_chernov_examples(quad1):
    assert chernov_bound(quad1, 2.0).value == pytest.approx(math.exp(-2))
    assert chernov_bound(quad1, 0.0).value == 1.0
    radial = YoungFunction.power(2.0, 2)
    assert chernov_bound(radial, np.array([2.0, 2.0])).value == pytest.approx(math.exp(-4), rel=1e-8)


def test_chernov_possibly_loose_flag():
    f = YoungFunction.quadratic([[1.0]], truncation_radius=3.0)
    b = chernov_bound(f, 5.0)
    assert b.possibly_loose
    assert b.value >= math.exp(-12.5)


def test_min_coordinate_examples(quad1, quad2):
    assert min_coordinate_bound(quad2, 1.0, 2.0).value == pytest.approx(4 * math.exp(-4))
    assert min_coordinate_bound(quad1, 1.0, 3.0).value == pytest.approx(2 * math.exp(-4.5))
    assert min_coordinate_bound(quad1, 1.0, 1e-6).value == 1.0


def test_subgaussian_examples():
    assert subgaussian_bound(np.eye(2), 1.0, 1.0, [2.0, 0.0]) == pytest.approx(math.exp(-2))
    assert subgaussian_bound(np.diag([1.0, 4.0]), 1.0, 1.0, [1.0, 2.0]) == pytest.approx(math.exp(-1))
    assert subgaussian_bound(np.eye(2), 1.0, 1.0, [0.0, 0.0]) == 1.0
    with pytest.raises(ValueError, match="matrix not invertible"):
        subgaussian_bound(np.diag([1.0, 0.0]), 1.0, 1.0, [1.0, 1.0])


def test_empirical_converges_to_analytic():
    m = DistributionModel.gaussian([[1.0]])
    errs = []
    for n in (10_000, 100_000, 1_000_000):
        errs.append(abs(empirical_tail(sample(m, n, 21), [1.0]).value - analytic_tail(m, [1.0])))
        assert errs[-1] <= 3 * 3 * math.sqrt(0.16 * 0.84 / n)


@given(st.floats(0, 3), st.floats(0, 3), st.floats(0, 1))
def test_empirical_tail_monotone(x1, x2, dx):
    s = sample(DistributionModel.gaussian(np.eye(2)), 2_000, 3)
    assert empirical_tail(s, [x1 + dx, x2]).value <= empirical_tail(s, [x1, x2]).value


@given(st.floats(0.05, 2.0), st.floats(0.05, 2.0))
def test_bound_curve_non_increasing_along_rays(a, b):
    f = YoungFunction.quadratic([[1.0, 0.3], [0.3, 2.0]])
    t = np.linspace(0, 3, 7)
    curve = bound_curve(f, np.outer(t, [a, b]))
    assert np.all(np.diff(curve.values) <= 1e-12)
    assert np.all((curve.values > 0) & (curve.values <= 1))
