import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from exptail import (
    DistributionModel, MGFOracle, SampleSet, YoungFunction, bphi_norm, gls_norm, mixed_moment,
    mixed_moment_with_se, moment_bound, natural_function, norm_report, orlicz_n_function,
    orlicz_norm, psi_weight, sample,
)
from exptail.norms import KRAMER_VIOLATED, default_lambda_grid


def dense_tau_oracle(oracle, B, k=4001):
    """For quadratic phi the per-direction threshold is sqrt(natural / phi)."""
    th = np.linspace(0, np.pi, k)
    lam = np.column_stack([np.cos(th), np.sin(th)])
    nat = natural_function(oracle, lam)
    phi = 0.5 * np.einsum("mi,ij,mj->m", lam, B, lam)
    return float(np.sqrt(np.max(nat / phi)))


def test_natural_function_examples():
    rad = MGFOracle.analytic(DistributionModel.rademacher(1))
    assert natural_function(rad, 1.0) == pytest.approx(math.log(math.cosh(1.0)))
    g2 = MGFOracle.analytic(DistributionModel.gaussian(np.eye(2)))
    assert natural_function(g2, [1.0, 1.0]) == pytest.approx(1.0)
    emp = MGFOracle.empirical(sample(DistributionModel.uniform(2), 1000, 1))
    assert natural_function(emp, [0.0, 0.0]) == 0.0


def test_empirical_natural_function_close_to_analytic():
    m = DistributionModel.rademacher(1)
    emp = MGFOracle.empirical(sample(m, 200_000, 2))
    assert natural_function(emp, 1.0) == pytest.approx(math.log(math.cosh(1.0)), abs=5e-3)


def test_natural_function_is_even():
    emp = MGFOracle.empirical(sample(DistributionModel.centered_exponential(2), 20_000, 3))
    lam = np.array([[0.3, -0.2], [-0.3, 0.2], [0.3, 0.2], [-0.3, -0.2]])
    v = natural_function(emp, lam)
    assert np.allclose(v, v[0])


def test_bphi_gaussian_sigma2(quad1):
    b = bphi_norm(MGFOracle.analytic(DistributionModel.gaussian([[4.0]])), quad1)
    assert b.value == pytest.approx(2.0, rel=1e-3)
    assert b.value >= 2.0 * (1 - 1e-12)


def test_bphi_rademacher(quad1):
    assert bphi_norm(MGFOracle.analytic(DistributionModel.rademacher(1)), quad1).value == pytest.approx(1.0, rel=1e-3)


def test_bphi_anisotropic_against_dense_oracle():
    B = np.diag([4.0, 1.0])
    oracle = MGFOracle.analytic(DistributionModel.gaussian(np.eye(2)))
    b = bphi_norm(oracle, YoungFunction.quadratic(B))
    assert b.value == pytest.approx(dense_tau_oracle(oracle, B), rel=2e-3)


def test_bphi_kramer_violation(quad1):
    b = bphi_norm(MGFOracle.analytic(DistributionModel.centered_exponential(1)), quad1)
    assert b.value == math.inf
    assert KRAMER_VIOLATED in b.diagnostics


def test_bphi_degenerate(quad1):
    assert bphi_norm(MGFOracle.empirical(np.zeros((100, 1))), quad1).value == 0.0


def test_lambda_grid_shape():
    assert default_lambda_grid(3).shape == (32 * 16, 3)
    assert default_lambda_grid(1).shape == (16, 1)


def test_mixed_moment_examples(gauss1_samples):
    assert mixed_moment(np.ones((10, 2)), [2.0, 3.0]) == pytest.approx(1.0)
    rad = sample(DistributionModel.rademacher(2), 1000, 1)
    assert mixed_moment(rad, [1.5, 4.0]) == pytest.approx(1.0)
    assert mixed_moment(gauss1_samples, [4.0]) == pytest.approx(3 ** 0.25, abs=0.01)
    assert mixed_moment(np.zeros((5, 1)), [3.0]) == 0.0
    with pytest.raises(ValueError):
        mixed_moment(rad, [0.5, 2.0])


def test_mixed_moment_log_space_handles_huge_orders():
    data = np.full((10, 1), 1e5)
    assert mixed_moment(data, [200.0]) == pytest.approx(1e5)


def test_psi_weight_examples(quad1):
    assert psi_weight(quad1, 4.0) == pytest.approx(math.exp(-0.5) * 2 ** 0.25 * 2, rel=1e-8)
    assert psi_weight(quad1, 4.0) == pytest.approx(1.4425, abs=1e-4)
    assert psi_weight(quad1, 1.0) == pytest.approx(1.2131, abs=1e-4)
    assert psi_weight(quad1, 2.0) == pytest.approx(1.2131, abs=1e-4)


def test_moment_bound_examples(quad1):
    assert moment_bound(quad1, 2.0, 1.0) == pytest.approx(1.2131, abs=1e-4)
    assert moment_bound(quad1, 4.0, 1.0) >= 3 ** 0.25
    assert moment_bound(quad1, 4.0, 0.0) == 0.0


def test_gls_rademacher_argmax_r1(quad1):
    g = gls_norm(sample(DistributionModel.rademacher(1), 1000, 1), quad1)
    assert g.argmax == [1.0]


def gaussian_abs_moment(r):
    return (2 ** (r / 2) * math.gamma((r + 1) / 2) / math.sqrt(math.pi)) ** (1 / r)


def test_gls_gaussian_ratio_curve_flat(quad1, gauss1_samples):
    g = gls_norm(gauss1_samples, quad1)
    ratios = np.array(g.flags["ratios"])
    # within +-25% of the mid-range
    assert (ratios.max() - ratios.min()) / (ratios.max() + ratios.min()) < 0.25
    exact = np.array([gaussian_abs_moment(r) / psi_weight(quad1, r) for r in range(1, 17)])
    assert np.allclose(ratios[:16], exact, rtol=0.03)
    assert len(g.flags["high_variance"]) == 4  # r = 17..20


def test_gls_rejects_bad_grid(quad1, gauss1_samples):
    with pytest.raises(ValueError):
        gls_norm(gauss1_samples, quad1, [[0.5]])


def test_orlicz_n_function():
    q = YoungFunction.quadratic([[1.0]])
    assert orlicz_n_function(q, 0.0) == 0.0
    assert orlicz_n_function(q, 2.0) == pytest.approx(math.e ** 2 - 1)
    p = YoungFunction.power(3.0, 1)
    assert orlicz_n_function(p, 2.0) == pytest.approx(math.exp((2 / 3) * 2 ** 1.5) - 1, rel=1e-8)


def test_orlicz_gaussian_closed_form(quad1, gauss1_samples):
    # E exp(xi^2 / (2 c^2)) = (1 - 1/c^2)^(-1/2) = 2  at  c = sqrt(4/3)
    assert orlicz_norm(gauss1_samples, quad1).value == pytest.approx(math.sqrt(4 / 3), rel=0.02)


def test_orlicz_zero(quad1):
    assert orlicz_norm(np.zeros((10, 1)), quad1).value == 0.0


@pytest.mark.parametrize("model", [
    DistributionModel.gaussian([[1.0]]), DistributionModel.uniform(1), DistributionModel.rademacher(1),
    DistributionModel.gaussian([[1.0, 0.4], [0.4, 0.7]]), DistributionModel.uniform(2, [1.0, 2.0]),
])
def test_sandwich_lower_half(model):
    phi = YoungFunction.quadratic(np.eye(model.dimension))
    s = sample(model, 100_000, 4)
    b = bphi_norm(MGFOracle.analytic(model), phi).value
    g = gls_norm(s, phi).value
    assert g <= b * 1.02


def test_homogeneity(quad1, gauss1_samples):
    s2 = gauss1_samples.scaled(2.0)
    b1 = bphi_norm(MGFOracle.empirical(gauss1_samples), quad1).value
    b2 = bphi_norm(MGFOracle.empirical(s2), quad1).value
    assert b2 / b1 == pytest.approx(2.0, rel=5e-3)
    assert orlicz_norm(s2, quad1).value == 2 * orlicz_norm(gauss1_samples, quad1).value
    assert gls_norm(s2, quad1).value == pytest.approx(2 * gls_norm(gauss1_samples, quad1).value, rel=1e-12)


def test_norm_report_fields(quad2):
    s = sample(DistributionModel.gaussian(np.eye(2)), 20_000, 8)
    rep = norm_report(s, quad2)
    assert rep.gls_norm <= rep.bphi_norm * 1.05
    assert rep.ratios["bphi/gls"] == pytest.approx(rep.bphi_norm / rep.gls_norm)
    assert set(rep.diagnostics) == {"bphi", "gls", "orlicz"}
    assert len(rep.grids["r"]) == 40


@given(st.floats(1.0, 30.0), st.floats(0.01, 20.0), st.floats(1e-3, 50.0))
def test_elementary_inequality_scalar(r, lam, x):
    # x^r <= (r / (lam e))^r exp(lam x), compared in logs
    assert r * math.log(x) <= r * math.log(r / (lam * math.e)) + lam * x + 1e-9 * (1 + lam * x)


@given(st.integers(1, 3), st.integers(0, 10_000))
def test_mixed_moment_se_positive(d, seed):
    s = sample(DistributionModel.gaussian(np.eye(d)), 500, seed)
    m, se = mixed_moment_with_se(s, np.full(d, 2.0))
    assert m > 0 and se >= 0
