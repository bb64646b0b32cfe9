"""Norms, tail bounds and conjugates for random vectors with exponential tails."""
from .certify import IntegralResult, QuadratureConfig, k_gamma_integral, l_integral
from .conjugate import (
    Conjugate, ConjugateGrid, ConjugateValue, capital_conjugate, double_conjugate_residual,
    legendre_transform, phi_capital,
)
from .distributions import (
    DistributionModel, SampleSet, analytic_log_mgf, analytic_mgf, analytic_tail, sample,
)
from .norms import (
    MGFOracle, NormEstimate, NormReport, bphi_norm, default_lambda_grid, default_r_grid, gls_norm,
    mixed_moment, mixed_moment_with_se, moment_bound, natural_function, norm_report,
    orlicz_n_function, orlicz_norm, psi_weight,
)
from .tails import (
    BoundCurve, TailBound, TailEstimate, bound_curve, chernov_bound, empirical_tail,
    min_coordinate_bound, subgaussian_bound,
)
from .verify import (
    EquivalenceReport, EvidenceRow, EvidenceTable, LadderConfig, equivalence_ladder, run_ladder,
    strict_subgaussian_check, tail_domination_sweep, variance_domination_check,
)
from .young import MatrixD, YoungFunction, hessian_at_zero, matrix_dominates, validate_young_function

__version__ = "0.1.0"
