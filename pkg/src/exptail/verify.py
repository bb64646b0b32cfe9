"""Monte-Carlo harness for the equivalence of the four integrability predicates.

A  Orlicz norm finite            C  GLS norm finite
B  tail dominated, fitted C      D  B(phi) norm finite

Every check produces an evidence table of (query, lhs, rhs, margin) rows where
``margin = rhs - lhs`` and a row violates when ``margin < -tolerance``
(3 standard errors). Verdicts are "holds", "fails" or "inconclusive".
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
import os

import numpy as np

from ._optim import geometric_bisect
from .distributions import as_data, sample
from .norms import (
    UNRESOLVED, MGFOracle, _log_mean_exp_stats, bphi_norm, default_lambda_grid, default_r_grid,
    gls_norm, mixed_moment_with_se, moment_bound, orlicz_norm, sign_vectors,
)
from .tails import bound_curve, empirical_tail
from .young import hessian_at_zero, matrix_dominates

HOLDS, FAILS, INCONCLUSIVE = "holds", "fails", "inconclusive"
CONSISTENT = "consistent"
N_SE = 3.0
C_RANGE = (0.1, 100.0)


@dataclass
class EvidenceRow:
    query: list
    lhs: float
    rhs: float
    margin: float
    tolerance: float = 0.0
    half_width: float = 0.0

    @property
    def violated(self):
        return self.margin < -self.tolerance


@dataclass
class EvidenceTable:
    name: str
    rows: list = field(default_factory=list)

    @property
    def min_margin(self):
        return min((r.margin for r in self.rows), default=math.inf)

    @property
    def violations(self):
        return [r for r in self.rows if r.violated]


@dataclass
class PredicateResult:
    verdict: str
    value: float
    evidence: EvidenceTable
    note: str = ""


@dataclass
class EquivalenceReport:
    model: dict
    phi: dict
    n: int
    seed: int
    predicates: dict
    verdict: str
    culprit: str
    fitted: dict
    norms: dict
    diagnostics: list = field(default_factory=list)


@dataclass
class LadderConfig:
    n: int = 1_000_000
    seed: int = 0
    x_grid: object = None
    r_grid: object = None
    lambda_grid: object = None
    analytic: bool = True


def default_x_grid(d, scale=None):
    """{0.5, 1, ..., 4}^d for d <= 3; the diagonal and axis rays beyond that."""
    t = np.arange(1, 9) * 0.5
    if d <= 3:
        grid = np.stack(np.meshgrid(*([t] * d), indexing="ij"), axis=-1).reshape(-1, d)
    else:
        grid = np.vstack([np.outer(t, np.ones(d))] + [np.outer(t, np.eye(d)[j]) for j in range(d)])
    if scale is not None:
        grid = grid * np.asarray(scale, dtype=float)
    return grid


def _tail_rows(data, x_grid):
    n = data.shape[0]
    out = []
    for x in x_grid:
        est = empirical_tail(data, x)
        out.append((est.value, est.half_width, math.sqrt(est.value * (1.0 - est.value) / n)))
    return np.array(out).reshape(-1, 3)


def _evidence_from_bounds(name, x_grid, emp, bounds):
    rows = []
    for x, (p, hw, se), b in zip(x_grid, emp, bounds):
        rows.append(EvidenceRow(np.asarray(x).tolist(), float(p), float(b), float(b - p), N_SE * se, float(hw)))
    return EvidenceTable(name, rows)


def tail_domination_sweep(model, phi, scale, x_grid=None, n=1_000_000, seed=0, samples=None):
    """Rows (x, empirical U, half-width, exp(-phi*(x/scale)), margin)."""
    data = (samples if samples is not None else sample(model, n, seed)).data
    d = data.shape[1]
    x_grid = default_x_grid(d) if x_grid is None else np.asarray(x_grid, dtype=float).reshape(-1, d)
    emp = _tail_rows(data, x_grid)
    curve = bound_curve(phi, x_grid, scale) if len(x_grid) else None
    bounds = curve.values if curve is not None else []
    return _evidence_from_bounds("tail", x_grid, emp, bounds)


def _fit_tail_constant(phi, x_grid, emp):
    """Smallest C in C_RANGE with every row dominated within tolerance.

    phi* is non-decreasing along positive rays, so the worst margin is
    monotone in C and geometric bisection finds the threshold.
    """
    need = emp[:, 0] - N_SE * emp[:, 2]
    if len(x_grid) == 0:
        return C_RANGE[0], EvidenceTable("tail")

    def bounds(c):
        return bound_curve(phi, x_grid, c).values

    def feasible(c):
        return bool(np.all(need <= bounds(c)))

    lo, hi = C_RANGE
    if feasible(lo):
        c = lo
    elif not feasible(hi):
        c = math.inf
    else:
        _, c = geometric_bisect(feasible, lo, hi, rtol=1e-3)
    at = hi if math.isinf(c) else c
    return c, _evidence_from_bounds("tail", x_grid, emp, bounds(at))


def _fit_subgaussian_k(B, norm, x_grid, emp):
    """Smallest K with empirical - 3 SE <= exp(-0.5 (B^-1 x, x) / (K norm^2)) on the grid."""
    if not (norm > 0 and np.isfinite(norm)):
        return math.nan
    q = np.einsum("ij,ij->i", np.linalg.solve(B, x_grid.T).T, x_grid)
    need = emp[:, 0] - N_SE * emp[:, 2]
    k = 0.0
    for qi, e in zip(q, need):
        if e <= 0:
            continue
        if e >= 1:
            if qi > 0:
                return math.inf
            continue
        k = max(k, 0.5 * qi / (norm * norm * -math.log(e)))
    return k


def _predicate(value, evidence, note=""):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return PredicateResult(INCONCLUSIVE, math.nan, evidence, note)
    if math.isinf(value):
        return PredicateResult(FAILS, value, evidence, note)
    return PredicateResult(HOLDS, value, evidence, note)


def _has_analytic_oracle(model):
    return model.family != "custom-mixture"


def equivalence_ladder(model, phi, config=None):
    cfg = config or LadderConfig()
    s = sample(model, cfg.n, cfg.seed)
    data = s.data
    d = model.dimension
    if cfg.x_grid is None:
        sd = np.sqrt(np.clip(np.diag(model.covariance), 0.0, None))
        x_grid = default_x_grid(d, np.where(sd > 0, sd, 1.0))
    else:
        x_grid = np.asarray(cfg.x_grid, dtype=float).reshape(-1, d)
    r_grid = default_r_grid(d) if cfg.r_grid is None else np.asarray(cfg.r_grid, dtype=float).reshape(-1, d)
    diag = []

    # D
    if cfg.analytic and _has_analytic_oracle(model):
        oracle = MGFOracle.analytic(model)
    else:
        oracle = MGFOracle.empirical(s)
        diag.append("D uses the empirical MGF oracle")
    lam = cfg.lambda_grid
    if lam is None:
        lam = default_lambda_grid(d, phi.truncation_radius, unit=oracle.unit)
    lam = np.asarray(lam, dtype=float).reshape(-1, d)
    b = bphi_norm(oracle, phi, lam)
    ev = oracle.evaluate(lam)
    tau = b.value if np.isfinite(b.value) else float(2.0 ** 64)
    rhs = phi._evaluate(tau * lam)
    d_rows = EvidenceTable("D", [
        EvidenceRow(l.tolist(), float(v), float(r), float(r - v) if np.isfinite(v) else -math.inf)
        for l, v, r, st in zip(lam, ev.values, rhs, ev.status) if st != UNRESOLVED
    ])
    pred_d = _predicate(float(b.value), d_rows, "; ".join(b.diagnostics))

    # A
    o = orlicz_norm(s, phi)
    mean_n = o.flags.get("mean_N", math.inf if math.isinf(o.value) else 0.0)
    a_rows = EvidenceTable("A", [EvidenceRow(["mean N(|xi|/c)"], float(mean_n), 1.0, float(1.0 - mean_n))])
    pred_a = _predicate(float(o.value), a_rows, "; ".join(o.diagnostics))

    # B
    emp = _tail_rows(data, x_grid)
    c_fit, b_rows = _fit_tail_constant(phi, x_grid, emp)
    pred_b = _predicate(float(c_fit), b_rows)
    if math.isinf(c_fit):
        pred_b.note = f"no C in [{C_RANGE[0]}, {C_RANGE[1]}] dominates the empirical tail"

    # C
    g = gls_norm(s, phi, r_grid)
    c_rows = EvidenceTable("C")
    bound_norm = b.value
    for r in r_grid:
        m, se = mixed_moment_with_se(s, r)
        bound = moment_bound(phi, r, bound_norm) if np.isfinite(bound_norm) else math.inf
        c_rows.rows.append(EvidenceRow(r.tolist(), m, float(bound), float(bound - m), N_SE * se))
    pred_c = _predicate(float(g.value), c_rows, "; ".join(g.diagnostics))

    preds = {"A": pred_a, "B": pred_b, "C": pred_c, "D": pred_d}
    inconclusive = [k for k, p in preds.items() if p.verdict == INCONCLUSIVE]
    kinds = {p.verdict for p in preds.values()}
    if inconclusive:
        verdict, culprit = INCONCLUSIVE, ",".join(inconclusive)
    elif len(kinds) == 1:
        verdict, culprit = CONSISTENT, ""
    else:
        verdict = FAILS
        culprit = ",".join(k for k, p in preds.items() if p.verdict == FAILS)

    fitted = {
        "C_tail": float(c_fit),
        "sandwich_ratio": _safe_ratio(b.value, g.value),
        "K_subgaussian": None,
        "moment_domination_violations": len(c_rows.violations),
    }
    if phi.family == "quadratic-matrix":
        fitted["K_subgaussian"] = _fit_subgaussian_k(np.asarray(phi.params["B"], dtype=float),
                                                     b.value, x_grid, emp)
    norms = {"orlicz": float(o.value), "gls": float(g.value), "bphi": float(b.value)}
    return EquivalenceReport(model.to_config(), phi.to_config(), cfg.n, cfg.seed, preds, verdict,
                             culprit, fitted, norms, diag)


def _safe_ratio(a, b):
    if not np.isfinite(a):
        return math.inf
    if b == 0:
        return math.nan if a == 0 else math.inf
    return float(a / b)


def worker_count(default=None):
    env = os.environ.get("EXPTAIL_THREADS")
    if env:
        return max(1, int(env))
    return default or (os.cpu_count() or 1)


@dataclass
class LadderRun:
    reports: list
    verdict: str
    stability: dict


def run_ladder(model, phi, seeds, config=None):
    """The ladder across seeds, run on a thread pool capped by EXPTAIL_THREADS."""
    base = config or LadderConfig()
    cfgs = [LadderConfig(base.n, int(s), base.x_grid, base.r_grid, base.lambda_grid, base.analytic) for s in seeds]
    with ThreadPoolExecutor(max_workers=min(worker_count(), len(cfgs))) as pool:
        reports = list(pool.map(lambda c: equivalence_ladder(model, phi, c), cfgs))
    verdicts = {r.verdict for r in reports}
    verdict = FAILS if FAILS in verdicts else INCONCLUSIVE if INCONCLUSIVE in verdicts else CONSISTENT
    return LadderRun(reports, verdict, stability_summary(reports))


def relative_spread(values):
    v = np.asarray([x for x in values if x is not None], dtype=float)
    if v.size == 0 or not np.all(np.isfinite(v)) or np.any(v <= 0):
        return math.nan
    return float(v.max() / v.min() - 1.0)


def stability_summary(reports, limit=0.2):
    out = {}
    for key in ("C_tail", "sandwich_ratio"):
        spread = relative_spread([r.fitted[key] for r in reports])
        out[key] = {"values": [r.fitted[key] for r in reports], "spread": spread,
                    "stable": bool(np.isfinite(spread) and spread < limit)}
    return out


# ---------------------------------------------------------------- auxiliary checks

@dataclass
class CheckResult:
    verdict: str
    worst_margin: float
    evidence: EvidenceTable
    note: str = ""


def strict_subgaussian_check(samples, lambda_grid=None, min_ess=100.0):
    """Empirical E exp((lam, xi)) against exp(0.5 (S lam, lam)), S the sample covariance.

    Compared in log space with a delta-method standard error that includes
    the sampling error of the quadratic form. Points the sample cannot resolve
    (effective sample size below ``min_ess``) are skipped.
    """
    data = as_data(samples)
    n, d = data.shape
    mean = data.mean(axis=0)
    sd = data.std(axis=0)
    note = ""
    if np.any(np.abs(mean) > N_SE * sd / math.sqrt(n) + 1e-300):
        note = "sample mean outside its 3-SE band; data were centred"
    x = data - mean
    S = x.T @ x / n
    unit = math.sqrt(float(np.mean(x * x))) or 1.0
    if lambda_grid is None:
        base = default_lambda_grid(d, 2.0, n_directions=16, n_radii=8, r_min=0.05, unit=unit)
        lam = (base[:, None, :] * sign_vectors(d)[None, :, :]).reshape(-1, d)
    else:
        lam = np.asarray(lambda_grid, dtype=float).reshape(-1, d)
    full, half, ess = _log_mean_exp_stats(x, lam)
    quad = 0.5 * np.einsum("mi,ij,mj->m", lam, S, lam)
    se_quad = 0.5 * _projection_square_sd(x, lam) / math.sqrt(n)
    se_log = np.sqrt(np.clip(n / ess - 1.0, 0.0, None) / n)
    tol = N_SE * np.sqrt(se_log ** 2 + se_quad ** 2)
    table = EvidenceTable("strict_subgaussian")
    skipped = 0
    for l, f, q, t, e in zip(lam, full, quad, tol, ess):
        if e < min_ess:
            skipped += 1
            continue
        table.rows.append(EvidenceRow(l.tolist(), float(f), float(q), float(q - f), float(t)))
    if not np.all(np.isfinite(full)):
        return CheckResult(INCONCLUSIVE, math.nan, table, "empirical MGF diverged")
    if not table.rows:
        return CheckResult(INCONCLUSIVE, math.nan, table, "no grid point resolved by the sample")
    if skipped:
        note = (note + "; " if note else "") + f"{skipped} unresolved grid points skipped"
    verdict = FAILS if table.violations else HOLDS
    return CheckResult(verdict, table.min_margin, table, note)


def _projection_square_sd(x, lam, max_cells=1 << 22):
    """Standard deviation of (lam, x)^2 over rows, accumulated in row blocks."""
    rows = max(1, max_cells // max(lam.shape[0], 1))
    s1 = np.zeros(lam.shape[0])
    s2 = np.zeros(lam.shape[0])
    for start in range(0, x.shape[0], rows):
        p = (x[start:start + rows] @ lam.T) ** 2
        s1 += p.sum(axis=0)
        s2 += (p * p).sum(axis=0)
    n = x.shape[0]
    m = s1 / n
    return np.sqrt(np.clip(s2 / n - m * m, 0.0, None))


@dataclass
class VarianceReport:
    half_hessian: str
    full_hessian: str
    min_eig_half: float
    min_eig_full: float
    tolerance: float
    covariance: list


def variance_domination_check(samples, phi, norm=None, norm_tol=0.05):
    """Sample covariance against D_phi, under both readings of D_phi.

    D_phi is half the Hessian of phi at 0; the full-Hessian reading is
    reported alongside. Requires a B(phi) norm of at most 1 + ``norm_tol``.
    """
    data = as_data(samples)
    n, d = data.shape
    if norm is None:
        norm = bphi_norm(MGFOracle.empirical(data), phi).value
    if norm > 1.0 + norm_tol:
        raise ValueError(f"precondition violated: B(phi) norm {norm:.4g} > 1; rescale the samples by 1/{norm:.4g}")
    x = data - data.mean(axis=0)
    S = x.T @ x / n
    prods = x[:, :, None] * x[:, None, :]
    se = prods.reshape(n, -1).std(axis=0).reshape(d, d) / math.sqrt(n)
    tol = N_SE * float(np.linalg.norm(se, 2))
    D = hessian_at_zero(phi)
    half = np.asarray(D.entries)
    full = np.asarray(D.full_hessian)
    eh = float(np.linalg.eigvalsh(half - S).min())
    ef = float(np.linalg.eigvalsh(full - S).min())
    v_half = HOLDS if matrix_dominates(half, S, tol) else FAILS
    v_full = HOLDS if matrix_dominates(full, S, tol) else FAILS
    return VarianceReport(v_half, v_full, eh, ef, tol, S.tolist())
