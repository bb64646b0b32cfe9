"""The three norms of an exponentially-tailed random vector.

* ``bphi_norm``  -- least tau with max_eps E exp(sum eps_j lam_j xi_j) <= exp(phi(tau lam))
* ``gls_norm``   -- sup over moment vectors r of |xi|_r / psi(r)
* ``orlicz_norm`` -- Luxemburg norm for N(u) = exp(phi*(u)) - 1

plus the supporting scalar machinery (natural function, mixed moments, the
psi weight and the moment bound).
"""
from dataclasses import dataclass, field
import itertools
import math

import numpy as np
from scipy.special import logsumexp

from ._optim import bracket_threshold, geometric_bisect
from .conjugate import ConjugateGrid, capital_conjugate, legendre_transform
from .distributions import analytic_log_mgf, as_data
from .young import as_points

OK, UNRESOLVED, DIVERGED = 0, 1, 2
STATUS_NAMES = {OK: "ok", UNRESOLVED: "unresolved", DIVERGED: "diverged"}
KRAMER_VIOLATED = "Kramer violated on grid"
HIGH_VARIANCE_ORDER = 16


def sign_vectors(d):
    return np.array(list(itertools.product((1.0, -1.0), repeat=d)))


@dataclass
class NaturalEval:
    values: np.ndarray
    status: np.ndarray
    ess: np.ndarray = None


class MGFOracle:
    """Sign-orbit maximised moment generating function, analytic or empirical.

    The empirical oracle centres the sample (option ``center``) and judges
    every lambda by the effective sample size of the exponential weights:
    points with ESS below ``min_ess`` are *unresolved* (the sample cannot
    certify the MGF there) and are skipped by the norm search. A resolved
    point is *diverged* when its log-mean exceeds ``overflow_log`` or when
    the estimate from the first half of the data differs from the full
    estimate by more than ``split_tol`` (relative).
    """

    def __init__(self, source, dimension, model=None, data=None, center=True,
                 min_ess=100.0, split_tol=0.5, overflow_log=700.0):
        if source not in ("analytic", "empirical"):
            raise ValueError("source must be 'analytic' or 'empirical'")
        self.source = source
        self.dimension = int(dimension)
        self.model = model
        self.min_ess = float(min_ess)
        self.split_tol = float(split_tol)
        self.overflow_log = float(overflow_log)
        self.unit = 1.0
        if source == "empirical":
            x = np.asarray(data, dtype=float)
            if center:
                x = x - x.mean(axis=0)
            self.data = x
            rms = math.sqrt(float(np.mean(x * x)))
            self.unit = rms if rms > 0 else 1.0

    @classmethod
    def analytic(cls, model):
        analytic_log_mgf(model, np.zeros(model.dimension))  # raises without a closed form
        return cls("analytic", model.dimension, model=model)

    @classmethod
    def empirical(cls, samples, **kw):
        data = as_data(samples)
        return cls("empirical", data.shape[1], data=data, **kw)

    def evaluate(self, lams):
        pts, _ = as_points(lams, self.dimension)
        eps = sign_vectors(self.dimension)
        k = eps.shape[0]
        signed = (pts[:, None, :] * eps[None, :, :]).reshape(-1, self.dimension)
        if self.source == "analytic":
            vals = np.asarray(analytic_log_mgf(self.model, signed), dtype=float).reshape(-1, k)
            best = vals.max(axis=1)
            status = np.where(np.isfinite(best), OK, DIVERGED)
            return NaturalEval(best, status, None)
        full, half, ess = _log_mean_exp_stats(self.data, signed)
        status = np.where(ess < self.min_ess, UNRESOLVED, OK)
        resolved = status == OK
        unstable = np.abs(full - half) > math.log1p(self.split_tol)
        blown = full > self.overflow_log
        status = np.where(resolved & (unstable | blown), DIVERGED, status)
        full, status, ess = full.reshape(-1, k), status.reshape(-1, k), ess.reshape(-1, k)
        best = full.max(axis=1)
        st = status.max(axis=1)
        best = np.where(st == DIVERGED, np.inf, best)
        return NaturalEval(best, st, ess.min(axis=1))


def _log_mean_exp_stats(data, lams, max_cells=1 << 22):
    """For each lam: log mean exp(<lam, x>) over all rows and over the first half, and the ESS."""
    n = data.shape[0]
    k = lams.shape[0]
    h = n // 2 if n >= 2 else n
    rows = max(1, max_cells // max(k, 1))
    parts = []
    for lo, hi in ((0, h), (h, n)):
        M = np.full(k, -np.inf)
        A = np.zeros(k)
        A2 = np.zeros(k)
        for s in range(lo, hi, rows):
            S = data[s:min(s + rows, hi)] @ lams.T
            bm = S.max(axis=0)
            W = np.exp(S - bm)
            a, a2 = W.sum(axis=0), (W * W).sum(axis=0)
            newM = np.maximum(M, bm)
            with np.errstate(invalid="ignore"):
                c_old = np.where(np.isfinite(M), np.exp(M - newM), 0.0)
            c_new = np.exp(bm - newM)
            A = A * c_old + a * c_new
            A2 = A2 * c_old ** 2 + a2 * c_new ** 2
            M = newM
        parts.append((M, A, A2, hi - lo))
    (M1, A1, B1, n1), (M2, A2, B2, n2) = parts
    if n2 == 0:
        M, A, B = M1, A1, B1
    else:
        M = np.maximum(M1, M2)
        c1 = np.where(np.isfinite(M1), np.exp(M1 - M), 0.0)
        c2 = np.where(np.isfinite(M2), np.exp(M2 - M), 0.0)
        A = A1 * c1 + A2 * c2
        B = B1 * c1 ** 2 + B2 * c2 ** 2
    full = M + np.log(A) - math.log(n)
    half = M1 + np.log(A1) - math.log(n1) if n1 else full
    ess = A * A / B
    return full, half, ess


def natural_function(oracle, lam):
    """log of the sign-orbit maximised MGF; +inf where the oracle diverges."""
    pts, single = as_points(lam, oracle.dimension)
    ev = oracle.evaluate(pts)
    return float(ev.values[0]) if single else ev.values


@dataclass
class NormEstimate:
    value: float
    argmax: object = None
    diagnostics: list = field(default_factory=list)
    flags: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)


def default_lambda_grid(d, radius=50.0, n_directions=32, n_radii=16, r_min=1e-2, unit=1.0, seed=0):
    """Directions in the positive orthant times log-spaced radii, divided by ``unit``.

    The sign-orbit max makes the natural function invariant under coordinate
    sign flips, so positive-orthant directions cover every direction class.
    The axes and the diagonal are always included.
    """
    if d == 1:
        dirs = np.ones((1, 1))
    else:
        base = [np.eye(d)[j] for j in range(d)] + [np.ones(d) / math.sqrt(d)]
        extra = max(0, n_directions - len(base))
        rng = np.random.default_rng(seed)
        v = np.abs(rng.standard_normal((extra, d)))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        dirs = np.vstack([np.array(base), v]) if extra else np.array(base)
    radii = np.geomspace(r_min, radius, n_radii)
    return (radii[:, None, None] * dirs[None, :, :]).reshape(-1, d) / unit


def bphi_norm(oracle, phi, lambda_grid=None, tol=1e-3):
    """Smallest tau on the grid with natural(lam) <= phi(tau lam), by geometric bisection."""
    if lambda_grid is None:
        lambda_grid = default_lambda_grid(phi.dimension, phi.truncation_radius, unit=oracle.unit)
    grid = np.asarray(lambda_grid, dtype=float).reshape(-1, phi.dimension)
    ev = oracle.evaluate(grid)
    status = ev.status.copy()
    radii = np.linalg.norm(grid, axis=1)
    innermost = radii <= radii.min() * (1.0 + 1e-9)
    diag = []
    if np.any(innermost & (status == UNRESOLVED)):
        status[innermost & (status == UNRESOLVED)] = DIVERGED
        diag.append("empirical MGF unresolved at the innermost radius")
    flags = {
        "grid_points": int(grid.shape[0]),
        "unresolved": int(np.sum(status == UNRESOLVED)),
        "source": oracle.source,
    }
    if np.any(status == DIVERGED):
        bad = grid[np.argmax(status == DIVERGED)]
        diag.insert(0, KRAMER_VIOLATED)
        flags["divergent_lambda"] = bad.tolist()
        return NormEstimate(math.inf, bad, diag, flags)
    if flags["unresolved"]:
        diag.append(f"{flags['unresolved']} grid points beyond sample resolution skipped")
    use = status == OK
    lam, nat = grid[use], ev.values[use]
    slack = 1e-12 * (1.0 + np.abs(nat))

    def feasible(tau):
        return bool(np.all(nat <= phi._evaluate(tau * lam) + slack))

    lo, hi = bracket_threshold(feasible, oracle.unit)
    if math.isinf(hi):
        diag.append("no tau <= 2^64 dominates the natural function on the grid")
        return NormEstimate(math.inf, None, diag, flags)
    if lo == 0.0:
        return NormEstimate(0.0, None, diag, flags)
    lo, hi = geometric_bisect(feasible, lo, hi, rtol=tol)
    gap = nat - phi._evaluate(hi * lam)
    return NormEstimate(hi, lam[int(np.argmax(gap))], diag, flags)


# ---------------------------------------------------------------- moments

def _log_abs(data):
    with np.errstate(divide="ignore"):
        return np.log(np.abs(data))


def _moment_stats(logabs, r):
    """(log E|xi|^r, log E|xi|^{2r}) from precomputed log|xi|."""
    logy = logabs @ np.asarray(r, dtype=float)
    n = logy.shape[0]
    with np.errstate(invalid="ignore"):
        l1 = logsumexp(logy) - math.log(n)
        l2 = logsumexp(2.0 * logy) - math.log(n)
    return l1, l2


def _check_orders(r, d):
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if r.shape != (d,):
        raise ValueError(f"moment vector must have {d} entries")
    if np.any(r < 1):
        raise ValueError("moment orders must be >= 1")
    return r


def mixed_moment_with_se(samples, r):
    """(|xi|_r, standard error) with |xi|_r = (E prod_j |xi_j|^{r_j})^{1/|r|}, in log space."""
    data = as_data(samples)
    r = _check_orders(r, data.shape[1])
    total = float(r.sum())
    l1, l2 = _moment_stats(_log_abs(data), r)
    if not np.isfinite(l1):
        return 0.0, 0.0
    logval = l1 / total
    if logval > 709:
        raise OverflowError("mixed moment overflows despite log-space evaluation")
    value = math.exp(logval)
    rel_var = max(math.expm1(min(l2 - 2.0 * l1, 700.0)), 0.0)
    se = value * math.sqrt(rel_var / data.shape[0]) / total
    return value, se


def mixed_moment(samples, r):
    return mixed_moment_with_se(samples, r)[0]


def log_psi_weight(phi, r):
    """log psi(r) for one or many moment vectors; returns (values, truncated)."""
    d = phi.dimension
    pts, single = as_points(r, d)
    if np.any(pts < 1):
        raise ValueError("moment orders must be >= 1")
    total = pts.sum(axis=1)
    cap = capital_conjugate(phi, pts)
    cval = np.atleast_1d(cap.value)
    logpsi = -1.0 + d * math.log(2.0) / total + np.sum(pts * np.log(pts), axis=1) / total - cval / total
    trunc = np.atleast_1d(cap.truncated)
    if single:
        return float(logpsi[0]), bool(trunc[0])
    return logpsi, trunc


def psi_weight(phi, r):
    """psi(r) = e^-1 2^{d/|r|} prod r_j^{r_j/|r|} exp(-Phi*(r)/|r|)."""
    lp, _ = log_psi_weight(phi, r)
    return float(np.exp(lp)) if np.ndim(lp) == 0 else np.exp(lp)


def moment_bound(phi, r, norm, d=None):
    """Upper bound psi(r) * norm on |xi|_r for xi with the given B(phi) norm."""
    if norm == 0:
        return 0.0
    return psi_weight(phi, r) * norm


def default_r_grid(d, seed=0):
    if d == 1:
        return np.arange(1, 21, dtype=float)[:, None]
    rng = np.random.default_rng(seed)
    v = rng.uniform(1.0, 3.0, size=(7, d))
    dirs = np.vstack([np.ones(d), v / v.min(axis=1, keepdims=True)])
    return np.vstack([t * dirs for t in (1.0, 2.0, 4.0, 8.0, 16.0)])


def gls_norm(samples, phi, r_grid=None):
    """sup over the r grid of |xi|_r / psi(r), with the argmax r and per-point flags."""
    data = as_data(samples)
    d = data.shape[1]
    if r_grid is None:
        r_grid = default_r_grid(d)
    rs = np.asarray(r_grid, dtype=float).reshape(-1, d)
    if rs.shape[0] == 0 or np.any(rs < 1):
        raise ValueError("r grid must be non-empty with entries >= 1")
    logabs = _log_abs(data)
    logpsi, trunc = log_psi_weight(phi, rs)
    ratios = np.full(rs.shape[0], np.nan)
    moments = np.full(rs.shape[0], np.nan)
    diag, skipped = [], []
    for i, r in enumerate(rs):
        total = r.sum()
        l1, _ = _moment_stats(logabs, r)
        logm = l1 / total
        if not np.isfinite(logm) and logm != -np.inf or logm > 709:
            skipped.append(r.tolist())
            continue
        moments[i] = math.exp(logm) if np.isfinite(logm) else 0.0
        ratios[i] = math.exp(logm - logpsi[i]) if np.isfinite(logm) else 0.0
    if skipped:
        diag.append(f"{len(skipped)} grid points skipped on moment overflow; value is a lower bound")
    high = [r.tolist() for r in rs if r.sum() > HIGH_VARIANCE_ORDER]
    if high:
        diag.append(f"{len(high)} grid points of order > {HIGH_VARIANCE_ORDER} flagged high-variance")
    if np.any(trunc):
        diag.append("Phi* truncated at some grid points")
    ok = np.isfinite(ratios)
    if not ok.any():
        return NormEstimate(math.nan, None, diag + ["no usable grid point"], {})
    i = int(np.nanargmax(ratios))
    flags = {"ratios": ratios.tolist(), "moments": moments.tolist(), "psi": np.exp(logpsi).tolist(),
             "r_grid": rs.tolist(), "high_variance": high, "skipped": skipped,
             "truncated": bool(np.any(trunc))}
    return NormEstimate(float(ratios[i]), rs[i].tolist(), diag, flags)


# ---------------------------------------------------------------- Orlicz

def orlicz_n_function(phi, u):
    """N(u) = exp(phi*(u)) - 1."""
    res = legendre_transform(phi, u)
    return np.expm1(res.value)


def orlicz_norm(samples, phi, tol=1e-3, grid=None):
    """Luxemburg norm inf{c > 0 : mean N(|xi| / c) <= 1} by geometric bisection.

    phi* is read from a ConjugateGrid; its value is +inf beyond the knot box,
    which only makes small c infeasible.
    """
    data = as_data(samples)
    absx = np.abs(data)
    n = absx.shape[0]
    if grid is None:
        grid = ConjugateGrid.build(phi, full=False)
    log2 = math.log(2.0)
    rms = math.sqrt(float(np.mean(absx * absx)))
    if rms == 0:
        return NormEstimate(0.0, None, [], {})

    def feasible(c):
        vals = grid.evaluate(absx / c)
        if not np.all(np.isfinite(vals)):
            return False
        return bool(logsumexp(vals) - math.log(n) <= log2)

    lo, hi = bracket_threshold(feasible, rms)
    diag = []
    if math.isinf(hi):
        return NormEstimate(math.inf, None, [KRAMER_VIOLATED + ": mean of N diverges for every probed c"], {})
    if lo == 0.0:
        return NormEstimate(0.0, None, diag, {})
    lo, hi = geometric_bisect(feasible, lo, hi, rtol=tol)
    vals = grid.evaluate(absx / hi)
    mean_n = math.expm1(logsumexp(vals) - math.log(n))
    reach = float(np.max(absx / hi))
    ok_knots = grid.knots[~_axis_truncated(grid)]
    truncated = reach > (ok_knots.max() if ok_knots.size else 0.0)
    if truncated:
        diag.append("conjugate grid truncated inside the sample range")
    return NormEstimate(hi, None, diag, {"mean_N": mean_n, "truncated": bool(truncated)})


def _axis_truncated(grid):
    """Per knot index: whether any tabulated point with that index on axis 0 was truncated."""
    t = grid.truncated
    if grid.full:
        k = grid.knots.size
        t = np.take(t, np.arange(k - 1, 2 * k - 1), axis=0)
    return t.reshape(t.shape[0], -1).any(axis=1)


# ---------------------------------------------------------------- report

@dataclass
class NormReport:
    bphi_norm: float
    gls_norm: float
    orlicz_norm: float
    ratios: dict
    grids: dict
    diagnostics: dict
    argmax: dict


def _ratio(a, b):
    if b == 0 or not np.isfinite(b) or not np.isfinite(a):
        return math.inf if a != 0 or b == 0 else math.nan
    return a / b


def norm_report(samples, phi, oracle=None, lambda_grid=None, r_grid=None):
    if oracle is None:
        oracle = MGFOracle.empirical(samples)
    d = phi.dimension
    if lambda_grid is None:
        lambda_grid = default_lambda_grid(d, phi.truncation_radius, unit=oracle.unit)
    if r_grid is None:
        r_grid = default_r_grid(d)
    b = bphi_norm(oracle, phi, lambda_grid)
    g = gls_norm(samples, phi, r_grid)
    o = orlicz_norm(samples, phi)
    ratios = {
        "bphi/gls": _ratio(b.value, g.value),
        "bphi/orlicz": _ratio(b.value, o.value),
        "orlicz/gls": _ratio(o.value, g.value),
    }
    def _list(a):
        return None if a is None else np.asarray(a, dtype=float).tolist()

    return NormReport(
        float(b.value), float(g.value), float(o.value), ratios,
        {"lambda": np.asarray(lambda_grid).tolist(), "r": np.asarray(r_grid).tolist()},
        {"bphi": b.diagnostics, "gls": g.diagnostics, "orlicz": o.diagnostics},
        {"bphi_lambda": _list(b.argmax), "gls_r": _list(g.argmax)},
    )
