"""Centered model distributions, seeded samplers and closed-form oracles."""
import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import lapack
from scipy.special import log_ndtr

FAMILIES = (
    "gaussian-with-covariance",
    "rademacher-product",
    "uniform-product",
    "centered-exponential-product",
    "custom-mixture",
)


@dataclass(eq=False)
class DistributionModel:
    """A centered random vector in R^d.

    Parameters by family::

        gaussian-with-covariance      cov: d x d PSD matrix
        rademacher-product            scale: +-scale[j] with probability 1/2
        uniform-product               half_width: uniform on [-a_j, a_j]
        centered-exponential-product  rate: Exp(rate_j) - 1 / rate_j
        custom-mixture                components: list of model configs,
                                      weights, locations (shift vectors);
                                      the mixture mean is subtracted
    """

    family: str
    dimension: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown distribution family {self.family!r}")
        self.dimension = int(self.dimension)
        d = self.dimension
        p = self.params
        if self.family == "gaussian-with-covariance":
            cov = np.atleast_2d(np.asarray(p["cov"], dtype=float))
            if cov.shape != (d, d) or not np.allclose(cov, cov.T):
                raise ValueError("invalid covariance")
            self._cov = cov
        elif self.family == "custom-mixture":
            comps = [c if isinstance(c, DistributionModel) else DistributionModel.from_config(c)
                     for c in p["components"]]
            w = np.asarray(p.get("weights", np.ones(len(comps))), dtype=float)
            loc = np.asarray(p.get("locations", np.zeros((len(comps), d))), dtype=float).reshape(len(comps), d)
            if np.any(w < 0) or w.sum() <= 0 or any(c.dimension != d for c in comps):
                raise ValueError("invalid mixture specification")
            self._components, self._weights, self._locations = comps, w / w.sum(), loc
        else:
            key = {"rademacher-product": "scale", "uniform-product": "half_width",
                   "centered-exponential-product": "rate"}[self.family]
            v = np.broadcast_to(np.asarray(p.get(key, 1.0), dtype=float), (d,)).copy()
            if np.any(v <= 0):
                raise ValueError(f"{key} must be positive")
            self._vec = v

    @classmethod
    def gaussian(cls, cov):
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        return cls("gaussian-with-covariance", cov.shape[0], {"cov": cov.tolist()})

    @classmethod
    def rademacher(cls, dimension=1, scale=1.0):
        return cls("rademacher-product", dimension, {"scale": np.broadcast_to(scale, (dimension,)).tolist()})

    @classmethod
    def uniform(cls, dimension=1, half_width=1.0):
        return cls("uniform-product", dimension, {"half_width": np.broadcast_to(half_width, (dimension,)).tolist()})

    @classmethod
    def centered_exponential(cls, dimension=1, rate=1.0):
        return cls("centered-exponential-product", dimension, {"rate": np.broadcast_to(rate, (dimension,)).tolist()})

    @classmethod
    def mixture(cls, components, weights=None, locations=None):
        d = components[0].dimension
        params = {"components": [c.to_config() for c in components]}
        if weights is not None:
            params["weights"] = list(map(float, weights))
        if locations is not None:
            params["locations"] = np.asarray(locations, dtype=float).reshape(len(components), d).tolist()
        return cls("custom-mixture", d, params)

    @property
    def independent(self):
        if self.family == "custom-mixture":
            return False
        if self.family == "gaussian-with-covariance":
            return bool(np.allclose(self._cov, np.diag(np.diag(self._cov))))
        return True

    @property
    def covariance(self):
        fam = self.family
        if fam == "gaussian-with-covariance":
            return self._cov.copy()
        if fam == "rademacher-product":
            return np.diag(self._vec ** 2)
        if fam == "uniform-product":
            return np.diag(self._vec ** 2 / 3.0)
        if fam == "centered-exponential-product":
            return np.diag(1.0 / self._vec ** 2)
        mean = self._weights @ self._locations
        cov = np.zeros((self.dimension, self.dimension))
        for w, c, loc in zip(self._weights, self._components, self._locations):
            dev = loc - mean
            cov += w * (c.covariance + np.outer(dev, dev))
        return cov

    def to_config(self):
        return {"schema_version": 1, "kind": "distribution", "family": self.family,
                "dimension": self.dimension, "params": _plain(self.params)}

    @classmethod
    def from_config(cls, cfg):
        if cfg.get("kind", "distribution") != "distribution":
            raise ValueError(f"config kind {cfg.get('kind')!r} is not a distribution")
        return cls(cfg["family"], cfg["dimension"], dict(cfg.get("params", {})))


def _plain(obj):
    if isinstance(obj, DistributionModel):
        return obj.to_config()
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


@dataclass(eq=False)
class SampleSet:
    data: np.ndarray
    seed: Optional[int] = None
    model: Optional[DistributionModel] = None

    def __post_init__(self):
        self.data = np.atleast_2d(np.asarray(self.data, dtype=float))
        if self.data.shape[0] < 1:
            raise ValueError("a sample set needs at least one row")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("sample entries must be finite")

    @property
    def n(self):
        return self.data.shape[0]

    @property
    def dimension(self):
        return self.data.shape[1]

    def scaled(self, c):
        return SampleSet(self.data * c, self.seed, None)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{j + 1}" for j in range(self.dimension)])
            for row in self.data:
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path, seed=None):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header = rows[0]
        if not all(h == f"x{j + 1}" for j, h in enumerate(header)):
            raise ValueError("CSV header must be x1..xd")
        return cls(np.array([[float(v) for v in r] for r in rows[1:]]), seed)


def as_data(samples):
    """The (n, d) array behind a SampleSet or anything array-like."""
    if isinstance(samples, SampleSet):
        return samples.data
    arr = np.asarray(samples, dtype=float)
    return arr.reshape(-1, 1) if arr.ndim == 1 else np.atleast_2d(arr)


def _streams(seed, k):
    """Independent Philox substreams spawned from one 64-bit seed."""
    children = np.random.SeedSequence(int(seed) % (1 << 64)).spawn(k)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def covariance_factor(cov):
    """F with F F^T = cov; pivoted Cholesky when cov is only semi-definite."""
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    w = np.linalg.eigvalsh(cov)
    if w.min() < -1e-10 * max(1.0, abs(w).max()):
        raise ValueError("invalid covariance")
    c, piv, rank, info = lapack.dpstrf(cov, lower=1, tol=-1.0)
    if info < 0:
        raise ValueError("invalid covariance")
    L = np.tril(c)
    L[:, rank:] = 0.0
    F = np.zeros_like(L)
    F[piv - 1] = L
    return F


def sample(model, n, seed):
    """Draw n i.i.d. rows of ``model``; identical (model, n, seed) give identical data."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be at least 1")
    d = model.dimension
    fam = model.family
    gens = _streams(seed, d + 1)
    if fam == "gaussian-with-covariance":
        F = covariance_factor(model._cov)
        z = np.column_stack([g.standard_normal(n) for g in gens[:d]])
        data = z @ F.T
    elif fam == "rademacher-product":
        data = np.column_stack([np.where(g.random(n) < 0.5, -1.0, 1.0) for g in gens[:d]]) * model._vec
    elif fam == "uniform-product":
        data = np.column_stack([g.uniform(-1.0, 1.0, n) for g in gens[:d]]) * model._vec
    elif fam == "centered-exponential-product":
        data = (np.column_stack([g.standard_exponential(n) for g in gens[:d]]) - 1.0) / model._vec
    else:
        k = len(model._components)
        which = gens[d].choice(k, size=n, p=model._weights)
        mean = model._weights @ model._locations
        data = np.empty((n, d))
        sub_seeds = gens[d].integers(0, 2 ** 63, size=k)
        for i, comp in enumerate(model._components):
            rows = which == i
            cnt = int(rows.sum())
            if cnt:
                data[rows] = sample(comp, cnt, sub_seeds[i]).data + model._locations[i] - mean
    return SampleSet(data, int(seed), model)


def _log_cosh(z):
    a = np.abs(z)
    return a + np.log1p(np.exp(-2.0 * a)) - np.log(2.0)


def _log_sinhc(z):
    a = np.abs(z)
    small = a < 1e-4
    with np.errstate(divide="ignore", invalid="ignore"):
        big = a + np.log1p(-np.exp(-2.0 * a)) - np.log(2.0) - np.log(a)
    return np.where(small, a * a / 6.0, big)


def analytic_log_mgf(model, lam):
    """log E exp((lam, xi)); +inf beyond the Kramer boundary."""
    d = model.dimension
    lam = np.asarray(lam, dtype=float)
    single = lam.ndim == 1 and lam.shape[0] == d or lam.ndim == 0
    pts = lam.reshape(-1, d)
    fam = model.family
    if fam == "gaussian-with-covariance":
        out = 0.5 * np.einsum("mi,ij,mj->m", pts, model._cov, pts)
    elif fam == "rademacher-product":
        out = _log_cosh(pts * model._vec).sum(axis=1)
    elif fam == "uniform-product":
        out = _log_sinhc(pts * model._vec).sum(axis=1)
    elif fam == "centered-exponential-product":
        u = pts / model._vec
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(u < 1.0, -u - np.log1p(-np.minimum(u, 1.0)), np.inf)
        out = terms.sum(axis=1)
    else:
        raise ValueError("no analytic oracle")
    return float(out[0]) if single else out


def analytic_mgf(model, lam):
    return np.exp(analytic_log_mgf(model, lam))


def _marginal_tails(model, x):
    """(P(xi_j > x_j), P(-xi_j > x_j)) for each coordinate."""
    fam = model.family
    if fam == "gaussian-with-covariance":
        sd = np.sqrt(np.diag(model._cov))
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(sd > 0, x / np.where(sd > 0, sd, 1.0), np.where(x >= 0, np.inf, -np.inf))
        up = np.exp(log_ndtr(-z))
        return up, up
    if fam == "rademacher-product":
        up = np.where(x < model._vec, 0.5, 0.0)
        return up, up
    if fam == "uniform-product":
        a = model._vec
        up = np.clip((a - x) / (2.0 * a), 0.0, 1.0)
        return up, up
    if fam == "centered-exponential-product":
        r = model._vec
        up = np.minimum(1.0, np.exp(-r * x - 1.0))
        down = np.where(x < 1.0 / r, -np.expm1(-(1.0 - r * x)), 0.0)
        return up, down
    raise ValueError("no analytic oracle")


def analytic_tail(model, x):
    """Exact U(xi, x) = max over sign vectors of P(eps_j xi_j > x_j for all j)."""
    if not model.independent:
        raise ValueError("no analytic oracle")
    x = np.asarray(x, dtype=float).reshape(model.dimension)
    if np.any(x < 0):
        raise ValueError("tail queries must be non-negative")
    up, down = _marginal_tails(model, x)
    # independent factors: the best sign pattern is coordinate-wise
    return float(np.prod(np.maximum(up, down)))
