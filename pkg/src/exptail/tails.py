"""Orthant tail functions and the exponential tail bounds built on phi*."""
from dataclasses import dataclass

import numpy as np

from .conjugate import legendre_transform
from .distributions import as_data

MAX_ORBIT_DIM = 25
Z95 = 1.959963984540054
BLOCK_ROWS = 1 << 18


@dataclass
class TailEstimate:
    x: np.ndarray
    value: float
    half_width: float
    argmax_orbit: tuple
    n: int

    @property
    def se(self):
        return float(np.sqrt(self.value * (1.0 - self.value) / self.n))


@dataclass
class TailBound:
    value: object
    possibly_loose: object

    def __float__(self):
        return float(self.value)


@dataclass
class BoundCurve:
    queries: np.ndarray
    values: np.ndarray
    scale: float
    possibly_loose: np.ndarray


def wilson_half_width(p, n, z=Z95):
    """Half-width of the Wilson score interval."""
    denom = 1.0 + z * z / n
    return float(z / denom * np.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)))


def orbit_counts(data, x):
    """Counts of rows in each sign orbit {eps_j xi_j > x_j for all j}.

    Orbit index bit j is set when eps_j = -1. With x >= 0 a row falls in at
    most one orbit, so all 2^d counts come from one pass.
    """
    data = as_data(data)
    d = data.shape[1]
    if d > MAX_ORBIT_DIM:
        raise ValueError("sign-orbit enumeration cap exceeded")
    x = np.asarray(x, dtype=float).reshape(d)
    weights = 1 << np.arange(d)
    counts = np.zeros(1 << d, dtype=np.int64)
    for start in range(0, data.shape[0], BLOCK_ROWS):
        blk = data[start:start + BLOCK_ROWS]
        pos = blk > x
        neg = -blk > x
        hit = np.all(pos | neg, axis=1)
        code = neg[hit].astype(np.int64) @ weights
        counts += np.bincount(code, minlength=1 << d)
    return counts


def _orbit_signs(index, d):
    return tuple(-1 if (index >> j) & 1 else 1 for j in range(d))


def empirical_tail(samples, x):
    """Empirical U(xi, x) with a 95% Wilson half-width."""
    data = as_data(samples)
    n, d = data.shape
    x = np.asarray(x, dtype=float).reshape(d)
    if np.any(x < 0):
        raise ValueError("tail queries must be non-negative")
    counts = orbit_counts(data, x)
    best = int(np.argmax(counts))
    p = counts[best] / n
    return TailEstimate(x, float(p), wilson_half_width(p, n), _orbit_signs(best, d), n)


def _conjugate_batch(phi, pts):
    res = legendre_transform(phi, pts)
    return np.asarray(res.value, dtype=float), np.asarray(res.truncated, dtype=bool)


def chernov_bound(phi, x, scale=1.0):
    """min(1, exp(-phi*(x / scale))) for one query or a batch of queries.

    A truncated conjugate under-estimates phi*, so the bound stays valid and
    is only marked possibly loose.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1 and x.size == phi.dimension
    pts = x.reshape(-1, phi.dimension)
    if np.any(pts < 0):
        raise ValueError("tail queries must be non-negative")
    val, trunc = _conjugate_batch(phi, pts / scale)
    bound = np.minimum(1.0, np.exp(-val))
    if single:
        return TailBound(float(bound[0]), bool(trunc[0]))
    return TailBound(bound, trunc)


def bound_curve(phi, queries, scale=1.0):
    q = np.asarray(queries, dtype=float).reshape(-1, phi.dimension)
    b = chernov_bound(phi, q, scale)
    return BoundCurve(q, np.atleast_1d(b.value), float(scale), np.atleast_1d(b.possibly_loose))


def min_coordinate_bound(phi, norm, y, d=None):
    """Bound on P(min_j |xi_j| > y) by 2^d exp(-phi*(y/norm, ..., y/norm))."""
    d = phi.dimension if d is None else int(d)
    if not (y > 0 and norm > 0):
        raise ValueError("y and norm must be positive")
    res = legendre_transform(phi, np.full(d, y / norm))
    return TailBound(float(min(1.0, 2.0 ** d * np.exp(-res.value))), bool(res.truncated))


def subgaussian_bound(B, norm, K, x):
    """min(1, exp(-0.5 (B^-1 x, x) / (K norm^2)))."""
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if not (norm > 0 and K > 0):
        raise ValueError("norm and K must be positive")
    x = np.asarray(x, dtype=float)
    pts = x.reshape(-1, B.shape[0])
    if np.linalg.cond(B) > 1e14:
        raise ValueError("matrix not invertible")
    try:
        sol = np.linalg.solve(B, pts.T).T
    except np.linalg.LinAlgError:
        raise ValueError("matrix not invertible") from None
    q = np.sum(sol * pts, axis=1)
    out = np.minimum(1.0, np.exp(-0.5 * q / (K * norm * norm)))
    return float(out[0]) if x.ndim <= 1 and x.size == B.shape[0] else out
