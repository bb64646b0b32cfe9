"""Numerical Young-Fenchel (Legendre) conjugation.

For a convex phi the inner objective ``(x, y) - phi(x)`` is concave, so a
local maximiser is global. In one dimension the sup is taken by
golden-section search over ``[-R, R]``; in higher dimension by batched
projected gradient ascent from several starts inside the box ``[-R, R]^d``.
The search box is the truncation: when the maximiser touches its boundary
the true conjugate may be larger and the result carries a truncation flag.

Non-finite values use IEEE ``inf`` as the extended-real +infinity.
"""
import csv
from dataclasses import dataclass
import math

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ._optim import golden_max, projected_ascent
from .young import YoungFunction, as_points, _numeric_gradient

DEFAULT_TOL = 1e-10
MU_FLOOR = -40.0


@dataclass
class ConjugateValue:
    value: object
    truncated: object
    argmax: np.ndarray

    def __float__(self):
        return float(self.value)


def _evaluator(f):
    if isinstance(f, YoungFunction):
        return f._evaluate
    return f.evaluate


def _gradient_fn(f):
    if isinstance(f, YoungFunction):
        if f.has_gradient():
            return f._gradient
        return lambda pts: _numeric_gradient(f, pts)
    return f.gradient


def _starts(d, radius, n_starts):
    starts = [np.zeros(d)]
    for j in range(d):
        for s in (1.0, -1.0):
            e = np.zeros(d)
            e[j] = s * 0.5 * radius
            starts.append(e)
    return np.array(starts[: max(1, n_starts)])


def legendre_transform(f, y, radius=None, tol=DEFAULT_TOL, n_starts=8):
    """Conjugate ``sup_{|x_j| <= R} (x, y) - f(x)`` at one point or a batch.

    ``f`` may be a YoungFunction, a ConjugateGrid or any object exposing
    ``dimension``, ``truncation_radius``, ``evaluate`` and ``gradient``
    (such as :class:`Conjugate`). Tabulated inputs are handled exactly by a
    maximum over their knots.
    """
    d = f.dimension
    if radius is None:
        radius = f.truncation_radius
    radius = float(radius)
    if not radius > 0:
        raise ValueError("search radius must be positive")
    pts, single = as_points(y, d)
    if not np.all(np.isfinite(pts)):
        raise ValueError("conjugate argument must be finite")

    if isinstance(f, ConjugateGrid) or (isinstance(f, YoungFunction) and f.family == "custom-tabulated"):
        value, trunc, arg = _knot_sup(f, pts, radius)
    elif d == 1:
        value, trunc, arg = _sup_1d(f, pts, radius, tol)
    else:
        value, trunc, arg = _sup_nd(f, pts, radius, tol, n_starts)
    if not isinstance(f, ConjugateGrid):
        value, trunc, arg = _origin_candidate(f, value, trunc, arg)
    if single:
        return ConjugateValue(float(value[0]), bool(trunc[0]), arg[0])
    return ConjugateValue(value, trunc, arg)


def _origin_candidate(f, value, trunc, arg):
    """x = 0 gives -f(0) for every y; keep it when the search ends below it."""
    with np.errstate(all="ignore"):
        f0 = float(_evaluator(f)(np.zeros((1, f.dimension)))[0])
    if not np.isfinite(f0):
        return value, trunc, arg
    better = value < -f0
    if np.any(better):
        value = np.where(better, -f0, value)
        trunc = np.where(better, False, trunc)
        arg = np.where(better[:, None], 0.0, arg)
    return value, trunc, arg


def _empty_domain_check(values):
    if not np.any(np.isfinite(values)):
        raise ValueError("empty effective domain")


def _sup_1d(f, pts, radius, tol):
    ev = _evaluator(f)
    yv = pts[:, 0]
    probe = np.linspace(-radius, radius, 65)[:, None]
    with np.errstate(all="ignore"):
        _empty_domain_check(ev(probe))

    def obj(x):
        with np.errstate(all="ignore"):
            return x * yv - ev(x[:, None])

    m = yv.shape[0]
    xs, fs = golden_max(obj, np.full(m, -radius), np.full(m, radius), xtol=1e-12)
    trunc = np.abs(xs) >= radius * (1.0 - 1e-6)
    return fs, trunc, xs[:, None]


def _sup_nd(f, pts, radius, tol, n_starts):
    d = f.dimension
    ev = _evaluator(f)
    gr = _gradient_fn(f)
    starts = _starts(d, radius, n_starts)
    with np.errstate(all="ignore"):
        _empty_domain_check(ev(np.vstack([starts, 0.99 * radius * np.vstack([np.eye(d), -np.eye(d)])])))
    m, k = pts.shape[0], starts.shape[0]
    yy = np.repeat(pts, k, axis=0)
    x0 = np.tile(starts, (m, 1))

    def obj(x, rows):
        with np.errstate(all="ignore"):
            return np.sum(x * yy[rows], axis=1) - ev(x)

    def grad(x, rows):
        with np.errstate(all="ignore"):
            return yy[rows] - gr(x)

    lo, hi = np.full(d, -radius), np.full(d, radius)
    x, fx = projected_ascent(obj, grad, x0, lo, hi, gtol=tol)
    fx = fx.reshape(m, k)
    best = np.argmax(fx, axis=1)
    xb = x[np.arange(m) * k + best]
    val = fx[np.arange(m), best]
    if not np.all(np.isfinite(val)):
        raise ValueError("empty effective domain")
    trunc = np.any(np.abs(xb) >= radius * (1.0 - 1e-6), axis=1)
    return val, trunc, xb


def _knot_sup(f, pts, radius):
    """Exact sup for multilinear tabulations: the maximum sits at a knot."""
    if isinstance(f, ConjugateGrid):
        axes = [f.signed_knots()] * f.dimension
        values = f.full_values()
    else:
        axes, values = f._axes, f._values
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, f.dimension)
    vals = values.reshape(-1)
    keep = np.all(np.abs(mesh) <= radius, axis=1) & np.isfinite(vals)
    if not keep.any():
        raise ValueError("empty effective domain")
    mesh, vals = mesh[keep], vals[keep]
    out = np.empty(pts.shape[0])
    arg = np.empty_like(pts)
    for start in range(0, pts.shape[0], 256):
        blk = pts[start:start + 256]
        obj = blk @ mesh.T - vals[None, :]
        i = np.argmax(obj, axis=1)
        out[start:start + 256] = obj[np.arange(blk.shape[0]), i]
        arg[start:start + 256] = mesh[i]
    bound = np.array([np.max(np.abs(a[np.abs(a) <= radius])) for a in axes])
    trunc = np.any(np.abs(arg) >= bound * (1.0 - 1e-12), axis=1)
    return out, trunc, arg


class Conjugate:
    """Lazily evaluated conjugate f*; gradients come from the inner argmax."""

    def __init__(self, f, radius=None, tol=DEFAULT_TOL, n_starts=1):
        self.base = f
        self.dimension = f.dimension
        self.truncation_radius = float(radius if radius is not None else f.truncation_radius)
        self.tol = tol
        self.n_starts = n_starts
        self._last = None

    def transform(self, pts):
        res = legendre_transform(self.base, pts, self.truncation_radius, self.tol, self.n_starts)
        self._last = res
        return res

    def evaluate(self, pts):
        return self.transform(pts).value

    def gradient(self, pts):
        return self.transform(pts).argmax

    def __call__(self, y):
        pts, single = as_points(y, self.dimension)
        v = self.evaluate(pts)
        return float(v[0]) if single else v


@dataclass
class ResidualReport:
    residual: float
    truncated: bool
    worst_point: np.ndarray
    violations: list

    @property
    def qualifier(self):
        return "truncated" if self.truncated else ""


def double_conjugate_residual(f, probe_points, radius=None, tol=DEFAULT_TOL, probe_radii=None):
    """max over probes of |f**(lam) - f(lam)| through two chained transforms.

    Young-function violations found by the validator are carried in the
    report rather than raised; the residual is still computed.
    """
    from .young import validate_young_function

    pts, _ = as_points(probe_points, f.dimension)
    R = float(radius if radius is not None else f.truncation_radius)
    if probe_radii is None:
        probe_radii = [0.5, 2.0, R]
    violations = validate_young_function(f, probe_radii) if isinstance(f, YoungFunction) and f.family != "custom-tabulated" else []
    star = Conjugate(f, R, tol)
    outer = legendre_transform(star, pts, R, tol, n_starts=1)
    # truncation of the inner transform matters only at the outer maximiser
    inner_at_arg = legendre_transform(f, outer.argmax, R, tol, n_starts=1)
    truncated = bool(np.any(outer.truncated) or np.any(inner_at_arg.truncated))
    with np.errstate(all="ignore"):
        base = _evaluator(f)(pts)
    diff = np.abs(outer.value - base)
    i = int(np.argmax(diff))
    return ResidualReport(float(diff[i]), truncated, pts[i], violations)


def phi_capital(f, mu, radius=None, tol=DEFAULT_TOL):
    """Phi(mu) = phi*(exp(mu)) with coordinate-wise exponential."""
    pts, single = as_points(mu, f.dimension)
    res = legendre_transform(f, np.exp(pts), radius, tol, n_starts=1)
    if single:
        return ConjugateValue(float(res.value[0]), bool(res.truncated[0]), res.argmax[0])
    return res


def capital_conjugate(f, r, radius=None, tol=DEFAULT_TOL):
    """Phi*(r) = sup_mu (r, mu) - phi*(exp(mu)) for r with positive entries.

    The mu-search box is ``[MU_FLOOR, log R]^d`` so that exp(mu) stays inside
    the truncation box of the inner conjugate.
    """
    d = f.dimension
    R = float(radius if radius is not None else f.truncation_radius)
    pts, single = as_points(r, d)
    mu_hi = math.log(R)
    if d == 1:
        rv = pts[:, 0]

        def obj(mu):
            return rv * mu - legendre_transform(f, np.exp(mu)[:, None], R, tol).value

        m = rv.shape[0]
        mu, val = golden_max(obj, np.full(m, MU_FLOOR), np.full(m, mu_hi), xtol=1e-11)
        mu = mu[:, None]
    else:
        def fun(mt, rows):
            res = legendre_transform(f, np.exp(mt), R, tol, n_starts=1)
            return np.sum(pts[rows] * mt, axis=1) - res.value

        def gfun(mt, rows):
            e = np.exp(mt)
            res = legendre_transform(f, e, R, tol, n_starts=1)
            return pts[rows] - res.argmax * e

        # start at log(r)/2, the optimum for the standard quadratic
        x0 = np.clip(0.5 * np.log(pts), MU_FLOOR, mu_hi)
        mu, val = projected_ascent(fun, gfun, x0, np.full(d, MU_FLOOR), np.full(d, mu_hi), gtol=tol)
    inner_res = legendre_transform(f, np.exp(mu), R, tol, n_starts=1)
    trunc = np.any(mu >= mu_hi - 1e-9, axis=1) | np.asarray(inner_res.truncated)
    if single:
        return ConjugateValue(float(val[0]), bool(trunc[0]), mu[0])
    return ConjugateValue(val, trunc, mu)


class ConjugateGrid:
    """phi* tabulated on log-spaced knots with multilinear interpolation in log coordinates.

    Knots on each non-negative half-axis are ``offset * (exp(t_k) - 1)`` with
    ``t_k`` uniform on ``[0, log(1 + R / offset)]``; interpolation is
    multilinear in the coordinates ``t = sign(x) log(1 + |x| / offset)``.
    A half grid (``full=False``) tabulates the non-negative orthant only and
    evaluates at ``|x|``, which is exact for conjugates invariant under
    coordinate sign flips (diagonal quadratics, radial functions) and is all
    that is needed for arguments that are already non-negative. Outside the
    knot box the value is +inf.
    """

    def __init__(self, knots, values, truncated, dimension, offset, radius, full):
        self.knots = np.asarray(knots, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.truncated = np.asarray(truncated, dtype=bool)
        self.dimension = dimension
        self.offset = float(offset)
        self.radius = float(radius)
        self.truncation_radius = float(self.knots[-1])
        self.full = bool(full)
        t = self._t(self.axis_knots())
        if dimension == 1:
            self._t_axis = t
        else:
            self._interp = RegularGridInterpolator([t] * dimension, self.values,
                                                   bounds_error=False, fill_value=np.inf)

    @staticmethod
    def default_knots(radius, n_knots, offset):
        t = np.linspace(0.0, math.log1p(radius / offset), n_knots)
        k = offset * np.expm1(t)
        k[-1] = radius
        return k

    @classmethod
    def build(cls, f, n_knots=None, radius=None, offset=0.05, full=None, tol=DEFAULT_TOL):
        d = f.dimension
        R = float(radius if radius is not None else f.truncation_radius)
        if n_knots is None:
            n_knots = 64 if d <= 2 else 24
        if full is None:
            full = d == 1
        knots = cls.default_knots(R, n_knots, offset)
        axis = np.concatenate([-knots[:0:-1], knots]) if full else knots
        mesh = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
        # the search box must contain the maximisers for every knot; for the
        # grid itself the truncation flag records where that failed
        res = legendre_transform(f, mesh, R, tol, n_starts=1 if d == 1 else 2 * d + 1)
        shape = (axis.size,) * d
        return cls(knots, res.value.reshape(shape), np.asarray(res.truncated).reshape(shape),
                   d, offset, R, full)

    def _t(self, x):
        return np.sign(x) * np.log1p(np.abs(x) / self.offset)

    def axis_knots(self):
        k = self.knots
        return np.concatenate([-k[:0:-1], k]) if self.full else k

    def signed_knots(self):
        k = self.knots
        return np.concatenate([-k[:0:-1], k])

    def full_values(self):
        if self.full:
            return self.values
        v = self.values
        for ax in range(self.dimension):
            mirror = np.flip(np.take(v, np.arange(1, v.shape[ax]), axis=ax), axis=ax)
            v = np.concatenate([mirror, v], axis=ax)
        return v

    def evaluate(self, pts):
        pts = np.asarray(pts, dtype=float)
        if not self.full:
            pts = np.abs(pts)
        t = self._t(pts)
        if self.dimension == 1:
            return np.interp(t[:, 0], self._t_axis, self.values, left=np.inf, right=np.inf)
        return self._interp(t)

    def gradient(self, pts):
        return _numeric_gradient(self, pts)

    def _evaluate(self, pts):
        return self.evaluate(pts)

    def __call__(self, x):
        pts, single = as_points(x, self.dimension)
        v = self.evaluate(pts)
        return float(v[0]) if single else v

    @property
    def any_truncated(self):
        return bool(self.truncated.any())

    def to_csv(self, path):
        axis = self.axis_knots()
        mesh = np.stack(np.meshgrid(*([axis] * self.dimension), indexing="ij"), axis=-1).reshape(-1, self.dimension)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{j + 1}" for j in range(self.dimension)] + ["value", "truncated"])
            for p, v, t in zip(mesh, self.values.reshape(-1), self.truncated.reshape(-1)):
                w.writerow([repr(float(c)) for c in p] + [repr(float(v)), int(t)])

    @classmethod
    def from_csv(cls, path, offset=0.05):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        d = len(header) - 2
        data = np.array([[float(c) for c in r] for r in body])
        axis = np.unique(data[:, 0])
        full = axis.min() < 0
        knots = axis[axis >= 0]
        shape = (axis.size,) * d
        return cls(knots, data[:, d].reshape(shape), data[:, d + 1].astype(bool).reshape(shape),
                   d, offset, knots[-1], full)
