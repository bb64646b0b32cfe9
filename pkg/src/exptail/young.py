"""Young-Orlicz generating functions and their structural checks."""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

FAMILIES = (
    "quadratic-matrix",
    "power-beta",
    "power-with-slowly-varying",
    "custom-tabulated",
    "custom-callable",
)
DEFAULT_TRUNCATION_RADIUS = 50.0


def as_points(lam, dimension):
    """Return ``lam`` as an (m, d) array plus a flag telling whether it was a single point."""
    arr = np.asarray(lam, dtype=float)
    if dimension == 1 and arr.ndim == 0:
        return arr.reshape(1, 1), True
    if arr.ndim == 1 and arr.shape[0] == dimension:
        return arr.reshape(1, dimension), True
    if dimension == 1 and arr.ndim == 1:
        return arr.reshape(-1, 1), False
    if arr.ndim != 2 or arr.shape[1] != dimension:
        raise ValueError(f"expected points of dimension {dimension}, got shape {arr.shape}")
    return arr, False


@dataclass(eq=False)
class YoungFunction:
    """Even convex generating function phi on R^d with family metadata.

    Shipped families::

        quadratic-matrix           0.5 (B lam, lam)
        power-beta                 |lam|^beta / beta          (radial)
        power-with-slowly-varying  |lam|^beta log(e + |lam|)^alpha / beta
        custom-tabulated           multilinear interpolation of knot values,
                                   +inf outside the knot box
        custom-callable            user supplied vectorised callable

    Evaluation accepts a single point of shape (d,) or a batch (m, d).
    """

    family: str
    dimension: int
    params: dict = field(default_factory=dict)
    truncation_radius: float = DEFAULT_TRUNCATION_RADIUS
    domain: str = "full"
    fn: Optional[Callable] = field(default=None, repr=False)
    grad: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown Young function family {self.family!r}")
        if int(self.dimension) < 1:
            raise ValueError("dimension must be a positive integer")
        self.dimension = int(self.dimension)
        if self.domain != "full":
            raise ValueError(
                "bounded effective domain not supported: only phi finite on all of R^d is accepted"
            )
        if not self.truncation_radius > 0:
            raise ValueError("truncation radius must be positive")
        p = self.params
        if self.family == "quadratic-matrix":
            B = np.atleast_2d(np.asarray(p["B"], dtype=float))
            if B.shape != (self.dimension, self.dimension):
                raise ValueError("B must be a d x d matrix")
            if not np.allclose(B, B.T):
                raise ValueError("B must be symmetric")
            if np.linalg.eigvalsh(B).min() <= 0:
                raise ValueError("B must be positive definite")
            self._B = B
        elif self.family in ("power-beta", "power-with-slowly-varying"):
            if not float(p["beta"]) > 1:
                raise ValueError("power families need beta > 1")
            if self.family == "power-with-slowly-varying" and float(p.get("alpha", 1.0)) < 0:
                raise ValueError("alpha must be non-negative")
        elif self.family == "custom-tabulated":
            axes = [np.asarray(a, dtype=float) for a in p["axes"]]
            values = np.asarray(p["values"], dtype=float)
            if len(axes) != self.dimension or values.shape != tuple(len(a) for a in axes):
                raise ValueError("tabulated values do not match the axes")
            self._axes, self._values = axes, values
            if self.dimension > 1:
                self._interp = RegularGridInterpolator(
                    axes, values, bounds_error=False, fill_value=np.inf
                )
        elif self.family == "custom-callable":
            if self.fn is None:
                raise ValueError("custom-callable family needs fn")

    # constructors -----------------------------------------------------

    @classmethod
    def quadratic(cls, B, truncation_radius=DEFAULT_TRUNCATION_RADIUS):
        B = np.atleast_2d(np.asarray(B, dtype=float))
        return cls("quadratic-matrix", B.shape[0], {"B": B.tolist()}, truncation_radius)

    @classmethod
    def power(cls, beta, dimension=1, truncation_radius=DEFAULT_TRUNCATION_RADIUS):
        return cls("power-beta", dimension, {"beta": float(beta)}, truncation_radius)

    @classmethod
    def slowly_varying(cls, beta, alpha=1.0, dimension=1, truncation_radius=DEFAULT_TRUNCATION_RADIUS):
        return cls("power-with-slowly-varying", dimension,
                   {"beta": float(beta), "alpha": float(alpha)}, truncation_radius)

    @classmethod
    def tabulated(cls, axes, values, truncation_radius=DEFAULT_TRUNCATION_RADIUS):
        axes = [np.asarray(a, dtype=float).tolist() for a in axes]
        values = np.asarray(values, dtype=float)
        return cls("custom-tabulated", len(axes),
                   {"axes": axes, "values": values.tolist()}, truncation_radius)

    @classmethod
    def from_callable(cls, fn, dimension, grad=None, truncation_radius=DEFAULT_TRUNCATION_RADIUS, name=""):
        return cls("custom-callable", dimension, {"name": name}, truncation_radius, fn=fn, grad=grad)

    # evaluation -------------------------------------------------------

    def __call__(self, lam):
        pts, single = as_points(lam, self.dimension)
        out = self._evaluate(pts)
        return float(out[0]) if single else out

    def _evaluate(self, pts):
        fam = self.family
        if fam == "quadratic-matrix":
            return 0.5 * np.einsum("mi,ij,mj->m", pts, self._B, pts)
        if fam in ("power-beta", "power-with-slowly-varying"):
            beta = float(self.params["beta"])
            r = np.linalg.norm(pts, axis=1)
            out = r ** beta / beta
            if fam == "power-with-slowly-varying":
                out = out * np.log(np.e + r) ** float(self.params.get("alpha", 1.0))
            return out
        if fam == "custom-tabulated":
            if self.dimension == 1:
                ax = self._axes[0]
                return np.interp(pts[:, 0], ax, self._values, left=np.inf, right=np.inf)
            return self._interp(pts)
        out = np.asarray(self.fn(pts), dtype=float)
        if out.shape != (pts.shape[0],):
            out = np.array([float(self.fn(p)) for p in pts])
        return out

    def gradient(self, lam):
        """Analytic gradient, or ``None`` when the family has no closed form."""
        pts, single = as_points(lam, self.dimension)
        out = self._gradient(pts)
        if out is None:
            return None
        return out[0] if single else out

    def has_gradient(self):
        return self.family in ("quadratic-matrix", "power-beta", "power-with-slowly-varying") or (
            self.family == "custom-callable" and self.grad is not None
        )

    def _gradient(self, pts):
        fam = self.family
        if fam == "quadratic-matrix":
            return pts @ self._B
        if fam in ("power-beta", "power-with-slowly-varying"):
            beta = float(self.params["beta"])
            r = np.linalg.norm(pts, axis=1)
            with np.errstate(divide="ignore", invalid="ignore"):
                if fam == "power-beta":
                    radial = r ** (beta - 1.0)
                else:
                    alpha = float(self.params.get("alpha", 1.0))
                    ell = np.log(np.e + r)
                    radial = r ** (beta - 1.0) * ell ** alpha + r ** beta * alpha * ell ** (alpha - 1.0) / ((np.e + r) * beta)
                scale = np.where(r > 0, radial / r, 0.0)
            return scale[:, None] * pts
        if fam == "custom-callable" and self.grad is not None:
            return np.asarray(self.grad(pts), dtype=float).reshape(pts.shape)
        return None

    def unit_scale(self):
        """Largest value of phi on the signed coordinate vectors."""
        eye = np.eye(self.dimension)
        vals = self._evaluate(np.vstack([eye, -eye]))
        vals = vals[np.isfinite(vals)]
        return float(np.max(np.abs(vals))) if vals.size else 0.0

    def scaled(self, c):
        """The function lam -> phi(c lam)."""
        base = self
        c = float(c)

        def fn(pts):
            return base._evaluate(c * pts)

        grad = None
        if self.has_gradient():
            def grad(pts):
                return c * base._gradient(c * pts)

        return YoungFunction.from_callable(fn, self.dimension, grad=grad,
                                           truncation_radius=self.truncation_radius,
                                           name=f"scaled({c})")

    def to_config(self):
        if self.family == "custom-callable":
            raise ValueError("custom-callable Young functions are not serialisable")
        return {
            "schema_version": 1,
            "kind": "young_function",
            "family": self.family,
            "dimension": self.dimension,
            "params": _jsonable(self.params),
            "truncation_radius": self.truncation_radius,
        }

    @classmethod
    def from_config(cls, cfg):
        if cfg.get("kind", "young_function") != "young_function":
            raise ValueError(f"config kind {cfg.get('kind')!r} is not a Young function")
        return cls(cfg["family"], cfg["dimension"], dict(cfg.get("params", {})),
                   float(cfg.get("truncation_radius", DEFAULT_TRUNCATION_RADIUS)),
                   domain=cfg.get("domain", "full"))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


@dataclass
class MatrixD:
    """Half the Hessian of phi at the origin."""

    entries: np.ndarray
    degenerate: bool

    @property
    def full_hessian(self):
        return 2.0 * self.entries


def hessian_at_zero(f, h=None, degenerate_tol=1e-6):
    """Central-difference estimate of D = Hessian(phi)(0) / 2."""
    d = f.dimension
    if h is None:
        h = 1e-4 * (1.0 + f.unit_scale())
    h = float(h)
    if not h > 0 or h * h == 0.0 or not np.isfinite(h * h):
        raise ValueError("step too small")
    eye = np.eye(d)
    f0 = f._evaluate(np.zeros((1, d)))[0]
    H = np.empty((d, d))
    for j in range(d):
        pj, mj = f._evaluate(np.vstack([h * eye[j], -h * eye[j]]))
        H[j, j] = (pj - 2.0 * f0 + mj) / (h * h)
        for k in range(j + 1, d):
            e = eye[j] + eye[k]
            o = eye[j] - eye[k]
            pp, pm, mp, mm = f._evaluate(np.vstack([h * e, h * o, -h * o, -h * e]))
            H[j, k] = H[k, j] = (pp - pm - mp + mm) / (4.0 * h * h)
    if not np.all(np.isfinite(H)):
        raise ValueError("non-finite second differences at the origin")
    D = 0.5 * (H + H.T) / 2.0
    eig = np.linalg.eigvalsh(D)
    degenerate = bool(eig.min() <= degenerate_tol * max(1.0, float(np.abs(eig).max())))
    return MatrixD(D, degenerate)


def matrix_dominates(A, B, tolerance=1e-10):
    """True iff A - B is non-negative definite up to ``tolerance``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    diff = A - B
    return bool(np.linalg.eigvalsh(0.5 * (diff + diff.T)).min() >= -tolerance)


def probe_directions(d, n_random=6, seed=0):
    """Coordinate axes, the main diagonal and a few fixed random unit vectors."""
    dirs = [np.eye(d)[j] for j in range(d)]
    if d > 1:
        dirs.append(np.ones(d) / np.sqrt(d))
        rng = np.random.default_rng(seed)
        v = rng.standard_normal((n_random, d))
        dirs.extend(v / np.linalg.norm(v, axis=1, keepdims=True))
    return np.array(dirs)


def validate_young_function(f, probe_radii, tol=1e-8):
    """Return a list of violated Young-function properties (empty when valid).

    The asymptotic gradient condition cannot be checked at infinity; it is
    replaced by a heuristic: min_j |d phi / d lam_j| along the diagonal ray
    must grow monotonically across the probe radii.
    """
    radii = np.sort(np.asarray(probe_radii, dtype=float))
    if radii.size < 3 or radii.max() < f.truncation_radius:
        raise ValueError("probe grid needs at least 3 radii including one >= the truncation radius")
    d = f.dimension
    report = []
    dirs = probe_directions(d)
    pts = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, d)
    with np.errstate(all="ignore"):
        vals = f._evaluate(pts)
        neg = f._evaluate(-pts)
        zero = f._evaluate(np.zeros((1, d)))[0]
    bad = ~np.isfinite(vals)
    if bad.any():
        report.append(f"domain violation: non-finite value at lam={pts[np.argmax(bad)].tolist()}")
    ok = np.isfinite(vals) & np.isfinite(neg)
    scale = 1.0 + np.abs(vals)
    if np.any(np.abs(vals[ok] - neg[ok]) > tol * scale[ok]):
        report.append("evenness: phi(lam) != phi(-lam)")
    if not np.isfinite(zero) or abs(zero) > tol:
        report.append("positivity: phi(0) != 0")
    if np.any(vals[ok] <= 0):
        report.append("positivity: phi(lam) <= 0 for some lam != 0")

    # midpoint convexity on pairs of probe points
    rng = np.random.default_rng(1)
    fin = pts[ok]
    if fin.shape[0] >= 2:
        i = rng.integers(0, fin.shape[0], 256)
        j = rng.integers(0, fin.shape[0], 256)
        with np.errstate(all="ignore"):
            fa, fb = f._evaluate(fin[i]), f._evaluate(fin[j])
            fm = f._evaluate(0.5 * (fin[i] + fin[j]))
        gap = fm - 0.5 * (fa + fb)
        if np.any(gap > tol * (1.0 + np.abs(fa) + np.abs(fb))):
            report.append("convexity: midpoint inequality violated")
    if not _sampled_hessians_psd(f, fin[:: max(1, fin.shape[0] // 24)]):
        report.append("convexity: sampled Hessian not positive semi-definite")

    try:
        D = hessian_at_zero(f)
        if D.degenerate or np.linalg.det(2.0 * D.entries) <= 0:
            report.append("hessian-at-zero: determinant of the Hessian at 0 is not positive")
    except ValueError as exc:
        report.append(f"hessian-at-zero: {exc}")

    diag = np.ones(d) / np.sqrt(d)
    growth = _min_partial(f, radii[:, None] * diag[None, :])
    if not (np.all(np.diff(growth) > 0) and growth[-1] > growth[0]):
        report.append("gradient-growth heuristic: min_j |dphi/dlam_j| does not grow along the diagonal ray")
    return report


def _numeric_gradient(f, pts, rel=1e-6):
    d = f.dimension
    out = np.empty_like(pts)
    for j in range(d):
        h = rel * (1.0 + np.abs(pts[:, j]))
        e = np.zeros(d)
        e[j] = 1.0
        with np.errstate(all="ignore"):
            out[:, j] = (f._evaluate(pts + h[:, None] * e) - f._evaluate(pts - h[:, None] * e)) / (2 * h)
    return out


def _min_partial(f, pts):
    g = f._gradient(pts)
    if g is None:
        g = _numeric_gradient(f, pts)
    return np.min(np.abs(g), axis=1)


def _sampled_hessians_psd(f, pts, rel=1e-3):
    d = f.dimension
    eye = np.eye(d)
    for p in pts:
        h = rel * (1.0 + np.linalg.norm(p))
        H = np.empty((d, d))
        with np.errstate(all="ignore"):
            f0 = f._evaluate(p[None, :])[0]
            for j in range(d):
                a, b = f._evaluate(np.vstack([p + h * eye[j], p - h * eye[j]]))
                H[j, j] = (a - 2 * f0 + b) / h ** 2
                for k in range(j + 1, d):
                    pp, pm, mp, mm = f._evaluate(np.vstack([
                        p + h * (eye[j] + eye[k]), p + h * (eye[j] - eye[k]),
                        p - h * (eye[j] - eye[k]), p - h * (eye[j] + eye[k])]))
                    H[j, k] = H[k, j] = (pp - pm - mp + mm) / (4 * h ** 2)
        if not np.all(np.isfinite(H)):
            continue
        top = max(1.0, float(np.abs(H).max()))
        if np.linalg.eigvalsh(H).min() < -1e-5 * top:
            return False
    return True
