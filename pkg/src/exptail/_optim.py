"""Vectorised one- and d-dimensional maximisers used by the conjugate engine."""
import math

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _finite_or_neg_inf(values):
    values = np.asarray(values, dtype=float)
    return np.where(np.isnan(values), -np.inf, values)


def golden_max(fun, a, b, xtol=1e-11):
    """Golden-section maximisation of a batch of unimodal functions.

    ``fun`` maps an array of abscissae (one per problem) to an array of
    values. ``a`` and ``b`` are per-problem brackets. Returns ``(x, f(x))``.
    The endpoints are evaluated at the end so maxima sitting on the bracket
    boundary are found exactly.
    """
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    lo, hi = a.copy(), b.copy()
    width = np.max(b - a) if a.size else 0.0
    if width <= 0:
        x = a.copy()
        return x, _finite_or_neg_inf(fun(x))
    n_iter = max(1, int(math.ceil(math.log(xtol) / math.log(INV_PHI))))

    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc = _finite_or_neg_inf(fun(c))
    fd = _finite_or_neg_inf(fun(d))
    for _ in range(n_iter):
        left = fc >= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        keep_x = np.where(left, c, d)
        keep_f = np.where(left, fc, fd)
        new_x = np.where(left, b - INV_PHI * (b - a), a + INV_PHI * (b - a))
        new_f = _finite_or_neg_inf(fun(new_x))
        c = np.where(left, new_x, keep_x)
        fc = np.where(left, new_f, keep_f)
        d = np.where(left, keep_x, new_x)
        fd = np.where(left, keep_f, new_f)

    mid = 0.5 * (a + b)
    cand_x = np.stack([mid, c, d, lo, hi])
    cand_f = np.stack([_finite_or_neg_inf(fun(mid)), fc, fd,
                       _finite_or_neg_inf(fun(lo)), _finite_or_neg_inf(fun(hi))])
    best = np.argmax(cand_f, axis=0)
    cols = np.arange(cand_x.shape[1]) if cand_x.ndim > 1 else None
    if cols is None:
        return cand_x[best], cand_f[best]
    return cand_x[best, cols], cand_f[best, cols]


def _project_gradient(g, x, lo, hi):
    pg = g.copy()
    pg[(x >= hi) & (g > 0)] = 0.0
    pg[(x <= lo) & (g < 0)] = 0.0
    return pg


def projected_ascent(fun, grad, x0, lo, hi, gtol=1e-10, max_iter=500):
    """Batched projected gradient ascent for concave objectives on a box.

    ``fun(x, rows)``: (k, d) -> (k,) and ``grad(x, rows)``: (k, d) -> (k, d),
    where ``rows`` indexes the problems of the batch being evaluated. Steps start from a
    Barzilai-Borwein guess and are cut back until the Armijo condition holds
    along the projected arc. Finishes with a golden-section polish along the
    last ascent direction.
    """
    x = np.clip(np.array(x0, dtype=float), lo, hi)
    m = x.shape[0]
    allrows = np.arange(m)
    f = _finite_or_neg_inf(fun(x, allrows))
    g = grad(x, allrows)
    step = 1.0 / (1.0 + np.linalg.norm(g, axis=1))
    done = ~np.isfinite(f)
    last_dir = np.zeros_like(x)
    last_len = np.zeros(m)

    for _ in range(max_iter):
        pg = _project_gradient(g, x, lo, hi)
        gnorm = np.linalg.norm(pg, axis=1)
        done |= gnorm <= gtol * (1.0 + np.abs(f))
        act = np.flatnonzero(~done)
        if act.size == 0:
            break
        xa, fa, pga, ta = x[act], f[act], pg[act], step[act]
        accepted = np.zeros(act.size, dtype=bool)
        x_new, f_new = xa.copy(), fa.copy()
        pending = np.arange(act.size)
        for _bt in range(80):
            xt = np.clip(xa[pending] + ta[pending, None] * pga[pending], lo, hi)
            ft = _finite_or_neg_inf(fun(xt, act[pending]))
            gain = np.sum(pga[pending] * (xt - xa[pending]), axis=1)
            ok = (ft >= fa[pending] + 1e-4 * gain) & (ft > fa[pending] - 1e-15 * np.abs(fa[pending]))
            ok &= np.isfinite(ft)
            idx_ok = pending[ok]
            x_new[idx_ok], f_new[idx_ok] = xt[ok], ft[ok]
            accepted[idx_ok] = True
            pending = pending[~ok]
            if pending.size == 0:
                break
            ta[pending] *= 0.5
            tiny = ta[pending] * np.linalg.norm(pga[pending], axis=1) < 1e-15 * (1.0 + np.linalg.norm(xa[pending], axis=1))
            pending = pending[~tiny]
            if pending.size == 0:
                break
        stalled = act[~accepted]
        done[stalled] = True
        moved = act[accepted]
        if moved.size == 0:
            continue
        acc = np.flatnonzero(accepted)
        s = x_new[acc] - xa[acc]
        g_new = grad(x_new[acc], moved)
        yv = g_new - g[moved]
        curv = -np.sum(s * yv, axis=1)
        ss = np.sum(s * s, axis=1)
        bb = np.where(curv > 0, ss / np.where(curv > 0, curv, 1.0), 2.0 * ta[acc])
        step[moved] = np.clip(bb, 1e-12, 1e12)
        last_dir[moved] = s
        last_len[moved] = np.sqrt(ss)
        x[moved], f[moved], g[moved] = x_new[acc], f_new[acc], g_new

    # golden-section polish along the last ascent direction
    pol = np.flatnonzero((last_len > 0) & np.isfinite(f))
    if pol.size:
        u = last_dir[pol] / last_len[pol, None]
        span = 2.0 * last_len[pol]
        base = x[pol]

        def along(t):
            return _finite_or_neg_inf(fun(np.clip(base + t[:, None] * u, lo, hi), pol))

        t_best, f_best = golden_max(along, -span, span, xtol=1e-6)
        better = f_best > f[pol]
        sel = pol[better]
        x[sel] = np.clip(base[better] + t_best[better, None] * u[better], lo, hi)
        f[sel] = f_best[better]
    return x, f


def geometric_bisect(feasible, lo, hi, rtol=1e-3, max_iter=200):
    """Shrink ``[lo, hi]`` (lo infeasible, hi feasible) to relative width ``rtol``.

    Midpoints are geometric, so scaling the bracket by a power of two scales
    every iterate exactly.
    """
    for _ in range(max_iter):
        if hi <= lo * (1.0 + rtol):
            break
        mid = math.sqrt(lo * hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


def bracket_threshold(feasible, start, max_doublings=64, max_halvings=64):
    """Bracket the smallest feasible value of a monotone predicate.

    Returns ``(lo, hi)`` with ``feasible(hi)`` true and ``feasible(lo)`` false.
    ``hi`` is ``inf`` when nothing up to ``start * 2**max_doublings`` is
    feasible; ``lo`` is ``0`` when ``start * 2**-max_halvings`` is feasible.
    """
    if feasible(start):
        hi = start
        for _ in range(max_halvings):
            lo = hi / 2.0
            if not feasible(lo):
                return lo, hi
            hi = lo
        return 0.0, hi
    lo = start
    for _ in range(max_doublings):
        hi = lo * 2.0
        if feasible(hi):
            return lo, hi
        lo = hi
    return lo, math.inf
