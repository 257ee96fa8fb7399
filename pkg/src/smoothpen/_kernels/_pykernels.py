"""Pure-Python reference implementation of the eps-profile kernels.

Every function here has a twin in ``_ckernels.pyx`` with the same signature
(transforms passed as ``(code, param)`` pairs).  This module additionally
accepts :class:`~smoothpen.transforms.Transform` objects, which is how custom
transforms are evaluated.

The "eps-profile" of a point ``x`` is ``eps -> F(x, eps)`` for fixed objective
value ``fval`` and fixed raw constraint values ``c`` (equalities first).
"""

import math

import numpy as np

from ..transforms import IDENTITY, LINEAR, POWER, RATIONAL_BARRIER, SQRT_DOUBLE, Transform

INF = math.inf
INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def tvalue(code, param, t):
    if code == IDENTITY:
        return t
    if code == LINEAR:
        return param * t
    if code == RATIONAL_BARRIER:
        return t / (1.0 - t) if t < 1.0 else INF
    if code == POWER:
        return t**param if t > 0.0 else 0.0
    if code == SQRT_DOUBLE:
        return 2.0 * math.sqrt(t)
    raise ValueError(f"unknown transform code {code}")


def _value_fn(tr):
    if isinstance(tr, Transform):
        return tr.value
    code, param = tr
    return lambda t: tvalue(code, param, t)


def profile_value(fval, c, m, w, a, lam, phi, beta, eps):
    """``fval + a * phi(Delta) / eps + lam * beta(eps)`` for ``eps > 0``."""
    phi_v, beta_v = _value_fn(phi), _value_fn(beta)
    return _profile(fval, c, m, w, a, lam, phi_v, beta_v, eps)


def _profile(fval, c, m, w, a, lam, phi_v, beta_v, eps):
    delta = 0.0
    for j in range(len(c)):
        r = c[j] - eps * w[j]
        if j >= m and r < 0.0:
            continue
        delta += r * r
    p = phi_v(delta)
    if p == INF:
        return INF
    return fval + a * p / eps + lam * beta_v(eps)


def profile_min(fval, c, m, w, a, lam, phi, beta, eps_lo, eps_max, n_grid=256, rel_tol=1e-12):
    """Minimize the eps-profile over ``[eps_lo, eps_max]``.

    A geometric grid of ``n_grid`` points locates the best bracket, then a
    golden-section search refines it until the bracket width is below
    ``rel_tol`` times its upper end.  Returns ``(eps, value)``; the value is
    ``inf`` when the profile is infinite everywhere on the grid.
    """
    phi_v, beta_v = _value_fn(phi), _value_fn(beta)
    c = [float(v) for v in c]
    w = [float(v) for v in w]

    def F(e):
        return _profile(fval, c, m, w, a, lam, phi_v, beta_v, e)

    if n_grid < 2 or eps_max <= eps_lo:
        e = max(eps_lo, eps_max)
        return e, F(e)
    step = math.log(eps_max / eps_lo) / (n_grid - 1)
    best_k, best_v = 0, INF
    grid = [0.0] * n_grid
    for k in range(n_grid):
        grid[k] = eps_lo * math.exp(k * step) if k < n_grid - 1 else eps_max
        v = F(grid[k])
        if v < best_v:
            best_k, best_v = k, v
    if best_v == INF:
        return eps_max, INF
    best_e = grid[best_k]
    lo = grid[best_k - 1] if best_k > 0 else grid[0]
    hi = grid[best_k + 1] if best_k < n_grid - 1 else grid[n_grid - 1]
    x1 = hi - INVPHI * (hi - lo)
    x2 = lo + INVPHI * (hi - lo)
    f1, f2 = F(x1), F(x2)
    while hi - lo > rel_tol * hi:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INVPHI * (hi - lo)
            f1 = F(x1)
            if f1 < best_v:
                best_e, best_v = x1, f1
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INVPHI * (hi - lo)
            f2 = F(x2)
            if f2 < best_v:
                best_e, best_v = x2, f2
    if f1 < best_v:
        best_e, best_v = x1, f1
    if f2 < best_v:
        best_e, best_v = x2, f2
    return best_e, best_v


def profile_min_batch(fvals, C, m, w, a, lam, phi, beta, eps_lo, eps_max, n_grid=256,
                      rel_tol=1e-12):
    n = len(fvals)
    eps = np.empty(n)
    vals = np.empty(n)
    for i in range(n):
        eps[i], vals[i] = profile_min(float(fvals[i]), C[i], m, w, a, lam, phi, beta,
                                      eps_lo, eps_max, n_grid, rel_tol)
    return eps, vals


def _vec(tr):
    if isinstance(tr, Transform):
        if tr.code is None:
            return np.vectorize(tr.value, otypes=[float])
        code, param = tr.code, tr.param
    else:
        code, param = tr

    def apply(t):
        if code == IDENTITY:
            return t
        if code == LINEAR:
            return param * t
        if code == RATIONAL_BARRIER:
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(t < 1.0, t / (1.0 - t), INF)
        if code == POWER:
            return np.where(t > 0.0, np.power(np.maximum(t, 0.0), param), 0.0)
        if code == SQRT_DOUBLE:
            return 2.0 * np.sqrt(t)
        raise ValueError(f"unknown transform code {code}")

    return apply


def grid_scan(fvals, C, m, w, a, lam, phi, beta, eps_grid, chunk=4096):
    """For each row of ``C`` the minimum of the eps-profile over ``eps_grid``.

    Returns ``(index, value)`` arrays; ``index`` points into ``eps_grid``
    (first minimizer wins).
    """
    fvals = np.asarray(fvals, float)
    C = np.asarray(C, float)
    w = np.asarray(w, float)
    eps_grid = np.asarray(eps_grid, float)
    phi_v, beta_v = _vec(phi), _vec(beta)
    lam_beta = lam * beta_v(eps_grid)
    N = fvals.size
    idx = np.empty(N, dtype=np.int64)
    val = np.empty(N)
    for s in range(0, N, chunk):
        cc = C[s:s + chunk]
        r = cc[:, None, :] - eps_grid[None, :, None] * w[None, None, :]
        r[:, :, m:] = np.maximum(r[:, :, m:], 0.0)
        delta = np.einsum("ijk,ijk->ij", r, r)
        pv = phi_v(delta)
        with np.errstate(invalid="ignore"):
            F = fvals[s:s + chunk, None] + a * pv / eps_grid[None, :] + lam_beta[None, :]
        F = np.where(np.isnan(F), INF, F)
        k = np.argmin(F, axis=1)
        idx[s:s + chunk] = k
        val[s:s + chunk] = F[np.arange(k.size), k]
    return idx, val
