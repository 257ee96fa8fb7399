# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled eps-profile kernels; see ``_pykernels`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, pow, sqrt, INFINITY

cnp.import_array()

# transform codes, mirrored from smoothpen.transforms
DEF IDENTITY = 0
DEF LINEAR = 1
DEF RATIONAL_BARRIER = 2
DEF POWER = 3
DEF SQRT_DOUBLE = 4

cdef double INVPHI = (sqrt(5.0) - 1.0) / 2.0


cdef inline double tvalue(int code, double param, double t) nogil:
    if code == IDENTITY:
        return t
    if code == LINEAR:
        return param * t
    if code == RATIONAL_BARRIER:
        if t < 1.0:
            return t / (1.0 - t)
        return INFINITY
    if code == POWER:
        if t > 0.0:
            return pow(t, param)
        return 0.0
    if code == SQRT_DOUBLE:
        return 2.0 * sqrt(t)
    return INFINITY


cdef inline double profile(double fval, const double* c, Py_ssize_t K, Py_ssize_t m,
                           const double* w, double a, double lam, int pc, double pp,
                           int bc, double bp, double eps) nogil:
    cdef double delta = 0.0, r, p
    cdef Py_ssize_t j
    for j in range(K):
        r = c[j] - eps * w[j]
        if j >= m and r < 0.0:
            continue
        delta += r * r
    p = tvalue(pc, pp, delta)
    if p == INFINITY:
        return INFINITY
    return fval + a * p / eps + lam * tvalue(bc, bp, eps)


cdef void pmin(double fval, const double* c, Py_ssize_t K, Py_ssize_t m, const double* w,
               double a, double lam, int pc, double pp, int bc, double bp,
               double eps_lo, double eps_max, int n_grid, double rel_tol,
               double* out_eps, double* out_val) nogil:
    cdef double step, e, v, best_e, best_v = INFINITY
    cdef double lo, hi, x1, x2, f1, f2, prev = 0.0, nxt = 0.0
    cdef int k, best_k = 0
    if n_grid < 2 or eps_max <= eps_lo:
        e = eps_max if eps_max > eps_lo else eps_lo
        out_eps[0] = e
        out_val[0] = profile(fval, c, K, m, w, a, lam, pc, pp, bc, bp, e)
        return
    step = log(eps_max / eps_lo) / (n_grid - 1)
    for k in range(n_grid):
        if k < n_grid - 1:
            e = eps_lo * exp(k * step)
        else:
            e = eps_max
        v = profile(fval, c, K, m, w, a, lam, pc, pp, bc, bp, e)
        if v < best_v:
            best_k = k
            best_v = v
    if best_v == INFINITY:
        out_eps[0] = eps_max
        out_val[0] = INFINITY
        return
    best_e = eps_lo * exp(best_k * step) if best_k < n_grid - 1 else eps_max
    if best_k > 0:
        lo = eps_lo * exp((best_k - 1) * step)
    else:
        lo = eps_lo
    if best_k < n_grid - 2:
        hi = eps_lo * exp((best_k + 1) * step)
    else:
        hi = eps_max
    x1 = hi - INVPHI * (hi - lo)
    x2 = lo + INVPHI * (hi - lo)
    f1 = profile(fval, c, K, m, w, a, lam, pc, pp, bc, bp, x1)
    f2 = profile(fval, c, K, m, w, a, lam, pc, pp, bc, bp, x2)
    while hi - lo > rel_tol * hi:
        if f1 <= f2:
            hi = x2
            x2 = x1
            f2 = f1
            x1 = hi - INVPHI * (hi - lo)
            f1 = profile(fval, c, K, m, w, a, lam, pc, pp, bc, bp, x1)
            if f1 < best_v:
                best_e = x1
                best_v = f1
        else:
            lo = x1
            x1 = x2
            f1 = f2
            x2 = lo + INVPHI * (hi - lo)
            f2 = profile(fval, c, K, m, w, a, lam, pc, pp, bc, bp, x2)
            if f2 < best_v:
                best_e = x2
                best_v = f2
    if f1 < best_v:
        best_e = x1
        best_v = f1
    if f2 < best_v:
        best_e = x2
        best_v = f2
    out_eps[0] = best_e
    out_val[0] = best_v


def profile_value(double fval, c, Py_ssize_t m, w, double a, double lam, phi, beta,
                  double eps):
    cdef double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef int pc = phi[0], bc = beta[0]
    cdef double pp = phi[1], bp = beta[1]
    if cv.shape[0] == 0:
        return fval + lam * tvalue(bc, bp, eps) + a * tvalue(pc, pp, 0.0) / eps
    return profile(fval, &cv[0], cv.shape[0], m, &wv[0], a, lam, pc, pp, bc, bp, eps)


def profile_min(double fval, c, Py_ssize_t m, w, double a, double lam, phi, beta,
                double eps_lo, double eps_max, int n_grid=256, double rel_tol=1e-12):
    cdef double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef int pc = phi[0], bc = beta[0]
    cdef double pp = phi[1], bp = beta[1]
    cdef double e = 0.0, v = 0.0
    cdef double zero = 0.0
    if cv.shape[0] == 0:
        pmin(fval, &zero, 0, m, &zero, a, lam, pc, pp, bc, bp, eps_lo, eps_max,
             n_grid, rel_tol, &e, &v)
    else:
        pmin(fval, &cv[0], cv.shape[0], m, &wv[0], a, lam, pc, pp, bc, bp, eps_lo,
             eps_max, n_grid, rel_tol, &e, &v)
    return e, v


def profile_min_batch(fvals, C, Py_ssize_t m, w, double a, double lam, phi, beta,
                      double eps_lo, double eps_max, int n_grid=256, double rel_tol=1e-12):
    cdef double[::1] fv = np.ascontiguousarray(fvals, dtype=np.float64)
    cdef double[:, ::1] Cv = np.ascontiguousarray(C, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t N = fv.shape[0], K = Cv.shape[1], i
    cdef int pc = phi[0], bc = beta[0]
    cdef double pp = phi[1], bp = beta[1]
    out_e = np.empty(N)
    out_v = np.empty(N)
    cdef double[::1] oe = out_e
    cdef double[::1] ov = out_v
    with nogil:
        for i in range(N):
            pmin(fv[i], &Cv[i, 0], K, m, &wv[0], a, lam, pc, pp, bc, bp, eps_lo, eps_max,
                 n_grid, rel_tol, &oe[i], &ov[i])
    return out_e, out_v


def grid_scan(fvals, C, Py_ssize_t m, w, double a, double lam, phi, beta, eps_grid):
    cdef double[::1] fv = np.ascontiguousarray(fvals, dtype=np.float64)
    cdef double[:, ::1] Cv = np.ascontiguousarray(C, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[::1] ev = np.ascontiguousarray(eps_grid, dtype=np.float64)
    cdef Py_ssize_t N = fv.shape[0], K = Cv.shape[1], M = ev.shape[0], i, j
    cdef int pc = phi[0], bc = beta[0]
    cdef double pp = phi[1], bp = beta[1]
    cdef double v, best
    cdef Py_ssize_t bk
    out_i = np.empty(N, dtype=np.int64)
    out_v = np.empty(N)
    cdef cnp.int64_t[::1] oi = out_i
    cdef double[::1] ov = out_v
    with nogil:
        for i in range(N):
            best = INFINITY
            bk = 0
            for j in range(M):
                v = profile(fv[i], &Cv[i, 0], K, m, &wv[0], a, lam, pc, pp, bc, bp, ev[j])
                if v < best:
                    best = v
                    bk = j
            oi[i] = bk
            ov[i] = best
    return out_i, out_v
