"""Backend selection for the eps-profile kernels.

The compiled extension ``_ckernels`` is used when it imports and both
transforms are registered kinds; otherwise the pure-Python module handles
the call.  Set ``SMOOTHPEN_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("SMOOTHPEN_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure python kernels requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKEND = "cython" if _ckernels is not None else "python"


def _codes(phi, beta):
    if phi.code is None or beta.code is None:
        return None
    return (phi.code, phi.param), (beta.code, beta.param)


def _pick(phi, beta, backend):
    codes = _codes(phi, beta)
    if backend == "python" or _ckernels is None or codes is None:
        if backend == "cython" and (_ckernels is None or codes is None):
            raise RuntimeError("compiled kernels unavailable for this call")
        return _pykernels, (phi, beta)
    return _ckernels, codes


def _pad(C, w):
    C = np.asarray(C, float)
    w = np.asarray(w, float)
    if C.shape[-1] == 0:
        C = np.zeros(C.shape[:-1] + (1,))
        w = np.zeros(1)
    return C, w


def profile_value(fval, c, m, w, a, lam, phi, beta, eps, backend=None):
    mod, (p, b) = _pick(phi, beta, backend)
    c, w = _pad(c, w)
    return mod.profile_value(float(fval), c, int(m), w, float(a), float(lam), p, b, float(eps))


def profile_min(fval, c, m, w, a, lam, phi, beta, eps_lo, eps_max, n_grid=256,
                rel_tol=1e-12, backend=None):
    mod, (p, b) = _pick(phi, beta, backend)
    c, w = _pad(c, w)
    return mod.profile_min(float(fval), c, int(m), w, float(a), float(lam), p, b,
                           float(eps_lo), float(eps_max), int(n_grid), float(rel_tol))


def profile_min_batch(fvals, C, m, w, a, lam, phi, beta, eps_lo, eps_max, n_grid=256,
                      rel_tol=1e-12, backend=None):
    mod, (p, b) = _pick(phi, beta, backend)
    C, w = _pad(C, w)
    return mod.profile_min_batch(np.asarray(fvals, float), C, int(m), w, float(a),
                                 float(lam), p, b, float(eps_lo), float(eps_max),
                                 int(n_grid), float(rel_tol))


def grid_scan(fvals, C, m, w, a, lam, phi, beta, eps_grid, backend=None):
    mod, (p, b) = _pick(phi, beta, backend)
    C, w = _pad(C, w)
    return mod.grid_scan(np.asarray(fvals, float), C, int(m), w, float(a), float(lam), p, b,
                         np.asarray(eps_grid, float))
