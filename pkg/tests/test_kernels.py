import numpy as np
import pytest

from smoothpen import _kernels
from smoothpen.transforms import identity, linear, power, rational_barrier, sqrt_double

needs_c = pytest.mark.skipif(_kernels._ckernels is None, reason="compiled kernels not built")
PAIRS = [(identity(), identity()), (linear(2.0), sqrt_double()), (rational_barrier(), linear(3.0)),
         (power(1.5), identity()), (power(0.5), sqrt_double())]


def case(seed=0, k=3):
    rng = np.random.default_rng(seed)
    return rng.normal(), rng.normal(size=k), rng.normal(scale=0.3, size=k)


@needs_c
@pytest.mark.parametrize("phi, beta", PAIRS, ids=lambda t: str(t))
def test_backends_agree_on_value(phi, beta):
    for seed in range(20):
        f, c, w = case(seed)
        for eps in (1e-6, 0.1, 2.0):
            a = _kernels.profile_value(f, c, 1, w, 0.7, 1.3, phi, beta, eps, backend="python")
            b = _kernels.profile_value(f, c, 1, w, 0.7, 1.3, phi, beta, eps, backend="cython")
            assert a == pytest.approx(b, rel=1e-13, abs=1e-13) or a == b


@needs_c
@pytest.mark.parametrize("phi, beta", PAIRS, ids=lambda t: str(t))
def test_backends_agree_on_profile_min(phi, beta):
    for seed in range(10):
        f, c, w = case(seed)
        a = _kernels.profile_min(f, c, 1, w, 0.7, 1.3, phi, beta, 1e-12, 50.0, backend="python")
        b = _kernels.profile_min(f, c, 1, w, 0.7, 1.3, phi, beta, 1e-12, 50.0, backend="cython")
        assert a[1] == pytest.approx(b[1], rel=1e-12, abs=1e-12)


@needs_c
def test_backends_agree_on_grid_scan():
    rng = np.random.default_rng(1)
    fv = rng.normal(size=40)
    C = rng.normal(size=(40, 2))
    w = np.array([0.1, -0.2])
    eps = np.geomspace(1e-6, 10, 50)
    ia, va = _kernels.grid_scan(fv, C, 1, w, 1.0, 0.5, identity(), identity(), eps,
                                backend="python")
    ib, vb = _kernels.grid_scan(fv, C, 1, w, 1.0, 0.5, identity(), identity(), eps,
                                backend="cython")
    np.testing.assert_array_equal(ia, ib)
    np.testing.assert_allclose(va, vb, rtol=1e-13)


def test_profile_min_matches_closed_form():
    # f + d^2 / eps + lam eps has minimum f + 2 sqrt(lam) d at eps = d / sqrt(lam)
    for backend in ("python", None):
        e, v = _kernels.profile_min(1.0, np.array([2.0]), 0, np.zeros(1), 1.0, 4.0, identity(),
                                    identity(), 1e-12, 100.0, backend=backend)
        assert v == pytest.approx(1.0 + 2 * 2 * 2, rel=1e-12)
        assert e == pytest.approx(1.0, rel=1e-6)


def test_custom_transform_uses_python():
    from smoothpen.transforms import custom

    phi = custom(lambda t: t * t)
    v = _kernels.profile_value(0.0, np.array([1.0]), 1, np.zeros(1), 1.0, 1.0, phi, identity(),
                               0.5)
    assert v == pytest.approx(1.0 / 0.5 + 0.5)
    if _kernels._ckernels is not None:
        with pytest.raises(RuntimeError):
            _kernels.profile_value(0.0, np.array([1.0]), 1, np.zeros(1), 1.0, 1.0, phi,
                                   identity(), 0.5, backend="cython")


def test_backend_name():
    assert _kernels.BACKEND in ("cython", "python")
