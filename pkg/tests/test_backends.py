import numpy as np
import pytest

from peer import _cd_py, _kernels

cython = pytest.importorskip("peer._cd")


def test_selected_backend():
    assert _kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("seed", range(5))
def test_paths_agree(seed):
    rng = np.random.default_rng(seed)
    n, p = 30, 50
    X = np.asfortranarray(rng.standard_normal((n, p)))
    y = X[:, :3] @ np.array([1.0, -2.0, 0.5]) + rng.standard_normal(n)
    top = np.max(np.abs(X.T @ y)) * 2 / n
    lams = np.geomspace(top, top * 0.01, 25)
    u0 = np.zeros(p)
    a = cython.cd_path(X, y, lams, u0, 1e-10, 5000)
    b = _cd_py.cd_path(X, y, lams, u0, 1e-10, 5000)
    np.testing.assert_allclose(a[0], b[0], atol=1e-8)
    np.testing.assert_array_equal(a[2], b[2])


def test_early_stop_agrees():
    rng = np.random.default_rng(9)
    X = np.asfortranarray(rng.standard_normal((20, 40)))
    y = rng.standard_normal(20)
    lams = np.geomspace(1.0, 1e-4, 60)
    for kwargs in ({"dfmax": 5}, {"rss_floor": 0.2 * float(y @ y)}):
        a = cython.cd_path(X, y, lams, np.zeros(40), 1e-9, 2000, **kwargs)
        b = _cd_py.cd_path(X, y, lams, np.zeros(40), 1e-9, 2000, **kwargs)
        assert a[0].shape == b[0].shape
        assert a[0].shape[0] < lams.size
        np.testing.assert_allclose(a[0], b[0], atol=1e-7)


def test_warm_start_is_not_mutated():
    rng = np.random.default_rng(3)
    X = np.asfortranarray(rng.standard_normal((10, 4)))
    u0 = np.ones(4)
    cython.cd_path(X, rng.standard_normal(10), np.array([0.1]), u0, 1e-8, 100)
    np.testing.assert_array_equal(u0, 1.0)
