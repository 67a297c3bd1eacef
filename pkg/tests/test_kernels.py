import os
import subprocess
import sys

import numpy as np
import pytest

from glfs import _kernels_py as py

compiled = pytest.importorskip("glfs._kernels")


def points(seed, n=40, dim=5, ties=False):
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(n, dim))
    if ties:
        P = np.round(P)
    return np.ascontiguousarray(P)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("ties", [False, True])
def test_sq_dists(seed, ties):
    P = points(seed, ties=ties)
    np.testing.assert_allclose(compiled.sq_dists(P), py.sq_dists(P), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("k", [1, 3, 7])
def test_knn_mask_with_ties(seed, k):
    # integer coordinates force many exactly equal distances
    D = py.sq_dists(points(seed, ties=True))
    assert np.array_equal(np.asarray(compiled.knn_mask(D, k)), py.knn_mask(D, k))


@pytest.mark.parametrize("seed", range(5))
def test_nearest_other(seed):
    D = py.sq_dists(points(seed, ties=True))
    assert np.array_equal(np.asarray(compiled.nearest_other(D)), py.nearest_other(D))


@pytest.mark.parametrize("shape", [(1, 1), (7, 5), (2500, 30)])
def test_row_quadratic_forms(shape):
    rng = np.random.default_rng(shape[0])
    X = rng.normal(size=shape)
    G = rng.normal(size=(shape[1], shape[1]))
    G = np.ascontiguousarray(G + G.T)
    np.testing.assert_allclose(compiled.row_quadratic_forms(X, G), py.row_quadratic_forms(X, G), rtol=1e-12, atol=1e-12)


def test_assign_nearest():
    P = points(11, n=50, dim=3)
    C = np.ascontiguousarray(P[:4])
    lc, ic = compiled.assign_nearest(P, C)
    lp, ip = py.assign_nearest(P, C)
    assert np.array_equal(np.asarray(lc), lp)
    assert ic == pytest.approx(ip, rel=1e-12)


def test_read_only_inputs():
    P = points(12)
    P.setflags(write=False)
    compiled.sq_dists(P)


def test_fallback_selected_by_environment():
    code = "import glfs; print(glfs.BACKEND)"
    env = dict(os.environ, GLFS_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
