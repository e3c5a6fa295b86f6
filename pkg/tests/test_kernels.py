import os
import subprocess
import sys

import numpy as np
import pytest

from hypercurv import SpaceForm, build_grid
from hypercurv import kernels
from hypercurv.grid import covariant_gradient, covariant_hessian
from hypercurv.samples import random_smooth_graph

needs_compiled = pytest.mark.skipif(not kernels.compiled_available(), reason="extension not built")


def _inputs(n, res, K, conformal):
    grid = build_grid(n, res)
    sp = SpaceForm(K)
    z = random_smooth_graph(grid, sp, seed=3, amplitude=0.05).z
    field = sp.t(0.5 * z) if conformal else z
    d, _ = covariant_gradient(grid, field)
    return grid, field, d, covariant_hessian(grid, field)


@needs_compiled
@pytest.mark.parametrize("K", [-1, 1])
@pytest.mark.parametrize("n,res", [(1, 64), (2, 16)])
@pytest.mark.parametrize("conformal", [False, True])
def test_backends_agree(K, n, res, conformal):
    grid, f, d, h = _inputs(n, res, K, conformal)
    kernel = kernels.conformal_curvatures if conformal else kernels.radial_curvatures
    lam_p, S_p = kernel(K, f, d, h, grid.e, grid.e_inv, backend="python")
    lam_c, S_c = kernel(K, f, d, h, grid.e, grid.e_inv, backend="compiled")
    assert np.max(np.abs(lam_p - lam_c)) < 1e-12
    assert np.max(np.abs(S_p - S_c)) < 1e-12


@needs_compiled
def test_sorted_eigenvalues_on_sphere():
    grid, f, d, h = _inputs(2, 16, -1, False)
    lam, S = kernels.radial_curvatures(-1, f, d, h, grid.e, grid.e_inv, backend="compiled")
    assert np.all(lam[:, 0] <= lam[:, 1])
    assert np.allclose(S[:, 0], 1.0) and np.allclose(S[:, 2], lam[:, 0] * lam[:, 1], rtol=1e-14)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_default_backend_reported():
    assert kernels.BACKEND == ("compiled" if kernels.compiled_available() else "python")


def test_environment_forces_fallback():
    env = dict(os.environ, HYPERCURV_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import hypercurv; print(hypercurv.BACKEND)"], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "python"
