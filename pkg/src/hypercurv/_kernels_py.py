"""NumPy implementation of the per-node curvature kernels.

Used when the compiled extension is unavailable or disabled with
``HYPERCURV_PURE_PYTHON=1``.  Signatures match ``_kernels.pyx``.
"""
import numpy as np

from .conformal import conformal_forms
from .spaceform import SpaceForm, elementary_symmetric, generalized_eigvals, radial_forms


def radial_curvatures(K, z, dz, hz, e, e_inv):
    g, _, b = radial_forms(SpaceForm(int(K)), z, dz, hz, e, e_inv)
    lam = generalized_eigvals(b, g, check=False)
    return lam, elementary_symmetric(lam)


def conformal_curvatures(K, v, dv, hv, e, e_inv):
    ghat, _, bhat, q, W = conformal_forms(int(K), v, dv, hv, e, e_inv)
    lam = generalized_eigvals(bhat, ghat, check=False) / q[:, None] - (K * v * v / W)[:, None]
    return lam, elementary_symmetric(lam)
