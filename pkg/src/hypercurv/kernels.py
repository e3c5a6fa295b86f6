"""Backend selection for the per-node curvature kernels.

The compiled extension is used when it imports and the environment variable
``HYPERCURV_PURE_PYTHON`` is unset or ``0``; otherwise the NumPy fallback.
Both backends expose ``radial_curvatures`` and ``conformal_curvatures``.
"""
import os

import numpy as np

from . import _kernels_py

_compiled = None
if os.environ.get("HYPERCURV_PURE_PYTHON", "0") in ("", "0"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` ('compiled', 'python' or None for default)."""
    if name is None:
        name = BACKEND
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not available; build the extension with `pip install -e .`")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")


def compiled_available() -> bool:
    return _compiled is not None


def _prep(values, d, h, e, e_inv):
    c = np.ascontiguousarray
    return c(values, dtype=float), c(d, dtype=float), c(h, dtype=float), c(e, dtype=float), c(e_inv, dtype=float)


def radial_curvatures(K, z, dz, hz, e, e_inv, backend=None):
    mod = get_backend(backend)
    if e.shape[-1] > 2 and mod is not _kernels_py:
        mod = _kernels_py
    return mod.radial_curvatures(int(K), *_prep(z, dz, hz, e, e_inv))


def conformal_curvatures(K, v, dv, hv, e, e_inv, backend=None):
    mod = get_backend(backend)
    if e.shape[-1] > 2 and mod is not _kernels_py:
        mod = _kernels_py
    return mod.conformal_curvatures(int(K), *_prep(v, dv, hv, e, e_inv))
