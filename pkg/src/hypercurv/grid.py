"""Finite-difference discretization of the unit sphere S^n for n = 1, 2.

The circle uses a uniform periodic grid on [0, 2pi).  The 2-sphere uses a
latitude-longitude grid whose rings sit at theta = (k + 1/2) h, so no node
lies on a pole.  Stencils are centered; those that reach past a pole are closed with the
antipodal shift: the ghost point (-theta, phi) is the node (theta, phi + pi).

Fields are flat arrays in node-major order, theta outer and phi inner.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

__all__ = [
    "SphereGrid",
    "build_grid",
    "round_metric",
    "round_christoffel",
    "covariant_gradient",
    "covariant_hessian",
    "check_field",
]

MIN_RESOLUTION = 8


def round_metric(theta, n: int = 2):
    """Round metric e_ij and its inverse at colatitude ``theta``.

    Returns arrays of shape ``theta.shape + (n, n)``.
    """
    theta = np.asarray(theta, dtype=float)
    e = np.zeros(theta.shape + (n, n))
    e_inv = np.zeros_like(e)
    if n == 1:
        e[..., 0, 0] = 1.0
        e_inv[..., 0, 0] = 1.0
    else:
        s2 = np.sin(theta) ** 2
        e[..., 0, 0] = 1.0
        e[..., 1, 1] = s2
        e_inv[..., 0, 0] = 1.0
        e_inv[..., 1, 1] = 1.0 / s2
    return e, e_inv


def round_christoffel(theta, n: int = 2):
    """Christoffel symbols ``G[..., i, s, j]`` = Gamma^i_{sj} of the round metric."""
    theta = np.asarray(theta, dtype=float)
    gam = np.zeros(theta.shape + (n, n, n))
    if n == 2:
        gam[..., 0, 1, 1] = -np.sin(theta) * np.cos(theta)
        cot = np.cos(theta) / np.sin(theta)
        gam[..., 1, 0, 1] = cot
        gam[..., 1, 1, 0] = cot
    return gam


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Immutable grid on S^n with round-metric data and difference operators."""

    n: int
    shape: tuple
    nodes: np.ndarray  # (N, n) coordinates: theta, or (theta, phi)
    e: np.ndarray  # (N, n, n)
    e_inv: np.ndarray  # (N, n, n)
    christoffel: np.ndarray  # (N, n, n, n), [i, s, j] = Gamma^i_{sj}
    spacing: tuple
    order: int
    _first: tuple = field(repr=False)  # sparse first-derivative operators per axis
    _second: tuple = field(repr=False)  # sparse second partials, [k][l]

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def resolution(self) -> int:
        return self.shape[0]

    @property
    def h(self) -> float:
        return max(self.spacing)

    @cached_property
    def cartesian(self) -> np.ndarray:
        """Unit vectors in R^{n+1} for every node."""
        th = self.nodes[:, 0]
        if self.n == 1:
            return np.column_stack([np.cos(th), np.sin(th)])
        ph = self.nodes[:, 1]
        return np.column_stack(
            [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)]
        )

    @cached_property
    def coord_names(self) -> tuple:
        return ("theta",) if self.n == 1 else ("theta", "phi")

    def first_operator(self, i: int) -> sp.csr_matrix:
        return self._first[i]

    def second_operator(self, k: int, l: int) -> sp.csr_matrix:
        return self._second[k][l]

    @cached_property
    def hessian_operators(self) -> tuple:
        """Sparse operators for the covariant Hessian component (k, l).

        Encodes partial_kl - Gamma^j_kl partial_j.
        """
        ops = []
        for k in range(self.n):
            row = []
            for l in range(self.n):
                op = self._second[k][l].tocsr(copy=True)
                for j in range(self.n):
                    gam = self.christoffel[:, j, k, l]
                    if np.any(gam != 0.0):
                        op = op - sp.diags(gam) @ self._first[j]
                row.append(op.tocsr())
            ops.append(tuple(row))
        return tuple(ops)

    def coords_dict(self) -> dict:
        out = {"theta": self.nodes[:, 0]}
        if self.n == 2:
            out["phi"] = self.nodes[:, 1]
        return out

    def same_as(self, other: "SphereGrid") -> bool:
        return (
            self.n == other.n
            and self.shape == other.shape
            and np.array_equal(self.nodes, other.nodes)
        )


_FIRST = {
    2: {1: 0.5, -1: -0.5},
    4: {2: -1.0 / 12, 1: 8.0 / 12, -1: -8.0 / 12, -2: 1.0 / 12},
}
_SECOND = {
    2: {1: 1.0, 0: -2.0, -1: 1.0},
    4: {2: -1.0 / 12, 1: 16.0 / 12, 0: -30.0 / 12, -1: 16.0 / 12, -2: -1.0 / 12},
}


def _stencil(shift, weights, h, power):
    out = None
    for offset, w in weights.items():
        term = (w / h**power) * shift(offset)
        out = term if out is None else out + term
    return out.tocsr()


def _circle(res: int, order: int) -> SphereGrid:
    h = 2.0 * np.pi / res
    theta = h * np.arange(res)
    idx = np.arange(res)

    def shift(k):
        return sp.csr_matrix((np.ones(res), (idx, (idx + k) % res)), shape=(res, res))

    d1 = _stencil(shift, _FIRST[order], h, 1)
    d2 = _stencil(shift, _SECOND[order], h, 2)
    e, e_inv = round_metric(theta, 1)
    return SphereGrid(
        n=1,
        shape=(res,),
        nodes=theta[:, None],
        e=e,
        e_inv=e_inv,
        christoffel=round_christoffel(theta, 1),
        spacing=(h,),
        order=order,
        _first=(d1,),
        _second=((d2,),),
    )


def _sphere(res: int, order: int) -> SphereGrid:
    nt, nphi = res, 2 * res
    ht = np.pi / nt
    hp = 2.0 * np.pi / nphi
    theta = (np.arange(nt) + 0.5) * ht
    phi = np.arange(nphi) * hp
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    nodes = np.column_stack([tt.ravel(), pp.ravel()])
    size = nt * nphi
    half = nphi // 2

    def index(k, j):
        # ghost rings beyond a pole map to the antipodal longitude
        outside = (k < 0) | (k >= nt)
        j = np.where(outside, j + half, j) % nphi
        k = np.where(k < 0, -k - 1, np.where(k >= nt, 2 * nt - k - 1, k))
        return k * nphi + j

    kk, jj = np.meshgrid(np.arange(nt), np.arange(nphi), indexing="ij")
    kk = kk.ravel()
    jj = jj.ravel()
    rows = np.arange(size)

    def theta_shift(dk):
        return sp.csr_matrix((np.ones(size), (rows, index(kk + dk, jj))), shape=(size, size))

    def phi_shift(dj):
        return sp.csr_matrix((np.ones(size), (rows, index(kk, jj + dj))), shape=(size, size))

    dt = _stencil(theta_shift, _FIRST[order], ht, 1)
    dp = _stencil(phi_shift, _FIRST[order], hp, 1)
    dtt = _stencil(theta_shift, _SECOND[order], ht, 2)
    dpp = _stencil(phi_shift, _SECOND[order], hp, 2)
    # phi-derivatives commute with the antipodal ghost map, so the product is exact
    dtp = (dt @ dp).tocsr()
    e, e_inv = round_metric(nodes[:, 0], 2)
    return SphereGrid(
        n=2,
        shape=(nt, nphi),
        nodes=nodes,
        e=e,
        e_inv=e_inv,
        christoffel=round_christoffel(nodes[:, 0], 2),
        spacing=(ht, hp),
        order=order,
        _first=(dt, dp),
        _second=((dtt, dtp), (dtp, dpp)),
    )


def build_grid(n: int, resolution: int, order: int | None = None) -> SphereGrid:
    """Build a grid on S^n.

    ``resolution`` is the node count on the circle, or the number of
    latitude rings on S^2 (which then carries ``2 * resolution`` longitudes,
    giving equal angular steps on both axes).

    ``order`` selects centered stencils of order 2 or 4.  The default is 2
    on the circle and 4 on S^2: next to a pole the metric factor
    1/sin(theta) ~ 1/h amplifies the truncation error by one power of h,
    so second-order stencils there only give first-order accuracy in
    orthonormal components.
    """
    if n not in (1, 2):
        raise ValueError(f"unsupported sphere dimension n={n}; expected 1 or 2")
    if int(resolution) != resolution or resolution < MIN_RESOLUTION:
        raise ValueError(f"resolution must be an integer >= {MIN_RESOLUTION}, got {resolution}")
    resolution = int(resolution)
    if order is None:
        order = 2 if n == 1 else 4
    if order not in (2, 4):
        raise ValueError(f"stencil order must be 2 or 4, got {order}")
    return _circle(resolution, order) if n == 1 else _sphere(resolution, order)


def check_field(grid: SphereGrid, values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.size,):
        raise ValueError(f"field has shape {values.shape}, grid has {grid.size} nodes")
    if not np.all(np.isfinite(values)):
        raise ValueError("field contains non-finite values")
    return values


def _offset(values):
    # Differencing v - v[0] leaves derivatives unchanged but makes them exactly
    # zero on constant fields, where stencil weights do not cancel in rounding.
    return values - values[0]


def covariant_gradient(grid: SphereGrid, values):
    """Return ``(v_i, v^i)``, each of shape (N, n)."""
    values = _offset(check_field(grid, values))
    cov = np.column_stack([grid.first_operator(i) @ values for i in range(grid.n)])
    contra = np.einsum("nij,nj->ni", grid.e_inv, cov)
    return cov, contra


def covariant_hessian(grid: SphereGrid, values) -> np.ndarray:
    """Covariant Hessian nabla'_ij v as an (N, n, n) symmetric array."""
    values = _offset(check_field(grid, values))
    ops = grid.hessian_operators
    out = np.empty((grid.size, grid.n, grid.n))
    for k in range(grid.n):
        for l in range(k, grid.n):
            out[:, k, l] = ops[k][l] @ values
            out[:, l, k] = out[:, k, l]
    return out
