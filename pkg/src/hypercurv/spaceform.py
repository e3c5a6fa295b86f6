"""Geometry of radial graphs (u, z(u)) over S^n in the space forms K = -1, +1.

The ambient metric is d rho^2 + f(rho) e with f = sinh^2 (K = -1) or
f = sin^2 (K = +1).  All curvature quantities use the inner normal, so
geodesic spheres have positive principal curvatures.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DegenerateMetric, NonPositiveRadius, NotAdmissible, RadiusOutOfRange
from .grid import SphereGrid, check_field, covariant_gradient, covariant_hessian

__all__ = [
    "SpaceForm",
    "RadialGraph",
    "ShapeData",
    "radial_forms",
    "generalized_eigvals",
    "elementary_symmetric",
    "principal_minor_sums",
    "fundamental_forms",
    "shape_data",
    "shape_operator",
    "principal_curvatures",
    "symmetric_functions",
    "is_m_admissible",
    "Residual",
    "hm_residual",
]

COND_LIMIT = 1e12


@dataclass(frozen=True)
class SpaceForm:
    """Profile functions of the warped metric d rho^2 + f(rho) e."""

    K: int

    def __post_init__(self):
        if self.K not in (-1, 1):
            raise ValueError(f"K must be -1 or +1, got {self.K!r}")

    @property
    def a(self) -> float:
        return math.inf if self.K == -1 else math.pi / 2

    @property
    def name(self) -> str:
        return "hyperbolic" if self.K == -1 else "elliptic"

    def s(self, rho):
        return np.sinh(rho) if self.K == -1 else np.sin(rho)

    def c(self, rho):
        """Derivative of s."""
        return np.cosh(rho) if self.K == -1 else np.cos(rho)

    def t(self, rho):
        return np.tanh(rho) if self.K == -1 else np.tan(rho)

    def t_inv(self, x):
        return np.arctanh(x) if self.K == -1 else np.arctan(x)

    def f(self, rho):
        return self.s(rho) ** 2

    def df(self, rho):
        return 2.0 * self.s(rho) * self.c(rho)

    def sphere_curvature(self, rho):
        """Principal curvature c/s of the geodesic sphere of radius rho."""
        return self.c(rho) / self.s(rho)

    def monotone_weight(self, rho, m: int):
        """sinh^m rho for K=-1, cot^{-m} rho = tan^m rho for K=+1."""
        return self.s(rho) ** m if self.K == -1 else np.tan(rho) ** m

    def validate_radius(self, z) -> None:
        z = np.asarray(z)
        bad = np.flatnonzero(~(z > 0))
        if bad.size:
            raise NonPositiveRadius(f"radius must be positive; {bad.size} node(s) violate, first {bad[:5].tolist()}")
        if self.K == 1:
            bad = np.flatnonzero(z >= self.a)
            if bad.size:
                raise RadiusOutOfRange(f"radius must be < pi/2 in the elliptic space form; nodes {bad[:5].tolist()}")


@dataclass(frozen=True, eq=False)
class RadialGraph:
    """Radial function z over a sphere grid, 0 < z < a."""

    z: np.ndarray
    grid: SphereGrid
    space: SpaceForm

    def __post_init__(self):
        z = check_field(self.grid, self.z)
        self.space.validate_radius(z)
        object.__setattr__(self, "z", z)


@dataclass(eq=False)
class ShapeData:
    """Per-node curvature data of a hypersurface.  Arrays are node-major."""

    g: np.ndarray
    g_inv: np.ndarray
    b: np.ndarray
    a: np.ndarray | None = None
    lam: np.ndarray | None = None
    S: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.g.shape[-1]


# ---------------------------------------------------------------- array level


def radial_forms(space: SpaceForm, z, dz, hz, e, e_inv):
    """Induced metric, its inverse and second fundamental form.

    ``dz`` holds covariant first derivatives (N, n), ``hz`` the covariant
    Hessian (N, n, n).  Returns ``(g, g_inv, b)``.
    """
    f = space.f(z)
    df = space.df(z)
    zup = np.einsum("nij,nj->ni", e_inv, dz)
    grad2 = np.einsum("ni,ni->n", dz, zup)
    zz = dz[:, :, None] * dz[:, None, :]
    g = f[:, None, None] * e + zz
    g_inv = (e_inv - zup[:, :, None] * zup[:, None, :] / (f + grad2)[:, None, None]) / f[:, None, None]
    scale = f / np.sqrt(f * f + f * grad2)
    b = scale[:, None, None] * (-hz + (df / f)[:, None, None] * zz + 0.5 * df[:, None, None] * e)
    return g, g_inv, b


def generalized_eigvals(b, g, check: bool = True) -> np.ndarray:
    """Sorted eigenvalues of the pencil det(b - lam g) = 0 per node.

    Closed forms for n <= 2; Cholesky reduction to a symmetric standard
    problem otherwise.
    """
    n = g.shape[-1]
    if check:
        cond = np.linalg.cond(g)
        bad = np.flatnonzero(~(cond < COND_LIMIT))
        if bad.size:
            raise DegenerateMetric(f"metric condition number exceeds {COND_LIMIT:g} at nodes {bad[:5].tolist()}")
    if n == 1:
        return b[:, :, 0] / g[:, :, 0]
    if n == 2:
        # discriminant from the entries of a = g^-1 b: stable at nearly umbilic points
        detg = g[:, 0, 0] * g[:, 1, 1] - g[:, 0, 1] * g[:, 1, 0]
        a00 = (g[:, 1, 1] * b[:, 0, 0] - g[:, 0, 1] * b[:, 1, 0]) / detg
        a01 = (g[:, 1, 1] * b[:, 0, 1] - g[:, 0, 1] * b[:, 1, 1]) / detg
        a10 = (g[:, 0, 0] * b[:, 1, 0] - g[:, 1, 0] * b[:, 0, 0]) / detg
        a11 = (g[:, 0, 0] * b[:, 1, 1] - g[:, 1, 0] * b[:, 0, 1]) / detg
        half = 0.5 * (a00 + a11)
        d = 0.5 * (a00 - a11)
        disc = np.sqrt(np.maximum(d * d + a01 * a10, 0.0))
        return np.column_stack([half - disc, half + disc])
    L = np.linalg.cholesky(g)
    Linv = np.linalg.inv(L)
    C = Linv @ b @ np.swapaxes(Linv, -1, -2)
    return np.linalg.eigvalsh(0.5 * (C + np.swapaxes(C, -1, -2)))


def elementary_symmetric(lam) -> np.ndarray:
    """(S_0, ..., S_n) of the trailing axis of ``lam`` with S_0 = 1."""
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[-1]
    S = np.zeros(lam.shape[:-1] + (n + 1,))
    S[..., 0] = 1.0
    for i in range(n):
        x = lam[..., i]
        for k in range(i + 1, 0, -1):
            S[..., k] = S[..., k] + x * S[..., k - 1]
    return S


def principal_minor_sums(a) -> np.ndarray:
    """(F_0, ..., F_n): sums of principal minors of the trailing matrices, F_0 = 1.

    Brute-force enumeration, used as an independent check on S_m(lambda).
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[-1]
    F = np.zeros(a.shape[:-2] + (n + 1,))
    F[..., 0] = 1.0
    for m in range(1, n + 1):
        for idx in combinations(range(n), m):
            sub = a[..., idx, :][..., :, idx]
            F[..., m] += np.linalg.det(sub)
    return F


# ---------------------------------------------------------------- operations


def fundamental_forms(graph: RadialGraph) -> ShapeData:
    grid = graph.grid
    dz, _ = covariant_gradient(grid, graph.z)
    hz = covariant_hessian(grid, graph.z)
    g, g_inv, b = radial_forms(graph.space, graph.z, dz, hz, grid.e, grid.e_inv)
    return ShapeData(g=g, g_inv=g_inv, b=b)


def shape_operator(shape: ShapeData) -> np.ndarray:
    """a^i_j = g^{ik} b_{kj}; stored on ``shape`` as well."""
    shape.a = shape.g_inv @ shape.b
    return shape.a


def principal_curvatures(shape: ShapeData) -> np.ndarray:
    shape.lam = generalized_eigvals(shape.b, shape.g)
    return shape.lam


def symmetric_functions(lam):
    """Return ``(S, H)``: S_0..S_n and H_0..H_n = S_m / binom(n, m)."""
    S = elementary_symmetric(lam)
    n = S.shape[-1] - 1
    binoms = np.array([math.comb(n, m) for m in range(n + 1)], dtype=float)
    return S, S / binoms


def shape_data(graph: RadialGraph) -> ShapeData:
    """Fully populated ShapeData for a radial graph."""
    shape = fundamental_forms(graph)
    shape_operator(shape)
    principal_curvatures(shape)
    shape.S = elementary_symmetric(shape.lam)
    return shape


def is_m_admissible(S, m: int):
    """Per-node Gamma_m membership (S_j > 0 for 1 <= j <= m) and global verdict.

    ``S`` may be a ShapeData with S populated or an array (..., n+1).
    """
    if isinstance(S, ShapeData):
        if S.S is None:
            S.S = elementary_symmetric(S.lam if S.lam is not None else principal_curvatures(S))
        S = S.S
    S = np.asarray(S)
    n = S.shape[-1] - 1
    if not 1 <= m <= n:
        raise ValueError(f"order m={m} outside 1..{n}")
    ok = np.all(S[..., 1 : m + 1] > 0.0, axis=-1)
    return ok, bool(np.all(ok))


@dataclass
class Residual:
    values: np.ndarray
    admissible: bool
    bad_nodes: list


def hm_residual(graph: RadialGraph, psi, m: int, strict: bool = False) -> Residual:
    """F_m(a(z)) - binom(n, m) psi(u, z) at every node.

    Non-admissible nodes are reported via ``admissible``/``bad_nodes``;
    with ``strict=True`` they raise NotAdmissible instead.
    """
    shape = shape_data(graph)
    ok, all_ok = is_m_admissible(shape.S, m)
    n = graph.grid.n
    target = math.comb(n, m) * psi.value(graph.z, graph.grid)
    res = Residual(values=shape.S[:, m] - target, admissible=all_ok, bad_nodes=np.flatnonzero(~ok).tolist())
    if strict and not all_ok:
        raise NotAdmissible(f"graph is not {m}-admissible at {len(res.bad_nodes)} node(s)", res.bad_nodes)
    return res
