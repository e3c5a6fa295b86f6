"""Conformal-ball description of radial graphs.

A radial graph z is replaced by v = t(z/2) (t = tanh for K = -1, tan for
K = +1).  In this variable the shape operator splits into the Euclidean
shape operator of the graph of v over S^n plus a multiple of the identity,
and the dilation v -> s v acts on it affinely.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NotAdmissible, OutOfRange, ScaleOutOfRange
from .grid import SphereGrid, check_field, covariant_gradient, covariant_hessian
from .spaceform import (
    RadialGraph,
    SpaceForm,
    elementary_symmetric,
    generalized_eigvals,
    is_m_admissible,
)

__all__ = [
    "ConformalGraph",
    "ScaleCoefficients",
    "to_conformal",
    "from_conformal",
    "conformal_forms",
    "conformal_shape_operator",
    "conformal_curvatures",
    "scale_coefficients",
    "expansion_coefficients",
    "scaled_sm",
    "sm_gradient",
    "ellipticity_spectrum",
]

EQUALITY_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class ConformalGraph:
    v: np.ndarray
    grid: SphereGrid
    space: SpaceForm

    def __post_init__(self):
        v = check_field(self.grid, self.v)
        bad = np.flatnonzero(~((v > 0.0) & (v < 1.0)))
        if bad.size:
            raise OutOfRange(f"conformal field must lie in (0, 1); nodes {bad[:5].tolist()}")
        object.__setattr__(self, "v", v)

    @property
    def q(self) -> np.ndarray:
        return 2.0 / (1.0 + self.space.K * self.v**2)

    @property
    def W(self) -> np.ndarray:
        dv, dv_up = covariant_gradient(self.grid, self.v)
        return np.sqrt(self.v**2 + np.einsum("ni,ni->n", dv, dv_up))

    def scaled(self, s: float) -> "ConformalGraph":
        sv = s * self.v
        if np.any(sv >= 1.0):
            raise ScaleOutOfRange(f"s*v >= 1 for s={s}")
        return ConformalGraph(sv, self.grid, self.space)


@dataclass
class ScaleCoefficients:
    s: float
    A: np.ndarray
    B: np.ndarray


def to_conformal(graph: RadialGraph) -> ConformalGraph:
    return ConformalGraph(graph.space.t(0.5 * graph.z), graph.grid, graph.space)


def from_conformal(cg: ConformalGraph) -> RadialGraph:
    return RadialGraph(2.0 * cg.space.t_inv(cg.v), cg.grid, cg.space)


def conformal_forms(K: int, v, dv, hv, e, e_inv):
    """Euclidean forms of the graph of v and the factors q, W.

    Returns ``(ghat, ghat_inv, bhat, q, W)``.
    """
    vup = np.einsum("nij,nj->ni", e_inv, dv)
    grad2 = np.einsum("ni,ni->n", dv, vup)
    W2 = v * v + grad2
    W = np.sqrt(W2)
    vv = dv[:, :, None] * dv[:, None, :]
    v2 = (v * v)[:, None, None]
    ghat = v2 * e + vv
    ghat_inv = (e_inv - vup[:, :, None] * vup[:, None, :] / W2[:, None, None]) / v2
    bhat = (-v[:, None, None] * hv + 2.0 * vv + v2 * e) / W[:, None, None]
    q = 2.0 / (1.0 + K * v * v)
    return ghat, ghat_inv, bhat, q, W


def _jets(cg: ConformalGraph):
    dv, _ = covariant_gradient(cg.grid, cg.v)
    hv = covariant_hessian(cg.grid, cg.v)
    return dv, hv


def conformal_shape_operator(cg: ConformalGraph):
    """Return ``(ahat, a)`` per node, with a = ahat / q - K v^2 / W * I."""
    dv, hv = _jets(cg)
    ghat, ghat_inv, bhat, q, W = conformal_forms(cg.space.K, cg.v, dv, hv, cg.grid.e, cg.grid.e_inv)
    ahat = ghat_inv @ bhat
    n = cg.grid.n
    a = ahat / q[:, None, None] - (cg.space.K * cg.v**2 / W)[:, None, None] * np.eye(n)
    return ahat, a


def conformal_curvatures(cg: ConformalGraph) -> np.ndarray:
    """Sorted principal curvatures via the conformal route."""
    dv, hv = _jets(cg)
    ghat, _, bhat, q, W = conformal_forms(cg.space.K, cg.v, dv, hv, cg.grid.e, cg.grid.e_inv)
    lam_hat = generalized_eigvals(bhat, ghat)
    return lam_hat / q[:, None] - (cg.space.K * cg.v**2 / W)[:, None]


def scale_coefficients(cg: ConformalGraph, s: float) -> ScaleCoefficients:
    if s <= 0:
        raise ScaleOutOfRange(f"scale factor must be positive, got {s}")
    v = cg.v
    if np.any(s * v >= 1.0):
        raise ScaleOutOfRange(f"s*v >= 1 somewhere for s={s}")
    K = cg.space.K
    A = (1.0 + K * s * s * v * v) / (s * (1.0 + K * v * v))
    B = K * (1.0 - s * s) * v * v / (s * (1.0 + K * v * v) * cg.W)
    return ScaleCoefficients(s=s, A=A, B=B)


@lru_cache(maxsize=None)
def expansion_coefficients(n: int, m: int, seed: int = 12345) -> tuple:
    """Coefficients c(n, m, j), j = 0..m, in S_m(A lam + B) = sum_j c A^j B^(m-j) S_j(lam).

    Determined numerically: with A = 1, S_m(lam + B) is a degree-m
    polynomial in B whose B^(m-j) coefficient is c(n, m, j) S_j(lam).  The
    polynomial is recovered by a Vandermonde solve at m + 1 sample shifts
    for a random lam and the results rounded when they are integers to
    within 1e-8.
    """
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    lam = rng.uniform(0.5, 1.5, size=n)
    shifts = np.linspace(-1.0, 1.0, m + 1)
    values = np.array([elementary_symmetric(lam + b)[m] for b in shifts])
    V = np.vander(shifts, m + 1, increasing=True)  # column k multiplies B^k
    poly = np.linalg.solve(V, values)
    S = elementary_symmetric(lam)
    coeffs = []
    for j in range(m + 1):
        c = poly[m - j] / S[j]
        r = round(c)
        coeffs.append(float(r) if abs(c - r) < 1e-8 else float(c))
    return tuple(coeffs)


@dataclass
class ScaledSm:
    direct: np.ndarray
    expansion: np.ndarray
    lower_bound: np.ndarray  # A^m S_m(lam(v))
    discrepancy: float
    inequality_holds: bool
    inequality_guaranteed: bool  # sign conditions K=-1, s>=1 or K=+1, s<=1
    equality: np.ndarray  # per-node: direct == A^m S_m within EQUALITY_RTOL
    admissible: bool


def scaled_sm(cg: ConformalGraph, s: float, m: int) -> ScaledSm:
    """S_m of the dilated graph s v, computed directly and by expansion."""
    K = cg.space.K
    n = cg.grid.n
    S_v = elementary_symmetric(conformal_curvatures(cg))
    _, ok = is_m_admissible(S_v, m)
    if not ok:
        raise NotAdmissible(f"conformal graph is not {m}-admissible")
    coef = scale_coefficients(cg, s)
    scaled = cg.scaled(s)
    S_sv = elementary_symmetric(conformal_curvatures(scaled))
    direct = S_sv[:, m]
    c = expansion_coefficients(n, m)
    expansion = sum(c[j] * coef.A**j * coef.B ** (m - j) * S_v[:, j] for j in range(m + 1))
    lower = coef.A**m * S_v[:, m]
    sign_ok = (K == -1 and s >= 1.0) or (K == 1 and s <= 1.0)
    slack = EQUALITY_RTOL * np.maximum(1.0, np.abs(lower))
    holds = bool(np.all(direct >= lower - slack))
    _, adm = is_m_admissible(S_sv, m)
    return ScaledSm(
        direct=direct,
        expansion=expansion,
        lower_bound=lower,
        discrepancy=float(np.max(np.abs(direct - expansion))),
        inequality_holds=holds,
        inequality_guaranteed=sign_ok,
        equality=np.abs(direct - lower) <= slack,
        admissible=adm,
    )


def sm_gradient(lam, m: int) -> np.ndarray:
    """dS_m/dlam_i = S_{m-1}(lam with lam_i removed), shape like ``lam``."""
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[-1]
    out = np.empty_like(lam)
    for i in range(n):
        rest = np.delete(lam, i, axis=-1)
        out[..., i] = elementary_symmetric(rest)[..., m - 1]
    return out


def ellipticity_spectrum(cg: ConformalGraph, m: int) -> np.ndarray:
    """Eigenvalues of -(v/(qW)) dS_m/dlam_i in the principal frame, per node.

    On m-admissible graphs every entry is strictly negative.
    """
    lam = conformal_curvatures(cg)
    S = elementary_symmetric(lam)
    ok, all_ok = is_m_admissible(S, m)
    if not all_ok:
        raise NotAdmissible(f"graph is not {m}-admissible", np.flatnonzero(~ok))
    factor = cg.v / (cg.q * cg.W)
    spec = -factor[:, None] * sm_gradient(lam, m)
    return np.sort(spec, axis=-1)
