"""Checks of the uniqueness relation and the boundary-touch identity on computed graphs."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .conformal import expansion_coefficients
from .errors import GridMismatch, NotAdmissible, NotAtBoundary, NotAtMaximum
from .grid import covariant_gradient
from .spaceform import RadialGraph, is_m_admissible, shape_data

__all__ = ["ScalingFit", "fit_scaling_constant", "TouchReport", "boundary_touch_identity", "touch_mu"]

DEFAULT_SOLVER_TOL = 1e-10


@dataclass
class ScalingFit:
    c: float
    residual: float
    ratio_spread: float
    related: bool
    identical: bool
    tolerance: float

    def as_dict(self) -> dict:
        return asdict(self)


def fit_scaling_constant(z1: RadialGraph, z2: RadialGraph, tol: float | None = None) -> ScalingFit:
    """Fit c in c tanh(z1/2) = tanh(z2/2).

    c is the median of the nodal ratios taken in log space, so the fit of
    (z2, z1) is exactly the reciprocal of the fit of (z1, z2).  ``tol``
    defaults to ten times the default solver tolerance.
    """
    if not z1.grid.same_as(z2.grid):
        raise GridMismatch("graphs live on different grids")
    if z1.space.K != -1 or z2.space.K != -1:
        raise ValueError("the scaling relation is only asserted in the hyperbolic space form")
    tol = 10.0 * DEFAULT_SOLVER_TOL if tol is None else tol
    v1 = np.tanh(0.5 * z1.z)
    v2 = np.tanh(0.5 * z2.z)
    ratio = v2 / v1
    c = float(np.exp(np.median(np.log(ratio))))
    residual = float(np.max(np.abs(c * v1 - v2)))
    related = residual <= tol
    return ScalingFit(
        c=c,
        residual=residual,
        ratio_spread=float(ratio.max() / ratio.min()),
        related=related,
        identical=related and abs(c - 1.0) <= tol,
        tolerance=tol,
    )


def touch_mu(space, R2: float) -> float:
    """f'(R2) / (2 f(R2)): the principal curvature of the sphere of radius R2."""
    return float(space.df(R2) / (2.0 * space.f(R2)))


@dataclass
class TouchReport:
    node: int
    mu: float
    s: list
    direct: list
    identity: list
    discrepancy: float
    positive: bool
    gradient_norm: float
    boundary_gap: float

    def as_dict(self) -> dict:
        return asdict(self)


def boundary_touch_identity(
    graph: RadialGraph,
    m: int,
    boundary: float,
    u0: int | None = None,
    s_values=(0.0, 0.25, 0.5, 0.75, 1.0),
    side: str = "R2",
    boundary_tol: float | None = None,
    grad_tol: float | None = None,
) -> TouchReport:
    """Compare S_m of z(s) = (1 - s) z + s R with its expansion at a touching point.

    At a node u0 where z attains R as an extremum, a(z(s)) = (1-s) a(z) + s mu I
    and so S_m(z(s)) = sum_p c_p (1-s)^p (mu s)^(m-p) S_p(z).  The p = 0
    coefficient is binom(n, m) (the S_0 = binom(n, m) normalization); the
    others come from the same expansion used for the dilation family.

    ``side`` is "R2" (u0 a maximum) or "R1" (u0 a minimum).
    """
    grid = graph.grid
    z = graph.z
    n = grid.n
    if u0 is None:
        u0 = int(np.argmax(z) if side == "R2" else np.argmin(z))
    extreme = z.max() if side == "R2" else z.min()
    if z[u0] != extreme:
        raise NotAtMaximum(f"node {u0} is not the discrete {'maximum' if side == 'R2' else 'minimum'} of z")
    dz, dz_up = covariant_gradient(grid, z)
    gnorm = float(np.sqrt(dz[u0] @ dz_up[u0]))
    if grad_tol is None:
        grad_tol = 10.0 * grid.h * max(float(np.ptp(z)), 1e-12)
    if gnorm > grad_tol:
        raise NotAtMaximum(f"discrete gradient {gnorm:.3e} at node {u0} exceeds {grad_tol:.3e}")
    gap = float(abs(z[u0] - boundary))
    if boundary_tol is None:
        boundary_tol = max(grid.h**2, 1e-12)
    if gap > boundary_tol:
        raise NotAtBoundary(f"z(u0) = {z[u0]!r} is {gap:.3e} away from the boundary radius {boundary!r}")
    base = shape_data(graph)
    _, ok = is_m_admissible(base.S[u0 : u0 + 1], m)
    if not ok:
        raise NotAdmissible(f"graph is not {m}-admissible at the touching node {u0}", [u0])
    mu = touch_mu(graph.space, boundary)
    c = list(expansion_coefficients(n, m))
    c[0] = float(math.comb(n, m))
    S_base = base.S[u0]
    direct, identity = [], []
    for s in s_values:
        zs = RadialGraph((1.0 - s) * z + s * boundary, grid, graph.space)
        direct.append(float(shape_data(zs).S[u0, m]))
        identity.append(float(sum(c[p] * (1.0 - s) ** p * (mu * s) ** (m - p) * (S_base[p] if p else 1.0) for p in range(m + 1))))
    d = np.asarray(direct)
    return TouchReport(
        node=u0,
        mu=mu,
        s=[float(s) for s in s_values],
        direct=direct,
        identity=identity,
        discrepancy=float(np.max(np.abs(d - np.asarray(identity)))),
        positive=bool(np.all(d > 0.0)),
        gradient_norm=gnorm,
        boundary_gap=gap,
    )
