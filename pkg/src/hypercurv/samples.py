"""Reusable test objects: random smooth graphs and manufactured prescriptions.

A manufactured prescription is built from a chosen radial function z*: its
m-th mean curvature is computed symbolically from the same fundamental
forms the solver discretizes, then multiplied by a radial factor that is 1
on z* and makes psi * w(rho) strictly decreasing.  z* is then an exact
solution of the continuous problem.
"""
from __future__ import annotations

import math

import numpy as np
import sympy

from .grid import SphereGrid
from .psi import PHI, RHO, THETA, PsiSpec
from .spaceform import RadialGraph, SpaceForm

__all__ = [
    "random_smooth_graph",
    "graph_from_expression",
    "symbolic_hm",
    "manufactured_psi",
    "equality_psi",
    "MANUFACTURED_Z",
]

# Solver validation case: n = 1, m = 1, K = -1 on the annulus [0.8, 1.6].
MANUFACTURED_Z = "1.2 + 0.05*cos(theta)"


def random_smooth_graph(grid: SphereGrid, space: SpaceForm, seed: int = 0, radius: float = 1.0, amplitude: float = 0.02) -> RadialGraph:
    """radius + amplitude * (random combination of low-order harmonics).

    On S^2 the harmonics are polynomials in the Cartesian coordinates, which
    are smooth through the poles.
    """
    rng = np.random.default_rng(seed)
    if grid.n == 1:
        th = grid.nodes[:, 0]
        coef = rng.uniform(-1.0, 1.0, size=(3, 2))
        pert = sum(coef[k, 0] * np.cos((k + 1) * th) + coef[k, 1] * np.sin((k + 1) * th) for k in range(3))
    else:
        x = grid.cartesian
        terms = [x[:, 0], x[:, 1], x[:, 2], x[:, 0] * x[:, 1], x[:, 1] * x[:, 2], x[:, 0] * x[:, 2], x[:, 0] ** 2 - x[:, 1] ** 2, x[:, 2] ** 2]
        coef = rng.uniform(-1.0, 1.0, size=len(terms))
        pert = sum(c * t for c, t in zip(coef, terms))
    pert = pert / max(np.abs(pert).max(), 1e-300)
    return RadialGraph(radius + amplitude * pert, grid, space)


def _names(n):
    names = {"theta": THETA, "phi": PHI, "pi": sympy.pi}
    for fn in ("sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "log", "sqrt"):
        names[fn] = getattr(sympy, fn)
    return names


def graph_from_expression(text: str, grid: SphereGrid, space: SpaceForm) -> RadialGraph:
    expr = sympy.sympify(text, locals=_names(grid.n))
    fn = sympy.lambdify((THETA, PHI), expr, "numpy")
    th = grid.nodes[:, 0]
    ph = grid.nodes[:, 1] if grid.n == 2 else np.zeros_like(th)
    return RadialGraph(np.broadcast_to(np.asarray(fn(th, ph), float), th.shape).copy(), grid, space)


def symbolic_hm(z_text: str, n: int, m: int, K: int = -1) -> sympy.Expr:
    """H_m of the radial graph z(theta[, phi]) as a symbolic expression."""
    z = sympy.sympify(z_text, locals=_names(n))
    coords = [THETA] if n == 1 else [THETA, PHI]
    s = sympy.sinh(z) if K == -1 else sympy.sin(z)
    c = sympy.cosh(z) if K == -1 else sympy.cos(z)
    f = s**2
    df = 2 * s * c
    if n == 1:
        e = sympy.Matrix([[1]])
        gam = lambda i, a, b: 0  # noqa: E731
    else:
        e = sympy.diag(1, sympy.sin(THETA) ** 2)

        def gam(i, a, b):
            if i == 0 and a == 1 and b == 1:
                return -sympy.sin(THETA) * sympy.cos(THETA)
            if i == 1 and {a, b} == {0, 1}:
                return sympy.cos(THETA) / sympy.sin(THETA)
            return 0

    dz = [sympy.diff(z, x) for x in coords]
    hess = sympy.Matrix(n, n, lambda a, b: sympy.diff(z, coords[a], coords[b]) - sum(gam(i, a, b) * dz[i] for i in range(n)))
    e_inv = e.inv()
    grad2 = sum(e_inv[i, j] * dz[i] * dz[j] for i in range(n) for j in range(n))
    g = sympy.Matrix(n, n, lambda a, b: f * e[a, b] + dz[a] * dz[b])
    scale = f / sympy.sqrt(f**2 + f * grad2)
    b = sympy.Matrix(n, n, lambda a, bb: scale * (-hess[a, bb] + df / f * dz[a] * dz[bb] + df / 2 * e[a, bb]))
    a = g.inv() * b
    if m == 1:
        S = a.trace()
    elif m == n == 2:
        S = a.det()
    else:
        raise ValueError(f"unsupported (n, m) = ({n}, {m})")
    return S / math.comb(n, m)


def manufactured_psi(z_text: str, n: int, m: int, R1: float, R2: float, K: int = -1, eps: float = 0.2) -> PsiSpec:
    """psi(u, rho) = H_m(z*)(u) * (w(z*)/w(rho)) * exp(-eps (rho - z*)).

    w = sinh^m (K=-1) or tan^m (K=+1).  z* solves H_m = psi exactly and
    d/drho[psi w] = -eps psi w < 0 whenever H_m(z*) > 0.
    """
    z = sympy.sympify(z_text, locals=_names(n))
    hm = symbolic_hm(z_text, n, m, K)
    w = (lambda r: sympy.sinh(r) ** m) if K == -1 else (lambda r: sympy.tan(r) ** m)
    expr = hm * w(z) / w(RHO) * sympy.exp(-eps * (RHO - z))
    return PsiSpec(expr, R1, R2, m, n, K, text=str(expr))


def equality_psi(C: float, m: int, n: int, R1: float, R2: float) -> PsiSpec:
    """psi = C / sinh^m(rho): the equality case of the monotonicity condition."""
    text = f"{C!r}/pow(sinh(rho),{m})"
    return PsiSpec.from_string(text, R1, R2, m, n, -1)
