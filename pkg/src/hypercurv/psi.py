"""Prescription functions psi(u, rho) and the hypotheses placed on them.

psi is written as an infix expression in ``rho`` and the angular
coordinates (``theta``, and ``phi`` on S^2).  It is parsed with sympy into
an expression tree; the radial derivatives needed by the monotonicity
condition are exact symbolic derivatives of that tree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import sympy
from sympy.parsing.sympy_parser import parse_expr, standard_transformations

from .errors import PsiExpressionError
from .grid import SphereGrid
from .spaceform import SpaceForm

__all__ = [
    "PsiSpec",
    "ConditionReport",
    "parse_psi",
    "check_barrier_conditions",
    "check_monotonicity",
    "check_conditions",
    "check_extension",
    "QProfile",
    "q_profile",
    "q_sign_sweep",
]

RHO, THETA, PHI = sympy.symbols("rho theta phi", real=True)

MONOTONE_TOL = 1e-10
STRICT_THRESHOLD = 1e-10
BARRIER_RTOL = 1e-13  # rounding slack so that psi = kappa^m on the boundary passes

_FUNCTIONS = {
    "sinh": sympy.sinh,
    "cosh": sympy.cosh,
    "tanh": sympy.tanh,
    "coth": sympy.coth,
    "sin": sympy.sin,
    "cos": sympy.cos,
    "tan": sympy.tan,
    "cot": sympy.cot,
    "exp": sympy.exp,
    "log": sympy.log,
    "pow": sympy.Pow,
    "sqrt": sympy.sqrt,
    "pi": sympy.pi,
    "E": sympy.E,
}


def parse_psi(text: str, n: int = 2) -> sympy.Expr:
    """Parse an expression string over rho, theta (and phi when n = 2)."""
    names = dict(_FUNCTIONS)
    names.update(rho=RHO, theta=THETA, phi=PHI)
    try:
        expr = parse_expr(
            text.replace("^", "**"),
            local_dict=names,
            global_dict={"Integer": sympy.Integer, "Float": sympy.Float, "Rational": sympy.Rational, "Symbol": sympy.Symbol},
            transformations=standard_transformations,
            evaluate=True,
        )
    except NameError as exc:
        # auto_symbol turns unknown calls into Function(...), which is not whitelisted
        raise PsiExpressionError(f"unknown function in psi expression {text!r}; allowed: {sorted(k for k in _FUNCTIONS if k not in ('pi', 'E'))}") from exc
    except Exception as exc:  # sympy raises a zoo of exception types
        raise PsiExpressionError(f"cannot parse psi expression {text!r}: {exc}") from exc
    if not isinstance(expr, sympy.Expr):
        raise PsiExpressionError(f"psi expression {text!r} is not scalar")
    allowed = {RHO, THETA} | ({PHI} if n == 2 else set())
    extra = expr.free_symbols - allowed
    if extra:
        raise PsiExpressionError(f"unknown names in psi expression: {sorted(map(str, extra))}")
    return expr


def _lambdify(expr):
    fn = sympy.lambdify((RHO, THETA, PHI), expr, modules="numpy", cse=True)

    def call(rho, theta, phi):
        out = fn(rho, theta, phi)
        return np.broadcast_to(np.asarray(out, dtype=float), np.broadcast(rho, theta, phi).shape).copy()

    return call


@dataclass(eq=False)
class PsiSpec:
    """A positive prescription psi(u, rho) on the annulus R1 <= rho <= R2."""

    expr: sympy.Expr
    R1: float
    R2: float
    m: int
    n: int
    K: int = -1
    text: str = ""
    extend: bool = False  # continue past R2 with psi(u,R2) (w(R2)/w(rho))

    def __post_init__(self):
        space = SpaceForm(self.K)
        if not 0 < self.R1 < self.R2 < space.a:
            raise ValueError(f"need 0 < R1 < R2 < {space.a}, got R1={self.R1}, R2={self.R2}")
        if not 1 <= self.m <= self.n:
            raise ValueError(f"need 1 <= m <= n, got m={self.m}, n={self.n}")

    @classmethod
    def from_string(cls, text: str, R1: float, R2: float, m: int, n: int, K: int = -1, **kw) -> "PsiSpec":
        return cls(parse_psi(text, n), R1, R2, m, n, K, text=text, **kw)

    @property
    def space(self) -> SpaceForm:
        return SpaceForm(self.K)

    @property
    def binom(self) -> int:
        return math.comb(self.n, self.m)

    def _weight_expr(self):
        return sympy.sinh(RHO) ** self.m if self.K == -1 else sympy.tan(RHO) ** self.m

    @cached_property
    def _value(self):
        return _lambdify(self.expr)

    @cached_property
    def _drho(self):
        return _lambdify(sympy.diff(self.expr, RHO))

    @cached_property
    def _monotone(self):
        return _lambdify(sympy.diff(self.expr * self._weight_expr(), RHO))

    def __call__(self, rho, theta, phi=0.0):
        """psi at (rho, theta, phi), honouring the extension past R2 if enabled."""
        rho, theta, phi = np.broadcast_arrays(np.asarray(rho, float), np.asarray(theta, float), np.asarray(phi, float))
        if not self.extend:
            return self._value(rho, theta, phi)
        w = self.space.monotone_weight
        inside = rho <= self.R2
        base = self._value(np.where(inside, rho, self.R2), theta, phi)
        return np.where(inside, base, base * w(self.R2, self.m) / w(rho, self.m))

    def d_rho(self, rho, theta, phi=0.0):
        rho, theta, phi = np.broadcast_arrays(np.asarray(rho, float), np.asarray(theta, float), np.asarray(phi, float))
        inner = self._drho(rho, theta, phi)
        if not self.extend:
            return inner
        w = self.space.monotone_weight
        m = self.m
        base = self._value(np.full_like(rho, self.R2), theta, phi) * w(self.R2, m)
        dw = m * self.space.c(rho) / self.space.s(rho) if self.K == -1 else m / (np.sin(rho) * np.cos(rho))
        outer = -base / w(rho, m) * dw
        return np.where(rho <= self.R2, inner, outer)

    def monotone_derivative(self, rho, theta, phi=0.0):
        """d/drho [psi * w(rho)] with w = sinh^m (K=-1) or tan^m (K=+1)."""
        rho, theta, phi = np.broadcast_arrays(np.asarray(rho, float), np.asarray(theta, float), np.asarray(phi, float))
        inner = self._monotone(rho, theta, phi)
        if not self.extend:
            return inner
        return np.where(rho <= self.R2, inner, 0.0)

    def at_grid(self, rho, grid: SphereGrid, method: str = "__call__"):
        """Evaluate at grid nodes; ``rho`` is per-node or scalar."""
        theta = grid.nodes[:, 0]
        phi = grid.nodes[:, 1] if grid.n == 2 else np.zeros_like(theta)
        return getattr(self, method)(rho, theta, phi)

    def value(self, rho, grid: SphereGrid):
        return self.at_grid(rho, grid)


@dataclass
class ConditionReport:
    barrier_low_ok: bool | None = None
    barrier_high_ok: bool | None = None
    monotone_ok: bool | None = None
    strict_monotone: bool | None = None
    worst_margin: dict = field(default_factory=dict)
    violating_nodes: dict = field(default_factory=dict)
    positive_ok: bool | None = None

    @property
    def all_ok(self) -> bool:
        flags = [self.barrier_low_ok, self.barrier_high_ok, self.monotone_ok, self.positive_ok]
        return all(f is not False for f in flags)

    def as_dict(self) -> dict:
        return {
            "barrier_low_ok": self.barrier_low_ok,
            "barrier_high_ok": self.barrier_high_ok,
            "monotone_ok": self.monotone_ok,
            "strict_monotone": self.strict_monotone,
            "positive_ok": self.positive_ok,
            "worst_margin": dict(self.worst_margin),
            "violating_nodes": {k: list(v) for k, v in self.violating_nodes.items()},
        }


def check_barrier_conditions(psi: PsiSpec, grid: SphereGrid, report: ConditionReport | None = None) -> ConditionReport:
    """psi(u, R1) >= kappa(R1)^m and psi(u, R2) <= kappa(R2)^m at every node.

    kappa is coth (K=-1) or cot (K=+1): the principal curvature of the
    geodesic sphere of that radius.
    """
    report = report or ConditionReport()
    space = psi.space
    k1 = space.sphere_curvature(psi.R1) ** psi.m
    k2 = space.sphere_curvature(psi.R2) ** psi.m
    low = psi.value(psi.R1, grid) - k1
    high = k2 - psi.value(psi.R2, grid)
    bad_low = low < -BARRIER_RTOL * max(1.0, abs(k1))
    bad_high = high < -BARRIER_RTOL * max(1.0, abs(k2))
    report.barrier_low_ok = not bool(bad_low.any())
    report.barrier_high_ok = not bool(bad_high.any())
    report.worst_margin["barrier_low"] = float(low.min())
    report.worst_margin["barrier_high"] = float(high.min())
    report.violating_nodes["barrier_low"] = np.flatnonzero(bad_low).tolist()
    report.violating_nodes["barrier_high"] = np.flatnonzero(bad_high).tolist()
    return report


def _rho_samples(psi: PsiSpec, grid: SphereGrid, samples: int | None, hi: float | None = None):
    if samples is None:
        samples = 4 * grid.resolution
    return np.linspace(psi.R1, psi.R2 if hi is None else hi, max(int(samples), 2))


def check_monotonicity(
    psi: PsiSpec,
    grid: SphereGrid,
    samples: int | None = None,
    report: ConditionReport | None = None,
    tol: float = MONOTONE_TOL,
    strict_threshold: float = STRICT_THRESHOLD,
) -> ConditionReport:
    """Sign of d/drho[psi w] on the (node x rho-sample) lattice over [R1, R2].

    Also checks psi > 0 on the same lattice.
    """
    report = report or ConditionReport()
    rho = _rho_samples(psi, grid, samples)
    D = np.stack([psi.at_grid(r, grid, "monotone_derivative") for r in rho])
    vals = np.stack([psi.value(r, grid) for r in rho])
    worst = D.max(axis=0)
    report.monotone_ok = bool(worst.max() <= tol)
    report.strict_monotone = bool(worst.max() < -strict_threshold)
    report.worst_margin["monotone"] = float(-worst.max())
    report.violating_nodes["monotone"] = np.flatnonzero(worst > tol).tolist()
    report.positive_ok = bool(np.all(vals > 0.0))
    report.worst_margin["positive"] = float(vals.min())
    return report


def check_conditions(psi: PsiSpec, grid: SphereGrid, samples: int | None = None) -> ConditionReport:
    report = check_barrier_conditions(psi, grid)
    return check_monotonicity(psi, grid, samples, report)


def check_extension(psi: PsiSpec, grid: SphereGrid, rho_max: float, samples: int | None = None) -> dict:
    """Check the continuation of psi beyond R2 on (R2, rho_max].

    The extended psi must stay below kappa(R2)^m and keep d/drho[psi w] <= 0.
    """
    if not psi.extend:
        raise ValueError("psi has no extension configured")
    rho = np.linspace(psi.R2, rho_max, max(samples or 4 * grid.resolution, 2))
    bound = psi.space.sphere_curvature(psi.R2) ** psi.m
    vals = np.stack([psi.value(r, grid) for r in rho])
    D = np.stack([psi.at_grid(r, grid, "monotone_derivative") for r in rho])
    return {
        "bound_ok": bool(np.all(vals <= bound * (1 + 1e-14))),
        "bound_margin": float((bound - vals).min()),
        "monotone_ok": bool(D.max() <= MONOTONE_TOL),
        "monotone_margin": float(-D.max()),
    }


# ---------------------------------------------------------------- Q profile


@dataclass
class QProfile:
    s: np.ndarray
    Q: np.ndarray
    dQ: np.ndarray  # closed-form derivative
    dQ_fd: np.ndarray  # centered finite differences of Q
    q_at_one: float


def _q_parts(psi: PsiSpec, v_tilde, theta, phi, s):
    m = psi.m
    w = v_tilde / s
    frac = (1.0 - v_tilde**2) / (s * (1.0 - w**2))
    rho_w = 2.0 * np.arctanh(w)
    return m, w, frac, rho_w


def _q_value(psi: PsiSpec, v_tilde, theta, phi, s):
    m, w, frac, rho_w = _q_parts(psi, v_tilde, theta, phi, s)
    pb = psi.binom
    return frac**m * pb * psi(rho_w, theta, phi) - pb * psi(2.0 * np.arctanh(v_tilde), theta, phi)


def q_profile(psi: PsiSpec, v_tilde: float, u, s_values) -> QProfile:
    """Sample Q(s) for a fixed dilated value v_tilde at angular point ``u``.

    ``u`` is theta (n=1) or (theta, phi).  Requires K = -1.
    """
    if psi.K != -1:
        raise ValueError("the Q profile is defined for the hyperbolic space form only")
    theta, phi = (float(u), 0.0) if np.ndim(u) == 0 else (float(u[0]), float(u[1]))
    s = np.asarray(s_values, dtype=float)
    if np.any(s <= 0) or np.any(v_tilde / s >= 1.0) or not 0.0 < v_tilde < 1.0:
        raise ValueError("Q(s) requires 0 < v_tilde/s < 1")
    Q = _q_value(psi, v_tilde, theta, phi, s)
    m, w, frac, rho_w = _q_parts(psi, v_tilde, theta, phi, s)
    pb = psi.binom
    psi_w = pb * psi(rho_w, theta, phi)
    psi_z = pb * psi.d_rho(rho_w, theta, phi)
    one_minus = 1.0 - w**2
    dQ = -(s ** -(m + 1.0)) * ((1.0 - v_tilde**2) / one_minus) ** m * (
        m * (1.0 + w**2) / one_minus * psi_w + 2.0 * v_tilde / (s * one_minus) * psi_z
    )
    step = 1e-6 * np.maximum(1.0, s)
    dQ_fd = (_q_value(psi, v_tilde, theta, phi, s + step) - _q_value(psi, v_tilde, theta, phi, s - step)) / (2 * step)
    q1 = float(_q_value(psi, v_tilde, theta, phi, np.array([1.0]))[0])
    return QProfile(s=s, Q=Q, dQ=dQ, dQ_fd=dQ_fd, q_at_one=q1)


def q_sign_sweep(psi: PsiSpec, grid: SphereGrid, n_v: int = 9, n_s: int = 17, eps: float = 1e-3) -> dict:
    """Sweep Q over nodes, dilated values and scale factors.

    v_tilde ranges over tanh(rho/2) for rho in [R1, R2]; for each one s runs
    over [1, s_max] with s_max = v_tilde / tanh(R1/2) - eps so that the
    undilated radius 2 artanh(v_tilde/s) stays inside the annulus where the
    monotonicity hypothesis is made.
    """
    vt_values = np.tanh(0.5 * np.linspace(psi.R1, psi.R2, n_v))
    v_low = np.tanh(0.5 * psi.R1)
    min_dq = np.inf
    max_abs_q1 = 0.0
    max_abs_q = 0.0
    nodes = grid.nodes
    for vt in vt_values:
        s_max = vt / v_low - eps
        if s_max <= 1.0:
            s = np.array([1.0])
        else:
            s = np.linspace(1.0, s_max, n_s)
        for node in nodes:
            u = node[0] if grid.n == 1 else node
            prof = q_profile(psi, float(vt), u, s)
            min_dq = min(min_dq, float(prof.dQ.min()))
            max_abs_q1 = max(max_abs_q1, abs(prof.q_at_one))
            max_abs_q = max(max_abs_q, float(np.abs(prof.Q).max()))
    return {"min_dQ": min_dq, "max_abs_Q_at_1": max_abs_q1, "max_abs_Q": max_abs_q}
