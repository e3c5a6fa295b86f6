"""Newton-continuation solver for F_m(a(z)) = binom(n, m) psi(u, z).

The unknown is the conformal field v = t(z/2).  The residual at a node is a
pointwise function of the local jet (v, covariant gradient, covariant
Hessian), and the jet is linear in the nodal values through the grid's
difference operators.  The Jacobian is therefore

    J = diag(dPhi/dv) + sum_i diag(dPhi/dv_i) D_i + sum_kl diag(dPhi/dH_kl) Hess_kl

with the Hessian coefficients dPhi/dH_kl in closed form and the two lower
order coefficient fields obtained by central differences of the pointwise
residual.

The solve starts from a prescription with a known sphere solution z = R0
and follows psi_t = (1 - t) psi_0 + t psi to t = 1.
"""
from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .conformal import ConformalGraph, conformal_forms, ellipticity_spectrum
from .errors import (
    LeftAnnulus,
    LinearSolveFailed,
    LineSearchFailed,
    LostAdmissibility,
    MaxItersExceeded,
    PsiConditionsFailed,
)
from .grid import SphereGrid
from .psi import PsiSpec, check_conditions
from .spaceform import RadialGraph, SpaceForm, elementary_symmetric, is_m_admissible

__all__ = [
    "SolverConfig",
    "SolveReport",
    "HomotopyPsi",
    "start_psi",
    "Problem",
    "newton_step",
    "continuation_solve",
    "assemble_jacobian",
    "brute_force_jacobian",
]

log = logging.getLogger(__name__)

DENSE_LIMIT = 4000


@dataclass
class SolverConfig:
    m: int = 1
    max_newton_iters: int = 30
    newton_tol: float = 1e-10
    step_tol: float = 1e-10  # inner continuation steps stop here instead of newton_tol
    damping_factor: float = 0.5
    min_step: float = 1.0 / 1024
    continuation_steps: int = 4
    linear_solver: str = "auto"  # auto | direct-dense | iterative-krylov
    krylov_tol: float = 1e-12
    krylov_restart: int = 60
    krylov_maxiter: int = 400
    R0: float | None = None
    initial_guess: np.ndarray | None = None  # z values; overrides the sphere R0 as starting iterate
    admissibility_policy: str = "warn"  # warn | reject
    guard_fraction: float = 0.05
    require_conditions: bool = True
    fd_step: float = 1e-6
    backend: str | None = None

    def __post_init__(self):
        if self.newton_tol <= 0 or self.step_tol <= 0 or self.min_step <= 0:
            raise ValueError("tolerances must be positive")
        if not 0 < self.damping_factor < 1:
            raise ValueError("damping factor must lie in (0, 1)")
        if self.admissibility_policy not in ("warn", "reject"):
            raise ValueError(f"unknown admissibility policy {self.admissibility_policy!r}")
        if self.linear_solver not in ("auto", "direct-dense", "iterative-krylov"):
            raise ValueError(f"unknown linear solver {self.linear_solver!r}")
        if self.continuation_steps < 1 or self.max_newton_iters < 1:
            raise ValueError("continuation_steps and max_newton_iters must be >= 1")


@dataclass
class SolveReport:
    converged: bool = False
    iterations: list = field(default_factory=list)
    residual_history: list = field(default_factory=list)
    residual_sup: float = math.inf
    residual_l2: float = math.inf
    admissible: bool = False
    admissibility_warnings: int = 0
    annulus: dict = field(default_factory=dict)
    ellipticity: dict = field(default_factory=dict)
    linear_solver: str = ""
    continuation_steps: int = 0
    R0: float = math.nan
    wall_time: float = 0.0
    message: str = ""

    def as_dict(self, timing: bool = True) -> dict:
        out = asdict(self)
        if not timing:
            out.pop("wall_time")
        return out


class HomotopyPsi:
    """(1 - t) psi_0 + t psi, evaluated at grid nodes."""

    def __init__(self, psi0, psi, t: float):
        self.psi0 = psi0
        self.psi = psi
        self.t = float(t)

    def value(self, rho, grid: SphereGrid):
        if self.t == 1.0:
            return self.psi.value(rho, grid)
        if self.t == 0.0:
            return self.psi0.value(rho, grid)
        return (1.0 - self.t) * self.psi0.value(rho, grid) + self.t * self.psi.value(rho, grid)


def start_psi(psi: PsiSpec, R0: float) -> PsiSpec:
    """Prescription whose unique sphere solution is z = R0.

    K = -1: cosh^m(R0) / sinh^m(rho), the equality case of the monotonicity
    condition.  K = +1: cot^m(rho) exp(-(rho - R0)); there the equality case
    cot^m(rho) is solved by every sphere, so a strictly decreasing factor is
    added to single out R0.
    """
    m = psi.m
    if psi.K == -1:
        text = f"pow(cosh({R0!r}),{m})/pow(sinh(rho),{m})"
    else:
        text = f"pow(cot(rho),{m})*exp(-(rho-{R0!r}))"
    return PsiSpec.from_string(text, psi.R1, psi.R2, m, psi.n, psi.K)


class Problem:
    """Residual and Jacobian machinery for one grid, space form and order m."""

    def __init__(self, grid: SphereGrid, space: SpaceForm, m: int, backend: str | None = None, fd_step: float = 1e-6):
        if not 1 <= m <= grid.n:
            raise ValueError(f"order m={m} outside 1..{grid.n}")
        self.grid = grid
        self.space = space
        self.m = m
        self.binom = math.comb(grid.n, m)
        self.backend = backend
        self.fd_step = fd_step
        self._first = [grid.first_operator(i) for i in range(grid.n)]
        self._hess = grid.hessian_operators

    def jets(self, v):
        n = self.grid.n
        v = v - v[0]  # exact zeros on spheres; see grid._offset
        dv = np.column_stack([D @ v for D in self._first])
        hv = np.empty((v.size, n, n))
        for k in range(n):
            for l in range(k, n):
                hv[:, k, l] = self._hess[k][l] @ v
                hv[:, l, k] = hv[:, k, l]
        return dv, hv

    def z_of(self, v):
        return 2.0 * self.space.t_inv(v)

    def pointwise(self, v, dv, hv, target):
        """Residual as a function of the jet; returns (residual, S)."""
        _, S = kernels.conformal_curvatures(self.space.K, v, dv, hv, self.grid.e, self.grid.e_inv, backend=self.backend)
        return S[:, self.m] - self.binom * target.value(self.z_of(v), self.grid), S

    def residual(self, v, target):
        dv, hv = self.jets(v)
        return self.pointwise(v, dv, hv, target)[0]

    def hessian_coefficients(self, v, dv, hv):
        """dS_m/dH_kl per node, symmetric (N, n, n)."""
        K = self.space.K
        n = self.grid.n
        ghat, ghat_inv, bhat, q, W = conformal_forms(K, v, dv, hv, self.grid.e, self.grid.e_inv)
        a = ghat_inv @ bhat / q[:, None, None] - (K * v * v / W)[:, None, None] * np.eye(n)
        # dS_m/da = sum_k (-1)^k S_{m-1-k}(a) a^k
        if n <= 2:
            tr = np.trace(a, axis1=1, axis2=2)
            S = np.column_stack([np.ones_like(tr), tr] + ([np.linalg.det(a)] if n == 2 else []))
        else:
            S = elementary_symmetric(np.linalg.eigvals(a).real)
        G = np.zeros_like(a)
        power = np.broadcast_to(np.eye(n), a.shape).copy()
        for k in range(self.m):
            G += ((-1) ** k) * S[:, self.m - 1 - k][:, None, None] * power
            power = power @ a
        M = G @ ghat_inv
        P = -(v / (q * W))[:, None, None] * np.swapaxes(M, 1, 2)
        return 0.5 * (P + np.swapaxes(P, 1, 2))

    def jacobian(self, v, target):
        """Assembled sparse Jacobian of the nodal residual with respect to v."""
        n = self.grid.n
        dv, hv = self.jets(v)
        eps = self.fd_step
        hval = eps * np.maximum(1.0, np.abs(v))
        rp = self.pointwise(v + hval, dv, hv, target)[0]
        rm = self.pointwise(v - hval, dv, hv, target)[0]
        J = sp.diags((rp - rm) / (2.0 * hval))
        for i in range(n):
            step = eps * np.maximum(1.0, np.abs(dv[:, i]))
            dp = dv.copy()
            dp[:, i] += step
            dm = dv.copy()
            dm[:, i] -= step
            coef = (self.pointwise(v, dp, hv, target)[0] - self.pointwise(v, dm, hv, target)[0]) / (2.0 * step)
            J = J + sp.diags(coef) @ self._first[i]
        P = self.hessian_coefficients(v, dv, hv)
        for k in range(n):
            for l in range(n):
                J = J + sp.diags(P[:, k, l]) @ self._hess[k][l]
        return J.tocsr()

    def brute_force_jacobian(self, v, target, step: float = 1e-6):
        """Dense Jacobian by central differences of the full residual, column by column."""
        N = v.size
        J = np.empty((N, N))
        for j in range(N):
            h = step * max(1.0, abs(v[j]))
            vp = v.copy()
            vp[j] += h
            vm = v.copy()
            vm[j] -= h
            J[:, j] = (self.residual(vp, target) - self.residual(vm, target)) / (2.0 * h)
        return J


def assemble_jacobian(problem: Problem, v, target):
    return problem.jacobian(v, target)


def brute_force_jacobian(problem: Problem, v, target, step: float = 1e-6):
    return problem.brute_force_jacobian(v, target, step)


def _solve_linear(J, rhs, cfg: SolverConfig):
    N = rhs.size
    method = cfg.linear_solver
    if method == "auto":
        method = "direct-dense" if N <= DENSE_LIMIT else "iterative-krylov"
    if method == "direct-dense":
        try:
            with np.errstate(divide="ignore", invalid="ignore"), warnings.catch_warnings():
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                x = sla.solve(J.toarray(), rhs, check_finite=True)
        except (sla.LinAlgError, ValueError) as exc:
            raise LinearSolveFailed(f"dense solve failed: {exc}") from exc
        if not np.all(np.isfinite(x)):
            raise LinearSolveFailed("dense solve produced non-finite values (singular Jacobian)")
        return x, "direct-dense"
    diag = J.diagonal()
    if np.any(diag == 0):
        diag = np.where(diag == 0, 1.0, diag)
    M = spla.LinearOperator(J.shape, matvec=lambda x: x / diag)
    x, info = spla.gmres(J, rhs, M=M, rtol=cfg.krylov_tol, atol=0.0, restart=cfg.krylov_restart, maxiter=cfg.krylov_maxiter)
    if info == 0 and np.all(np.isfinite(x)):
        return x, "iterative-krylov"
    log.info("GMRES did not converge (info=%s); falling back to sparse LU", info)
    try:
        x = spla.splu(J.tocsc()).solve(rhs)
    except RuntimeError as exc:
        raise LinearSolveFailed(f"sparse LU failed after GMRES stalled: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise LinearSolveFailed("linear solve produced non-finite values")
    return x, "sparse-lu"


@dataclass
class StepInfo:
    residual_before: float
    residual_after: float
    step_norm: float
    damping: float
    linear_solver: str


def _merit(r):
    return float(np.sqrt(np.mean(r * r)))


def newton_step(problem: Problem, v, target, cfg: SolverConfig, residual=None):
    """One damped Newton step; returns ``(v_new, residual_new, StepInfo)``."""
    r = problem.residual(v, target) if residual is None else residual
    sup = float(np.max(np.abs(r)))
    if sup == 0.0:
        return v.copy(), r, StepInfo(0.0, 0.0, 0.0, 1.0, "none")
    J = problem.jacobian(v, target)
    delta, used = _solve_linear(J, -r, cfg)
    base = _merit(r)
    alpha = 1.0
    while alpha >= cfg.min_step:
        trial = v + alpha * delta
        if np.all((trial > 0.0) & (trial < 1.0)):
            rt = problem.residual(trial, target)
            if np.all(np.isfinite(rt)) and _merit(rt) <= (1.0 - 1e-4 * alpha) * base:
                info = StepInfo(sup, float(np.max(np.abs(rt))), float(alpha * np.max(np.abs(delta))), alpha, used)
                return trial, rt, info
        alpha *= cfg.damping_factor
    raise LineSearchFailed(f"no sufficient decrease down to step {cfg.min_step:g} (residual {sup:.3e})")


def _annulus(z, psi: PsiSpec, guard: float) -> dict:
    zmin, zmax = float(z.min()), float(z.max())
    return {
        "z_min": zmin,
        "z_max": zmax,
        "margin_low": zmin - psi.R1,
        "margin_high": psi.R2 - zmax,
        "inside": bool(zmin >= psi.R1 - guard and zmax <= psi.R2 + guard),
        "strictly_inside": bool(zmin > psi.R1 and zmax < psi.R2),
    }


def continuation_solve(psi: PsiSpec, cfg: SolverConfig, grid: SphereGrid):
    """Solve H_m = psi on ``grid``; returns ``(RadialGraph, SolveReport)``.

    Raises a SolverError subclass on failure; the partial report is attached
    to the exception as ``exc.report``.
    """
    tic = time.perf_counter()
    if cfg.m != psi.m:
        raise ValueError(f"solver order m={cfg.m} does not match psi order m={psi.m}")
    if grid.n != psi.n:
        raise ValueError(f"grid dimension {grid.n} does not match psi dimension {psi.n}")
    if cfg.require_conditions:
        cond = check_conditions(psi, grid)
        if not cond.all_ok:
            raise PsiConditionsFailed("psi violates the barrier/monotonicity hypotheses", cond)
    space = psi.space
    problem = Problem(grid, space, cfg.m, cfg.backend, cfg.fd_step)
    R0 = 0.5 * (psi.R1 + psi.R2) if cfg.R0 is None else float(cfg.R0)
    psi0 = start_psi(psi, R0)
    z_start = np.full(grid.size, R0) if cfg.initial_guess is None else np.asarray(cfg.initial_guess, float)
    v = space.t(0.5 * z_start)
    guard = cfg.guard_fraction * (psi.R2 - psi.R1)
    report = SolveReport(R0=R0, continuation_steps=cfg.continuation_steps)

    def fail(exc_type, message):
        report.message = message
        report.wall_time = time.perf_counter() - tic
        return exc_type(message, report)

    steps = cfg.continuation_steps
    for k in range(1, steps + 1):
        t = k / steps
        target = HomotopyPsi(psi0, psi, t)
        tol = cfg.newton_tol if k == steps else max(cfg.step_tol, cfg.newton_tol)
        r = problem.residual(v, target)
        report.residual_history.append(float(np.max(np.abs(r))))
        iters = 0
        while np.max(np.abs(r)) > tol:
            if iters >= cfg.max_newton_iters:
                report.iterations.append(iters)
                raise fail(MaxItersExceeded, f"Newton did not reach {tol:g} in {iters} iterations at t={t:g}")
            try:
                v, r, info = newton_step(problem, v, target, cfg, r)
            except (LineSearchFailed, LinearSolveFailed) as exc:
                report.iterations.append(iters)
                raise fail(type(exc), f"{exc} at t={t:g}") from exc
            iters += 1
            report.linear_solver = info.linear_solver
            report.residual_history.append(info.residual_after)
            z = problem.z_of(v)
            if z.min() < psi.R1 - guard or z.max() > psi.R2 + guard:
                report.iterations.append(iters)
                raise fail(LeftAnnulus, f"iterate left the guard band [{psi.R1 - guard:g}, {psi.R2 + guard:g}] at t={t:g}")
            _, S = problem.pointwise(v, *problem.jets(v), target)
            ok, all_ok = is_m_admissible(S, cfg.m)
            if not all_ok:
                if cfg.admissibility_policy == "reject":
                    report.iterations.append(iters)
                    raise fail(LostAdmissibility, f"iterate left Gamma_{cfg.m} at {int((~ok).sum())} node(s), t={t:g}")
                report.admissibility_warnings += 1
                log.warning("iterate not %d-admissible at %d node(s) (t=%g)", cfg.m, int((~ok).sum()), t)
        report.iterations.append(iters)

    z = problem.z_of(v)
    r = problem.residual(v, psi)
    _, S = problem.pointwise(v, *problem.jets(v), psi)
    _, all_ok = is_m_admissible(S, cfg.m)
    report.residual_sup = float(np.max(np.abs(r)))
    report.residual_l2 = float(np.sqrt(np.mean(r * r)))
    report.admissible = all_ok
    report.annulus = _annulus(z, psi, guard)
    if all_ok:
        spec = ellipticity_spectrum(ConformalGraph(v, grid, space), cfg.m)
        report.ellipticity = {"max_eigenvalue": float(spec.max()), "min_abs_eigenvalue": float(np.abs(spec).min()), "negative": bool(spec.max() < 0)}
    report.converged = report.residual_sup <= cfg.newton_tol
    report.wall_time = time.perf_counter() - tic
    if not all_ok:
        raise fail(LostAdmissibility, "final iterate is not admissible")
    return RadialGraph(z, grid, space), report
