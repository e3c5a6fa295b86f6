"""Self-checks of the curvature identities on generated graphs.

Each suite returns a plain dict with a boolean ``passed`` and the numbers it
was decided on, so the same code backs ``hypercurv verify-identities`` and
the acceptance tests.
"""
from __future__ import annotations

import numpy as np

from .conformal import conformal_curvatures, ellipticity_spectrum, scaled_sm, to_conformal
from .grid import build_grid
from .psi import q_sign_sweep
from .samples import MANUFACTURED_Z, equality_psi, manufactured_psi, random_smooth_graph
from .spaceform import RadialGraph, SpaceForm, is_m_admissible, principal_curvatures, shape_data
from .verify import boundary_touch_identity

__all__ = [
    "dual_path_suite",
    "expansion_suite",
    "spectrum_suite",
    "q_profile_suite",
    "touch_identity_suite",
    "run_all",
    "CASES",
    "SCALES",
]

CASES = ((1, 1), (2, 1), (2, 2))
SCALES = {-1: (1.0, 1.1, 1.5), 1: (0.7, 0.9, 1.0)}
BASE_RADIUS = {-1: 1.0, 1: 1.0}

DUAL_TOL = 1e-6
CONSTANT_TOL = 1e-9
RANDOM_TOL = 1e-8
SPECTRUM_CEILING = -1e-12
Q_ONE_TOL = 1e-14
DQ_FLOOR = -1e-8
Q_EQUALITY_TOL = 1e-12
MU_TOL = 1e-12


def _dual_discrepancy(graph: RadialGraph) -> float:
    direct = principal_curvatures(shape_data(graph))
    conformal = conformal_curvatures(to_conformal(graph))
    return float(np.max(np.abs(np.sort(direct, axis=1) - np.sort(conformal, axis=1))))


def dual_path_suite(resolutions=None, seed: int = 0) -> dict:
    """Radial vs conformal principal curvatures on random graphs under refinement."""
    resolutions = resolutions or {1: (256, 512), 2: (32, 64)}
    out = {"cases": [], "passed": True}
    for n, levels in resolutions.items():
        for K in (-1, 1):
            space = SpaceForm(K)
            errs = []
            for res in levels:
                graph = random_smooth_graph(build_grid(n, res), space, seed=seed, radius=BASE_RADIUS[K])
                errs.append(_dual_discrepancy(graph))
            ratios = [errs[i] / errs[i + 1] if errs[i + 1] > 0 else float("inf") for i in range(len(errs) - 1)]
            ok = errs[-1] < DUAL_TOL and all(r >= 3.5 for r in ratios)
            out["cases"].append({"n": n, "K": K, "resolutions": list(levels), "discrepancy": errs, "ratios": ratios, "passed": ok})
            out["passed"] &= ok
    return out


def expansion_suite(resolution: int | None = None, seed: int = 0) -> dict:
    """S_m(lam(s v)) against its expansion, plus the one-sided bound and admissibility."""
    out = {"cases": [], "passed": True}
    for n, m in CASES:
        grid = build_grid(n, resolution or (64 if n == 1 else 16))
        for K in (-1, 1):
            space = SpaceForm(K)
            graphs = {
                "constant": RadialGraph(np.full(grid.size, BASE_RADIUS[K]), grid, space),
                "random": random_smooth_graph(grid, space, seed=seed, radius=BASE_RADIUS[K]),
            }
            for kind, graph in graphs.items():
                cg = to_conformal(graph)
                tol = CONSTANT_TOL if kind == "constant" else RANDOM_TOL
                for s in SCALES[K]:
                    r = scaled_sm(cg, s, m)
                    ok = r.discrepancy < tol and r.admissible and (r.inequality_holds or not r.inequality_guaranteed)
                    out["cases"].append(
                        {
                            "n": n, "m": m, "K": K, "graph": kind, "s": s,
                            "discrepancy": r.discrepancy,
                            "inequality_holds": r.inequality_holds,
                            "inequality_guaranteed": r.inequality_guaranteed,
                            "admissible": r.admissible,
                            "passed": ok,
                        }
                    )
                    out["passed"] &= ok
    return out


def spectrum_suite(resolution: int | None = None, seeds=(0, 1, 2)) -> dict:
    """Linearized operator eigenvalues on admissible graphs must be strictly negative."""
    out = {"cases": [], "passed": True}
    for n, m in CASES:
        grid = build_grid(n, resolution or (64 if n == 1 else 16))
        for K in (-1, 1):
            space = SpaceForm(K)
            for seed in seeds:
                graph = random_smooth_graph(grid, space, seed=seed, radius=BASE_RADIUS[K])
                _, adm = is_m_admissible(shape_data(graph).S, m)
                if not adm:
                    continue
                top = float(ellipticity_spectrum(to_conformal(graph), m).max())
                ok = top < SPECTRUM_CEILING
                out["cases"].append({"n": n, "m": m, "K": K, "seed": seed, "max_eigenvalue": top, "passed": ok})
                out["passed"] &= ok
    out["passed"] &= bool(out["cases"])
    return out


def _q_prescriptions(n: int):
    """(name, psi, is_equality_case) triples used by the Q-profile suite."""
    cases = [
        ("manufactured", manufactured_psi(MANUFACTURED_Z, n, 1, 0.8, 1.6), False),
        ("equality", equality_psi(2.0, 1, n, 0.8, 1.6), True),
    ]
    if n == 2:
        cases.append(("equality_m2", equality_psi(3.0, 2, 2, 0.8, 1.6), True))
    return cases


def q_profile_suite(resolution: int = 16) -> dict:
    """Q(1) = 0, dQ/ds >= 0 for monotone psi, Q identically 0 in the equality case."""
    out = {"cases": [], "passed": True}
    for n in (1, 2):
        grid = build_grid(n, max(resolution, 8) if n == 1 else 8)
        for name, psi, equality in _q_prescriptions(n):
            sweep = q_sign_sweep(psi, grid)
            ok = sweep["max_abs_Q_at_1"] <= Q_ONE_TOL and sweep["min_dQ"] >= DQ_FLOOR
            if equality:
                ok &= sweep["max_abs_Q"] < Q_EQUALITY_TOL
            out["cases"].append({"n": n, "psi": name, "equality": equality, **sweep, "passed": ok})
            out["passed"] &= ok
    return out


def touching_graph(grid, space: SpaceForm, R2: float, amplitude: float = 0.1) -> RadialGraph:
    """Graph whose discrete maximum equals R2.

    The continuous peak sits a fixed fraction of a cell away from a node, so
    the discrete gradient at the maximum is O(h) at every resolution.
    """
    if grid.n == 1:
        z = -amplitude * (1.0 - np.cos(grid.nodes[:, 0] - 0.3 * grid.h))
    else:
        ht, hp = grid.spacing
        th = grid.nodes[grid.shape[1] * (grid.shape[0] // 4), 0] + 0.3 * ht
        ph = 0.3 * hp
        d = np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
        z = -amplitude * (1.0 - grid.cartesian @ d)
    return RadialGraph(z - z.max() + R2, grid, space)


def touch_identity_suite(R2: float = 2.0, levels=None) -> dict:
    """Boundary-touch identity at the discrete maximum under refinement."""
    levels = levels or {1: (64, 128, 256), 2: (16, 32)}
    space = SpaceForm(-1)
    out = {"cases": [], "passed": True}
    for n, resolutions in levels.items():
        for m in range(1, n + 1):
            errs, positive, mu_err = [], True, 0.0
            for res in resolutions:
                rep = boundary_touch_identity(touching_graph(build_grid(n, res), space, R2), m, R2)
                errs.append(rep.discrepancy)
                positive &= rep.positive
                mu_err = max(mu_err, abs(rep.mu - 1.0 / np.tanh(R2)))
            ratios = [errs[i] / errs[i + 1] if errs[i + 1] > 0 else float("inf") for i in range(len(errs) - 1)]
            # O(h^2): halving h must shrink the discrepancy about fourfold
            ok = positive and mu_err < MU_TOL and all(r >= 3.0 for r in ratios)
            out["cases"].append(
                {"n": n, "m": m, "resolutions": list(resolutions), "discrepancy": errs, "ratios": ratios, "positive": positive, "mu_error": mu_err, "passed": ok}
            )
            out["passed"] &= ok
    return out


def run_all(seed: int = 0) -> dict:
    suites = {
        "dual_path": dual_path_suite(seed=seed),
        "expansion": expansion_suite(seed=seed),
        "spectrum": spectrum_suite(seeds=(seed, seed + 1, seed + 2)),
        "q_profile": q_profile_suite(),
        "touch_identity": touch_identity_suite(),
    }
    return {"seed": seed, "passed": all(s["passed"] for s in suites.values()), "suites": suites}
