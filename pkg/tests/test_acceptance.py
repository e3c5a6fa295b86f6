"""Acceptance criteria 1-10, one PASS/FAIL line each.

Lines are printed with capture disabled so they show up in plain
``pytest -v`` output as well as with ``-s``.
"""
import itertools
import math
import time

import numpy as np
import pytest

from hypercurv import PsiSpec, RadialGraph, SpaceForm, build_grid
from hypercurv.cli import EXIT_OK, main
from hypercurv.identities import dual_path_suite, expansion_suite, q_profile_suite, spectrum_suite, touch_identity_suite
from hypercurv.psi import q_profile
from hypercurv.samples import MANUFACTURED_Z, graph_from_expression, manufactured_psi, random_smooth_graph
from hypercurv.solver import Problem, SolverConfig, continuation_solve
from hypercurv.spaceform import shape_data
from hypercurv.verify import fit_scaling_constant


@pytest.fixture
def verdict(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return emit


def test_criterion_01_sphere_exactness(verdict):
    tic = time.perf_counter()
    worst_lam = worst_h = 0.0
    cases = [(-1, R) for R in (0.5, 1.0, 2.0)] + [(1, R) for R in (0.3, 0.7)]
    for (K, R), (n, res) in itertools.product(cases, ((1, 64), (2, 16))):
        grid = build_grid(n, res)
        shape = shape_data(RadialGraph(np.full(grid.size, R), grid, SpaceForm(K)))
        kappa = 1 / math.tanh(R) if K == -1 else 1 / math.tan(R)
        worst_lam = max(worst_lam, float(np.max(np.abs(shape.lam - kappa))))
        for m in range(1, n + 1):
            H = shape.S[:, m] / math.comb(n, m)
            worst_h = max(worst_h, float(np.max(np.abs(H - kappa**m))))
    elapsed = time.perf_counter() - tic
    ok = worst_lam < 1e-10 and worst_h < 1e-10 and elapsed < 1.0
    verdict(1, ok, f"max |lam - kappa| = {worst_lam:.1e}, max |H_m - kappa^m| = {worst_h:.1e}, {elapsed:.2f} s")


def test_criterion_02_dual_path(verdict):
    tic = time.perf_counter()
    res = dual_path_suite(resolutions={1: (256, 512), 2: (64, 128)})
    elapsed = time.perf_counter() - tic
    hyp = [c for c in res["cases"] if c["K"] == -1]
    at_level = {c["n"]: c["discrepancy"][0] for c in hyp}
    ratios = [c["ratios"][0] for c in hyp]
    ok = all(e < 1e-6 for e in at_level.values()) and all(r >= 3.5 for r in ratios) and elapsed < 30.0
    verdict(
        2,
        ok,
        f"K=-1 sup discrepancy n=1@256 {at_level[1]:.2e}, n=2@64x128 {at_level[2]:.2e}, "
        f"doubling ratios {', '.join(f'{r:.2f}' for r in ratios)}, {elapsed:.1f} s",
    )


def test_criterion_03_dilation_expansion(verdict):
    res = expansion_suite()
    worst_const = max(c["discrepancy"] for c in res["cases"] if c["graph"] == "constant")
    worst_rand = max(c["discrepancy"] for c in res["cases"] if c["graph"] == "random")
    ineq = all(c["inequality_holds"] for c in res["cases"] if c["inequality_guaranteed"])
    adm = all(c["admissible"] for c in res["cases"])
    ok = res["passed"] and worst_const < 1e-9 and ineq and adm
    verdict(3, ok, f"{len(res['cases'])} cases, constant {worst_const:.1e}, random {worst_rand:.1e}, inequality {ineq}, admissible {adm}")


def test_criterion_04_ellipticity(verdict):
    res = spectrum_suite()
    top = max(c["max_eigenvalue"] for c in res["cases"])
    ok = res["passed"] and top < -1e-12
    verdict(4, ok, f"{len(res['cases'])} admissible graphs, largest eigenvalue {top:.3e}")


def test_criterion_05_manufactured_solution(verdict):
    psi = manufactured_psi(MANUFACTURED_Z, 1, 1, 0.8, 1.6)
    errs, residual, elapsed = [], None, None
    for res in (64, 128, 256):
        grid = build_grid(1, res)
        tic = time.perf_counter()
        graph, rep = continuation_solve(psi, SolverConfig(m=1), grid)
        elapsed = time.perf_counter() - tic
        residual = rep.residual_sup
        errs.append(float(np.max(np.abs(graph.z - graph_from_expression(MANUFACTURED_Z, grid, SpaceForm(-1)).z))))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    ok = residual < 1e-10 and errs[-1] < 5e-4 and np.all(rates > 1.8) and elapsed < 10.0
    verdict(5, ok, f"residual {residual:.1e}, error@256 {errs[-1]:.2e}, orders {', '.join(f'{r:.2f}' for r in rates)}, {elapsed:.2f} s")


def test_criterion_06_uniqueness(verdict):
    psi = manufactured_psi(MANUFACTURED_Z, 1, 1, 0.8, 1.6)
    grid = build_grid(1, 256)
    sols = [continuation_solve(psi, SolverConfig(m=1, R0=R0), grid)[0] for R0 in (0.9, 1.0, 1.2, 1.4, 1.5)]
    fits = [fit_scaling_constant(a, b, tol=1e-6) for a, b in itertools.combinations(sols, 2)]
    dc = max(abs(f.c - 1) for f in fits)
    worst = max(f.residual for f in fits)
    ok = dc < 1e-5 and worst < 1e-6
    verdict(6, ok, f"{len(fits)} pairs, max |c - 1| = {dc:.1e}, max relation residual {worst:.1e}")


def test_criterion_07_q_profile(verdict):
    res = q_profile_suite()
    # Q(1) = 0 is structural, so it must also hold for a psi that fails monotonicity
    extra = max(
        abs(q_profile(PsiSpec.from_string("coth(rho)", 0.8, 1.6, 1, 1), math.tanh(0.6), th, [1.0]).q_at_one) for th in (0.0, 1.0, 2.0)
    )
    q1 = max(max(c["max_abs_Q_at_1"] for c in res["cases"]), extra)
    dq = min(c["min_dQ"] for c in res["cases"] if not c["equality"])
    eq = max(c["max_abs_Q"] for c in res["cases"] if c["equality"])
    ok = res["passed"] and q1 <= 1e-14
    verdict(7, ok, f"max |Q(1)| {q1:.1e}, min dQ/ds {dq:.2e} (monotone psi), max |Q| {eq:.1e} (equality case)")


def test_criterion_08_boundary_touch(verdict):
    res = touch_identity_suite()
    ratios = [r for c in res["cases"] for r in c["ratios"]]
    mu = max(c["mu_error"] for c in res["cases"])
    pos = all(c["positive"] for c in res["cases"])
    ok = res["passed"] and mu < 1e-12 and pos
    verdict(8, ok, f"doubling ratios {min(ratios):.2f}-{max(ratios):.2f}, S_m > 0 {pos}, mu error {mu:.1e}")


def test_criterion_09_jacobian(verdict):
    grid = build_grid(1, 16)
    space = SpaceForm(-1)
    v = space.t(0.5 * random_smooth_graph(grid, space, seed=9, radius=1.1, amplitude=0.05).z)
    psi = manufactured_psi(MANUFACTURED_Z, 1, 1, 0.8, 1.6)
    prob = Problem(grid, space, 1)
    J = prob.jacobian(v, psi).toarray()
    B = prob.brute_force_jacobian(v, psi)
    rel = float(np.linalg.norm(J - B) / np.linalg.norm(B))
    verdict(9, rel < 1e-6, f"16 nodes, relative Frobenius error {rel:.1e}")


def test_criterion_10_determinism(verdict, tmp_path):
    codes, blobs = [], []
    for run in ("a", "b"):
        out = tmp_path / run
        codes.append(main(["solve", "--resolution", "128", "--seed", "7", "--out", str(out)]))
        blobs.append((out / "report.json").read_bytes())
    ok = codes == [EXIT_OK, EXIT_OK] and blobs[0] == blobs[1]
    verdict(10, ok, f"exit codes {codes}, report.json {len(blobs[0])} bytes, identical {blobs[0] == blobs[1]}")
