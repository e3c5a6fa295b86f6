import math
from itertools import permutations

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hypercurv import RadialGraph, SpaceForm, build_grid
from hypercurv.errors import DegenerateMetric, NonPositiveRadius, NotAdmissible, RadiusOutOfRange
from hypercurv.grid import covariant_gradient
from hypercurv.psi import PsiSpec
from hypercurv.samples import graph_from_expression, random_smooth_graph
from hypercurv.spaceform import (
    elementary_symmetric,
    fundamental_forms,
    generalized_eigvals,
    hm_residual,
    is_m_admissible,
    principal_curvatures,
    principal_minor_sums,
    shape_data,
    shape_operator,
    symmetric_functions,
)

COTH1 = 1.3130352854993312  # 1/tanh(1)


def test_profile_functions():
    hyp, ell = SpaceForm(-1), SpaceForm(1)
    assert hyp.f(0.0) == 0.0 and ell.f(0.0) == 0.0
    rho = np.linspace(0.05, 1.5, 50)
    for sp in (hyp, ell):
        assert np.all(sp.df(rho) > 0)
        assert np.all(np.diff(sp.t(rho)) > 0)
    assert np.allclose(hyp.f(rho), np.sinh(rho) ** 2)
    assert np.allclose(ell.f(rho), np.sin(rho) ** 2)
    assert np.all(hyp.t(rho) < 1)
    with pytest.raises(ValueError):
        SpaceForm(0)


def test_radius_validation(circle64):
    with pytest.raises(NonPositiveRadius):
        RadialGraph(np.full(circle64.size, -0.1), circle64, SpaceForm(-1))
    with pytest.raises(RadiusOutOfRange):
        RadialGraph(np.full(circle64.size, 1.6), circle64, SpaceForm(1))


def test_constant_graph_forms(sphere16):
    g = RadialGraph(np.ones(sphere16.size), sphere16, SpaceForm(-1))
    sd = fundamental_forms(g)
    assert np.allclose(sd.g, np.sinh(1) ** 2 * sphere16.e, rtol=1e-14)
    assert np.allclose(sd.b, np.sinh(1) * np.cosh(1) * sphere16.e, rtol=1e-14)
    a = shape_operator(sd)
    assert np.allclose(a, COTH1 * np.eye(2), atol=1e-14)
    lam = principal_curvatures(sd)
    assert np.max(np.abs(lam - COTH1)) < 1e-12
    # inner-normal convention: b of a sphere is positive definite
    assert np.all(np.linalg.eigvalsh(sd.b) > 0)


@pytest.mark.parametrize("R", [0.3, 0.7, 1.2])
def test_elliptic_sphere_curvature(R, sphere16):
    lam = shape_data(RadialGraph(np.full(sphere16.size, R), sphere16, SpaceForm(1))).lam
    assert np.max(np.abs(lam - 1 / math.tan(R))) < 1e-14


def test_symmetric_functions_closed_form():
    S, H = symmetric_functions(np.array([[COTH1, COTH1]]))
    assert S[0, 2] == pytest.approx(1.7240617, abs=1e-7)
    assert H[0, 2] == pytest.approx(1.7240617, abs=1e-7)
    assert H[0, 1] == pytest.approx(COTH1)
    S0, _ = symmetric_functions(np.zeros((1, 3)))
    assert S0[0].tolist() == [1.0, 0.0, 0.0, 0.0]


def _brute_S(lam, m):
    return sum(math.prod(lam[list(idx)]) for idx in __import__("itertools").combinations(range(len(lam)), m))


@given(arrays(float, (4,), elements=st.floats(-3, 3)))
def test_elementary_symmetric_matches_subset_products(lam):
    S = elementary_symmetric(lam)
    for m in range(5):
        assert S[m] == pytest.approx(_brute_S(lam, m) if m else 1.0, abs=1e-9)


@given(arrays(float, (2, 2), elements=st.floats(-2, 2)), arrays(float, (2, 2), elements=st.floats(-1, 1)))
def test_minor_sums_match_eigenvalue_symmetric_functions(b0, p):
    # symmetric positive definite g and symmetric b give a real spectrum for a = g^-1 b
    g = np.eye(2) + 0.5 * (p @ p.T)
    b = 0.5 * (b0 + b0.T)
    a = np.linalg.solve(g, b)
    lam = generalized_eigvals(b[None], g[None])[0]
    F = principal_minor_sums(a[None])[0]
    assert np.allclose(elementary_symmetric(lam), F, atol=1e-12 * max(1, np.abs(a).max() ** 2))


def _det_by_permutation(M):
    n = M.shape[0]
    total = 0.0
    for perm in permutations(range(n)):
        sign = np.linalg.det(np.eye(n)[list(perm)])
        total += sign * math.prod(M[i, perm[i]] for i in range(n))
    return total


@pytest.mark.parametrize("K", [-1, 1])
@pytest.mark.parametrize("n", [1, 2])
def test_random_graph_invariants(K, n):
    grid = build_grid(n, 64 if n == 1 else 16)
    sp = SpaceForm(K)
    graph = random_smooth_graph(grid, sp, seed=3, radius=1.0, amplitude=0.05)
    sd = shape_data(graph)
    eye = np.broadcast_to(np.eye(n), sd.g.shape)
    assert np.allclose(sd.g_inv @ sd.g, eye, atol=1e-12)
    ga = sd.g @ sd.a
    assert np.max(np.abs(ga - np.swapaxes(ga, 1, 2))) < 1e-12
    # determinant identity det g = f^{n-1} (f + |grad z|^2) det e
    dz, dzu = covariant_gradient(grid, graph.z)
    f = sp.f(graph.z)
    grad2 = np.einsum("ni,ni->n", dz, dzu)
    detg = np.array([_det_by_permutation(M) for M in sd.g])
    dete = np.linalg.det(grid.e)
    assert np.allclose(detg, f ** (n - 1) * (f + grad2) * dete, rtol=1e-12)
    # spectrum of the non-symmetric a equals the generalized spectrum of (b, g)
    ev = np.sort(np.linalg.eigvals(sd.a).real, axis=1)
    assert np.max(np.abs(ev - sd.lam)) < 1e-10
    assert np.allclose(principal_minor_sums(sd.a), sd.S, atol=1e-12)
    if n == 1:
        assert np.array_equal(sd.lam[:, 0], sd.b[:, 0, 0] / sd.g[:, 0, 0])


def _embedding_curvatures(K, z_expr, theta, phi=None):
    """Principal curvatures from an explicit embedding of the space form.

    K = -1: the hyperboloid <X, X> = -1 in Minkowski space; K = +1: the unit
    sphere in Euclidean space.  b_ij = <d_ij X, N> with N the inward unit normal
    tangent to the model, g_ij = <d_i X, d_j X>.
    """
    th, ph = sympy.symbols("theta phi", real=True)
    z = z_expr(th, ph)
    ch, sh = (sympy.cosh, sympy.sinh) if K == -1 else (sympy.cos, sympy.sin)
    if phi is None:
        X = sympy.Matrix([ch(z), sh(z) * sympy.cos(th), sh(z) * sympy.sin(th)])
        R = sympy.Matrix([K * -1 * sh(z) if K == -1 else -sh(z), ch(z) * sympy.cos(th), ch(z) * sympy.sin(th)])
        coords = [th]
    else:
        X = sympy.Matrix([ch(z), sh(z) * sympy.sin(th) * sympy.cos(ph), sh(z) * sympy.sin(th) * sympy.sin(ph), sh(z) * sympy.cos(th)])
        rad = -sh(z) if K == 1 else sh(z)
        R = sympy.Matrix([rad, ch(z) * sympy.sin(th) * sympy.cos(ph), ch(z) * sympy.sin(th) * sympy.sin(ph), ch(z) * sympy.cos(th)])
        coords = [th, ph]
    dX = [X.diff(c) for c in coords]
    ddX = [[X.diff(a).diff(b) for b in coords] for a in coords]
    fn = sympy.lambdify((th, ph), [X, R, dX, ddX], "numpy")
    Xv, Rv, dXv, ddXv = fn(theta, 0.0 if phi is None else phi)
    Xv, Rv = np.asarray(Xv, float).ravel(), np.asarray(Rv, float).ravel()
    dXv = [np.asarray(d, float).ravel() for d in dXv]
    ddXv = [[np.asarray(d, float).ravel() for d in row] for row in ddXv]
    J = np.diag([-1.0] + [1.0] * (len(Xv) - 1)) if K == -1 else np.eye(len(Xv))
    # normal: J-orthogonal to X and to the tangent vectors
    A = np.array([Xv, *dXv]) @ J
    N = np.linalg.svd(A)[2][-1]
    N = N / math.sqrt(N @ J @ N)
    if N @ J @ Rv > 0:  # point inward, against the outward radial direction
        N = -N
    k = len(dXv)
    g = np.array([[dXv[i] @ J @ dXv[j] for j in range(k)] for i in range(k)])
    b = np.array([[ddXv[i][j] @ J @ N for j in range(k)] for i in range(k)])
    return np.sort(np.linalg.eigvals(np.linalg.solve(g, b)).real)


@pytest.mark.parametrize("K", [-1, 1])
def test_circle_curvature_against_embedding(K):
    expr = lambda t, p: sympy.Rational(6, 5) + sympy.cos(t) / 10 + sympy.sin(2 * t) / 20  # noqa: E731
    errs = []
    for res in (128, 256):
        grid = build_grid(1, res)
        graph = graph_from_expression("1.2 + 0.1*cos(theta) + 0.05*sin(2*theta)", grid, SpaceForm(K))
        lam = shape_data(graph).lam[:, 0]
        idx = [0, res // 5, res // 2, 3 * res // 4]
        ref = np.array([_embedding_curvatures(K, expr, grid.nodes[i, 0])[0] for i in idx])
        errs.append(np.max(np.abs(lam[idx] - ref)))
    assert errs[1] < 1e-4
    assert errs[0] / errs[1] > 3.5


@pytest.mark.parametrize("K", [-1, 1])
def test_sphere_curvature_against_embedding(K):
    expr = lambda t, p: 1 + sympy.sin(t) * sympy.cos(p) / 10 + sympy.cos(t) ** 2 / 20  # noqa: E731
    grid = build_grid(2, 32)
    graph = graph_from_expression("1 + 0.1*sin(theta)*cos(phi) + 0.05*cos(theta)**2", grid, SpaceForm(K))
    lam = shape_data(graph).lam
    for i in (0, 70, grid.size // 2 + 5, grid.size - 3):
        ref = _embedding_curvatures(K, expr, *grid.nodes[i])
        assert np.max(np.abs(lam[i] - ref)) < 1e-5


@pytest.mark.parametrize(
    "lam,m,expected",
    [((-1.0, 3.0), 1, True), ((-1.0, 3.0), 2, False), ((2.0, -0.1), 2, False), ((COTH1, COTH1), 2, True)],
)
def test_admissibility_examples(lam, m, expected):
    ok, glob = is_m_admissible(elementary_symmetric(np.array([lam])), m)
    assert bool(ok[0]) is expected and glob is expected


def test_constant_graph_admissible_for_all_orders(sphere16):
    sd = shape_data(RadialGraph(np.full(sphere16.size, 0.8), sphere16, SpaceForm(-1)))
    for m in (1, 2):
        assert is_m_admissible(sd, m)[1]
    with pytest.raises(ValueError):
        is_m_admissible(sd, 3)


def test_maclaurin_chain_on_admissible_nodes(sphere16):
    graph = random_smooth_graph(sphere16, SpaceForm(-1), seed=5, amplitude=0.1)
    S, H = symmetric_functions(shape_data(graph).lam)
    ok, _ = is_m_admissible(S, 2)
    assert ok.all()
    assert np.all(H[:, 1] >= np.sqrt(H[:, 2]) - 1e-14)


def test_degenerate_metric_detected():
    g = np.array([[[1.0, 0.0], [0.0, 1e-14]]])
    with pytest.raises(DegenerateMetric):
        generalized_eigvals(np.eye(2)[None], g)


@pytest.mark.parametrize("m", [1, 2])
def test_residual_vanishes_on_the_start_sphere(m, sphere16):
    R0 = 1.1
    psi = PsiSpec.from_string(f"cosh({R0})**{m}/sinh(rho)**{m}", 0.8, 1.6, m, 2)
    res = hm_residual(RadialGraph(np.full(sphere16.size, R0), sphere16, SpaceForm(-1)), psi, m)
    assert res.admissible and np.max(np.abs(res.values)) < 1e-12


def test_residual_flags_non_admissible_nodes(circle64):
    # a strongly dented circle has negative curvature near the dent
    graph = graph_from_expression("1.0 + 0.3*cos(4*theta)", circle64, SpaceForm(-1))
    psi = PsiSpec.from_string("1/sinh(rho)", 0.5, 1.5, 1, 1)
    res = hm_residual(graph, psi, 1)
    assert not res.admissible and res.bad_nodes
    with pytest.raises(NotAdmissible) as info:
        hm_residual(graph, psi, 1, strict=True)
    assert info.value.nodes == res.bad_nodes


def test_manufactured_residual_is_second_order():
    from hypercurv.samples import MANUFACTURED_Z, manufactured_psi

    psi = manufactured_psi(MANUFACTURED_Z, 1, 1, 0.8, 1.6)
    errs = []
    for res in (64, 128):
        grid = build_grid(1, res)
        errs.append(np.max(np.abs(hm_residual(graph_from_expression(MANUFACTURED_Z, grid, SpaceForm(-1)), psi, 1).values)))
    assert 3.6 < errs[0] / errs[1] < 4.4
