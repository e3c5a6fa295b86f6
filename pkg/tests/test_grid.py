import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from hypercurv.grid import build_grid, covariant_gradient, covariant_hessian, round_christoffel, round_metric


def test_circle_grid_is_flat():
    g = build_grid(1, 16)
    assert g.size == 16
    assert np.all(g.e[:, 0, 0] == 1.0)
    assert np.all(g.christoffel == 0.0)


def test_sphere_metric_at_equator_and_45_degrees():
    e, _ = round_metric(np.array([np.pi / 2, np.pi / 4]), 2)
    assert np.allclose(e[0], np.eye(2), atol=1e-15)
    assert e[1, 1, 1] == pytest.approx(0.5, abs=1e-15)
    gam = round_christoffel(np.array([np.pi / 2]), 2)
    assert abs(gam[0, 0, 1, 1]) < 1e-16


def test_only_three_christoffel_symbols_are_nonzero():
    g = build_grid(2, 16)
    nz = {idx for idx in zip(*np.nonzero(np.any(g.christoffel != 0.0, axis=0)))}
    assert nz == {(0, 1, 1), (1, 0, 1), (1, 1, 0)}


def test_sphere_nodes_avoid_poles():
    g = build_grid(2, 12)
    assert g.shape == (12, 24)
    th = np.unique(g.nodes[:, 0])
    assert th.min() == pytest.approx(0.5 * np.pi / 12)
    assert th.max() == pytest.approx(np.pi - 0.5 * np.pi / 12)


@pytest.mark.parametrize("n", [1, 2])
def test_metric_inverse_and_positivity(n):
    g = build_grid(n, 12)
    eye = np.broadcast_to(np.eye(n), g.e.shape)
    assert np.allclose(np.einsum("nij,njk->nik", g.e_inv, g.e), eye, atol=1e-14)
    assert np.all(np.linalg.eigvalsh(g.e) > 0)


@pytest.mark.parametrize("n,res", [(3, 16), (0, 16), (1, 4), (2, 7), (1, 12.5)])
def test_rejects_bad_arguments(n, res):
    with pytest.raises(ValueError):
        build_grid(n, res)


@pytest.mark.parametrize("n", [1, 2])
def test_constant_field_has_zero_derivatives(n):
    g = build_grid(n, 16)
    c = np.full(g.size, 3.7)
    cov, contra = covariant_gradient(g, c)
    assert np.max(np.abs(cov)) < 1e-12 and np.max(np.abs(contra)) < 1e-12
    assert np.max(np.abs(covariant_hessian(g, c))) < 1e-10


def _circle_err(res, fn, d1, node_value, which):
    g = build_grid(1, res)
    th = g.nodes[:, 0]
    i = int(np.argmin(np.abs(th - node_value)))
    if which == 1:
        return covariant_gradient(g, fn(th))[0][i, 0] - d1(th[i])
    return covariant_hessian(g, fn(th))[i, 0, 0] - d1(th[i])


def test_circle_gradient_at_critical_point_and_order_two():
    g = build_grid(1, 64)
    assert abs(covariant_gradient(g, np.cos(g.nodes[:, 0]))[0][0, 0]) < 1e-15
    errs = [abs(_circle_err(r, np.cos, lambda t: -np.sin(t), np.pi / 2, 1)) for r in (64, 128)]
    assert np.log2(errs[0] / errs[1]) >= 1.9
    assert abs(errs[1]) < 1e-3


def test_circle_second_derivative_of_cos2theta():
    errs = [abs(_circle_err(r, lambda t: np.cos(2 * t), lambda t: -4 * np.cos(2 * t), 0.0, 2)) for r in (64, 128)]
    assert np.log2(errs[0] / errs[1]) >= 1.9


def _symbolic_hessian(expr):
    """Covariant Hessian of the round metric by direct symbolic differentiation."""
    th, ph = sympy.symbols("theta phi", real=True)
    f = expr(th, ph)
    gam = {(0, 1, 1): -sympy.sin(th) * sympy.cos(th), (1, 0, 1): sympy.cot(th), (1, 1, 0): sympy.cot(th)}
    x = (th, ph)
    H = [[sympy.diff(f, x[k], x[l]) - sum(gam.get((i, k, l), 0) * sympy.diff(f, x[i]) for i in range(2)) for l in range(2)] for k in range(2)]
    return sympy.lambdify((th, ph), H, "numpy")


def test_sphere_hessian_against_symbolic_oracle():
    g = build_grid(2, 32)
    th, ph = g.nodes.T
    field = np.cos(th) + 0.3 * np.sin(th) * np.cos(ph)
    oracle = _symbolic_hessian(lambda t, p: sympy.cos(t) + sympy.Rational(3, 10) * sympy.sin(t) * sympy.cos(p))
    H = covariant_hessian(g, field)
    ref = np.moveaxis(np.array(oracle(th, ph), dtype=float), (0, 1), (1, 2))
    # compare orthonormal components so the pole rows are not favoured
    scale = np.stack([np.ones_like(th), np.sin(th)], axis=1)
    err = np.abs(H - ref) / (scale[:, :, None] * scale[:, None, :])
    assert err.max() < 1e-4


@pytest.mark.parametrize("n", [1, 2])
def test_first_harmonic_trace_identity(n):
    g = build_grid(n, 32)
    v = g.cartesian[:, 0]
    tr = np.einsum("nij,nij->n", g.e_inv, covariant_hessian(g, v))
    # circle: h^2/12 truncation; S^2: fourth-order stencil times the 1/sin^2 pole factor
    assert np.max(np.abs(tr + n * v)) < (5e-3 if n == 1 else 1e-4)


def test_sphere_hessian_converges_with_refinement():
    errs = []
    for res in (16, 32):
        g = build_grid(2, res)
        v = g.cartesian[:, 0] * g.cartesian[:, 2]
        tr = np.einsum("nij,nij->n", g.e_inv, covariant_hessian(g, v))
        errs.append(np.max(np.abs(tr + 6 * v)))  # degree-2 harmonic: -l(l+1) = -6
    assert np.log2(errs[0] / errs[1]) >= 1.9


@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_hessian_is_symmetric(seed):
    g = build_grid(2, 8)
    v = np.random.default_rng(seed).normal(size=g.size)
    H = covariant_hessian(g, v)
    assert np.array_equal(H, np.swapaxes(H, 1, 2))


def test_field_validation():
    g = build_grid(1, 16)
    with pytest.raises(ValueError):
        covariant_gradient(g, np.zeros(15))
    with pytest.raises(ValueError):
        covariant_hessian(g, np.full(16, np.nan))
