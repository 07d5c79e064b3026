
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from tempered_hermite.errors import AccuracyWarning, DomainError, UnsupportedError
from tempered_hermite.kernels import Field2D, FieldParams, Grid2D
from tempered_hermite.tfcalc import (FracOrder, SobolevParams, axis_integral_weights, beta_of,
                                     frac_derivative_fourier, frac_derivative_pointwise, frac_integral,
                                     frac_integral_fourier, inner_product_H1, inner_product_H2, reflect,
                                     sobolev_norm)

alphas = st.floats(0.1, 1.5)
rates = st.floats(0.4, 2.5)


def kernel_mass(alpha, lam, a, b):
    """int_a^b v^{alpha-1} e^{-lam v} dv / Gamma(alpha) for 0 <= a <= b."""
    return (special.gammainc(alpha, lam * b) - special.gammainc(alpha, lam * a)) * lam ** -alpha


def bump_grid(n=128, h=0.25, c=(0.0, 0.0), w=2.0):
    g = Grid2D(-(n // 2) * h, -(n // 2) * h, h, h, n, n)
    return Field2D.from_function(g, lambda X, Y: np.exp(-((X - c[0]) ** 2 + (Y - c[1]) ** 2) / w))


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


@pytest.mark.parametrize("alpha,lam", [(0.3, 1.0), (0.7, 0.5), (1.4, 2.0)])
def test_cell_weights_exact(alpha, lam):
    h, n = 0.2, 8
    w = axis_integral_weights(alpha, lam, h, n, basis="cells")
    for d in range(n):
        lo, hi = (d - 0.5) * h, (d + 0.5) * h
        f = lambda x: kernel_mass(alpha, lam, max(x - 0.5 * h, 0.0), max(x + 0.5 * h, 0.0))
        ref = integrate.quad(f, lo, hi, epsabs=0, epsrel=1e-12, points=[0.5 * h] if d <= 1 else None)[0] / h
        assert w[d] == pytest.approx(ref, rel=1e-9, abs=1e-15)


@pytest.mark.parametrize("alpha,lam", [(0.25, 1.0), (0.8, 0.5), (1.5, 2.0)])
def test_sample_weights_smooth_oracle(alpha, lam):
    h, n = 0.05, 400
    xs = -10.0 + h * np.arange(n)
    f = lambda x: np.exp(-(x + 4.0) ** 2)
    w = axis_integral_weights(alpha, lam, h, n, basis="samples")
    out = np.convolve(f(xs), w)[:n]
    for i in (100, 120, 180, 399):
        x = xs[i]
        ref = integrate.quad(lambda v: np.exp(-lam * v) * f(x - v), 0.0, x + 10.0, weight="alg",
                             wvar=(alpha - 1.0, 0.0), epsabs=0, epsrel=1e-13, limit=500)[0]
        assert out[i] == pytest.approx(ref / special.gamma(alpha), rel=1e-8, abs=1e-13)


def test_minus_is_mirror_of_plus():
    o = FracOrder(0.4, 0.9, 1.0, 0.5)
    rng = np.random.default_rng(1)
    g = Grid2D(0, 0, 0.1, 0.2, 20, 15)
    f = Field2D(g, rng.standard_normal(g.shape))
    plus = frac_integral(o, "plus", Field2D(g, f.values[::-1, ::-1])).values[::-1, ::-1]
    assert np.allclose(frac_integral(o, "minus", f).values, plus, rtol=1e-13, atol=1e-13)


def test_minus_is_adjoint_of_plus():
    o = FracOrder(0.4, 0.9, 1.0, 0.5)
    rng = np.random.default_rng(2)
    g = Grid2D(0, 0, 0.1, 0.2, 20, 15)
    f = Field2D(g, rng.standard_normal(g.shape))
    k = Field2D(g, rng.standard_normal(g.shape))
    for basis in ("samples", "cells"):
        a = np.sum(frac_integral(o, "plus", f, basis).values * k.values)
        b = np.sum(f.values * frac_integral(o, "minus", k, basis).values)
        assert a == pytest.approx(b, rel=1e-12)


@settings(max_examples=20)
@given(alphas, alphas, rates, rates, st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(a1, a2, l1, l2, c1, c2):
    o = FracOrder(a1, a2, l1, l2)
    rng = np.random.default_rng(3)
    g = Grid2D(0, 0, 0.25, 0.25, 12, 10)
    f, k = (Field2D(g, rng.standard_normal(g.shape)) for _ in range(2))
    lhs = frac_integral(o, "plus", Field2D(g, c1 * f.values + c2 * k.values)).values
    rhs = c1 * frac_integral(o, "plus", f).values + c2 * frac_integral(o, "plus", k).values
    assert np.allclose(lhs, rhs, rtol=1e-11, atol=1e-11)


@settings(max_examples=15)
@given(alphas, alphas, st.floats(1.0, 2.5), st.floats(1.0, 2.5), st.sampled_from(["plus", "minus"]))
def test_fourier_properties(a1, a2, l1, l2, side):
    # the output is cut to the grid, so the bump sits far from the trailing edge
    o = FracOrder(a1, a2, l1, l2)
    f = bump_grid(64, 0.5, c=(-8.0, -8.0) if side == "plus" else (8.0, 8.0))
    If = frac_integral_fourier(o, side, f)
    assert If.l2_norm() <= f.l2_norm() * l1 ** -a1 * l2 ** -a2 * (1 + 1e-9)
    assert rel(frac_derivative_fourier(o, side, If).values, f.values) < 1e-6
    half = FracOrder(a1 / 2, a2 / 2, l1, l2)
    twice = frac_integral_fourier(half, side, frac_integral_fourier(half, side, f))
    assert rel(twice.values, If.values) < 1e-6


@pytest.mark.parametrize("side,c", [("plus", (-12.0, -12.0)), ("minus", (12.0, 12.0))])
def test_time_route_matches_fourier(side, c):
    o = FracOrder(0.5, 1.0, 1.0, 2.0)
    f = bump_grid(256, 0.25, c=c, w=8.0)
    assert rel(frac_integral(o, side, f).values, frac_integral_fourier(o, side, f).values) < 1e-5


def test_reflection():
    o = FracOrder(0.3, 0.6, 1.0, 0.7)
    g = Grid2D(-6.0, -6.0, 0.25, 0.25, 49, 49)
    f = Field2D.from_function(g, lambda X, Y: np.exp(-((X + 1) ** 2 + (Y - 2) ** 2)))
    lhs = reflect(frac_integral(o, "plus", reflect(f))).values
    assert np.allclose(lhs, frac_integral(o, "minus", f).values, rtol=1e-12, atol=1e-14)
    with pytest.raises(DomainError):
        reflect(Field2D(Grid2D(0, 0, 1, 1, 3, 3), np.zeros(9)))


def test_pointwise_derivative_matches_fourier():
    o = FracOrder(0.4, 0.6, 1.0, 1.0)
    f = bump_grid(128, 0.125, c=(0.0, 0.0), w=1.0)
    pw = frac_derivative_pointwise(o, "plus", f, extension="zero")
    assert rel(pw.values, frac_derivative_fourier(o, "plus", f).values) < 1e-3


def test_pointwise_derivative_constants():
    o = FracOrder(0.4, 0.6, 2.0, 0.5)
    g = Grid2D(0, 0, 0.1, 0.1, 16, 16)
    out = frac_derivative_pointwise(o, "minus", Field2D(g, 3.0), extension="edge")
    assert np.allclose(out.values, 3.0 * 2.0 ** 0.4 * 0.5 ** 0.6, rtol=1e-10)


def test_pointwise_derivative_errors_and_warning():
    g = Grid2D(0, 0, 1.0, 1.0, 8, 8)
    with pytest.raises(DomainError):
        frac_derivative_pointwise(FracOrder(1.2, 0.5, 1, 1), "plus", Field2D(g, 0.0))
    with pytest.raises(DomainError):
        frac_derivative_pointwise(FracOrder(0.2, 0.5, 1, 1), "plus", Field2D(g, 0.0), extension="wrap")
    rough = Field2D(g, np.random.default_rng(0).standard_normal(g.shape))
    with pytest.warns(AccuracyWarning):
        frac_derivative_pointwise(FracOrder(0.9, 0.9, 1, 1), "plus", rough, warn_tol=1e-6)


def test_sobolev_norm_zero_is_l2():
    f = bump_grid(32, 0.5)
    assert sobolev_norm(SobolevParams(0, 0), f) == pytest.approx(f.l2_norm(), rel=1e-12)
    assert sobolev_norm(SobolevParams(0.5, 0.5), f) > sobolev_norm(SobolevParams(0.5, 0.5, 0.5, 0.5), f)


def test_inner_products_agree():
    p = FieldParams(1, 0.7, 0.8, 1.0, 1.0)
    g = Grid2D(0.0625, 0.0625, 0.125, 0.125, 48, 48)
    bump = lambda cx, cy: Field2D.from_function(g, lambda X, Y: np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / 0.5))
    f, k = bump(3.0, 3.0), bump(3.4, 2.7)
    a1, a2 = inner_product_H1(p, f, k), inner_product_H2(p, f, k)
    assert a1 == pytest.approx(a2, rel=1e-6)
    assert inner_product_H1(p, f, k) == pytest.approx(inner_product_H1(p, k, f), rel=1e-12)
    c1, c2 = inner_product_H1(p, f, f, basis="cells"), inner_product_H2(p, f, f, basis="cells")
    assert c1 < c2 and c1 == pytest.approx(c2, rel=5e-3)
    assert inner_product_H1(p, f, f) > 0


def _cell_axis_norm(beta, lam, h):
    """Continuum ||Gamma(beta) I_- 1_[0,h]||^2 on one axis, by quadrature in time."""
    F = lambda x: special.gamma(beta) * lam ** -beta * (special.gammainc(beta, lam * max(h - x, 0.0))
                                                       - special.gammainc(beta, lam * max(-x, 0.0)))
    return (integrate.quad(lambda x: F(x) ** 2, -80.0 / lam, 0.0, limit=500)[0]
            + integrate.quad(lambda x: F(x) ** 2, 0.0, h, limit=500)[0])


@pytest.mark.parametrize("H1,H2,h", [(0.7, 0.8, 1.0), (0.9, 1.3, 0.5)])
def test_cells_spectral_inner_product_is_exact(H1, H2, h):
    p = FieldParams(1, H1, H2, 1.0, 0.7)
    g = Grid2D(0.5 * h, 0.5 * h, h, h, 3, 3)
    e = np.zeros((3, 3))
    e[1, 1] = 1.0
    f = Field2D(g, e)
    ref = _cell_axis_norm(H1 - 0.5, 1.0, h) * _cell_axis_norm(H2 - 0.5, 0.7, h)
    assert inner_product_H2(p, f, f, basis="cells") == pytest.approx(ref, rel=1e-7)
    # the time route on cells sums squared cell averages, hence lies below
    assert inner_product_H1(p, f, f, basis="cells") < ref


def test_errors():
    with pytest.raises(DomainError):
        FracOrder(0.0, 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        SobolevParams(-0.1, 0.0)
    with pytest.raises(UnsupportedError):
        beta_of(FieldParams(2, 0.8, 0.8, 1, 1))
    g = Grid2D(0, 0, 1, 1, 4, 4)
    with pytest.raises(DomainError):
        frac_integral(FracOrder(0.5, 0.5, 1, 1), "left", Field2D(g, 0.0))
    with pytest.raises(DomainError):
        inner_product_H1(FieldParams(1, 0.7, 0.7, 1, 1), Field2D(g, 0.0), Field2D(Grid2D(0, 0, 1, 1, 4, 5), 0.0))
