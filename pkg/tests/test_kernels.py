import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from tempered_hermite.errors import DomainError, SingularityError
from tempered_hermite.kernels import (Field2D, FieldParams, Grid2D, SpectralSymbol, axis_constant, bessel_profile,
                                      kernel_l2_norm_sq, kernel_time_integrand, moving_average_kernel,
                                      spectral_constant, spectral_symbol_eval, tempered_antiderivative,
                                      tempered_second_antiderivative, truncation_window)

hursts = st.floats(0.55, 1.9)
rates = st.floats(0.3, 3.0)


def quad_ma(beta, lam, t, x):
    """One-axis kernel as a regularized incomplete gamma difference in mpmath."""
    lo = max(0.0, x)
    if lo >= t:
        return 0.0
    return float(mp.gammainc(beta, lam * (lo - x), lam * (t - x)) * mp.mpf(lam) ** -beta)


def profile_oracle(d, lam, t, xs):
    """int_{max(0, xs)}^t prod_j (a - x_j)^-d e^{-lam (a - x_j)} da, desingularized at the low end."""
    lo = max(0.0, max(xs))
    if lo >= t:
        return 0.0
    top = max(xs)
    rest = [x for x in xs if x != top] + [top] * (xs.count(top) - 1)
    m = xs.count(top)
    if lo > top:
        f = lambda a: mp.fprod((a - x) ** -d * mp.exp(-lam * (a - x)) for x in xs)
        return float(mp.quad(f, [lo, t]))
    p = 1 - m * d
    # u = (a - top)^p removes the (a - top)^(-m d) factor
    def g(u):
        a = top + u ** (1 / p)
        return mp.exp(-lam * m * (a - top)) * mp.fprod((a - x) ** -d * mp.exp(-lam * (a - x)) for x in rest) / p
    return float(mp.quad(g, [0, (t - top) ** p]))


class TestTypes:
    def test_field_params_validation(self):
        with pytest.raises(DomainError):
            FieldParams(0, 0.7, 0.7, 1, 1)
        with pytest.raises(DomainError):
            FieldParams(1, 0.5, 0.7, 1, 1)
        with pytest.raises(DomainError):
            FieldParams(1, 0.7, 0.7, 0.0, 1)
        with pytest.raises(DomainError):
            FieldParams(1, math.nan, 0.7, 1, 1)

    def test_field_params_derived(self):
        p = FieldParams(2, 0.8, 0.6, 1.0, 2.0)
        assert p.kernel_power(0) == pytest.approx(0.6)
        assert p.bessel_order(1) == pytest.approx(-0.2)
        assert p.to_dict()["lambda2"] == 2.0

    def test_grid(self):
        g = Grid2D.from_extent((2.0, 1.0), (4, 2))
        assert g.xs.tolist() == [0.5, 1.0, 1.5, 2.0]
        assert g.ys.tolist() == [0.5, 1.0]
        X, Y = g.mesh()
        assert X.shape == (4, 2) and X[2, 1] == 1.5 and Y[2, 1] == 1.0
        with pytest.raises(DomainError):
            Grid2D(0, 0, -1, 1, 2, 2)

    def test_field2d(self):
        g = Grid2D(0, 0, 0.5, 0.5, 3, 2)
        f = Field2D.from_function(g, lambda X, Y: X + 10 * Y)
        assert f.flat().tolist() == [0, 5, 0.5, 5.5, 1, 6]
        with pytest.raises(DomainError):
            Field2D(g, np.ones(5))
        with pytest.raises(DomainError):
            Field2D(g, np.full(6, np.inf))

    def test_symbol_sign(self):
        with pytest.raises(DomainError):
            SpectralSymbol(0.5, 0.5, 1, 1, "up")


@given(st.floats(0.55, 1.9), rates, st.floats(0.1, 3.0), st.floats(-2.0, 2.9))
def test_ma_kernel_k1_vs_quadrature(H, lam, t, x):
    p = FieldParams(1, H, 0.7, lam, 1.0)
    val = moving_average_kernel(p, (t, 1.0), (x, 0.5))
    ref = quad_ma(H - 0.5, lam, t, x) * quad_ma(0.2, 1.0, 1.0, 0.5)
    assert val == pytest.approx(ref, rel=1e-9, abs=1e-14)


def test_ma_kernel_zero_beyond_anchor():
    p = FieldParams(1, 0.7, 0.7, 1, 1)
    assert moving_average_kernel(p, (1.0, 1.0), (1.5, 0.2)) == 0.0


def test_ma_kernel_k2_needs_k_points():
    p = FieldParams(2, 0.8, 0.8, 1, 1)
    with pytest.raises(DomainError):
        moving_average_kernel(p, (1, 1), [(0.1, 0.1)])


@pytest.mark.parametrize("pts", [[(0.2, -0.3), (-0.5, 0.4)], [(-0.1, -0.2), (-0.7, -0.4)], [(0.3, 0.1), (0.25, 0.05)]])
def test_ma_kernel_k2_vs_profile_oracle(pts):
    p = FieldParams(2, 0.8, 0.75, 1.0, 0.5)
    val = moving_average_kernel(p, (1.0, 1.2), pts)
    ref = (profile_oracle(p.kernel_power(0), 1.0, 1.0, [q[0] for q in pts])
           * profile_oracle(p.kernel_power(1), 0.5, 1.2, [q[1] for q in pts]))
    assert val == pytest.approx(ref, rel=1e-8)


def test_coincident_points_diverge():
    p = FieldParams(2, 0.8, 0.75, 1.0, 0.5)
    with pytest.raises(SingularityError):
        moving_average_kernel(p, (1.0, 1.2), [(0.3, 0.1), (0.3, 0.1)])


def test_time_integrand_product():
    p = FieldParams(2, 0.8, 0.75, 1.0, 0.5)
    pts = [(0.2, -0.3), (-0.5, 0.4)]
    a, b = 0.7, 0.9
    d1, d2 = p.kernel_power(0), p.kernel_power(1)
    ref = 1.0
    for x, y in pts:
        ref *= (a - x) ** -d1 * math.exp(-(a - x)) * (b - y) ** -d2 * math.exp(-0.5 * (b - y))
    assert kernel_time_integrand(p, (a, b), pts) == pytest.approx(ref, rel=1e-13)


def test_time_integrand_singular():
    p = FieldParams(1, 0.7, 0.7, 1, 1)
    with pytest.raises(SingularityError):
        kernel_time_integrand(p, (0.5, 0.5), [(0.5, 0.1)])
    assert kernel_time_integrand(p, (0.5, 0.5), [(0.7, 0.1)]) == 0.0


@pytest.mark.parametrize("H,lam", [(0.7, 1.0), (0.9, 0.5), (1.5, 2.0)])
def test_kernel_norm_k1_vs_direct(H, lam):
    # direct L2 norm of the one-axis kernel x -> int_0^t (a-x)_+^{beta-1} e^{-lam(a-x)} da
    t = 1.3
    beta = H - 0.5
    f = lambda x: quad_ma(beta, lam, t, x) ** 2
    window = truncation_window(beta, lam, 1e-16)
    direct = (integrate.quad(f, -window, 0.0, limit=400, epsrel=1e-12)[0]
              + integrate.quad(f, 0.0, t, limit=400, epsrel=1e-12)[0])
    p = FieldParams(1, H, H, lam, lam)
    assert math.sqrt(kernel_l2_norm_sq(p, (t, t))) == pytest.approx(direct, rel=1e-8)


def test_kernel_norm_axes_zero():
    p = FieldParams(1, 0.7, 0.7, 1, 1)
    assert kernel_l2_norm_sq(p, (0.0, 1.0)) == 0.0


@given(hursts, rates, st.integers(1, 3))
def test_axis_constant(H, lam, k):
    gam = 0.5 - (1 - H) / k
    if gam <= 0:
        return
    nu = (H - 1) / k
    ref = (math.gamma(gam) / (math.sqrt(math.pi) * (2 * lam) ** nu)) ** k
    assert axis_constant(H, lam, k) == pytest.approx(ref, rel=1e-13)


@given(hursts, rates, st.floats(1e-3, 20.0))
def test_bessel_profile_vs_mpmath(H, lam, r):
    nu = H - 1
    ref = float(mp.power(r, nu) * mp.besselk(nu, lam * r))
    assert bessel_profile(r, H, lam, 1) == pytest.approx(ref, rel=1e-12)


@given(st.floats(0.2, 3.0), rates, st.floats(1e-16, 1e-4))
def test_truncation_window_mass(shape, lam, tol):
    w = truncation_window(shape, lam, tol)
    tail = float(mp.gammainc(shape, lam * w, mp.inf, regularized=True))
    assert tail == pytest.approx(tol, rel=1e-6)


def test_truncation_window_domain():
    with pytest.raises(DomainError):
        truncation_window(0.0, 1.0)


@given(st.floats(0.1, 2.5), rates, st.floats(0.0, 10.0))
def test_antiderivatives(alpha, lam, v):
    phi = lambda u: float(mp.gammainc(alpha, 0, lam * u)) * lam ** -alpha if u > 0 else 0.0
    assert tempered_antiderivative(v, alpha, lam) == pytest.approx(phi(v), rel=1e-11, abs=1e-300)
    psi = float(lam ** -alpha * (v * mp.gammainc(alpha, 0, lam * v) - mp.gammainc(alpha + 1, 0, lam * v) / lam))
    assert tempered_second_antiderivative(v, alpha, lam) == pytest.approx(psi, rel=1e-9, abs=1e-15)
    if 0.5 < v:
        num = integrate.quad(phi, 0.0, v, epsrel=1e-13)[0]
        assert psi == pytest.approx(num, rel=1e-8)
    assert tempered_antiderivative(-v - 1.0, alpha, lam) == 0.0


@given(st.floats(0.1, 1.5), st.floats(0.1, 1.5), rates, rates, st.floats(-50, 50), st.floats(-50, 50))
def test_symbol_hermitian_and_bound(a1, a2, l1, l2, xi, om):
    s = SpectralSymbol(a1, a2, l1, l2, "plus")
    m = SpectralSymbol(a1, a2, l1, l2, "minus")
    v = spectral_symbol_eval(s, (xi, om))
    assert spectral_symbol_eval(s, (-xi, -om)) == pytest.approx(np.conj(v), rel=1e-13)
    assert spectral_symbol_eval(m, (xi, om)) == pytest.approx(np.conj(v), rel=1e-13)
    assert abs(v) <= l1 ** -a1 * l2 ** -a2 * (1 + 1e-12)


def test_symbol_broadcast():
    s = SpectralSymbol(0.5, 0.3, 1, 2)
    out = spectral_symbol_eval(s, (np.zeros((3, 1)), np.zeros((1, 4))))
    assert out.shape == (3, 4)
    assert np.allclose(out, 2 ** -0.3)


def test_spectral_constant():
    p = FieldParams(1, 0.7, 0.9, 1, 1)
    assert spectral_constant(p) == pytest.approx(math.gamma(0.2) * math.gamma(0.4) / (2 * math.pi))
