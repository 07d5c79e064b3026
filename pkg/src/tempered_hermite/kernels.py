r"""Deterministic kernels of the tempered Hermite field.

Notation used throughout the package, per axis ``i``:

* ``d_i = 1/2 + (1 - H_i)/k`` is the power of the moving-average kernel
  ``(a - x)_+^{-d_i} e^{-lambda_i (a - x)_+}``;
* ``gamma_i = 1 - d_i = 1/2 - (1 - H_i)/k`` is the matching spectral exponent;
* ``nu_i = (H_i - 1)/k`` is the Bessel order of the kernel inner product

.. math::

    \int_0^\infty \xi^{-d}(\xi + r)^{-d} e^{-\lambda(2\xi + r)}\,d\xi
        = A\, r^{\nu} K_{\nu}(\lambda r),
    \qquad A = \frac{\Gamma(\gamma)}{\sqrt{\pi}\,(2\lambda)^{\nu}} .
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate, special

from . import specfun
from .errors import DomainError, SingularityError

__all__ = [
    "FieldParams",
    "Grid2D",
    "Field2D",
    "SpectralSymbol",
    "moving_average_kernel",
    "kernel_time_integrand",
    "kernel_l2_norm_sq",
    "spectral_symbol_eval",
    "spectral_constant",
    "bessel_profile",
    "axis_constant",
    "truncation_window",
    "tempered_antiderivative",
    "tempered_second_antiderivative",
]


@dataclass(frozen=True)
class FieldParams:
    """Parameter vector ``(k, H1, H2, lambda1, lambda2)`` of the field."""

    k: int
    H1: float
    H2: float
    lambda1: float
    lambda2: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise DomainError("k must be an integer >= 1")
        for name in ("H1", "H2", "lambda1", "lambda2"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.H1 <= 0.5 or self.H2 <= 0.5:
            raise DomainError("Hurst exponents must exceed 1/2")
        if self.lambda1 <= 0 or self.lambda2 <= 0:
            raise DomainError("tempering rates must be positive")

    @property
    def H(self) -> tuple[float, float]:
        return (self.H1, self.H2)

    @property
    def lam(self) -> tuple[float, float]:
        return (self.lambda1, self.lambda2)

    def kernel_power(self, axis: int) -> float:
        """``d = 1/2 + (1 - H)/k`` on the given axis (0 or 1)."""
        return 0.5 + (1.0 - self.H[axis]) / self.k

    def bessel_order(self, axis: int) -> float:
        return (self.H[axis] - 1.0) / self.k

    def to_dict(self) -> dict:
        return {"k": self.k, "H1": self.H1, "H2": self.H2,
                "lambda1": self.lambda1, "lambda2": self.lambda2}


@dataclass(frozen=True)
class Grid2D:
    """Uniform rectangular lattice; node ``(i, j)`` sits at ``(x0 + i dx, y0 + j dy)``."""

    x0: float
    y0: float
    dx: float
    dy: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.dx > 0 and self.dy > 0):
            raise DomainError("grid spacings must be positive")
        if self.nx < 1 or self.ny < 1:
            raise DomainError("grid counts must be >= 1")
        if not all(math.isfinite(v) for v in (self.x0, self.y0, self.dx, self.dy)):
            raise DomainError("grid geometry must be finite")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def xs(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.nx)

    @property
    def ys(self) -> np.ndarray:
        return self.y0 + self.dy * np.arange(self.ny)

    def node(self, i: int, j: int) -> tuple[float, float]:
        return (self.x0 + i * self.dx, self.y0 + j * self.dy)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.xs, self.ys, indexing="ij")

    def to_dict(self) -> dict:
        return {"x0": self.x0, "y0": self.y0, "dx": self.dx, "dy": self.dy,
                "nx": self.nx, "ny": self.ny}

    @classmethod
    def from_extent(cls, tmax: tuple[float, float], n: tuple[int, int],
                    origin: tuple[float, float] = (0.0, 0.0)) -> "Grid2D":
        """Lattice with ``n`` nodes per axis ending exactly at ``tmax``.

        The first node is one spacing past ``origin``, which matches anchor
        lattices of a field pinned at the axes.
        """
        dx = (tmax[0] - origin[0]) / n[0]
        dy = (tmax[1] - origin[1]) / n[1]
        return cls(origin[0] + dx, origin[1] + dy, dx, dy, n[0], n[1])


@dataclass(frozen=True)
class Field2D:
    """Real values tabulated on a :class:`Grid2D`, stored as an ``(nx, ny)`` array."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 0:
            vals = np.full(self.grid.shape, float(vals))
        if vals.size != self.grid.nx * self.grid.ny:
            raise DomainError("values length must equal nx * ny")
        vals = vals.reshape(self.grid.shape)
        if not np.all(np.isfinite(vals)):
            raise DomainError("field values must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: Grid2D, func) -> "Field2D":
        X, Y = grid.mesh()
        return cls(grid, func(X, Y))

    def flat(self) -> np.ndarray:
        """Row-major flattening (``x`` index slowest)."""
        return self.values.ravel(order="C")

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.values ** 2) * self.grid.dx * self.grid.dy))


@dataclass(frozen=True)
class SpectralSymbol:
    r"""Multiplier :math:`(\lambda_1 \pm i\xi)^{-\alpha_1}(\lambda_2 \pm i\omega)^{-\alpha_2}`.

    Negative ``alpha`` values give derivative symbols.
    """

    alpha1: float
    alpha2: float
    lambda1: float
    lambda2: float
    sign: str = "plus"

    def __post_init__(self):
        if self.sign not in ("plus", "minus"):
            raise DomainError("sign must be 'plus' or 'minus'")
        if self.lambda1 <= 0 or self.lambda2 <= 0:
            raise DomainError("tempering rates must be positive")


def _check_finite(*vals):
    for v in vals:
        if not np.all(np.isfinite(np.asarray(v, dtype=float))):
            raise DomainError("inputs must be finite")


def _axis_ma_integral(beta: float, lam: float, t: float, x):
    """``int_0^t (a - x)_+^{beta - 1} e^{-lam (a - x)} da`` in closed form."""
    x = np.asarray(x, dtype=float)
    lo = np.maximum(0.0, x)
    upper = np.maximum(t - x, 0.0)
    lower = np.minimum(np.maximum(lo - x, 0.0), upper)
    out = (special.gammainc(beta, lam * upper) - special.gammainc(beta, lam * lower))
    return out * special.gamma(beta) * lam ** (-beta)


def _axis_time_profile(d: float, lam: float, t: float, xs: Sequence[float]) -> float:
    """``int_0^t prod_j (a - x_j)_+^{-d} e^{-lam (a - x_j)_+} da`` by adaptive quadrature."""
    start = max(0.0, max(xs))
    if start >= t:
        return 0.0
    xs_arr = np.asarray(xs, dtype=float)

    def f(a):
        u = a - xs_arr
        return float(np.prod(u ** (-d) * np.exp(-lam * u)))

    inner = sorted({x for x in xs if start < x < t})
    pts = [start] + inner + [t]
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        if lo in xs:
            n_sing = int(np.sum(np.isclose(xs_arr, lo)))
            if n_sing * d >= 1.0:
                raise SingularityError("coincident points make the time profile diverge")
            sing = np.isclose(xs_arr, lo)
            others = xs_arr[~sing]

            def g(a, others=others, lo=lo, n_sing=n_sing):
                u = a - others
                return float(np.prod(u ** (-d) * np.exp(-lam * u)) * math.exp(-lam * n_sing * max(a - lo, 0.0)))

            val, _ = integrate.quad(g, lo, hi, weight="alg", wvar=(-n_sing * d, 0.0), limit=200)
        else:
            val, _ = integrate.quad(f, lo, hi, limit=200, epsabs=0, epsrel=1e-12)
        total += val
    return total


def moving_average_kernel(params: FieldParams, anchor, point) -> float:
    r"""Moving-average kernel :math:`h_{t,s}` of the field.

    Parameters
    ----------
    params : FieldParams
    anchor : tuple of float
        Time anchor ``(t, s)``.
    point : tuple of float or sequence of tuples
        For ``k = 1`` a single ``(x, y)``. For ``k >= 2`` a list of ``k`` pairs
        ``(x_j, y_j)``, at which the time-integrated product kernel is returned.

    Returns
    -------
    float
        Nonnegative kernel value. For ``k = 1`` this is the closed-form product
        of two incomplete-gamma integrals.
    """
    t, s = anchor
    if params.k == 1:
        x, y = point
        _check_finite(t, s, x, y)
        b1, b2 = params.H1 - 0.5, params.H2 - 0.5
        return float(_axis_ma_integral(b1, params.lambda1, t, x)
                     * _axis_ma_integral(b2, params.lambda2, s, y))
    pts = list(point)
    if len(pts) != params.k:
        raise DomainError("need exactly k points for k >= 2")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    _check_finite(t, s, xs, ys)
    px = _axis_time_profile(params.kernel_power(0), params.lambda1, t, xs)
    if px == 0.0:
        return 0.0
    return px * _axis_time_profile(params.kernel_power(1), params.lambda2, s, ys)


def kernel_time_integrand(params: FieldParams, ab, points) -> float:
    """Product kernel at fixed times ``(a, b)`` over ``k`` noise points.

    Raises
    ------
    SingularityError
        If some ``a == x_j`` or ``b == y_j``, where the factor is infinite.
    """
    a, b = ab
    pts = list(points)
    if len(pts) != params.k:
        raise DomainError("need exactly k points")
    _check_finite(a, b, pts)
    d1, d2 = params.kernel_power(0), params.kernel_power(1)
    out = 1.0
    for x, y in pts:
        u, v = a - x, b - y
        if u == 0.0 or v == 0.0:
            raise SingularityError("kernel evaluated on its singular hyperplane")
        if u < 0.0 or v < 0.0:
            return 0.0
        out *= u ** (-d1) * math.exp(-params.lambda1 * u) * v ** (-d2) * math.exp(-params.lambda2 * v)
    return out


def axis_constant(H: float, lam: float, k: int) -> float:
    r""":math:`A^k` with :math:`A = \Gamma(\gamma)/(\sqrt{\pi}(2\lambda)^{\nu})`."""
    gam = 0.5 - (1.0 - H) / k
    nu = (H - 1.0) / k
    return (specfun.gamma(gam) / (math.sqrt(math.pi) * (2.0 * lam) ** nu)) ** k


def bessel_profile(r, H: float, lam: float, k: int):
    r""":math:`g(r) = [r^{\nu}K_{\nu}(\lambda r)]^k` with :math:`\nu = (H-1)/k`, ``r > 0``."""
    nu = (H - 1.0) / k
    r = np.asarray(r, dtype=float)
    kv = specfun.bessel_k_scaled(nu, lam * r) * np.exp(-lam * r)
    return (r ** nu * kv) ** k


def _reduced_norm_integral(H: float, k: int, Z: float) -> float:
    """``int_0^Z (Z - z) [z^nu K_nu(z)]^k dz`` with a graded substitution near 0."""
    nu = (H - 1.0) / k

    def G(z):
        return (z ** nu * specfun.bessel_k(nu, z)) ** k

    zs = min(1.0, Z)
    q = max(1.0, 1.0 / (2.0 * H - 1.0))

    def head(w):
        if w <= 0.0:
            return 0.0
        z = zs * w ** q
        return (Z - z) * G(z) * zs * q * w ** (q - 1.0)

    total, _ = integrate.quad(head, 0.0, 1.0, limit=400, epsabs=0, epsrel=1e-12)
    if Z > zs:
        tail, _ = integrate.quad(lambda z: (Z - z) * G(z), zs, Z, limit=400, epsabs=0, epsrel=1e-12)
        total += tail
    return total


def kernel_l2_norm_sq(params: FieldParams, anchor) -> float:
    r"""Squared :math:`L^2((\mathbb{R}^2)^k)` norm of :math:`h_{t,s}`.

    Per axis the norm reduces, with ``z = lambda r``, to

    .. math::

        2\,A^k\,\lambda^{-H-1}\int_0^{\lambda t} (\lambda t - z)\,[z^{\nu}K_{\nu}(z)]^k\,dz .

    Returns 0 when ``t <= 0`` or ``s <= 0``.
    """
    t, s = anchor
    _check_finite(t, s)
    if t <= 0 or s <= 0:
        return 0.0
    out = 1.0
    for T, H, lam in ((t, params.H1, params.lambda1), (s, params.H2, params.lambda2)):
        out *= (2.0 * axis_constant(H, lam, params.k) * lam ** (-H - 1.0)
                * _reduced_norm_integral(H, params.k, lam * T))
    return out


def spectral_symbol_eval(sym: SpectralSymbol, freq):
    """Evaluate the principal-branch symbol at ``freq = (xi, omega)``.

    ``xi`` and ``omega`` may be arrays that broadcast against each other.
    """
    xi, om = freq
    sgn = 1.0 if sym.sign == "plus" else -1.0
    xi = np.asarray(xi, dtype=float)
    om = np.asarray(om, dtype=float)
    val = ((sym.lambda1 + sgn * 1j * xi) ** (-sym.alpha1)
           * (sym.lambda2 + sgn * 1j * om) ** (-sym.alpha2))
    return complex(val) if np.ndim(val) == 0 else val


def spectral_constant(params: FieldParams) -> float:
    r""":math:`C = [\Gamma(\gamma_1)\Gamma(\gamma_2)/(2\pi)]^k`."""
    k = params.k
    g1 = 0.5 - (1.0 - params.H1) / k
    g2 = 0.5 - (1.0 - params.H2) / k
    return (specfun.gamma(g1) * specfun.gamma(g2) / (2.0 * math.pi)) ** k


def truncation_window(shape: float, lam: float, tol: float = 1e-12) -> float:
    r"""Length ``u`` beyond which ``u^{shape-1} e^{-lam u}`` keeps relative mass ``tol``.

    This is ``Q^{-1}(shape, tol)/lam`` with ``Q`` the regularized upper
    incomplete gamma function.
    """
    if shape <= 0 or lam <= 0 or not 0 < tol < 1:
        raise DomainError("need shape > 0, lam > 0, 0 < tol < 1")
    return float(special.gammainccinv(shape, tol)) / lam


def tempered_antiderivative(v, alpha: float, lam: float):
    r""":math:`\Phi(v) = \int_0^{v} u^{\alpha-1}e^{-\lambda u}\,du` for ``v > 0``, zero otherwise."""
    v = np.asarray(v, dtype=float)
    vp = np.maximum(v, 0.0)
    return special.gammainc(alpha, lam * vp) * special.gamma(alpha) * lam ** (-alpha)


def tempered_second_antiderivative(v, alpha: float, lam: float):
    r""":math:`\Psi(v) = \int_0^{v}\Phi(u)\,du = v\Phi(v) - \int_0^v u^{\alpha}e^{-\lambda u}du`."""
    v = np.asarray(v, dtype=float)
    vp = np.maximum(v, 0.0)
    first = vp * tempered_antiderivative(vp, alpha, lam)
    second = special.gammainc(alpha + 1.0, lam * vp) * special.gamma(alpha + 1.0) * lam ** (-alpha - 1.0)
    return first - second
