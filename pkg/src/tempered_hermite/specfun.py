r"""Special functions behind the closed-form kernel and covariance expressions.

The Gamma function and the incomplete gamma functions are taken from
:mod:`scipy.special`. The modified Bessel function of the second kind is
evaluated from its integral representation

.. math::

    K_\nu(x) = \int_0^\infty e^{-x\cosh t}\cosh(\nu t)\,dt ,

in the exponentially scaled form :math:`e^{x}K_\nu(x)`. The integrand is a
doubly exponentially decaying analytic function of ``t``, so the plain
trapezoidal rule converges geometrically. The step is shrunk like
``1/sqrt(x)`` for large arguments, where the integrand concentrates near the
origin, and the range is cut once the exponent has fallen 40 units.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import special

from .errors import DomainError, UnderflowWarning

__all__ = [
    "gamma",
    "log_gamma",
    "bessel_k",
    "bessel_k_scaled",
    "lower_incomplete_gamma",
    "upper_incomplete_gamma",
]

# Beyond this argument exp(-x) is below the smallest subnormal double.
_UNDERFLOW_X = 745.0
_CHUNK = 2048


def _positive_finite(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} must be finite and > 0")
    return arr


def gamma(x):
    """Euler Gamma function for positive arguments.

    Parameters
    ----------
    x : float or array_like
        Strictly positive, finite argument.

    Returns
    -------
    float or ndarray
    """
    arr = _positive_finite(x, "x")
    out = special.gamma(arr)
    return float(out) if out.ndim == 0 else out


def log_gamma(x):
    """Natural logarithm of the Gamma function for positive arguments."""
    arr = _positive_finite(x, "x")
    out = special.gammaln(arr)
    return float(out) if out.ndim == 0 else out


def _kve_block(nu: float, x: np.ndarray) -> np.ndarray:
    h = np.minimum(0.1, 0.5 / np.sqrt(x))
    c = 40.0 + 60.0 * nu
    # arccosh(1 + c/x) ~ log(2c/x) once c/x would overflow
    tiny = x < 1e-150 * c
    t_max = np.where(tiny, math.log(2.0 * c) - np.log(x), np.arccosh(1.0 + c / np.where(tiny, 1.0, x))) + 0.5
    kmax = int(np.ceil(float(np.max(t_max / h))))
    t = h[:, None] * np.arange(kmax + 1)[None, :]
    with np.errstate(divide="ignore"):
        log_sinh = 0.5 * t + np.log1p(-np.exp(-t)) - math.log(2.0)
    expo = -np.exp(np.log(2.0 * x)[:, None] + 2.0 * log_sinh)
    vals = 0.5 * (np.exp(expo + nu * t) + np.exp(expo - nu * t))
    vals[:, 0] *= 0.5
    vals[t > t_max[:, None]] = 0.0
    return h * vals.sum(axis=1)


def bessel_k_scaled(nu: float, x):
    r"""Exponentially scaled modified Bessel function :math:`e^{x}K_\nu(x)`.

    Parameters
    ----------
    nu : float
        Real order, ``|nu| <= 5``. Negative orders use ``K_{-nu} = K_nu``.
    x : float or array_like
        Positive argument.

    Returns
    -------
    float or ndarray
    """
    nu = abs(float(nu))
    if not math.isfinite(nu) or nu > 5.0:
        raise DomainError("order must satisfy |nu| <= 5")
    arr = _positive_finite(x, "x")
    flat = arr.ravel()
    out = np.empty_like(flat)
    for start in range(0, flat.size, _CHUNK):
        out[start:start + _CHUNK] = _kve_block(nu, flat[start:start + _CHUNK])
    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def bessel_k(nu: float, x, return_flag: bool = False):
    r"""Modified Bessel function of the second kind :math:`K_\nu(x)`.

    Parameters
    ----------
    nu : float
        Real order with ``|nu| <= 5``; the result is even in ``nu``.
    x : float or array_like
        Positive argument.
    return_flag : bool, optional
        If True, also return a boolean (array) marking arguments whose value
        underflowed to zero.

    Returns
    -------
    value : float or ndarray
    underflow : bool or ndarray
        Only when ``return_flag`` is True.

    Raises
    ------
    DomainError
        If any ``x <= 0`` or ``|nu| > 5``.

    Examples
    --------
    >>> round(bessel_k(0.5, 1.0), 12)
    0.461068504448
    """
    arr = _positive_finite(x, "x")
    under = arr > _UNDERFLOW_X
    safe = np.where(under, 1.0, arr)
    val = np.where(under, 0.0, bessel_k_scaled(nu, safe) * np.exp(-safe))
    if np.any(under) and not return_flag:
        warnings.warn("bessel_k underflowed to 0 for large arguments", UnderflowWarning, stacklevel=2)
    if val.ndim == 0:
        val, under = float(val), bool(under)
    return (val, under) if return_flag else val


def lower_incomplete_gamma(a, x):
    r"""Lower incomplete gamma :math:`\gamma(a, x) = \int_0^x u^{a-1}e^{-u}\,du`.

    Parameters
    ----------
    a : float or array_like
        Positive shape.
    x : float or array_like
        Nonnegative upper limit; ``np.inf`` gives :math:`\Gamma(a)`.
    """
    a_arr = _positive_finite(a, "a")
    x_arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(x_arr)) or np.any(x_arr < 0):
        raise DomainError("x must be >= 0")
    out = special.gammainc(a_arr, x_arr) * special.gamma(a_arr)
    return float(out) if np.ndim(out) == 0 else out


def upper_incomplete_gamma(a, x):
    r"""Upper incomplete gamma :math:`\Gamma(a, x)` for any real ``a`` and ``x > 0``.

    Negative shapes use the Legendre continued fraction for ``x >= 1`` and
    the downward recurrence :math:`\Gamma(a, x) = (\Gamma(a+1, x) - x^{a}e^{-x})/a`
    below, where the recurrence does not cancel.
    """
    a = float(a)
    x_arr = _positive_finite(x, "x")
    if abs(a) < 1e-17:
        # Gamma(a, x) = E1(x) + O(a); the product form below is 0 * inf here
        out = special.exp1(x_arr)
    elif a > 0:
        out = special.gammaincc(a, x_arr) * special.gamma(a)
    else:
        big = x_arr >= 1.0
        safe = np.where(big, x_arr, 1.0)
        cf = _upper_gamma_cf(a, safe)
        rec = (upper_incomplete_gamma(a + 1.0, x_arr) - x_arr ** a * np.exp(-x_arr)) / a
        out = np.where(big, cf, rec)
    return float(out) if np.ndim(out) == 0 else out


def _upper_gamma_cf(a: float, x: np.ndarray, max_terms: int = 500) -> np.ndarray:
    """Modified Lentz evaluation of the continued fraction for ``Gamma(a, x)``, ``x >= 1``."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, max_terms + 1):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) < 1e-16):
            break
    return np.exp(-x + a * np.log(x)) * h
