r"""Closed-form covariance of the tempered Hermite field.

The covariance factorizes over the two axes:

.. math::

    \mathbb{E}[Z(t,s)Z(u,v)] = k!\,A_1^k A_2^k\, C_1(t,u)\, C_2(s,v),
    \qquad C(t,u) = \int_0^t\!\!\int_0^u g(|a-a'|)\,da\,da',

with ``g(r) = [r^nu K_nu(lambda r)]^k``. The double integral is folded onto
``r = |a - a'|`` with the piecewise-linear overlap weight
``w(r) = (t-r)_+ + (u-r)_+ - (|t-u|-r)_+``. Near ``r = 0`` the profile
behaves like ``r^{2H-2}`` for ``H < 1``; that piece is integrated with an
algebraic (Jacobi-type) weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate

from .errors import DomainError
from .kernels import FieldParams, Grid2D, axis_constant, bessel_profile

__all__ = [
    "CovQuery",
    "overlap_weight",
    "axis_covariance",
    "covariance",
    "covariance_matrix",
    "increment_variance",
    "scaling_identity_residual",
]

QUAD_EPSREL = 1e-12


@dataclass(frozen=True)
class CovQuery:
    """Two anchors ``p = (t, s)`` and ``q = (u, v)`` in the closed quadrant."""

    p: tuple[float, float]
    q: tuple[float, float]

    def __post_init__(self):
        coords = (*self.p, *self.q)
        if not all(math.isfinite(c) for c in coords) or min(coords) < 0:
            raise DomainError("covariance anchors must be finite and nonnegative")


def _overlap_scalar(r: float, a: float, b: float) -> float:
    if r < 0.0 or r >= b:
        return 0.0
    if r < min(a, b - a):
        return 2.0 * a - r
    if r < b - a:
        return a
    if r < a:
        return a + b - 2.0 * r
    return b - r


def overlap_weight(r, t: float, u: float):
    """Length of ``{(a, a') in [0,t] x [0,u] : |a - a'| = r}`` as a density in ``r``."""
    a, b = min(t, u), max(t, u)
    if isinstance(r, float):
        return _overlap_scalar(r, a, b)
    r = np.asarray(r, dtype=float)
    # piecewise form of (t-r)_+ + (u-r)_+ - (|t-u|-r)_+ without cancellation when a << b
    out = np.where(r < b, b - r, 0.0)
    out = np.where(r < a, a + b - 2.0 * r, out)
    out = np.where(r < b - a, a, out)
    out = np.where(r < min(a, b - a), 2.0 * a - r, out)
    return np.where(r >= 0.0, out, 0.0)


@lru_cache(maxsize=65536)
def _axis_cov_cached(t: float, u: float, H: float, lam: float, k: int) -> float:
    a, b = min(t, u), max(t, u)
    R = b
    split = 0.5 * min(1.0 / lam, R)
    if not split > 0.0:
        # the value is O(R^{2H}), below the smallest double here
        return 0.0
    kinks = sorted({c for c in (abs(t - u), min(t, u)) if 0.0 < c < R})
    if kinks and kinks[0] < split:
        split = kinks[0]
    edges = [0.0, split] + [c for c in kinks if c > split] + [R]

    def f(r):
        return float(bessel_profile(r, H, lam, k)) * _overlap_scalar(float(r), a, b)

    if H < 1.0:
        expo = 2.0 * H - 2.0
        m = (1.0 - H) / k
        # limit of r^{2-2H} g(r) w(r) at r = 0
        at_zero = (2.0 ** (m - 1.0) * math.gamma(m) * lam ** (-m)) ** k * (t + u - abs(t - u))

        def regular(r):
            return f(r) * r ** (-expo) if r > 0.0 else at_zero

        head, _ = integrate.quad(regular, 0.0, split, weight="alg", wvar=(expo, 0.0), limit=400,
                                 epsabs=0, epsrel=QUAD_EPSREL)
    else:
        head, _ = integrate.quad(f, 0.0, split, limit=400, epsabs=0, epsrel=QUAD_EPSREL)
    total = head
    for lo, hi in zip(edges[1:-1], edges[2:]):
        if hi > lo and lo < 1e-2 * hi:
            # segment starting near the singularity at 0: integrate in log r
            val, _ = integrate.quad(lambda y: f(math.exp(y)) * math.exp(y), math.log(lo), math.log(hi),
                                    limit=400, epsabs=0, epsrel=QUAD_EPSREL)
            total += val
        elif hi > lo:
            val, _ = integrate.quad(f, lo, hi, limit=400, epsabs=0, epsrel=QUAD_EPSREL)
            total += val
    return total


def axis_covariance(t: float, u: float, H: float, lam: float, k: int) -> float:
    """``A^k C(t, u)`` for one axis; zero if either time is zero."""
    if t <= 0 or u <= 0:
        return 0.0
    a, b = (float(t), float(u)) if t <= u else (float(u), float(t))
    return axis_constant(H, lam, k) * _axis_cov_cached(a, b, float(H), float(lam), int(k))


def covariance(params: FieldParams, query: CovQuery) -> float:
    """``E[Z(t,s) Z(u,v)]`` including the ``k!`` factor of the multiple-integral isometry.

    The first axis pairs ``t`` with ``u`` and the second pairs ``s`` with ``v``.
    """
    (t, s), (u, v) = query.p, query.q
    c1 = axis_covariance(t, u, params.H1, params.lambda1, params.k)
    if c1 == 0.0:
        return 0.0
    c2 = axis_covariance(s, v, params.H2, params.lambda2, params.k)
    return math.factorial(params.k) * c1 * c2


def _anchor_list(anchors) -> list[tuple[float, float]]:
    if isinstance(anchors, Grid2D):
        X, Y = anchors.mesh()
        return list(zip(X.ravel().tolist(), Y.ravel().tolist()))
    return [(float(a), float(b)) for a, b in anchors]


def covariance_matrix(params: FieldParams, anchors) -> np.ndarray:
    """Gram matrix of the field over a list of anchors (or a :class:`Grid2D`, row-major).

    Raises
    ------
    DomainError
        On duplicate or negative anchors.
    """
    pts = _anchor_list(anchors)
    if len(set(pts)) != len(pts):
        raise DomainError("anchors must be distinct")
    if any(min(p) < 0 for p in pts):
        raise DomainError("anchors must be nonnegative")
    ts = np.array([p[0] for p in pts])
    ss = np.array([p[1] for p in pts])
    ut, it = np.unique(ts, return_inverse=True)
    us, is_ = np.unique(ss, return_inverse=True)
    C1 = np.array([[axis_covariance(a, b, params.H1, params.lambda1, params.k) for b in ut] for a in ut])
    C2 = np.array([[axis_covariance(a, b, params.H2, params.lambda2, params.k) for b in us] for a in us])
    return math.factorial(params.k) * C1[np.ix_(it, it)] * C2[np.ix_(is_, is_)]


def increment_variance(params: FieldParams, base, offsets) -> float:
    """Variance of the rectangular increment with lower corner ``base`` and sides ``offsets``.

    Uses the sixteen-term covariance expansion of the four corners; the
    symmetric pairs are evaluated once, leaving ten covariance calls.
    """
    t, s = base
    z1, z2 = offsets
    if z1 <= 0 or z2 <= 0:
        raise DomainError("offsets must be positive")
    corners = [((t + z1, s + z2), 1.0), ((t, s + z2), -1.0), ((t + z1, s), -1.0), ((t, s), 1.0)]
    total = 0.0
    for i, (pi, ei) in enumerate(corners):
        for j in range(i, len(corners)):
            pj, ej = corners[j]
            mult = 1.0 if i == j else 2.0
            total += mult * ei * ej * covariance(params, CovQuery(pi, pj))
    return max(total, 0.0)


def scaling_identity_residual(params: FieldParams, h, query: CovQuery) -> float:
    """Relative residual of the tempered scaling law at covariance level.

    Compares ``Cov_lambda(h1 t, h2 s; h1 u, h2 v)`` with
    ``h1^{2 H1} h2^{2 H2} Cov_{(h1 lambda1, h2 lambda2)}(t, s; u, v)``.
    """
    h1, h2 = h
    if h1 <= 0 or h2 <= 0:
        raise DomainError("scale factors must be positive")
    (t, s), (u, v) = query.p, query.q
    lhs = covariance(params, CovQuery((h1 * t, h2 * s), (h1 * u, h2 * v)))
    scaled = FieldParams(params.k, params.H1, params.H2, h1 * params.lambda1, h2 * params.lambda2)
    rhs = h1 ** (2 * params.H1) * h2 ** (2 * params.H2) * covariance(scaled, query)
    return abs(lhs - rhs) / max(1.0, abs(lhs))


def covariance_table(params: FieldParams, ts: Sequence[float], ss: Sequence[float]) -> list[tuple]:
    """Rows ``(t, s, u, v, cov)`` over the product set ``ts x ss`` squared."""
    pts = [(t, s) for t in ts for s in ss]
    return [(p[0], p[1], q[0], q[1], covariance(params, CovQuery(p, q))) for p in pts for q in pts]
