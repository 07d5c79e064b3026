r"""Samplers for the tempered Hermite field.

Four routes are provided:

* ``cholesky``: exact Gaussian sampling of the order-one field on an anchor
  lattice from the closed-form covariance;
* ``spectral``: order-one synthesis from a Hermitian Gaussian measure on a
  symmetric frequency lattice;
* ``moving_average``: the multiple Wiener integral discretized on a noise
  lattice, for any order ``k``;
* ``semimartingale``: for ``H1, H2 > 1`` the order-one field as the double
  integral of a stationary density field.

Noise lattices are cell-centred: node ``(i, j)`` of a noise :class:`Grid2D`
is the centre of a ``dx`` by ``dy`` cell. Each cell carries an independent
``N(0, dx dy)`` Brownian-sheet increment.

Random numbers come from a counter-based Philox generator keyed by
``(seed, stream)``. Replicate ``r`` of a batch starts at counter block ``r``,
so any replicate can be regenerated alone and batch results do not depend on
evaluation order.

Moving-average kernels are stored as exact cell averages. Because of that the
moving-average, semimartingale and white-noise routes agree exactly on
shared noise: each one is a reordering of the same finite sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import linalg, special

from .covariance import covariance_matrix
from .errors import BudgetError, ConditioningError, DomainError, TruncationError, UnsupportedError
from .kernels import (FieldParams, Grid2D, spectral_constant, tempered_antiderivative,
                      tempered_second_antiderivative, truncation_window)

__all__ = [
    "SeedSpec",
    "NoiseGrid",
    "SamplePath",
    "SamplerConfig",
    "draw_noise",
    "default_noise_grid",
    "sample_order1_cholesky",
    "sample_order1_spectral",
    "sample_orderk_moving_average",
    "sample_semimartingale",
    "sample_many",
    "moving_average_weights",
]

METHODS = ("cholesky", "spectral", "moving_average", "semimartingale")


@dataclass(frozen=True)
class SeedSpec:
    """Counter-based RNG key: a 64-bit ``seed`` and a 64-bit ``stream``."""

    seed: int
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if int(v) != v or not 0 <= v < 2 ** 64:
                raise DomainError(f"{name} must be an integer in [0, 2^64)")

    def generator(self, replicate: int = 0) -> np.random.Generator:
        """Generator for one replicate; independent of all other replicates."""
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        counter = np.array([0, 0, replicate, 0], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key, counter=counter))


@dataclass(frozen=True)
class SamplerConfig:
    """Numerical knobs shared by the samplers."""

    tail_tol: float = 1e-8
    ridge_start: float = 1e-12
    ridge_max: float = 1e-8
    quad_nodes: int = 16
    grading: float = 3.0
    combinatorial_budget: float = 2e8
    band_correction: bool = True


@dataclass(frozen=True)
class NoiseGrid:
    """White-noise cell increments on a cell-centred lattice."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).reshape(self.grid.shape)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class SamplePath:
    """One realization of the field on an anchor lattice."""

    params: FieldParams
    grid: Grid2D
    values: np.ndarray
    method: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown method {self.method!r}")
        vals = np.asarray(self.values, dtype=float).reshape(self.grid.shape)
        object.__setattr__(self, "values", vals)

    def value_at(self, t: float, s: float) -> float:
        """Field value at an anchor; coordinates equal to 0 give the pinned value 0."""
        if t == 0.0 or s == 0.0:
            return 0.0
        return float(self.values[_index_of(self.grid.xs, t), _index_of(self.grid.ys, s)])


def _index_of(nodes: np.ndarray, x: float) -> int:
    h = nodes[1] - nodes[0] if nodes.size > 1 else 1.0
    i = int(np.argmin(np.abs(nodes - x)))
    if abs(nodes[i] - x) > 1e-9 * max(abs(h), 1.0):
        raise DomainError(f"coordinate {x} is not an anchor of the grid")
    return i


# ---------------------------------------------------------------- noise

def draw_noise(grid: Grid2D, seed: SeedSpec, replicate: int = 0) -> NoiseGrid:
    """Independent ``N(0, dx dy)`` cell increments for one replicate."""
    z = seed.generator(replicate).standard_normal(grid.shape)
    return NoiseGrid(grid, z * math.sqrt(grid.dx * grid.dy))


def _noise_batch(grid: Grid2D, seed: SeedSpec, replicates: range) -> np.ndarray:
    out = np.empty((len(replicates),) + grid.shape)
    for k, r in enumerate(replicates):
        out[k] = draw_noise(grid, seed, r).values
    return out


def _cell_edges(nodes: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    return nodes - 0.5 * h, nodes + 0.5 * h


def default_noise_grid(params: FieldParams, anchors: Grid2D, cell: float | None = None,
                       tol: float = 1e-8) -> Grid2D:
    """Cell-centred noise lattice aligned with ``0`` and the anchor lattice.

    The cell side is at most ``min(1/(8 lambda), spacing/4)`` per axis. The
    lattice reaches back by the truncation window of the kernel tail.
    """
    spec = []
    for axis, (lam, x0, dx, n) in enumerate(((params.lambda1, anchors.x0, anchors.dx, anchors.nx),
                                             (params.lambda2, anchors.y0, anchors.dy, anchors.ny))):
        target = cell if cell is not None else min(1.0 / (8.0 * lam), dx / 4.0)
        m = max(1, math.ceil(dx / target))
        h = dx / m
        shape = 1.0 - params.kernel_power(axis)
        back = math.ceil(truncation_window(shape, lam, tol) / h)
        tmax = x0 + (n - 1) * dx
        fwd = int(round(tmax / h))
        spec.append((-back * h + 0.5 * h, h, back + fwd))
    (xa, hx, nx), (ya, hy, ny) = spec
    return Grid2D(xa, ya, hx, hy, nx, ny)


def _check_cover(noise_grid: Grid2D, anchors: Grid2D, params: FieldParams, tol: float) -> None:
    lo_x = noise_grid.x0 - 0.5 * noise_grid.dx
    lo_y = noise_grid.y0 - 0.5 * noise_grid.dy
    hi_x = noise_grid.x0 + (noise_grid.nx - 0.5) * noise_grid.dx
    hi_y = noise_grid.y0 + (noise_grid.ny - 0.5) * noise_grid.dy
    tx = anchors.x0 + (anchors.nx - 1) * anchors.dx
    ty = anchors.y0 + (anchors.ny - 1) * anchors.dy
    wx = truncation_window(1.0 - params.kernel_power(0), params.lambda1, tol)
    wy = truncation_window(1.0 - params.kernel_power(1), params.lambda2, tol)
    slack_x, slack_y = 1e-9 * noise_grid.dx, 1e-9 * noise_grid.dy
    if (lo_x > -wx + slack_x or lo_y > -wy + slack_y
            or hi_x < tx - slack_x or hi_y < ty - slack_y):
        raise TruncationError(f"noise grid must cover [-window, tmax] on both axes; windows at tail "
                              f"tolerance {tol:g} are {wx:.4g} and {wy:.4g}")


# ---------------------------------------------------------------- k = 1 weights

def moving_average_weights(beta: float, lam: float, anchors: np.ndarray, nodes: np.ndarray,
                           h: float) -> np.ndarray:
    r"""Cell averages of :math:`x \mapsto \int_0^{t} (a-x)_+^{\beta-1}e^{-\lambda(a-x)}\,da`.

    Returns an ``(len(anchors), len(nodes))`` matrix; row ``i`` is for
    anchor ``t_i`` and column ``c`` for the cell centred at ``nodes[c]``.
    """
    x0, x1 = _cell_edges(nodes, h)
    t = np.asarray(anchors, dtype=float)[:, None]
    psi = lambda v: tempered_second_antiderivative(np.maximum(v, 0.0), beta, lam)
    return (psi(t - x0) - psi(t - x1) - psi(-x0) + psi(-x1)) / h


def _pinned_mask(g: Grid2D) -> np.ndarray:
    X, Y = g.mesh()
    return (X == 0.0) | (Y == 0.0)


# ---------------------------------------------------------------- cholesky

@lru_cache(maxsize=32)
def _cholesky_factor(params: FieldParams, anchors: Grid2D, ridge_start: float, ridge_max: float):
    mask = ~_pinned_mask(anchors).ravel()
    X, Y = anchors.mesh()
    pts = list(zip(X.ravel()[mask].tolist(), Y.ravel()[mask].tolist()))
    if not pts:
        return mask, np.zeros((0, 0)), 0.0
    C = covariance_matrix(params, pts)
    scale = float(np.max(np.diag(C)))
    ridge = 0.0
    eps = ridge_start
    while True:
        try:
            L = linalg.cholesky(C + ridge * scale * np.eye(len(pts)), lower=True)
            return mask, L, ridge
        except linalg.LinAlgError:
            if eps > ridge_max:
                raise ConditioningError("covariance matrix not positive definite after maximal ridge")
            ridge, eps = eps, eps * 2.0


def _cholesky_batch(params, anchors, seed, replicates, cfg) -> np.ndarray:
    if params.k != 1:
        raise UnsupportedError("exact Gaussian sampling needs k = 1")
    mask, L, _ = _cholesky_factor(params, anchors, cfg.ridge_start, cfg.ridge_max)
    out = np.zeros((len(replicates), anchors.nx * anchors.ny))
    m = int(mask.sum())
    for k, r in enumerate(replicates):
        if m:
            out[k, mask] = L @ seed.generator(r).standard_normal(m)
    return out.reshape((len(replicates),) + anchors.shape)


def sample_order1_cholesky(params: FieldParams, anchors: Grid2D, seed: SeedSpec,
                           config: SamplerConfig = SamplerConfig(), replicate: int = 0) -> SamplePath:
    """Exact Gaussian sample ``L xi`` with ``L`` the ridged Cholesky factor.

    Raises
    ------
    ConditioningError
        If the ridge grows beyond ``config.ridge_max`` times the largest variance.
    """
    vals = _cholesky_batch(params, anchors, seed, range(replicate, replicate + 1), config)[0]
    return SamplePath(params, anchors, vals, "cholesky")


# ---------------------------------------------------------------- spectral

def _check_symmetric(fg: Grid2D) -> None:
    for x0, h, n in ((fg.x0, fg.dx, fg.nx), (fg.y0, fg.dy, fg.ny)):
        if n % 2 != 1 or abs(x0 + 0.5 * (n - 1) * h) > 1e-9 * h:
            raise DomainError("frequency grid must be symmetric about 0 with an odd count")


def spectral_frequency_grid(lam: tuple[float, float], cutoff: float = 64.0, modes: int = 257) -> Grid2D:
    """Symmetric lattice on ``[-cutoff/lambda, cutoff/lambda]`` with ``modes`` points per axis."""
    if modes % 2 == 0:
        modes += 1
    half = (modes - 1) // 2
    c1, c2 = cutoff / lam[0], cutoff / lam[1]
    return Grid2D(-c1, -c2, c1 / half, c2 / half, modes, modes)


def _spectral_factor(t: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """``i (e^{i t xi} - 1)/xi`` with the limit ``-t`` at ``xi = 0``."""
    t = t[:, None]
    safe = np.where(xi == 0.0, 1.0, xi)[None, :]
    val = 1j * np.expm1(1j * t * safe) / safe
    return np.where(xi[None, :] == 0.0, -t + 0j, val)


def _hermitian_noise(gen: np.random.Generator, n1: int, n2: int, cell: float) -> np.ndarray:
    """Complex Gaussian array with ``W[-m, -n] = conj(W[m, n])`` and ``E|W|^2 = cell``."""
    z = (gen.standard_normal((n1, n2)) + 1j * gen.standard_normal((n1, n2))) * math.sqrt(cell / 2.0)
    W = 0.5 * (z + np.conj(z[::-1, ::-1])) * math.sqrt(2.0)
    c1, c2 = (n1 - 1) // 2, (n2 - 1) // 2
    W[c1, c2] = gen.standard_normal() * math.sqrt(cell)
    return W


def _spectral_batch(params, anchors, freq_grid, seed, replicates) -> np.ndarray:
    if params.k != 1:
        raise UnsupportedError("spectral synthesis is implemented for k = 1")
    _check_symmetric(freq_grid)
    xi, om = freq_grid.xs, freq_grid.ys
    xi[(freq_grid.nx - 1) // 2] = 0.0
    om[(freq_grid.ny - 1) // 2] = 0.0
    b1, b2 = params.H1 - 0.5, params.H2 - 0.5
    K1 = _spectral_factor(anchors.xs, xi) * (params.lambda1 + 1j * xi)[None, :] ** (-b1)
    K2 = _spectral_factor(anchors.ys, om) * (params.lambda2 + 1j * om)[None, :] ** (-b2)
    C = spectral_constant(params)
    cell = freq_grid.dx * freq_grid.dy
    out = np.empty((len(replicates),) + anchors.shape)
    for k, r in enumerate(replicates):
        W = _hermitian_noise(seed.generator(r), freq_grid.nx, freq_grid.ny, cell)
        Z = C * (K1 @ W @ K2.T)
        if np.linalg.norm(Z.imag) > 1e-9 * max(np.linalg.norm(Z.real), 1e-300):
            raise RuntimeError("spectral synthesis lost Hermitian symmetry")
        out[k] = Z.real
    return out


def sample_order1_spectral(params: FieldParams, anchors: Grid2D, freq_grid: Grid2D, seed: SeedSpec,
                           replicate: int = 0) -> SamplePath:
    r"""Spectral synthesis ``Z = C sum K(xi, omega) W(d xi d omega)`` on a symmetric lattice.

    Here ``K = -(e^{it xi}-1)(e^{is omega}-1)/(xi omega)`` times
    ``(lambda1 + i xi)^{-beta1} (lambda2 + i omega)^{-beta2}``, with
    ``beta = H - 1/2``. Truncating at the lattice cutoff biases the variance
    downward by roughly the symbol tail ``4 Xi^{-1-2 beta}/(1 + 2 beta)``
    relative to the full-axis integral, per axis.
    """
    vals = _spectral_batch(params, anchors, freq_grid, seed, range(replicate, replicate + 1))[0]
    return SamplePath(params, anchors, vals, "spectral", {"freq_grid": freq_grid.to_dict()})


# ---------------------------------------------------------------- moving average, k >= 2

def _axis_quadrature(d: float, lam: float, nodes: np.ndarray, h: float, anchors: np.ndarray,
                     cfg: SamplerConfig):
    r"""Time quadrature for the order-``k`` cell kernels on one axis.

    Returns ``C`` of shape ``(cells, q)`` with
    ``C[c, q] = (1/h) int_{cell c} (a_q - x)_+^{-d} e^{-lam (a_q - x)} dx``
    and anchor weights ``W`` of shape ``(anchors, q)`` so that
    ``sum_q W[i, q] F(a_q)`` approximates ``int_0^{t_i} F(a) da``.
    Between consecutive cell edges the nodes are graded toward the left end,
    where the cell averages have a power-law corner.
    """
    x0, x1 = _cell_edges(nodes, h)
    anchors = np.asarray(anchors, dtype=float)
    tmax = float(np.max(anchors))
    pts = {0.0, tmax} | {float(e) for e in np.concatenate([x0, x1]) if 0.0 < e < tmax}
    pts |= {float(a) for a in anchors if 0.0 < a < tmax}
    seg = np.array(sorted(pts))
    u, wu = special.roots_legendre(cfg.quad_nodes)
    u = 0.5 * (u + 1.0)
    wu = 0.5 * wu
    q = cfg.grading
    a = np.concatenate([lo + (hi - lo) * u ** q for lo, hi in zip(seg[:-1], seg[1:])])
    wa = np.concatenate([(hi - lo) * q * u ** (q - 1.0) * wu for lo, hi in zip(seg[:-1], seg[1:])])
    phi = lambda v: tempered_antiderivative(np.maximum(v, 0.0), 1.0 - d, lam)
    C = (phi(a[None, :] - x0[:, None]) - phi(a[None, :] - x1[:, None])) / h
    W = np.where(a[None, :] < anchors[:, None], wa[None, :], 0.0)
    return C, W


@lru_cache(maxsize=64)
def _band_deficit(d: float, h: float, reach: int = 4000) -> float:
    r"""Squared mass lost per diagonal cell when a ``|r|^{1-2d}`` kernel is cell averaged.

    Near the diagonal the pair kernel behaves like ``B |x1 - x2|^{1-2d}``
    with ``B = Beta(1-d, 2d-1)``. For the pure power law the exact block
    integrals of the kernel and of its square are second differences of
    ``|u|^{2-q}/((1-q)(2-q))``, giving the loss in closed form.
    """
    p = 2.0 * d - 1.0
    amp = special.beta(1.0 - d, p)
    m = np.arange(-reach, reach + 1, dtype=float)

    def block(q):
        F = lambda u: np.abs(u) ** (2.0 - q) / ((1.0 - q) * (2.0 - q))
        return F((m + 1.0) * h) - 2.0 * F(m * h) + F((m - 1.0) * h)

    return float(np.sum(amp ** 2 * block(2.0 * p) - (amp * block(p)) ** 2 / h ** 2))


def _diagonal_correction(d: float, C: np.ndarray, W: np.ndarray, nodes: np.ndarray, h: float,
                         anchors: np.ndarray) -> np.ndarray:
    """Per-anchor additions to the diagonal of the cell pair kernel, shape ``(anchors, cells)``.

    Each diagonal cell inside ``(0, t)`` is raised so its squared mass
    absorbs the local band loss from :func:`_band_deficit`.
    """
    loss = _band_deficit(float(d), float(h)) / h ** 2
    diag = W @ (C ** 2).T
    inside = (nodes[None, :] > 0.0) & (nodes[None, :] < np.asarray(anchors)[:, None])
    return np.where(inside, np.sqrt(diag ** 2 + loss) - diag, 0.0)


def _order2_batch(C1, W1, C2, W2, params, anchors, noise_grid, Xi, cfg) -> np.ndarray:
    r"""Wick-corrected quadratic form for ``k = 2``.

    With the pair kernel ``Hbar_i = C diag(W_i) C^T + diag(delta_i)`` on each
    axis, the output is ``sum Xi * (Hbar_i Xi Hbar_j) - dx dy tr(Hbar_i) tr(Hbar_j)``,
    expanded so that no cells-by-cells matrix is formed.
    """
    if cfg.band_correction:
        D1 = _diagonal_correction(params.kernel_power(0), C1, W1, noise_grid.xs, noise_grid.dx, anchors.xs)
        D2 = _diagonal_correction(params.kernel_power(1), C2, W2, noise_grid.ys, noise_grid.dy, anchors.ys)
    else:
        D1 = np.zeros((anchors.nx, noise_grid.nx))
        D2 = np.zeros((anchors.ny, noise_grid.ny))
    tr1 = W1 @ (C1 ** 2).sum(axis=0) + D1.sum(axis=1)
    tr2 = W2 @ (C2 ** 2).sum(axis=0) + D2.sum(axis=1)
    wick = np.outer(tr1, tr2) * noise_grid.dx * noise_grid.dy
    out = np.empty((Xi.shape[0],) + anchors.shape)
    for n in range(Xi.shape[0]):
        U = Xi[n] @ C2
        V = C1.T @ Xi[n]
        P = C1.T @ U
        out[n] = (W1 @ (P * P) @ W2.T + D1 @ (U * U) @ W2.T + W1 @ (V * V) @ D2.T
                  + D1 @ (Xi[n] * Xi[n]) @ D2.T - wick)
    return out


def _orderk_batch(params: FieldParams, anchors: Grid2D, noise_grid: Grid2D, Xi: np.ndarray,
                  cfg: SamplerConfig) -> np.ndarray:
    """Moving-average field for a batch of noise arrays ``Xi`` of shape ``(n, nx, ny)``."""
    _check_cover(noise_grid, anchors, params, cfg.tail_tol)
    k = params.k
    if k == 1:
        A = moving_average_weights(params.H1 - 0.5, params.lambda1, anchors.xs, noise_grid.xs, noise_grid.dx)
        B = moving_average_weights(params.H2 - 0.5, params.lambda2, anchors.ys, noise_grid.ys, noise_grid.dy)
        A[anchors.xs <= 0.0] = 0.0
        B[anchors.ys <= 0.0] = 0.0
        return np.einsum("ic,ncd,jd->nij", A, Xi, B, optimize=True)
    C1, W1 = _axis_quadrature(params.kernel_power(0), params.lambda1, noise_grid.xs, noise_grid.dx,
                              anchors.xs, cfg)
    C2, W2 = _axis_quadrature(params.kernel_power(1), params.lambda2, noise_grid.ys, noise_grid.dy,
                              anchors.ys, cfg)
    work = C1.shape[1] * C2.shape[1] * (noise_grid.nx + noise_grid.ny) * k
    if k >= 3 and work > cfg.combinatorial_budget:
        raise BudgetError(f"order-{k} evaluation needs about {work:.2e} operations per sample, "
                          f"above the budget {cfg.combinatorial_budget:.2e}")
    out = np.empty((Xi.shape[0],) + anchors.shape)
    if k == 2:
        return _order2_batch(C1, W1, C2, W2, params, anchors, noise_grid, Xi, cfg)
    # k >= 3: sum over ordered k-tuples of distinct cells, k! e_k, via Newton's identities
    for n in range(Xi.shape[0]):
        p = [(C1 ** m).T @ Xi[n] ** m @ C2 ** m for m in range(1, k + 1)]
        e = [np.ones_like(p[0])]
        for m in range(1, k + 1):
            e.append(sum((-1) ** (i - 1) * e[m - i] * p[i - 1] for i in range(1, m + 1)) / m)
        out[n] = math.factorial(k) * (W1 @ e[k] @ W2.T)
    return out


def sample_orderk_moving_average(params: FieldParams, anchors: Grid2D, noise_grid: Grid2D,
                                 seed: SeedSpec, config: SamplerConfig = SamplerConfig(),
                                 replicate: int = 0, noise: NoiseGrid | None = None) -> SamplePath:
    r"""Discretized multiple Wiener integral of the moving-average kernel.

    ``k = 1`` is a weighted sum of cell increments with exact cell-averaged
    weights. ``k = 2`` is the full quadratic form in the cell increments with
    the diagonal ``xi_c^2`` replaced by ``xi_c^2 - dx dy``, so the output has
    mean zero; with zero noise it returns the Wick constant. ``k >= 3`` sums
    over ordered tuples of distinct cells.

    For ``k >= 2`` the time integrals are done by graded Gauss-Legendre
    quadrature on each segment between cell edges. Cell averaging a pair
    kernel with a ``|x1 - x2|^{1-2d}`` diagonal singularity loses squared mass
    at rate ``h^{2-2d}``; for ``k = 2`` (with ``config.band_correction``) each
    diagonal cell is raised by the closed-form loss of the local power law,
    which leaves an ``O(h)`` variance error.

    Parameters
    ----------
    noise : NoiseGrid, optional
        Explicit noise; overrides ``seed`` and ``replicate``.

    Raises
    ------
    TruncationError
        If the noise grid does not cover ``[-window, tmax]``.
    BudgetError
        For ``k >= 3`` beyond ``config.combinatorial_budget``.
    """
    Xi = (noise.values if noise is not None else draw_noise(noise_grid, seed, replicate).values)[None]
    vals = _orderk_batch(params, anchors, noise_grid, Xi, config)[0]
    return SamplePath(params, anchors, vals, "moving_average", {"noise_grid": noise_grid.to_dict()})


# ---------------------------------------------------------------- semimartingale

def _cell_pair_weights(beta: float, lam: float, h: float, n: int) -> np.ndarray:
    r"""``g[m] = (1/h) int_{cell k} int_{cell k-m} (a-x)_+^{beta-1} e^{-lam(a-x)} dx da``."""
    psi = lambda v: tempered_second_antiderivative(np.maximum(v, 0.0), beta, lam)
    m = np.arange(n, dtype=float)
    return (psi((m + 1.0) * h) - 2.0 * psi(m * h) + psi((m - 1.0) * h)) / h


def _aligned_index(nodes: np.ndarray, h: float, t: np.ndarray, what: str) -> np.ndarray:
    origin = nodes[0] - 0.5 * h
    idx = np.rint((t - origin) / h)
    if np.any(np.abs(origin + idx * h - t) > 1e-9 * h):
        raise DomainError(f"{what} must lie on noise cell edges")
    return idx.astype(int)


def _semimartingale_batch(params, anchors, noise_grid, Xi, tol: float = 1e-8) -> np.ndarray:
    if params.k != 1:
        raise UnsupportedError("the density decomposition is for k = 1")
    if params.H1 <= 1.0 or params.H2 <= 1.0:
        raise UnsupportedError("the field is not a semimartingale unless H1 > 1 and H2 > 1: "
                               "for H <= 1 the density kernel (x-xi)^{H-3/2} is not square integrable")
    _check_cover(noise_grid, anchors, params, tol)
    mats = []
    for lam, H, nodes, h, ts in ((params.lambda1, params.H1, noise_grid.xs, noise_grid.dx, anchors.xs),
                                 (params.lambda2, params.H2, noise_grid.ys, noise_grid.dy, anchors.ys)):
        n = nodes.size
        zero = int(_aligned_index(nodes, h, np.array([0.0]), "the origin")[0])
        stop = _aligned_index(nodes, h, ts, "anchors")
        g = _cell_pair_weights(H - 0.5, lam, h, n)
        G = linalg.toeplitz(g, np.zeros(n))[zero:]
        mats.append((G, stop - zero))
    (G1, s1), (G2, s2) = mats
    out = np.empty((Xi.shape[0],) + anchors.shape)
    for n in range(Xi.shape[0]):
        # cell-averaged density times cell area, then cumulative double integral
        Mbar = G1 @ Xi[n] @ G2.T
        cum = np.zeros((Mbar.shape[0] + 1, Mbar.shape[1] + 1))
        cum[1:, 1:] = Mbar.cumsum(axis=0).cumsum(axis=1)
        out[n] = cum[np.ix_(s1, s2)]
    return out


def sample_semimartingale(params: FieldParams, anchors: Grid2D, noise_grid: Grid2D, seed: SeedSpec,
                          replicate: int = 0, noise: NoiseGrid | None = None) -> SamplePath:
    r"""Order-one field as the double integral of its stationary density field.

    For ``H1, H2 > 1`` the density
    ``M(x, y) = int int (x-xi)_+^{H1-3/2} (y-omega)_+^{H2-3/2} e^{-lambda1(x-xi)-lambda2(y-omega)} W(dxi, domega)``
    is tabulated as cell averages by convolving the noise with exact
    cell-pair weights, then integrated cumulatively. Anchors and the origin
    must lie on noise cell edges. On shared noise the result equals
    :func:`sample_orderk_moving_average` with ``k = 1`` up to rounding.

    Raises
    ------
    UnsupportedError
        If ``H1 <= 1`` or ``H2 <= 1``.
    """
    Xi = (noise.values if noise is not None else draw_noise(noise_grid, seed, replicate).values)[None]
    vals = _semimartingale_batch(params, anchors, noise_grid, Xi)[0]
    return SamplePath(params, anchors, vals, "semimartingale", {"noise_grid": noise_grid.to_dict()})


# ---------------------------------------------------------------- batches

def sample_many(params: FieldParams, anchors: Grid2D, seed: SeedSpec, n: int, method: str,
                noise_grid: Grid2D | None = None, freq_grid: Grid2D | None = None,
                config: SamplerConfig = SamplerConfig(), start: int = 0, chunk: int = 256) -> np.ndarray:
    """Replicates ``start, ..., start + n - 1`` stacked as an ``(n, nx, ny)`` array.

    Replicate ``r`` equals the single-sample call with ``replicate=r``.
    """
    if method not in METHODS:
        raise DomainError(f"unknown method {method!r}")
    if n < 0:
        raise DomainError("n must be >= 0")
    if method in ("moving_average", "semimartingale") and noise_grid is None:
        noise_grid = default_noise_grid(params, anchors, tol=config.tail_tol)
    if method == "spectral" and freq_grid is None:
        freq_grid = spectral_frequency_grid(params.lam)
    out = np.empty((n,) + anchors.shape)
    for lo in range(0, n, chunk):
        reps = range(start + lo, start + min(n, lo + chunk))
        if method == "cholesky":
            block = _cholesky_batch(params, anchors, seed, reps, config)
        elif method == "spectral":
            block = _spectral_batch(params, anchors, freq_grid, seed, reps)
        else:
            Xi = _noise_batch(noise_grid, seed, reps)
            if method == "moving_average":
                block = _orderk_batch(params, anchors, noise_grid, Xi, config)
            else:
                block = _semimartingale_batch(params, anchors, noise_grid, Xi, config.tail_tol)
        out[lo:lo + len(reps)] = block
    return out
