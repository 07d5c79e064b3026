r"""Wiener integrals with respect to the order-one field.

Two routes compute :math:`\int f\,dZ`:

* :func:`integrate_elementary` for step functions on rectangles, as a
  combination of rectangular increments of a sampled path;
* :func:`integrate_via_white_noise` for tabulated ``f``, as the white-noise
  pairing :math:`\Gamma_{\beta_1}\Gamma_{\beta_2}\sum_c (I^{\beta,\lambda}_- f)(c)\,\xi_c`.

Both are reorderings of one finite sum when the path comes from the
moving-average sampler on the same noise and ``f`` is cell aligned.
:func:`isometry_report` compares the Monte Carlo second moments with the two
deterministic inner products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from .errors import DomainError, TruncationError, UnsupportedError
from .kernels import Field2D, FieldParams, Grid2D, truncation_window
from .simulate import NoiseGrid, SamplePath, SeedSpec, draw_noise
from .tfcalc import beta_of, frac_integral, inner_product_H1, inner_product_H2

__all__ = [
    "ElementaryFunction",
    "integrate_elementary",
    "integrate_via_white_noise",
    "white_noise_weights",
    "IsometryRow",
    "IsometryReport",
    "isometry_report",
]


@dataclass(frozen=True)
class ElementaryFunction:
    """``f = sum_l a_l 1_{(x0, x1] x (y0, y1]}``; terms are ``(a, (x0, x1, y0, y1))``."""

    terms: tuple = ()

    def __post_init__(self):
        clean = []
        for a, rect in self.terms:
            x0, x1, y0, y1 = (float(v) for v in rect)
            if not (x0 < x1 and y0 < y1):
                raise DomainError("each rectangle needs x0 < x1 and y0 < y1")
            if not all(math.isfinite(v) for v in (a, x0, x1, y0, y1)):
                raise DomainError("coefficients and corners must be finite")
            clean.append((float(a), (x0, x1, y0, y1)))
        object.__setattr__(self, "terms", tuple(clean))

    def __add__(self, other: "ElementaryFunction") -> "ElementaryFunction":
        return ElementaryFunction(self.terms + other.terms)

    def scale(self, c: float) -> "ElementaryFunction":
        return ElementaryFunction(tuple((c * a, r) for a, r in self.terms))

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        for a, (x0, x1, y0, y1) in self.terms:
            out += a * ((x > x0) & (x <= x1) & (y > y0) & (y <= y1))
        return out

    def tabulate(self, grid: Grid2D) -> Field2D:
        """Cell values: overlap fraction of each rectangle with each grid cell, times ``a``."""
        vals = np.zeros(grid.shape)
        ex0, ex1 = grid.xs - 0.5 * grid.dx, grid.xs + 0.5 * grid.dx
        ey0, ey1 = grid.ys - 0.5 * grid.dy, grid.ys + 0.5 * grid.dy
        for a, (x0, x1, y0, y1) in self.terms:
            fx = np.clip(np.minimum(ex1, x1) - np.maximum(ex0, x0), 0.0, None) / grid.dx
            fy = np.clip(np.minimum(ey1, y1) - np.maximum(ey0, y0), 0.0, None) / grid.dy
            vals += a * np.outer(fx, fy)
        return Field2D(grid, vals)


def integrate_elementary(params: FieldParams, f: ElementaryFunction, path: SamplePath) -> float:
    """Sum of ``a_l`` times the rectangular increment of ``path`` over each rectangle.

    Raises
    ------
    DomainError
        If a corner with positive coordinates is not an anchor of the path.
    UnsupportedError
        If ``params.k != 1``.
    """
    if params.k != 1:
        raise UnsupportedError("Wiener integration is defined for the order-one field")
    total = 0.0
    for a, (x0, x1, y0, y1) in f.terms:
        if min(x0, y0) < 0:
            raise DomainError("rectangles must lie in the closed positive quadrant")
        inc = (path.value_at(x1, y1) - path.value_at(x1, y0) - path.value_at(x0, y1)
               + path.value_at(x0, y0))
        total += a * inc
    return float(total)


def _embed(f: Field2D, noise_grid: Grid2D) -> np.ndarray:
    g = f.grid
    if abs(g.dx - noise_grid.dx) > 1e-12 * g.dx or abs(g.dy - noise_grid.dy) > 1e-12 * g.dy:
        raise DomainError("f must use the noise cell size")
    ox = (g.x0 - noise_grid.x0) / g.dx
    oy = (g.y0 - noise_grid.y0) / g.dy
    ix, iy = int(round(ox)), int(round(oy))
    if abs(ox - ix) > 1e-9 or abs(oy - iy) > 1e-9:
        raise DomainError("f must be tabulated at noise cell centres")
    if ix < 0 or iy < 0 or ix + g.nx > noise_grid.nx or iy + g.ny > noise_grid.ny:
        raise TruncationError("f's grid extends beyond the noise grid")
    out = np.zeros(noise_grid.shape)
    out[ix:ix + g.nx, iy:iy + g.ny] = f.values
    return out


def white_noise_weights(params: FieldParams, f: Field2D, noise_grid: Grid2D,
                        tol: float = 1e-8) -> np.ndarray:
    r"""Cell weights :math:`\Gamma_{\beta_1}\Gamma_{\beta_2} I^{\beta,\lambda}_- f` on the noise grid.

    ``f`` is read as piecewise constant on noise cells.

    Raises
    ------
    TruncationError
        If ``f`` is nonzero within the kernel truncation window of the low
        edges of the noise grid, where the anticausal tail would be cut.
    """
    if params.k != 1:
        raise UnsupportedError("Wiener integration is defined for the order-one field")
    vals = _embed(f, noise_grid)
    nz = np.nonzero(vals)
    if nz[0].size:
        beta = beta_of(params)
        wx = truncation_window(beta.alpha1, beta.lambda1, tol)
        wy = truncation_window(beta.alpha2, beta.lambda2, tol)
        lo_x = noise_grid.x0 - 0.5 * noise_grid.dx
        lo_y = noise_grid.y0 - 0.5 * noise_grid.dy
        if noise_grid.xs[nz[0].min()] - lo_x < wx or noise_grid.ys[nz[1].min()] - lo_y < wy:
            raise TruncationError("support of f is within the truncation window of the noise grid edge")
    F = frac_integral(beta_of(params), "minus", Field2D(noise_grid, vals), basis="cells").values
    return special.gamma(params.H1 - 0.5) * special.gamma(params.H2 - 0.5) * F


def integrate_via_white_noise(params: FieldParams, f: Field2D, noise: NoiseGrid,
                              tol: float = 1e-8) -> float:
    r""":math:`\Gamma_{\beta_1}\Gamma_{\beta_2}\sum_c (I^{\beta,\lambda}_- f)_c\,\xi_c` on the noise cells.

    Examples
    --------
    >>> from tempered_hermite.kernels import FieldParams, Grid2D, Field2D
    >>> from tempered_hermite.simulate import NoiseGrid
    >>> g = Grid2D(-19.75, -19.75, 0.5, 0.5, 42, 42)
    >>> p = FieldParams(1, 0.7, 0.7, 1.0, 1.0)
    >>> integrate_via_white_noise(p, Field2D(g, 0.0), NoiseGrid(g, 1.0))
    0.0
    """
    F = white_noise_weights(params, f, noise.grid, tol)
    return float(np.sum(F * noise.values))


@dataclass(frozen=True)
class IsometryRow:
    """Second moment of the pair ``(i, j)`` by three routes, with its error budget."""

    i: int
    j: int
    h1: float
    h2: float
    empirical: float
    std_error: float
    bias: float
    flagged: bool


@dataclass
class IsometryReport:
    """Table of :class:`IsometryRow` plus run metadata."""

    rows: list[IsometryRow]
    n_samples: int
    seed: SeedSpec
    meta: dict = field(default_factory=dict)

    @property
    def flagged(self) -> list[IsometryRow]:
        return [r for r in self.rows if r.flagged]

    def to_csv(self) -> str:
        lines = ["i,j,h1,h2,empirical,std_error,bias,flagged"]
        for r in self.rows:
            lines.append(f"{r.i},{r.j},{r.h1!r},{r.h2!r},{r.empirical!r},{r.std_error!r},{r.bias!r},{int(r.flagged)}")
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {"n_samples": self.n_samples, "seed": self.seed.seed, "stream": self.seed.stream,
                "pairs": len(self.rows), "flagged": len(self.flagged), **self.meta}


def isometry_report(params: FieldParams, fs: Sequence[Field2D], N: int, seed: SeedSpec,
                    noise_grid: Grid2D | None = None, n_se: float = 4.0, plancherel_tol: float = 1e-6,
                    chunk: int = 512) -> IsometryReport:
    r"""Compare ``Cov(I(f_i), I(f_j))`` with the time and spectral inner products.

    The integrals are computed by the white-noise route, which reads ``f`` as
    piecewise constant on cells; its exact second moment is the cell-basis
    time inner product. The discretization budget of each pair is the gap
    between that and the sample-basis inner product used as the target. A pair is flagged
    when the empirical value misses ``<f_i, f_j>_{H1}`` by more than
    ``n_se`` standard errors plus that budget, or when the two inner products
    differ by more than ``plancherel_tol`` relative to the diagonal scale.

    All ``fs`` must share one grid, tabulated at noise cell centres.
    """
    if params.k != 1:
        raise UnsupportedError("Wiener integration is defined for the order-one field")
    fs = list(fs)
    if not fs:
        return IsometryReport([], N, seed, {"note": "empty function set"})
    grid = fs[0].grid
    if noise_grid is None:
        beta = beta_of(params)
        px = int(math.ceil(truncation_window(beta.alpha1, beta.lambda1, 1e-8) / grid.dx)) + 1
        py = int(math.ceil(truncation_window(beta.alpha2, beta.lambda2, 1e-8) / grid.dy)) + 1
        noise_grid = Grid2D(grid.x0 - px * grid.dx, grid.y0 - py * grid.dy, grid.dx, grid.dy,
                            grid.nx + px, grid.ny + py)
    Fs = np.stack([white_noise_weights(params, f, noise_grid).ravel() for f in fs])
    m = len(fs)
    h1 = np.array([[inner_product_H1(params, fs[i], fs[j]) for j in range(m)] for i in range(m)])
    h2 = np.array([[inner_product_H2(params, fs[i], fs[j]) for j in range(m)] for i in range(m)])
    h1c = np.array([[inner_product_H1(params, fs[i], fs[j], basis="cells") for j in range(m)] for i in range(m)])
    sums = np.zeros((m, m))
    for lo in range(0, N, chunk):
        block = np.stack([draw_noise(noise_grid, seed, r).values.ravel() for r in range(lo, min(N, lo + chunk))])
        V = block @ Fs.T
        sums += V.T @ V
    emp = sums / max(N, 1)
    var = np.diag(h1)
    se = np.sqrt((h1 ** 2 + np.outer(var, var)) / max(N, 1))
    bias = np.abs(h1c - h1)
    scale = np.sqrt(np.outer(np.abs(var), np.abs(var)))
    rows = []
    for i in range(m):
        for j in range(i, m):
            mc_bad = abs(emp[i, j] - h1[i, j]) > n_se * se[i, j] + bias[i, j]
            pl_bad = abs(h1[i, j] - h2[i, j]) > plancherel_tol * max(scale[i, j], np.finfo(float).tiny)
            rows.append(IsometryRow(i, j, float(h1[i, j]), float(h2[i, j]), float(emp[i, j]),
                                    float(se[i, j]), float(bias[i, j]), bool(mc_bad or pl_bad)))
    return IsometryReport(rows, N, seed, {"noise_grid": noise_grid.to_dict()})
