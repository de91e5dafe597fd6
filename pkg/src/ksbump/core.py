"""Model parameters, uniform grids, cell-average fields and projection."""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, DomainError

MIN_CELLS = 4


def critical_chi(k: int, L: float) -> float:
    """Return the k-th bifurcation value ``(k*pi/L)**2 + 1``."""
    if int(k) != k or k < 1:
        raise DomainError(f"mode k must be a positive integer, got {k!r}")
    if not L > 0:
        raise DomainError(f"domain length must be positive, got {L!r}")
    return (k * math.pi / L) ** 2 + 1.0


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless parameters: chemosensitivity, domain length and cell mass."""

    chi: float
    L: float
    M: float = 1.0

    def __post_init__(self):
        for name in ("chi", "L", "M"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float, np.floating)) and math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be a positive finite number, got {value!r}")
            object.__setattr__(self, name, float(value))

    @property
    def omega(self) -> float:
        """``sqrt(chi - 1)``; only defined above chi = 1."""
        if self.chi <= 1.0:
            raise DomainError(f"omega = sqrt(chi - 1) requires chi > 1, got chi = {self.chi}")
        return math.sqrt(self.chi - 1.0)

    @property
    def ubar(self) -> float:
        return self.M / self.L

    @property
    def vbar(self) -> float:
        return self.M / self.L

    def critical(self, k: int) -> float:
        return critical_chi(k, self.L)

    def max_modes(self) -> int:
        """Largest k with chi > chi_k (0 when chi <= chi_1)."""
        if self.chi <= 1.0:
            return 0
        k = int(self.omega * self.L / math.pi)
        while k >= 1 and not self.chi > critical_chi(k, self.L):
            k -= 1
        while self.chi > critical_chi(k + 1, self.L):
            k += 1
        return k

    def with_chi(self, chi: float) -> ModelParams:
        return ModelParams(chi, self.L, self.M)


@dataclass(frozen=True)
class Grid:
    """Uniform decomposition of (0, L) into N cells."""

    L: float
    N: int

    def __post_init__(self):
        if not self.L > 0:
            raise ConfigurationError(f"grid length must be positive, got {self.L!r}")
        if int(self.N) != self.N or self.N < MIN_CELLS:
            raise ConfigurationError(f"grid needs at least {MIN_CELLS} cells, got N = {self.N!r}")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "N", int(self.N))

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.N) + 0.5) * self.dx

    @property
    def interfaces(self) -> np.ndarray:
        x = np.arange(self.N + 1) * self.dx
        x[-1] = self.L
        return x


def make_grid(L: float, N: int) -> Grid:
    return Grid(L, N)


@dataclass(frozen=True, eq=False)
class Field:
    """Cell averages on a grid.  ``values`` is stored read-only."""

    values: np.ndarray
    grid: Grid = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.N,):
            raise ConfigurationError(
                f"field has shape {values.shape}, grid expects ({self.grid.N},)"
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return self.grid.N

    @property
    def mass(self) -> float:
        return math.fsum(self.values) * self.grid.dx

    def reflected(self) -> Field:
        return Field(self.values[::-1], self.grid)


@lru_cache(maxsize=None)
def _gauss_rule(order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    # reference node: the centre for odd orders, so constants are reproduced exactly
    ref = order // 2
    return nodes, weights / weights.sum(), ref


def _average(f, a, b, order):
    nodes, weights, ref = _gauss_rule(order)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = mid[:, None] + half[:, None] * nodes[None, :]
    fx = np.asarray(f(x), dtype=float)
    if fx.shape != x.shape:
        fx = np.broadcast_to(fx, x.shape)
    f0 = fx[:, ref]
    return f0 + (fx - f0[:, None]) @ weights


def project(
    f: Callable[[np.ndarray], np.ndarray],
    grid: Grid,
    order: int = 3,
    breakpoints: Sequence[float] = (),
) -> Field:
    """Cell averages of ``f`` by composite Gauss-Legendre quadrature.

    ``f`` must accept numpy arrays.  Points where ``f`` has a kink (support
    edges of compactly supported data) can be passed as ``breakpoints``;
    cells containing one are split there so the rule stays exact for
    piecewise polynomials.
    """
    if order < 1:
        raise ConfigurationError("quadrature order must be >= 1")
    edges = grid.interfaces
    values = _average(f, edges[:-1], edges[1:], order)
    cuts = sorted({float(p) for p in breakpoints if 0.0 < p < grid.L})
    if cuts:
        cells = np.clip(np.searchsorted(edges, cuts, side="right") - 1, 0, grid.N - 1)
        for j in np.unique(cells):
            a, b = edges[j], edges[j + 1]
            inner = [c for c in cuts if a < c < b]
            if not inner:
                continue
            pts = np.array([a, *inner, b])
            sub = _average(f, pts[:-1], pts[1:], order)
            values[j] = float(np.dot(sub, np.diff(pts)) / (b - a))
    return Field(values, grid)
