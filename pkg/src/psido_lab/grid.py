"""Periodic sampling grids, lattice fields, cubes and the discrete Fourier pair.

The spatial lattice of a :class:`Grid` is ``x_k = -L/2 + k h`` for
``k = 0..N-1`` in every dimension; the frequency lattice is ``2 pi k / L`` for
``k = -N/2..N/2-1``.  Arrays are always stored in this natural (sorted) order,
so index ``N // 2`` is the origin in both spaces.

Normalization: the forward transform carries the cell volume ``h**dim`` and no
``2 pi`` factor; the inverse carries ``(2 pi)**-dim`` times the frequency cell
volume.  With this pair the symbol ``a = 1`` quantizes to the identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class GridError(ValueError):
    """Invalid grid parameters."""


class TagError(ValueError):
    """A field was passed in the wrong space (spatial vs frequency)."""


class DegenerateCubeError(ValueError):
    """Cube side below one lattice cell."""


class Space(str, Enum):
    SPATIAL = "spatial"
    FREQUENCY = "frequency"


@dataclass(frozen=True)
class Grid:
    dim: int
    L: float
    N: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise GridError(f"dim must be 1 or 2, got {self.dim}")
        if self.N < 8 or self.N % 2:
            raise GridError(f"N must be even and >= 8, got {self.N}")
        if not self.L > 0:
            raise GridError(f"L must be positive, got {self.L}")

    @property
    def h(self) -> float:
        return self.L / self.N

    @property
    def dxi(self) -> float:
        return 2.0 * np.pi / self.L

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.dim

    @property
    def size(self) -> int:
        return self.N**self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @property
    def nyquist(self) -> float:
        """Largest per-axis frequency magnitude on the lattice."""
        return np.pi * self.N / self.L

    def axis(self) -> np.ndarray:
        return -self.L / 2 + self.h * np.arange(self.N)

    def freq_axis(self) -> np.ndarray:
        return self.dxi * np.arange(-self.N // 2, self.N // 2)

    def points(self) -> np.ndarray:
        """Spatial lattice as an array of shape ``shape + (dim,)``."""
        return _mesh(self.axis(), self.dim)

    def frequencies(self) -> np.ndarray:
        """Frequency lattice as an array of shape ``shape + (dim,)``."""
        return _mesh(self.freq_axis(), self.dim)

    def index_of(self, point) -> tuple[int, ...]:
        """Nearest lattice index of a point (periodic)."""
        p = np.atleast_1d(np.asarray(point, dtype=float))
        idx = np.rint((p + self.L / 2) / self.h).astype(int) % self.N
        return tuple(int(i) for i in idx)

    def periodic_distance(self, center) -> np.ndarray:
        """Euclidean wrap-around distance from every lattice point to ``center``."""
        d = self.points() - np.asarray(center, dtype=float)
        d = (d + self.L / 2) % self.L - self.L / 2
        return np.sqrt(np.sum(d * d, axis=-1))

    def refine(self, factor: int = 2) -> "Grid":
        return Grid(self.dim, self.L, self.N * factor)


def _mesh(ax: np.ndarray, dim: int) -> np.ndarray:
    if dim == 1:
        return ax[:, None]
    return np.stack(np.meshgrid(ax, ax, indexing="ij"), axis=-1)


@dataclass(frozen=True)
class Field:
    """Complex samples on the spatial or frequency lattice of ``grid``."""

    grid: Grid
    values: np.ndarray
    space: Space = Space.SPATIAL

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.size != self.grid.size:
            raise GridError(f"expected {self.grid.size} samples, got {v.size}")
        v = v.reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "space", Space(self.space))

    @classmethod
    def spatial(cls, grid: Grid, values) -> "Field":
        return cls(grid, values, Space.SPATIAL)

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "Field":
        """Sample ``fn(points)``; ``points`` has shape ``grid.shape + (dim,)``."""
        return cls(grid, fn(grid.points()), Space.SPATIAL)

    def _like(self, values) -> "Field":
        return Field(self.grid, values, self.space)

    def __add__(self, other: "Field") -> "Field":
        _check_same(self, other)
        return self._like(self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _check_same(self, other)
        return self._like(self.values - other.values)

    def __mul__(self, c) -> "Field":
        return self._like(self.values * c)

    __rmul__ = __mul__

    def abs(self) -> np.ndarray:
        return np.abs(self.values)


def _check_same(a: Field, b: Field) -> None:
    if a.grid != b.grid or a.space != b.space:
        raise TagError("fields live on different grids or spaces")


@dataclass(frozen=True)
class Cube:
    """Axis-aligned cube ``Q(x0, l)`` on the periodic box."""

    center: tuple[float, ...]
    side: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(np.atleast_1d(np.asarray(self.center, float))))
        if not self.side > 0:
            raise DegenerateCubeError("cube side must be positive")

    def mask(self, grid: Grid) -> np.ndarray:
        """Boolean membership of lattice cell centers (periodic, closed faces)."""
        if self.side < grid.h * (1 - 1e-12):
            raise DegenerateCubeError(f"side {self.side} smaller than cell {grid.h}")
        if len(self.center) != grid.dim:
            raise GridError("cube and grid dimensions differ")
        if self.side >= grid.L:
            return np.ones(grid.shape, dtype=bool)
        d = grid.points() - np.asarray(self.center)
        d = np.abs((d + grid.L / 2) % grid.L - grid.L / 2)
        tol = 1e-9 * grid.h
        return np.all(d <= self.side / 2 + tol, axis=-1)


def forward_transform(u: Field) -> Field:
    """``u_hat(xi) = h**dim * sum_x exp(-i <x, xi>) u(x)`` on the frequency lattice."""
    if u.space is not Space.SPATIAL:
        raise TagError("forward_transform expects a spatial field")
    g = u.grid
    axes = tuple(range(g.dim))
    # x_0 = -L/2 contributes the factor (-1)**k per axis.
    vhat = np.fft.fftshift(np.fft.fftn(u.values, axes=axes), axes=axes)
    vhat = vhat * _alternating(g) * g.cell_volume
    return Field(g, vhat, Space.FREQUENCY)


def inverse_transform(v: Field) -> Field:
    """``u(x) = (2 pi)**-dim * dxi**dim * sum_xi exp(i <x, xi>) v(xi)``."""
    if v.space is not Space.FREQUENCY:
        raise TagError("inverse_transform expects a frequency field")
    g = v.grid
    axes = tuple(range(g.dim))
    w = np.fft.ifftshift(v.values * _alternating(g), axes=axes)
    u = np.fft.ifftn(w, axes=axes) / g.cell_volume
    return Field(g, u, Space.SPATIAL)


def _alternating(g: Grid) -> np.ndarray:
    s = np.where(np.arange(-g.N // 2, g.N // 2) % 2 == 0, 1.0, -1.0)
    if g.dim == 1:
        return s
    return np.multiply.outer(s, s)


def cube_average(u: Field, Q: Cube) -> complex:
    """Mean of ``u`` over the lattice points inside ``Q``."""
    m = Q.mask(u.grid)
    return complex(np.mean(u.values[m]))


def cube_measure(grid: Grid, Q: Cube) -> float:
    """Lattice measure of ``Q``: member count times cell volume."""
    return float(np.count_nonzero(Q.mask(grid))) * grid.cell_volume
