"""Hardy-Littlewood and sharp maximal functions, Muckenhoupt constants, weighted norms.

The supremum over cubes runs over a discrete family: cubes centred at lattice
points with side ``h 2^k`` for ``k = 0 .. log2 N``.  A cube of side ``h 2^k``
holds the lattice points within ``r_k = floor(2^(k-1))`` cells of its centre
(periodically) in every axis; the largest side is the whole box.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.ndimage import maximum_filter

from . import _backend
from .grid import Field, Grid


class DegenerateWeightError(ValueError):
    pass


class DegenerateInputError(ValueError):
    pass


@dataclass(frozen=True)
class CubeFamily:
    grid: Grid

    @property
    def levels(self) -> list[int]:
        return list(range(int(np.log2(self.grid.N)) + 1))

    def radius(self, k: int) -> int:
        """Half-width in cells of the level-``k`` cubes (``N`` means whole box)."""
        r = (2**k) // 2
        return self.grid.N if 2 * r + 1 >= self.grid.N or 2**k >= self.grid.N else r

    def side(self, k: int) -> float:
        return self.grid.h * 2**k

    def count(self, k: int) -> int:
        r = self.radius(k)
        return self.grid.size if r >= self.grid.N else (2 * r + 1) ** self.grid.dim

    def members(self, k: int, center: tuple[int, ...]) -> np.ndarray:
        """Boolean mask of the cube of level ``k`` centred at lattice index ``center``."""
        g = self.grid
        r = self.radius(k)
        if r >= g.N:
            return np.ones(g.shape, dtype=bool)
        idx = np.indices(g.shape)
        m = np.ones(g.shape, dtype=bool)
        for ax in range(g.dim):
            d = np.abs(idx[ax] - center[ax])
            m &= np.minimum(d, g.N - d) <= r
        return m

    def cubes(self):
        """Iterate ``(k, center, mask)`` over the whole family (for brute force)."""
        for k in self.levels:
            for c in np.ndindex(*self.grid.shape):
                yield k, c, self.members(k, c)
                if self.radius(k) >= self.grid.N:
                    break


def _window_sum(v: np.ndarray, r: int) -> np.ndarray:
    """Periodic sum over the ``(2r+1)^dim`` cube around every lattice point."""
    out = v
    for ax in range(v.ndim):
        pad = [(0, 0)] * v.ndim
        pad[ax] = (r + 1, r)
        c = np.cumsum(np.pad(out, pad, mode="wrap"), axis=ax)
        n = v.shape[ax]
        hi = np.take(c, np.arange(2 * r + 1, 2 * r + 1 + n), axis=ax)
        lo = np.take(c, np.arange(0, n), axis=ax)
        out = hi - lo
    return out


def cube_averages(v: np.ndarray, F: CubeFamily, k: int) -> np.ndarray:
    """Average of ``v`` over the level-``k`` cube centred at every lattice point."""
    r = F.radius(k)
    if r >= F.grid.N:
        return np.full(v.shape, np.mean(v))
    return _window_sum(v, r) / (2 * r + 1) ** v.ndim


def _spread_max(values: np.ndarray, F: CubeFamily, k: int) -> np.ndarray:
    """``out(x) = max`` of ``values(c)`` over level-``k`` cubes ``Q(c)`` containing ``x``."""
    r = F.radius(k)
    if r >= F.grid.N:
        return np.full(values.shape, values.max())
    return maximum_filter(values, size=2 * r + 1, mode="wrap")


def _as_array(u) -> np.ndarray:
    return u.values if isinstance(u, Field) else np.asarray(u)


def hl_maximal(u, F: CubeFamily) -> np.ndarray:
    """``Mu(x) = max`` over family cubes containing ``x`` of the mean of ``|u|``."""
    a = np.abs(_as_array(u)).astype(float)
    out = np.zeros(a.shape)
    for k in F.levels:
        np.maximum(out, _spread_max(cube_averages(a, F, k), F, k), out=out)
    return out


def _window_rows(v: np.ndarray, r: int, centers: np.ndarray) -> np.ndarray:
    """Values of the ``(2r+1)^dim`` periodic window around each flat centre index."""
    shape = v.shape
    offs = np.arange(-r, r + 1)
    cidx = np.unravel_index(centers, shape)
    if v.ndim == 1:
        return v[(cidx[0][:, None] + offs[None, :]) % shape[0]]
    i = (cidx[0][:, None, None] + offs[None, :, None]) % shape[0]
    j = (cidx[1][:, None, None] + offs[None, None, :]) % shape[1]
    return v[i, j].reshape(len(centers), -1)


def mean_oscillations(u, F: CubeFamily, k: int, backend: str | None = None) -> np.ndarray:
    """``inf_c`` mean of ``|u - c|`` over the level-``k`` cube at every centre."""
    v = np.asarray(_as_array(u), dtype=complex)
    kern = _backend.get(backend)
    r = F.radius(k)
    if r >= F.grid.N:
        return np.full(v.shape, kern.min_mean_deviation(v.reshape(1, -1))[0])
    n = v.size
    width = (2 * r + 1) ** v.ndim
    step = max(1, (1 << 20) // width)
    out = np.empty(n)
    for s in range(0, n, step):
        centers = np.arange(s, min(s + step, n))
        out[centers] = kern.min_mean_deviation(_window_rows(v, r, centers))
    return out.reshape(v.shape)


def sharp_maximal(u, F: CubeFamily, backend: str | None = None) -> np.ndarray:
    """``M#u(x) = max`` over family cubes containing ``x`` of ``inf_c`` mean ``|u - c|``.

    For real data the infimum is attained at a median; for complex data it is
    the geometric median, found by a modified Weiszfeld iteration.
    """
    v = _as_array(u)
    out = np.zeros(v.shape)
    for k in F.levels:
        np.maximum(out, _spread_max(mean_oscillations(v, F, k, backend), F, k), out=out)
    return out


# --------------------------------------------------------------------------
# weights


@dataclass(frozen=True)
class Weight:
    grid: Grid
    values: np.ndarray
    name: str = "weight"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(self.grid.shape)
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise DegenerateWeightError("weights must be finite and nonnegative")
        if not np.any(v > 0):
            raise DegenerateWeightError("weight vanishes identically")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def measure(self, mask: np.ndarray) -> float:
        """``omega(E)`` for a boolean lattice set ``E``."""
        return float(np.sum(self.values[mask]) * self.grid.cell_volume)


def constant_weight(grid: Grid, c: float = 1.0) -> Weight:
    return Weight(grid, np.full(grid.shape, float(c)), "constant")


def singular_cell_average(grid: Grid, s: float) -> float:
    """Exact mean of ``|x|^(-s)`` over the lattice cell centred at the origin (``s < dim``)."""
    if not s < grid.dim:
        return float("inf")
    half = grid.h / 2
    if grid.dim == 1:
        return half ** (-s) / (1.0 - s)
    # polar coordinates over the eight triangles of the square cell
    val, _ = quad(lambda t: (half / np.cos(t)) ** (2.0 - s), 0.0, np.pi / 4)
    return 8.0 * val / (2.0 - s) / grid.h**2


def power_profile(grid: Grid, s: float, center=None, singular: str = "cell_average") -> np.ndarray:
    """``|x - center|^(-s)`` on the lattice with periodic distance.

    The singular cell gets the cell mean of the profile (``"cell_average"``), so
    lattice masses of neighbourhoods of ``center`` converge at rate ``h``, or the
    value at distance ``h/2`` (``"half_cell"``).
    """
    if center is None:
        center = np.zeros(grid.dim)
    d = grid.periodic_distance(center)
    out = np.maximum(d, grid.h / 2) ** (-float(s))
    if singular == "cell_average":
        at = d < grid.h / 2
        if at.any():
            out[at] = singular_cell_average(grid, s)
    elif singular != "half_cell":
        raise ValueError(f"unknown singular-cell rule {singular!r}")
    return out


def power_weight(grid: Grid, b: float, center=None, singular: str = "cell_average") -> Weight:
    """``|x - center|^(-b)``; see :func:`power_profile` for the singular cell."""
    return Weight(grid, power_profile(grid, b, center, singular), f"power({b:g})")


def ap_constant(w: Weight, p: float, F: CubeFamily) -> float:
    """Discrete Muckenhoupt constant ``[omega]_p`` over the cube family."""
    if p < 1:
        raise ValueError("p must be >= 1")
    v = w.values
    if p == 1:
        if np.any(v <= 0):
            raise DegenerateWeightError("A_1 constant undefined: weight vanishes at a lattice point")
        return float(np.max(hl_maximal(v, F) / v))
    if np.any(v <= 0):
        return float("inf")
    best = 0.0
    dual = v ** (1.0 / (1.0 - p))
    for k in F.levels:
        prod = cube_averages(v, F, k) * cube_averages(dual, F, k) ** (p - 1.0)
        best = max(best, float(prod.max()))
    return best


def weighted_norm(u, w: Weight, p: float) -> float:
    """``(sum_x |u|^p omega h^d)^(1/p)``."""
    if not p > 0:
        raise ValueError("p must be positive")
    a = np.abs(_as_array(u))
    return float(np.sum(a**p * w.values) * w.grid.cell_volume) ** (1.0 / p)


@dataclass(frozen=True)
class WeakNormCurve:
    lambdas: np.ndarray
    products: np.ndarray

    @property
    def sup(self) -> float:
        return float(self.products.max()) if self.products.size else 0.0


LAMBDA_SHRINK = 1e-12


def weighted_weak_norm(u, w: Weight, p: float) -> WeakNormCurve:
    """Curve ``lambda^p omega(|u| > lambda)`` at ``lambda`` just below each distinct ``|u|``."""
    if not p > 0:
        raise ValueError("p must be positive")
    a = np.abs(_as_array(u)).reshape(-1)
    mass = w.values.reshape(-1) * w.grid.cell_volume
    order = np.argsort(-a, kind="stable")
    a_sorted = a[order]
    cum = np.cumsum(mass[order])
    # last index of each run of equal values
    last = np.flatnonzero(np.append(a_sorted[1:] != a_sorted[:-1], True))
    vals = a_sorted[last]
    keep = vals > 0
    lam = vals[keep] * (1.0 - LAMBDA_SHRINK)
    return WeakNormCurve(lam, lam**p * cum[last][keep])


def weak_norm(u, w: Weight, p: float = 1.0) -> float:
    """``||u||_{L^{p,inf}_omega}`` (the ``p``-th root of the curve supremum)."""
    return weighted_weak_norm(u, w, p).sup ** (1.0 / p)
