"""Kohn-Nirenberg quantization on the periodic lattice, dual quantization,
kernel matrices and Fourier integral operators.

Quantization is by direct summation over the frequency lattice, one block of
output points at a time, so memory stays ``O(chunk * N**dim)`` while the cost
is ``O(N**(2 dim))``.  The inner oscillatory sums run in the compiled kernel
when it is available (see :mod:`psido_lab._backend`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _backend
from .grid import Field, Grid, Space, TagError, forward_transform, inverse_transform
from .symbols import Symbol, SymbolEvaluationError, SymbolMeta

CHUNK_ENTRIES = 1 << 21
KERNEL_MAX_POINTS = 4096


class KernelSizeError(MemoryError):
    """Kernel matrix would exceed the memory guard."""


@dataclass(frozen=True)
class Phase:
    """Phase function ``phi(x, xi)``, positively homogeneous of degree 1 in ``xi``."""

    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    class_k: int = 1
    rough: bool = False
    name: str = "phase"

    def eval(self, x, xi) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        val = np.asarray(self.fn(x, xi), dtype=float)
        shape = np.broadcast_shapes(x.shape[:-1], xi.shape[:-1])
        val = np.broadcast_to(val, shape)
        # homogeneity forces phi(x, 0) = 0
        zero = np.broadcast_to(np.all(xi == 0.0, axis=-1), shape)
        return np.where(zero, 0.0, val)

    __call__ = eval


def linear_phase() -> Phase:
    """``<x, xi>``: the phase of a pseudo-differential operator."""
    return Phase(lambda x, xi: np.sum(x * xi, axis=-1), 1, False, "linear")


def half_wave_phase(speed: float = 1.0) -> Phase:
    """``<x, xi> + speed |xi|``."""
    return Phase(lambda x, xi: np.sum(x * xi, axis=-1) + speed * np.linalg.norm(xi, axis=-1),
                 1, False, f"half_wave({speed:g})")


def variable_speed_phase(amplitude: float = 0.25) -> Phase:
    """``<x, xi> + c(x) |xi|`` with a smooth bounded speed ``c``."""
    def fn(x, xi):
        c = amplitude * np.exp(-0.5 * np.sum(x * x, axis=-1))
        return np.sum(x * xi, axis=-1) + c * np.linalg.norm(xi, axis=-1)
    return Phase(fn, 1, False, f"variable_speed({amplitude:g})")


def rough_speed_phase(amplitude: float = 0.25) -> Phase:
    """``<x, xi> + c(x) |xi|`` with piecewise-constant ``c`` (an L-infinity phase)."""
    def fn(x, xi):
        c = np.where(np.floor(2.0 * x[..., 0]) % 2 == 0, amplitude, -amplitude)
        return np.sum(x * xi, axis=-1) + c * np.linalg.norm(xi, axis=-1)
    return Phase(fn, 1, True, f"rough_speed({amplitude:g})")


def homogeneity_defect(phi: Phase, x: np.ndarray, xi: np.ndarray,
                       ts=(0.5, 2.0, 7.3)) -> float:
    """``max |phi(x, t xi) - t phi(x, xi)| / (t |xi|)`` over samples and ``ts``."""
    x = np.asarray(x, float)[:, None, :]
    xi = np.asarray(xi, float)[None, :, :]
    norm = np.linalg.norm(xi, axis=-1)
    keep = norm > 0
    worst = 0.0
    for t in ts:
        d = np.abs(phi.eval(x, t * xi) - t * phi.eval(x, xi))
        d = d[np.broadcast_to(keep, d.shape)] / (t * np.broadcast_to(norm, d.shape)[np.broadcast_to(keep, d.shape)])
        worst = max(worst, float(d.max(initial=0.0)))
    return worst


@dataclass(frozen=True)
class KernelMatrix:
    grid: Grid
    entries: np.ndarray

    def apply(self, u: Field) -> Field:
        """``sum_y K(x, y) u(y) h**dim``."""
        flat = self.entries @ u.values.reshape(-1) * self.grid.cell_volume
        return Field(self.grid, flat, Space.SPATIAL)


def _flat(grid: Grid):
    return (grid.points().reshape(-1, grid.dim), grid.frequencies().reshape(-1, grid.dim))


def _chunks(n_rows: int, n_cols: int):
    step = max(1, CHUNK_ENTRIES // max(n_cols, 1))
    for start in range(0, n_rows, step):
        yield slice(start, min(start + step, n_rows))


def _checked(values: np.ndarray, what: str, rows: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        r = np.argwhere(~np.isfinite(values))[0]
        raise SymbolEvaluationError(f"non-finite {what} at point {rows[r[0]]}")
    return values


def _prefactor(grid: Grid) -> float:
    return (grid.dxi / (2 * np.pi)) ** grid.dim


def _require_spatial(u: Field) -> None:
    if u.space is not Space.SPATIAL:
        raise TagError("operator input must be a spatial field")


def apply_pdo(a: Symbol, u: Field, backend: str | None = None) -> Field:
    """``T_a u(x) = (2 pi)**-d dxi**d sum_xi exp(i <x, xi>) a(x, xi) u_hat(xi)``."""
    _require_spatial(u)
    k = _backend.get(backend)
    g = u.grid
    X, XI = _flat(g)
    uhat = forward_transform(u).values.reshape(-1)
    out = np.empty(g.size, dtype=complex)
    for rows in _chunks(g.size, g.size):
        A = _checked(a.eval(X[rows, None, :], XI[None, :, :]), f"symbol {a.name}", X[rows])
        out[rows] = k.bilinear_sum(X[rows], XI, 1.0, A, uhat)
    return Field(g, out * _prefactor(g), Space.SPATIAL)


def _dual_inner(a_vals: Callable[[slice], np.ndarray], g: Grid, u: Field, k) -> np.ndarray:
    X, XI = _flat(g)
    uf = u.values.reshape(-1)
    inner = np.empty(g.size, dtype=complex)
    for rows in _chunks(g.size, g.size):
        inner[rows] = a_vals(rows, X, XI, uf, k)
    return inner * g.cell_volume


def apply_dual_pdo(a: Symbol, u: Field, backend: str | None = None) -> Field:
    """``T*_a u(x) = (2 pi)**-d dxi**d sum_xi e^{i<x,xi>} h**d sum_y e^{-i<y,xi>} a(y, xi) u(y)``."""
    _require_spatial(u)
    k = _backend.get(backend)

    def block(rows, X, XI, uf, k):
        A = _checked(a.eval(X[None, :, :], XI[rows, None, :]), f"symbol {a.name}", XI[rows])
        return k.bilinear_sum(XI[rows], X, -1.0, A, uf)

    inner = _dual_inner(block, u.grid, u, k)
    return inverse_transform(Field(u.grid, inner, Space.FREQUENCY))


def apply_fio(a: Symbol, phi: Phase, u: Field, backend: str | None = None) -> Field:
    """``T_{a,phi} u(x) = (2 pi)**-d dxi**d sum_xi exp(i phi(x, xi)) a(x, xi) u_hat(xi)``."""
    _require_spatial(u)
    k = _backend.get(backend)
    g = u.grid
    X, XI = _flat(g)
    uhat = forward_transform(u).values.reshape(-1)
    out = np.empty(g.size, dtype=complex)
    for rows in _chunks(g.size, g.size):
        xs, xis = X[rows, None, :], XI[None, :, :]
        A = _checked(a.eval(xs, xis), f"symbol {a.name}", X[rows])
        ph = _checked(phi.eval(xs, xis), f"phase {phi.name}", X[rows])
        out[rows] = k.phase_sum(ph, A, uhat)
    return Field(g, out * _prefactor(g), Space.SPATIAL)


def apply_dual_fio(a: Symbol, phi: Phase, u: Field, backend: str | None = None) -> Field:
    """Dual FIO: ``(2 pi)**-d dxi**d sum_xi e^{i<x,xi>} h**d sum_y e^{-i phi(y,xi)} a(y,xi) u(y)``.

    With ``phi = <y, xi>`` this is exactly :func:`apply_dual_pdo`.
    """
    _require_spatial(u)
    k = _backend.get(backend)

    def block(rows, X, XI, uf, k):
        ys, xis = X[None, :, :], XI[rows, None, :]
        A = _checked(a.eval(ys, xis), f"symbol {a.name}", XI[rows])
        ph = _checked(phi.eval(ys, xis), f"phase {phi.name}", XI[rows])
        return k.phase_sum(-ph, A, uf)

    inner = _dual_inner(block, u.grid, u, k)
    return inverse_transform(Field(u.grid, inner, Space.FREQUENCY))


def reduce_to_pdo(a: Symbol, phi: Phase, dual: bool = False) -> Symbol:
    """Fold the phase into the symbol: ``b = a exp(i (phi - <x, xi>))``.

    ``apply_pdo(b, u)`` reproduces ``apply_fio(a, phi, u)``.  With ``dual=True``
    the conjugate factor is used, so ``apply_dual_pdo(b, u)`` reproduces
    ``apply_dual_fio(a, phi, u)``.
    """
    s = -1.0 if dual else 1.0

    def fn(x, xi):
        lin = np.sum(x * xi, axis=-1)
        return a.eval(x, xi) * np.exp(s * 1j * (phi.eval(x, xi) - lin))

    if phi.name == "linear":
        return Symbol(fn, a.meta, a.name, a.x_independent, a.params)
    # a in S^m_{1,delta} with phi - <x,xi> in Phi^1 gives b in S^m_{0,delta}
    meta = a.meta
    if meta.rho == 1.0 and phi.class_k <= 1:
        meta = SymbolMeta(meta.m, 0.0, meta.delta, meta.rough or phi.rough, meta.low_freq_cutoff)
    return Symbol(fn, meta, f"{a.name}*exp(i({phi.name}-<x,xi>))")


def kernel_matrix(a: Symbol, grid: Grid, dual: bool = False) -> KernelMatrix:
    """``K(x, y) = (2 pi)**-d dxi**d sum_xi e^{i<x-y,xi>} a(x, xi)`` (``a(y, xi)`` if dual)."""
    if grid.size > KERNEL_MAX_POINTS:
        raise KernelSizeError(f"{grid.size} points per row exceeds guard {KERNEL_MAX_POINTS}")
    X, XI = _flat(grid)
    ex = np.exp(1j * X @ XI.T)
    A = _checked(a.eval(X[:, None, :], XI[None, :, :]), f"symbol {a.name}", X)
    if dual:
        K = ex @ (A.T * ex.T.conj())
    else:
        K = (ex * A) @ ex.conj().T
    return KernelMatrix(grid, K * _prefactor(grid))
