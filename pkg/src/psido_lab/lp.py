"""Littlewood-Paley partition of unity on the frequency lattice and dyadic blocks.

Masks are built from a cosine step ``step(t)`` in the log-radial coordinate
``t = log2 |xi|``: ``step`` is 1 for ``t <= -w`` and 0 for ``t >= w`` with
``w = min(log2 C, 1/2)``.  Then

    psi_{-1}(xi)   = step(t - 1)
    psi(2^-j xi)   = step(t - j - 1) - step(t - j)

telescopes to ``step(t - J_max - 1)``, which is 1 on every lattice frequency
because ``C^-1 2^J_max`` exceeds the Nyquist frequency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid
from .quantize import KernelMatrix, kernel_matrix
from .symbols import Symbol


class PartitionError(ValueError):
    pass


def _step(t: np.ndarray, w: float) -> np.ndarray:
    s = np.clip((t + w) / (2.0 * w), 0.0, 1.0)
    # exact zeros off the ramp (cos(pi/2)**2 is 4e-33, not 0)
    return np.where(s >= 1.0, 0.0, np.cos(0.5 * np.pi * s) ** 2)


def _log_radius(xi: np.ndarray) -> np.ndarray:
    r = np.linalg.norm(np.asarray(xi, dtype=float), axis=-1)
    with np.errstate(divide="ignore"):
        return np.where(r > 0, np.log2(np.where(r > 0, r, 1.0)), -np.inf)


@dataclass(frozen=True)
class LPPartition:
    grid: Grid
    C: float
    J_max: int

    @property
    def width(self) -> float:
        return min(np.log2(self.C), 0.5)

    def profile(self, j: int, xi) -> np.ndarray:
        """Mask of block ``j`` at arbitrary frequencies (``j = 0`` is ``psi_{-1}``)."""
        t = _log_radius(xi)
        w = self.width
        if j == 0:
            return _step(t - 1.0, w)
        return _step(t - j - 1.0, w) - _step(t - j, w)

    def mask(self, j: int) -> np.ndarray:
        if not 0 <= j <= self.J_max:
            raise IndexError(f"block {j} outside 0..{self.J_max}")
        return self.profile(j, self.grid.frequencies())

    def masks(self) -> list[np.ndarray]:
        return [self.mask(j) for j in range(self.J_max + 1)]

    def support(self, j: int) -> tuple[float, float]:
        """Radial interval containing the support of block ``j``."""
        w = self.width
        if j == 0:
            return 0.0, 2.0 ** (1 + w)
        return 2.0 ** (j - w), 2.0 ** (j + 1 + w)


def build_partition(grid: Grid, C: float = 2.0, J_max: int | None = None) -> LPPartition:
    if not C > 1:
        raise PartitionError(f"C must exceed 1, got {C}")
    smallest = 1
    while 2.0**smallest / C <= grid.nyquist:
        smallest += 1
    if J_max is None:
        J_max = smallest
    elif J_max < smallest:
        raise PartitionError(f"J_max={J_max} leaves lattice frequencies uncovered (need {smallest})")
    return LPPartition(grid, float(C), int(J_max))


@dataclass(frozen=True)
class BlockSymbol:
    j: int
    base: Symbol
    partition: LPPartition

    @property
    def symbol(self) -> Symbol:
        P, j, base = self.partition, self.j, self.base
        return Symbol(lambda x, xi: base.eval(x, xi) * P.profile(j, xi), base.meta,
                      f"{base.name}[j={j}]", base.x_independent, base.params)

    def eval(self, x, xi) -> np.ndarray:
        return self.symbol.eval(x, xi)


def decompose(a: Symbol, P: LPPartition) -> list[BlockSymbol]:
    """Blocks ``a_0 .. a_Jmax`` with ``sum_j a_j = a`` on the lattice."""
    return [BlockSymbol(j, a, P) for j in range(P.J_max + 1)]


def block_kernel(block: BlockSymbol, dual: bool = False) -> KernelMatrix:
    """Kernel ``K_j`` (or ``K*_j``) of one dyadic block."""
    return kernel_matrix(block.symbol, block.partition.grid, dual=dual)
