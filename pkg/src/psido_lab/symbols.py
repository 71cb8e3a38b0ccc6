"""Symbols ``a(x, xi)`` with Hörmander class metadata, seminorm estimation, catalog.

A symbol is a vectorized callable ``fn(x, xi)`` where ``x`` and ``xi`` are
arrays whose last axis has length ``dim`` and whose leading axes broadcast.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class SymbolEvaluationError(ValueError):
    """A symbol (or one of its finite-difference derivatives) is not finite."""


class CatalogError(KeyError):
    """Unknown catalog name or bad parameters."""


@dataclass(frozen=True)
class SymbolMeta:
    m: float
    rho: float
    delta: float
    rough: bool = False
    low_freq_cutoff: bool = False

    def __post_init__(self):
        if not (0.0 <= self.rho <= 1.0 and 0.0 <= self.delta <= 1.0):
            raise ValueError(f"rho, delta must lie in [0, 1], got {self.rho}, {self.delta}")


@dataclass(frozen=True)
class Symbol:
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    meta: SymbolMeta
    name: str
    x_independent: bool = False
    params: dict = field(default_factory=dict, compare=False)

    def eval(self, x, xi) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        shape = np.broadcast_shapes(x.shape[:-1], xi.shape[:-1])
        return np.broadcast_to(np.asarray(self.fn(x, xi), dtype=complex), shape)

    __call__ = eval

    def with_meta(self, **changes) -> "Symbol":
        """Same function, different declared class (used for misdeclaration checks)."""
        meta = SymbolMeta(**{**self.meta.__dict__, **changes})
        return Symbol(self.fn, meta, self.name, self.x_independent, self.params)


def japanese(xi: np.ndarray) -> np.ndarray:
    """``<xi> = (1 + |xi|^2)^(1/2)``."""
    return np.sqrt(1.0 + np.sum(np.square(xi), axis=-1))


def smooth_cutoff(r: np.ndarray) -> np.ndarray:
    """0 for ``r <= 1``, 1 for ``r >= 2``, cosine ramp in between."""
    s = np.clip(np.asarray(r, dtype=float) - 1.0, 0.0, 1.0)
    return np.sin(0.5 * np.pi * s) ** 2


def conjugate(a: Symbol) -> Symbol:
    return Symbol(lambda x, xi: np.conj(a.fn(x, xi)), a.meta, f"conj({a.name})",
                  a.x_independent, a.params)


def multiplier(sigma: Callable[[np.ndarray], np.ndarray], meta: SymbolMeta,
               name: str = "multiplier") -> Symbol:
    """x-independent symbol ``a(x, xi) = sigma(xi)``."""
    return Symbol(lambda x, xi: sigma(xi), meta, name, x_independent=True)


# --------------------------------------------------------------------------
# catalog


def _bump_phase(x: np.ndarray) -> np.ndarray:
    # smooth, bounded, all derivatives bounded
    return np.exp(-0.5 * np.sum(np.square(x), axis=-1))


def _rough_sign(x: np.ndarray) -> np.ndarray:
    # piecewise constant with unit period in x_1: merely bounded measurable in x
    return np.where(np.floor(2.0 * x[..., 0]) % 2 == 0, 0.5, -0.5)


class _GaussianNoise:
    """Smooth random function of one variable: Gaussian-weighted values on knots.

    All derivatives are bounded independently of the argument, so
    ``exp(i noise(xi))`` is a zero-order symbol of type (0, 0).
    """

    table_size = 1 << 16

    def __init__(self, seed: int, spacing: float = 2.0, amplitude: float = 1.0,
                 width: float = 0.7):
        self.values = np.random.default_rng(seed).uniform(-1.0, 1.0, self.table_size)
        self.spacing = spacing
        self.amplitude = amplitude
        self.width = width

    def __call__(self, t: np.ndarray) -> np.ndarray:
        s = np.asarray(t, dtype=float) / self.spacing
        k0 = np.floor(s).astype(np.int64)
        out = np.zeros(s.shape)
        reach = int(math.ceil(6 * self.width))
        for d in range(-reach, reach + 2):
            k = k0 + d
            out += self.values[k % self.table_size] * np.exp(-0.5 * ((s - k) / self.width) ** 2)
        return self.amplitude * out


def catalog(name: str, m: float | None = None, delta: float | None = None,
            seed: int = 7) -> Symbol:
    """Named test symbols.

    ``identity``, ``bessel_multiplier(m)``, ``counterexample(m)``,
    ``oscillating_exotic(m, delta)``, ``rough_sample(m)`` and
    ``random_phase(m, seed)``.
    """
    def need_m():
        if m is None:
            raise CatalogError(f"catalog symbol {name!r} requires m")
        return float(m)

    if name == "identity":
        return Symbol(lambda x, xi: np.ones(np.broadcast_shapes(x.shape[:-1], xi.shape[:-1])),
                      SymbolMeta(0.0, 1.0, 0.0), "identity", x_independent=True)
    if name == "bessel_multiplier":
        mm = need_m()
        return Symbol(lambda x, xi: japanese(xi) ** mm, SymbolMeta(mm, 1.0, 0.0),
                      f"bessel_multiplier({mm:g})", x_independent=True, params={"m": mm})
    if name == "counterexample":
        mm = need_m()
        return Symbol(lambda x, xi: np.exp(1j * xi[..., 0]) * japanese(xi) ** mm,
                      SymbolMeta(mm, 0.0, 0.0), f"counterexample({mm:g})",
                      x_independent=True, params={"m": mm})
    if name == "oscillating_exotic":
        mm = need_m()
        if delta is None or not 0.0 <= delta <= 1.0:
            raise CatalogError("oscillating_exotic requires delta in [0, 1]")
        dd = float(delta)

        def fn(x, xi):
            jx = japanese(xi)
            r = np.sqrt(np.sum(np.square(xi), axis=-1))
            return jx ** mm * np.exp(1j * jx ** dd * _bump_phase(x)) * smooth_cutoff(r)

        return Symbol(fn, SymbolMeta(mm, 0.0, dd, low_freq_cutoff=True),
                      f"oscillating_exotic({mm:g},{dd:g})", params={"m": mm, "delta": dd})
    if name == "rough_sample":
        mm = need_m()
        return Symbol(lambda x, xi: japanese(xi) ** mm * np.exp(1j * _rough_sign(x) * xi[..., 0]),
                      SymbolMeta(mm, 0.0, 0.0, rough=True), f"rough_sample({mm:g})",
                      params={"m": mm})
    if name == "random_phase":
        mm = need_m()
        noises = [_GaussianNoise(seed + 1000 * k) for k in range(2)]

        def fn(x, xi):
            g = sum(noises[k](xi[..., k]) for k in range(xi.shape[-1]))
            return japanese(xi) ** mm * np.exp(1j * g)

        return Symbol(fn, SymbolMeta(mm, 0.0, 0.0), f"random_phase({mm:g})",
                      x_independent=True, params={"m": mm, "seed": seed})
    raise CatalogError(f"unknown catalog symbol {name!r}")


CATALOG_NAMES = ("identity", "bessel_multiplier", "counterexample",
                 "oscillating_exotic", "rough_sample", "random_phase")


# --------------------------------------------------------------------------
# seminorms


@dataclass
class SeminormTable:
    entries: dict[tuple[tuple[int, ...], tuple[int, ...]], float]
    max_order: int

    def __getitem__(self, key):
        alpha, beta = key
        return self.entries[(tuple(alpha), tuple(beta))]

    def is_finite(self) -> bool:
        return all(np.isfinite(v) for v in self.entries.values())


def default_samples(dim: int, radius: float, n_radii: int = 24, n_x: int = 5,
                    n_dirs: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """x-points in ``[-1, 1]^dim`` and xi-points on log-spaced shells up to ``radius``."""
    xs = np.linspace(-1.0, 1.0, n_x)
    xpts = xs[:, None] if dim == 1 else np.array(list(itertools.product(xs, xs)))
    radii = np.concatenate([[0.0], np.geomspace(0.25, radius, n_radii)])
    if dim == 1:
        dirs = np.array([[1.0], [-1.0]])
    else:
        ang = np.pi * (np.arange(n_dirs) + 0.37) / n_dirs * 2
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    xipts = (radii[:, None, None] * dirs[None]).reshape(-1, dim)
    return xpts, np.unique(xipts, axis=0)


def _multi_indices(dim: int, order: int):
    for combo in itertools.product(range(order + 1), repeat=2 * dim):
        if sum(combo) <= order:
            yield tuple(combo[:dim]), tuple(combo[dim:])


def _central_stencil(k: int):
    """Offsets (in steps) and weights of the order-k central difference."""
    offsets = np.array([k / 2 - i for i in range(k + 1)])
    weights = np.array([(-1) ** i * math.comb(k, i) for i in range(k + 1)], dtype=float)
    return offsets, weights


def estimate_seminorms(a: Symbol, max_order: int, x_samples: np.ndarray,
                       xi_samples: np.ndarray) -> SeminormTable:
    """Sup over samples of ``|d_x^beta d_xi^alpha a| <xi>^(-m + rho|alpha| - delta|beta|)``."""
    if max_order > 4:
        raise ValueError("finite-difference depth is limited to order 4")
    x_samples = np.atleast_2d(np.asarray(x_samples, dtype=float))
    xi_samples = np.atleast_2d(np.asarray(xi_samples, dtype=float))
    dim = xi_samples.shape[1]
    meta = a.meta
    X = x_samples[:, None, :]
    XI = xi_samples[None, :, :]
    jx = japanese(XI)
    h_xi = np.maximum(1e-3, 1e-3 * jx)[..., None]
    h_x = 1e-3
    entries = {}
    for alpha, beta in _multi_indices(dim, max_order):
        if meta.rough and any(beta):
            continue
        if a.x_independent and any(beta):
            # exact zero; differencing would only return roundoff / h_x**|beta|
            entries[(alpha, beta)] = 0.0
            continue
        stencils = [_central_stencil(k) for k in beta + alpha]
        acc = np.zeros(np.broadcast_shapes(X.shape[:-1], XI.shape[:-1]), dtype=complex)
        for choice in itertools.product(*[range(len(s[0])) for s in stencils]):
            w = 1.0
            dx = np.zeros(dim)
            dxi_steps = np.zeros(dim)
            for c, (offs, wts) in zip(range(2 * dim), stencils):
                w *= wts[choice[c]]
                if c < dim:
                    dx[c] = offs[choice[c]] * h_x
                else:
                    dxi_steps[c - dim] = offs[choice[c]]
            acc = acc + w * a.eval(X + dx, XI + dxi_steps * h_xi)
        deriv = acc / (h_x ** sum(beta)) / (h_xi[..., 0] ** sum(alpha))
        if not np.all(np.isfinite(deriv)):
            bad = np.argwhere(~np.isfinite(deriv))[0]
            raise SymbolEvaluationError(
                f"{a.name}: non-finite derivative {alpha},{beta} at "
                f"x={x_samples[bad[0]]}, xi={xi_samples[bad[1]]}")
        delta = 0.0 if meta.rough else meta.delta
        weight = jx ** (-meta.m + meta.rho * sum(alpha) - delta * sum(beta))
        entries[(alpha, beta)] = float(np.max(np.abs(deriv) * weight))
    return SeminormTable(entries, max_order)
