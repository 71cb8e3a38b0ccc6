"""The order ``m = -n`` sharpness counterexample.

The symbol ``e^{i xi_1} <xi>^m`` is a translated Bessel multiplier, so
``T_a u`` is ``G_{-m} * u`` moved by one unit along the first axis.  With the
forward transform ``u_hat(xi) = sum e^{-i<x,xi>} u(x) h^d`` the factor
``e^{i xi_1}`` evaluates the convolution at ``x + e_1``, so the singularity of
``u`` at the origin reappears at ``-e_1``.  The weight is centred there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .estimates import ScalingReport, fit_log2_slope, weak_type_ratio
from .grid import Field, Grid, Space, forward_transform, inverse_transform
from .maximal import Weight, power_profile, power_weight
from .quantize import apply_pdo
from .symbols import catalog, japanese


class ConfigError(ValueError):
    pass


class ResolutionError(ValueError):
    pass


@dataclass(frozen=True)
class SharpnessConfig:
    n: int = 1
    m: float = -0.2
    a_exp: float = 0.9
    b_exp: float = 0.9
    eta: float = 0.25
    eps_ladder: tuple[float, ...] = (0.2, 0.14, 0.1, 0.07, 0.05)
    allow_boundary: bool = False
    singular: str = "cell_average"

    def __post_init__(self):
        n, m, a, b = self.n, self.m, self.a_exp, self.b_exp
        if not 0 < -m < a < n:
            raise ConfigError(f"need 0 < -m < a < n, got m={m}, a={a}, n={n}")
        if not 0 < b < n:
            raise ConfigError(f"need 0 < b < n, got b={b}")
        excess = a + b + m - n
        if excess < -1e-12 or (abs(excess) <= 1e-12 and not self.allow_boundary):
            raise ConfigError(f"need a + b + m > n, got {a + b + m}")
        if not self.eta > 0:
            raise ConfigError("eta must be positive")
        if self.eta + max(self.eps_ladder) >= 1.0:
            raise ConfigError("eta too large: the source ball meets the ball around the singular point")
        if any(e <= 0 for e in self.eps_ladder):
            raise ConfigError("ladder entries must be positive")

    @property
    def x0(self) -> np.ndarray:
        """The unit vector ``(1, 0, ..., 0)`` of the symbol's translation."""
        e = np.zeros(self.n)
        e[0] = 1.0
        return e

    @property
    def singular_point(self) -> np.ndarray:
        """Where ``T_a u`` blows up under this package's Fourier convention."""
        return -self.x0

    @property
    def predicted_exponent(self) -> float:
        return self.n - self.a_exp - self.m - self.b_exp


@dataclass(frozen=True)
class BesselKernel:
    order: float
    grid: Grid
    samples: np.ndarray

    def field(self) -> Field:
        return Field.spatial(self.grid, self.samples)


def bessel_kernel(m: float, grid: Grid) -> BesselKernel:
    """Lattice inverse transform of ``(1 + |xi|^2)^(m/2)`` (the potential of order ``-m``)."""
    if not -grid.dim < m < 0:
        raise ConfigError(f"need -dim < m < 0, got {m}")
    mult = japanese(grid.frequencies()) ** m
    G = inverse_transform(Field(grid, mult, Space.FREQUENCY)).values.real
    return BesselKernel(-m, grid, G)


def near_origin_slope(K: BesselKernel, r_min_cells: float = 1.0, decades: float = 1.0) -> ScalingReport:
    """Log-log slope of ``G`` against ``|x|`` on ``[r_min, r_min 10^decades]`` near the origin."""
    g = K.grid
    r = g.periodic_distance(np.zeros(g.dim)).reshape(-1)
    G = K.samples.reshape(-1)
    lo = r_min_cells * g.h
    sel = (r >= lo * (1 - 1e-9)) & (r <= lo * 10**decades * (1 + 1e-9))
    order = np.argsort(r[sel])
    rep = fit_log2_slope(r[sel][order], G[sel][order], log_abscissa=True,
                         predicted=-(g.dim - K.order))
    return rep


def counterexample_fields(cfg: SharpnessConfig, grid: Grid) -> tuple[Field, Weight]:
    """``u = |x|^-a 1_{|x|<eta}`` and ``omega = |x - x*|^-b`` on the lattice."""
    if grid.dim != cfg.n:
        raise ConfigError("grid dimension differs from cfg.n")
    if grid.L / 2 < 1.0 + max(cfg.eps_ladder) or grid.L / 2 <= cfg.eta:
        raise ConfigError("box too small for the source ball and the singular point")
    r = grid.periodic_distance(np.zeros(grid.dim))
    u = np.where(r < cfg.eta, power_profile(grid, cfg.a_exp, None, cfg.singular), 0.0)
    w = power_weight(grid, cfg.b_exp, cfg.singular_point, cfg.singular)
    return Field.spatial(grid, u), w


def translated_convolution(G: BesselKernel, u: Field, shift) -> Field:
    """``(G * u)(x + shift)`` for a lattice vector ``shift``, via the discrete transforms."""
    g = u.grid
    steps = np.rint(np.asarray(shift, float) / g.h).astype(int)
    if not np.allclose(steps * g.h, shift, atol=1e-12 * g.L):
        raise ConfigError("shift must be a lattice vector")
    Gs = np.roll(G.samples, tuple(-steps), axis=tuple(range(g.dim)))
    prod = forward_transform(Field.spatial(g, Gs)).values * forward_transform(u).values
    return inverse_transform(Field(g, prod, Space.FREQUENCY))


def convolution_identity_check(cfg: SharpnessConfig, grid: Grid, u: Field | None = None) -> float:
    """Max relative gap between ``apply_pdo(counterexample)`` and the shifted convolution."""
    if u is None:
        u, _ = counterexample_fields(cfg, grid)
    Tu = apply_pdo(catalog("counterexample", m=cfg.m), u).values
    conv = translated_convolution(bessel_kernel(cfg.m, grid), u, cfg.x0).values
    scale = np.max(np.abs(conv))
    if scale == 0:
        return float(np.max(np.abs(Tu)))
    return float(np.max(np.abs(Tu - conv)) / scale)


def blowup_experiment(cfg: SharpnessConfig, grid: Grid, Tu: Field | None = None) -> ScalingReport:
    """``lambda_eps * omega(|T u| > lambda_eps)`` along the ladder, with its log-log slope."""
    if min(cfg.eps_ladder) <= 2 * grid.h:
        raise ResolutionError(f"ladder reaches below the resolution floor 2h = {2 * grid.h:g}")
    u, w = counterexample_fields(cfg, grid)
    if Tu is None:
        Tu = apply_pdo(catalog("counterexample", m=cfg.m), u)
    mag = np.abs(Tu.values)
    dist = grid.periodic_distance(cfg.singular_point)
    lams, meas = [], []
    for eps in cfg.eps_ladder:
        ring = (dist > grid.h / 2) & (dist < eps)
        lam = float(mag[ring].min())
        lams.append(lam)
        meas.append(lam * w.measure(mag > lam))
    rep = fit_log2_slope(list(cfg.eps_ladder), meas, log_abscissa=True,
                         predicted=cfg.predicted_exponent)
    rep.notes.update(lambdas=lams, singular_point=list(cfg.singular_point))
    return rep


def near_singularity_constant(cfg: SharpnessConfig, grid: Grid, Tu: Field | None = None) -> float:
    """``min |T u(x)| |x - x*|^(a+m)`` over ``2h <= |x - x*| <= eta``."""
    u, _ = counterexample_fields(cfg, grid)
    if Tu is None:
        Tu = apply_pdo(catalog("counterexample", m=cfg.m), u)
    dist = grid.periodic_distance(cfg.singular_point)
    ring = (dist >= 2 * grid.h * (1 - 1e-9)) & (dist <= cfg.eta)
    return float(np.min(np.abs(Tu.values[ring]) * dist[ring] ** (cfg.a_exp + cfg.m)))


def sharpness_contrast(cfg: SharpnessConfig, grids: list[Grid]) -> dict[str, list[float]]:
    """Weighted weak-type ratios on a refinement ladder for order ``-n`` and order ``cfg.m``."""
    out = {"critical": [], "supercritical": []}
    for g in grids:
        u, w = counterexample_fields(cfg, g)
        out["critical"].append(weak_type_ratio("pdo", catalog("counterexample", m=-float(cfg.n)), u, w))
        out["supercritical"].append(weak_type_ratio("pdo", catalog("counterexample", m=cfg.m), u, w))
    return out
