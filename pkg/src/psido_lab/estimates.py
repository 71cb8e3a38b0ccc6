"""Experiment drivers: exponent schedule, sharp-function domination, dyadic-block
scaling laws and the weighted ratio experiments.

Constants hidden behind ``<~`` are never asserted; only exponents (fitted
log-log slopes) and boundedness/stability of ratios are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .grid import Cube, Field, Grid
from .lp import LPPartition, build_partition, decompose, block_kernel
from .maximal import (CubeFamily, DegenerateInputError, Weight, constant_weight, hl_maximal,
                      sharp_maximal, weighted_norm, weighted_weak_norm)
from .quantize import KernelMatrix, Phase, apply_dual_fio, apply_dual_pdo, apply_fio, apply_pdo
from .symbols import Symbol


class ScheduleError(ValueError):
    pass


class HypothesisError(ValueError):
    """Experiment called outside the hypotheses of the statement it measures."""


# --------------------------------------------------------------------------
# exponent schedule


@dataclass(frozen=True)
class ExponentSchedule:
    n: int
    delta: float
    N_delta: int
    theta0: float
    theta0_window: tuple[float, float]
    T_delta: float
    gamma: int
    theta1: float
    epsilon: float
    N_parts: int

    @property
    def l4_threshold_exponent(self) -> float:
        """``(n - n^2/N_delta) / T_delta``: Lemma-4 blocks need ``2^j >= l^-this``."""
        return (self.n - self.n**2 / self.N_delta) / self.T_delta

    def check(self) -> None:
        n, d, N = self.n, self.delta, self.N_delta
        lo, hi = self.theta0_window
        conds = {
            "N_delta > 2n/(1-delta) + n": N > 2 * n / (1 - d) + n,
            "theta0 window": lo < self.theta0 < hi,
            "T_delta > 0": self.T_delta > 0,
            "gamma minimal": (1 / d) ** self.gamma >= self.l4_threshold_exponent * (1 - 1e-12)
            and (self.gamma == 1 or (1 / d) ** (self.gamma - 1) < self.l4_threshold_exponent),
            "theta1 range": 0 < self.theta1 < n * (1 - d) / 2,
            "epsilon range": 0 < self.epsilon < (1 - d) / 2 - self.theta1 / n,
        }
        bad = [k for k, ok in conds.items() if not ok]
        if bad:
            raise ScheduleError(f"schedule invariants violated: {bad}")


def schedule(n: int, delta: float) -> ExponentSchedule:
    """Proof constants for ``S^{-n}_{0,delta}``, computed in exact rational arithmetic."""
    if n < 1:
        raise ScheduleError("n must be a positive integer")
    if not 0 < delta < 1:
        raise ScheduleError(f"schedule needs 0 < delta < 1, got {delta}")
    d = Fraction(repr(float(delta)))
    nn = Fraction(n)
    N = math.floor(2 * nn / (1 - d) + nn) + 1
    half = nn * (1 - d) / 2
    lo = max(Fraction(0), half - nn * N / (N - nn))
    hi = half - nn**2 / (N - nn)
    if not lo < hi:
        raise ScheduleError("empty theta0 window")
    theta0 = (lo + hi) / 2
    T = -nn**2 / N + (1 - nn / N) * (half - theta0)
    target = (nn - nn**2 / N) / T
    gamma = 1
    while (1 / d) ** gamma < target:
        gamma += 1
    theta1 = half / 2
    eps = ((1 - d) / 2 - theta1 / nn) / 2
    out = ExponentSchedule(n, float(delta), N, float(theta0), (float(lo), float(hi)), float(T),
                           gamma, float(theta1), float(eps), n + 1)
    out.check()
    return out


# --------------------------------------------------------------------------
# fits


@dataclass
class ScalingReport:
    abscissae: list[float]
    measurements: list[float]
    fitted_slope: float
    intercept: float
    fit_window: tuple[int, int]
    r_squared: float
    predicted_slope: float | None = None
    notes: dict = field(default_factory=dict)

    def slope_error(self) -> float:
        return abs(self.fitted_slope - self.predicted_slope)

    def fitted(self) -> list[float]:
        ts = np.asarray(self.abscissae, dtype=float)
        if self.notes.get("log_abscissa"):
            ts = np.log2(ts)
        return [float(2.0 ** (self.intercept + self.fitted_slope * t)) for t in ts]


def fit_log2_slope(abscissae: Sequence[float], measurements: Sequence[float],
                   window: tuple[int, int] | None = None, log_abscissa: bool = False,
                   predicted: float | None = None) -> ScalingReport:
    """Least-squares slope of ``log2(measurement)`` against ``t`` (or ``log2 t``)."""
    t = np.asarray(abscissae, dtype=float)
    y = np.asarray(measurements, dtype=float)
    if window is None:
        window = (0, len(t))
    ts = np.log2(t) if log_abscissa else t
    sl = slice(*window)
    if np.any(y[sl] <= 0):
        raise ValueError("measurements must be positive for a log fit")
    ly = np.log2(y[sl])
    slope, intercept = np.polyfit(ts[sl], ly, 1)
    resid = ly - (intercept + slope * ts[sl])
    sst = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / sst if sst > 0 else 1.0
    rep = ScalingReport(list(map(float, t)), list(map(float, y)), float(slope), float(intercept),
                        window, max(0.0, min(1.0, r2)), predicted)
    rep.notes["log_abscissa"] = log_abscissa
    return rep


# --------------------------------------------------------------------------
# domination (sharp maximal vs Hardy-Littlewood)


@dataclass
class DominationReport:
    symbol: str
    input: str
    ratio_field: np.ndarray
    sup_ratio: float


def _apply(kind: str, a: Symbol, u: Field, phi: Phase | None = None) -> Field:
    if kind == "pdo":
        return apply_pdo(a, u)
    if kind == "dual":
        return apply_dual_pdo(a, u)
    if kind == "fio":
        if phi is None:
            raise ValueError("fio kind needs a phase")
        return apply_fio(a, phi, u)
    if kind == "dual_fio":
        if phi is None:
            raise ValueError("dual_fio kind needs a phase")
        return apply_dual_fio(a, phi, u)
    raise ValueError(f"unknown operator kind {kind!r}")


def check_domination_hypothesis(kind: str, a: Symbol) -> None:
    meta = a.meta
    if kind == "pdo":
        if meta.rough:
            raise HypothesisError("T_a needs an x-smooth symbol; rough symbols go through the dual")
        if not meta.delta < 1:
            raise HypothesisError("T_a domination needs delta < 1")
    elif kind != "dual":
        raise HypothesisError(f"no domination statement for kind {kind!r}")


def domination_report(kind: str, a: Symbol, u: Field, F: CubeFamily | None = None,
                      input_name: str = "u") -> DominationReport:
    """Pointwise ratio ``M#(T u) / Mu`` and its supremum."""
    if a.meta.m > -u.grid.dim + 1e-12:
        raise HypothesisError(f"domination needs order -dim, got m={a.meta.m}")
    check_domination_hypothesis(kind, a)
    F = F or CubeFamily(u.grid)
    Mu = hl_maximal(u, F)
    if not np.any(Mu > 0):
        return DominationReport(a.name, input_name, np.zeros(u.grid.shape), 0.0)
    sharp = sharp_maximal(_apply(kind, a, u), F)
    ratio = np.where(Mu > 0, sharp / np.where(Mu > 0, Mu, 1.0), np.where(sharp > 0, np.inf, 0.0))
    return DominationReport(a.name, input_name, ratio, float(ratio.max()))


# --------------------------------------------------------------------------
# input families


def _band_limited(grid: Grid, rng: np.random.Generator, kmax: int = 6) -> np.ndarray:
    """Random zero-mean trigonometric polynomial in frequencies ``2 pi k / L``, ``0 < |k|_inf <= kmax``.

    The constant mode is left out: it raises ``Mu`` without reaching ``M#``,
    which would only make the ratio family look more spread than the operator is.
    """
    pts = grid.points()
    out = np.zeros(grid.shape, dtype=complex)
    ks = range(-kmax, kmax + 1)
    for kv in np.ndindex(*(len(ks),) * grid.dim):
        k = np.array([ks[i] for i in kv])
        c = rng.normal() + 1j * rng.normal()
        if not k.any():
            continue
        c /= 1.0 + float(np.sum(k * k))
        out += c * np.exp(2j * np.pi * np.sum(pts * k, axis=-1) / grid.L)
    return out.real


def spike(grid: Grid, point) -> Field:
    """Unit-mass spike at the lattice point nearest ``point``."""
    v = np.zeros(grid.shape)
    v[grid.index_of(point)] = 1.0 / grid.cell_volume
    return Field.spatial(grid, v)


def bump(grid: Grid, center, width: float) -> Field:
    d = grid.periodic_distance(center)
    return Field.spatial(grid, np.exp(-0.5 * (d / width) ** 2))


def input_family(grid: Grid, count: int, seed: int = 0, kinds=("spike", "smooth", "profile")) -> list[tuple[str, Field]]:
    """Seeded family cycling spikes, band-limited smooth fields and singular profiles.

    Positions are drawn from a 16-point coarse lattice so that the same
    physical inputs exist on every grid with ``N >= 16``.
    """
    rng = np.random.default_rng(seed)
    coarse = -grid.L / 2 + grid.L / 16 * np.arange(16)
    out = []
    for i in range(count):
        kind = kinds[i % len(kinds)]
        pos = rng.choice(coarse, size=grid.dim)
        if kind == "spike":
            out.append((f"spike{i}", spike(grid, pos)))
        elif kind == "smooth":
            out.append((f"smooth{i}", Field.spatial(grid, _band_limited(grid, rng))))
        elif kind == "profile":
            a = rng.uniform(0.2, 0.8) * grid.dim
            r = np.maximum(grid.periodic_distance(pos), grid.h / 2)
            out.append((f"profile{i}", Field.spatial(grid, np.where(r < grid.L / 8, r**-a, 0.0))))
        else:
            raise ValueError(f"unknown input kind {kind!r}")
    return out


# --------------------------------------------------------------------------
# lemma scaling


@dataclass
class LemmaConfig:
    u: Field
    l: float
    js: Sequence[int]
    x0: tuple[float, ...] | None = None
    kind: str = "pdo"
    C: float = 2.0
    lambdas: Sequence[float] | None = None
    n_pairs: int = 8
    delta: float | None = None


def kernel_difference(K: KernelMatrix, u: Field, x: int, z: int) -> float:
    """``sum_y |u(y)| |K(x, y) - K(z, y)| h^dim`` for flat lattice indices ``x``, ``z``."""
    absu = np.abs(u.values.reshape(-1))
    return float(np.sum(absu * np.abs(K.entries[x] - K.entries[z])) * u.grid.cell_volume)


def _block_average(kind: str, a: Symbol, P: LPPartition, j: int, u: Field, Q: Cube) -> float:
    block = decompose(a, P)[j].symbol
    Tu = _apply(kind, block, u)
    return float(np.mean(np.abs(Tu.values[Q.mask(u.grid)])))


def lemma_scaling(lemma: str, a: Symbol, cfg: LemmaConfig) -> ScalingReport:
    """Measure one dyadic-block estimate over ``cfg.js`` and fit its exponent in ``j``."""
    u = cfg.u
    g = u.grid
    n = g.dim
    l = float(cfg.l)
    js = [int(j) for j in cfg.js]
    x0 = tuple(cfg.x0) if cfg.x0 is not None else (0.0,) * n
    P = build_partition(g, cfg.C)
    if min(js) < 1 or max(js) > P.J_max - 1:
        raise HypothesisError(f"j-range must avoid the partition edges 0 and J_max={P.J_max}")
    Q = Cube(x0, l)
    Mu0 = float(hl_maximal(u, CubeFamily(g))[g.index_of(x0)])
    notes = {"lemma": lemma, "l": l, "Mu_x0": Mu0, "kind": cfg.kind}
    lemma = lemma.upper()

    if lemma == "L1":
        if not l < 1:
            raise HypothesisError("L1 needs l < 1")
        rng = np.random.default_rng(0)
        idx = np.flatnonzero(Q.mask(g).reshape(-1))
        pairs = [(idx[0], idx[-1])] + [tuple(rng.choice(idx, 2)) for _ in range(cfg.n_pairs - 1)]
        blocks = decompose(a, P)
        meas = []
        for j in js:
            K = block_kernel(blocks[j], dual=(cfg.kind == "dual"))
            meas.append(max(kernel_difference(K, u, x, z) for x, z in pairs))
        absc = [2.0**j * l for j in js]
        rep = fit_log2_slope(absc, meas, log_abscissa=True, predicted=1.0)
        rep.notes.update(notes)
        return rep

    if lemma in ("L2", "L3", "L4"):
        if not l < 1:
            raise HypothesisError(f"{lemma} needs l < 1")
        if any(2.0**j < 1 / l for j in js):
            raise HypothesisError(f"{lemma} needs 2^j >= 1/l")
    meas = [_block_average(cfg.kind, a, P, j, u, Q) for j in js]

    if lemma == "L2":
        predicted = -n / 2
    elif lemma == "L3":
        delta = cfg.delta if cfg.delta is not None else a.meta.delta
        if not 0 < delta < 1:
            raise HypothesisError("L3 needs 0 < delta < 1")
        lam = list(cfg.lambdas) if cfg.lambdas else [1.0]
        bounds = {}
        for lm in lam:
            first = [2.0 ** (j * delta) * l**lm for j in js]
            second = [l ** (-n * lm / 2) * 2.0 ** (-j * n / 2) for j in js]
            bounds[lm] = [f + s for f, s in zip(first, second)]
        best = [min(bounds[lm][i] for lm in lam) for i in range(len(js))]
        mid = len(js) // 2
        lm_mid = min(lam, key=lambda lm: bounds[lm][mid])
        dominant_first = 2.0 ** (js[mid] * delta) * l**lm_mid > l ** (-n * lm_mid / 2) * 2.0 ** (-js[mid] * n / 2)
        predicted = delta if dominant_first else -n / 2
        notes.update(bound=best, lambdas=lam, dominant="2^{j delta} l^lambda" if dominant_first else "l^{-n lambda/2} 2^{-jn/2}")
    elif lemma == "L4":
        delta = cfg.delta if cfg.delta is not None else a.meta.delta
        sch = schedule(n, delta)
        thresh = l ** (-sch.l4_threshold_exponent)
        if any(2.0**j < thresh * (1 - 1e-12) for j in js):
            raise HypothesisError(f"L4 needs 2^j >= l^-{sch.l4_threshold_exponent:.4g} = {thresh:.4g}")
        predicted = -sch.T_delta
        notes.update(T_delta=sch.T_delta, threshold=thresh)
    elif lemma == "L5":
        if not l >= 1:
            raise HypothesisError("L5 needs l >= 1")
        delta = cfg.delta if cfg.delta is not None else a.meta.delta
        if cfg.kind == "dual":
            delta = 0.0
        theta1 = n * (1 - delta) / 4
        eps = ((1 - delta) / 2 - theta1 / n) / 2
        Np = n + 1
        e1 = -n / 2 * (1 - delta) + theta1 + eps * n
        e2 = -eps * (Np - n)
        first = [2.0 ** (e1 * j) for j in js]
        second = [2.0 ** (e2 * j) * l ** (-(Np - n)) for j in js]
        cross = [i for i in range(1, len(js)) if (first[i] > second[i]) != (first[i - 1] > second[i - 1])]
        mid = len(js) // 2
        predicted = e1 if first[mid] >= second[mid] else e2
        notes.update(exponents=(e1, e2), crossover_index=cross, theta1=theta1, epsilon=eps, N=Np)
    elif lemma != "L2":
        raise ValueError(f"unknown lemma {lemma!r}")

    rep = fit_log2_slope(js, meas, predicted=predicted)
    rep.notes.update(notes)
    return rep


# --------------------------------------------------------------------------
# ratio experiments


def fefferman_stein_ratio(u: Field, w: Weight, p: float = 1.0, weak: bool = True,
                          F: CubeFamily | None = None) -> float:
    """``||Mu|| / ||M#u||`` in the weighted weak (or strong) ``L^p`` norm."""
    F = F or CubeFamily(u.grid)
    sharp = sharp_maximal(u, F)
    if not np.any(sharp > 0):
        raise DegenerateInputError("u is constant: its sharp maximal function vanishes")
    M = hl_maximal(u, F)
    if weak:
        return (weighted_weak_norm(M, w, p).sup / weighted_weak_norm(sharp, w, p).sup) ** (1 / p)
    return weighted_norm(M, w, p) / weighted_norm(sharp, w, p)


def weak_type_ratio(kind: str, a: Symbol, u: Field, w: Weight | None = None,
                    phi: Phase | None = None) -> float:
    """``||T u||_{L^{1,inf}_omega} / ||u||_{L^1_omega}``."""
    w = w or constant_weight(u.grid)
    denom = weighted_norm(u, w, 1.0)
    if denom == 0:
        raise DegenerateInputError("u vanishes identically")
    return weighted_weak_norm(_apply(kind, a, u, phi), w, 1.0).sup / denom


def l1_order_bound(kind: str, a: Symbol, n: int) -> float:
    meta = a.meta
    if kind == "dual":
        return -n / 2 * (1 - meta.rho)
    return -n / 2 * (1 - meta.rho) - n / 2 * max(meta.delta - meta.rho, 0.0)


def l1_ratio(kind: str, a: Symbol, u: Field) -> float:
    """``||T u||_{L^1} / ||u||_{L^1}`` under the strict order hypothesis."""
    if kind == "pdo" and a.meta.rough:
        raise HypothesisError("L^1 bound for T_a needs an x-smooth symbol")
    if not a.meta.m < l1_order_bound(kind, a, u.grid.dim):
        raise HypothesisError(f"order {a.meta.m} not below {l1_order_bound(kind, a, u.grid.dim)}")
    w = constant_weight(u.grid)
    denom = weighted_norm(u, w, 1.0)
    if denom == 0:
        raise DegenerateInputError("u vanishes identically")
    return weighted_norm(_apply(kind, a, u), w, 1.0) / denom
