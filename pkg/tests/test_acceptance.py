"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run ``pytest tests/test_acceptance.py`` (lines appear in the terminal summary)
or ``python tests/test_acceptance.py``.
"""

import sys
import time

import numpy as np
import pytest

from psido_lab.estimates import (LemmaConfig, bump, domination_report, fefferman_stein_ratio,
                                 input_family, lemma_scaling, schedule, spike)
from psido_lab.grid import Field, Grid, Space, forward_transform, inverse_transform
from psido_lab.lp import build_partition, decompose
from psido_lab.maximal import (CubeFamily, ap_constant, constant_weight, hl_maximal, power_weight,
                               sharp_maximal, weighted_weak_norm)
from psido_lab.quantize import (apply_dual_fio, apply_dual_pdo, apply_fio, apply_pdo,
                                half_wave_phase, reduce_to_pdo)
from psido_lab.sharpness import (SharpnessConfig, bessel_kernel, blowup_experiment,
                                 convolution_identity_check, near_origin_slope, sharpness_contrast)
from psido_lab.symbols import CATALOG_NAMES, catalog, conjugate

RESULTS: list[str] = []


def record(k: int, ok: bool, detail: str, t0: float) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {k:2d} ({time.perf_counter() - t0:6.1f}s): {detail}"
    RESULTS.append(line)
    assert ok, line


def rel(a, b):
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


def symbol(name, dim=1):
    if name == "identity":
        return catalog(name)
    if name == "oscillating_exotic":
        return catalog(name, m=-float(dim), delta=0.5)
    return catalog(name, m=-float(dim))


def test_criterion_01_identity_and_multipliers():
    t0 = time.perf_counter()
    g = Grid(1, 2 * np.pi, 64)
    rng = np.random.default_rng(1)
    u = Field.spatial(g, rng.normal(size=64) + 1j * rng.normal(size=64))
    e_id = rel(apply_pdo(catalog("identity"), u).values, u.values)
    e_mult = 0.0
    for name in ("bessel_multiplier", "counterexample", "random_phase"):
        a = symbol(name)
        direct = inverse_transform(Field(g, a(np.zeros(1), g.frequencies()) * forward_transform(u).values,
                                         Space.FREQUENCY)).values
        e_mult = max(e_mult, rel(apply_pdo(a, u).values, direct))
    e_adj = 0.0
    for name in ("oscillating_exotic", "rough_sample"):
        a = symbol(name)
        for _ in range(50):
            x = rng.normal(size=64) + 1j * rng.normal(size=64)
            y = rng.normal(size=64) + 1j * rng.normal(size=64)
            lhs = np.vdot(y, apply_pdo(a, Field.spatial(g, x)).values)
            rhs = np.vdot(apply_dual_pdo(conjugate(a), Field.spatial(g, y)).values, x)
            e_adj = max(e_adj, abs(lhs - rhs) / abs(lhs))
    ok = e_id <= 1e-10 and e_mult <= 1e-12 and e_adj <= 1e-10
    record(1, ok, f"identity {e_id:.1e} <= 1e-10, multiplier {e_mult:.1e} <= 1e-12, "
                  f"adjoint {e_adj:.1e} <= 1e-10 (50 pairs x 2 symbols)", t0)


def test_criterion_02_partition_and_reassembly():
    t0 = time.perf_counter()
    g = Grid(1, 2 * np.pi, 64)
    P = build_partition(g)
    e_mask = float(np.max(np.abs(np.sum(P.masks(), axis=0) - 1)))
    u = Field.spatial(g, np.random.default_rng(2).normal(size=64))
    e_sum = 0.0
    for name in CATALOG_NAMES:
        a = symbol(name)
        whole = apply_pdo(a, u).values
        parts = sum(apply_pdo(b.symbol, u).values for b in decompose(a, P))
        e_sum = max(e_sum, rel(parts, whole))
    record(2, e_mask <= 1e-12 and e_sum <= 1e-10,
           f"mask sum error {e_mask:.1e} <= 1e-12, reassembly {e_sum:.1e} <= 1e-10 "
           f"({len(CATALOG_NAMES)} symbols, J_max={P.J_max})", t0)


def _brute(v, F):
    M, S = np.zeros(v.shape), np.zeros(v.shape)
    for _, _, mask in F.cubes():
        vals = v[mask]
        M[mask] = np.maximum(M[mask], np.mean(np.abs(vals)))
        S[mask] = np.maximum(S[mask], min(np.mean(np.abs(vals - c)) for c in vals))
    return M, S


def test_criterion_03_maximal_and_weight_oracles():
    t0 = time.perf_counter()
    worst = 0.0
    cases = 0
    for N in (8, 16):
        for L in (1.0, 2 * np.pi, float(N)):
            F = CubeFamily(Grid(1, L, N))
            rng = np.random.default_rng(N)
            for v in (np.eye(N)[0], np.arange(N, dtype=float), rng.normal(size=N),
                      rng.integers(-2, 3, size=N).astype(float)):
                M, S = _brute(v, F)
                worst = max(worst, np.max(np.abs(hl_maximal(v, F) - M)),
                            np.max(np.abs(sharp_maximal(v, F) - S)))
                cases += 1
    g = Grid(1, 8.0, 8)
    sup = weighted_weak_norm(np.array([3.0, 2, 1, 0, 0, 0, 0, 0]), constant_weight(g), 1.0).sup
    F2 = CubeFamily(Grid(2, 1.0, 8))
    ap = [ap_constant(constant_weight(F2.grid), p, F2) for p in (1.0, 2.0, 3.5)]
    ok = worst <= 1e-12 and abs(sup - 4) <= 1e-10 and all(a == 1.0 for a in ap)
    record(3, ok, f"brute force max error {worst:.1e} <= 1e-12 over {cases} fields, "
                  f"weak-norm example sup {sup:.12f}, A_p(1) = {ap}", t0)


def test_criterion_04_domination():
    t0 = time.perf_counter()
    parts, ok = [], True
    for name, kind in (("bessel_multiplier", "pdo"), ("oscillating_exotic", "pdo"), ("rough_sample", "dual")):
        a = symbol(name)
        sups = []
        for N in (64, 128):
            g = Grid(1, 8.0, N)
            F = CubeFamily(g)
            sups.append(np.array([domination_report(kind, a, u, F, n).sup_ratio
                                  for n, u in input_family(g, 20, seed=1)]))
        spread = sups[1].max() / sups[1].min()
        change = max(sups[1].max() / sups[0].max(), sups[0].max() / sups[1].max())
        finite = bool(np.all(np.isfinite(sups[0])) and np.all(np.isfinite(sups[1])))
        ok &= finite and spread <= 10 and change <= 2
        parts.append(f"{name}/{kind} sup {sups[1].max():.3g} spread {spread:.2f} change {change:.3f}")
    record(4, ok, "; ".join(parts) + " (limits 10, 2)", t0)


def test_criterion_05_lemma_l2_exponent():
    t0 = time.perf_counter()
    g = Grid(1, 2.0, 256)
    rep = lemma_scaling("L2", catalog("random_phase", m=-1.0),
                        LemmaConfig(u=spike(g, (0.0,)), l=0.25, js=range(4, 8)))
    ok = abs(rep.fitted_slope + 0.5) <= 0.3 and rep.r_squared >= 0.9
    record(5, ok, f"slope {rep.fitted_slope:.3f} vs -0.5 +/- 0.3, r^2 {rep.r_squared:.3f} >= 0.9", t0)


def test_criterion_06_schedule():
    t0 = time.perf_counter()
    s1, s2 = schedule(1, 0.5), schedule(2, 0.5)
    ok = (s1.N_delta == 6 and abs(s1.theta0 - 0.025) <= 1e-12 and abs(s1.T_delta - 0.0208333) <= 1e-6
          and abs(s1.T_delta - 1 / 48) <= 1e-9 and s1.gamma == 6
          and s2.N_delta == 11 and abs(s2.T_delta - 1 / 44) <= 1e-9 and abs(s2.T_delta - 0.0227273) <= 1e-6)
    grid_ok = True
    for n in (1, 2):
        for d in np.arange(1, 10) / 10:
            s = schedule(n, float(d))
            grid_ok &= s.T_delta > 0 and s.theta0_window[0] < s.theta0_window[1]
    record(6, ok and grid_ok, f"(1,0.5): N={s1.N_delta} theta0={s1.theta0:g} T={s1.T_delta:.9f} "
                              f"gamma={s1.gamma}; (2,0.5): N={s2.N_delta} T={s2.T_delta:.9f}; "
                              f"18 (n, delta) windows nonempty", t0)


def test_criterion_07_counterexample_blowup():
    t0 = time.perf_counter()
    cfg = SharpnessConfig(n=1, m=-0.2, a_exp=0.9, b_exp=0.9, eta=0.25,
                          eps_ladder=(0.2, 0.14, 0.1, 0.07, 0.05))
    g = Grid(1, 8.0, 1024)
    conv = convolution_identity_check(cfg, g)
    ks = near_origin_slope(bessel_kernel(cfg.m, g)).fitted_slope
    rep = blowup_experiment(cfg, g)
    m = rep.measurements
    dip = max([0.0] + [1 - b / a for a, b in zip(m, m[1:])])
    ok = conv <= 1e-8 and abs(ks + 0.8) <= 0.2 and abs(rep.fitted_slope + 0.6) <= 0.3 and dip <= 0.1
    record(7, ok, f"convolution {conv:.1e} <= 1e-8, Bessel slope {ks:.3f} (-0.8 +/- 0.2), blow-up slope "
                  f"{rep.fitted_slope:.3f} (-0.6 +/- 0.3), worst dip {dip:.0%} <= 10%", t0)


def test_criterion_08_sharpness_contrast():
    t0 = time.perf_counter()
    cfg = SharpnessConfig()
    out = sharpness_contrast(cfg, [Grid(1, 8.0, N) for N in (256, 512, 1024)])
    crit, sup = np.array(out["critical"]), np.array(out["supercritical"])
    drift = crit.max() / crit.min()
    growth = sup[1:] / sup[:-1]
    ok = drift <= 1.2 and bool(np.all(growth >= 1.3))
    record(8, ok, f"order -1 ratios {np.round(crit, 2).tolist()} (drift {drift:.3f} <= 1.2); "
                  f"order -0.2 growth {np.round(growth, 3).tolist()} (>= 1.3)", t0)


def test_criterion_09_fio_reduction():
    t0 = time.perf_counter()
    g = Grid(1, 2 * np.pi, 64)
    phi = half_wave_phase(1.0)
    rng = np.random.default_rng(9)
    worst = worst_dual = 0.0
    for a in (symbol("oscillating_exotic"), symbol("bessel_multiplier"), symbol("rough_sample")):
        b, bd = reduce_to_pdo(a, phi), reduce_to_pdo(a, phi, dual=True)
        for _ in range(10):
            u = Field.spatial(g, rng.normal(size=64) + 1j * rng.normal(size=64))
            worst = max(worst, rel(apply_fio(a, phi, u).values, apply_pdo(b, u).values))
            worst_dual = max(worst_dual, rel(apply_dual_fio(a, phi, u).values, apply_dual_pdo(bd, u).values))
    record(9, worst <= 1e-12 and worst_dual <= 1e-12,
           f"fio {worst:.1e}, dual {worst_dual:.1e} <= 1e-12 (3 symbols x 10 inputs)", t0)


def test_criterion_10_fefferman_stein():
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    centers = rng.choice(np.arange(-3.5, 3.5, 0.5), size=5)
    widths = rng.uniform(0.25, 0.75, size=5)
    parts, ok = [], True
    for wname in ("one", "power(0.5)"):
        vals = []
        for N in (128, 256):
            g = Grid(1, 8.0, N)
            w = constant_weight(g) if wname == "one" else power_weight(g, 0.5)
            F = CubeFamily(g)
            vals.append(np.array([fefferman_stein_ratio(bump(g, (c,), s), w, 1.0, True, F)
                                  for c, s in zip(centers, widths)]))
        change = float(np.max(np.maximum(vals[1] / vals[0], vals[0] / vals[1])))
        ok &= bool(np.all(np.isfinite(vals[1]))) and change <= 2
        parts.append(f"omega={wname} max ratio {vals[1].max():.3f} change {change:.3f}")
    record(10, ok, "; ".join(parts) + " (limit 2)", t0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
