from fractions import Fraction

import numpy as np
import pytest

from psido_lab.estimates import (HypothesisError, LemmaConfig, ScheduleError, bump,
                                 domination_report, fefferman_stein_ratio, fit_log2_slope,
                                 input_family, kernel_difference, l1_ratio, lemma_scaling, schedule, spike,
                                 weak_type_ratio)
from psido_lab.grid import Field, Grid
from psido_lab.lp import block_kernel, build_partition, decompose
from psido_lab.maximal import CubeFamily, DegenerateInputError, constant_weight, power_weight
from psido_lab.quantize import linear_phase
from psido_lab.symbols import Symbol, SymbolMeta, catalog

DELTAS = [k / 10 for k in range(1, 10)]


# -- schedule -----------------------------------------------------------------


def test_schedule_one_dimension_half():
    s = schedule(1, 0.5)
    assert s.N_delta == 6
    assert s.theta0_window == pytest.approx((0.0, 0.05))
    assert s.theta0 == pytest.approx(0.025, abs=1e-15)
    assert s.T_delta == pytest.approx(float(Fraction(-1, 6) + Fraction(5, 6) * Fraction(9, 40)), abs=1e-15)
    assert abs(s.T_delta - 0.0208333) < 1e-6
    assert s.l4_threshold_exponent == pytest.approx(40.0)
    assert s.gamma == 6


def test_schedule_two_dimensions_half():
    s = schedule(2, 0.5)
    assert s.N_delta == 11
    assert s.theta0_window[1] == pytest.approx(0.5 - 4 / 9)
    assert s.theta0 == pytest.approx((0.5 - 4 / 9) / 2)
    assert abs(s.T_delta - 0.0227273) < 1e-6


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("d", DELTAS)
def test_schedule_invariants(n, d):
    s = schedule(n, d)
    s.check()
    assert s.N_delta > 2 * n / (1 - d) + n
    assert s.N_delta - 1 <= 2 * n / (1 - d) + n
    lo, hi = s.theta0_window
    assert lo < s.theta0 < hi
    assert s.T_delta > 0
    assert (1 / d) ** s.gamma >= s.l4_threshold_exponent * (1 - 1e-12)
    assert s.gamma == 1 or (1 / d) ** (s.gamma - 1) < s.l4_threshold_exponent
    assert 0 < s.theta1 < n * (1 - d) / 2
    assert 0 < s.epsilon < (1 - d) / 2 - s.theta1 / n
    assert s.N_parts > n


@pytest.mark.parametrize("d", [0.0, 1.0, -0.2, 1.5])
def test_schedule_rejects_delta(d):
    with pytest.raises(ScheduleError):
        schedule(1, d)


# -- fits ---------------------------------------------------------------------


def test_fit_recovers_power_law():
    js = np.arange(3, 9)
    rep = fit_log2_slope(js, 5.0 * 2.0 ** (-0.5 * js), predicted=-0.5)
    assert rep.fitted_slope == pytest.approx(-0.5)
    assert rep.r_squared == pytest.approx(1.0)
    assert rep.slope_error() < 1e-12
    assert np.allclose(rep.fitted(), rep.measurements)
    eps = np.array([0.2, 0.1, 0.05])
    rep = fit_log2_slope(eps, eps**-0.6, log_abscissa=True)
    assert rep.fitted_slope == pytest.approx(-0.6)
    assert np.allclose(rep.fitted(), rep.measurements)
    rep = fit_log2_slope([1, 2, 3, 4], [1, 2, 4, 100], window=(0, 3))
    assert rep.fitted_slope == pytest.approx(1.0)
    with pytest.raises(ValueError):
        fit_log2_slope([1, 2], [1.0, 0.0])


# -- domination ---------------------------------------------------------------


def test_domination_zero_input():
    g = Grid(1, 8.0, 32)
    rep = domination_report("pdo", catalog("bessel_multiplier", m=-1.0), Field.spatial(g, np.zeros(32)))
    assert rep.sup_ratio == 0.0


def test_domination_hypotheses():
    g = Grid(1, 8.0, 32)
    u = spike(g, (0.0,))
    with pytest.raises(HypothesisError):
        domination_report("pdo", catalog("bessel_multiplier", m=-0.5), u)
    with pytest.raises(HypothesisError):
        domination_report("pdo", catalog("rough_sample", m=-1.0), u)
    with pytest.raises(HypothesisError):
        domination_report("pdo", catalog("oscillating_exotic", m=-1.0, delta=1.0), u)
    assert domination_report("dual", catalog("rough_sample", m=-1.0), u).sup_ratio > 0


def test_domination_ratio_is_bounded_over_a_family():
    g = Grid(1, 8.0, 64)
    F = CubeFamily(g)
    a = catalog("oscillating_exotic", m=-1.0, delta=0.5)
    sups = [domination_report("pdo", a, u, F, n).sup_ratio for n, u in input_family(g, 10, seed=3)]
    assert np.all(np.isfinite(sups))
    assert max(sups) / min(sups) <= 10


def test_domination_stable_under_refinement():
    a = catalog("bessel_multiplier", m=-1.0)
    sups = []
    for N in (64, 128):
        g = Grid(1, 8.0, N)
        u = bump(g, (0.5,), 0.3)
        sups.append(domination_report("pdo", a, u).sup_ratio)
    assert 0.5 <= sups[1] / sups[0] <= 2


def test_input_family_is_seeded_and_resolution_consistent():
    g = Grid(1, 8.0, 64)
    a = input_family(g, 6, seed=2)
    b = input_family(g, 6, seed=2)
    assert [n for n, _ in a] == [n for n, _ in b]
    assert all(np.array_equal(u.values, v.values) for (_, u), (_, v) in zip(a, b))
    fine = input_family(g.refine(), 6, seed=2)
    assert [n for n, _ in a] == [n for n, _ in fine]
    # smooth members carry no mean
    assert abs(np.mean(a[1][1].values)) < 1e-12
    with pytest.raises(ValueError):
        input_family(g, 2, kinds=("noise",))


def test_spike_has_unit_mass():
    g = Grid(2, 3.0, 16)
    s = spike(g, (0.4, -1.0))
    assert np.sum(s.values) * g.cell_volume == pytest.approx(1.0)


# -- lemma scaling --------------------------------------------------------------


def _lemma_grid():
    return Grid(1, 2.0, 256)


def test_lemma_l2_exponent():
    g = _lemma_grid()
    rep = lemma_scaling("L2", catalog("random_phase", m=-1.0),
                        LemmaConfig(u=spike(g, (0.0,)), l=0.25, js=range(4, 8)))
    assert rep.predicted_slope == -0.5
    assert abs(rep.fitted_slope + 0.5) <= 0.3
    assert rep.r_squared >= 0.9
    assert rep.notes["Mu_x0"] > 0


def test_lemma_l4_is_an_upper_bound():
    g = _lemma_grid()
    a = catalog("oscillating_exotic", m=-1.0, delta=0.5)
    rep = lemma_scaling("L4", a, LemmaConfig(u=spike(g, (0.0,)), l=0.95, js=range(4, 8)))
    assert rep.predicted_slope == pytest.approx(-schedule(1, 0.5).T_delta)
    assert rep.fitted_slope <= rep.predicted_slope + 0.3
    assert rep.r_squared >= 0.9


def test_kernel_difference_vanishes_for_identical_points():
    g = Grid(1, 2.0, 32)
    P = build_partition(g)
    a = catalog("oscillating_exotic", m=-1.0, delta=0.5)
    u = bump(g, (0.0,), 0.1)
    for blk in decompose(a, P):
        K = block_kernel(blk)
        assert kernel_difference(K, u, 7, 7) == 0.0
        assert kernel_difference(K, u, 7, 9) == kernel_difference(K, u, 9, 7)


def test_lemma_l1_slope_is_bounded():
    g = Grid(1, 2.0, 64)
    a = catalog("bessel_multiplier", m=-1.0)
    rep = lemma_scaling("L1", a, LemmaConfig(u=bump(g, (0.0,), 0.1), l=0.25, js=range(1, 4)))
    assert rep.fitted_slope <= 1.0 + 0.3


def test_lemma_l3_l5_records():
    g = _lemma_grid()
    u = spike(g, (0.0,))
    a = catalog("oscillating_exotic", m=-1.0, delta=0.5)
    r3 = lemma_scaling("L3", a, LemmaConfig(u=u, l=0.25, js=range(4, 8), lambdas=[1, 2, 4]))
    assert len(r3.notes["bound"]) == 4
    assert r3.fitted_slope <= r3.predicted_slope + 0.3
    r5 = lemma_scaling("L5", a, LemmaConfig(u=u, l=1.0, js=range(3, 8)))
    e1, e2 = r5.notes["exponents"]
    assert r5.predicted_slope in (e1, e2)
    assert isinstance(r5.notes["crossover_index"], list)


def test_lemma_hypotheses():
    g = _lemma_grid()
    u = spike(g, (0.0,))
    a = catalog("bessel_multiplier", m=-1.0)
    with pytest.raises(HypothesisError):
        lemma_scaling("L2", a, LemmaConfig(u=u, l=0.25, js=range(1, 5)))
    with pytest.raises(HypothesisError):
        lemma_scaling("L2", a, LemmaConfig(u=u, l=1.5, js=range(4, 8)))
    with pytest.raises(HypothesisError):
        lemma_scaling("L5", a, LemmaConfig(u=u, l=0.5, js=range(4, 8), delta=0.5))
    with pytest.raises(HypothesisError):
        lemma_scaling("L4", a, LemmaConfig(u=u, l=0.5, js=range(4, 8), delta=0.5))
    with pytest.raises(HypothesisError):
        lemma_scaling("L2", a, LemmaConfig(u=u, l=0.25, js=range(4, 20)))
    with pytest.raises(ValueError):
        lemma_scaling("L9", a, LemmaConfig(u=u, l=0.25, js=range(4, 8)))


# -- ratio experiments --------------------------------------------------------


def test_fefferman_stein_ratio():
    g = Grid(1, 8.0, 128)
    u = bump(g, (0.5,), 0.4)
    r = fefferman_stein_ratio(u, constant_weight(g))
    assert np.isfinite(r) and r > 0
    assert fefferman_stein_ratio(u * -7.0, constant_weight(g)) == pytest.approx(r, rel=1e-12)
    fine = Grid(1, 8.0, 256)
    r2 = fefferman_stein_ratio(bump(fine, (0.5,), 0.4), constant_weight(fine))
    assert 0.5 <= r2 / r <= 2
    assert np.isfinite(fefferman_stein_ratio(u, power_weight(g, 0.5), weak=False))
    with pytest.raises(DegenerateInputError):
        fefferman_stein_ratio(Field.spatial(g, np.full(128, 2.0)), constant_weight(g))


def test_weak_type_ratio():
    g = Grid(1, 8.0, 128)
    a = catalog("bessel_multiplier", m=-1.0)
    u = spike(g, (0.0,))
    r = weak_type_ratio("pdo", a, u)
    assert np.isfinite(r) and r > 0
    assert weak_type_ratio("pdo", a, 0.25 * u) == pytest.approx(r, rel=1e-12)
    assert weak_type_ratio("fio", a, u, phi=linear_phase()) == pytest.approx(r, rel=1e-12)
    with pytest.raises(DegenerateInputError):
        weak_type_ratio("pdo", a, 0 * u)
    with pytest.raises(ValueError):
        weak_type_ratio("fio", a, u)


def test_l1_ratio():
    g = Grid(1, 8.0, 64)
    a = catalog("bessel_multiplier", m=-0.8)
    vals = [l1_ratio("pdo", a.with_meta(rho=0.0), u) for _, u in input_family(g, 10, seed=0)]
    assert np.all(np.isfinite(vals)) and max(vals) / min(vals) <= 10
    u = bump(g, (0.0,), 0.5)
    assert l1_ratio("pdo", a.with_meta(rho=0.0), 3 * u) == pytest.approx(l1_ratio("pdo", a.with_meta(rho=0.0), u))
    zero = Symbol(lambda x, xi: 0 * xi[..., 0], SymbolMeta(-5.0, 0.0, 0.0), "zero")
    assert l1_ratio("pdo", zero, u) == 0.0
    with pytest.raises(HypothesisError):
        l1_ratio("pdo", catalog("bessel_multiplier", m=-0.3).with_meta(rho=0.0), u)
    with pytest.raises(HypothesisError):
        l1_ratio("pdo", catalog("rough_sample", m=-1.0), u)
    with pytest.raises(DegenerateInputError):
        l1_ratio("pdo", a.with_meta(rho=0.0), 0 * u)
