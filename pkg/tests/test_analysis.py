from __future__ import annotations

import math

import numpy as np
import pytest

from luryecert.analysis import (
    CHANNELS,
    all_period_test,
    build_grid,
    gain_bound,
    gain_bound_table,
    lp_feasibility_test,
    phase_gap_test,
    rational_phase_limit,
    search_multiplier,
    steady_state_output,
    suitability,
)
from luryecert.errors import (
    ConfigError,
    DegenerateIndexSet,
    NoFeasibleMultiplier,
    NonmonotoneNonlinearity,
    NotSuitable,
)
from luryecert.lti import RationalTransferFunction, tf_plus_constant
from luryecert.multipliers import TapMultiplier, identity_multiplier


def bench(g: float) -> RationalTransferFunction:
    return RationalTransferFunction("z", (2.0, 0.92), (1.0, -0.5, 0.0), g)


def fromion(g: float) -> RationalTransferFunction:
    return RationalTransferFunction("s", (1.0,), (1.0, 100.1, 11.0, 100.0), g)


class TestSuitability:
    def test_identity_g06_suitable(self):
        res = suitability(bench(0.6), identity_multiplier("z"), k=1.0)
        assert res.suitable
        assert res.margin == pytest.approx(0.0784, abs=1e-4)

    def test_identity_g07_not_suitable(self):
        res = suitability(bench(0.7), identity_multiplier("z"), k=1.0)
        assert not res.suitable
        assert res.margin == pytest.approx(-0.0752, abs=1e-4)

    def test_require_raises(self):
        res = suitability(bench(0.7), identity_multiplier("z"), k=1.0)
        with pytest.raises(NotSuitable):
            res.require()

    def test_tap_multiplier_rescues_g07(self):
        res = suitability(bench(0.7), TapMultiplier("z", ((1.0, 0.91),)), k=1.0)
        assert res.suitable

    def test_margin_is_grid_min(self):
        from luryecert.lti import eval_frequency_response
        from luryecert.multipliers import multiplier_response

        tf, mult = bench(0.6), TapMultiplier("z", ((1.0, 0.68),))
        grid = build_grid(tf, k=1.0)
        res = suitability(tf, mult, k=1.0, grid=grid)
        target = 1.0 + eval_frequency_response(tf, grid.points)
        vals = np.real(multiplier_response(mult, grid.points) * target)
        assert res.margin == pytest.approx(float(vals.min()), abs=1e-15)

    def test_infinite_k(self):
        # with k = inf the target is G itself
        res = suitability(bench(0.2), identity_multiplier("z"))
        assert res.k == math.inf


class TestGainBound:
    def test_table2_causal_g06(self):
        res = gain_bound(bench(0.6), TapMultiplier("z", ((1.0, 0.68),)), k=1.0)
        assert res.bound == pytest.approx(3.7552401740454258, abs=5e-5)

    def test_table2_anticausal_g10(self):
        res = gain_bound(bench(1.0), TapMultiplier("z", ((-1.0, -0.87),)), k=1.0)
        assert res.bound == pytest.approx(31.743797886380033, abs=5e-4)

    def test_identity_bound_g06(self):
        res = gain_bound(bench(0.6), identity_multiplier("z"), k=1.0)
        assert res.bound == pytest.approx(12.7553, abs=1e-3)

    def test_not_suitable_raises(self):
        with pytest.raises(NotSuitable):
            gain_bound(bench(0.7), identity_multiplier("z"), k=1.0)

    def test_unknown_channel(self):
        with pytest.raises(ConfigError):
            gain_bound(bench(0.6), identity_multiplier("z"), k=1.0, channel="r3->y9")

    def test_residual_small_all_channels(self):
        tf, mult = bench(0.7), TapMultiplier("z", ((1.0, 0.91),))
        table = gain_bound_table(tf, mult, k=1.0)
        assert set(table) == set(CHANNELS)
        for res in table.values():
            assert res.residual < 1e-9

    def test_direct_channel_closed_form(self):
        # r1->y2 bound is sup of (1 + |MG|^2) / (2 Re[M (G + 1/k)])
        from luryecert.lti import eval_frequency_response
        from luryecert.multipliers import multiplier_response

        tf, mult = bench(0.6), TapMultiplier("z", ((1.0, 0.68),))
        grid = build_grid(tf, k=1.0)
        gv = eval_frequency_response(tf, grid.points)
        mv = multiplier_response(mult, grid.points)
        direct = (1.0 + np.abs(mv * gv) ** 2) / (2.0 * np.real(mv * (gv + 1.0)))
        res = gain_bound(tf, mult, k=1.0, channel="r1->y2", grid=grid)
        assert res.bound >= float(direct.max()) - 1e-12
        assert res.bound == pytest.approx(float(direct.max()), rel=1e-6)

    def test_floor_positions(self):
        tf, mult = bench(0.6), TapMultiplier("z", ((1.0, 0.68),))
        table = gain_bound_table(tf, mult, k=1.0)
        from luryecert.lti import eval_frequency_response

        grid = build_grid(tf, k=1.0)
        sup_g2 = float(np.max(np.abs(eval_frequency_response(tf, grid.points)) ** 2))
        assert table["r1->u1"].bound >= 1.0
        assert table["r2->u2"].bound >= 1.0
        assert table["r1->u2"].bound >= sup_g2 - 1e-9

    def test_variants_differ_on_r2_u2(self):
        tf, mult = bench(0.7), TapMultiplier("z", ((1.0, 0.91),))
        printed = gain_bound(tf, mult, k=1.0, channel="r2->u2", variant="printed")
        eq21 = gain_bound(tf, mult, k=1.0, channel="r2->u2", variant="eq21")
        assert printed.bound != pytest.approx(eq21.bound, rel=1e-6)
        # the doubled constant term can only enlarge the root
        assert eq21.bound > printed.bound

    def test_variant_identical_elsewhere(self):
        tf, mult = bench(0.7), TapMultiplier("z", ((1.0, 0.91),))
        for ch in ("r2->y2", "r1->u1", "r1->y2"):
            a = gain_bound(tf, mult, k=1.0, channel=ch, variant="printed")
            b = gain_bound(tf, mult, k=1.0, channel=ch, variant="eq21")
            assert a.bound == b.bound

    def test_equal_channel_aliases(self):
        tf, mult = bench(0.7), TapMultiplier("z", ((1.0, 0.91),))
        table = gain_bound_table(tf, mult, k=1.0)
        assert table["r2->u1"].bound == pytest.approx(table["r2->y2"].bound)
        assert table["r1->u2"].bound == pytest.approx(table["r1->y1"].bound)


class TestPhaseGap:
    def test_raw_plant_has_gap(self):
        res = phase_gap_test(fromion(50.0), math.pi)
        assert res.witness
        assert res.gap > math.pi

    def test_shifted_target_has_none(self):
        res = phase_gap_test(tf_plus_constant(fromion(50.0), 1.0), math.pi)
        assert not res.witness
        assert res.gap < math.pi + 1e-9

    def test_discrete_rejected(self):
        with pytest.raises(ConfigError):
            phase_gap_test(bench(0.6), 5.0)

    def test_bad_period(self):
        with pytest.raises(ConfigError):
            phase_gap_test(fromion(50.0), -1.0)


class TestLpFeasibility:
    P_SIGNS = (0, 0, 0, 1)
    N_INDICES = (0, 0, 0, 1)

    def test_frequencies(self):
        res = lp_feasibility_test(fromion(60.0), math.pi, 5,
                                  self.P_SIGNS, self.N_INDICES, k=1.0)
        assert res.frequencies == pytest.approx((0.2, 0.4, 0.6, 1.2))

    def test_g60_infeasible_both_scalings(self):
        for scaling in ("printed", "lattice"):
            res = lp_feasibility_test(fromion(60.0), math.pi, 5,
                                      self.P_SIGNS, self.N_INDICES,
                                      k=1.0, scaling=scaling)
            assert not res.feasible

    def test_g80_scaling_split(self):
        printed = lp_feasibility_test(fromion(80.0), math.pi, 5,
                                      self.P_SIGNS, self.N_INDICES,
                                      k=1.0, scaling="printed")
        lattice = lp_feasibility_test(fromion(80.0), math.pi, 5,
                                      self.P_SIGNS, self.N_INDICES,
                                      k=1.0, scaling="lattice")
        assert not printed.feasible
        assert lattice.feasible
        assert lattice.lambdas is not None

    def test_degenerate_index_set(self):
        with pytest.raises(DegenerateIndexSet):
            lp_feasibility_test(fromion(60.0), math.pi, 5,
                                (0, 0, 0, 1), (0, 0, 0, 0), k=1.0)

    def test_wrong_lengths(self):
        with pytest.raises(ConfigError):
            lp_feasibility_test(fromion(60.0), math.pi, 5, (0, 0), (0, 0, 0, 1), k=1.0)


class TestRationalPhaseLimit:
    def test_below_threshold_no_witness(self):
        assert not rational_phase_limit(fromion(73.36), math.pi, k=1.0).witness

    def test_above_threshold_witness(self):
        res = rational_phase_limit(fromion(73.38), math.pi, k=1.0)
        assert res.witness
        first = res.witnesses[0]
        assert (first.a, first.b) == (3, 5)
        assert first.w == pytest.approx(1.2)

    def test_witness_phase_exceeds_threshold(self):
        res = rational_phase_limit(fromion(80.0), math.pi, k=1.0)
        for wit in res.witnesses:
            assert abs(wit.phase) > wit.threshold

    def test_discrete_case(self):
        res = rational_phase_limit(bench(0.7), 6.0, k=1.0)
        assert res.witness
        first = res.witnesses[0]
        assert (first.a, first.b) == (3, 2)
        assert first.w == pytest.approx(math.pi / 2.0)

    def test_discrete_frequencies_capped_at_pi(self):
        res = rational_phase_limit(bench(0.7), 6.0, k=1.0)
        for wit in res.witnesses:
            assert wit.w <= math.pi + 1e-12


class TestAllPeriod:
    def test_passes_at_g20(self):
        assert all_period_test(fromion(20.0), k=1.0).passes

    def test_fails_at_g50(self):
        res = all_period_test(fromion(50.0), k=1.0)
        assert not res.passes
        assert res.max_abs_phase > math.pi / 2.0


class TestSteadyState:
    def test_linear_fixed_point(self):
        # y = a (r - g0 y) solves to y = a r / (1 + a g0)
        a, g0, r = 0.7, 2.0, 1.3
        y = steady_state_output(lambda u: a * u, g0, r)
        assert y == pytest.approx(a * r / (1.0 + a * g0), abs=1e-10)

    def test_saturation_fixed_point(self):
        sat = lambda u: max(-1.0, min(1.0, u))
        y = steady_state_output(sat, 0.5, 4.0)
        # large input saturates: y = sat(4 - 0.5 y) = 1
        assert y == pytest.approx(1.0, abs=1e-10)

    def test_nonmonotone_rejected(self):
        with pytest.raises(NonmonotoneNonlinearity):
            steady_state_output(lambda u: -u, 0.5, 1.0)

    def test_monotone_probe_can_be_skipped(self):
        y = steady_state_output(lambda u: -0.1 * u, 0.0, 1.0, check_monotone=False)
        assert y == pytest.approx(-0.1, abs=1e-9)


class TestSearch:
    def test_finds_causal_multiplier_g06(self):
        res = search_multiplier(bench(0.6), k=1.0, side="causal")
        assert res.candidates_checked == 100
        assert res.margin > 0
        # at least as good as the published coefficient
        published = gain_bound(bench(0.6), TapMultiplier("z", ((1.0, 0.68),)), k=1.0)
        assert res.bound <= published.bound + 1e-12
        (off, c) = res.multiplier.taps[0]
        assert off == 1.0 and 0.6 <= c <= 0.8

    def test_anticausal_side(self):
        res = search_multiplier(bench(1.0), k=1.0, side="anticausal")
        assert res.multiplier.taps[0][0] == -1.0
        assert res.bound == pytest.approx(31.74, abs=0.2)

    def test_both_sides_beats_each(self):
        causal = search_multiplier(bench(0.7), k=1.0, side="causal")
        anti = search_multiplier(bench(0.7), k=1.0, side="anticausal")
        both = search_multiplier(bench(0.7), k=1.0, side="both")
        assert both.bound <= min(causal.bound, anti.bound) + 1e-12

    def test_no_feasible_multiplier(self):
        with pytest.raises(NoFeasibleMultiplier):
            search_multiplier(bench(2.0), k=1.0)
