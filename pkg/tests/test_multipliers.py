from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from luryecert.errors import ConfigError, NotACounterexampleCandidate
from luryecert.lti import RationalTransferFunction
from luryecert.multipliers import (
    RationalMultiplier,
    TapMultiplier,
    apply_to_periodic,
    build_counterexample,
    identity_multiplier,
    is_periodicity_compatible,
    membership,
    multiplier_from_dict,
    multiplier_response,
    periodic_inner_product,
)


class TestTapMultiplier:
    def test_identity(self):
        m = identity_multiplier("z")
        assert m.is_identity
        assert multiplier_response(m, np.array([0.3, 1.0])) == pytest.approx([1.0, 1.0])

    def test_response_single_tap(self):
        m = TapMultiplier("z", ((1.0, 0.68),))
        w = 0.9
        want = 1.0 - 0.68 * np.exp(-1j * w)
        assert multiplier_response(m, w) == pytest.approx(want)

    def test_response_anticausal(self):
        m = TapMultiplier("z", ((-1.0, -0.57),))
        w = 0.4
        want = 1.0 + 0.57 * np.exp(1j * w)
        assert multiplier_response(m, w) == pytest.approx(want)

    def test_continuous_delay(self):
        m = TapMultiplier("s", ((2.0 * math.pi, 0.82),))
        w = 0.5
        want = 1.0 - 0.82 * np.exp(-1j * w * 2.0 * math.pi)
        assert multiplier_response(m, w) == pytest.approx(want)

    def test_discrete_offsets_must_be_integers(self):
        with pytest.raises(ConfigError):
            TapMultiplier("z", ((0.5, 0.3),))

    def test_dict_roundtrip(self):
        m = TapMultiplier("z", ((5.0, 0.16), (-10.0, 0.04)))
        assert multiplier_from_dict(m.to_dict()).taps == m.taps


class TestMembership:
    def test_ozf_member(self):
        m = TapMultiplier("z", ((1.0, 0.68),))
        assert membership(m, "ozf")

    def test_ozf_rejects_negative_coefficient(self):
        m = TapMultiplier("z", ((-1.0, -0.57),))
        res = membership(m, "ozf")
        assert not res
        assert "negative" in res.reason.lower() or "sign" in res.reason.lower()

    def test_ozf_rejects_unit_sum(self):
        m = TapMultiplier("z", ((1.0, 0.5), (2.0, 0.5)))
        assert not membership(m, "ozf")

    def test_odd_accepts_signed(self):
        m = TapMultiplier("z", ((-1.0, -0.57),))
        assert membership(m, "odd")

    def test_odd_rejects_unit_abs_sum(self):
        m = TapMultiplier("z", ((1.0, 0.6), (-1.0, -0.4)))
        assert not membership(m, "odd")

    def test_zero_offset_rejected(self):
        m = TapMultiplier("z", ((0.0, 0.3),))
        assert not membership(m, "ozf")

    def test_altshuller_needs_lattice(self):
        m = TapMultiplier("z", ((5.0, 0.16),))
        with pytest.raises(ConfigError):
            membership(m, "altshuller")

    def test_altshuller_member(self):
        m = TapMultiplier("z", ((5.0, 0.16), (-10.0, 0.04)))
        assert membership(m, "altshuller", lattice=5.0)

    def test_altshuller_rejects_off_lattice(self):
        m = TapMultiplier("z", ((3.0, 0.16),))
        assert not membership(m, "altshuller", lattice=5.0)

    def test_altshuller_continuous(self):
        m = TapMultiplier("s", ((2.0 * math.pi, 0.82),))
        assert membership(m, "altshuller", lattice=2.0 * math.pi)
        assert not membership(m, "altshuller", lattice=math.e)

    def test_periodicity_compatibility(self):
        m = TapMultiplier("z", ((5.0, 0.16), (-10.0, 0.04)))
        assert is_periodicity_compatible(m, 5.0)
        assert not is_periodicity_compatible(m, 4.0)


class TestNestingExamples:
    @given(st.lists(
        st.tuples(st.integers(min_value=1, max_value=6),
                  st.floats(0.01, 0.5)),
        min_size=1, max_size=3, unique_by=lambda t: t[0]))
    def test_altshuller_subset_ozf_subset_odd(self, raw):
        taps = tuple((float(off * 5), c) for off, c in raw)
        m = TapMultiplier("z", taps)
        if membership(m, "altshuller", lattice=5.0):
            assert membership(m, "ozf")
        if membership(m, "ozf"):
            assert membership(m, "odd")


class TestRationalMultiplier:
    def test_valid_lead(self):
        tf = RationalTransferFunction("s", (2.0, 1.0), (1.0, 1.0))
        m = RationalMultiplier(tf)
        assert not m.user_asserted
        res = membership(m, "rational")
        assert res
        assert not res.asserted

    def test_invalid_lead_needs_assertion(self):
        tf = RationalTransferFunction("s", (1.0, 1.0), (2.0, 1.0))  # lag: b > a
        with pytest.raises(ConfigError):
            RationalMultiplier(tf)
        m = RationalMultiplier(tf, user_asserted=True)
        assert membership(m, "rational").asserted

    def test_discrete_rejected(self):
        tf = RationalTransferFunction("z", (1.0, 0.5), (1.0, 0.0))
        with pytest.raises(ConfigError):
            RationalMultiplier(tf)

    def test_response(self):
        tf = RationalTransferFunction("s", (2.0, 1.0), (1.0, 1.0))
        m = RationalMultiplier(tf)
        w = 0.7
        want = (1.0 + 2.0j * w) / (1.0 + 1.0j * w)
        assert multiplier_response(m, w) == pytest.approx(want)

    def test_from_dict(self):
        d = {"class": "rational", "domain": "s", "num": [2.0, 1.0], "den": [1.0, 1.0]}
        m = multiplier_from_dict(d)
        assert isinstance(m, RationalMultiplier)


class TestPeriodicAction:
    def test_apply_identity(self):
        u = np.sin(np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False))
        m = identity_multiplier("z")
        assert apply_to_periodic(m, u) == pytest.approx(u)

    def test_apply_shift(self):
        u = np.arange(8.0)
        m = TapMultiplier("z", ((2.0, 0.5),))
        want = u - 0.5 * np.roll(u, 2)
        assert apply_to_periodic(m, u) == pytest.approx(want)

    def test_apply_anticausal_shift(self):
        u = np.arange(8.0)
        m = TapMultiplier("z", ((-3.0, 0.25),))
        want = u - 0.25 * np.roll(u, -3)
        assert apply_to_periodic(m, u) == pytest.approx(want)

    def test_continuous_offsets_need_sample_lattice(self):
        u = np.zeros(16)
        m = TapMultiplier("s", ((0.3, 0.5),))
        # 16 samples over period 1.0: grid step 1/16, offset 0.3 falls between
        with pytest.raises(ConfigError):
            apply_to_periodic(m, u, period=1.0)

    def test_continuous_offsets_on_lattice(self):
        u = np.sin(np.linspace(0.0, 2.0 * math.pi, 16, endpoint=False))
        m = TapMultiplier("s", ((0.25, 0.5),))
        got = apply_to_periodic(m, u, period=1.0)
        assert got == pytest.approx(u - 0.5 * np.roll(u, 4))

    def test_inner_product_is_scaled_mean(self):
        u = np.array([1.0, 2.0, 3.0, 4.0])
        v = np.array([1.0, -1.0, 1.0, -1.0])
        assert periodic_inner_product(u, v, period=2.0) == pytest.approx(
            2.0 * np.mean(u * v))


class TestCounterexample:
    def test_pinned_halfshift(self):
        m = TapMultiplier("s", ((0.5, 0.5),))
        res = build_counterexample(m, period=1.0)
        assert res.verified
        assert res.delta == pytest.approx(4.9)
        assert res.inner_product == pytest.approx(-3.0525, abs=1e-4)
        assert res.inner_product < 0
        assert res.numeric_inner_product == pytest.approx(res.inner_product, rel=1e-6)

    def test_pinned_pi_period(self):
        m = TapMultiplier("s", ((math.pi / 2.0, 0.3),))
        res = build_counterexample(m, period=math.pi)
        assert res.verified
        assert res.delta == pytest.approx(7.6)
        assert res.inner_product == pytest.approx(-8.3064, abs=1e-4)

    def test_gains_bracket_unity(self):
        m = TapMultiplier("s", ((0.5, 0.5),))
        res = build_counterexample(m, period=1.0)
        hi, lo = res.gains
        assert hi > 1.0 > lo
        assert hi * lo == pytest.approx(1.0)

    def test_lattice_taps_rejected(self):
        m = TapMultiplier("s", ((2.0, 0.5),))
        with pytest.raises(NotACounterexampleCandidate):
            build_counterexample(m, period=1.0)

    def test_negative_taps_rejected(self):
        m = TapMultiplier("s", ((0.5, -0.5),))
        with pytest.raises(NotACounterexampleCandidate):
            build_counterexample(m, period=1.0)


@st.composite
def off_lattice_multiplier(draw):
    period = draw(st.floats(0.5, 8.0))
    n = draw(st.integers(min_value=1, max_value=3))
    taps = []
    for i in range(n):
        mult = draw(st.integers(min_value=0, max_value=3))
        frac = draw(st.floats(0.1, 0.9))
        off = (mult + frac) * period
        c = draw(st.floats(0.05, 0.8))
        taps.append((off, c))
    total = sum(c for _, c in taps)
    if total >= 0.95:
        taps = [(off, 0.9 * c / total) for off, c in taps]
    return TapMultiplier("s", tuple(taps)), period


class TestCounterexampleProperty:
    @given(off_lattice_multiplier())
    def test_always_verified_negative(self, arg):
        mult, period = arg
        res = build_counterexample(mult, period)
        assert res.verified
        assert res.inner_product < 0
        assert res.numeric_inner_product < 0
        # midpoint rule on 2^14 samples of square waves scaled by 1 + delta:
        # off-grid shifts cost O((1 + delta)^2 / n) per tap
        scale = (1.0 + res.delta) ** 2 * res.period / 2.0 ** 14
        budget = 5.0 * scale * (1.0 + sum(c for _, c in mult.taps))
        assert abs(res.numeric_inner_product - res.inner_product) <= budget
