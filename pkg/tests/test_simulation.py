from __future__ import annotations

import math

import numpy as np
import pytest

from luryecert.errors import (
    ConfigError,
    DegenerateSeparation,
    ImproperTransferFunction,
    LengthNotPowerOfTwo,
    NonfiniteState,
    NotSettled,
    WindowTooShort,
)
from luryecert.lti import RationalTransferFunction, StateSpaceRealization, to_state_space
from luryecert.simulation import (
    NonlinearitySpec,
    SinusoidForcing,
    decompose_periodic,
    detect_period,
    lyapunov_exponent,
    power_seminorm_periodic,
    power_seminorm_tail,
    simulate_continuous,
    simulate_discrete,
    spectrum,
    tail_mean,
)

R2 = (1.0, 0.6, -0.6, -1.0, 0.0)


def bench_ss(g: float) -> StateSpaceRealization:
    return StateSpaceRealization(
        A=np.array([[0.5, 0.0], [1.0, 0.0]]),
        B=g * np.array([2.0, 0.0]),
        C=np.array([1.0, 0.46]),
        D=0.0,
        domain="z",
    )


class TestNonlinearitySpec:
    def test_saturation_scalar(self):
        nl = NonlinearitySpec("saturation", limit=1.0)
        assert nl.scalar(0.4) == 0.4
        assert nl.scalar(2.5) == 1.0
        assert nl.scalar(-2.5) == -1.0

    def test_deadzone_scalar(self):
        nl = NonlinearitySpec("deadzone", width=0.2)
        assert nl.scalar(0.1) == 0.0
        assert nl.scalar(0.5) == pytest.approx(0.3)
        assert nl.scalar(-0.5) == pytest.approx(-0.3)

    def test_zero(self):
        nl = NonlinearitySpec("zero")
        assert nl.scalar(123.0) == 0.0

    def test_pwl(self):
        nl = NonlinearitySpec("pwl", xs=(-1.0, 0.0, 1.0), ys=(-2.0, 0.0, 1.0))
        assert nl.scalar(0.5) == pytest.approx(0.5)
        assert nl.scalar(-0.5) == pytest.approx(-1.0)
        # clamped beyond the table
        assert nl.scalar(5.0) == pytest.approx(1.0)
        assert nl.scalar(-5.0) == pytest.approx(-2.0)

    def test_gain_table_phase(self):
        nl = NonlinearitySpec("gain_table", gains=(1.0, 0.5, 0.0))
        assert nl.scalar(2.0, phase=0) == 2.0
        assert nl.scalar(2.0, phase=1) == 1.0
        assert nl.scalar(2.0, phase=2) == 0.0
        assert nl.scalar(2.0, phase=3) == 2.0  # wraps

    def test_gain_switch_time(self):
        nl = NonlinearitySpec("gain_switch", gains=(1.0, 3.0), period=2.0)
        assert nl.scalar(1.0, phase=0.5) == 1.0
        assert nl.scalar(1.0, phase=1.5) == 3.0
        assert nl.scalar(1.0, phase=2.5) == 1.0

    def test_validation(self):
        with pytest.raises(ConfigError):
            NonlinearitySpec("warp")
        with pytest.raises(ConfigError):
            NonlinearitySpec("saturation", limit=-1.0)
        with pytest.raises(ConfigError):
            NonlinearitySpec("pwl", xs=(0.0, 1.0), ys=(0.0,))
        with pytest.raises(ConfigError):
            NonlinearitySpec("pwl", xs=(1.0, 0.0), ys=(0.0, 1.0))
        with pytest.raises(ConfigError):
            NonlinearitySpec("gain_switch", gains=(1.0,), period=0.0)

    def test_monotone_odd_flags(self):
        assert NonlinearitySpec("saturation", limit=1.0).is_monotone
        assert NonlinearitySpec("deadzone", width=0.2).is_odd
        nonmono = NonlinearitySpec("pwl", xs=(-1.0, 0.0, 1.0), ys=(0.0, 1.0, 0.0))
        assert not nonmono.is_monotone

    def test_dict_roundtrip(self):
        nl = NonlinearitySpec("pwl", xs=(-1.0, 1.0), ys=(-1.0, 1.0))
        assert NonlinearitySpec.from_dict(nl.to_dict()) == nl


class TestDiscreteSimulation:
    def test_linear_loop_matches_manual(self):
        ss = bench_ss(0.7)
        nl = NonlinearitySpec("zero")
        res = simulate_discrete(ss, nl, R2, 50, r1=0.25)
        # with y2 = 0: u1 = r1, x+ = A x + B r1
        x = np.zeros(2)
        for n in range(50):
            assert res.y1[n] == pytest.approx(float(ss.C @ x), abs=1e-12)
            assert res.y2[n] == 0.0
            assert res.u1[n] == 0.25
            x = ss.A @ x + ss.B * 0.25
        assert res.x_final == pytest.approx(x, abs=1e-12)

    def test_loop_wiring(self):
        ss = bench_ss(0.7)
        nl = NonlinearitySpec("deadzone", width=0.2)
        res = simulate_discrete(ss, nl, R2, 7)
        for n in range(7):
            u2 = res.y1[n] + R2[n % 5]
            assert res.u2[n] == pytest.approx(u2, abs=1e-12)
            assert res.y2[n] == pytest.approx(nl.scalar(u2), abs=1e-12)
            assert res.u1[n] == pytest.approx(-res.y2[n], abs=1e-12)

    def test_pinned_cycle(self):
        res = simulate_discrete(bench_ss(0.7), NonlinearitySpec("deadzone", width=0.2),
                                R2, 2000)
        want = (0.2282, -0.2861, -0.6895, 0.0, 0.7464)
        assert res.y2[-5:] == pytest.approx(want, abs=1e-4)

    def test_record_states(self):
        res = simulate_discrete(bench_ss(0.7), NonlinearitySpec("zero"), R2, 10,
                                record_states=True)
        assert res.states.shape == (10, 2)

    def test_nonfinite_raises(self):
        ss = StateSpaceRealization(
            A=np.array([[2.0, 0.0], [0.0, 2.0]]), B=np.array([1.0, 0.0]),
            C=np.array([1.0, 0.0]), D=0.0, domain="z")
        with pytest.raises(NonfiniteState):
            simulate_discrete(ss, NonlinearitySpec("zero"), (1.0,), 200, r1=1.0)

    def test_gain_switch_rejected(self):
        nl = NonlinearitySpec("gain_switch", gains=(1.0, 2.0), period=1.0)
        with pytest.raises(ConfigError):
            simulate_discrete(bench_ss(0.7), nl, R2, 10)

    def test_feedthrough_rejected(self):
        tf = RationalTransferFunction("z", (1.0, 0.2), (1.0, -0.5))
        ss = to_state_space(tf)
        with pytest.raises(ImproperTransferFunction):
            simulate_discrete(ss, NonlinearitySpec("zero"), R2, 10)


class TestContinuousSimulation:
    def test_linear_lag_matches_analytic(self):
        # x' = -x + sin t through the r1 channel with a zero nonlinearity
        ss = StateSpaceRealization(
            A=np.array([[-1.0]]), B=np.array([1.0]), C=np.array([1.0]),
            D=0.0, domain="s")
        nl = NonlinearitySpec("zero")
        res = simulate_continuous(ss, nl, SinusoidForcing(), t_span=5.0, h=1e-3,
                                  r1=SinusoidForcing(amp=1.0, freq=1.0))
        t = res.times
        want = 0.5 * (np.sin(t) - np.cos(t) + np.exp(-t))
        assert float(np.max(np.abs(res.y1 - want))) < 1e-10

    def test_times_are_poststep(self):
        ss = StateSpaceRealization(
            A=np.array([[-1.0]]), B=np.array([1.0]), C=np.array([1.0]),
            D=0.0, domain="s")
        res = simulate_continuous(ss, NonlinearitySpec("zero"), SinusoidForcing(),
                                  t_span=0.01, h=1e-3)
        assert res.times == pytest.approx(1e-3 * np.arange(1, 11))

    def test_record_window(self):
        ss = StateSpaceRealization(
            A=np.array([[-1.0]]), B=np.array([1.0]), C=np.array([1.0]),
            D=0.0, domain="s")
        res = simulate_continuous(ss, NonlinearitySpec("zero"), SinusoidForcing(),
                                  t_span=1.0, h=1e-3, record_from_time=0.5)
        assert len(res.y1) == 500
        assert res.times[0] == pytest.approx(0.501)

    def test_record_every(self):
        ss = StateSpaceRealization(
            A=np.array([[-1.0]]), B=np.array([1.0]), C=np.array([1.0]),
            D=0.0, domain="s")
        res = simulate_continuous(ss, NonlinearitySpec("zero"), SinusoidForcing(),
                                  t_span=1.0, h=1e-3, record_every=10)
        assert len(res.y1) == 100

    def test_gain_table_rejected(self):
        ss = StateSpaceRealization(
            A=np.array([[-1.0]]), B=np.array([1.0]), C=np.array([1.0]),
            D=0.0, domain="s")
        nl = NonlinearitySpec("gain_table", gains=(1.0, 2.0))
        with pytest.raises(ConfigError):
            simulate_continuous(ss, nl, SinusoidForcing(), t_span=0.1)

    def test_domain_mismatch(self):
        with pytest.raises(ConfigError):
            simulate_continuous(bench_ss(0.7), NonlinearitySpec("zero"),
                                SinusoidForcing(), t_span=0.1)


class TestLyapunov:
    def test_linear_contraction_rate(self):
        # for x+ = 0.5 x the separation halves every step: exponent ln(1/2)
        ss = StateSpaceRealization(
            A=np.array([[0.5, 0.0], [0.0, 0.5]]), B=np.array([1.0, 0.0]),
            C=np.array([1.0, 0.0]), D=0.0, domain="z")
        lam = lyapunov_exponent(ss, NonlinearitySpec("zero"), (1.0,), 5000,
                                discard=10)
        assert lam == pytest.approx(math.log(0.5), abs=1e-9)

    def test_chaotic_exponent_positive(self):
        lam = lyapunov_exponent(bench_ss(0.9), NonlinearitySpec("deadzone", width=0.2),
                                R2, 100_000, discard=1000)
        assert lam == pytest.approx(0.0123, abs=2e-3)
        assert lam > 0

    def test_stable_cycle_exponent_negative(self):
        lam = lyapunov_exponent(bench_ss(0.7), NonlinearitySpec("deadzone", width=0.2),
                                R2, 50_000, discard=1000)
        assert lam < 0

    def test_degenerate_separation(self):
        ss = StateSpaceRealization(
            A=np.zeros((2, 2)), B=np.array([0.0, 0.0]),
            C=np.array([1.0, 0.0]), D=0.0, domain="z")
        with pytest.raises(DegenerateSeparation):
            lyapunov_exponent(ss, NonlinearitySpec("zero"), (0.0,), 100, discard=0)


class TestPeriodDetection:
    def test_exact_multiple(self):
        base = 4
        one = np.array([0.0, 1.0, 0.0, -1.0, 0.5, 1.0, 0.0, -1.0, -0.5, 1.0, 0.0, -1.0])
        y = np.tile(one, 50)  # period 12 = 3 * base
        det = detect_period(y, base, m_max=8)
        assert det.multiple == 3
        assert det.periodic

    def test_smallest_multiple_wins(self):
        y = np.tile(np.array([1.0, -1.0, 1.0, -1.0]), 100)
        det = detect_period(y, 2, m_max=8)
        assert det.multiple == 1

    def test_aperiodic(self):
        rng = np.random.default_rng(7)
        det = detect_period(rng.normal(size=4000), 5, m_max=16)
        assert det.multiple is None
        assert not det.periodic

    def test_window_too_short(self):
        with pytest.raises(WindowTooShort):
            detect_period(np.zeros(5), 5, m_max=4)

    def test_tolerance_respected(self):
        one = np.array([0.0, 1.0, 0.0, -1.0])
        y = np.tile(one, 100) + 1e-4
        y[::8] += 2e-3  # break periodicity at base but not at 2*base
        det_tight = detect_period(y, 4, m_max=4, tol=1e-6)
        det_loose = detect_period(y, 4, m_max=4, tol=1e-2)
        assert det_tight.multiple == 2
        assert det_loose.multiple == 1


class TestPowerSeminorms:
    def test_periodic_rms(self):
        y = np.tile(np.array(R2), 40)
        want = math.sqrt(np.mean(np.square(R2)))
        assert power_seminorm_periodic(y, 5) == pytest.approx(want, abs=1e-12)

    def test_periodic_ignores_partial_period(self):
        y = np.tile(np.array(R2), 40)
        assert power_seminorm_periodic(y[:-3], 5) == pytest.approx(
            power_seminorm_periodic(y, 5), abs=1e-12)

    def test_tail_settled_constant(self):
        y = np.ones(1000) * 2.0
        assert power_seminorm_tail(y) == pytest.approx(2.0, abs=1e-12)

    def test_tail_not_settled(self):
        y = np.linspace(0.0, 10.0, 1000) ** 2
        with pytest.raises(NotSettled):
            power_seminorm_tail(y)

    def test_tail_window_too_short(self):
        with pytest.raises(WindowTooShort):
            power_seminorm_tail(np.ones(4))

    def test_tail_mean(self):
        y = np.concatenate([np.zeros(750), np.ones(250)])
        assert tail_mean(y) == pytest.approx(1.0)


class TestDecomposition:
    def test_pure_periodic(self):
        y = np.tile(np.array(R2), 200)
        dec = decompose_periodic(y, 5)
        assert dec.periodic_power == pytest.approx(power_seminorm_periodic(y, 5))
        assert dec.residual_power == pytest.approx(0.0, abs=1e-12)

    def test_periodic_plus_noise(self):
        rng = np.random.default_rng(3)
        base = np.tile(np.array(R2), 400)
        noise = 0.01 * rng.normal(size=base.size)
        dec = decompose_periodic(base + noise, 5)
        assert dec.periodic_power == pytest.approx(
            power_seminorm_periodic(base, 5), abs=1e-3)
        assert dec.residual_power == pytest.approx(0.01, rel=0.2)

    def test_window_too_short(self):
        with pytest.raises(WindowTooShort):
            decompose_periodic(np.zeros(400), 5)  # only 80 periods


class TestSpectrum:
    def test_pure_tone_peak(self):
        n = 64
        y = 3.0 * np.cos(2.0 * math.pi * 8 * np.arange(n) / n)
        sp = spectrum(y)
        assert int(np.argmax(sp.magnitudes)) == 8
        assert sp.magnitudes[8] == pytest.approx(3.0 * n / 2.0, rel=1e-12)
        assert sp.frequencies[8] == pytest.approx(8.0 / n)

    def test_parseval(self):
        rng = np.random.default_rng(11)
        sp = spectrum(rng.normal(size=256))
        assert sp.parseval_residual < 1e-9

    def test_power_of_two_required(self):
        with pytest.raises(LengthNotPowerOfTwo):
            spectrum(np.zeros(48))

    def test_bins_property(self):
        sp = spectrum(np.zeros(16))
        assert sp.bins.tolist() == list(range(9))
