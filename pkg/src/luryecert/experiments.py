"""Named, reproducible experiments with frozen expected values.

Each experiment is hermetic: fixed systems, fixed horizons, fixed seeds,
and tolerances carried in the registry rows rather than buried in code.
Provenance tags: "paper" rows reproduce published numbers, "derived" rows
pin independently computed reference values, "trivial" rows check
structural facts. Reports are plain data and byte-identical on repeat.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .analysis import (
    all_period_test,
    build_grid,
    gain_bound,
    rational_phase_limit,
    suitability,
)
from .errors import UnknownExperiment
from .lti import (
    RationalTransferFunction,
    StateSpaceRealization,
    to_state_space,
)
from .multipliers import TapMultiplier, identity_multiplier
from .simulation import (
    NonlinearitySpec,
    SinusoidForcing,
    decompose_periodic,
    detect_period,
    lyapunov_exponent,
    power_seminorm_periodic,
    simulate_continuous,
    simulate_discrete,
    spectrum,
)

PAPER = "paper"
DERIVED = "derived"
TRIVIAL = "trivial"


@dataclass(frozen=True)
class ReportRow:
    quantity: str
    value: object
    passed: bool
    provenance: str
    expected: object = None
    tol: float | None = None
    expected_fail: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        d = {
            "quantity": self.quantity,
            "value": self.value,
            "passed": self.passed,
            "provenance": self.provenance,
        }
        if self.expected is not None:
            d["expected"] = self.expected
        if self.tol is not None:
            d["tol"] = self.tol
        if self.expected_fail:
            d["expected_fail"] = True
        if self.note:
            d["note"] = self.note
        return d


@dataclass(frozen=True)
class ExperimentReport:
    name: str
    parameters: dict
    rows: tuple[ReportRow, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed or r.expected_fail for r in self.rows)

    def row(self, quantity: str) -> ReportRow:
        for r in self.rows:
            if r.quantity == quantity:
                return r
        raise KeyError(quantity)

    def to_dict(self) -> dict:
        return {
            "experiment": self.name,
            "parameters": self.parameters,
            "passed": self.passed,
            "rows": [r.to_dict() for r in self.rows],
        }


def _approx(quantity: str, value: float, expected: float, tol: float,
            provenance: str, note: str = "", expected_fail: bool = False) -> ReportRow:
    return ReportRow(
        quantity=quantity, value=float(value), expected=float(expected),
        tol=float(tol), provenance=provenance,
        passed=abs(float(value) - float(expected)) <= float(tol),
        note=note, expected_fail=expected_fail,
    )


def _claim(quantity: str, value, expected, provenance: str, note: str = "",
           expected_fail: bool = False) -> ReportRow:
    return ReportRow(
        quantity=quantity, value=value, expected=expected,
        provenance=provenance, passed=value == expected, note=note,
        expected_fail=expected_fail,
    )


def _below(quantity: str, value: float, threshold: float, provenance: str,
           note: str = "", expected_fail: bool = False) -> ReportRow:
    return ReportRow(
        quantity=quantity, value=float(value), expected=f"< {threshold:g}",
        tol=None, provenance=provenance, passed=float(value) < threshold,
        note=note, expected_fail=expected_fail,
    )


# --- shared systems ---

def fromion_tf(g: float) -> RationalTransferFunction:
    """Resonant third-order lag: g / ((s^2 + 0.1 s + 1)(s + 100))."""
    return RationalTransferFunction("s", (1.0,), (1.0, 100.1, 11.0, 100.0), g)


def fromion_ss(g: float) -> StateSpaceRealization:
    return to_state_space(fromion_tf(g))


def benchmark_tf(g: float) -> RationalTransferFunction:
    """Second-order discrete benchmark: g (2 z + 0.92) / (z (z - 0.5))."""
    return RationalTransferFunction("z", (2.0, 0.92), (1.0, -0.5, 0.0), g)


def benchmark_printed_ss(g: float) -> StateSpaceRealization:
    """The realization the experiments are pinned to (gain folded into B)."""
    return StateSpaceRealization(
        A=np.array([[0.5, 0.0], [1.0, 0.0]]),
        B=g * np.array([2.0, 0.0]),
        C=np.array([1.0, 0.46]),
        D=0.0,
        domain="z",
    )


R2_TABLE = (1.0, 0.6, -0.6, -1.0, 0.0)
BENCH_DEADZONE = NonlinearitySpec("deadzone", width=0.2)
FROMION_FORCING = SinusoidForcing(amp=1.0, freq=2.0)
RK4_STEP = 1e-3


# --- experiments ---

def _exp_table2_bounds() -> ExperimentReport:
    cases = [
        (0.6, ((1.0, 0.68),), 3.76),
        (0.7, ((1.0, 0.91),), 5.73),
        (0.8, ((1.0, 0.99),), 10.96),
        (0.9, ((1.0, 0.99),), 121.28),
        (0.6, ((-1.0, -0.57),), 3.39),
        (0.7, ((-1.0, -0.64),), 4.69),
        (0.8, ((-1.0, -0.72),), 7.07),
        (0.9, ((-1.0, -0.79),), 12.42),
        (1.0, ((-1.0, -0.87),), 31.74),
    ]
    rows = []
    for g, taps, expected in cases:
        tf = benchmark_tf(g)
        mult = TapMultiplier("z", taps)
        res = gain_bound(tf, mult, k=1.0, channel="r2->y2")
        side = "causal" if taps[0][0] > 0 else "anticausal"
        rows.append(_approx(
            f"bound[g={g:g},{side},c={abs(taps[0][1]):g}]",
            res.bound, expected, 0.01, PAPER,
        ))
    return ExperimentReport(
        name="table2-bounds",
        parameters={
            "channel": "r2->y2", "k": 1.0, "grid": "4096 uniform on [0, pi]",
            "refine": "golden section, 3 iterations",
        },
        rows=tuple(rows),
    )


def _exp_circle_threshold() -> ExperimentReport:
    ident = identity_multiplier("s")

    def suitable(g: float) -> bool:
        return suitability(fromion_tf(g), ident, k=1.0).suitable

    lo, hi = 1.0, 100.0
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if suitable(mid):
            lo = mid
        else:
            hi = mid
    thr = 0.5 * (lo + hi)
    rows = [
        _approx("circle-threshold", thr, 20.77, 0.01, PAPER,
                note="largest gain with a positive identity-multiplier margin"),
        _approx("circle-threshold-fine", thr, 20.7727, 1e-3, DERIVED),
        _claim("suitable-below-threshold", suitable(thr - 0.01), True, TRIVIAL),
        _claim("unsuitable-above-threshold", suitable(thr + 0.01), False, TRIVIAL),
    ]
    return ExperimentReport(
        name="circle-threshold-fromion",
        parameters={"k": 1.0, "bisection": "[1, 100], 40 iterations"},
        rows=tuple(rows),
    )


def _exp_altshuller_threshold() -> ExperimentReport:
    rows = []

    # gain threshold where the rational phase test first finds a witness
    def witness(g: float) -> bool:
        return rational_phase_limit(fromion_tf(g), math.pi, k=1.0).witness

    lo, hi = 50.0, 100.0
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if witness(mid):
            hi = mid
        else:
            lo = mid
    thr = 0.5 * (lo + hi)
    first = rational_phase_limit(fromion_tf(thr + 0.01), math.pi, k=1.0).witnesses[0]
    rows.append(_approx("rational-witness-threshold", thr, 73.37, 0.01, PAPER,
                        note="no period-pi multiplier can exist above this gain"))
    rows.append(_approx("rational-witness-threshold-fine", thr, 73.3684, 1e-3, DERIVED))
    rows.append(_claim("binding-pair", [first.a, first.b], [3, 5], DERIVED))
    rows.append(_approx("binding-frequency", first.w, 1.2, 1e-9, DERIVED))

    # every-period crossing frequency at g = 50
    tf50 = fromion_tf(50.0)
    grid = build_grid(tf50, k=1.0)
    ap = all_period_test(tf50, k=1.0, grid=grid)
    rows.append(_claim("all-period-fails-at-g50", ap.passes, False, PAPER))

    def phase_excess(w: float) -> float:
        from .lti import eval_frequency_response
        v = complex(eval_frequency_response(tf50, w)) + 1.0
        return abs(math.atan2(v.imag, v.real)) - math.pi / 2.0

    pts = grid.points
    vals = np.array([phase_excess(float(w)) for w in pts[pts < 2.0]])
    idx = int(np.argmax(vals > 0.0))
    lo_w, hi_w = float(pts[idx - 1]), float(pts[idx])
    for _ in range(50):
        mid = 0.5 * (lo_w + hi_w)
        if phase_excess(mid) > 0.0:
            hi_w = mid
        else:
            lo_w = mid
    crossing = 0.5 * (lo_w + hi_w)
    rows.append(_approx("all-period-crossing-frequency", crossing, 1.01, 0.01, PAPER))
    rows.append(_approx("all-period-crossing-fine", crossing, 1.01005, 1e-4, DERIVED))
    rows.append(_claim(
        "all-period-passes-at-g20",
        all_period_test(fromion_tf(20.0), k=1.0).passes, True, PAPER,
    ))

    # delay-band suitability at g = 50: offsets 2 theta pi, coefficient 0.82
    g50 = fromion_tf(50.0)
    for theta_c in range(100, 109):
        theta = theta_c / 100.0
        mult = TapMultiplier("s", ((2.0 * theta * math.pi, 0.82),))
        s = suitability(g50, mult, k=1.0, grid=grid)
        rows.append(ReportRow(
            quantity=f"band-suitable[theta={theta:.2f}]",
            value=round(s.margin, 6), expected=True, provenance=PAPER,
            passed=s.suitable, note="value is the margin",
        ))
    for theta_c in (99, 109):
        theta = theta_c / 100.0
        mult = TapMultiplier("s", ((2.0 * theta * math.pi, 0.82),))
        s = suitability(g50, mult, k=1.0, grid=grid)
        rows.append(ReportRow(
            quantity=f"band-unsuitable[theta={theta:.2f}]",
            value=round(s.margin, 6), expected=False, provenance=DERIVED,
            passed=not s.suitable, note="value is the margin",
        ))
    return ExperimentReport(
        name="altshuller-threshold-fromion",
        parameters={
            "k": 1.0, "period": "pi", "band-coefficient": 0.82,
            "threshold-bisection": "[50, 100], 40 iterations",
        },
        rows=tuple(rows),
    )


def _exp_g07_steady_state() -> ExperimentReport:
    ss = benchmark_printed_ss(0.7)
    res = simulate_discrete(ss, BENCH_DEADZONE, R2_TABLE, 2000)
    tail = res.y2[-5:]
    paper_cycle = (0.2282, -0.2861, -0.6895, 0.0, 0.7464)
    rows = [
        _approx(f"cycle[phase={i}]", tail[i], paper_cycle[i], 1e-4, PAPER)
        for i in range(5)
    ]
    r2_power = power_seminorm_periodic(np.asarray(R2_TABLE), 5)
    y2_power = power_seminorm_periodic(res.y2[-500:], 5)
    rows += [
        _approx("r2-power", r2_power, 0.7376, 1e-4, PAPER),
        _approx("r2-power-fine", r2_power, 0.737563556583431, 1e-12, DERIVED),
        _approx("y2-power", y2_power, 0.4830, 1e-4, PAPER),
        _approx("y2-power-fine", y2_power, 0.483006382823509, 1e-9, DERIVED),
        _below("power-ratio-vs-certificate", y2_power / r2_power, 5.73, TRIVIAL,
               note="steady-state gain must respect the certified bound"),
    ]
    return ExperimentReport(
        name="g07-steady-state",
        parameters={
            "g": 0.7, "width": 0.2, "r2": list(R2_TABLE), "x0": [0.0, 0.0],
            "horizon": 2000, "realization": "printed (gain folded into B)",
        },
        rows=tuple(rows),
    )


def _exp_g09_chaos() -> ExperimentReport:
    ss = benchmark_printed_ss(0.9)
    lam = lyapunov_exponent(ss, BENCH_DEADZONE, R2_TABLE, 1_000_000, discard=1000)
    rows = [
        _approx("lyapunov", lam, 0.012, 0.003, PAPER,
                note="1e6 steps, 1000 discarded, separation 1e-8"),
        _approx("lyapunov-fine", lam, 0.012279, 5e-5, DERIVED),
    ]
    sim = simulate_discrete(ss, BENCH_DEADZONE, R2_TABLE, 1_001_000)
    y = sim.y2[1000:]
    det = detect_period(y, 5, m_max=64, tol=1e-6)
    rows.append(_claim("aperiodic-up-to-m64", det.multiple is None, True, PAPER,
                       note=f"best shift residual {det.residual:.4g}"))

    sp = spectrum(y[:65536])
    mags = sp.magnitudes
    n = sp.n_samples
    peak = int(np.argmax(mags[1:])) + 1
    comb = sorted({int(round(m * n / 40)) + d for m in range(1, 21) for d in (-1, 0, 1)})
    comb_set = set(comb)
    rows.append(_claim("peak-on-period40-comb", peak in comb_set, True, TRIVIAL,
                       note=f"peak bin {peak}"))
    nonforcing = [
        (m, float(mags[int(round(m * n / 40))]))
        for m in range(1, 21) if m % 8 != 0
    ]
    m_best, mag_best = max(nonforcing, key=lambda t: t[1])
    share = mag_best / float(mags[peak])
    rows.append(ReportRow(
        quantity="period40-line-share", value=round(share, 4), expected=">= 0.1",
        provenance=PAPER, passed=share >= 0.1,
        note=f"strongest comb line off the forcing harmonics (m={m_best})",
    ))
    off = np.array([mags[kk] for kk in range(10, n // 2) if kk not in comb_set])
    floor = float(np.median(off))
    rows.append(ReportRow(
        quantity="broadband-floor", value=round(floor, 4), expected="> 0.05",
        provenance=PAPER, passed=floor > 0.05,
        note="median off-comb magnitude; exactly periodic signals give ~0",
    ))

    dec = decompose_periodic(y, 40)
    rows += [
        _approx("periodic-part-power", dec.periodic_power, 0.41, 5e-3, PAPER),
        _approx("periodic-part-power-fine", dec.periodic_power, 0.411489, 5e-6, DERIVED),
        _approx("residual-part-power", dec.residual_power, 5.1e-4, 5e-6, PAPER),
        _approx("residual-part-power-fine", dec.residual_power, 5.106578e-4, 1e-9, DERIVED),
    ]
    return ExperimentReport(
        name="g09-chaos",
        parameters={
            "g": 0.9, "width": 0.2, "r2": list(R2_TABLE), "x0": [0.0, 0.0],
            "horizon": 1_001_000, "discard": 1000, "fft-window": 65536,
            "realization": "printed (gain folded into B)",
        },
        rows=tuple(rows),
    )


def _exp_g07_uniqueness() -> ExperimentReport:
    tf = benchmark_tf(0.7)
    mult = TapMultiplier("z", ((5.0, 0.16), (-10.0, 0.04)))
    s = suitability(tf, mult, k=1.0)
    rows = [
        _claim("lattice-compatible-period5",
               all(off % 5 == 0 for off, _ in mult.taps), True, TRIVIAL),
        _claim("suitable", s.suitable, True, PAPER,
               note="certificate implies a unique steady response"),
        _approx("margin", s.margin, 0.003501, 1e-4, DERIVED),
    ]
    ss = benchmark_printed_ss(0.7)
    ref = simulate_discrete(ss, BENCH_DEADZONE, R2_TABLE, 2000).y2[-5:]
    rng = np.random.default_rng(20250816)
    worst = 0.0
    for _ in range(20):
        x0 = rng.uniform(-50.0, 50.0, size=2)
        cyc = simulate_discrete(ss, BENCH_DEADZONE, R2_TABLE, 2000, x0=x0).y2[-5:]
        worst = max(worst, float(np.max(np.abs(cyc - ref))))
    rows.append(ReportRow(
        quantity="basin-worst-deviation", value=worst, expected="<= 1e-8",
        provenance=PAPER, passed=worst <= 1e-8,
        note="20 seeded initial states all reach the same 5-cycle",
    ))
    return ExperimentReport(
        name="g07-attractor-uniqueness",
        parameters={
            "g": 0.7, "k": 1.0, "taps": [[5, 0.16], [-10, 0.04]],
            "seed": 20250816, "x0-range": [-50, 50], "horizon": 2000,
        },
        rows=tuple(rows),
    )


_FROMION_SEED_GRID: list[list[float]] = [[0.0, 0.0, 0.0]]
for _i in range(3):
    for _sgn in (1.0, -1.0):
        for _s in (1.0, 10.0, 100.0):
            _e = [0.0, 0.0, 0.0]
            _e[_i] = _sgn * _s
            _FROMION_SEED_GRID.append(_e)


def _exp_fromion_attractors() -> ExperimentReport:
    ss = fromion_ss(909.0)
    sat = NonlinearitySpec("saturation", limit=1.0)
    base = round(math.pi / RK4_STEP)
    burn = 636 * math.pi
    span = burn + 4 * math.pi
    clusters: dict[tuple[bool, float], list[int]] = {}
    period_ok = True
    worst_resid = 0.0
    stats = []
    for i, x0 in enumerate(_FROMION_SEED_GRID):
        r = simulate_continuous(ss, sat, FROMION_FORCING, t_span=span, h=RK4_STEP,
                                x0=np.array(x0), record_from_time=burn)
        amp = float(r.y2.max() - r.y2.min())
        peak_u2 = float(np.abs(r.u2).max())
        det = detect_period(r.y2, base, m_max=1, tol=2e-2)
        period_ok = period_ok and det.multiple == 1
        worst_resid = max(worst_resid, det.residual)
        key = (peak_u2 >= 1.0, round(amp, 1))
        clusters.setdefault(key, []).append(i)
        stats.append((amp, peak_u2))
    linear = [s for s in stats if s[1] < 1.0]
    clipped = [s for s in stats if s[1] >= 1.0]
    rows = [
        ReportRow(
            quantity="distinct-period-pi-attractors", value=len(clusters),
            expected=">= 2", provenance=PAPER, passed=len(clusters) >= 2,
            note="clustered by saturation contact and amplitude",
        ),
        _claim("all-seeds-period-pi", period_ok, True, PAPER,
               note=f"worst shift residual {worst_resid:.4g} (tolerance 2e-2)"),
        _claim("no-contact-attractor-exists", len(linear) >= 1, True, PAPER,
               note="one attractor never touches the saturation bounds"),
        _claim("clipped-attractor-exists", len(clipped) >= 1, True, PAPER),
    ]
    if linear:
        rows.append(_approx("no-contact-amplitude", linear[0][0], 0.9872, 1e-2, DERIVED,
                            note="peak-to-peak of y2 vs the shooting-method orbit"))
        rows.append(_approx("no-contact-peak-u2", linear[0][1], 0.4937, 1e-2, DERIVED))
    if clipped:
        rows.append(_approx("clipped-amplitude", clipped[0][0], 2.0, 1e-2, DERIVED))
        rows.append(_approx("clipped-peak-u2", clipped[0][1], 4.7191, 1e-2, DERIVED))
    return ExperimentReport(
        name="fromion-attractors",
        parameters={
            "g": 909.0, "nonlinearity": "saturation(1)", "h": RK4_STEP,
            "burn": "636 pi", "window": "4 pi",
            "seeds": "origin plus +/- {1,10,100} along each axis (19 states)",
        },
        rows=tuple(rows),
    )


def _exp_fromion_subharmonic() -> ExperimentReport:
    ss = fromion_ss(909.0)
    dz = NonlinearitySpec("deadzone", width=0.5)
    base = round(math.pi / RK4_STEP)
    burn = 1590 * math.pi
    span = burn + 8 * math.pi
    runs = {}
    for label, x0 in (
        ("origin", [0.0, 0.0, 0.0]),
        ("minus-e2", [0.0, -1.0, 0.0]),
        ("plus-e3", [0.0, 0.0, 1.0]),
    ):
        r = simulate_continuous(ss, dz, FROMION_FORCING, t_span=span, h=RK4_STEP,
                                x0=np.array(x0), record_from_time=burn)
        runs[label] = r.y2
    rows = []
    det0 = detect_period(runs["origin"], base, m_max=3, tol=2e-2)
    rows.append(_claim("origin-period-multiple", det0.multiple, 1, PAPER,
                       note=f"residual {det0.residual:.4g}"))
    amp0 = float(runs["origin"].max() - runs["origin"].min())
    rows.append(_approx("origin-amplitude", amp0, 1.9390, 1e-2, DERIVED))
    for label in ("minus-e2", "plus-e3"):
        det = detect_period(runs[label], base, m_max=3, tol=2e-2)
        rows.append(_claim(f"{label}-period-multiple", det.multiple, 3, PAPER,
                           note=f"residual {det.residual:.4g}; a third-subharmonic orbit"))
        amp = float(runs[label].max() - runs[label].min())
        rows.append(_approx(f"{label}-amplitude", amp, 3.580, 1e-2, DERIVED))
        rows.append(_approx(f"{label}-peak", float(np.abs(runs[label]).max()),
                            1.799, 1e-2, DERIVED))
    n3 = round(3 * math.pi / RK4_STEP)
    ya = runs["minus-e2"][-n3:]
    yb = runs["plus-e3"][-n3:]
    amp = float(ya.max() - ya.min())
    dist = float(np.max(np.abs(ya - yb))) / amp
    rows.append(ReportRow(
        quantity="subharmonics-distinct", value=round(dist, 4), expected="> 0.1",
        provenance=DERIVED, passed=dist > 0.1,
        note="relative sup distance between the two recorded orbits",
    ))

    def relation_residual(frac: float) -> float:
        shift = int(round(frac * n3))
        return float(np.max(np.abs(yb + np.roll(ya, shift)))) / amp

    quarter = relation_residual(1.0 / 6.0)
    half = relation_residual(2.0 / 6.0)
    rows.append(ReportRow(
        quantity="pair-relation-quarter-period", value=round(quarter, 5),
        expected="< 0.01", provenance=DERIVED, passed=quarter < 0.01,
        note="y_b(t) = -y_a(t - pi/2); the sign-flip symmetry the pair satisfies",
    ))
    rows.append(ReportRow(
        quantity="pair-relation-half-period-as-printed", value=round(half, 5),
        expected="< 0.01", provenance=PAPER, passed=half < 0.01,
        expected_fail=True,
        note=(
            "published shift pi is incompatible with the forcing symmetry: "
            "y(t) -> -y(t - pi/2) maps solutions to solutions, a pi shift "
            "does not; the quarter-period row shows the attained symmetry"
        ),
    ))
    return ExperimentReport(
        name="fromion-subharmonic",
        parameters={
            "g": 909.0, "nonlinearity": "deadzone(0.5)", "h": RK4_STEP,
            "burn": "1590 pi", "window": "8 pi",
            "seeds": ["origin", "minus-e2", "plus-e3"],
        },
        rows=tuple(rows),
    )


REGISTRY: dict[str, Callable[[], ExperimentReport]] = {
    "table2-bounds": _exp_table2_bounds,
    "circle-threshold-fromion": _exp_circle_threshold,
    "altshuller-threshold-fromion": _exp_altshuller_threshold,
    "g07-steady-state": _exp_g07_steady_state,
    "g09-chaos": _exp_g09_chaos,
    "g07-attractor-uniqueness": _exp_g07_uniqueness,
    "fromion-attractors": _exp_fromion_attractors,
    "fromion-subharmonic": _exp_fromion_subharmonic,
}


def list_experiments() -> list[str]:
    return list(REGISTRY)


def run_experiment(name: str) -> ExperimentReport:
    try:
        fn = REGISTRY[name]
    except KeyError:
        known = ", ".join(REGISTRY)
        raise UnknownExperiment(f"unknown experiment {name!r}; known: {known}") from None
    return fn()
