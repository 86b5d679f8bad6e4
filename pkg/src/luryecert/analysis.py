"""Frequency-domain certification: suitability, gain bounds, phase tests.

Everything here works on a frequency grid plus a local golden-section
polish, so results are deterministic for a given grid density. Gain
bounds follow the closed-form table for the exogenous-input channels of
the feedback loop; suitability is the positivity margin that licenses
them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import linprog

from .errors import (
    ConfigError,
    DegenerateIndexSet,
    NegativeDiscriminant,
    NoFeasibleMultiplier,
    NonmonotoneNonlinearity,
    NotSuitable,
    RootFindingFailure,
)
from .lti import (
    CONTINUOUS,
    FrequencyGrid,
    RationalTransferFunction,
    default_grid,
    eval_frequency_response,
    refine_grid_by_phase,
    tf_plus_constant,
)
from .multipliers import (
    Multiplier,
    TapMultiplier,
    identity_multiplier,
    multiplier_response,
)

# strict-positivity tolerance for the suitability margin
EPS_TOL = 1e-6
# one-sided slack on phase-limit comparisons
PHASE_SLACK = 1e-9

CHANNELS = (
    "r1->u1",
    "r1->u2",
    "r1->y1",
    "r1->y2",
    "r2->u1",
    "r2->u2",
    "r2->y1",
    "r2->y2",
)

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_refine(
    f: Callable[[float], float], a: float, b: float, best: float, iters: int = 3
) -> float:
    """Polish a grid argmax inside [a, b]; never returns less than `best`."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return max(best, fc, fd)


def _target_inverse_gain(k: float) -> float:
    if k == math.inf:
        return 0.0
    if not (k > 0):
        raise ConfigError(f"sector gain k must be positive or inf, got {k!r}")
    return 1.0 / k


def build_grid(
    tf: RationalTransferFunction,
    k: float = math.inf,
    density: float = 1.0,
) -> FrequencyGrid:
    """Default grid for tf's domain, phase-refined against 1/k + G."""
    grid = default_grid(tf.domain, density)
    if tf.domain != CONTINUOUS:
        return grid
    target = tf_plus_constant(tf, _target_inverse_gain(k))
    resp = eval_frequency_response(target, grid.points)
    return refine_grid_by_phase(grid, resp)


@dataclass(frozen=True)
class SuitabilityResult:
    suitable: bool
    margin: float
    w_at_min: float
    k: float
    eps_tol: float
    grid_points: int

    def require(self) -> "SuitabilityResult":
        if not self.suitable:
            raise NotSuitable(
                f"multiplier is not suitable: margin {self.margin:.6g} "
                f"<= tolerance {self.eps_tol:g} (worst frequency {self.w_at_min:.6g})"
            )
        return self


def suitability(
    tf: RationalTransferFunction,
    mult: Multiplier,
    k: float = math.inf,
    grid: FrequencyGrid | None = None,
    eps_tol: float = EPS_TOL,
) -> SuitabilityResult:
    """min over the grid of Re{ M(w) (1/k + G(w)) }, strict positivity."""
    inv_k = _target_inverse_gain(k)
    if grid is None:
        grid = build_grid(tf, k)
    w = grid.points
    target = eval_frequency_response(tf, w) + inv_k
    mw = multiplier_response(mult, w)
    vals = np.real(mw * target)
    i = int(np.argmin(vals))
    margin = float(vals[i])
    return SuitabilityResult(
        suitable=margin > eps_tol,
        margin=margin,
        w_at_min=float(w[i]),
        k=k,
        eps_tol=eps_tol,
        grid_points=len(w),
    )


@dataclass(frozen=True)
class GainBoundResult:
    channel: str
    bound: float
    w_at_sup: float
    floor_active: bool
    k: float
    variant: str
    residual: float
    margin: float


def _channel_terms(
    channel: str,
    variant: str,
    inv_k: float,
    abs_m2: NDArray[np.float64],
    abs_g2: NDArray[np.float64],
    abs_mg2: NDArray[np.float64],
    re_m: NDArray[np.float64],
    sup_g2: float,
):
    """(numerator b, constant c, floor) for the channel's quadratic.

    Direct channels have c = 0 identically, so the quadratic collapses to
    b/d and the floor is 0.
    """
    if channel in ("r2->u1", "r2->y2"):
        return 1.0 + abs_m2, None, 0.0
    if channel == "r1->y2":
        return 1.0 + abs_mg2, None, 0.0
    if channel == "r2->y1":
        return abs_g2 + abs_m2, None, 0.0
    if channel == "r1->u1":
        return 1.0 + abs_mg2, 2.0 * re_m * inv_k, 1.0
    if channel in ("r1->u2", "r1->y1"):
        return abs_g2 * (1.0 + abs_m2), abs_g2 * 2.0 * re_m * inv_k, sup_g2
    if channel == "r2->u2":
        scale = 1.0 if variant == "printed" else 2.0
        return abs_g2 + abs_m2, scale * re_m * inv_k, 1.0
    raise ConfigError(f"unknown channel {channel!r}; expected one of {CHANNELS}")


def gain_bound(
    tf: RationalTransferFunction,
    mult: Multiplier,
    k: float = math.inf,
    channel: str = "r2->y2",
    grid: FrequencyGrid | None = None,
    variant: str = "printed",
    presuitability: SuitabilityResult | None = None,
    eps_tol: float = EPS_TOL,
) -> GainBoundResult:
    """Closed-form power-gain bound for one exogenous channel.

    Requires a passing suitability margin on the same grid; raises
    NotSuitable otherwise and NegativeDiscriminant if the quadratic for a
    floored channel loses its real root anywhere.
    """
    if variant not in ("printed", "eq21"):
        raise ConfigError(f"unknown bound variant {variant!r}")
    inv_k = _target_inverse_gain(k)
    if grid is None:
        grid = build_grid(tf, k)
    suit = presuitability if presuitability is not None else suitability(
        tf, mult, k, grid, eps_tol
    )
    suit.require()

    w = grid.points
    gw = eval_frequency_response(tf, w)
    mw = multiplier_response(mult, w)
    d = 2.0 * np.real(mw * (gw + inv_k))
    abs_m2 = np.abs(mw) ** 2
    abs_g2 = np.abs(gw) ** 2
    abs_mg2 = np.abs(mw * gw) ** 2
    re_m = np.real(mw)
    sup_g2 = float(np.max(abs_g2))

    b, c, floor = _channel_terms(
        channel, variant, inv_k, abs_m2, abs_g2, abs_mg2, re_m, sup_g2
    )

    def value_at(wp: float) -> float:
        g1 = complex(eval_frequency_response(tf, wp))
        m1 = complex(multiplier_response(mult, wp))
        d1 = 2.0 * (m1 * (g1 + inv_k)).real
        am2 = abs(m1) ** 2
        ag2 = abs(g1) ** 2
        amg2 = abs(m1 * g1) ** 2
        rm = m1.real
        b1, c1, _ = _channel_terms(channel, variant, inv_k, am2, ag2, amg2, rm, sup_g2)
        if c1 is None:
            return float(b1) / d1
        disc = b1 * b1 + 4.0 * d1 * c1
        if disc < 0.0:
            raise NegativeDiscriminant(
                f"channel {channel}: b^2 + 4ac = {disc:.6g} < 0 at w = {wp:.6g}"
            )
        return (b1 + math.sqrt(disc)) / (2.0 * d1)

    if c is None:
        vals = b / d
    else:
        disc = b * b + 4.0 * d * c
        bad = disc < 0.0
        if np.any(bad):
            wb = float(w[np.argmax(bad)])
            raise NegativeDiscriminant(
                f"channel {channel}: quadratic discriminant negative at w = {wb:.6g}"
            )
        vals = (b + np.sqrt(disc)) / (2.0 * d)

    i = int(np.argmax(vals))
    lo = w[max(i - 1, 0)]
    hi = w[min(i + 1, len(w) - 1)]
    sup = _golden_refine(value_at, float(lo), float(hi), float(vals[i]))

    # the grid sup must satisfy its own defining quadratic at the argmax
    d_i = float(d[i])
    b_i = float(b[i]) if np.ndim(b) else float(b)
    c_i = 0.0 if c is None else (float(c[i]) if np.ndim(c) else float(c))
    v_i = float(vals[i])
    residual = abs(d_i * v_i * v_i - b_i * v_i - c_i) / max(1.0, abs(b_i * v_i))

    floor_active = floor > sup
    bound = max(sup, floor)
    return GainBoundResult(
        channel=channel,
        bound=float(bound),
        w_at_sup=float(w[i]),
        floor_active=bool(floor_active),
        k=k,
        variant=variant,
        residual=float(residual),
        margin=suit.margin,
    )


def gain_bound_table(
    tf: RationalTransferFunction,
    mult: Multiplier,
    k: float = math.inf,
    grid: FrequencyGrid | None = None,
    variant: str = "printed",
) -> dict[str, GainBoundResult]:
    if grid is None:
        grid = build_grid(tf, k)
    suit = suitability(tf, mult, k, grid)
    return {
        ch: gain_bound(tf, mult, k, ch, grid, variant, presuitability=suit)
        for ch in CHANNELS
    }


# --- phase-limitation tests ---

@dataclass(frozen=True)
class PhaseGapResult:
    witness: bool
    w: float
    n: int
    gap: float
    phase_span: float
    period: float


def phase_gap_test(
    tf: RationalTransferFunction,
    period: float,
    n_max: int = 5,
    grid: FrequencyGrid | None = None,
) -> PhaseGapResult:
    """Look for |psi(w) - psi(w + 2 pi n / period)| > pi on unwrapped phase.

    A witness rules out every multiplier tuned to that period. Continuous
    domain only; the shifted frequency must stay inside the grid.
    """
    if tf.domain != CONTINUOUS:
        raise ConfigError("the phase-gap test is continuous-time only")
    if period <= 0:
        raise ConfigError("period must be positive")
    if grid is None:
        grid = default_grid(CONTINUOUS)
        grid = refine_grid_by_phase(grid, eval_frequency_response(tf, grid.points))
    w = grid.points
    psi = np.unwrap(np.angle(eval_frequency_response(tf, w)))
    span = float(np.max(psi) - np.min(psi))
    best_gap = 0.0
    best_w = float(w[0])
    best_n = 0
    for n in range(1, n_max + 1):
        shift = 2.0 * math.pi * n / period
        ok = w + shift <= w[-1]
        if not np.any(ok):
            continue
        psi_shift = np.interp(w[ok] + shift, w, psi)
        gaps = np.abs(psi[ok] - psi_shift)
        j = int(np.argmax(gaps))
        if float(gaps[j]) > best_gap:
            best_gap = float(gaps[j])
            best_w = float(w[ok][j])
            best_n = n
    return PhaseGapResult(
        witness=best_gap > math.pi + PHASE_SLACK,
        w=best_w,
        n=best_n,
        gap=best_gap,
        phase_span=span,
        period=period,
    )


@dataclass(frozen=True)
class LpFeasibilityResult:
    feasible: bool
    frequencies: tuple[float, ...]
    lambdas: tuple[float, ...] | None
    scaling: str
    status: int


def lp_feasibility_test(
    tf: RationalTransferFunction,
    period: float,
    beta: int,
    p_signs: Sequence[int],
    n_indices: Sequence[int],
    k: float = math.inf,
    l_max: int = 50,
    scaling: str = "printed",
) -> LpFeasibilityResult:
    """Separating-weight LP over the frequency index set, target 1/k + G.

    Frequencies are w_r = (-1)^{p_r} r pi / (period beta) + 2 n_r pi / period
    for r = 1..beta-1. `scaling` picks the tap-offset unit in the
    constraint exponent: "printed" uses l, "lattice" uses l*period.
    Feasibility of the LP is the witness.
    """
    if tf.domain != CONTINUOUS:
        raise ConfigError("the LP phase test is continuous-time only")
    inv_k = _target_inverse_gain(k)
    if beta < 2:
        raise ConfigError("beta must be at least 2")
    if len(p_signs) != beta - 1 or len(n_indices) != beta - 1:
        raise ConfigError("p_signs and n_indices must have length beta - 1")
    if scaling not in ("printed", "lattice"):
        raise ConfigError(f"unknown exponent scaling {scaling!r}")
    freqs = []
    for r in range(1, beta):
        p = int(p_signs[r - 1])
        n = int(n_indices[r - 1])
        if p not in (0, 1):
            raise ConfigError(f"p_signs entries must be 0 or 1, got {p}")
        if (p == 0 and n < 0) or (p == 1 and n < 1):
            raise DegenerateIndexSet(
                f"index r={r}: p={p} requires n >= {1 if p else 0}, got {n}"
            )
        freqs.append(((-1.0) ** p) * r * math.pi / (period * beta) + 2.0 * n * math.pi / period)
    warr = np.asarray(freqs)
    gvals = eval_frequency_response(tf, warr) + inv_k
    unit = 1.0 if scaling == "printed" else period
    rows = []
    for l in range(-l_max, l_max + 1):
        if l == 0:
            continue
        rows.append(np.real(gvals * (1.0 - np.exp(-1j * warr * l * unit))))
    a_ub = np.asarray(rows)
    b_ub = np.zeros(a_ub.shape[0])
    a_eq = np.ones((1, beta - 1))
    res = linprog(
        c=np.zeros(beta - 1),
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=np.array([1.0]),
        bounds=[(0.0, None)] * (beta - 1),
        method="highs",
    )
    lambdas = tuple(float(x) for x in res.x) if res.status == 0 else None
    return LpFeasibilityResult(
        feasible=res.status == 0,
        frequencies=tuple(float(v) for v in warr),
        lambdas=lambdas,
        scaling=scaling,
        status=int(res.status),
    )


@dataclass(frozen=True)
class RationalPhaseWitness:
    a: int
    b: int
    w: float
    phase: float
    threshold: float


@dataclass(frozen=True)
class RationalPhaseResult:
    witness: bool
    witnesses: tuple[RationalPhaseWitness, ...]
    k: float
    period: float


def rational_phase_limit(
    tf: RationalTransferFunction,
    period: float,
    k: float = math.inf,
    b_max: int = 12,
    a_max: int = 12,
) -> RationalPhaseResult:
    """Phase bound |angle(1/k + G)| <= pi (1 - 1/b) at w = (a/b)(2 pi / period).

    Checks every coprime pair with 2 <= b <= b_max, 1 <= a <= a_max; in
    discrete time `period` is the sample count and only w <= pi is probed.
    Any exceedance is a witness against all period-compatible multipliers.
    """
    if period <= 0:
        raise ConfigError("period must be positive")
    inv_k = _target_inverse_gain(k)
    found = []
    for b in range(2, b_max + 1):
        for a in range(1, a_max + 1):
            if math.gcd(a, b) != 1:
                continue
            w = (a / b) * (2.0 * math.pi / period)
            if tf.domain != CONTINUOUS and w > math.pi:
                continue
            val = complex(eval_frequency_response(tf, w)) + inv_k
            phase = math.atan2(val.imag, val.real)
            threshold = math.pi * (1.0 - 1.0 / b)
            if abs(phase) > threshold + PHASE_SLACK:
                found.append(
                    RationalPhaseWitness(a=a, b=b, w=w, phase=phase, threshold=threshold)
                )
    found.sort(key=lambda wit: (wit.b, wit.a))
    return RationalPhaseResult(
        witness=bool(found), witnesses=tuple(found), k=k, period=period
    )


@dataclass(frozen=True)
class AllPeriodResult:
    passes: bool
    max_abs_phase: float
    w_at_max: float
    k: float


def all_period_test(
    tf: RationalTransferFunction,
    k: float = math.inf,
    grid: FrequencyGrid | None = None,
) -> AllPeriodResult:
    """|angle(1/k + G)| <= pi/2 everywhere: certifiable at every period."""
    inv_k = _target_inverse_gain(k)
    if grid is None:
        grid = build_grid(tf, k)
    w = grid.points
    vals = eval_frequency_response(tf, w) + inv_k
    phases = np.abs(np.arctan2(vals.imag, vals.real))
    i = int(np.argmax(phases))
    return AllPeriodResult(
        passes=float(phases[i]) <= math.pi / 2.0 + PHASE_SLACK,
        max_abs_phase=float(phases[i]),
        w_at_max=float(w[i]),
        k=k,
    )


# --- steady-state fixed point ---

def steady_state_output(
    q: Callable[[float], float],
    dc: float,
    r2_bar: float,
    tol: float = 1e-12,
    check_monotone: bool = True,
) -> float:
    """Solve ybar = q(r2_bar - dc * ybar) by bracketed bisection.

    Bisection rather than a derivative method because q may have flat
    segments (saturation, deadzone). The residual is driven below tol.
    """

    def f(y: float) -> float:
        return y - q(r2_bar - dc * y)

    lo, hi = -1.0, 1.0
    for _ in range(200):
        if f(lo) <= 0.0 <= f(hi):
            break
        lo *= 2.0
        hi *= 2.0
    else:
        raise RootFindingFailure("could not bracket the steady-state fixed point")
    if check_monotone:
        span_lo = min(r2_bar - dc * hi, r2_bar - dc * lo)
        span_hi = max(r2_bar - dc * hi, r2_bar - dc * lo)
        xs = np.linspace(span_lo, span_hi, 2048)
        qs = np.array([q(float(x)) for x in xs])
        drops = np.diff(qs)
        scale = max(1.0, float(np.max(np.abs(qs))))
        if np.any(drops < -1e-9 * scale):
            raise NonmonotoneNonlinearity(
                "steady-state map needs a monotone nonlinearity"
            )
    y = 0.5 * (lo + hi)
    for _ in range(300):
        y = 0.5 * (lo + hi)
        fy = f(y)
        if abs(fy) < tol:
            return y
        if fy < 0.0:
            lo = y
        else:
            hi = y
        if hi - lo < 1e-17 * max(1.0, abs(y)):
            break
    if abs(f(y)) < tol:
        return y
    raise RootFindingFailure(
        f"steady-state bisection stalled with residual {f(y):.3g}"
    )


# --- one-tap multiplier search ---

@dataclass(frozen=True)
class SearchResult:
    multiplier: TapMultiplier
    bound: float
    margin: float
    side: str
    channel: str
    candidates_checked: int


def _candidate_taps(side: str) -> list[tuple[str, tuple[tuple[float, float], ...]]]:
    out = []
    for i in range(100):
        c = i / 100.0
        if side in ("causal", "both"):
            out.append(("causal", ((1.0, c),)))
        if side in ("anticausal", "both"):
            out.append(("anticausal", ((-1.0, -c),)))
    return out


def search_multiplier(
    tf: RationalTransferFunction,
    k: float = math.inf,
    side: str = "both",
    channel: str = "r2->y2",
    grid: FrequencyGrid | None = None,
    variant: str = "printed",
) -> SearchResult:
    """Scan one-tap multipliers c/100 on the requested side(s).

    Candidates that pass suitability are ranked by the refined gain bound;
    ties go to the lexicographically smallest tap tuple. Raises
    NoFeasibleMultiplier when nothing passes.
    """
    if side not in ("causal", "anticausal", "both"):
        raise ConfigError(f"unknown search side {side!r}")
    if grid is None:
        grid = build_grid(tf, k)
    best: tuple[float, tuple[tuple[float, float], ...]] | None = None
    best_result: GainBoundResult | None = None
    checked = 0
    for cand_side, taps in _candidate_taps(side):
        checked += 1
        mult = TapMultiplier(tf.domain, taps)
        suit = suitability(tf, mult, k, grid)
        if not suit.suitable:
            continue
        res = gain_bound(
            tf, mult, k, channel, grid, variant, presuitability=suit
        )
        key = (res.bound, taps)
        if best is None or key < best:
            best = key
            best_result = res
            best_mult = mult
            best_side = cand_side
            best_margin = suit.margin
    if best is None or best_result is None:
        raise NoFeasibleMultiplier(
            f"no one-tap candidate on side {side!r} is suitable at k={k:g}"
        )
    return SearchResult(
        multiplier=best_mult,
        bound=best_result.bound,
        margin=best_margin,
        side=best_side,
        channel=channel,
        candidates_checked=checked,
    )
