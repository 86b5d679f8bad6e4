"""Noncausal FIR multipliers, class membership, and lattice counterexamples.

A tap multiplier is M(w) = 1 - sum_i c_i e^{-j w tau_i}. In discrete time
the offsets are integers and the same formula evaluates M(z) at z = e^{jw}.
Positive offsets are delays (causal side), negative offsets are advances.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigError, NotACounterexampleCandidate
from .lti import (
    CONTINUOUS,
    DISCRETE,
    RationalTransferFunction,
    _as_domain,
    eval_frequency_response,
)

CLASS_OZF = "ozf"
CLASS_ODD = "odd"
CLASS_ALTSHULLER = "altshuller"
CLASS_RATIONAL = "rational"

# strict coefficient-sum margin; an exact sum of 1 is rejected
SUM_SLACK = 1e-12
# relative tolerance for "offset is an integer multiple of the lattice"
LATTICE_REL_TOL = 1e-9


@dataclass(frozen=True)
class TapMultiplier:
    """M(w) = 1 - sum c_i e^{-j w tau_i}; empty taps give the identity."""

    domain: str
    taps: tuple[tuple[float, float], ...] = ()
    declared_class: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "domain", _as_domain(self.domain))
        taps = tuple((float(o), float(c)) for o, c in self.taps)
        for off, coeff in taps:
            if not (math.isfinite(off) and math.isfinite(coeff)):
                raise ConfigError("multiplier taps must be finite")
            if self.domain == DISCRETE and off != int(off):
                raise ConfigError(f"discrete multiplier offset {off!r} is not an integer")
        object.__setattr__(self, "taps", taps)

    @property
    def is_identity(self) -> bool:
        return all(c == 0.0 for _, c in self.taps)

    def to_dict(self) -> dict:
        d = {"domain": self.domain, "taps": [list(t) for t in self.taps]}
        if self.declared_class is not None:
            d["class"] = self.declared_class
        return d

    @staticmethod
    def from_dict(d: dict) -> "TapMultiplier":
        try:
            return TapMultiplier(
                d["domain"],
                tuple((o, c) for o, c in d.get("taps", [])),
                d.get("class"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad multiplier JSON: {exc}") from exc


def identity_multiplier(domain: str) -> TapMultiplier:
    return TapMultiplier(domain, ())


@dataclass(frozen=True)
class RationalMultiplier:
    """First-order lead (1 + a s)/(1 + b s); wider shapes are user-asserted."""

    tf: RationalTransferFunction
    user_asserted: bool = False

    def __post_init__(self) -> None:
        if self.tf.domain != CONTINUOUS:
            raise ConfigError("rational multipliers are continuous-time only")
        if not self.user_asserted and not _is_first_order_lead(self.tf):
            raise ConfigError(
                "rational multiplier is not a first-order lead (1+as)/(1+bs) with "
                "0 <= b < a; pass user_asserted=True to take responsibility for it"
            )

    @staticmethod
    def from_dict(d: dict) -> "RationalMultiplier":
        tf = RationalTransferFunction(
            d.get("domain", CONTINUOUS), d["num"], d["den"], d.get("g", 1.0)
        )
        return RationalMultiplier(tf, bool(d.get("user_asserted", False)))

    def to_dict(self) -> dict:
        out = self.tf.to_dict()
        out["class"] = CLASS_RATIONAL
        if self.user_asserted:
            out["user_asserted"] = True
        return out


def _is_first_order_lead(tf: RationalTransferFunction) -> bool:
    num, den = tf.num, tf.den
    if len(num) != 2 or len(den) != 2:
        return False
    if num[1] == 0.0 or den[1] == 0.0:
        return False
    a = num[0] / num[1]
    b = den[0] / den[1]
    return 0.0 <= b < a and tf.g * num[1] / den[1] > 0.0


Multiplier = TapMultiplier | RationalMultiplier


def multiplier_from_dict(d: dict) -> Multiplier:
    if d.get("class") == CLASS_RATIONAL or "num" in d:
        return RationalMultiplier.from_dict(d)
    return TapMultiplier.from_dict(d)


def multiplier_response(mult: Multiplier, w) -> complex | NDArray[np.complex128]:
    """M evaluated on the jw axis or unit circle."""
    if isinstance(mult, RationalMultiplier):
        return eval_frequency_response(mult.tf, w)
    scalar = np.isscalar(w)
    warr = np.atleast_1d(np.asarray(w, dtype=float))
    out = np.ones(len(warr), dtype=complex)
    for off, coeff in mult.taps:
        out -= coeff * np.exp(-1j * warr * off)
    return complex(out[0]) if scalar else out


@dataclass(frozen=True)
class MembershipResult:
    member: bool
    reason: str
    asserted: bool = False

    def __bool__(self) -> bool:
        return self.member


def _coeff_sum_strict(total: float) -> bool:
    return total < 1.0 - SUM_SLACK


def _offset_on_lattice(off: float, lattice: float) -> bool:
    ratio = off / lattice
    near = round(ratio)
    return near != 0 and abs(ratio - near) <= LATTICE_REL_TOL * max(1.0, abs(ratio))


def membership(mult: Multiplier, cls: str, lattice: float | None = None) -> MembershipResult:
    """Test class membership; reasons name the first violated condition."""
    if isinstance(mult, RationalMultiplier):
        if cls != CLASS_RATIONAL:
            return MembershipResult(False, f"rational multiplier is not a tap multiplier (class {cls})")
        if mult.user_asserted:
            return MembershipResult(True, "membership asserted by the user", asserted=True)
        return MembershipResult(True, "first-order lead with 0 <= b < a")
    taps = [(o, c) for o, c in mult.taps if c != 0.0]
    for off, _ in taps:
        if off == 0.0:
            return MembershipResult(False, "tap at zero offset changes the leading 1")
    if cls == CLASS_OZF:
        neg = [c for _, c in taps if c < 0.0]
        if neg:
            return MembershipResult(False, f"negative coefficient {neg[0]:g}")
        total = sum(c for _, c in taps)
        if not _coeff_sum_strict(total):
            return MembershipResult(False, f"non-strict coefficient sum {total:g}")
        return MembershipResult(True, f"nonnegative taps, sum {total:g} < 1")
    if cls == CLASS_ODD:
        total = sum(abs(c) for _, c in taps)
        if not _coeff_sum_strict(total):
            return MembershipResult(False, f"non-strict absolute sum {total:g}")
        return MembershipResult(True, f"absolute sum {total:g} < 1")
    if cls == CLASS_ALTSHULLER:
        if lattice is None or lattice <= 0:
            raise ConfigError("altshuller membership needs a positive lattice period")
        neg = [c for _, c in taps if c < 0.0]
        if neg:
            return MembershipResult(False, f"negative coefficient {neg[0]:g}")
        for off, _ in taps:
            if not _offset_on_lattice(off, lattice):
                return MembershipResult(
                    False, f"offset {off:g} is not a nonzero multiple of {lattice:g}"
                )
        total = sum(c for _, c in taps)
        if not _coeff_sum_strict(total):
            return MembershipResult(False, f"non-strict coefficient sum {total:g}")
        return MembershipResult(True, f"lattice taps, sum {total:g} < 1")
    raise ConfigError(f"unknown multiplier class {cls!r}")


def is_periodicity_compatible(mult: TapMultiplier, period: float) -> bool:
    """True when every active tap offset is a nonzero multiple of the period."""
    if period <= 0:
        raise ConfigError("period must be positive")
    return all(
        _offset_on_lattice(off, period) for off, c in mult.taps if c != 0.0
    )


# --- periodic time-domain application (used by the property suites) ---

def apply_to_periodic(
    mult: TapMultiplier,
    samples: NDArray[np.float64],
    period: float | None = None,
) -> NDArray[np.float64]:
    """(M u) sampled over one period, with periodic extension of u.

    Continuous multipliers need `period`; each offset must land on the
    sample lattice so the shift is an exact roll.
    """
    u = np.asarray(samples, dtype=float)
    n = len(u)
    out = u.copy()
    for off, coeff in mult.taps:
        if coeff == 0.0:
            continue
        if mult.domain == DISCRETE:
            shift = off
        else:
            if period is None or period <= 0:
                raise ConfigError("continuous application needs a positive period")
            steps = off * n / period
            shift = round(steps)
            if abs(steps - shift) > 1e-9 * max(1.0, abs(steps)):
                raise ConfigError(
                    f"offset {off:g} does not land on the {n}-sample lattice"
                )
        out -= coeff * np.roll(u, int(shift) % n)
    return out


def periodic_inner_product(
    u: NDArray[np.float64], v: NDArray[np.float64], period: float
) -> float:
    """Integral of u*v over one period (midpoint rule on aligned samples)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if len(u) != len(v):
        raise ConfigError("periodic inner product needs equal-length samples")
    return float(np.mean(u * v) * period)


# --- square-wave counterexample for off-lattice taps ---

@dataclass(frozen=True)
class CounterexampleResult:
    period: float
    delta: float
    inner_product: float
    numeric_inner_product: float
    verified: bool
    u_samples: NDArray[np.float64]
    y_samples: NDArray[np.float64]

    @property
    def gains(self) -> tuple[float, float]:
        return (1.0 + self.delta, 1.0 / (1.0 + self.delta))


def _square_wave(t: NDArray[np.float64], period: float, low: float, high: float) -> NDArray[np.float64]:
    return np.where((t % period) < period / 2.0, low, high)


def _closed_form_ip(taps: Sequence[tuple[float, float]], period: float, delta: float) -> float:
    total = period * (1.0 + delta)
    for off, coeff in taps:
        s = off % period
        m = min(s, period - s)
        total -= coeff * (period * (1.0 + delta) + m * delta * delta)
    return total


def build_counterexample(
    mult: TapMultiplier, period: float, n_samples: int = 1 << 14
) -> CounterexampleResult:
    """Period-T square-wave pair that makes <u, M y> negative.

    u is 1 then 1+delta over the two half-periods and y swaps the levels,
    so y = phi(u) for a monotone gain-switch nonlinearity. Only taps with
    a positive coefficient off the period lattice admit the construction;
    anything else raises NotACounterexampleCandidate.
    """
    if period <= 0:
        raise ConfigError("period must be positive")
    taps = [(o, c) for o, c in mult.taps if c != 0.0]
    best = 0.0
    for off, coeff in taps:
        if coeff <= 0.0 or _offset_on_lattice(off, period):
            continue
        s = off % period
        best = max(best, coeff * min(s, period - s))
    if best == 0.0:
        raise NotACounterexampleCandidate(
            "every positive tap sits on the period lattice; the lattice "
            "positivity bound applies and no square-wave counterexample exists"
        )
    # smallest level step (in tenths) that drives the dominant-tap bound negative
    d_star = (period + math.sqrt(period * period + 4.0 * best * period)) / (2.0 * best)
    delta = math.ceil(d_star * 10.0 - 1e-12) / 10.0
    if period * (1.0 + delta) - best * delta * delta >= 0.0:
        delta += 0.1
    closed = _closed_form_ip(taps, period, delta)

    t = (np.arange(n_samples) + 0.5) * (period / n_samples)
    u = _square_wave(t, period, 1.0, 1.0 + delta)
    y = _square_wave(t, period, 1.0 + delta, 1.0)
    my = y.copy()
    for off, coeff in taps:
        my -= coeff * _square_wave((t - off) % period, period, 1.0 + delta, 1.0)
    numeric = float(np.mean(u * my) * period)
    verified = closed < 0.0 and numeric < 0.0
    return CounterexampleResult(
        period=period,
        delta=delta,
        inner_product=closed,
        numeric_inner_product=numeric,
        verified=verified,
        u_samples=u,
        y_samples=y,
    )
