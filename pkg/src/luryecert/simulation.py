"""Loop simulation, attractor diagnostics, power seminorms, and spectra.

The feedback recursion is y1 = Cx, u2 = y1 + r2, y2 = phi(u2),
u1 = r1 - y2, then the state update with input u1. Hot loops live in the
kernel backend (_loops); this module owns validation, shaping, and the
statistics computed from recorded traces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from . import _loops
from .errors import (
    ConfigError,
    DegenerateSeparation,
    ImproperTransferFunction,
    LengthNotPowerOfTwo,
    NonfiniteState,
    NotSettled,
    WindowTooShort,
)
from .lti import CONTINUOUS, DISCRETE, StateSpaceRealization

KERNEL_IMPL = _loops.KERNEL_IMPL

_KINDS = ("zero", "saturation", "deadzone", "pwl", "gain_table", "gain_switch")


@dataclass(frozen=True)
class NonlinearitySpec:
    """Static (or periodically gain-scheduled) memoryless nonlinearity."""

    kind: str
    limit: float = 1.0
    width: float = 0.5
    xs: tuple[float, ...] = ()
    ys: tuple[float, ...] = ()
    gains: tuple[float, ...] = ()
    period: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown nonlinearity kind {self.kind!r}")
        if self.kind == "saturation" and self.limit <= 0:
            raise ConfigError("saturation limit must be positive")
        if self.kind == "deadzone" and self.width < 0:
            raise ConfigError("deadzone width must be nonnegative")
        if self.kind == "pwl":
            if len(self.xs) != len(self.ys) or len(self.xs) < 2:
                raise ConfigError("pwl needs matching xs/ys with at least 2 points")
            if any(b <= a for a, b in zip(self.xs, self.xs[1:])):
                raise ConfigError("pwl xs must be strictly increasing")
        if self.kind in ("gain_table", "gain_switch") and not self.gains:
            raise ConfigError(f"{self.kind} needs at least one gain")
        if self.kind == "gain_switch" and self.period <= 0:
            raise ConfigError("gain_switch needs a positive period")

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind == "saturation":
            d["limit"] = self.limit
        elif self.kind == "deadzone":
            d["width"] = self.width
        elif self.kind == "pwl":
            d["xs"] = list(self.xs)
            d["ys"] = list(self.ys)
        elif self.kind == "gain_table":
            d["gains"] = list(self.gains)
        elif self.kind == "gain_switch":
            d["gains"] = list(self.gains)
            d["period"] = self.period
        return d

    @staticmethod
    def from_dict(d: dict) -> "NonlinearitySpec":
        kind = d.get("kind")
        if kind == "zero":
            return NonlinearitySpec("zero")
        if kind == "saturation":
            return NonlinearitySpec("saturation", limit=float(d.get("limit", 1.0)))
        if kind == "deadzone":
            return NonlinearitySpec("deadzone", width=float(d.get("width", 0.5)))
        if kind == "pwl":
            return NonlinearitySpec(
                "pwl", xs=tuple(float(v) for v in d.get("xs", ())),
                ys=tuple(float(v) for v in d.get("ys", ())),
            )
        if kind == "gain_table":
            return NonlinearitySpec(
                "gain_table", gains=tuple(float(v) for v in d.get("gains", ()))
            )
        if kind == "gain_switch":
            return NonlinearitySpec(
                "gain_switch",
                gains=tuple(float(v) for v in d.get("gains", ())),
                period=float(d.get("period", 0.0)),
            )
        raise ConfigError(f"unknown nonlinearity kind {kind!r}")

    def kernel_code(self) -> tuple[int, NDArray[np.float64]]:
        if self.kind == "zero":
            return _loops.NL_ZERO, np.zeros(1)
        if self.kind == "saturation":
            return _loops.NL_SATURATION, np.array([self.limit])
        if self.kind == "deadzone":
            return _loops.NL_DEADZONE, np.array([self.width])
        if self.kind == "pwl":
            return _loops.NL_PWL, np.array(
                [float(len(self.xs)), *self.xs, *self.ys]
            )
        if self.kind == "gain_table":
            return _loops.NL_GAIN_TABLE, np.array(
                [float(len(self.gains)), *self.gains]
            )
        return _loops.NL_GAIN_SWITCH, np.array(
            [self.period, float(len(self.gains)), *self.gains]
        )

    def scalar(self, u: float, phase: float = 0.0) -> float:
        """phi at one point; `phase` is the step index or time when scheduled."""
        code, params = self.kernel_code()
        from . import _kernels_py

        return _kernels_py._phi(code, list(params), phase, float(u))

    @property
    def is_monotone(self) -> bool:
        if self.kind in ("zero", "saturation", "deadzone"):
            return True
        if self.kind == "pwl":
            return all(b >= a for a, b in zip(self.ys, self.ys[1:]))
        return all(g >= 0.0 for g in self.gains)

    @property
    def is_odd(self) -> bool:
        if self.kind in ("zero", "saturation", "deadzone", "gain_table", "gain_switch"):
            return True
        probes = sorted({abs(v) for v in self.xs} | {0.0})
        scale = max(1.0, max(abs(v) for v in self.ys))
        return all(
            abs(self.scalar(p) + self.scalar(-p)) <= 1e-12 * scale for p in probes
        )


@dataclass(frozen=True)
class SinusoidForcing:
    """r(t) = const + amp * sin(freq * t + phase)."""

    const: float = 0.0
    amp: float = 0.0
    freq: float = 0.0
    phase: float = 0.0

    @property
    def params(self) -> tuple[float, float, float, float]:
        return (self.const, self.amp, self.freq, self.phase)


def _check_realization(ss: StateSpaceRealization, domain: str) -> None:
    if ss.domain != domain:
        raise ConfigError(f"realization domain {ss.domain!r} does not match {domain!r}")
    if ss.D != 0.0:
        raise ImproperTransferFunction(
            "loop simulation needs a strictly proper plant (D = 0)"
        )
    if ss.order == 0:
        raise ConfigError("loop simulation needs at least one state")


def _as_table(r, name: str) -> NDArray[np.float64]:
    arr = np.atleast_1d(np.asarray(r, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise ConfigError(f"{name} must be a scalar or a nonempty 1-d table")
    return arr


@dataclass(frozen=True)
class DiscreteSimResult:
    y1: NDArray[np.float64]
    y2: NDArray[np.float64]
    u1: NDArray[np.float64]
    u2: NDArray[np.float64]
    x_final: NDArray[np.float64]
    states: NDArray[np.float64] | None = None

    @property
    def n_steps(self) -> int:
        return len(self.y2)

    @property
    def sample_index(self) -> NDArray[np.float64]:
        return np.arange(self.n_steps, dtype=float)


def simulate_discrete(
    ss: StateSpaceRealization,
    nl: NonlinearitySpec,
    r2,
    n_steps: int,
    r1=0.0,
    x0=None,
    record_states: bool = False,
) -> DiscreteSimResult:
    """Run the discrete loop; r1/r2 are scalars or periodic tables."""
    _check_realization(ss, DISCRETE)
    if nl.kind == "gain_switch":
        raise ConfigError("gain_switch is continuous-time; use gain_table")
    x0v = np.zeros(ss.order) if x0 is None else np.asarray(x0, dtype=float)
    if x0v.shape != (ss.order,):
        raise ConfigError(f"x0 must have shape ({ss.order},)")
    code, params = nl.kernel_code()
    y1, y2, u1, u2, xs, x_final, status, fail_step = _loops.discrete_loop(
        ss.A, ss.B, ss.C, x0v, _as_table(r1, "r1"), _as_table(r2, "r2"),
        code, params, int(n_steps), record_states,
    )
    if status == _loops.STATUS_NONFINITE:
        raise NonfiniteState(f"state left the finite range at step {fail_step}")
    return DiscreteSimResult(y1=y1, y2=y2, u1=u1, u2=u2, x_final=x_final, states=xs)


@dataclass(frozen=True)
class ContinuousSimResult:
    times: NDArray[np.float64]
    y1: NDArray[np.float64]
    y2: NDArray[np.float64]
    u1: NDArray[np.float64]
    u2: NDArray[np.float64]
    x_final: NDArray[np.float64]
    t_final: float
    step: float


def simulate_continuous(
    ss: StateSpaceRealization,
    nl: NonlinearitySpec,
    r2: SinusoidForcing,
    t_span: float,
    h: float = 1e-3,
    r1: SinusoidForcing = SinusoidForcing(),
    x0=None,
    t0: float = 0.0,
    record_from_time: float | None = None,
    record_every: int = 1,
) -> ContinuousSimResult:
    """Fixed-step RK4 over [t0, t0 + t_span]; records post-step outputs.

    The step count is round(t_span / h); recording starts at the first
    step at or after record_from_time (default: record everything).
    """
    _check_realization(ss, CONTINUOUS)
    if nl.kind == "gain_table":
        raise ConfigError("gain_table is discrete-time; use gain_switch")
    if h <= 0 or t_span <= 0:
        raise ConfigError("t_span and h must be positive")
    x0v = np.zeros(ss.order) if x0 is None else np.asarray(x0, dtype=float)
    if x0v.shape != (ss.order,):
        raise ConfigError(f"x0 must have shape ({ss.order},)")
    n_steps = int(round(t_span / h))
    if record_from_time is None:
        record_from = 0
    else:
        record_from = max(0, int(math.ceil((record_from_time - t0) / h - 1e-9)))
    code, params = nl.kernel_code()
    y1, y2, u1, u2, x_final, t_final, status, fail_step = _loops.rk4_loop(
        ss.A, ss.B, ss.C, x0v, t0, h, n_steps, r1.params, r2.params,
        code, params, record_from, int(record_every),
    )
    if status == _loops.STATUS_NONFINITE:
        raise NonfiniteState(
            f"state left the finite range at t = {t0 + (fail_step + 1) * h:.6g}"
        )
    idx = record_from + np.arange(len(y2)) * record_every
    times = t0 + (idx + 1) * h
    return ContinuousSimResult(
        times=times, y1=y1, y2=y2, u1=u1, u2=u2,
        x_final=x_final, t_final=t_final, step=h * record_every,
    )


def lyapunov_exponent(
    ss: StateSpaceRealization,
    nl: NonlinearitySpec,
    r2,
    n_steps: int,
    discard: int = 1000,
    d0: float = 1e-8,
    direction=None,
) -> float:
    """Largest exponent by the two-trajectory renormalization method."""
    _check_realization(ss, DISCRETE)
    dir0 = np.zeros(ss.order)
    if direction is None:
        dir0[0] = 1.0
    else:
        dir0 = np.asarray(direction, dtype=float)
        if not np.any(dir0):
            raise ConfigError("perturbation direction must be nonzero")
    code, params = nl.kernel_code()
    lam, status, fail_step = _loops.lyapunov_loop(
        ss.A, ss.B, ss.C, np.zeros(ss.order), _as_table(r2, "r2"),
        code, params, int(n_steps), int(discard), float(d0), dir0,
    )
    if status == _loops.STATUS_DEGENERATE:
        raise DegenerateSeparation(
            f"trajectories coincided exactly at step {fail_step}"
        )
    if status == _loops.STATUS_NONFINITE:
        raise NonfiniteState(f"state left the finite range at step {fail_step}")
    return float(lam)


# --- attractor diagnostics ---

@dataclass(frozen=True)
class PeriodDetection:
    multiple: int | None
    residual: float
    tested_up_to: int
    base_samples: int

    @property
    def periodic(self) -> bool:
        return self.multiple is not None


def detect_period(
    y: NDArray[np.float64],
    base_samples: int,
    m_max: int = 64,
    tol: float = 1e-6,
) -> PeriodDetection:
    """Smallest multiple m of the base period with shift residual <= tol."""
    y = np.asarray(y, dtype=float)
    if base_samples < 1:
        raise ConfigError("base_samples must be at least 1")
    limit = min(m_max, len(y) // (2 * base_samples))
    if limit < 1:
        raise WindowTooShort(
            f"need at least {2 * base_samples} samples to test one period, "
            f"got {len(y)}"
        )
    best_resid = math.inf
    for m in range(1, limit + 1):
        s = m * base_samples
        resid = float(np.max(np.abs(y[s:] - y[:-s])))
        if m == 1 or resid < best_resid:
            best_resid = resid
        if resid <= tol:
            return PeriodDetection(m, resid, limit, base_samples)
    return PeriodDetection(None, best_resid, limit, base_samples)


# --- power seminorms ---

def power_seminorm_tail(
    y: NDArray[np.float64],
    settle_tol: float = 0.05,
    tail_fraction: float = 0.25,
) -> float:
    """sup-style estimate: max running mean of y^2 over the tail window.

    Raises NotSettled when the running means still move by more than
    settle_tol relative over that window.
    """
    y = np.asarray(y, dtype=float)
    if len(y) < 8:
        raise WindowTooShort("need at least 8 samples for a tail estimate")
    means = np.cumsum(y * y) / np.arange(1, len(y) + 1)
    start = int(len(y) * (1.0 - tail_fraction))
    tail = means[start:]
    top = float(np.max(tail))
    spread = float(np.max(tail) - np.min(tail))
    if top > 0.0 and spread / top > settle_tol:
        raise NotSettled(
            f"running power still moves by {spread / top:.3g} relative "
            f"over the tail (tolerance {settle_tol:g})"
        )
    return math.sqrt(top)


def power_seminorm_periodic(y: NDArray[np.float64], period_samples: int) -> float:
    """RMS over whole periods (exact for periodic signals)."""
    y = np.asarray(y, dtype=float)
    if period_samples < 1:
        raise ConfigError("period_samples must be at least 1")
    nper = len(y) // period_samples
    if nper < 1:
        raise WindowTooShort("window shorter than one period")
    yy = y[: nper * period_samples]
    return float(np.sqrt(np.mean(yy * yy)))


def tail_mean(y: NDArray[np.float64], fraction: float = 0.25) -> float:
    y = np.asarray(y, dtype=float)
    start = int(len(y) * (1.0 - fraction))
    return float(np.mean(y[start:]))


@dataclass(frozen=True)
class PeriodicDecomposition:
    periodic_part: NDArray[np.float64]
    residual_part: NDArray[np.float64]
    periodic_power: float
    residual_power: float
    periods: int


def decompose_periodic(
    y: NDArray[np.float64], period_samples: int, min_periods: int = 100
) -> PeriodicDecomposition:
    """Split y into its per-phase mean cycle and the residual around it."""
    y = np.asarray(y, dtype=float)
    nper = len(y) // period_samples
    if nper < min_periods:
        raise WindowTooShort(
            f"need at least {min_periods} periods, got {nper}"
        )
    yy = y[: nper * period_samples].reshape(nper, period_samples)
    yp = yy.mean(axis=0)
    yv = (yy - yp).ravel()
    return PeriodicDecomposition(
        periodic_part=yp,
        residual_part=yv,
        periodic_power=float(np.sqrt(np.mean(yp * yp))),
        residual_power=float(np.sqrt(np.mean(yv * yv))),
        periods=nper,
    )


# --- spectra ---

@dataclass(frozen=True)
class SpectrumResult:
    magnitudes: NDArray[np.float64]
    frequencies: NDArray[np.float64]
    n_samples: int
    parseval_residual: float

    @property
    def bins(self) -> NDArray[np.int64]:
        return np.arange(len(self.magnitudes))


def spectrum(y: NDArray[np.float64]) -> SpectrumResult:
    """Real FFT magnitudes with a Parseval self-check; length must be 2^k."""
    y = np.asarray(y, dtype=float)
    n = len(y)
    if n < 2 or n & (n - 1) != 0:
        raise LengthNotPowerOfTwo(f"spectrum needs a power-of-two length, got {n}")
    yf = np.fft.rfft(y)
    mags = np.abs(yf)
    energy_t = float(np.sum(y * y))
    energy_f = (mags[0] ** 2 + 2.0 * np.sum(mags[1:-1] ** 2) + mags[-1] ** 2) / n
    resid = abs(energy_t - energy_f) / max(1.0, energy_t)
    return SpectrumResult(
        magnitudes=mags,
        frequencies=np.arange(len(mags)) / n,
        n_samples=n,
        parseval_residual=float(resid),
    )
