"""Rational transfer functions in s and z, realizations, and frequency grids.

Conventions: coefficient lists are descending powers; the scalar gain g is
stored separately from the fraction so gain sweeps never re-parse
polynomials. Discrete responses are evaluated at z = e^{jw} with w in
rad/sample; conjugate symmetry lets every sweep live on [0, pi].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import (
    ConfigError,
    ImproperTransferFunction,
    PoleOnEvaluationContour,
    RootFindingFailure,
)

CONTINUOUS = "s"
DISCRETE = "z"

# poles this close to the stability boundary get the distinct verdict
BOUNDARY_TOL = 1e-9
# |den(p)| below this multiple of ||den|| counts as "on the contour"
POLE_PROXIMITY_REL = 1e-12


def _as_domain(tag: str) -> str:
    if tag in (CONTINUOUS, "continuous"):
        return CONTINUOUS
    if tag in (DISCRETE, "discrete"):
        return DISCRETE
    raise ConfigError(f"unknown domain tag {tag!r}; expected 's' or 'z'")


def _strip_leading_zeros(coeffs: Sequence[float]) -> tuple[float, ...]:
    c = tuple(float(v) for v in coeffs)
    i = 0
    while i < len(c) - 1 and c[i] == 0.0:
        i += 1
    return c[i:]


@dataclass(frozen=True)
class RationalTransferFunction:
    """g * num(p)/den(p) with p = s (continuous) or p = z (discrete)."""

    domain: str
    num: tuple[float, ...]
    den: tuple[float, ...]
    g: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "domain", _as_domain(self.domain))
        num = _strip_leading_zeros(self.num)
        den = _strip_leading_zeros(self.den)
        if not any(den):
            raise ConfigError("denominator is identically zero")
        if not all(np.isfinite(num)) or not all(np.isfinite(den)) or not np.isfinite(self.g):
            raise ConfigError("transfer function coefficients must be finite")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "g", float(self.g))

    def with_gain(self, g: float) -> "RationalTransferFunction":
        return RationalTransferFunction(self.domain, self.num, self.den, g)

    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "num": list(self.num),
            "den": list(self.den),
            "g": self.g,
        }

    @staticmethod
    def from_dict(d: dict) -> "RationalTransferFunction":
        try:
            return RationalTransferFunction(
                d["domain"], d["num"], d["den"], d.get("g", 1.0)
            )
        except KeyError as exc:
            raise ConfigError(f"transfer function JSON missing field {exc}") from exc


@dataclass(frozen=True)
class StateSpaceRealization:
    """x' = Ax + Bu, y = Cx + Du (or x+ = Ax + Bu in discrete time)."""

    A: NDArray[np.float64]
    B: NDArray[np.float64]
    C: NDArray[np.float64]
    D: float
    domain: str

    @property
    def order(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class StabilityReport:
    verdict: str  # "stable" | "unstable" | "marginally_stable"
    poles: NDArray[np.complex128]

    @property
    def stable(self) -> bool:
        return self.verdict == "stable"


@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing frequency points plus refinement metadata."""

    domain: str
    points: NDArray[np.float64]
    base_density: float = 1.0
    refinement_factor: int = 10

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            raise ConfigError("frequency grid is empty")
        if np.any(np.diff(pts) <= 0):
            raise ConfigError("frequency grid must be strictly increasing")
        object.__setattr__(self, "points", pts)


def _eval_points(tf: RationalTransferFunction, w: NDArray[np.float64]) -> NDArray[np.complex128]:
    if tf.domain == CONTINUOUS:
        return 1j * w
    return np.exp(1j * w)


def eval_frequency_response(tf: RationalTransferFunction, w) -> complex | NDArray[np.complex128]:
    """G(jw) or G(e^{jw}); raises if the contour point sits on a pole."""
    scalar = np.isscalar(w)
    warr = np.atleast_1d(np.asarray(w, dtype=float))
    p = _eval_points(tf, warr)
    den_val = np.polyval(tf.den, p)
    den_norm = float(np.linalg.norm(tf.den))
    bad = np.abs(den_val) < POLE_PROXIMITY_REL * den_norm
    if np.any(bad):
        w_bad = warr[bad][0]
        raise PoleOnEvaluationContour(
            f"denominator vanishes on the evaluation contour near w={w_bad:g}"
        )
    out = tf.g * np.polyval(tf.num, p) / den_val
    return complex(out[0]) if scalar else out


def poles(tf: RationalTransferFunction) -> NDArray[np.complex128]:
    if len(tf.den) < 2:
        return np.array([], dtype=complex)
    try:
        return np.roots(tf.den)
    except np.linalg.LinAlgError as exc:
        raise RootFindingFailure(f"pole eigensolve failed: {exc}") from exc


def zeros(tf: RationalTransferFunction) -> NDArray[np.complex128]:
    if len(tf.num) < 2:
        return np.array([], dtype=complex)
    try:
        return np.roots(tf.num)
    except np.linalg.LinAlgError as exc:
        raise RootFindingFailure(f"zero eigensolve failed: {exc}") from exc


def stability_report(tf: RationalTransferFunction) -> StabilityReport:
    """Pole-based verdict with a distinct marginal band at the boundary."""
    p = poles(tf)
    if p.size == 0:
        return StabilityReport("stable", p)
    if tf.domain == CONTINUOUS:
        d = float(np.max(p.real))
    else:
        d = float(np.max(np.abs(p))) - 1.0
    if d < -BOUNDARY_TOL:
        verdict = "stable"
    elif d <= BOUNDARY_TOL:
        verdict = "marginally_stable"
    else:
        verdict = "unstable"
    return StabilityReport(verdict, p)


def is_stable(tf: RationalTransferFunction) -> bool:
    return stability_report(tf).stable


def dc_gain(tf: RationalTransferFunction) -> float:
    """Response at w = 0 (z = 1 in discrete time); real by construction."""
    val = eval_frequency_response(tf, 0.0)
    return float(np.real(val))


def to_state_space(tf: RationalTransferFunction) -> StateSpaceRealization:
    """Controllable-canonical realization; gain folded into C and D."""
    num = tf.num
    den = tf.den
    if len(num) > len(den):
        raise ImproperTransferFunction(
            f"numerator degree {len(num) - 1} exceeds denominator degree {len(den) - 1}"
        )
    lead = den[0]
    den_m = np.asarray(den, dtype=float) / lead
    n = len(den_m) - 1
    num_p = np.zeros(n + 1)
    num_p[n + 1 - len(num):] = np.asarray(num, dtype=float) / lead
    d_term = tf.g * num_p[0]
    if n == 0:
        return StateSpaceRealization(
            A=np.zeros((0, 0)), B=np.zeros(0), C=np.zeros(0), D=float(d_term),
            domain=tf.domain,
        )
    A = np.zeros((n, n))
    A[0, :] = -den_m[1:]
    if n > 1:
        A[1:, :-1] = np.eye(n - 1)
    B = np.zeros(n)
    B[0] = 1.0
    C = tf.g * (num_p[1:] - num_p[0] * den_m[1:])
    return StateSpaceRealization(A=A, B=B, C=C, D=float(d_term), domain=tf.domain)


def ss_frequency_response(ss: StateSpaceRealization, w) -> complex | NDArray[np.complex128]:
    scalar = np.isscalar(w)
    warr = np.atleast_1d(np.asarray(w, dtype=float))
    if ss.domain == CONTINUOUS:
        pvals = 1j * warr
    else:
        pvals = np.exp(1j * warr)
    n = ss.order
    out = np.empty(len(warr), dtype=complex)
    if n == 0:
        out[:] = ss.D
    else:
        eye = np.eye(n)
        for i, p in enumerate(pvals):
            out[i] = ss.C @ np.linalg.solve(p * eye - ss.A, ss.B) + ss.D
    return complex(out[0]) if scalar else out


def markov_parameters(ss: StateSpaceRealization, count: int) -> NDArray[np.float64]:
    """D, CB, CAB, CA^2B, ... (the discrete impulse response)."""
    out = np.empty(count)
    if count == 0:
        return out
    out[0] = ss.D
    if ss.order == 0:
        out[1:] = 0.0
        return out
    v = ss.B.copy()
    for i in range(1, count):
        out[i] = ss.C @ v
        v = ss.A @ v
    return out


def controllability_matrix(ss: StateSpaceRealization) -> NDArray[np.float64]:
    n = ss.order
    cols = []
    v = ss.B.copy()
    for _ in range(n):
        cols.append(v.copy())
        v = ss.A @ v
    return np.column_stack(cols) if cols else np.zeros((0, 0))


def observability_matrix(ss: StateSpaceRealization) -> NDArray[np.float64]:
    n = ss.order
    rows = []
    v = ss.C.copy()
    for _ in range(n):
        rows.append(v.copy())
        v = v @ ss.A
    return np.vstack(rows) if rows else np.zeros((0, 0))


def is_minimal(ss: StateSpaceRealization) -> bool:
    n = ss.order
    if n == 0:
        return True
    rc = np.linalg.matrix_rank(controllability_matrix(ss))
    ro = np.linalg.matrix_rank(observability_matrix(ss))
    return rc == n and ro == n


def realization_matches(
    tf: RationalTransferFunction,
    ss: StateSpaceRealization,
    n_probe: int = 64,
    rtol: float = 1e-9,
) -> bool:
    """Frequency-response agreement on a probe grid (accepts overrides)."""
    if tf.domain == CONTINUOUS:
        probe = np.geomspace(1e-2, 1e2, n_probe)
    else:
        probe = np.linspace(1e-3, np.pi - 1e-3, n_probe)
    want = eval_frequency_response(tf, probe)
    got = ss_frequency_response(ss, probe)
    scale = max(float(np.max(np.abs(want))), 1e-30)
    return float(np.max(np.abs(want - got))) <= rtol * scale


# --- frequency grids ---

CONT_GRID_WMIN = 1e-3
CONT_GRID_WMAX = 1e4
CONT_POINTS_PER_DECADE = 2000
DISC_GRID_POINTS = 4096
PHASE_REFINE_DEG = 2.0


def default_grid(domain: str, density: float = 1.0) -> FrequencyGrid:
    """Log grid on [1e-3, 1e4] rad/s, or 4096 uniform points on [0, pi]."""
    domain = _as_domain(domain)
    if density <= 0:
        raise ConfigError("grid density must be positive")
    if domain == CONTINUOUS:
        decades = np.log10(CONT_GRID_WMAX / CONT_GRID_WMIN)
        n = int(round(CONT_POINTS_PER_DECADE * density * decades)) + 1
        pts = np.geomspace(CONT_GRID_WMIN, CONT_GRID_WMAX, n)
    else:
        n = int(round(DISC_GRID_POINTS * density))
        pts = np.linspace(0.0, np.pi, n)
    return FrequencyGrid(domain=domain, points=pts, base_density=density)


def refine_grid_by_phase(
    grid: FrequencyGrid,
    response: NDArray[np.complex128],
    factor: int | None = None,
) -> FrequencyGrid:
    """Insert extra points wherever the phase jumps more than 2 degrees.

    Flagged intervals get `factor` subintervals (geometric for continuous
    grids, linear for discrete). One pass; callers re-evaluate afterwards.
    """
    factor = grid.refinement_factor if factor is None else factor
    pts = grid.points
    ph = np.angle(np.asarray(response))
    jump = np.abs(np.diff(np.unwrap(ph)))
    flagged = np.where(jump > np.deg2rad(PHASE_REFINE_DEG))[0]
    if flagged.size == 0:
        return grid
    extra = []
    geometric = grid.domain == CONTINUOUS and pts[0] > 0
    for i in flagged:
        a, b = pts[i], pts[i + 1]
        if geometric:
            seg = np.geomspace(a, b, factor + 1)[1:-1]
        else:
            seg = np.linspace(a, b, factor + 1)[1:-1]
        extra.append(seg)
    merged = np.unique(np.concatenate([pts, *extra]))
    return FrequencyGrid(
        domain=grid.domain,
        points=merged,
        base_density=grid.base_density,
        refinement_factor=factor,
    )


def tf_plus_constant(tf: RationalTransferFunction, c: float) -> RationalTransferFunction:
    """c + G as one rational function (the suitability target 1/k + G)."""
    n = len(tf.den)
    num_p = np.zeros(n)
    num_p[n - len(tf.num):] = tf.num
    new_num = c * np.asarray(tf.den) + tf.g * num_p
    return RationalTransferFunction(tf.domain, tuple(new_num), tf.den, 1.0)


def response_function(tf: RationalTransferFunction) -> Callable[[NDArray[np.float64]], NDArray[np.complex128]]:
    """Bind a tf into a plain w -> complex array callable."""
    return lambda w: eval_frequency_response(tf, w)
