"""Bit-level parity between the compiled kernels and the pure-Python fallback."""
from __future__ import annotations

import numpy as np
import pytest

from luryecert import _kernels_py as kpy

try:
    from luryecert import _kernels as kcy
except ImportError:
    kcy = None

needs_compiled = pytest.mark.skipif(
    kcy is None, reason="compiled kernel extension not built")

A = np.array([[0.5, 0.0], [1.0, 0.0]])
B9 = 0.9 * np.array([2.0, 0.0])
C = np.array([1.0, 0.46])
R2 = np.array([1.0, 0.6, -0.6, -1.0, 0.0])
R1 = np.array([0.0])
DEADZONE = (kpy.NL_DEADZONE, np.array([0.2]))
X0 = np.zeros(2)


def test_fallback_reports_itself():
    assert kpy.IMPL == "python"


@needs_compiled
def test_compiled_reports_itself():
    assert kcy.IMPL == "cython"


@needs_compiled
def test_selected_backend_matches_env(monkeypatch):
    import importlib

    from luryecert import _loops

    assert _loops.KERNEL_IMPL in ("cython", "python")
    monkeypatch.setenv("LURYECERT_KERNELS", "python")
    mod = importlib.reload(_loops)
    assert mod.KERNEL_IMPL == "python"
    monkeypatch.delenv("LURYECERT_KERNELS")
    mod = importlib.reload(_loops)
    assert mod.KERNEL_IMPL == "cython"


@needs_compiled
def test_discrete_loop_bitwise_identical():
    code, params = DEADZONE
    n = 20_000  # chaotic regime amplifies any arithmetic difference
    out_py = kpy.discrete_loop(A, B9, C, X0, R1, R2, code, params, n, True)
    out_cy = kcy.discrete_loop(A, B9, C, X0, R1, R2, code, params, n, True)
    for a, b in zip(out_py[:6], out_cy[:6]):
        assert np.array_equal(np.asarray(a), np.asarray(b))
    assert out_py[6] == out_cy[6]  # status
    assert out_py[7] == out_cy[7]  # fail step


@needs_compiled
def test_lyapunov_loop_bitwise_identical():
    code, params = DEADZONE
    d0 = 1e-8
    dir0 = np.array([1.0, 0.0])
    got_py = kpy.lyapunov_loop(A, B9, C, X0, R2, code, params, 50_000, 1000, d0, dir0)
    got_cy = kcy.lyapunov_loop(A, B9, C, X0, R2, code, params, 50_000, 1000, d0, dir0)
    assert got_py == got_cy


@needs_compiled
def test_rk4_loop_bitwise_identical():
    a = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-100.0, -11.0, -100.1]])
    b = np.array([1.0, 0.0, 0.0])
    c = 909.0 * np.array([0.0, 0.0, 1.0])
    x0 = np.array([0.1, 0.0, -0.2])
    r1 = np.array([0.0, 0.0, 0.0, 0.0])
    r2 = np.array([0.0, 1.0, 2.0, 0.0])
    sat = (kpy.NL_SATURATION, np.array([1.0]))
    out_py = kpy.rk4_loop(a, b, c, x0, 0.0, 1e-3, 20_000, r1, r2, *sat, 0, 1)
    out_cy = kcy.rk4_loop(a, b, c, x0, 0.0, 1e-3, 20_000, r1, r2, *sat, 0, 1)
    for i in (0, 1, 2, 3, 4):
        assert np.array_equal(np.asarray(out_py[i]), np.asarray(out_cy[i]))
    assert out_py[5] == out_cy[5]  # accumulated time
    assert out_py[6] == out_cy[6]


@needs_compiled
def test_phi_agreement_across_kinds():
    # feed a ramp of u2 values through every nonlinearity code via r2
    cases = [
        (kpy.NL_ZERO, np.zeros(1)),
        (kpy.NL_SATURATION, np.array([1.3])),
        (kpy.NL_DEADZONE, np.array([0.4])),
        (kpy.NL_PWL, np.array([3.0, -1.0, 0.0, 2.0, -2.0, 0.0, 1.0])),
        (kpy.NL_GAIN_TABLE, np.array([3.0, 0.5, 1.0, 2.0])),
        (kpy.NL_GAIN_SWITCH, np.array([2.0, 2.0, 0.5, 3.0])),
    ]
    us = np.linspace(-4.0, 4.0, 101)
    args = (np.array([[0.2]]), np.array([0.7]), np.array([1.0]), np.zeros(1),
            np.array([0.1]), us)
    for code, params in cases:
        out_py = kpy.discrete_loop(*args, code, params, 202, False)
        out_cy = kcy.discrete_loop(*args, code, params, 202, False)
        assert np.array_equal(np.asarray(out_py[1]), np.asarray(out_cy[1])), code
