"""Kernel selection: compiled extension when available, Python fallback otherwise.

Set LURYECERT_KERNELS=python or =cython to force a backend (the benchmark
uses this); forcing cython when the extension is missing is an error.
"""
from __future__ import annotations

import os

from . import _kernels_py

_FORCED = os.environ.get("LURYECERT_KERNELS", "").strip().lower()

if _FORCED == "python":
    _impl = _kernels_py
elif _FORCED == "cython":
    from . import _kernels as _impl  # type: ignore[no-redef]
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

KERNEL_IMPL: str = _impl.IMPL

STATUS_OK = _kernels_py.STATUS_OK
STATUS_NONFINITE = _kernels_py.STATUS_NONFINITE
STATUS_DEGENERATE = _kernels_py.STATUS_DEGENERATE

NL_ZERO = _kernels_py.NL_ZERO
NL_SATURATION = _kernels_py.NL_SATURATION
NL_DEADZONE = _kernels_py.NL_DEADZONE
NL_PWL = _kernels_py.NL_PWL
NL_GAIN_TABLE = _kernels_py.NL_GAIN_TABLE
NL_GAIN_SWITCH = _kernels_py.NL_GAIN_SWITCH

discrete_loop = _impl.discrete_loop
lyapunov_loop = _impl.lyapunov_loop
rk4_loop = _impl.rk4_loop
