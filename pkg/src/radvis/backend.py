"""Kernel backend selection: compiled extension if importable, NumPy otherwise.

Set RADVIS_FORCE_PYTHON_KERNELS=1 to force the fallback (used by the
benchmark and the backend-parity tests).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("RADVIS_FORCE_PYTHON_KERNELS") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

MODE_BAKE = _kernels_py.MODE_BAKE
MODE_COMPOSITE = _kernels_py.MODE_COMPOSITE
MODE_OVERLAY = _kernels_py.MODE_OVERLAY

KIND_IDS = {
    "continuous": _kernels_py.KIND_CONTINUOUS,
    "banded": _kernels_py.KIND_BANDED,
    "transparent": _kernels_py.KIND_TRANSPARENT,
    "circle": _kernels_py.KIND_CIRCLE,
    "hex": _kernels_py.KIND_HEX,
    "arrow": _kernels_py.KIND_ARROW,
}

PATTERN_IDS = {
    "circle": _kernels_py.PATTERN_CIRCLE,
    "hex": _kernels_py.PATTERN_HEX,
    "arrow": _kernels_py.PATTERN_ARROW,
}


def active_backend() -> str:
    return _impl.BACKEND_NAME


def get_kernels(force: str | None = None):
    """Return the kernel module: active by default, or a named backend."""
    if force is None:
        return _impl
    if force == "python":
        return _kernels_py
    if force == "compiled":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {force!r}")
