"""Kernel backend selection.

The hot statevector kernels exist twice: a numba-compiled version and a
pure-numpy fallback. Which one runs is decided once at import from the
``QTDARTS_BACKEND`` environment variable (``numba`` | ``numpy``); unset
means numba when importable, numpy otherwise. ``set_backend`` allows tests
and benchmarks to switch at runtime.
"""

import os

from . import _kernels_numpy

_BACKENDS = {"numpy": _kernels_numpy}

try:
    from . import _kernels_numba

    _BACKENDS["numba"] = _kernels_numba
    _NUMBA_IMPORT_ERROR = None
except ImportError as exc:  # pragma: no cover - exercised only without numba
    _NUMBA_IMPORT_ERROR = exc

kernels = None
_active = None


def available_backends():
    return sorted(_BACKENDS)


def set_backend(name):
    """Select the kernel implementation; returns the previous backend name."""
    global kernels, _active
    if name not in _BACKENDS:
        raise ValueError(
            f"unknown backend {name!r}; available: {available_backends()}"
            + (f" (numba import failed: {_NUMBA_IMPORT_ERROR})" if _NUMBA_IMPORT_ERROR else "")
        )
    previous = _active
    kernels = _BACKENDS[name]
    _active = name
    return previous


def active_backend():
    return _active


def get_kernels(name):
    """Fetch a specific implementation regardless of the active selection."""
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    return _BACKENDS[name]


_requested = os.environ.get("QTDARTS_BACKEND", "").strip().lower()
if _requested:
    set_backend(_requested)
else:
    set_backend("numba" if "numba" in _BACKENDS else "numpy")
