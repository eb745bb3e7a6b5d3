"""Numba/numpy backend selection for the hot kernels.

Kernels are written once in numpy-compatible Python. By default they are
compiled with ``numba.njit``; setting the environment variable
``FLEETPOWER_NUMBA=0`` (or ``false``/``off``/``no``) before import selects the
pure-numpy fallback path instead. ``benchmarks/bench_kernels.py`` compares the
two paths on identical workloads.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_FLAG = os.environ.get("FLEETPOWER_NUMBA", "1").strip().lower()
NUMBA_ENABLED = numba is not None and _FLAG not in ("0", "false", "off", "no")


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"


def maybe_njit(**options):
    """Decorator: ``numba.njit(**options)`` when enabled, identity otherwise."""

    def decorate(func):
        if NUMBA_ENABLED:
            return numba.njit(**options)(func)
        return func

    return decorate


def run_kernel(kernel, *args):
    """Invoke a kernel that does wrapping uint64 arithmetic internally.

    The pure-python path triggers numpy scalar-overflow warnings on the
    (intentional) uint64 wraparound in the RNG mixer; suppress them for the
    duration of the call. Jitted kernels wrap silently.
    """
    if NUMBA_ENABLED:
        return kernel(*args)
    with np.errstate(over="ignore"):
        return kernel(*args)


def python_impl(kernel):
    """Return the uncompiled implementation of a (possibly jitted) kernel."""
    return getattr(kernel, "py_func", kernel)
