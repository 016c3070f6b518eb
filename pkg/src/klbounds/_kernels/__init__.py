"""Kernel backend selection.

The compiled Cython kernel is preferred; a pure-Python fallback with
identical semantics (and bit-identical output) loads when the extension
is unavailable.  Override with KLBOUNDS_KERNEL=python|cython|auto.

Also home of the shared log-factorial table: both backends index the same
precomputed doubles instead of calling lgamma, which keeps them exact
mirrors of each other (CPython's math.lgamma is not the libm lgamma).
"""

from __future__ import annotations

import math
import os
import threading

import numpy as np

from . import _pykern

_ENV = "KLBOUNDS_KERNEL"


class KernelError(RuntimeError):
    """Raised when the requested kernel backend cannot be loaded."""


def _load(choice: str):
    if choice == "python":
        return _pykern
    if choice == "cython":
        from . import _ckern

        return _ckern
    if choice == "auto":
        try:
            from . import _ckern

            return _ckern
        except ImportError:
            return _pykern
    raise KernelError(f"unknown {_ENV} value {choice!r}; use python, cython or auto")


def get_backend(name: str = "auto"):
    """Return a kernel module by name; used by benchmarks and parity tests."""
    return _load(name)


def available_backends() -> tuple[str, ...]:
    names = ["python"]
    try:
        from . import _ckern  # noqa: F401

        names.append("cython")
    except ImportError:
        pass
    return tuple(names)


_impl = _load(os.environ.get(_ENV, "auto").lower())

BACKEND: str = _impl.BACKEND
stream_state = _impl.stream_state
next_u64 = _impl.next_u64
next_double = _impl.next_double
binomial_once = _impl.binomial_once
poisson_once = _impl.poisson_once
multinomial_once = _impl.multinomial_once
mc_stat_samples = _impl.mc_stat_samples
tail_sums = _impl.tail_sums
kl_moments = _impl.kl_moments

STAT_KL = 0
STAT_L1 = 1
STAT_KL_POISSON = 2

_MASK64 = 0xFFFFFFFFFFFFFFFF


def normalize_seed(seed: int) -> int:
    """Map any Python integer seed onto the 64-bit counter domain."""
    return int(seed) & _MASK64


# -- shared log-factorial table ---------------------------------------------

_LF_LOCK = threading.Lock()
_LF_MIN = 1024
_lf_values = np.array([math.lgamma(i + 1.0) for i in range(_LF_MIN)])


def logfact_table(n_max: int) -> np.ndarray:
    """log(i!) for i = 0..n_max at least; grow-only cache, values stable."""
    global _lf_values
    need = int(n_max) + 1
    if need > len(_lf_values):
        with _LF_LOCK:
            if need > len(_lf_values):
                size = len(_lf_values)
                while size < need:
                    size *= 2
                ext = np.array(
                    [math.lgamma(i + 1.0) for i in range(len(_lf_values), size)]
                )
                _lf_values = np.concatenate([_lf_values, ext])
    return _lf_values
