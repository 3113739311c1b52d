"""Backend selection for the hot numeric kernels.

Every kernel in :mod:`unicurrent.kernels` exists twice: a numba ``@njit`` loop
and a vectorised numpy version. Which one runs is decided here.

Set ``UNICURRENT_DISABLE_NUMBA=1`` to force the numpy path (also the automatic
fallback when numba is not importable).
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    numba = None
    HAVE_NUMBA = False

_DISABLED = os.environ.get("UNICURRENT_DISABLE_NUMBA", "0").strip().lower() in ("1", "true", "yes")

_backend = "numba" if (HAVE_NUMBA and not _DISABLED) else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when numba is installed, otherwise an identity decorator.

    Compilation is lazy, so decorating costs nothing when the numpy backend
    is selected.
    """
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def get_backend():
    return _backend


def set_backend(name):
    """Switch kernels between ``"numba"`` and ``"numpy"`` at runtime."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name


def use_numba():
    return _backend == "numba"
