"""Kernel backend selection.

The hot numeric loops in :mod:`mushroom._kernels` are compiled with numba
when it is available.  Set the environment variable ``MUSHROOM_BACKEND`` to

* ``auto``  (default) -- use numba if importable, else plain Python/numpy,
* ``numba`` -- require numba, raise if the import fails,
* ``numpy`` -- force the uncompiled fallback path.

The flag is read once at import time; ``benchmarks/bench_backends.py`` runs
the same workloads under both settings.
"""

import os

_ENV_VAR = "MUSHROOM_BACKEND"
_choice = os.environ.get(_ENV_VAR, "auto").strip().lower()
if _choice not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"{_ENV_VAR} must be one of 'auto', 'numba', 'numpy'; got {_choice!r}"
    )

USE_NUMBA = False
if _choice in ("auto", "numba"):
    try:
        import numba  # noqa: F401

        USE_NUMBA = True
    except ImportError:
        if _choice == "numba":
            raise
        USE_NUMBA = False

BACKEND = "numba" if USE_NUMBA else "numpy"


def maybe_njit(**kwargs):
    """Return ``numba.njit`` under the numba backend, identity otherwise.

    fastmath stays off: the trajectory kernels must produce the same IEEE
    sequence under both backends so golden fixtures are portable.
    """
    if USE_NUMBA:
        import numba

        kwargs.setdefault("cache", True)
        return numba.njit(**kwargs)

    def _identity(fn):
        return fn

    return _identity
