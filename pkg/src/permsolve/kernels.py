"""Sweep-kernel backend selection.

The compiled Cython kernel is preferred when importable; the pure-numpy
fallback implements the identical contract. Override with the
PERMSOLVE_BACKEND environment variable ("compiled" or "python") or per call
via the ``backend`` argument of :func:`permsolve.solver.greedy_solve`.
"""

from __future__ import annotations

import os

from . import _sweep_py
from .errors import InvalidParameterError

try:
    from . import _sweep_cy
except ImportError:  # extension not built: numpy fallback only
    _sweep_cy = None

_BACKENDS = {"python": _sweep_py}
if _sweep_cy is not None:
    _BACKENDS["compiled"] = _sweep_cy


def available_backends() -> tuple:
    return tuple(sorted(_BACKENDS))


def get_backend(name: str | None = None):
    """Resolve a kernel module by name, env override, or default preference."""
    if name is None:
        name = os.environ.get("PERMSOLVE_BACKEND")
    if name is None:
        name = "compiled" if "compiled" in _BACKENDS else "python"
    try:
        return _BACKENDS[name]
    except KeyError:
        raise InvalidParameterError(
            f"unknown or unavailable kernel backend {name!r}; available: {available_backends()}"
        ) from None


def default_backend_name() -> str:
    return get_backend().BACKEND
