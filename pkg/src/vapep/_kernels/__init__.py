"""Search kernel selection.

The compiled Cython kernels are used when the extension built; otherwise the
pure-Python twins take over.  APEP_KERNEL=python|cython forces a choice, and
solve(..., backend=...) overrides per call.  Both implementations enumerate
in the same order and produce identical results.
"""
import os

from . import _ref

_BACKENDS = {"python": _ref}

try:
    from . import _core  # type: ignore[attr-defined]

    _BACKENDS["cython"] = _core
except ImportError:
    _core = None


def default_backend_name() -> str:
    env = os.environ.get("APEP_KERNEL")
    if env:
        return env
    return "cython" if "cython" in _BACKENDS else "python"


def get_backend(name=None):
    name = name or default_backend_name()
    if name not in _BACKENDS:
        raise ValueError(
            f"kernel backend {name!r} unavailable; built: {sorted(_BACKENDS)}"
        )
    return _BACKENDS[name]


def available_backends() -> list:
    return sorted(_BACKENDS)
