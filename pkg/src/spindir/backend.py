"""Selection of the trajectory-stepping kernel at import time.

The compiled Cython extension is preferred; the vectorized numpy fallback
implements the identical contract.  ``get_stepper`` lets benchmarks and
tests force one side explicitly.
"""

from __future__ import annotations

from . import _stepper_py

try:
    from . import _stepper  # type: ignore[attr-defined]

    HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on build environment
    _stepper = None
    HAVE_COMPILED = False

_DEFAULT = _stepper if HAVE_COMPILED else _stepper_py


def get_stepper(backend: str | None = None):
    """Return the stepper module.

    backend: None for the import-time default, "compiled" or "python" to
    force a side.  Forcing "compiled" without the built extension raises.
    """
    if backend is None:
        return _DEFAULT
    if backend == "python":
        return _stepper_py
    if backend == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled stepper extension is not available")
        return _stepper
    raise ValueError(f"unknown backend {backend!r}")


def backend_name(backend: str | None = None) -> str:
    return get_stepper(backend).BACKEND_NAME
