"""Kernel backend selection.

The compiled extension is preferred when importable; the NumPy reference
implementation is the fallback.  ``PERTURBENCH_BACKEND=reference`` or
``=compiled`` forces a choice (forcing ``compiled`` when the extension is
missing raises, rather than silently running the slow path).  Both
backends produce bit-identical output, so the choice only affects speed.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND_ENV_VAR = "PERTURBENCH_BACKEND"

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None


def _select():
    forced = os.environ.get(BACKEND_ENV_VAR)
    if forced == "reference":
        return _kernels_py
    if forced == "compiled":
        if _compiled is None:
            raise ImportError(
                "PERTURBENCH_BACKEND=compiled but the extension is not built"
            )
        return _compiled
    if forced is not None:
        raise ValueError(f"unknown {BACKEND_ENV_VAR} value {forced!r}")
    return _compiled if _compiled is not None else _kernels_py


kernels = _select()


def backend_name() -> str:
    """Which kernel implementation is active: 'compiled' or 'reference'."""
    return kernels.NAME


def available_backends() -> dict:
    """All importable backends by name (for parity tests and benchmarks)."""
    found = {_kernels_py.NAME: _kernels_py}
    if _compiled is not None:
        found[_compiled.NAME] = _compiled
    return found
