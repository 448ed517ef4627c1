"""Kernel selection: compiled extension when importable, numpy otherwise.

Set ``DEGEN_CONTROL_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

__all__ = ["BACKEND", "available", "get", "jv", "duhamel_final", "duhamel_path"]

_compiled: ModuleType | None
try:
    from . import _ckernels as _compiled
except ImportError:  # extension not built
    _compiled = None

if _compiled is not None and os.environ.get("DEGEN_CONTROL_PURE_PYTHON", "") != "1":
    _impl: ModuleType = _compiled
    BACKEND = "cython"
else:
    _impl = _pykernels
    BACKEND = "python"


def available() -> list[str]:
    """Names of the importable kernel backends."""
    return (["cython"] if _compiled is not None else []) + ["python"]


def get(name: str) -> ModuleType:
    """Kernel module by name (``"cython"`` or ``"python"``)."""
    if name == "python":
        return _pykernels
    if name == "cython" and _compiled is not None:
        return _compiled
    raise ValueError(f"kernel backend {name!r} not available")


jv = _impl.jv
duhamel_final = _impl.duhamel_final
duhamel_path = _impl.duhamel_path
