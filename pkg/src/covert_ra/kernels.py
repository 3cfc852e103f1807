"""Trial-kernel backend, chosen once at import.

The compiled extension is used when importable; set ``COVERT_RA_PURE_PYTHON=1``
to force the numpy fallback. Both backends consume identical random streams.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py


def _load_compiled() -> ModuleType | None:
    if os.environ.get("COVERT_RA_PURE_PYTHON", "") not in ("", "0"):
        return None
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


_compiled = _load_compiled()
BACKEND = "cython" if _compiled is not None else "python"
_active: ModuleType = _compiled if _compiled is not None else _kernels_py


def get_backend(name: str | None = None) -> ModuleType:
    """Kernel module by name ("cython" or "python"); ``None`` returns the active one."""
    if name is None:
        return _active
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def compiled_available() -> bool:
    return _compiled is not None
