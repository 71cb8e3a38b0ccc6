"""Kernel backend selection.

The compiled extension is used when importable; otherwise the NumPy fallback.
Set ``PSIDO_LAB_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    if os.environ.get("PSIDO_LAB_BACKEND", "").lower() == "python":
        raise ImportError("fallback forced by environment")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

kernels = _compiled if _compiled is not None else _kernels_py
NAME = "cython" if _compiled is not None else "python"


def get(name: str | None = None):
    """Return the kernel module ``"cython"``, ``"python"`` or the active default."""
    if name is None:
        return kernels
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def available() -> list[str]:
    return ["python"] + (["cython"] if _compiled is not None else [])
