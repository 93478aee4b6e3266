"""Kernel backend selection.

The compiled extension ``swflood._kernels`` is used when it imports; the
numpy implementation in ``swflood._pykernels`` is the fallback. Setting
``SWFLOOD_BACKEND=numpy`` forces the fallback.
"""

from __future__ import annotations

import importlib
import os

_loaded = {}


def available() -> list[str]:
    names = []
    for name in ("cython", "numpy"):
        try:
            kernels(name)
        except ImportError:
            continue
        names.append(name)
    return names


def kernels(name: str | None = None):
    if name is None:
        name = os.environ.get("SWFLOOD_BACKEND", "auto").lower()
    if name == "auto":
        try:
            return kernels("cython")
        except ImportError:
            return kernels("numpy")
    if name not in ("cython", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name not in _loaded:
        module = "._kernels" if name == "cython" else "._pykernels"
        _loaded[name] = importlib.import_module(module, __package__)
    return _loaded[name]
