"""Kernel backend selection: compiled extension when built, numpy otherwise.

Override with SHOTZONE_BACKEND=python|compiled|auto (auto is the default).
"""

from __future__ import annotations

import os

from ..errors import ConfigError
from . import kernels_py


def load_kernels(choice: str | None = None):
    """Resolve a kernels module for a backend name."""
    choice = choice or os.environ.get("SHOTZONE_BACKEND", "auto")
    if choice not in ("auto", "compiled", "python"):
        raise ConfigError(f"SHOTZONE_BACKEND must be auto|compiled|python, got {choice!r}")
    if choice in ("auto", "compiled"):
        try:
            from . import _kernels

            return _kernels, "compiled"
        except ImportError:
            if choice == "compiled":
                raise ConfigError("compiled kernels requested but the extension is not built")
    return kernels_py, "python"


KERNELS, BACKEND_NAME = load_kernels()


def backend_name() -> str:
    return BACKEND_NAME


def available_backends() -> list[str]:
    names = ["python"]
    try:
        from . import _kernels  # noqa: F401

        names.insert(0, "compiled")
    except ImportError:
        pass
    return names
