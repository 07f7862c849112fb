"""Backend selection for the search kernels.

The compiled extension is used when importable, unless the environment
variable ``QFA_LAB_PURE_PYTHON`` is set to a non-empty value.
"""
import os

from . import _kernels_py

BACKEND = "python"
_compiled = None

if not os.environ.get("QFA_LAB_PURE_PYTHON"):
    try:
        from . import _ckernels as _compiled
    except ImportError:
        _compiled = None
    else:
        BACKEND = "cython"

_impl = _compiled if _compiled is not None else _kernels_py

exhaustive_min = _impl.exhaustive_min
evaluate_sets = _impl.evaluate_sets


def get_backend(name=None):
    """Return the kernel module for ``name`` (``"cython"``, ``"python"`` or
    ``None`` for the active one)."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    return ["python"] + (["cython"] if _compiled is not None else [])
