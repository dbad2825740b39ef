"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``HYPMA_PURE_PYTHON`` is set to a non-empty value other
than ``0``, the numpy implementations are used.  ``BACKEND`` names the choice.
"""
import os

from . import _pykernels

_force_py = os.environ.get("HYPMA_PURE_PYTHON", "") not in ("", "0")

try:
    if _force_py:
        raise ImportError
    from . import _ckernels as _impl
    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

minimize_fs_field = _impl.minimize_fs_field
project_polyline = _impl.project_polyline
interp_arclength = _impl.interp_arclength
salm_boundary = _impl.salm_boundary


def get_backend(name: str):
    """Module providing the kernels for ``"cython"`` or ``"python"``."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
