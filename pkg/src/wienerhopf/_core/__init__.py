"""Hot kernels, compiled when the extension is built.

Set ``WIENERHOPF_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _pykernels

if os.environ.get("WIENERHOPF_PURE_PYTHON"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

stein_triangular = _impl.stein_triangular
sylvester_triangular = _impl.sylvester_triangular

__all__ = ["BACKEND", "stein_triangular", "sylvester_triangular"]
