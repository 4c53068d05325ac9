"""Kernel backend selection.

The compiled Cython extension is used when present; otherwise the
pure-Python implementation takes over.  ``SKEWRANK_BACKEND=pure`` in the
environment forces the fallback, which is how the benchmark and the
backend-equality tests exercise both paths.
"""

import os

if os.environ.get("SKEWRANK_BACKEND") == "pure":
    from . import pure as _impl
else:
    try:
        from . import _modmat as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import pure as _impl

BACKEND = _impl.BACKEND_NAME

mat_mul = _impl.mat_mul
mat_rank = _impl.mat_rank
mat_inv = _impl.mat_inv
scalar_mat_mul = _impl.scalar_mat_mul
