"""Kernel selection: compiled extension if built, pure-Python fallback otherwise.

Set CONEFLOW_PURE=1 to force the fallback (used by the benchmark to compare
both implementations on one machine).
"""

import os

if os.environ.get("CONEFLOW_PURE", "0") == "1":
    from . import _ref as kernels
else:
    try:
        from . import _fast as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _ref as kernels

IS_COMPILED = kernels.IS_COMPILED

__all__ = ["kernels", "IS_COMPILED"]
