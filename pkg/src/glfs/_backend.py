"""Pick the compiled kernels when they import, else the NumPy fallback.

Set ``GLFS_PURE_PYTHON=1`` before import to force the fallback.
"""

import os
import warnings

from . import _kernels_py

kernels = _kernels_py
BACKEND = "python"

if os.environ.get("GLFS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as kernels  # noqa: F811
        BACKEND = "cython"
    except ImportError as exc:  # pragma: no cover - depends on the build
        warnings.warn(
            f"glfs: compiled kernels unavailable ({exc}); using NumPy fallback",
            RuntimeWarning,
        )
        kernels = _kernels_py
