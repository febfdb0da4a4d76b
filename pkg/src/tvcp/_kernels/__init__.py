"""Resampling kernel selection: compiled extension if built, numpy otherwise.

Set ``TVCP_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and the equivalence tests). Both paths return bit-identical results for
the integer-valued inputs used throughout the package.
"""

import os

from tvcp._kernels.fallback import bootstrap_diffs as _py_bootstrap_diffs

if os.environ.get("TVCP_PURE_PYTHON"):
    bootstrap_diffs = _py_bootstrap_diffs
    KERNEL_BACKEND = "python"
else:
    try:
        from tvcp._kernels._bootstrap_cy import bootstrap_diffs  # type: ignore[no-redef]

        KERNEL_BACKEND = "cython"
    except ImportError:  # extension not built
        bootstrap_diffs = _py_bootstrap_diffs
        KERNEL_BACKEND = "python"

__all__ = ["bootstrap_diffs", "KERNEL_BACKEND", "_py_bootstrap_diffs"]
