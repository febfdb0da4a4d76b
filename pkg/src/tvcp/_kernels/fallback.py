"""Pure numpy implementation of the resampling kernel.

Inputs are integer-valued, so the sums are exact in int64 and the returned
differences are bit-identical to the compiled kernel regardless of
summation order.
"""

from __future__ import annotations

import numpy as np


def bootstrap_diffs(
    num_a: np.ndarray, num_b: np.ndarray, den: np.ndarray, idx: np.ndarray
) -> np.ndarray:
    """Per-resample metric difference (B minus A).

    ``num_a``, ``num_b``, ``den``: int64 vectors of per-group numerators
    and the shared denominator. ``idx``: int64 matrix of group indices,
    one resample per row. Returns float64 of shape ``(idx.shape[0],)``.
    """
    sa = num_a[idx].sum(axis=1)
    sb = num_b[idx].sum(axis=1)
    sd = den[idx].sum(axis=1)
    return sb / sd - sa / sd
