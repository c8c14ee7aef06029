"""Fixed-width histograms over log2 gaps, aligned to bin-width multiples."""

from __future__ import annotations

import math

import numpy as np

from ._validation import as_sample_array
from .types import Histogram, HistogramBin


def build_histogram(xs, bin_width_log2: float = 0.25) -> Histogram:
    """Histogram of log2 gaps with contiguous bins and normalized density.

    Bin edges sit on multiples of the bin width so the same data always
    produces the same bins regardless of sample order.
    """
    if bin_width_log2 <= 0:
        raise ValueError("bin_width_log2 must be > 0")
    arr = as_sample_array(xs)
    if arr.size == 0:
        return Histogram(bin_width_log2=bin_width_log2, bins=(), n_total=0)

    start = math.floor(arr.min() / bin_width_log2) * bin_width_log2
    n_bins = int(math.floor((arr.max() - start) / bin_width_log2)) + 1
    edges = start + bin_width_log2 * np.arange(n_bins + 1)
    while edges[-1] < arr.max():  # guard against rounding in the edge grid
        n_bins += 1
        edges = start + bin_width_log2 * np.arange(n_bins + 1)
    counts, _ = np.histogram(arr, bins=edges)

    n = int(arr.size)
    bins = tuple(
        HistogramBin(
            lo_log2=float(edges[i]),
            hi_log2=float(edges[i + 1]),
            count=int(counts[i]),
            density=float(counts[i] / (n * bin_width_log2)),
        )
        for i in range(n_bins)
    )
    return Histogram(bin_width_log2=bin_width_log2, bins=bins, n_total=n)
