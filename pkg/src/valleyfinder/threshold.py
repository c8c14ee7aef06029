"""Inactivity threshold derivation and the diagnostic checks around it.

The threshold is the crossover point where the within-session and
between-session weighted densities are equal, isolated by bisection between
the two group means. Valley detection and the Davies-Bouldin index are
advisory diagnostics; neither gates the threshold.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._validation import as_sample_array
from .em import normal_pdf, responsibilities
from .errors import DataError, NumericalError
from .types import LOG2_DAY, LOG2_MINUTE, Histogram, Label, MixtureFit, ThresholdResult

_WITHIN_LABELS = (Label.SHORT_WITHIN, Label.WITHIN)
_BETWEEN_LABELS = (Label.BETWEEN, Label.BREAK)

# Bisection runs until the bracket is this narrow; the density difference at
# the returned point is then far below the 1e-9 equality requirement.
_BRACKET_TOL = 1e-12
_DENSITY_EQ_TOL = 1e-9


@dataclass(frozen=True, slots=True)
class ValleyReport:
    """Outcome of the histogram valley pre-flight check."""

    found: bool
    valley_log2: float | None = None
    valley_minutes: float | None = None
    peak_lo_log2: float | None = None
    peak_hi_log2: float | None = None
    smoothing_window_bins: int = 5

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "valley_log2": self.valley_log2,
            "valley_minutes": self.valley_minutes,
            "peak_lo_log2": self.peak_lo_log2,
            "peak_hi_log2": self.peak_hi_log2,
            "smoothing_window_bins": self.smoothing_window_bins,
        }


@dataclass(frozen=True, slots=True)
class DbiReport:
    """Davies-Bouldin index with its per-cluster ingredients."""

    index: float
    per_cluster_dispersion: tuple[float, ...]
    centroid_distances: tuple[tuple[float, ...], ...]
    assignment_counts: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "per_cluster_dispersion": list(self.per_cluster_dispersion),
            "centroid_distances": [list(row) for row in self.centroid_distances],
            "assignment_counts": list(self.assignment_counts),
        }


def group_components(fit: MixtureFit) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Split component indices into the within and between groups by label."""
    if not fit.labeled():
        raise DataError("fit must be labeled before grouping (run label_components)")
    within = tuple(i for i, c in enumerate(fit.components) if c.label in _WITHIN_LABELS)
    between = tuple(i for i, c in enumerate(fit.components) if c.label in _BETWEEN_LABELS)
    if not between:
        raise NumericalError("no between-session component: data looks unimodal, no threshold derivable")
    if not within:
        raise NumericalError("no within-session component: no threshold derivable")
    return within, between


def group_density(fit: MixtureFit, group, t_log2: float) -> float:
    """Weighted density of one component group at a point."""
    if not group:
        raise DataError("group must be non-empty")
    return float(
        sum(fit.components[i].weight * normal_pdf(t_log2, fit.components[i].mean, fit.components[i].stddev) for i in group)
    )


def crossover_threshold(fit: MixtureFit) -> ThresholdResult:
    """Bisect for the point where the two group densities are equal.

    The bracket [max within mean, min between mean] isolates the meaningful
    root: the log-density difference is quadratic in t, so a second, spurious
    crossing exists outside the bracket.
    """
    within, between = group_components(fit)
    lo = max(fit.components[i].mean for i in within)
    hi = min(fit.components[i].mean for i in between)

    def gap(t: float) -> float:
        return group_density(fit, within, t) - group_density(fit, between, t)

    g_lo, g_hi = gap(lo), gap(hi)
    if not (math.isfinite(g_lo) and math.isfinite(g_hi)):
        raise NumericalError(f"non-finite group densities at bracket ends: {g_lo}, {g_hi}")
    if g_lo <= 0.0 or g_hi >= 0.0:
        raise NumericalError(
            "group densities do not cross inside the bracket "
            f"[{lo}, {hi}]: difference is {g_lo} at lo and {g_hi} at hi (pathological overlap)"
        )

    a, b = lo, hi
    for _ in range(200):
        mid = 0.5 * (a + b)
        g_mid = gap(mid)
        if g_mid == 0.0:
            a = b = mid
            break
        if g_mid > 0.0:
            a = mid
        else:
            b = mid
        if b - a <= _BRACKET_TOL:
            break
    t = 0.5 * (a + b)

    if abs(gap(t)) >= _DENSITY_EQ_TOL:
        raise NumericalError(f"bisection did not equalize group densities at t={t}: gap {gap(t)}")

    threshold_s = 2.0 ** t
    return ThresholdResult(
        t_log2=t,
        threshold_s=threshold_s,
        threshold_min=threshold_s / 60.0,
        within_group=within,
        between_group=between,
        bracket=(lo, hi),
    )


def _smooth(density: np.ndarray, window: int) -> np.ndarray:
    half = window // 2
    out = np.empty_like(density)
    for i in range(density.size):
        lo = max(0, i - half)
        out[i] = density[lo : i + half + 1].mean()
    return out


def _local_maxima(values: np.ndarray) -> list[int]:
    peaks = []
    n = values.size
    for i in range(n):
        left_ok = i == 0 or values[i] > values[i - 1]
        right_ok = i == n - 1 or values[i] >= values[i + 1]
        if left_ok and right_ok:
            peaks.append(i)
    return peaks


def find_valley(
    hist: Histogram,
    lo_log2: float = LOG2_MINUTE,
    hi_log2: float = LOG2_DAY,
    smooth_bins: int = 5,
) -> ValleyReport:
    """Look for a density valley between the two dominant histogram peaks.

    The histogram density is smoothed with a centered moving average, the two
    highest local maxima become the flanking peaks, and the valley is the
    minimum strictly between them. found is True only when that valley lands
    inside [lo_log2, hi_log2]; a monotone or unimodal curve reports no valley.
    """
    if smooth_bins < 1:
        raise ValueError("smooth_bins must be >= 1")
    if len(hist.bins) < 3:
        return ValleyReport(found=False, smoothing_window_bins=smooth_bins)

    density = np.array([b.density for b in hist.bins], dtype=np.float64)
    centers = np.array([(b.lo_log2 + b.hi_log2) / 2.0 for b in hist.bins])
    smoothed = _smooth(density, smooth_bins)

    peaks = _local_maxima(smoothed)
    if len(peaks) < 2:
        return ValleyReport(found=False, smoothing_window_bins=smooth_bins)
    top_two = sorted(sorted(peaks, key=lambda i: smoothed[i], reverse=True)[:2])
    p_lo, p_hi = top_two
    interior = np.arange(p_lo + 1, p_hi)
    if interior.size == 0:
        return ValleyReport(found=False, smoothing_window_bins=smooth_bins)

    valley_idx = int(interior[np.argmin(smoothed[interior])])
    valley = float(centers[valley_idx])
    found = lo_log2 <= valley <= hi_log2
    return ValleyReport(
        found=found,
        valley_log2=valley,
        valley_minutes=2.0 ** valley / 60.0,
        peak_lo_log2=float(centers[p_lo]),
        peak_hi_log2=float(centers[p_hi]),
        smoothing_window_bins=smooth_bins,
    )


def davies_bouldin(xs, fit: MixtureFit) -> DbiReport:
    """Davies-Bouldin index over hard component assignments.

    1-D distances, mean-absolute dispersion around assigned-sample centroids.
    Lower is better separated. Components that attract no samples are dropped
    from the index with a warning.
    """
    arr = as_sample_array(xs)
    if arr.size == 0:
        raise DataError("davies_bouldin requires at least one sample")
    k = fit.k
    assign = responsibilities(arr, fit.components).argmax(axis=1)
    counts = np.bincount(assign, minlength=k)

    occupied = [i for i in range(k) if counts[i] > 0]
    if len(occupied) < 2:
        raise NumericalError("all samples assigned to one cluster; index undefined")
    if len(occupied) < k:
        warnings.warn(f"{k - len(occupied)} empty cluster(s) excluded from the index", stacklevel=2)

    centroids = np.array([arr[assign == i].mean() for i in occupied])
    dispersion = np.array([np.abs(arr[assign == i] - c).mean() for i, c in zip(occupied, centroids)])
    distances = np.abs(centroids[:, None] - centroids[None, :])

    m = len(occupied)
    ratios = np.zeros(m)
    for i in range(m):
        others = [j for j in range(m) if j != i]
        if any(distances[i, j] == 0.0 for j in others):
            raise NumericalError("coincident cluster centroids; index undefined")
        ratios[i] = max((dispersion[i] + dispersion[j]) / distances[i, j] for j in others)
    index = float(ratios.mean())

    return DbiReport(
        index=index,
        per_cluster_dispersion=tuple(float(s) for s in dispersion),
        centroid_distances=tuple(tuple(float(v) for v in row) for row in distances),
        assignment_counts=tuple(int(c) for c in counts),
    )
