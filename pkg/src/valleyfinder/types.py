"""Core value types shared by every other module.

All types are immutable after construction; constructors validate their
invariants and raise ValueError on violation, so a constructed value is
always safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

LOG2_HOUR = math.log2(3600.0)
LOG2_MINUTE = math.log2(60.0)
LOG2_DAY = math.log2(86400.0)

# Everything with a mean at or above ~one month is an extended absence, not a
# between-session gap. 21.3 log2-seconds ~= 38 days.
BREAK_BOUNDARY_LOG2 = 21.3


class Label(str, Enum):
    """Cluster roles for mixture components, ordered by time scale."""

    SHORT_WITHIN = "short_within"
    WITHIN = "within"
    BETWEEN = "between"
    BREAK = "break"


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValueError(message)


def _is_int(value) -> bool:
    # bool is an int subclass but never a valid count/timestamp
    return isinstance(value, int) and not isinstance(value, bool)


@dataclass(frozen=True, slots=True)
class Event:
    """One timestamped user-initiated action."""

    user_id: str
    timestamp_s: int
    kind: str | None = None

    def __post_init__(self):
        _require(isinstance(self.user_id, str) and self.user_id != "", "user_id must be a non-empty string")
        _require(_is_int(self.timestamp_s), "timestamp_s must be an integer")
        _require(self.timestamp_s >= 0, "timestamp_s must be >= 0")


@dataclass(frozen=True, slots=True)
class InterActivitySample:
    """A per-user gap between consecutive events, in seconds and log2-seconds."""

    user_id: str
    delta_s: int
    log2_delta: float = None  # type: ignore[assignment]  # computed when omitted

    def __post_init__(self):
        _require(isinstance(self.user_id, str) and self.user_id != "", "user_id must be a non-empty string")
        _require(_is_int(self.delta_s) and self.delta_s >= 1, "delta_s must be an integer >= 1")
        exact = math.log2(self.delta_s)
        if self.log2_delta is None:
            object.__setattr__(self, "log2_delta", exact)
        else:
            _require(
                math.isclose(self.log2_delta, exact, rel_tol=0.0, abs_tol=1e-9),
                f"log2_delta {self.log2_delta} != log2({self.delta_s})",
            )


@dataclass(frozen=True, slots=True)
class MixtureComponent:
    """One weighted Gaussian over log2 inter-activity time."""

    mean: float
    stddev: float
    weight: float
    label: Label | None = None

    def __post_init__(self):
        _require(math.isfinite(self.mean), "mean must be finite")
        _require(math.isfinite(self.stddev) and self.stddev > 0.0, "stddev must be > 0")
        _require(0.0 < self.weight <= 1.0, "weight must be in (0, 1]")
        if self.label is not None and not isinstance(self.label, Label):
            object.__setattr__(self, "label", Label(self.label))


@dataclass(frozen=True, slots=True)
class MixtureFit:
    """A fitted mixture over log2 gaps, components sorted ascending by mean."""

    components: tuple[MixtureComponent, ...]
    log_likelihood: float
    n: int
    iterations: int
    converged: bool
    seed: int
    degenerate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        violations = validate_fit(self)
        if violations:
            raise ValueError("; ".join(violations))

    @classmethod
    def unvalidated(
        cls,
        components,
        log_likelihood: float = 0.0,
        n: int = 0,
        iterations: int = 0,
        converged: bool = True,
        seed: int = 0,
        degenerate: bool = False,
    ) -> "MixtureFit":
        """Build a fit without invariant checks, for diagnostics on untrusted data."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "components", tuple(components))
        object.__setattr__(obj, "log_likelihood", log_likelihood)
        object.__setattr__(obj, "n", n)
        object.__setattr__(obj, "iterations", iterations)
        object.__setattr__(obj, "converged", converged)
        object.__setattr__(obj, "seed", seed)
        object.__setattr__(obj, "degenerate", degenerate)
        return obj

    @property
    def k(self) -> int:
        return len(self.components)

    def labeled(self) -> bool:
        return all(c.label is not None for c in self.components)


def validate_fit(fit: MixtureFit) -> list[str]:
    """Return a description of every violated MixtureFit invariant (empty if none)."""
    violations: list[str] = []
    k = len(fit.components)
    if not 2 <= k <= 4:
        violations.append(f"component count {k} outside [2, 4]")
    for i, comp in enumerate(fit.components):
        if not isinstance(comp, MixtureComponent):
            violations.append(f"component {i} is not a MixtureComponent")
            return violations
        if not (math.isfinite(comp.stddev) and comp.stddev > 0):
            violations.append(f"component {i} stddev {comp.stddev} not > 0")
        if not (0.0 < comp.weight <= 1.0):
            violations.append(f"component {i} weight {comp.weight} outside (0, 1]")
    total = sum(c.weight for c in fit.components)
    if abs(total - 1.0) > 1e-9:
        violations.append(f"weights sum to {total}, expected 1 within 1e-9")
    keys = [(c.mean, c.stddev) for c in fit.components]
    if any(b <= a for a, b in zip(keys, keys[1:])):
        violations.append("components not strictly ordered by (mean, stddev)")
    if fit.n < 0:
        violations.append(f"n {fit.n} negative")
    if fit.iterations < 0:
        violations.append(f"iterations {fit.iterations} negative")
    return violations


@dataclass(frozen=True, slots=True)
class FitConfig:
    """EM settings; defaults match the documented behaviour of em_fit."""

    k: int
    max_iter: int = 1000
    rel_tol: float = 1e-8
    restarts: int = 10
    seed: int = 0
    sigma_floor: float = 1e-3
    init_strategy: str = "quantile"

    def __post_init__(self):
        _require(_is_int(self.k) and 2 <= self.k <= 4, "k must be an integer in [2, 4]")
        _require(_is_int(self.max_iter) and self.max_iter > 0, "max_iter must be > 0")
        _require(self.rel_tol > 0.0, "rel_tol must be > 0")
        _require(_is_int(self.restarts) and self.restarts > 0, "restarts must be > 0")
        _require(_is_int(self.seed) and self.seed >= 0, "seed must be an integer >= 0")
        _require(self.sigma_floor > 0.0, "sigma_floor must be > 0")
        _require(self.init_strategy in ("quantile", "random"), "init_strategy must be 'quantile' or 'random'")


@dataclass(frozen=True, slots=True)
class ThresholdResult:
    """The within/between density crossover, converted to seconds and minutes."""

    t_log2: float
    threshold_s: float
    threshold_min: float
    within_group: tuple[int, ...]
    between_group: tuple[int, ...]
    bracket: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "within_group", tuple(self.within_group))
        object.__setattr__(self, "between_group", tuple(self.between_group))
        object.__setattr__(self, "bracket", tuple(self.bracket))
        lo, hi = self.bracket
        _require(lo < self.t_log2 < hi, f"t_log2 {self.t_log2} outside bracket ({lo}, {hi})")
        _require(
            math.isclose(self.threshold_s, 2.0 ** self.t_log2, rel_tol=1e-12),
            "threshold_s != 2**t_log2",
        )
        _require(
            math.isclose(self.threshold_min, self.threshold_s / 60.0, rel_tol=1e-12),
            "threshold_min != threshold_s/60",
        )
        _require(len(self.within_group) > 0 and len(self.between_group) > 0, "both groups must be non-empty")


@dataclass(frozen=True, slots=True)
class Session:
    """A maximal run of one user's events with all internal gaps <= threshold."""

    user_id: str
    start_s: int
    end_s: int
    n_events: int
    duration_s: int

    def __post_init__(self):
        _require(isinstance(self.user_id, str) and self.user_id != "", "user_id must be a non-empty string")
        _require(_is_int(self.start_s) and _is_int(self.end_s), "start_s/end_s must be integers")
        _require(self.start_s <= self.end_s, "start_s must be <= end_s")
        _require(_is_int(self.n_events) and self.n_events >= 1, "n_events must be >= 1")
        _require(self.duration_s == self.end_s - self.start_s, "duration_s != end_s - start_s")
        if self.n_events == 1:
            _require(self.duration_s == 0, "single-event session must have duration 0")


@dataclass(frozen=True, slots=True)
class HistogramBin:
    lo_log2: float
    hi_log2: float
    count: int
    density: float

    def __post_init__(self):
        _require(self.hi_log2 > self.lo_log2, "bin must have positive width")
        _require(_is_int(self.count) and self.count >= 0, "count must be an integer >= 0")
        _require(self.density >= 0.0, "density must be >= 0")


@dataclass(frozen=True, slots=True)
class Histogram:
    """Counts and densities of log2 gaps over contiguous fixed-width bins."""

    bin_width_log2: float
    bins: tuple[HistogramBin, ...]
    n_total: int

    def __post_init__(self):
        object.__setattr__(self, "bins", tuple(self.bins))
        _require(self.bin_width_log2 > 0.0, "bin_width_log2 must be > 0")
        _require(_is_int(self.n_total) and self.n_total >= 0, "n_total must be an integer >= 0")
        for prev, cur in zip(self.bins, self.bins[1:]):
            _require(
                math.isclose(prev.hi_log2, cur.lo_log2, rel_tol=0.0, abs_tol=1e-9),
                "bins must be contiguous and non-overlapping",
            )
        if self.n_total > 0:
            mass = sum(b.density * self.bin_width_log2 for b in self.bins)
            _require(abs(mass - 1.0) <= 1e-9, f"densities integrate to {mass}, expected 1")
            _require(sum(b.count for b in self.bins) == self.n_total, "bin counts must sum to n_total")
