"""Synthetic sample and event-log generation from specified mixtures.

This is the verification oracle for the fitting pipeline: draw from known
parameters, then check that extraction and fitting recover them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .serde import component_from_dict, component_to_dict
from .types import Event, InterActivitySample, MixtureComponent

_WEIGHT_TOL = 1e-9


@dataclass(frozen=True, slots=True)
class SynthSpec:
    """Recipe for a synthetic event log."""

    components: tuple[MixtureComponent, ...]
    n_users: int
    events_per_user: int | tuple[str, float]  # fixed count, or ("poisson", mean)
    start_s: int = 0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        total = sum(c.weight for c in self.components)
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"component weights sum to {total}, expected 1")
        if self.n_users < 1:
            raise ValueError("n_users must be >= 1")
        if isinstance(self.events_per_user, tuple):
            kind, mean = self.events_per_user
            if kind != "poisson" or mean <= 0:
                raise ValueError("events_per_user distribution must be ('poisson', mean > 0)")
        elif self.events_per_user < 1:
            raise ValueError("events_per_user must be >= 1")
        if self.start_s < 0:
            raise ValueError("start_s must be >= 0")

    def to_dict(self) -> dict:
        events = self.events_per_user
        if isinstance(events, tuple):
            events = {"poisson": events[1]}
        return {
            "components": [component_to_dict(c) for c in self.components],
            "n_users": self.n_users,
            "events_per_user": events,
            "start_s": self.start_s,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        events = d["events_per_user"]
        if isinstance(events, dict):
            events = ("poisson", float(events["poisson"]))
        return cls(
            components=tuple(component_from_dict(c) for c in d["components"]),
            n_users=d["n_users"],
            events_per_user=events,
            start_s=d.get("start_s", 0),
            seed=d.get("seed", 0),
        )


def _draw_log2(components, n: int, rng: np.random.Generator) -> np.ndarray:
    weights = np.array([c.weight for c in components], dtype=np.float64)
    means = np.array([c.mean for c in components])
    stddevs = np.array([c.stddev for c in components])
    which = rng.choice(len(components), size=n, p=weights / weights.sum())
    return rng.normal(means[which], stddevs[which])


def sample_mixture(components, n: int, seed: int) -> np.ndarray:
    """Draw n log2 gaps from the mixture, deterministically under seed."""
    components = tuple(components)
    if n < 1:
        raise DataError("n must be >= 1")
    total = sum(c.weight for c in components)
    if abs(total - 1.0) > _WEIGHT_TOL:
        raise DataError(f"component weights sum to {total}, expected 1")
    return _draw_log2(components, n, np.random.default_rng(seed))


def _draw_integer_deltas(components, n: int, rng: np.random.Generator) -> np.ndarray:
    """Whole-second gaps: round 2**x to the nearest second, redraw zeros."""
    deltas = np.rint(np.exp2(_draw_log2(components, n, rng)))
    while True:
        zero = deltas < 1
        if not zero.any():
            break
        deltas[zero] = np.rint(np.exp2(_draw_log2(components, int(zero.sum()), rng)))
    return deltas.astype(np.int64)


def generate_event_log(spec: SynthSpec, return_deltas: bool = False):
    """Build per-user event streams with mixture-drawn gaps.

    With return_deltas=True also returns the drawn gaps as samples, the ground
    truth for round-trip checks against ingest.compute_deltas.
    """
    events: list[Event] = []
    truth: list[InterActivitySample] = []
    width = max(4, len(str(spec.n_users - 1)))
    for idx in range(spec.n_users):
        rng = np.random.default_rng([spec.seed, idx])
        user = f"u{idx:0{width}d}"
        if isinstance(spec.events_per_user, tuple):
            n_events = max(1, int(rng.poisson(spec.events_per_user[1])))
        else:
            n_events = spec.events_per_user
        ts = spec.start_s
        events.append(Event(user_id=user, timestamp_s=ts))
        if n_events > 1:
            deltas = _draw_integer_deltas(spec.components, n_events - 1, rng)
            for d in deltas:
                ts += int(d)
                events.append(Event(user_id=user, timestamp_s=ts))
                if return_deltas:
                    truth.append(InterActivitySample(user_id=user, delta_s=int(d)))
    if return_deltas:
        return events, truth
    return events
