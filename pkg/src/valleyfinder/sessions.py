"""Segment per-user event streams into sessions and summarize them."""

from __future__ import annotations

import statistics
from collections import defaultdict
from dataclasses import dataclass

from .types import Event, Session


@dataclass(frozen=True, slots=True)
class SessionSummary:
    n_sessions: int
    n_users: int
    events_per_session: tuple[float, float, int]  # mean, median, max
    duration_s: tuple[float, float, int]  # mean, median, max
    single_event_share: float

    def to_dict(self) -> dict:
        return {
            "n_sessions": self.n_sessions,
            "n_users": self.n_users,
            "events_per_session": {
                "mean": self.events_per_session[0],
                "median": self.events_per_session[1],
                "max": self.events_per_session[2],
            },
            "duration_s": {
                "mean": self.duration_s[0],
                "median": self.duration_s[1],
                "max": self.duration_s[2],
            },
            "single_event_share": self.single_event_share,
        }


def sessionize(events, threshold_s: int) -> list[Session]:
    """Split each user's time-ordered events wherever a gap exceeds threshold_s.

    A gap exactly equal to the threshold does not split. Output is ordered by
    (user_id, start_s); sessions never span users.
    """
    if threshold_s < 1:
        raise ValueError("threshold_s must be >= 1")
    by_user: dict[str, list[int]] = defaultdict(list)
    for event in events:
        by_user[event.user_id].append(event.timestamp_s)

    sessions: list[Session] = []
    for user in sorted(by_user):
        stamps = sorted(by_user[user])
        start = prev = stamps[0]
        count = 1
        for ts in stamps[1:]:
            if ts - prev > threshold_s:
                sessions.append(_close(user, start, prev, count))
                start = ts
                count = 1
            else:
                count += 1
            prev = ts
        sessions.append(_close(user, start, prev, count))
    return sessions


def _close(user: str, start: int, end: int, count: int) -> Session:
    return Session(user_id=user, start_s=start, end_s=end, n_events=count, duration_s=end - start)


def session_summary(sessions) -> SessionSummary:
    """Aggregate session counts, sizes and durations; empty input yields zeros."""
    sessions = list(sessions)
    if not sessions:
        return SessionSummary(
            n_sessions=0,
            n_users=0,
            events_per_session=(0.0, 0.0, 0),
            duration_s=(0.0, 0.0, 0),
            single_event_share=0.0,
        )
    counts = [s.n_events for s in sessions]
    durations = [s.duration_s for s in sessions]
    return SessionSummary(
        n_sessions=len(sessions),
        n_users=len({s.user_id for s in sessions}),
        events_per_session=(statistics.fmean(counts), float(statistics.median(counts)), max(counts)),
        duration_s=(statistics.fmean(durations), float(statistics.median(durations)), max(durations)),
        single_event_share=sum(1 for c in counts if c == 1) / len(sessions),
    )
