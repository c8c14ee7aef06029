"""Event log parsing, user fingerprinting, cleaning filters and gap extraction."""

from __future__ import annotations

import bisect
import csv
import hashlib
import io
import json
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

from .errors import DataError
from .serde import sample_from_dict, sample_to_dict, write_jsonl
from .types import Event, InterActivitySample

log = logging.getLogger(__name__)

EPOCH_SECONDS = "epoch_seconds"
ISO8601 = "iso8601"
FORMATS = ("csv", "tsv", "jsonl")

# How many offending users a spike report names.
SPIKE_TOP_USERS = 5

# Cap on retained malformed-record samples in a ParseReport.
_MAX_ERROR_SAMPLES = 20


@dataclass(frozen=True, slots=True)
class ColumnMap:
    """Where to find the user and timestamp in each record.

    Either user_field or the fingerprint pair (ip_field + user_agent_field)
    must be set, not both.
    """

    timestamp_field: str
    timestamp_format: str = EPOCH_SECONDS
    user_field: str | None = None
    ip_field: str | None = None
    user_agent_field: str | None = None
    accept_language_field: str | None = None

    def __post_init__(self):
        if not self.timestamp_field:
            raise ValueError("timestamp_field is required")
        if self.timestamp_format not in (EPOCH_SECONDS, ISO8601):
            raise ValueError(f"unknown timestamp_format {self.timestamp_format!r}")
        has_user = self.user_field is not None
        has_fingerprint = self.ip_field is not None and self.user_agent_field is not None
        if has_user == has_fingerprint:
            raise ValueError("exactly one of user_field or (ip_field + user_agent_field) must be set")

    def to_dict(self) -> dict:
        return {
            "user_field": self.user_field,
            "timestamp_field": self.timestamp_field,
            "timestamp_format": self.timestamp_format,
            "ip_field": self.ip_field,
            "user_agent_field": self.user_agent_field,
            "accept_language_field": self.accept_language_field,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ColumnMap":
        return cls(
            timestamp_field=d["timestamp_field"],
            timestamp_format=d.get("timestamp_format", EPOCH_SECONDS),
            user_field=d.get("user_field"),
            ip_field=d.get("ip_field"),
            user_agent_field=d.get("user_agent_field"),
            accept_language_field=d.get("accept_language_field"),
        )


@dataclass(frozen=True, slots=True)
class FilterSpec:
    """Cleaning rules applied to extracted samples."""

    min_delta_s: int = 0
    exclude_exact_deltas: frozenset[int] = frozenset()
    exclude_users: frozenset[str] = frozenset()
    max_events_per_user: int | None = None

    def __post_init__(self):
        if self.min_delta_s < 0:
            raise ValueError("min_delta_s must be >= 0")
        object.__setattr__(self, "exclude_exact_deltas", frozenset(self.exclude_exact_deltas))
        object.__setattr__(self, "exclude_users", frozenset(self.exclude_users))
        if self.max_events_per_user is not None and self.max_events_per_user < 1:
            raise ValueError("max_events_per_user must be >= 1")

    def to_dict(self) -> dict:
        return {
            "min_delta_s": self.min_delta_s,
            "exclude_exact_deltas": sorted(self.exclude_exact_deltas),
            "exclude_users": sorted(self.exclude_users),
            "max_events_per_user": self.max_events_per_user,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FilterSpec":
        return cls(
            min_delta_s=d.get("min_delta_s", 0),
            exclude_exact_deltas=frozenset(d.get("exclude_exact_deltas", ())),
            exclude_users=frozenset(d.get("exclude_users", ())),
            max_events_per_user=d.get("max_events_per_user"),
        )


@dataclass(frozen=True, slots=True)
class SpikeReport:
    """One anomalous exact-delta concentration."""

    delta_s: int
    count: int
    neighborhood_mean: float
    ratio: float
    share: float
    offending_users: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "delta_s": self.delta_s,
            "count": self.count,
            "neighborhood_mean": self.neighborhood_mean,
            "ratio": self.ratio,
            "share": self.share,
            "offending_users": list(self.offending_users),
        }


@dataclass(frozen=True)
class ParseResult:
    events: tuple[Event, ...]
    n_records: int
    n_malformed: int
    errors: tuple[str, ...] = ()  # first few malformed records, for context


@dataclass(frozen=True)
class FilterResult:
    samples: tuple[InterActivitySample, ...]
    removed: dict[str, int] = field(default_factory=dict)  # rule name -> count


def fingerprint(ip: str, user_agent: str, accept_language: str = "") -> str:
    """Stable pseudo-identity: first 16 bytes of SHA-256 over the unit-separated fields."""
    if not ip or not user_agent:
        raise ValueError("ip and user_agent must be non-empty")
    payload = ip.encode("utf-8") + b"\x1f" + user_agent.encode("utf-8") + b"\x1f" + accept_language.encode("utf-8")
    return hashlib.sha256(payload).hexdigest()[:32]


def _parse_timestamp(raw: str, timestamp_format: str) -> int:
    if timestamp_format == EPOCH_SECONDS:
        value = float(raw)
        if not math.isfinite(value) or value < 0:
            raise ValueError(f"bad epoch timestamp {raw!r}")
        return int(value)  # sub-second precision truncated
    text = raw.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        raise ValueError(f"timestamp {raw!r} has no zone designator")
    return int(dt.timestamp())


def _record_to_event(record: dict, columns: ColumnMap) -> Event:
    raw_ts = record.get(columns.timestamp_field)
    if raw_ts is None or raw_ts == "":
        raise ValueError(f"missing {columns.timestamp_field!r}")
    timestamp = _parse_timestamp(str(raw_ts), columns.timestamp_format)
    if columns.user_field is not None:
        user = record.get(columns.user_field)
        if not user:
            raise ValueError(f"missing {columns.user_field!r}")
        user = str(user)
    else:
        ip = record.get(columns.ip_field) or ""
        agent = record.get(columns.user_agent_field) or ""
        lang = ""
        if columns.accept_language_field is not None:
            lang = str(record.get(columns.accept_language_field) or "")
        user = fingerprint(str(ip), str(agent), lang)
    return Event(user_id=user, timestamp_s=timestamp)


def _iter_records(text: str, format: str, columns: ColumnMap):
    """Yield (line_no, record dict or raw-error string)."""
    if format == "jsonl":
        for line_no, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                if not isinstance(record, dict):
                    raise ValueError("record is not an object")
            except ValueError as exc:
                yield line_no, f"line {line_no}: {exc}"
                continue
            yield line_no, record
        return

    delimiter = "\t" if format == "tsv" else ","
    reader = csv.DictReader(io.StringIO(text), delimiter=delimiter)
    if reader.fieldnames is None:
        return
    declared = [
        f
        for f in (
            columns.user_field,
            columns.timestamp_field,
            columns.ip_field,
            columns.user_agent_field,
            columns.accept_language_field,
        )
        if f is not None
    ]
    missing = [f for f in declared if f not in reader.fieldnames]
    if missing:
        raise DataError(f"declared columns missing from header: {missing}")
    for line_no, record in enumerate(reader, start=2):
        yield line_no, record


def parse_events(source, format: str, columns: ColumnMap) -> ParseResult:
    """Parse raw event records into Events, tolerating scattered bad rows.

    source may be bytes, a binary stream, or a path. Raises DataError when the
    source is unreadable, the declared columns are absent, or more than half
    of the records are malformed (a sign the ColumnMap is wrong).
    """
    if format not in FORMATS:
        raise DataError(f"unknown format {format!r}; expected one of {FORMATS}")
    if isinstance(source, (str, Path)):
        try:
            data = Path(source).read_bytes()
        except OSError as exc:
            raise DataError(f"cannot read {source}: {exc}") from exc
    elif isinstance(source, bytes):
        data = source
    else:
        data = source.read()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DataError(f"source is not valid UTF-8: {exc}") from exc

    events: list[Event] = []
    n_records = 0
    errors: list[str] = []
    for line_no, record in _iter_records(text, format, columns):
        n_records += 1
        if isinstance(record, str):  # pre-formatted decode error
            errors.append(record)
            continue
        try:
            events.append(_record_to_event(record, columns))
        except (ValueError, TypeError) as exc:
            errors.append(f"line {line_no}: {exc}")

    n_malformed = n_records - len(events)
    if n_records > 0 and n_malformed * 2 > n_records:
        raise DataError(
            f"{n_malformed}/{n_records} records malformed; check the column map "
            f"(first error: {errors[0]})"
        )
    return ParseResult(
        events=tuple(events),
        n_records=n_records,
        n_malformed=n_malformed,
        errors=tuple(errors[:_MAX_ERROR_SAMPLES]),
    )


def compute_deltas(events) -> list[InterActivitySample]:
    """Per-user gaps between consecutive events, zero and negative gaps dropped.

    Input order is irrelevant: events are grouped by user and stably sorted by
    timestamp, and output users are emitted in sorted order, so any permutation
    of the same events yields the same samples.
    """
    by_user: dict[str, list[int]] = defaultdict(list)
    for event in events:
        by_user[event.user_id].append(event.timestamp_s)
    samples: list[InterActivitySample] = []
    for user in sorted(by_user):
        stamps = sorted(by_user[user])
        for prev, cur in zip(stamps, stamps[1:]):
            delta = cur - prev
            if delta <= 0:
                continue
            samples.append(InterActivitySample(user_id=user, delta_s=delta))
    return samples


def detect_spikes(
    samples,
    window_s: int = 60,
    ratio_min: float = 10.0,
    share_min: float = 0.001,
) -> list[SpikeReport]:
    """Find exact delta values wildly over-represented against their neighborhood.

    A value spikes when its count is at least ratio_min times the mean count
    over every integer delta within window_s (absent values count zero), and
    it holds at least share_min of all samples. A neighborhood with zero mass
    gives no signal and is skipped with a warning.
    """
    samples = list(samples)
    if not samples:
        raise DataError("detect_spikes requires at least one sample")
    counts = Counter(s.delta_s for s in samples)
    n_total = len(samples)
    values = sorted(counts)
    # prefix sums over the sorted distinct values for O(log n) window counts
    cumulative = [0]
    for v in values:
        cumulative.append(cumulative[-1] + counts[v])

    def window_total(lo: int, hi: int) -> int:
        i = bisect.bisect_left(values, lo)
        j = bisect.bisect_right(values, hi)
        return cumulative[j] - cumulative[i]

    reports = []
    n_no_signal = 0
    for v in values:
        lo = max(1, v - window_s)
        hi = v + window_s
        slots = hi - lo  # excludes v itself
        if slots <= 0:
            continue
        neighborhood = window_total(lo, hi) - counts[v]
        mean = neighborhood / slots
        if mean == 0.0:
            n_no_signal += 1  # empty background; spike indistinguishable
            continue
        ratio = counts[v] / mean
        share = counts[v] / n_total
        if ratio >= ratio_min and share >= share_min:
            per_user = Counter(s.user_id for s in samples if s.delta_s == v)
            top = sorted(per_user.items(), key=lambda kv: (-kv[1], kv[0]))[:SPIKE_TOP_USERS]
            reports.append(
                SpikeReport(
                    delta_s=v,
                    count=counts[v],
                    neighborhood_mean=mean,
                    ratio=ratio,
                    share=share,
                    offending_users=tuple(u for u, _ in top),
                )
            )
    if n_no_signal:
        log.warning("%d delta value(s) had an empty neighborhood; spikes there cannot be assessed", n_no_signal)
    reports.sort(key=lambda r: (-r.share, r.delta_s))
    return reports


def apply_filters(samples, spec: FilterSpec) -> FilterResult:
    """Drop samples violating the FilterSpec; removal counts keyed by rule."""
    removed = {"exclude_users": 0, "min_delta_s": 0, "exclude_exact_deltas": 0, "max_events_per_user": 0}
    kept: list[InterActivitySample] = []
    for s in samples:
        if s.user_id in spec.exclude_users:
            removed["exclude_users"] += 1
        elif s.delta_s < spec.min_delta_s:
            removed["min_delta_s"] += 1
        elif s.delta_s in spec.exclude_exact_deltas:
            removed["exclude_exact_deltas"] += 1
        else:
            kept.append(s)

    if spec.max_events_per_user is not None:
        # a user with E events contributes at most E-1 samples
        per_user = Counter(s.user_id for s in kept)
        heavy = {u for u, c in per_user.items() if c >= spec.max_events_per_user}
        if heavy:
            removed["max_events_per_user"] = sum(per_user[u] for u in heavy)
            kept = [s for s in kept if s.user_id not in heavy]

    return FilterResult(samples=tuple(kept), removed=removed)


def save_samples(path, samples) -> None:
    write_jsonl(path, (sample_to_dict(s) for s in samples))


def load_samples(path) -> list[InterActivitySample]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return [sample_from_dict(json.loads(line)) for line in fh if line.strip()]
    except OSError as exc:
        raise DataError(f"cannot read samples from {path}: {exc}") from exc
    except (ValueError, KeyError) as exc:
        raise DataError(f"bad samples file {path}: {exc}") from exc


def write_events_csv(path, events) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "timestamp_s"])
        for e in events:
            writer.writerow([e.user_id, e.timestamp_s])


def write_events_jsonl(path, events) -> None:
    from .serde import event_to_dict

    write_jsonl(path, (event_to_dict(e) for e in events))


def default_column_map() -> ColumnMap:
    """Matches the event files this package writes itself."""
    return ColumnMap(user_field="user_id", timestamp_field="timestamp_s", timestamp_format=EPOCH_SECONDS)
