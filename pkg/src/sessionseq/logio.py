"""Reading and writing per-category, per-hour event log directories.

Layout: ``root/category/YYYY/MM/DD/HH/`` holding ``*.log`` (or ``*.log.gz``)
files of newline-delimited JSON records, one event per line. Hours with no
directory are empty partitions, not errors. No ordering is guaranteed within
or across files; scans deliver a multiset.
"""

from __future__ import annotations

import gzip
import io
import json
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import IO, Any, Iterable, Iterator

from .events import ClientEvent, event_to_record, validate_event

REJECTED_SAMPLE_LIMIT = 25

_HOUR_MS = 3_600_000


def _as_utc_hour(dt: datetime) -> datetime:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    else:
        dt = dt.astimezone(timezone.utc)
    return dt.replace(minute=0, second=0, microsecond=0)


@dataclass(frozen=True)
class LogWindow:
    """A scan range: one category, a closed interval of UTC hours."""

    root: Path
    category: str
    start: datetime
    end: datetime

    def __post_init__(self) -> None:
        object.__setattr__(self, "root", Path(self.root))
        object.__setattr__(self, "start", _as_utc_hour(self.start))
        object.__setattr__(self, "end", _as_utc_hour(self.end))
        if self.start > self.end:
            raise ValueError(f"window start {self.start} is after end {self.end}")

    @classmethod
    def for_day(cls, root: Path | str, category: str, day: date) -> "LogWindow":
        start = datetime(day.year, day.month, day.day, 0, tzinfo=timezone.utc)
        return cls(Path(root), category, start, start + timedelta(hours=23))

    def hours(self) -> Iterator[datetime]:
        hour = self.start
        while hour <= self.end:
            yield hour
            hour += timedelta(hours=1)

    def hour_dir(self, hour: datetime) -> Path:
        return (self.root / self.category / f"{hour.year:04d}"
                / f"{hour.month:02d}" / f"{hour.day:02d}" / f"{hour.hour:02d}")

    def contains_ts(self, timestamp_ms: int) -> bool:
        start_ms = int(self.start.timestamp()) * 1000
        end_ms = int(self.end.timestamp()) * 1000 + _HOUR_MS
        return start_ms <= timestamp_ms < end_ms


@dataclass
class IngestStats:
    """Per-scan accounting; every decoded line lands in ok or rejected."""

    files_read: int = 0
    records_ok: int = 0
    records_rejected: int = 0
    warnings: int = 0
    rejected_samples: list[tuple[str, int, str]] = field(default_factory=list)

    def reject(self, path: str, line_no: int, reason: str) -> None:
        self.records_rejected += 1
        if len(self.rejected_samples) < REJECTED_SAMPLE_LIMIT:
            self.rejected_samples.append((path, line_no, reason))

    def merge(self, other: "IngestStats") -> "IngestStats":
        merged = IngestStats(
            files_read=self.files_read + other.files_read,
            records_ok=self.records_ok + other.records_ok,
            records_rejected=self.records_rejected + other.records_rejected,
            warnings=self.warnings + other.warnings,
        )
        merged.rejected_samples = (
            self.rejected_samples + other.rejected_samples
        )[:REJECTED_SAMPLE_LIMIT]
        return merged


def _log_files(hour_dir: Path) -> list[Path]:
    if not hour_dir.is_dir():
        return []
    return sorted(
        p for p in hour_dir.iterdir()
        if p.name.endswith(".log") or p.name.endswith(".log.gz")
    )


def _open_log(path: Path) -> IO[str]:
    if path.name.endswith(".gz"):
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def scan_log_window(
    window: LogWindow, mode: str = "strict"
) -> tuple[Iterator[ClientEvent], IngestStats]:
    """Stream every valid record in the window.

    Returns a (stream, stats) pair; the stats fill in as the stream is
    consumed and are complete once it is exhausted. Malformed lines are
    rejected and sampled, never fatal. Unreadable files raise OSError.
    """
    stats = IngestStats()

    def generate() -> Iterator[ClientEvent]:
        for hour in window.hours():
            for path in _log_files(window.hour_dir(hour)):
                stats.files_read += 1
                with _open_log(path) as handle:
                    for line_no, line in enumerate(handle, start=1):
                        line = line.rstrip("\n")
                        if not line.strip():
                            stats.reject(str(path), line_no, "empty line")
                            continue
                        try:
                            record = json.loads(line)
                        except json.JSONDecodeError as exc:
                            stats.reject(str(path), line_no, f"bad json: {exc.msg}")
                            continue
                        if not isinstance(record, dict):
                            stats.reject(str(path), line_no, "record is not an object")
                            continue
                        report = validate_event(record, mode)
                        stats.warnings += len(report.warnings)
                        if report.ok:
                            stats.records_ok += 1
                            yield report.event
                        else:
                            stats.reject(str(path), line_no, "; ".join(report.errors))

    return generate(), stats


def record_to_line(record: dict[str, Any]) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False,
                      separators=(",", ":"))


def write_log_window(
    events: Iterable[ClientEvent],
    window: LogWindow,
    compress: bool = False,
) -> list[Path]:
    """Write events into the window's hour partitions, one file per hour.

    Events are routed by timestamp; a timestamp outside the window raises
    ValueError. Returns the paths written. ``scan(write(E))`` yields a
    multiset equal to E.
    """
    suffix = "part-00000.log.gz" if compress else "part-00000.log"
    handles: dict[int, IO[str]] = {}
    paths: dict[int, Path] = {}
    try:
        for event in events:
            if not window.contains_ts(event.timestamp):
                raise ValueError(
                    f"event timestamp {event.timestamp} falls outside window "
                    f"[{window.start}, {window.end}]"
                )
            hour_epoch = event.timestamp // _HOUR_MS
            handle = handles.get(hour_epoch)
            if handle is None:
                hour = datetime.fromtimestamp(hour_epoch * 3600, tz=timezone.utc)
                hour_dir = window.hour_dir(hour)
                hour_dir.mkdir(parents=True, exist_ok=True)
                path = hour_dir / suffix
                paths[hour_epoch] = path
                if compress:
                    # mtime=0 keeps the gzip container byte-reproducible
                    raw = gzip.GzipFile(filename=str(path), mode="wb", mtime=0)
                    handle = io.TextIOWrapper(raw, encoding="utf-8")
                else:
                    handle = open(path, "w", encoding="utf-8")
                handles[hour_epoch] = handle
            handle.write(record_to_line(event_to_record(event)))
            handle.write("\n")
    finally:
        for handle in handles.values():
            handle.close()
    return [paths[k] for k in sorted(paths)]
