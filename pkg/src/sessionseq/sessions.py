"""Session reconstruction and encoded session-sequence records.

Events are grouped by (user_id, session_id), ordered by timestamp (ties
broken by event-name text, then input arrival), and split wherever the gap
between consecutive events strictly exceeds the inactivity threshold
(default 30 minutes). Each resulting session is materialized as one unicode
string with one scalar value per event, plus ids, ip, duration and start
time. Beyond relative order and total duration, no timing survives.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Iterator

from .dictionary import Dictionary
from .errors import UnknownSymbol
from .events import ClientEvent

DEFAULT_GAP_SECONDS = 1800

UNKNOWN_SAMPLE_LIMIT = 25


@dataclass(frozen=True)
class SessionRecord:
    """One reconstructed session.

    ``session_sequence`` holds one dictionary code point per event, in
    session order. ``duration`` is floor seconds between first and last
    event (0 for single-event sessions). ``start_ts`` (ms) is an extension
    over the core relation so daily partitioning and joins stay possible.
    """

    user_id: int | None
    session_id: str
    ip: str
    session_sequence: str
    duration: int
    start_ts: int

    def __len__(self) -> int:
        return len(self.session_sequence)


@dataclass
class SessionizeStats:
    """Accounting for one sessionize pass."""

    events_in: int = 0
    events_encoded: int = 0
    events_unknown: int = 0
    sessions_out: int = 0
    unknown_samples: list[str] = field(default_factory=list)

    def note_unknown(self, name: str) -> None:
        self.events_unknown += 1
        if name not in self.unknown_samples and \
                len(self.unknown_samples) < UNKNOWN_SAMPLE_LIMIT:
            self.unknown_samples.append(name)

    def merge(self, other: "SessionizeStats") -> "SessionizeStats":
        self.events_in += other.events_in
        self.events_encoded += other.events_encoded
        self.events_unknown += other.events_unknown
        self.sessions_out += other.sessions_out
        for name in other.unknown_samples:
            if name not in self.unknown_samples and \
                    len(self.unknown_samples) < UNKNOWN_SAMPLE_LIMIT:
                self.unknown_samples.append(name)
        return self


def _group_key(user_id: int | None, session_id: str) -> tuple[int, str]:
    # None sorts before real ids; user ids are non-negative
    return (-1 if user_id is None else user_id, session_id)


def sessionize(
    events: Iterable[ClientEvent],
    dictionary: Dictionary,
    gap_seconds: int = DEFAULT_GAP_SECONDS,
) -> tuple[Iterator[SessionRecord], SessionizeStats]:
    """Group one day's events into encoded session records.

    Returns a (stream, stats) pair; stats are complete once the stream is
    exhausted. Events whose names are not in the dictionary are skipped and
    counted, never fatal. Output is deterministic and invariant both to
    input order and to any sharding of the input by (user_id, session_id).
    """
    if gap_seconds <= 0:
        raise ValueError(f"gap_seconds must be positive, got {gap_seconds}")
    gap_ms = gap_seconds * 1000
    stats = SessionizeStats()
    by_name = dictionary._by_name

    def generate() -> Iterator[SessionRecord]:
        groups: dict[tuple[int | None, str], list[tuple[int, str, int, str, int]]] = {}
        for seq_no, event in enumerate(events):
            stats.events_in += 1
            name = event.event_name.text
            code_point = by_name.get(name)
            if code_point is None:
                stats.note_unknown(name)
                continue
            stats.events_encoded += 1
            groups.setdefault((event.user_id, event.session_id), []).append(
                (event.timestamp, name, seq_no, event.ip, code_point)
            )

        for user_id, session_id in sorted(groups, key=lambda k: _group_key(*k)):
            rows = groups[(user_id, session_id)]
            rows.sort(key=lambda row: (row[0], row[1], row[2]))
            run_start = 0
            for i in range(1, len(rows) + 1):
                if i < len(rows) and rows[i][0] - rows[i - 1][0] <= gap_ms:
                    continue
                run = rows[run_start:i]
                run_start = i
                stats.sessions_out += 1
                yield SessionRecord(
                    user_id=user_id,
                    session_id=session_id,
                    ip=run[0][3],
                    session_sequence="".join(chr(row[4]) for row in run),
                    duration=(run[-1][0] - run[0][0]) // 1000,
                    start_ts=run[0][0],
                )

    return generate(), stats


def decode_sequence(dictionary: Dictionary, sequence: str) -> list[str]:
    """Ordered event-name list behind a session sequence.

    Raises UnknownSymbol (with the offending position) on any scalar value
    the dictionary does not contain.
    """
    by_code_point = dictionary._by_code_point
    names = []
    for position, ch in enumerate(sequence):
        name = by_code_point.get(ord(ch))
        if name is None:
            raise UnknownSymbol(
                f"code point U+{ord(ch):04X} at position {position} "
                f"is not in the dictionary",
                position=position,
            )
        names.append(name)
    return names


@dataclass
class SequenceSet:
    """Session records loaded from disk plus the identity of their encoder."""

    records: list[SessionRecord]
    dictionary_key: str
    dictionary_path: str | None = None

    def __iter__(self) -> Iterator[SessionRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)


SEQUENCE_FILE = "sessions.log"
DICTIONARY_REF_FILE = "dictionary.ref"


def sequence_day_dir(root: Path | str, day: date) -> Path:
    return Path(root) / f"{day.year:04d}" / f"{day.month:02d}" / f"{day.day:02d}"


def write_session_file(
    records: Iterable[SessionRecord],
    root: Path | str,
    day: date,
    dictionary: Dictionary,
    dictionary_path: Path | str | None = None,
) -> Path:
    """Write one record per line under root/YYYY/MM/DD/ with a sibling
    reference naming the dictionary that encoded the sequences."""
    out_dir = sequence_day_dir(root, day)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / SEQUENCE_FILE
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(
                {
                    "user_id": record.user_id,
                    "session_id": record.session_id,
                    "ip": record.ip,
                    "session_sequence": record.session_sequence,
                    "duration": record.duration,
                    "start_ts": record.start_ts,
                },
                sort_keys=True, ensure_ascii=False, separators=(",", ":"),
            ))
            handle.write("\n")
    ref = {
        "dictionary_key": dictionary.key,
        "dictionary_path": str(dictionary_path) if dictionary_path else None,
    }
    with open(out_dir / DICTIONARY_REF_FILE, "w", encoding="utf-8") as handle:
        json.dump(ref, handle, sort_keys=True)
        handle.write("\n")
    return path


def read_session_file(root: Path | str, day: date) -> SequenceSet:
    day_dir = sequence_day_dir(root, day)
    with open(day_dir / DICTIONARY_REF_FILE, "r", encoding="utf-8") as handle:
        ref = json.load(handle)
    records = []
    with open(day_dir / SEQUENCE_FILE, "r", encoding="utf-8") as handle:
        for line in handle:
            raw = json.loads(line)
            records.append(SessionRecord(
                user_id=raw["user_id"],
                session_id=raw["session_id"],
                ip=raw["ip"],
                session_sequence=raw["session_sequence"],
                duration=raw["duration"],
                start_ts=raw["start_ts"],
            ))
    return SequenceSet(
        records=records,
        dictionary_key=ref["dictionary_key"],
        dictionary_path=ref.get("dictionary_path"),
    )
