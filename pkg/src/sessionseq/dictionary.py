"""Frequency-ordered dictionary coding of event names.

Each distinct event name is assigned one unicode scalar value, with more
frequent names getting smaller code points, so that a session's ordered
event names collapse to a short unicode string and UTF-8 acts as a
variable-length code (hot events cost one byte, the long tail a few).

Code points are drawn from the Valid Alphabet: scalar values ascending from
U+0021 through U+10FFFF, skipping the U+007F-U+00A0 control band and the
U+D800-U+DFFF surrogate range, so every sequence is printable, grep-safe
unicode text.
"""

from __future__ import annotations

import hashlib
import json
from bisect import insort
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Any, Iterable

from .errors import AlphabetExhausted, UnknownEvent, UnknownSymbol
from .events import ClientEvent, EventName, event_to_record

# Alphabet bands: [0x21, 0x7E], [0xA1, 0xD7FF], [0xE000, 0x10FFFF]
_BAND_1 = 0x7E - 0x21 + 1
_BAND_2 = 0xD7FF - 0xA1 + 1
_BAND_3 = 0x10FFFF - 0xE000 + 1

ALPHABET_SIZE = _BAND_1 + _BAND_2 + _BAND_3

DEFAULT_SAMPLE_SEED = 0


def code_point_for_rank(rank: int) -> int:
    """Scalar value for the rank-th (0-based) element of the Valid Alphabet."""
    if rank < 0:
        raise ValueError(f"rank must be non-negative, got {rank}")
    if rank < _BAND_1:
        return 0x21 + rank
    if rank < _BAND_1 + _BAND_2:
        return 0xA1 + (rank - _BAND_1)
    if rank < ALPHABET_SIZE:
        return 0xE000 + (rank - _BAND_1 - _BAND_2)
    raise AlphabetExhausted(
        f"rank {rank} exceeds the {ALPHABET_SIZE}-symbol alphabet"
    )


@dataclass(frozen=True)
class DictionaryEntry:
    name: str
    count: int
    code_point: int
    samples: tuple[dict[str, Any], ...] = ()


@dataclass(frozen=True)
class Dictionary:
    """Bijective, frequency-ordered mapping between event names and symbols.

    Entries are sorted by descending count, ties broken by ascending name;
    entry i holds the i-th alphabet code point. Immutable once built.
    """

    entries: tuple[DictionaryEntry, ...]
    built_for: date
    version: int = 1
    _by_name: dict[str, int] = field(init=False, repr=False, compare=False,
                                     default_factory=dict)
    _by_code_point: dict[int, str] = field(init=False, repr=False, compare=False,
                                           default_factory=dict)

    def __post_init__(self) -> None:
        for entry in self.entries:
            self._by_name[entry.name] = entry.code_point
            self._by_code_point[entry.code_point] = entry.name

    @property
    def key(self) -> str:
        """Identity of this dictionary, carried by everything it encodes."""
        return f"{self.built_for.isoformat()}#{self.version}"

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def names(self) -> list[str]:
        return [entry.name for entry in self.entries]

    def code_points(self) -> list[int]:
        return [entry.code_point for entry in self.entries]


class _SampleKeeper:
    """Order-invariant bounded sample of raw records.

    Keeps the ``limit`` records with the smallest seeded digests, an
    equivalent of reservoir sampling whose outcome does not depend on
    stream order, so shuffled or sharded builds agree byte for byte.
    """

    __slots__ = ("limit", "seed", "kept")

    def __init__(self, limit: int, seed: int):
        self.limit = limit
        self.seed = seed
        self.kept: list[tuple[str, str]] = []

    def offer(self, record_json: str) -> None:
        if self.limit <= 0:
            return
        digest = hashlib.sha1(
            f"{self.seed}:{record_json}".encode("utf-8")
        ).hexdigest()
        if len(self.kept) == self.limit and digest >= self.kept[-1][0]:
            return
        insort(self.kept, (digest, record_json))
        if len(self.kept) > self.limit:
            self.kept.pop()

    def merge(self, other: "_SampleKeeper") -> None:
        for item in other.kept:
            insort(self.kept, item)
        del self.kept[self.limit:]

    def records(self) -> tuple[dict[str, Any], ...]:
        return tuple(json.loads(body) for _, body in self.kept)


class EventHistogram:
    """Mergeable histogram of event-name counts with per-name samples.

    ``update`` consumes events; ``merge`` combines partial histograms built
    over disjoint shards, associatively and commutatively.
    """

    def __init__(self, sample_size: int = 0, seed: int = DEFAULT_SAMPLE_SEED):
        if sample_size < 0:
            raise ValueError("sample_size must be >= 0")
        self.sample_size = sample_size
        self.seed = seed
        self.counts: dict[str, int] = {}
        self._samples: dict[str, _SampleKeeper] = {}

    def update(self, event: ClientEvent) -> None:
        name = event.event_name.text
        self.counts[name] = self.counts.get(name, 0) + 1
        if self.sample_size > 0:
            keeper = self._samples.get(name)
            if keeper is None:
                keeper = self._samples[name] = _SampleKeeper(self.sample_size, self.seed)
            record_json = json.dumps(event_to_record(event), sort_keys=True,
                                     ensure_ascii=False, separators=(",", ":"))
            keeper.offer(record_json)

    def update_all(self, events: Iterable[ClientEvent]) -> "EventHistogram":
        for event in events:
            self.update(event)
        return self

    def merge(self, other: "EventHistogram") -> "EventHistogram":
        if (other.sample_size, other.seed) != (self.sample_size, self.seed):
            raise ValueError("cannot merge histograms with different sampling configs")
        for name, count in other.counts.items():
            self.counts[name] = self.counts.get(name, 0) + count
        for name, keeper in other._samples.items():
            mine = self._samples.get(name)
            if mine is None:
                clone = _SampleKeeper(self.sample_size, self.seed)
                clone.kept = list(keeper.kept)
                self._samples[name] = clone
            else:
                mine.merge(keeper)
        return self

    def samples_for(self, name: str) -> tuple[dict[str, Any], ...]:
        keeper = self._samples.get(name)
        return keeper.records() if keeper else ()


def dictionary_from_histogram(
    histogram: EventHistogram, built_for: date, version: int = 1
) -> Dictionary:
    """Rank names by (count desc, name asc) and assign alphabet code points."""
    ranked = sorted(histogram.counts.items(), key=lambda kv: (-kv[1], kv[0]))
    if len(ranked) > ALPHABET_SIZE:
        raise AlphabetExhausted(
            f"{len(ranked)} distinct names exceed the {ALPHABET_SIZE}-symbol alphabet"
        )
    entries = tuple(
        DictionaryEntry(
            name=name,
            count=count,
            code_point=code_point_for_rank(rank),
            samples=histogram.samples_for(name),
        )
        for rank, (name, count) in enumerate(ranked)
    )
    return Dictionary(entries=entries, built_for=built_for, version=version)


def build_dictionary(
    events: Iterable[ClientEvent],
    sample_size: int = 0,
    built_for: date | None = None,
    version: int = 1,
    seed: int = DEFAULT_SAMPLE_SEED,
) -> Dictionary:
    """Scan an event stream and build the day's encoding dictionary.

    Output is invariant to stream order: counts are exact, ranks follow the
    tie-break rule, and samples use order-invariant digest selection.
    """
    histogram = EventHistogram(sample_size=sample_size, seed=seed)
    last_ts = 0
    for event in events:
        histogram.update(event)
        if event.timestamp > last_ts:
            last_ts = event.timestamp
    if built_for is None:
        built_for = (
            datetime.fromtimestamp(last_ts / 1000, tz=timezone.utc).date()
            if last_ts else date(1970, 1, 1)
        )
    return dictionary_from_histogram(histogram, built_for, version)


def encode_event(dictionary: Dictionary, name: EventName | str) -> int:
    """Code point for a name. Raises UnknownEvent if absent."""
    text = name if isinstance(name, str) else name.text
    code_point = dictionary._by_name.get(text)
    if code_point is None:
        raise UnknownEvent(f"event name not in dictionary: {text!r}")
    return code_point


def decode_symbol(dictionary: Dictionary, symbol: int | str) -> str:
    """Name for a code point (int or 1-char str). Raises UnknownSymbol."""
    code_point = ord(symbol) if isinstance(symbol, str) else symbol
    name = dictionary._by_code_point.get(code_point)
    if name is None:
        raise UnknownSymbol(f"code point not in dictionary: U+{code_point:04X}")
    return name


def save_dictionary(dictionary: Dictionary, path: Path | str) -> None:
    """Write the dictionary file: version, build date, ordered entry list.

    Code points are serialized as integers to avoid any encoding ambiguity.
    """
    doc = {
        "version": dictionary.version,
        "built_for": dictionary.built_for.isoformat(),
        "entries": [
            {
                "name": e.name,
                "count": e.count,
                "code_point": e.code_point,
                "samples": list(e.samples),
            }
            for e in dictionary.entries
        ],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, ensure_ascii=False, indent=1, sort_keys=True)
        handle.write("\n")


def load_dictionary(path: Path | str) -> Dictionary:
    with open(path, "r", encoding="utf-8") as handle:
        doc = json.load(handle)
    entries = tuple(
        DictionaryEntry(
            name=e["name"],
            count=e["count"],
            code_point=e["code_point"],
            samples=tuple(e.get("samples", ())),
        )
        for e in doc["entries"]
    )
    return Dictionary(
        entries=entries,
        built_for=date.fromisoformat(doc["built_for"]),
        version=doc["version"],
    )
