"""Queries over session sequences and raw events.

Pattern-driven counting and funnels run directly on the encoded sequence
strings: a pattern expands to the set of matching code points, counting is
string scanning, and a funnel becomes a character-class regex, one per
stage prefix.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date
from typing import Collection, Iterable, Sequence

from .dictionary import Dictionary, decode_symbol
from .errors import DictionaryMismatch, EmptyFunnel
from .events import ClientEvent, EventPattern
from .sessions import SessionRecord

WILDCARD = "*"


@dataclass(frozen=True)
class SymbolClass:
    """The set of code points whose names match a pattern, under one
    dictionary. May be empty."""

    pattern: EventPattern
    symbols: frozenset[int]
    dictionary_key: str

    def __contains__(self, code_point: int) -> bool:
        return code_point in self.symbols


def expand_pattern(dictionary: Dictionary, pattern: EventPattern) -> SymbolClass:
    """Resolve a pattern to every matching dictionary symbol."""
    symbols = frozenset(
        entry.code_point for entry in dictionary.entries
        if pattern.matches(entry.name)
    )
    return SymbolClass(pattern=pattern, symbols=symbols,
                       dictionary_key=dictionary.key)


def _check_same_dictionary(sessions_key: str | None,
                           classes: Iterable[SymbolClass]) -> None:
    keys = {c.dictionary_key for c in classes}
    if sessions_key is not None:
        keys.add(sessions_key)
    if len(keys) > 1:
        raise DictionaryMismatch(
            f"sessions and pattern classes use different dictionaries: "
            f"{sorted(keys)}"
        )


def _restrict(sessions: Iterable[SessionRecord],
              user_allowlist: Collection[int] | None) -> Iterable[SessionRecord]:
    """Optional stand-in for demographic filtering: keep only sessions of
    the listed user ids. Logged-out sessions never match an allowlist."""
    if user_allowlist is None:
        return sessions
    allowed = frozenset(user_allowlist)
    return (r for r in sessions
            if r.user_id is not None and r.user_id in allowed)


def count_events(
    sessions: Iterable[SessionRecord],
    symbol_class: SymbolClass,
    mode: str = "total",
    sessions_key: str | None = None,
    user_allowlist: Collection[int] | None = None,
) -> int:
    """Count symbol-class occurrences over session sequences.

    ``total`` sums occurrences across all sequences; ``sessions`` counts
    sequences containing at least one occurrence.
    """
    if mode not in ("total", "sessions"):
        raise ValueError(f"unknown count mode {mode!r}")
    _check_same_dictionary(sessions_key, [symbol_class])
    symbols = symbol_class.symbols
    count = 0
    for record in _restrict(sessions, user_allowlist):
        if mode == "total":
            count += sum(1 for ch in record.session_sequence if ord(ch) in symbols)
        elif any(ord(ch) in symbols for ch in record.session_sequence):
            count += 1
    return count


@dataclass(frozen=True)
class FunnelResult:
    """Sessions (or users) completing each stage prefix; always non-increasing."""

    stage_counts: tuple[int, ...]

    def render(self) -> str:
        return " ".join(f"({i}, {n})" for i, n in enumerate(self.stage_counts))


def _stage_regexes(stages: Sequence[SymbolClass],
                   contiguous: bool) -> list[re.Pattern]:
    """One compiled regex per stage prefix: class strings joined by ``.*``
    (or nothing, for contiguous matching)."""
    classes = []
    for stage in stages:
        if stage.symbols:
            classes.append("[" + "".join(re.escape(chr(cp))
                                         for cp in sorted(stage.symbols)) + "]")
        else:
            # matches nothing: empty class is invalid regex, use an
            # impossible lookahead instead
            classes.append(r"(?!)")
    joiner = "" if contiguous else ".*"
    return [re.compile(joiner.join(classes[:k + 1]), re.DOTALL)
            for k in range(len(classes))]


def _deepest_stage(sequence: str, prefix_regexes: list[re.Pattern]) -> int:
    """Number of leading stages matched in order within the sequence."""
    depth = 0
    for regex in prefix_regexes:
        if regex.search(sequence) is None:
            break
        depth += 1
    return depth


def funnel(
    sessions: Iterable[SessionRecord],
    stages: Sequence[SymbolClass],
    sessions_key: str | None = None,
    contiguous: bool = False,
    user_allowlist: Collection[int] | None = None,
) -> FunnelResult:
    """Count sessions completing each funnel-stage prefix in order.

    Stage k is completed by a session whose sequence contains symbols of
    stages 0..k at strictly increasing positions (adjacent positions when
    ``contiguous``).
    """
    if not stages:
        raise EmptyFunnel("funnel requires at least one stage")
    _check_same_dictionary(sessions_key, stages)
    prefix_regexes = _stage_regexes(stages, contiguous)
    counts = [0] * len(stages)
    for record in _restrict(sessions, user_allowlist):
        depth = _deepest_stage(record.session_sequence, prefix_regexes)
        for k in range(depth):
            counts[k] += 1
    return FunnelResult(stage_counts=tuple(counts))


def _user_key(record: SessionRecord) -> tuple[str, int | str]:
    # logged-out sessions count as one pseudo-user per cookie
    if record.user_id is None:
        return ("session", record.session_id)
    return ("user", record.user_id)


def funnel_unique_users(
    sessions: Iterable[SessionRecord],
    stages: Sequence[SymbolClass],
    sessions_key: str | None = None,
    contiguous: bool = False,
    user_allowlist: Collection[int] | None = None,
) -> FunnelResult:
    """Funnel counting distinct users rather than sessions per stage."""
    if not stages:
        raise EmptyFunnel("funnel requires at least one stage")
    _check_same_dictionary(sessions_key, stages)
    prefix_regexes = _stage_regexes(stages, contiguous)
    per_stage: list[set] = [set() for _ in stages]
    for record in _restrict(sessions, user_allowlist):
        depth = _deepest_stage(record.session_sequence, prefix_regexes)
        if depth:
            key = _user_key(record)
            for k in range(depth):
                per_stage[k].add(key)
    return FunnelResult(stage_counts=tuple(len(s) for s in per_stage))


@dataclass
class RollupCell:
    logged_in: int = 0
    logged_out: int = 0

    @property
    def total(self) -> int:
        return self.logged_in + self.logged_out


@dataclass
class RollupTable:
    """Event counts aggregated at one wildcard level of the namespace.

    Levels 0-4 wildcard 0-4 trailing interior components and key rows by
    the full six-tuple (``*`` marking wildcards); level 5 keys rows by the
    (client, action) pair alone.
    """

    level: int
    rows: dict[tuple[str, ...], RollupCell] = field(default_factory=dict)

    def add(self, key: tuple[str, ...], logged_in: bool) -> None:
        cell = self.rows.get(key)
        if cell is None:
            cell = self.rows[key] = RollupCell()
        if logged_in:
            cell.logged_in += 1
        else:
            cell.logged_out += 1

    def total_events(self) -> int:
        return sum(cell.total for cell in self.rows.values())


ROLLUP_LEVELS = 6


def _rollup_key(parts: tuple[str, ...], level: int) -> tuple[str, ...]:
    client, page, section, component, element, action = parts
    if level == 0:
        return parts
    if level == 1:
        return (client, page, section, component, WILDCARD, action)
    if level == 2:
        return (client, page, section, WILDCARD, WILDCARD, action)
    if level == 3:
        return (client, page, WILDCARD, WILDCARD, WILDCARD, action)
    if level == 4:
        return (client, WILDCARD, WILDCARD, WILDCARD, WILDCARD, action)
    return (client, action)


def rollup(events: Iterable[ClientEvent]) -> list[RollupTable]:
    """Aggregate events into all six wildcard-level tables in one pass."""
    tables = [RollupTable(level=level) for level in range(ROLLUP_LEVELS)]
    for event in events:
        parts = event.event_name.parts
        logged_in = event.logged_in
        for level, table in enumerate(tables):
            table.add(_rollup_key(parts, level), logged_in)
    return tables


DURATION_BUCKETS = ("0s", "(0,10s]", "(10,60s]", "(1,5min]", "(5,30min]", ">30min")

_BUCKET_UPPER_BOUNDS = (0, 10, 60, 300, 1800)


def duration_bucket(duration_seconds: int) -> str:
    for label, upper in zip(DURATION_BUCKETS, _BUCKET_UPPER_BOUNDS):
        if duration_seconds <= upper:
            return label
    return DURATION_BUCKETS[-1]


@dataclass
class SummaryStats:
    """Daily session totals, split by client and by bucketed duration."""

    date: date
    sessions_total: int
    sessions_by_client: dict[str, int]
    duration_histogram: dict[str, int]


def summary_stats(sessions: Iterable[SessionRecord],
                  dictionary: Dictionary) -> SummaryStats:
    """Totals for one day of sessions encoded by ``dictionary``.

    A session's client is the client component of its first event.
    """
    total = 0
    by_client: dict[str, int] = {}
    histogram = {label: 0 for label in DURATION_BUCKETS}
    for record in sessions:
        total += 1
        first_name = decode_symbol(dictionary, record.session_sequence[0])
        client = first_name.split(":", 1)[0]
        by_client[client] = by_client.get(client, 0) + 1
        histogram[duration_bucket(record.duration)] += 1
    return SummaryStats(
        date=dictionary.built_for,
        sessions_total=total,
        sessions_by_client=by_client,
        duration_histogram=histogram,
    )
