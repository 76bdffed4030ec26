"""Shared helpers: event builders, random corpora, and brute-force oracles.

The oracles here re-derive expected results by the most direct route
possible (plain loops over decoded data) and stay independent of the
library code paths they check.
"""

from __future__ import annotations

import random
from collections import Counter, defaultdict

import pytest

from sessionseq import ClientEvent, EventInitiator, parse_event_name

DAY_MS = 24 * 3600 * 1000
BASE_TS = 1_700_000_000_000  # some ms epoch inside a UTC day


def make_event(
    name: str = "web:home:mentions:stream:avatar:profile_click",
    user_id: int | None = 7,
    session_id: str = "cookie0",
    ip: str = "10.1.2.3",
    timestamp: int = BASE_TS,
    initiator: EventInitiator = EventInitiator.CLIENT_USER,
    details: dict | None = None,
) -> ClientEvent:
    return ClientEvent(
        event_initiator=initiator,
        event_name=parse_event_name(name),
        user_id=user_id,
        session_id=session_id,
        ip=ip,
        timestamp=timestamp,
        event_details=details if details is not None else {},
    )


def name_pool(count: int) -> list[str]:
    """Distinct valid names, some with empty interior components."""
    names = []
    clients = ("web", "iphone", "android")
    pages = ("home", "profile", "search", "")
    sections = ("", "mentions", "stream")
    actions = ("impression", "click", "open", "follow", "view")
    i = 0
    while len(names) < count:
        names.append(
            f"{clients[i % 3]}:{pages[(i // 3) % 4]}:{sections[(i // 12) % 3]}"
            f"::elem_{i % 7 if i % 2 else ''}:{actions[i % 5]}_{i}"
        )
        i += 1
    return names


def random_corpus(
    rng: random.Random,
    n_events: int,
    n_names: int = 12,
    n_users: int = 4,
    n_cookies: int = 6,
    span_ms: int = DAY_MS,
    tie_prob: float = 0.15,
) -> list[ClientEvent]:
    """Random but valid events with timestamp ties, logged-out traffic and
    natural inactivity gaps (keys are few, the time span is wide)."""
    names = name_pool(n_names)
    cookies = [f"ck{i}" for i in range(n_cookies)]
    events = []
    last_ts = BASE_TS
    for _ in range(n_events):
        if rng.random() < tie_prob and events:
            ts = last_ts
        else:
            ts = BASE_TS + rng.randrange(span_ms)
        last_ts = ts
        user_id = None if rng.random() < 0.25 else rng.randint(1, n_users)
        events.append(make_event(
            name=rng.choice(names),
            user_id=user_id,
            session_id=rng.choice(cookies),
            ip=f"10.0.{rng.randint(0, 9)}.{rng.randint(1, 250)}",
            timestamp=ts,
            initiator=rng.choice(list(EventInitiator)),
            details={"position": rng.randint(0, 5)},
        ))
    return events


def brute_force_sessions(
    events: list[ClientEvent], gap_seconds: int = 1800
) -> Counter:
    """Single-threaded group-sort-split oracle.

    Returns a multiset of (user_id, session_id, first ip, ordered names,
    duration, start_ts) tuples.
    """
    groups = defaultdict(list)
    for idx, event in enumerate(events):
        groups[(event.user_id, event.session_id)].append(
            (event.timestamp, event.event_name.text, idx, event.ip)
        )
    out: Counter = Counter()
    for (user_id, session_id), rows in groups.items():
        rows.sort()
        runs = [[rows[0]]]
        for row in rows[1:]:
            if row[0] - runs[-1][-1][0] > gap_seconds * 1000:
                runs.append([row])
            else:
                runs[-1].append(row)
        for run in runs:
            out[(
                user_id,
                session_id,
                run[0][3],
                tuple(r[1] for r in run),
                (run[-1][0] - run[0][0]) // 1000,
                run[0][0],
            )] += 1
    return out


def glob_match_oracle(pattern: str, text: str) -> bool:
    """Tiny recursive glob matcher: '*' matches any run, rest literal."""
    if not pattern:
        return not text
    if pattern[0] == "*":
        return any(glob_match_oracle(pattern[1:], text[i:])
                   for i in range(len(text) + 1))
    return bool(text) and text[0] == pattern[0] and \
        glob_match_oracle(pattern[1:], text[1:])


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xC0FFEE)
