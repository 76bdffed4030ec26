"""Seeded synthetic corpus generation.

Produces one day of plausible client events with a Zipf-distributed event
type population, so every pipeline stage can be exercised end to end
without production data. Identical config and seed give byte-identical
corpora.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from datetime import date, datetime, timezone
from typing import Iterator

from .events import ClientEvent, EventInitiator, EventName

_CLIENTS = ("web", "iphone", "android", "ipad")
_PAGES = ("home", "profile", "search", "settings", "messages",
          "discover", "notifications", "explore")
_SECTIONS = ("", "mentions", "retweets", "searches", "suggestions",
             "stream", "header")
_COMPONENTS = ("", "tweet", "search_box", "user_card", "nav_bar",
               "media", "composer")
_ELEMENTS = ("", "button", "avatar", "link", "image", "caret")
_ACTIONS = ("impression", "click", "hover", "open", "close",
            "follow", "reply", "share", "view")

_POOLS = (_CLIENTS, _PAGES, _SECTIONS, _COMPONENTS, _ELEMENTS, _ACTIONS)

_INITIATORS = (EventInitiator.CLIENT_USER, EventInitiator.CLIENT_APP,
               EventInitiator.SERVER_USER, EventInitiator.SERVER_APP)
_INITIATOR_WEIGHTS = (80, 12, 5, 3)

_DAY_MS = 24 * 3600 * 1000


@dataclass(frozen=True)
class GenConfig:
    """Knobs for one synthetic day."""

    day: date
    event_types: int = 500
    zipf_exponent: float = 1.2
    sessions: int = 1000
    mean_session_length: int = 20
    seed: int = 0
    logged_out_fraction: float = 0.15

    def __post_init__(self) -> None:
        if self.event_types < 1:
            raise ValueError("event_types must be >= 1")
        if self.sessions < 0:
            raise ValueError("sessions must be >= 0")
        if self.mean_session_length < 1:
            raise ValueError("mean_session_length must be >= 1")


def _name_universe(count: int, rng: random.Random) -> list[EventName]:
    """``count`` distinct names sampled from the component pools."""
    space = 1
    for pool in _POOLS:
        space *= len(pool)
    if count > space:
        raise ValueError(f"cannot make {count} distinct names from "
                         f"{space} component combinations")
    names = []
    for index in rng.sample(range(space), count):
        parts = []
        for pool in reversed(_POOLS):
            index, offset = divmod(index, len(pool))
            parts.append(pool[offset])
        names.append(EventName(*reversed(parts)))
    return names


def zipf_weights(count: int, exponent: float) -> list[float]:
    """Normalized Zipf probabilities for ranks 1..count."""
    raw = [1.0 / (rank ** exponent) for rank in range(1, count + 1)]
    total = sum(raw)
    return [w / total for w in raw]


def _poisson(rng: random.Random, lam: float) -> int:
    # chunked so exp(-lam) never underflows for large means
    k = 0
    while lam > 30:
        k += _poisson(rng, 30)
        lam -= 30
    if lam <= 0:
        return k
    threshold = math.exp(-lam)
    product = 1.0
    while True:
        product *= rng.random()
        if product <= threshold:
            return k
        k += 1


def generate_corpus(config: GenConfig) -> Iterator[ClientEvent]:
    """Stream one day's synthetic events, session by session."""
    rng = random.Random(config.seed)
    names = _name_universe(config.event_types, rng)
    cum_weights = []
    acc = 0.0
    for w in zipf_weights(config.event_types, config.zipf_exponent):
        acc += w
        cum_weights.append(acc)

    day_start_ms = int(datetime(
        config.day.year, config.day.month, config.day.day,
        tzinfo=timezone.utc,
    ).timestamp()) * 1000
    day_end_ms = day_start_ms + _DAY_MS
    user_pool = max(1, config.sessions // 3)

    for _ in range(config.sessions):
        if rng.random() < config.logged_out_fraction:
            user_id = None
        else:
            user_id = rng.randint(1, user_pool)
        session_id = f"{rng.getrandbits(64):016x}"
        ip = ".".join(str(rng.randint(1, 254)) for _ in range(4))
        length = 1 + _poisson(rng, config.mean_session_length - 1)
        # leave room so gaps cannot push a session past midnight
        margin_ms = min(length * 300_000, 20 * 3600 * 1000)
        ts = day_start_ms + rng.randrange(_DAY_MS - margin_ms)
        for position in range(length):
            if position:
                ts = min(ts + rng.randint(500, 240_000), day_end_ms - 1)
            name = rng.choices(names, cum_weights=cum_weights, k=1)[0]
            details = {"position": position}
            if rng.random() < 0.5:
                details["target_id"] = rng.getrandbits(32)
            yield ClientEvent(
                event_initiator=rng.choices(
                    _INITIATORS, weights=_INITIATOR_WEIGHTS, k=1)[0],
                event_name=name,
                user_id=user_id,
                session_id=session_id,
                ip=ip,
                timestamp=ts,
                event_details=details,
            )
