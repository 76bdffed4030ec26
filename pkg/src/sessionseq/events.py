"""Client event model: six-level event names, event records, and name patterns.

Every logged interaction carries a hierarchical name of the form
``client:page:section:component:element:action``. Names are lowercase,
restricted to ``[a-z0-9_]`` per component, and always have exactly six
components; the four middle components may be empty. Patterns (glob or
anchored regex) select sets of names and drive every downstream query.
"""

from __future__ import annotations

import ipaddress
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any, Mapping, Optional

from .errors import (
    CharsetError,
    ComponentCountError,
    EmptyRequiredComponent,
    PatternSyntaxError,
)

NAME_COMPONENT_COUNT = 6

_COMPONENT_RE = re.compile(r"[a-z0-9_]*\Z")

_REQUIRED_COMPONENTS = ("client", "action")


class EventInitiator(Enum):
    """Who triggered the event: client vs server side, user vs application."""

    CLIENT_USER = "client_user"
    CLIENT_APP = "client_app"
    SERVER_USER = "server_user"
    SERVER_APP = "server_app"


@dataclass(frozen=True)
class EventName:
    """A six-component hierarchical event name.

    ``client`` and ``action`` are required non-empty; ``page``, ``section``,
    ``component`` and ``element`` may be empty strings.
    """

    client: str
    page: str
    section: str
    component: str
    element: str
    action: str

    def __post_init__(self) -> None:
        for label, value in zip(self.__dataclass_fields__, self.parts):
            if not _COMPONENT_RE.match(value):
                raise CharsetError(
                    f"component {label!r} of event name contains disallowed "
                    f"characters: {value!r} (allowed: lowercase [a-z0-9_])"
                )
        for label in _REQUIRED_COMPONENTS:
            if not getattr(self, label):
                raise EmptyRequiredComponent(
                    f"event name component {label!r} must be non-empty"
                )

    @property
    def parts(self) -> tuple[str, str, str, str, str, str]:
        return (self.client, self.page, self.section,
                self.component, self.element, self.action)

    @property
    def text(self) -> str:
        """Colon-joined serialized form."""
        return ":".join(self.parts)

    def __str__(self) -> str:
        return self.text


@lru_cache(maxsize=65536)
def parse_event_name(raw: str) -> EventName:
    """Parse colon-delimited text into an EventName.

    Raises ComponentCountError, CharsetError or EmptyRequiredComponent.
    ``serialize(parse(t)) == t`` for every accepted ``t``.
    """
    parts = raw.split(":")
    if len(parts) != NAME_COMPONENT_COUNT:
        raise ComponentCountError(
            f"event name must have exactly {NAME_COMPONENT_COUNT} "
            f"colon-separated components, got {len(parts)}: {raw!r}"
        )
    return EventName(*parts)


def serialize_event_name(name: EventName) -> str:
    return name.text


@dataclass(frozen=True)
class ClientEvent:
    """One logged interaction.

    ``user_id`` is None exactly when the event is logged-out traffic; the
    cookie-based ``session_id`` is always present. ``timestamp`` is integer
    milliseconds since the epoch, UTC. ``event_details`` is an opaque
    key-value payload; keys follow no enforced convention.
    """

    event_initiator: EventInitiator
    event_name: EventName
    user_id: Optional[int]
    session_id: str
    ip: str
    timestamp: int
    event_details: Mapping[str, Any] = field(default_factory=dict)

    @property
    def logged_in(self) -> bool:
        return self.user_id is not None


def event_to_record(event: ClientEvent) -> dict[str, Any]:
    """Dict form of an event, field for field as stored in log files."""
    return {
        "event_initiator": event.event_initiator.value,
        "event_name": event.event_name.text,
        "user_id": event.user_id,
        "session_id": event.session_id,
        "ip": event.ip,
        "timestamp": event.timestamp,
        "event_details": dict(event.event_details),
    }


@dataclass
class ValidationReport:
    """Outcome of validating one raw record.

    ``event`` is set iff the record was accepted; ``errors`` holds per-field
    diagnostics, ``warnings`` the lenient-mode repairs that were applied.
    """

    event: Optional[ClientEvent] = None
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.event is not None


_INITIATORS = {i.value: i for i in EventInitiator}


@lru_cache(maxsize=4096)
def _valid_ip(text: str) -> bool:
    try:
        ipaddress.ip_address(text)
    except ValueError:
        return False
    return True


def validate_event(record: Mapping[str, Any], mode: str = "strict") -> ValidationReport:
    """Validate a decoded raw record and build a ClientEvent from it.

    ``strict`` rejects any violation. ``lenient`` lowercases the event name
    (recording a warning) and rejects only structural violations: missing
    fields, bad timestamps, malformed names, bad ips.
    """
    if mode not in ("strict", "lenient"):
        raise ValueError(f"unknown validation mode {mode!r}")
    report = ValidationReport()
    errors = report.errors

    initiator = None
    raw_initiator = record.get("event_initiator")
    if raw_initiator is None:
        errors.append("event_initiator: missing field")
    elif not isinstance(raw_initiator, str) or raw_initiator not in _INITIATORS:
        errors.append(f"event_initiator: unknown value {raw_initiator!r}")
    else:
        initiator = _INITIATORS[raw_initiator]

    name = None
    raw_name = record.get("event_name")
    if raw_name is None:
        errors.append("event_name: missing field")
    elif not isinstance(raw_name, str):
        errors.append(f"event_name: expected text, got {type(raw_name).__name__}")
    else:
        if mode == "lenient" and raw_name != raw_name.lower():
            report.warnings.append(
                f"event_name: lowercased {raw_name!r}"
            )
            raw_name = raw_name.lower()
        try:
            name = parse_event_name(raw_name)
        except (ComponentCountError, CharsetError, EmptyRequiredComponent) as exc:
            errors.append(f"event_name: {exc}")

    user_id = record.get("user_id")
    if user_id is not None:
        if isinstance(user_id, bool) or not isinstance(user_id, int):
            errors.append(f"user_id: expected integer or null, got {user_id!r}")
            user_id = None
        elif user_id < 0:
            errors.append(f"user_id: must be non-negative, got {user_id}")
            user_id = None

    session_id = record.get("session_id")
    if not isinstance(session_id, str) or not session_id:
        errors.append("session_id: missing or empty")

    ip = record.get("ip")
    if not isinstance(ip, str) or not _valid_ip(ip):
        errors.append(f"ip: not a valid IPv4/IPv6 address: {ip!r}")

    timestamp = record.get("timestamp")
    if isinstance(timestamp, bool) or not isinstance(timestamp, int) or timestamp <= 0:
        errors.append(f"timestamp: expected positive integer ms, got {timestamp!r}")

    details = record.get("event_details")
    if details is None:
        details = {}
    elif not isinstance(details, Mapping):
        errors.append(f"event_details: expected object, got {type(details).__name__}")

    if not errors:
        report.event = ClientEvent(
            event_initiator=initiator,
            event_name=name,
            user_id=user_id,
            session_id=session_id,
            ip=ip,
            timestamp=timestamp,
            event_details=details,
        )
    return report


@dataclass(frozen=True)
class EventPattern:
    """A glob or regex pattern matched against the full event-name text.

    Glob mode: ``*`` matches any run of characters, colons included; all
    other characters are literal. Regex mode is implicitly anchored, so the
    expression must match the entire name.
    """

    source_text: str
    mode: str
    compiled: re.Pattern

    def matches(self, name: EventName | str) -> bool:
        text = name if isinstance(name, str) else name.text
        return self.compiled.fullmatch(text) is not None


def glob_to_regex(glob: str) -> str:
    """Translate a glob into an equivalent (unanchored) regex source."""
    out = []
    for ch in glob:
        if ch == "*":
            out.append(".*")
        else:
            out.append(re.escape(ch))
    return "".join(out)


def compile_pattern(text: str, mode: str = "glob") -> EventPattern:
    """Compile pattern text into an anchored matcher. Raises PatternSyntaxError."""
    if not text:
        raise PatternSyntaxError("pattern must be non-empty")
    if mode == "glob":
        compiled = re.compile(glob_to_regex(text))
    elif mode == "regex":
        try:
            compiled = re.compile(text)
        except re.error as exc:
            raise PatternSyntaxError(f"invalid regex {text!r}: {exc}") from exc
    else:
        raise ValueError(f"unknown pattern mode {mode!r}")
    return EventPattern(source_text=text, mode=mode, compiled=compiled)


def match_pattern(pattern: EventPattern, name: EventName | str) -> bool:
    return pattern.matches(name)
