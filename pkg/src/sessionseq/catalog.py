"""Auto-rebuilt client event catalog.

Turns one day's dictionary into a browsable set of static markdown pages:
a hierarchical index over the six-level namespace, one page per event with
its count, sampled raw records and an optional developer description.
Rebuilding from the same dictionary and descriptions is byte-identical,
so a daily regeneration is always up to date and diffs stay reviewable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .dictionary import Dictionary
from .events import EventPattern

INDEX_FILE = "index.md"
EVENTS_DIR = "events"

_EMPTY_LABEL = "(none)"


@dataclass(frozen=True)
class CatalogEntry:
    """One event type as presented in the catalog."""

    event_name: str
    count: int
    samples: tuple[dict[str, Any], ...]
    description: str | None = None

    @property
    def documented(self) -> bool:
        return bool(self.description and self.description.strip())


@dataclass
class CatalogReport:
    """What a catalog build produced."""

    total: int
    documented: int
    stale_descriptions: list[str] = field(default_factory=list)
    pages: list[Path] = field(default_factory=list)


def event_page_name(event_name: str) -> str:
    """Filesystem-safe page name; ':' maps to '.', which no component
    may contain, so the mapping is invertible."""
    return event_name.replace(":", ".") + ".md"


def _entries(dictionary: Dictionary,
             descriptions: Mapping[str, str] | None) -> list[CatalogEntry]:
    descriptions = descriptions or {}
    return [
        CatalogEntry(
            event_name=e.name,
            count=e.count,
            samples=e.samples,
            description=descriptions.get(e.name),
        )
        for e in dictionary.entries
    ]


def search_catalog(
    dictionary: Dictionary,
    pattern: EventPattern,
    descriptions: Mapping[str, str] | None = None,
) -> list[CatalogEntry]:
    """Entries whose names match the pattern, by descending count then name."""
    hits = [entry for entry in _entries(dictionary, descriptions)
            if pattern.matches(entry.event_name)]
    hits.sort(key=lambda e: (-e.count, e.event_name))
    return hits


def _index_lines(dictionary: Dictionary, entries: list[CatalogEntry],
                 stale: list[str]) -> list[str]:
    documented = sum(1 for e in entries if e.documented)
    lines = [
        f"# Client event catalog for {dictionary.built_for.isoformat()}",
        "",
        f"{len(entries)} event types. Documented: {documented}/{len(entries)}.",
        "",
    ]
    by_name = {e.event_name: e for e in entries}
    tree: dict = {}
    for entry in entries:
        parts = entry.event_name.split(":")
        node = tree
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node.setdefault("\x00leaves", []).append((parts[-1], entry.event_name))

    def emit(node: dict, depth: int) -> None:
        for action, full_name in sorted(node.get("\x00leaves", [])):
            entry = by_name[full_name]
            marker = "" if entry.documented else " (undocumented)"
            lines.append(
                "  " * depth
                + f"- [{action or _EMPTY_LABEL}]({EVENTS_DIR}/{event_page_name(full_name)})"
                + f" ({entry.count}){marker}"
            )
        for part in sorted(k for k in node if k != "\x00leaves"):
            lines.append("  " * depth + f"- {part or _EMPTY_LABEL}")
            emit(node[part], depth + 1)

    for client in sorted(tree):
        lines.append(f"## {client}")
        lines.append("")
        emit(tree[client], 0)
        lines.append("")

    if stale:
        lines.append("## Stale descriptions")
        lines.append("")
        lines.append("Described names absent from this day's events:")
        lines.append("")
        for name in stale:
            lines.append(f"- {name}")
        lines.append("")
    return lines


def _event_page_lines(entry: CatalogEntry, code_point: int) -> list[str]:
    lines = [
        f"# {entry.event_name}",
        "",
        f"Count: {entry.count}. Code point: U+{code_point:04X} ({code_point}).",
        "",
        "## Description",
        "",
    ]
    if entry.documented:
        lines.append(entry.description.strip())
    else:
        lines.append("_Undocumented._")
    lines.append("")
    lines.append("## Samples")
    lines.append("")
    if entry.samples:
        for sample in entry.samples:
            lines.append("```json")
            lines.append(json.dumps(sample, indent=2, sort_keys=True,
                                    ensure_ascii=False))
            lines.append("```")
            lines.append("")
    else:
        lines.append("No samples were retained for this event.")
        lines.append("")
    return lines


def generate_catalog(
    dictionary: Dictionary,
    descriptions: Mapping[str, str] | None,
    out: Path | str,
) -> CatalogReport:
    """Emit the index and one page per dictionary event under ``out``.

    Descriptions naming unknown events are reported as stale, never fatal.
    """
    out = Path(out)
    entries = _entries(dictionary, descriptions)
    stale = sorted(
        name for name in (descriptions or {}) if name not in dictionary
    )
    report = CatalogReport(
        total=len(entries),
        documented=sum(1 for e in entries if e.documented),
        stale_descriptions=stale,
    )

    events_dir = out / EVENTS_DIR
    events_dir.mkdir(parents=True, exist_ok=True)
    index_path = out / INDEX_FILE
    with open(index_path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(_index_lines(dictionary, entries, stale)))
        handle.write("\n")
    report.pages.append(index_path)

    code_points = {e.name: e.code_point for e in dictionary.entries}
    for entry in sorted(entries, key=lambda e: e.event_name):
        page_path = events_dir / event_page_name(entry.event_name)
        with open(page_path, "w", encoding="utf-8") as handle:
            handle.write("\n".join(
                _event_page_lines(entry, code_points[entry.event_name])
            ))
            handle.write("\n")
        report.pages.append(page_path)
    return report


def load_descriptions(path: Path | str) -> dict[str, str]:
    """Read the descriptions file: one ``event_name<TAB>text`` per line.
    Blank lines and '#' comments are skipped."""
    descriptions: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            name, sep, text = line.partition("\t")
            if not sep:
                raise ValueError(
                    f"{path}:{line_no}: expected 'event_name<TAB>description'"
                )
            descriptions[name.strip()] = text.strip()
    return descriptions


def save_descriptions(descriptions: Mapping[str, str], path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for name in sorted(descriptions):
            handle.write(f"{name}\t{descriptions[name]}\n")
