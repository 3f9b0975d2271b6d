"""Parsing helpers for the structured stage-output contract.

The reasoning stages talk in plain text with three conventions:

* flag lists: a ``FLAGS:`` heading followed by ``- `` bullets,
* element checks: lines ``ELEMENT <name>: <status> — <note>``,
* verdicts: a final line ``VERDICT: OOC`` or ``VERDICT: PRISTINE``.

These helpers are shared by the response parsers and by the rule-based
offline mock, which reads the same markers out of rendered prompts.
"""

from __future__ import annotations

import re

ELEMENTS = ("time", "place", "person", "event", "object")
STATUSES = ("consistent", "contradicted", "unknown")

_FLAG_HEADING = re.compile(r"^\s*FLAGS:\s*$", re.MULTILINE)
_BULLET = re.compile(r"^\s*-\s+(.*\S)\s*$")
_ELEMENT_LINE = re.compile(
    r"^\s*ELEMENT\s+(?P<name>\w+)\s*:\s*(?P<status>\w+)\s*(?:[—–-]+\s*(?P<note>.*\S))?\s*$",
    re.MULTILINE,
)
_VERDICT_LINE = re.compile(r"^\s*VERDICT:\s*(OOC|PRISTINE)\s*$")
_TOKEN = re.compile(r"\w+(?:['’-]\w+)*", re.UNICODE)


def parse_flags(text: str) -> list[str]:
    """Bullets under the first FLAGS heading; empty when absent."""
    match = _FLAG_HEADING.search(text)
    if match is None:
        return []
    flags: list[str] = []
    for line in text[match.end() :].splitlines():
        if not line.strip():
            if flags:
                break
            continue
        bullet = _BULLET.match(line)
        if bullet is None:
            break
        flags.append(bullet.group(1))
    return flags


def parse_element_checks(text: str) -> dict[str, tuple[str, str]]:
    """Map element name -> (status, note); missing elements are unknown."""
    checks: dict[str, tuple[str, str]] = {name: ("unknown", "") for name in ELEMENTS}
    for match in _ELEMENT_LINE.finditer(text):
        name = match.group("name").lower()
        status = match.group("status").lower()
        if name in checks and status in STATUSES:
            checks[name] = (status, match.group("note") or "")
    return checks


def split_verdict(text: str) -> tuple[int, str] | None:
    """Return (c_ooc, explanation) when the last non-empty line is a verdict."""
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        return None
    match = _VERDICT_LINE.match(lines[-1])
    if match is None:
        return None
    explanation = "\n".join(lines[:-1]).strip()
    return (1 if match.group(1) == "OOC" else 0, explanation)


def token_overlap(caption: str, payload: str) -> float:
    """Fraction of caption tokens present in the payload (set semantics)."""
    caption_tokens = {m.group().lower() for m in _TOKEN.finditer(caption)}
    if not caption_tokens:
        return 0.0
    payload_tokens = {m.group().lower() for m in _TOKEN.finditer(payload)}
    return len(caption_tokens & payload_tokens) / len(caption_tokens)
