"""Deterministic rule-based stand-in for the chat provider.

The rules are pure functions of the rendered prompt text, keyed off the
``STAGE:`` marker every prompt template carries:

* retrieval: flag ``low event overlap`` for each event evidence payload
  sharing fewer than 30% of the caption's tokens.
* detective: mark the event element contradicted when the prior
  findings contain at least one flag; all other elements consistent.
* analyst: verdict OOC exactly when some prior element check reads
  contradicted.

Together these exercise the full data flow offline: weak event evidence
turns into a flag, the flag into a contradiction, the contradiction
into an OOC verdict.
"""

from __future__ import annotations

import re

from .stage_format import ELEMENTS, parse_flags, token_overlap

LOW_OVERLAP_THRESHOLD = 0.30

_STAGE = re.compile(r"^STAGE:\s*(\w[\w-]*)\s*$", re.MULTILINE)
_CAPTION = re.compile(r"^CAPTION:\s*(.*)$", re.MULTILINE)
_EVENT_HIT = re.compile(r"^\[event\]\s+source=(\S+)\s+dist=\S+\s+::\s+(.*)$", re.MULTILINE)
_CONTRADICTED = re.compile(r"^\s*ELEMENT\s+\w+\s*:\s*contradicted\b", re.MULTILINE)


def rule_response(prompt_text: str) -> str:
    """Produce the scripted-style response for a rendered prompt."""
    stage_match = _STAGE.search(prompt_text)
    stage = stage_match.group(1).lower() if stage_match else ""
    if stage == "retrieval":
        return _retrieval_response(prompt_text)
    if stage == "detective":
        return _detective_response(prompt_text)
    return _analyst_response(prompt_text)


def _retrieval_response(prompt_text: str) -> str:
    caption_match = _CAPTION.search(prompt_text)
    caption = caption_match.group(1) if caption_match else ""
    flags: list[str] = []
    for source, payload in _EVENT_HIT.findall(prompt_text):
        if token_overlap(caption, payload) < LOW_OVERLAP_THRESHOLD:
            flags.append(f"low event overlap (source={source})")
    lines = ["Compared the caption with the retrieved evidence.", "FLAGS:"]
    lines.extend(f"- {flag}" for flag in flags)
    return "\n".join(lines)


def _detective_response(prompt_text: str) -> str:
    has_flags = bool(parse_flags(prompt_text))
    lines = ["Element review:"]
    for name in ELEMENTS:
        if name == "event" and has_flags:
            lines.append("ELEMENT event: contradicted — a prior flag disputes the event context")
        else:
            lines.append(f"ELEMENT {name}: consistent — nothing in the evidence disputes it")
    return "\n".join(lines)


def _analyst_response(prompt_text: str) -> str:
    if _CONTRADICTED.search(prompt_text):
        return (
            "At least one element check came back contradicted, so the pairing "
            "of image and caption does not hold up against the evidence.\n"
            "VERDICT: OOC"
        )
    return (
        "No element check contradicts the caption and the evidence is "
        "compatible with it.\n"
        "VERDICT: PRISTINE"
    )
