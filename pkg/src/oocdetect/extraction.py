"""Visual and textual entity extraction via pluggable providers.

Real detector and NER models live behind remote services and are never
run in-process. For tests and desk-scale runs two deterministic
providers exist:

* ``Sidecar`` reads entities straight from an item's ``pre_extracted``
  block (both modalities).
* ``RuleBased`` (textual only) takes maximal runs of capitalized word
  tokens as entities, labeled ``ENT``. A run is dropped only when it is
  a single token sitting at a sentence start, so "Marco Rubio speaks in
  Minneapolis" yields "Marco Rubio" and "Minneapolis" while "The dog
  sleeps" yields nothing. Runs break on any non-whitespace separator.

Entities that violate their own invariants (zero-area regions, spans
outside the caption, surfaces that do not match the caption slice) are
rejected individually; the rest of the provider output is kept.
"""

from __future__ import annotations

import base64
import re
from dataclasses import dataclass
from pathlib import Path

from .corpus import NewsItem
from .errors import ImageUnreadable, ProviderUnavailable
from .remote import RemoteService, post_json


@dataclass(frozen=True)
class VisualEntity:
    entity_id: str
    class_label: str
    region: tuple[float, float, float, float]  # x, y, w, h in pixels
    crop_ref: str
    confidence: float

    def __post_init__(self) -> None:
        _, _, w, h = self.region
        if w <= 0 or h <= 0:
            raise ValueError(f"visual entity {self.entity_id!r} has empty region")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"visual entity {self.entity_id!r} confidence outside [0, 1]")


@dataclass(frozen=True)
class TextualEntity:
    entity_id: str
    surface: str
    span: tuple[int, int]  # character offsets, start < end
    ner_label: str


@dataclass(frozen=True)
class EntityPairCandidate:
    """One (visual, textual) pairing drawn from a single news item."""

    visual: VisualEntity
    textual: TextualEntity
    news_id: str = ""


@dataclass(frozen=True)
class Sidecar:
    """Provider that reads the item's pre_extracted block."""


@dataclass(frozen=True)
class RuleBased:
    """Deterministic capitalized-run heuristic, textual only."""


@dataclass(frozen=True)
class ExtractorConfig:
    visual_provider: Sidecar | RemoteService = Sidecar()
    textual_provider: Sidecar | RuleBased | RemoteService = RuleBased()
    min_confidence: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ValueError("min_confidence must lie in [0, 1]")


def _valid_textual(surface: str, span: tuple[int, int], caption: str) -> bool:
    start, end = span
    return 0 <= start < end <= len(caption) and caption[start:end] == surface


def _resolve_span_overlaps(entities: list[TextualEntity]) -> list[TextualEntity]:
    """Keep the longer span on overlap, then the earlier start."""
    ordered = sorted(entities, key=lambda e: (-(e.span[1] - e.span[0]), e.span[0]))
    kept: list[TextualEntity] = []
    for entity in ordered:
        if all(entity.span[1] <= other.span[0] or entity.span[0] >= other.span[1] for other in kept):
            kept.append(entity)
    return sorted(kept, key=lambda e: e.span[0])


def read_image_bytes(item: NewsItem) -> bytes:
    """Resolve an item's image_ref to bytes (local paths only)."""
    path = Path(item.image_ref)
    try:
        return path.read_bytes()
    except OSError as exc:
        raise ImageUnreadable(f"cannot read image for item {item.id!r}: {exc}") from exc


def extract_visual(item: NewsItem, cfg: ExtractorConfig) -> list[VisualEntity]:
    """Detect visual entities, filtered to confidence >= min_confidence."""
    provider = cfg.visual_provider
    if isinstance(provider, Sidecar):
        raw = item.pre_extracted.visual_entities if item.pre_extracted else ()
        candidates = [
            {
                "entity_id": v.entity_id,
                "class_label": v.class_label,
                "region": v.region,
                "crop_ref": v.crop_ref,
                "confidence": v.confidence,
            }
            for v in raw
        ]
    elif isinstance(provider, RemoteService):
        image_b64 = base64.b64encode(read_image_bytes(item)).decode("ascii")
        body = post_json(provider.endpoint, {"image_b64": image_b64, "item_id": item.id})
        candidates = body.get("entities", []) if isinstance(body, dict) else []
    else:
        raise ProviderUnavailable(f"unsupported visual provider {provider!r}")

    entities: list[VisualEntity] = []
    for raw_entity in candidates:
        try:
            region = tuple(float(x) for x in raw_entity["region"])
            entity = VisualEntity(
                entity_id=str(raw_entity["entity_id"]),
                class_label=str(raw_entity["class_label"]),
                region=(region[0], region[1], region[2], region[3]),
                crop_ref=str(raw_entity.get("crop_ref", "")),
                confidence=float(raw_entity["confidence"]),
            )
        except (KeyError, IndexError, TypeError, ValueError):
            continue  # invariant-violating entity: reject it, keep the rest
        if entity.confidence >= cfg.min_confidence:
            entities.append(entity)
    return entities


_WORD = re.compile(r"\w+(?:['’-]\w+)*", re.UNICODE)
_SENTENCE_END = re.compile(r"[.!?]")


def _rule_based_entities(caption: str) -> list[TextualEntity]:
    tokens = list(_WORD.finditer(caption))
    runs: list[list[int]] = []
    current: list[int] = []
    for i, match in enumerate(tokens):
        capitalized = match.group()[0].isupper()
        adjacent = bool(current) and caption[tokens[current[-1]].end() : match.start()].isspace()
        if capitalized and (not current or adjacent):
            current.append(i)
        else:
            if current:
                runs.append(current)
            current = [i] if capitalized else []
    if current:
        runs.append(current)

    def at_sentence_start(index: int) -> bool:
        if index == 0:
            return True
        gap = caption[tokens[index - 1].end() : tokens[index].start()]
        return bool(_SENTENCE_END.search(gap))

    entities: list[TextualEntity] = []
    for run in runs:
        if len(run) == 1 and at_sentence_start(run[0]):
            continue
        start, end = tokens[run[0]].start(), tokens[run[-1]].end()
        entities.append(
            TextualEntity(
                entity_id=f"t{len(entities)}",
                surface=caption[start:end],
                span=(start, end),
                ner_label="ENT",
            )
        )
    return entities


def extract_textual(item: NewsItem, cfg: ExtractorConfig) -> list[TextualEntity]:
    """Extract textual entities with valid, non-overlapping spans."""
    provider = cfg.textual_provider
    if isinstance(provider, RuleBased):
        entities = _rule_based_entities(item.caption)
    elif isinstance(provider, Sidecar):
        raw = item.pre_extracted.textual_entities if item.pre_extracted else ()
        entities = [
            TextualEntity(t.entity_id, t.surface, t.span, t.ner_label)
            for t in raw
            if _valid_textual(t.surface, t.span, item.caption)
        ]
    elif isinstance(provider, RemoteService):
        body = post_json(provider.endpoint, {"caption": item.caption, "item_id": item.id})
        raw_entities = body.get("entities", []) if isinstance(body, dict) else []
        entities = []
        for raw_entity in raw_entities:
            try:
                span = (int(raw_entity["span"][0]), int(raw_entity["span"][1]))
                entity = TextualEntity(
                    entity_id=str(raw_entity["entity_id"]),
                    surface=str(raw_entity["surface"]),
                    span=span,
                    ner_label=str(raw_entity.get("ner_label", "ENT")),
                )
            except (KeyError, IndexError, TypeError, ValueError):
                continue
            if _valid_textual(entity.surface, entity.span, item.caption):
                entities.append(entity)
    else:
        raise ProviderUnavailable(f"unsupported textual provider {provider!r}")
    return _resolve_span_overlaps(entities)


def pair_candidates(
    visuals: list[VisualEntity],
    textuals: list[TextualEntity],
    news_id: str = "",
) -> list[EntityPairCandidate]:
    """Cartesian pairing in (visual order, textual order) sequence."""
    return [
        EntityPairCandidate(visual=v, textual=t, news_id=news_id)
        for v in visuals
        for t in textuals
    ]
