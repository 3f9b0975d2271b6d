"""News-item data model and line-delimited corpus I/O.

A corpus file is UTF-8 JSON, one record per line. Required keys are
``id``, ``image_ref`` and ``caption``; ``label``, ``category`` and
``pre_extracted`` are optional. Unknown keys are preserved verbatim so
dataset variants round-trip unchanged. Images are referenced by
path/URI only; the engine never embeds bytes in the corpus.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator

from .errors import DuplicateId, MalformedRecord


class Label(str, enum.Enum):
    FALSIFIED = "falsified"
    PRISTINE = "pristine"


class Category(str, enum.Enum):
    TEXT_IMAGE = "text_image"
    TEXT_TEXT = "text_text"
    PERSON = "person"
    SCENE = "scene"


class ValidationMode(str, enum.Enum):
    TRAIN = "train"
    EVAL = "eval"


@dataclass(frozen=True)
class SidecarVisual:
    """Pre-extracted visual entity as stored in a corpus record."""

    entity_id: str
    class_label: str
    region: tuple[float, float, float, float]  # x, y, w, h in pixels
    crop_ref: str
    confidence: float

    def to_record(self) -> dict[str, Any]:
        return {
            "entity_id": self.entity_id,
            "class_label": self.class_label,
            "region": list(self.region),
            "crop_ref": self.crop_ref,
            "confidence": self.confidence,
        }


@dataclass(frozen=True)
class SidecarTextual:
    """Pre-extracted textual entity as stored in a corpus record."""

    entity_id: str
    surface: str
    span: tuple[int, int]  # character offsets into the caption
    ner_label: str

    def to_record(self) -> dict[str, Any]:
        return {
            "entity_id": self.entity_id,
            "surface": self.surface,
            "span": list(self.span),
            "ner_label": self.ner_label,
        }


@dataclass(frozen=True)
class PreExtraction:
    """Sidecar entities that let the pipeline skip extraction providers."""

    visual_entities: tuple[SidecarVisual, ...] = ()
    textual_entities: tuple[SidecarTextual, ...] = ()

    def to_record(self) -> dict[str, Any]:
        return {
            "visual_entities": [v.to_record() for v in self.visual_entities],
            "textual_entities": [t.to_record() for t in self.textual_entities],
        }


@dataclass(frozen=True)
class NewsItem:
    """One (image, caption) pair, optionally labeled and categorized."""

    id: str
    image_ref: str
    caption: str
    label: Label | None = None
    category: Category | None = None
    pre_extracted: PreExtraction | None = None
    extra: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("item id must be non-empty")
        if not self.caption.strip():
            raise ValueError("caption must be non-empty after trimming")

    def to_record(self) -> dict[str, Any]:
        record: dict[str, Any] = dict(self.extra)
        record["id"] = self.id
        record["image_ref"] = self.image_ref
        record["caption"] = self.caption
        if self.label is not None:
            record["label"] = self.label.value
        if self.category is not None:
            record["category"] = self.category.value
        if self.pre_extracted is not None:
            record["pre_extracted"] = self.pre_extracted.to_record()
        return record


@dataclass(frozen=True)
class CorpusManifest:
    split_name: str
    items: int
    source_path: str
    categories: dict[str, int]


_REQUIRED_KEYS = ("id", "image_ref", "caption")
_KNOWN_KEYS = frozenset(_REQUIRED_KEYS) | {"label", "category", "pre_extracted"}


def _parse_sidecar_visual(raw: Any, line_no: int) -> SidecarVisual:
    if not isinstance(raw, dict):
        raise MalformedRecord(line_no, "visual sidecar entry is not an object")
    try:
        region_raw = raw["region"]
        region = (
            float(region_raw[0]),
            float(region_raw[1]),
            float(region_raw[2]),
            float(region_raw[3]),
        )
        return SidecarVisual(
            entity_id=str(raw["entity_id"]),
            class_label=str(raw["class_label"]),
            region=region,
            crop_ref=str(raw.get("crop_ref", "")),
            confidence=float(raw["confidence"]),
        )
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise MalformedRecord(line_no, f"bad visual sidecar entry: {exc}") from exc


def _parse_sidecar_textual(raw: Any, line_no: int) -> SidecarTextual:
    if not isinstance(raw, dict):
        raise MalformedRecord(line_no, "textual sidecar entry is not an object")
    try:
        span_raw = raw["span"]
        return SidecarTextual(
            entity_id=str(raw["entity_id"]),
            surface=str(raw["surface"]),
            span=(int(span_raw[0]), int(span_raw[1])),
            ner_label=str(raw.get("ner_label", "ENT")),
        )
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise MalformedRecord(line_no, f"bad textual sidecar entry: {exc}") from exc


def parse_record(record: dict[str, Any], line_no: int = 0) -> NewsItem:
    """Turn one decoded corpus record into a validated NewsItem."""
    for key in _REQUIRED_KEYS:
        if key not in record:
            raise MalformedRecord(line_no, f"missing required key {key!r}")
        if not isinstance(record[key], str):
            raise MalformedRecord(line_no, f"key {key!r} must be a string")
    if not record["id"]:
        raise MalformedRecord(line_no, "empty id")
    if not record["caption"].strip():
        raise MalformedRecord(line_no, "empty caption")

    label: Label | None = None
    if record.get("label") is not None:
        try:
            label = Label(record["label"])
        except ValueError:
            raise MalformedRecord(line_no, f"unknown label {record['label']!r}") from None

    category: Category | None = None
    if record.get("category") is not None:
        try:
            category = Category(record["category"])
        except ValueError:
            raise MalformedRecord(line_no, f"unknown category {record['category']!r}") from None

    pre_extracted: PreExtraction | None = None
    if record.get("pre_extracted") is not None:
        raw_pre = record["pre_extracted"]
        if not isinstance(raw_pre, dict):
            raise MalformedRecord(line_no, "pre_extracted must be an object")
        pre_extracted = PreExtraction(
            visual_entities=tuple(
                _parse_sidecar_visual(v, line_no) for v in raw_pre.get("visual_entities", [])
            ),
            textual_entities=tuple(
                _parse_sidecar_textual(t, line_no) for t in raw_pre.get("textual_entities", [])
            ),
        )

    extra = {k: v for k, v in record.items() if k not in _KNOWN_KEYS}
    return NewsItem(
        id=record["id"],
        image_ref=record["image_ref"],
        caption=record["caption"],
        label=label,
        category=category,
        pre_extracted=pre_extracted,
        extra=extra,
    )


def iter_corpus(path: str | Path) -> Iterator[NewsItem]:
    """Yield validated items from a corpus file, one JSON object per line.

    Raises MalformedRecord with the offending 1-based line number and
    DuplicateId when an id repeats. Blank lines are skipped.
    """
    seen: set[str] = set()
    with Path(path).open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(line_no, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise MalformedRecord(line_no, "record is not a JSON object")
            item = parse_record(record, line_no)
            if item.id in seen:
                raise DuplicateId(item.id)
            seen.add(item.id)
            yield item


def load_corpus(path: str | Path) -> tuple[CorpusManifest, list[NewsItem]]:
    """Load a whole corpus and summarize it.

    Single pass; the returned items are immutable and safe to share
    across threads.
    """
    path = Path(path)
    items = list(iter_corpus(path))
    categories: dict[str, int] = {}
    for item in items:
        if item.category is not None:
            categories[item.category.value] = categories.get(item.category.value, 0) + 1
    manifest = CorpusManifest(
        split_name=path.stem,
        items=len(items),
        source_path=str(path),
        categories=categories,
    )
    return manifest, items


def write_corpus(items: Iterable[NewsItem], path: str | Path) -> int:
    """Serialize items back to the line-delimited format. Returns the count."""
    count = 0
    with Path(path).open("w", encoding="utf-8") as handle:
        for item in items:
            handle.write(json.dumps(item.to_record(), ensure_ascii=False, sort_keys=True))
            handle.write("\n")
            count += 1
    return count


def validate_item(item: NewsItem, mode: ValidationMode) -> list[str]:
    """Return schema violations for an item under the given mode.

    Eval mode requires a ground-truth label; train mode does not. An
    empty list means the item is acceptable.
    """
    violations: list[str] = []
    if mode is ValidationMode.EVAL and item.label is None:
        violations.append("missing label")
    return violations
