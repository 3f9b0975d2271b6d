from __future__ import annotations

import json
from pathlib import Path

import pytest

from oocdetect.agents import EngineSettings
from oocdetect.alignment import AlignmentConfig
from oocdetect.corpus import (
    Category,
    Label,
    NewsItem,
    PreExtraction,
    SidecarVisual,
)
from oocdetect.embedding import DeterministicMock, EncoderKind, EncoderProfile
from oocdetect.extraction import ExtractorConfig, RuleBased, Sidecar


def make_item(
    item_id: str,
    caption: str,
    label: Label | None = None,
    category: Category | None = None,
    visual_classes: tuple[str, ...] = (),
    image_ref: str = "img/none.jpg",
) -> NewsItem:
    """Build an item whose sidecar visuals are named after caption entities.

    A visual class equal to a capitalized phrase in the caption lets the
    lexical-overlap scorer align the pair with score 1.0.
    """
    visuals = tuple(
        SidecarVisual(
            entity_id=f"v{i}",
            class_label=cls,
            region=(float(10 * i), 0.0, 32.0, 32.0),
            crop_ref=f"{item_id}/crop{i}",
            confidence=0.9,
        )
        for i, cls in enumerate(visual_classes)
    )
    pre = PreExtraction(visual_entities=visuals) if visuals else None
    return NewsItem(
        id=item_id,
        image_ref=image_ref,
        caption=caption,
        label=label,
        category=category,
        pre_extracted=pre,
    )


def write_corpus_file(path: Path, items: list[NewsItem]) -> Path:
    with path.open("w", encoding="utf-8") as handle:
        for item in items:
            handle.write(json.dumps(item.to_record(), ensure_ascii=False))
            handle.write("\n")
    return path


@pytest.fixture
def mock_settings() -> EngineSettings:
    """Fully offline settings: sidecar visuals, rule-based NER, mock encoders."""
    return EngineSettings(
        extractor=ExtractorConfig(visual_provider=Sidecar(), textual_provider=RuleBased()),
        aligner=AlignmentConfig(threshold=0.5),
        visual_profile=EncoderProfile(kind=EncoderKind.VISUAL, provider=DeterministicMock(seed=7), dim=64),
        textual_profile=EncoderProfile(kind=EncoderKind.TEXT, provider=DeterministicMock(seed=7), dim=64),
    )


class FakeResponse:
    def __init__(self, payload, status_code: int = 200):
        self._payload = payload
        self.status_code = status_code

    def json(self):
        if isinstance(self._payload, Exception):
            raise self._payload
        return self._payload


class FakeSession:
    """Stands in for requests: answers from a queue, counts calls."""

    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = 0
        self.requests: list[dict] = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.calls += 1
        self.requests.append({"url": url, "json": json, "headers": headers})
        if not self.responses:
            raise AssertionError("FakeSession ran out of scripted responses")
        item = self.responses.pop(0)
        if isinstance(item, Exception):
            raise item
        return item


class ExplodingSession:
    """A session that must never be used; proves no network traffic."""

    def __init__(self):
        self.calls = 0

    def post(self, *args, **kwargs):
        self.calls += 1
        raise AssertionError("network call attempted against ExplodingSession")
