from __future__ import annotations

import math

import pytest

from oocdetect.alignment import AlignedEntity, AlignmentScore
from oocdetect.embedding import (
    DeterministicMock,
    EmbeddingVector,
    EncoderKind,
    EncoderProfile,
    canonical_textual,
    canonical_visual,
    encode_entity,
    encode_event,
    expand_mock,
)
from oocdetect.errors import DimMismatch
from oocdetect.extraction import EntityPairCandidate, TextualEntity, VisualEntity
from oocdetect.remote import RemoteService

from conftest import FakeResponse, FakeSession

# Generated once with the documented blake2b expansion and frozen.
GOLDEN_FIRST_COMPONENT = -0.0067511820003349973

VIS = EncoderProfile(kind=EncoderKind.VISUAL, provider=DeterministicMock(seed=7), dim=64)
TXT = EncoderProfile(kind=EncoderKind.TEXT, provider=DeterministicMock(seed=7), dim=64)


def _aligned(class_label="dog", surface="dog park") -> AlignedEntity:
    pair = EntityPairCandidate(
        visual=VisualEntity("v0", class_label, (0, 0, 4, 4), "cropref", 1.0),
        textual=TextualEntity("t0", surface, (0, len(surface)), "ENT"),
        news_id="n1",
    )
    return AlignedEntity(pair=pair, score=AlignmentScore(1.0), source_news_id="n1")


def test_mock_is_deterministic():
    entity = _aligned()
    first = encode_entity(entity, VIS, TXT)
    second = encode_entity(entity, VIS, TXT)
    assert first[0].values == second[0].values
    assert first[1].values == second[1].values


def test_mock_unit_norm():
    for text in ("alpha", "beta", "a much longer string with many words"):
        vector = expand_mock(7, text, 64)
        assert abs(math.sqrt(math.fsum(v * v for v in vector.values)) - 1.0) < 1e-9


def test_golden_first_component():
    vector = expand_mock(7, "class=dog|surface=dog park", 64)
    assert vector.values[0] == GOLDEN_FIRST_COMPONENT


def test_mock_depends_on_seed_and_dim():
    base = expand_mock(7, "x", 64)
    assert expand_mock(8, "x", 64).values != base.values
    assert expand_mock(7, "x", 32).values != base.values[:32]
    assert len(expand_mock(7, "x", 129).values) == 129


def test_encode_event_deterministic_and_sensitive():
    caption = "Mayor opens the new bridge"
    assert encode_event(caption, TXT).values == encode_event(caption, TXT).values
    other = encode_event("A completely different caption", TXT)
    assert encode_event(caption, TXT).values != other.values


def test_encode_event_empty_caption_rejected():
    with pytest.raises(ValueError):
        encode_event("   ", TXT)


def test_profile_kind_checked():
    entity = _aligned()
    with pytest.raises(ValueError):
        encode_entity(entity, TXT, TXT)
    with pytest.raises(ValueError):
        encode_event("caption", VIS)


def test_canonical_strings_stable():
    entity = _aligned()
    assert canonical_visual(entity.pair.visual).startswith("class=dog|crop=")
    assert canonical_textual(entity.pair.textual) == "surface=dog park|ner=ENT"


def test_vector_invariants():
    with pytest.raises(ValueError):
        EmbeddingVector(())
    with pytest.raises(ValueError):
        EmbeddingVector((1.0, float("nan")))
    assert EmbeddingVector((1.0, 2.0)).dim == 2


def test_remote_encoder_dim_mismatch(monkeypatch):
    session = FakeSession([FakeResponse({"vector": [0.1, 0.2, 0.3]})])
    monkeypatch.setattr("oocdetect.remote.requests", session)
    profile = EncoderProfile(kind=EncoderKind.TEXT, provider=RemoteService("http://enc"), dim=5)
    with pytest.raises(DimMismatch):
        encode_event("caption text", profile)


def test_remote_encoder_accepts_declared_dim(monkeypatch):
    session = FakeSession([FakeResponse({"vector": [0.1, 0.2, 0.3]})])
    monkeypatch.setattr("oocdetect.remote.requests", session)
    profile = EncoderProfile(kind=EncoderKind.TEXT, provider=RemoteService("http://enc"), dim=3)
    assert encode_event("caption text", profile).values == (0.1, 0.2, 0.3)
