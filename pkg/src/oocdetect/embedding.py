"""Entity and event encoders behind pluggable providers.

Real encoders are remote services that declare their own output
dimension. The ``DeterministicMock`` provider gives tests reproducible
geometry with no model dependency: a keyed blake2b stream over the
canonical input string is expanded into ``dim`` pseudo-uniform reals in
[-1, 1) and L2-normalized. The expansion depends only on (seed, input
string, dim), so vectors are bit-identical across runs and machines.

Canonical input strings:
* visual entity:  ``class=<label>|crop=<sha256 of the crop bytes>``
  (the crop reference string stands in for the bytes when it is not a
  readable file)
* textual entity: ``surface=<text>|ner=<label>``
* event:          the raw caption
"""

from __future__ import annotations

import base64
import enum
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

from .alignment import AlignedEntity
from .errors import DimMismatch, ProviderUnavailable
from .extraction import TextualEntity, VisualEntity
from .remote import RemoteService, post_json

DEFAULT_DIM = 64


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("embedding vector must be non-empty")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("embedding vector contains non-finite values")

    @property
    def dim(self) -> int:
        return len(self.values)


class EncoderKind(str, enum.Enum):
    VISUAL = "visual"
    TEXT = "text"


@dataclass(frozen=True)
class DeterministicMock:
    seed: int = 0


@dataclass(frozen=True)
class EncoderProfile:
    kind: EncoderKind
    provider: DeterministicMock | RemoteService = DeterministicMock()
    dim: int = DEFAULT_DIM

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("encoder dim must be positive")


def expand_mock(seed: int, text: str, dim: int) -> EmbeddingVector:
    """Expand (seed, text) into a unit-norm vector of ``dim`` reals.

    blake2b is keyed with the seed; 64-byte digest blocks over
    ``text NUL counter`` are consumed eight bytes at a time and mapped
    linearly onto [-1, 1) before normalization.
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    key = seed.to_bytes(8, "little", signed=True)
    values: list[float] = []
    counter = 0
    while len(values) < dim:
        block = hashlib.blake2b(f"{text}\x00{counter}".encode("utf-8"), key=key).digest()
        for offset in range(0, len(block) - 7, 8):
            if len(values) >= dim:
                break
            word = int.from_bytes(block[offset : offset + 8], "little")
            values.append(word / 2**63 - 1.0)
        counter += 1
    norm = math.sqrt(math.fsum(v * v for v in values))
    if norm == 0.0:  # unreachable for blake2b output, guarded anyway
        values[0] = 1.0
        norm = 1.0
    return EmbeddingVector(tuple(v / norm for v in values))


def canonical_visual(entity: VisualEntity) -> str:
    crop_path = Path(entity.crop_ref)
    if entity.crop_ref and crop_path.is_file():
        digest = hashlib.sha256(crop_path.read_bytes()).hexdigest()
    else:
        digest = hashlib.sha256(entity.crop_ref.encode("utf-8")).hexdigest()
    return f"class={entity.class_label}|crop={digest}"


def canonical_textual(entity: TextualEntity) -> str:
    return f"surface={entity.surface}|ner={entity.ner_label}"


def _encode_text(text: str, profile: EncoderProfile, mock_input: str | None = None) -> EmbeddingVector:
    """Encode text; the mock hashes ``mock_input`` when it differs from the wire text."""
    provider = profile.provider
    if isinstance(provider, DeterministicMock):
        return expand_mock(provider.seed, mock_input if mock_input is not None else text, profile.dim)
    if isinstance(provider, RemoteService):
        body = post_json(provider.endpoint, {"text": text, "dim": profile.dim})
        return _vector_from_response(body, profile.dim)
    raise ProviderUnavailable(f"unsupported encoder provider {provider!r}")


def _encode_visual(entity: VisualEntity, profile: EncoderProfile) -> EmbeddingVector:
    provider = profile.provider
    if isinstance(provider, DeterministicMock):
        return expand_mock(provider.seed, canonical_visual(entity), profile.dim)
    if isinstance(provider, RemoteService):
        crop_path = Path(entity.crop_ref)
        if entity.crop_ref and crop_path.is_file():
            crop = crop_path.read_bytes()
        else:
            crop = entity.crop_ref.encode("utf-8")
        payload = {"crop_b64": base64.b64encode(crop).decode("ascii"), "dim": profile.dim}
        return _vector_from_response(post_json(provider.endpoint, payload), profile.dim)
    raise ProviderUnavailable(f"unsupported encoder provider {provider!r}")


def _vector_from_response(body: object, dim: int) -> EmbeddingVector:
    if not isinstance(body, dict) or "vector" not in body:
        raise ProviderUnavailable(f"encoder returned no vector: {body!r}")
    raw = body["vector"]
    try:
        values = tuple(float(v) for v in raw)
    except (TypeError, ValueError) as exc:
        raise ProviderUnavailable(f"encoder returned non-numeric vector: {raw!r}") from exc
    if len(values) != dim:
        raise DimMismatch(f"encoder returned dim {len(values)}, declared {dim}")
    return EmbeddingVector(values)


def encode_entity(
    entity: AlignedEntity,
    visual: EncoderProfile,
    textual: EncoderProfile,
) -> tuple[EmbeddingVector, EmbeddingVector]:
    """Encode one aligned entity into its (visual, textual) vectors."""
    if visual.kind is not EncoderKind.VISUAL:
        raise ValueError("visual profile must have kind VISUAL")
    if textual.kind is not EncoderKind.TEXT:
        raise ValueError("textual profile must have kind TEXT")
    return (
        _encode_visual(entity.pair.visual, visual),
        _encode_text(
            entity.pair.textual.surface,
            textual,
            mock_input=canonical_textual(entity.pair.textual),
        ),
    )


def encode_event(caption: str, textual: EncoderProfile) -> EmbeddingVector:
    """Encode the whole caption as event-level context."""
    if not caption.strip():
        raise ValueError("caption must be non-empty")
    if textual.kind is not EncoderKind.TEXT:
        raise ValueError("event profile must have kind TEXT")
    return _encode_text(caption, textual)
