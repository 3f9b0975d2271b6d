"""Cross-modal alignment scoring and threshold gating.

A candidate (visual, textual) pair survives only when its alignment
score reaches the configured threshold; the comparison is inclusive, so
a score exactly at the threshold is retained. The deterministic
``LexicalOverlap`` scorer is Jaccard similarity between the lowercase
token sets of the visual class label and the textual surface; remote
scorers must answer in [0, 1] and anything outside is an error rather
than being clamped.
"""

from __future__ import annotations

import base64
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import MalformedScore, ProviderUnavailable
from .extraction import EntityPairCandidate
from .remote import RemoteService, post_json

DEFAULT_THRESHOLD = 0.5

_TOKEN = re.compile(r"\w+(?:['’-]\w+)*", re.UNICODE)


@dataclass(frozen=True)
class AlignmentScore:
    value: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"alignment score {self.value} outside [0, 1]")


@dataclass(frozen=True)
class AlignedEntity:
    """A candidate pair that passed the gate, tagged with its origin item."""

    pair: EntityPairCandidate
    score: AlignmentScore
    source_news_id: str


@dataclass(frozen=True)
class LexicalOverlap:
    """Jaccard over lowercase token sets of class label vs surface."""


@dataclass(frozen=True)
class AlignmentConfig:
    scorer: LexicalOverlap | RemoteService = LexicalOverlap()
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")


def _tokens(text: str) -> frozenset[str]:
    return frozenset(match.group().lower() for match in _TOKEN.finditer(text))


def jaccard(a: str, b: str) -> float:
    set_a, set_b = _tokens(a), _tokens(b)
    union = set_a | set_b
    if not union:
        return 0.0
    return len(set_a & set_b) / len(union)


def _crop_bytes(crop_ref: str) -> bytes:
    path = Path(crop_ref)
    if crop_ref and path.is_file():
        return path.read_bytes()
    return crop_ref.encode("utf-8")


def score_alignment(pair: EntityPairCandidate, cfg: AlignmentConfig) -> AlignmentScore:
    """Score one candidate pair in [0, 1]."""
    scorer = cfg.scorer
    if isinstance(scorer, LexicalOverlap):
        return AlignmentScore(jaccard(pair.visual.class_label, pair.textual.surface))
    if isinstance(scorer, RemoteService):
        payload = {
            "crop_b64": base64.b64encode(_crop_bytes(pair.visual.crop_ref)).decode("ascii"),
            "surface": pair.textual.surface,
        }
        body = post_json(scorer.endpoint, payload)
        try:
            value = float(body["score"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedScore(f"scorer returned no usable score: {body!r}") from exc
        if not 0.0 <= value <= 1.0:
            raise MalformedScore(f"scorer returned {value}, outside [0, 1]")
        return AlignmentScore(value)
    raise ProviderUnavailable(f"unsupported alignment scorer {scorer!r}")


def gate(
    candidates: Sequence[EntityPairCandidate],
    cfg: AlignmentConfig,
    scores: Sequence[AlignmentScore] | None = None,
) -> list[AlignedEntity]:
    """Retain exactly the candidates whose score >= threshold, in order.

    ``scores`` lets callers reuse already-computed scores; when omitted
    each candidate is scored with the configured scorer.
    """
    if scores is None:
        scores = [score_alignment(candidate, cfg) for candidate in candidates]
    if len(scores) != len(candidates):
        raise ValueError("scores must parallel candidates")
    return [
        AlignedEntity(pair=candidate, score=score, source_news_id=candidate.news_id)
        for candidate, score in zip(candidates, scores)
        if score.value >= cfg.threshold
    ]
