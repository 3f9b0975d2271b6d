"""Query construction, top-k evidence retrieval and aggregation.

An input item can gate several aligned entities, so each modality may
carry several query vectors. Retrieval runs the exact scan for every
query in a modality, merges per record on the smallest distance, drops
the item's own records when self-exclusion is on, deduplicates by
source article (keeping the nearest hit) and truncates to k. The
result keeps the top-k semantics of single-query retrieval while
staying deterministic: ties resolve to the earlier index record.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alignment import AlignedEntity, AlignmentConfig, gate
from .corpus import NewsItem
from .embedding import EmbeddingVector, EncoderProfile, encode_entity, encode_event
from .extraction import ExtractorConfig, extract_textual, extract_visual, pair_candidates
from .vector_index import Granularity, Hit, VectorIndex, distances_to_all

DEFAULT_K = 2


@dataclass(frozen=True)
class RetrievalConfig:
    k: int = DEFAULT_K
    exclude_self: bool = True

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class QueryBundle:
    """Per-modality query vectors for one input item."""

    visual_queries: tuple[EmbeddingVector, ...]
    textual_queries: tuple[EmbeddingVector, ...]
    event_query: EmbeddingVector


@dataclass(frozen=True)
class EvidenceSet:
    """The aggregated retrieval result handed to the reasoning stages."""

    visual_hits: tuple[Hit, ...] = ()
    textual_hits: tuple[Hit, ...] = ()
    event_hits: tuple[Hit, ...] = ()
    verified: bool = False

    def lists(self) -> list[tuple[Granularity, tuple[Hit, ...]]]:
        return [
            (Granularity.VISUAL, self.visual_hits),
            (Granularity.TEXTUAL, self.textual_hits),
            (Granularity.EVENT, self.event_hits),
        ]

    def total_hits(self) -> int:
        return len(self.visual_hits) + len(self.textual_hits) + len(self.event_hits)

    def to_record(self) -> dict[str, object]:
        def hits_record(hits: tuple[Hit, ...]) -> list[dict[str, object]]:
            return [
                {
                    "record_id": h.record_id,
                    "source_news_id": h.source_news_id,
                    "payload": h.payload,
                    "distance": h.distance,
                }
                for h in hits
            ]

        return {
            "visual_hits": hits_record(self.visual_hits),
            "textual_hits": hits_record(self.textual_hits),
            "event_hits": hits_record(self.event_hits),
            "verified": self.verified,
        }


def gated_entities(
    item: NewsItem,
    extractor: ExtractorConfig,
    aligner: AlignmentConfig,
) -> list[AlignedEntity]:
    """Extract both modalities, pair them and apply the alignment gate."""
    visuals = extract_visual(item, extractor)
    textuals = extract_textual(item, extractor)
    return gate(pair_candidates(visuals, textuals, news_id=item.id), aligner)


def build_queries(
    item: NewsItem,
    extractor: ExtractorConfig,
    aligner: AlignmentConfig,
    visual_profile: EncoderProfile,
    textual_profile: EncoderProfile,
) -> QueryBundle:
    """Extract, align and encode one item into its query vectors.

    The event query is always present; entity query lists are empty when
    nothing survives the alignment gate.
    """
    aligned = gated_entities(item, extractor, aligner)
    visual_queries: list[EmbeddingVector] = []
    textual_queries: list[EmbeddingVector] = []
    for entity in aligned:
        z_v, z_t = encode_entity(entity, visual_profile, textual_profile)
        visual_queries.append(z_v)
        textual_queries.append(z_t)
    return QueryBundle(
        visual_queries=tuple(visual_queries),
        textual_queries=tuple(textual_queries),
        event_query=encode_event(item.caption, textual_profile),
    )


def _retrieve_modality(
    queries: tuple[EmbeddingVector, ...],
    index: VectorIndex,
    cfg: RetrievalConfig,
    self_id: str,
) -> tuple[Hit, ...]:
    if not queries or len(index) == 0:
        return ()
    per_record = np.min(
        np.stack([distances_to_all(index, q) for q in queries], axis=0), axis=0
    )
    best_by_source: dict[str, tuple[float, int]] = {}
    for i, record in enumerate(index.records):
        if cfg.exclude_self and record.source_news_id == self_id:
            continue
        distance = float(per_record[i])
        current = best_by_source.get(record.source_news_id)
        if current is None or distance < current[0]:
            best_by_source[record.source_news_id] = (distance, i)
    ranked = sorted(best_by_source.values(), key=lambda pair: (pair[0], pair[1]))[: cfg.k]
    return tuple(
        Hit(
            record_id=index.records[i].record_id,
            source_news_id=index.records[i].source_news_id,
            payload=index.records[i].payload,
            distance=distance,
        )
        for distance, i in ranked
    )


def retrieve(
    bundle: QueryBundle,
    visual_index: VectorIndex,
    textual_index: VectorIndex,
    event_index: VectorIndex,
    cfg: RetrievalConfig,
    self_id: str = "",
) -> tuple[tuple[Hit, ...], tuple[Hit, ...], tuple[Hit, ...]]:
    """Top-k evidence per granularity: (visual, textual, event) hits."""
    return (
        _retrieve_modality(bundle.visual_queries, visual_index, cfg, self_id),
        _retrieve_modality(bundle.textual_queries, textual_index, cfg, self_id),
        _retrieve_modality((bundle.event_query,), event_index, cfg, self_id),
    )


def aggregate(
    visual_hits: tuple[Hit, ...],
    textual_hits: tuple[Hit, ...],
    event_hits: tuple[Hit, ...],
) -> EvidenceSet:
    """Combine per-granularity hits into one unverified evidence set."""
    return EvidenceSet(
        visual_hits=tuple(visual_hits),
        textual_hits=tuple(textual_hits),
        event_hits=tuple(event_hits),
        verified=False,
    )


def verify(evidence: EvidenceSet) -> EvidenceSet:
    """Deduplicate and re-validate an evidence set; idempotent.

    Duplicate (granularity, record_id) pairs keep their first
    occurrence, hits with empty payloads are dropped, and each list is
    re-sorted by ascending distance (stable).
    """
    seen: set[tuple[Granularity, str]] = set()
    cleaned: dict[Granularity, list[Hit]] = {g: [] for g in Granularity}
    for granularity, hits in evidence.lists():
        for hit in hits:
            key = (granularity, hit.record_id)
            if key in seen or not hit.payload:
                continue
            seen.add(key)
            cleaned[granularity].append(hit)
    for hits_list in cleaned.values():
        hits_list.sort(key=lambda h: h.distance)
    return EvidenceSet(
        visual_hits=tuple(cleaned[Granularity.VISUAL]),
        textual_hits=tuple(cleaned[Granularity.TEXTUAL]),
        event_hits=tuple(cleaned[Granularity.EVENT]),
        verified=True,
    )
