from __future__ import annotations

import hashlib
import json
import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oocdetect.embedding import EmbeddingVector
from oocdetect.retrieval import (
    EvidenceSet,
    QueryBundle,
    RetrievalConfig,
    aggregate,
    build_queries,
    retrieve,
    verify,
)
from oocdetect.vector_index import Granularity, Hit, IndexRecord, build_index

from conftest import make_item


def _record(i: int, values, source: str) -> IndexRecord:
    return IndexRecord(f"r{i}", EmbeddingVector(tuple(map(float, values))), source, f"payload {i}")


def _vec(*values) -> EmbeddingVector:
    return EmbeddingVector(tuple(float(v) for v in values))


def _empty_index(granularity, dim=2):
    return build_index(granularity, [], dim=dim)


def oracle_merge(index, queries, k, self_id, exclude_self=True):
    """Brute-force merge over all (query, record) distances."""
    best = {}
    for i, record in enumerate(index.records):
        if exclude_self and record.source_news_id == self_id:
            continue
        d = min(
            math.sqrt(math.fsum((a - b) ** 2 for a, b in zip(record.vector.values, q.values)))
            for q in queries
        )
        key = record.source_news_id
        if key not in best or d < best[key][0]:
            best[key] = (d, i)
    ranked = sorted(best.values(), key=lambda pair: (pair[0], pair[1]))[:k]
    return [index.records[i].record_id for _, i in ranked]


def test_single_query_top2_distinct_sources():
    records = [
        _record(0, (0.0, 0.0), "s0"),
        _record(1, (1.0, 0.0), "s1"),
        _record(2, (2.0, 0.0), "s2"),
        _record(3, (3.0, 0.0), "s3"),
        _record(4, (4.0, 0.0), "s4"),
    ]
    index = build_index(Granularity.VISUAL, records)
    bundle = QueryBundle((_vec(0.2, 0.0),), (), _vec(0.0, 0.0))
    visual, _, _ = retrieve(
        bundle, index, _empty_index(Granularity.TEXTUAL), _empty_index(Granularity.EVENT),
        RetrievalConfig(k=2), self_id="query-item",
    )
    assert [h.record_id for h in visual] == ["r0", "r1"]
    assert visual[0].distance <= visual[1].distance
    assert len({h.source_news_id for h in visual}) == 2


def test_two_queries_sharing_a_source_merge():
    # Both queries are nearest to records from source "shared"; the merged
    # list keeps that source once (at its smaller distance) plus the next
    # distinct source, exactly like the brute-force merge oracle.
    records = [
        _record(0, (0.0, 0.0), "shared"),
        _record(1, (10.0, 0.0), "shared"),
        _record(2, (0.6, 0.0), "other"),
        _record(3, (50.0, 0.0), "far"),
    ]
    index = build_index(Granularity.VISUAL, records)
    queries = (_vec(0.1, 0.0), _vec(9.8, 0.0))
    bundle = QueryBundle(queries, (), _vec(0.0, 0.0))
    visual, _, _ = retrieve(
        bundle, index, _empty_index(Granularity.TEXTUAL), _empty_index(Granularity.EVENT),
        RetrievalConfig(k=2), self_id="q",
    )
    assert [h.record_id for h in visual] == oracle_merge(index, queries, 2, "q")
    sources = [h.source_news_id for h in visual]
    assert sources == ["shared", "other"]
    # "shared" appears at the min distance over both its records and queries.
    assert visual[0].distance == pytest.approx(0.1, rel=1e-9)


def test_random_merge_matches_oracle():
    rng = random.Random(77)
    records = [
        _record(i, [rng.uniform(-1, 1) for _ in range(8)], f"s{i % 7}") for i in range(40)
    ]
    index = build_index(Granularity.TEXTUAL, records)
    for trial in range(20):
        queries = tuple(
            EmbeddingVector(tuple(rng.uniform(-1, 1) for _ in range(8)))
            for _ in range(rng.randint(1, 4))
        )
        bundle = QueryBundle((), queries, _vec(*([0.0] * 8)))
        _, textual, _ = retrieve(
            bundle, _empty_index(Granularity.VISUAL, 8), index, _empty_index(Granularity.EVENT, 8),
            RetrievalConfig(k=2), self_id="s0",
        )
        assert [h.record_id for h in textual] == oracle_merge(index, queries, 2, "s0")


def test_exclude_self():
    records = [_record(0, (0.0, 0.0), "me"), _record(1, (5.0, 0.0), "other")]
    index = build_index(Granularity.EVENT, records)
    bundle = QueryBundle((), (), _vec(0.0, 0.0))
    _, _, event = retrieve(
        bundle, _empty_index(Granularity.VISUAL), _empty_index(Granularity.TEXTUAL), index,
        RetrievalConfig(k=2, exclude_self=True), self_id="me",
    )
    assert [h.source_news_id for h in event] == ["other"]

    _, _, event = retrieve(
        bundle, _empty_index(Granularity.VISUAL), _empty_index(Granularity.TEXTUAL), index,
        RetrievalConfig(k=2, exclude_self=False), self_id="me",
    )
    assert [h.source_news_id for h in event] == ["me", "other"]


def test_lists_bounded_by_k():
    rng = random.Random(3)
    records = [_record(i, [rng.uniform(-1, 1)], f"s{i}") for i in range(10)]
    index = build_index(Granularity.EVENT, records)
    bundle = QueryBundle((), (), _vec(0.0))
    _, _, event = retrieve(
        bundle, _empty_index(Granularity.VISUAL, 1), _empty_index(Granularity.TEXTUAL, 1), index,
        RetrievalConfig(k=2), self_id="q",
    )
    assert len(event) <= 2


def test_aggregate_sizes():
    hit = Hit("r0", "s0", "p", 0.5)
    full = aggregate((hit, hit), (hit, hit), (hit, hit))
    assert full.total_hits() == 6
    assert not full.verified
    assert aggregate((), (), ()).total_hits() == 0
    event_only = aggregate((), (), (hit,))
    assert event_only.event_hits == (hit,)
    assert event_only.visual_hits == ()


def test_verify_dedups_event_hit():
    hit = Hit("r0", "s0", "payload", 0.5)
    out = verify(EvidenceSet(event_hits=(hit, hit)))
    assert out.event_hits == (hit,)
    assert out.verified


def test_verify_idempotent():
    hits = (
        Hit("a", "s0", "pa", 0.9),
        Hit("b", "s1", "pb", 0.1),
        Hit("a", "s0", "pa", 0.9),
        Hit("c", "s2", "", 0.2),
    )
    once = verify(EvidenceSet(visual_hits=hits, event_hits=(Hit("e", "s9", "pe", 0.3),)))
    assert verify(once) == once


def test_verify_drops_empty_payload_and_sorts():
    hits = (Hit("a", "s0", "pa", 0.9), Hit("b", "s1", "", 0.1), Hit("c", "s2", "pc", 0.2))
    out = verify(EvidenceSet(textual_hits=hits))
    assert [h.record_id for h in out.textual_hits] == ["c", "a"]


def test_verify_never_grows():
    hits = tuple(Hit(f"h{i}", f"s{i}", f"p{i}", float(i)) for i in range(5))
    evidence = EvidenceSet(visual_hits=hits, textual_hits=hits, event_hits=hits)
    out = verify(evidence)
    assert out.total_hits() <= evidence.total_hits()


_hit_st = st.builds(
    Hit,
    record_id=st.sampled_from(["a", "b", "c", "d", "e"]),
    source_news_id=st.sampled_from(["s1", "s2", "s3"]),
    payload=st.sampled_from(["", "px", "py", "pz"]),
    distance=st.floats(min_value=0.0, max_value=10.0),
)
_hits_st = st.lists(_hit_st, max_size=8).map(tuple)


@given(_hits_st, _hits_st, _hits_st)
def test_verify_properties(visual, textual, event):
    evidence = EvidenceSet(visual_hits=visual, textual_hits=textual, event_hits=event)
    once = verify(evidence)
    assert verify(once) == once  # idempotent
    assert once.total_hits() <= evidence.total_hits()  # never grows
    for _, hits in once.lists():
        assert all(h.payload for h in hits)
        assert all(a.distance <= b.distance for a, b in zip(hits, hits[1:]))
        ids = [h.record_id for h in hits]
        assert len(ids) == len(set(ids))


def _bundle_digest(bundle: QueryBundle) -> str:
    canonical = json.dumps(
        {
            "visual": [[repr(v) for v in q.values] for q in bundle.visual_queries],
            "textual": [[repr(v) for v in q.values] for q in bundle.textual_queries],
            "event": [repr(v) for v in bundle.event_query.values],
        },
        sort_keys=True,
    )
    return hashlib.sha256(canonical.encode()).hexdigest()


def test_build_queries_counts(mock_settings):
    item = make_item(
        "q1",
        "Firefighters douse flames near Capitol Square during the protest",
        visual_classes=("Capitol Square",),
    )
    bundle = build_queries(
        item, mock_settings.extractor, mock_settings.aligner,
        mock_settings.visual_profile, mock_settings.textual_profile,
    )
    assert len(bundle.visual_queries) == 1
    assert len(bundle.textual_queries) == 1
    assert bundle.event_query.dim == 64


def test_build_queries_gate_all_fail(mock_settings):
    item = make_item(
        "q2",
        "Firefighters douse flames near Capitol Square during the protest",
        visual_classes=("unrelated thing",),
    )
    bundle = build_queries(
        item, mock_settings.extractor, mock_settings.aligner,
        mock_settings.visual_profile, mock_settings.textual_profile,
    )
    assert bundle.visual_queries == ()
    assert bundle.textual_queries == ()
    assert bundle.event_query.dim == 64


def test_build_queries_two_aligned_entities(mock_settings):
    item = make_item(
        "q3",
        "Crowds fill Union Station before the Winter Parade begins",
        visual_classes=("Union Station", "Winter Parade"),
    )
    bundle = build_queries(
        item, mock_settings.extractor, mock_settings.aligner,
        mock_settings.visual_profile, mock_settings.textual_profile,
    )
    assert len(bundle.visual_queries) == 2
    assert len(bundle.textual_queries) == 2


def test_build_queries_byte_stable(mock_settings):
    item = make_item(
        "q1",
        "Firefighters douse flames near Capitol Square during the protest",
        visual_classes=("Capitol Square",),
    )
    args = (
        item, mock_settings.extractor, mock_settings.aligner,
        mock_settings.visual_profile, mock_settings.textual_profile,
    )
    first = _bundle_digest(build_queries(*args))
    second = _bundle_digest(build_queries(*args))
    assert first == second
    # Frozen golden digest: fails if the expansion ever changes shape.
    assert first == GOLDEN_BUNDLE_DIGEST


GOLDEN_BUNDLE_DIGEST = "c85d5f45db5dccd371fffe8c48b594b0e3a5f60def0756557f983ef1dc785055"
