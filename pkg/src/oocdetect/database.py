"""Build the multi-granularity evidence database from a corpus.

Each item contributes one event record (its caption) plus one visual
and one textual record per entity pair that survives the alignment
gate. Items without usable entities still contribute their event
vector, so event-level retrieval covers the whole corpus.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .agents import EngineSettings, IndexBundle
from .corpus import NewsItem
from .embedding import encode_entity, encode_event
from .retrieval import gated_entities
from .vector_index import Granularity, IndexRecord, build_index, load_index, save_index

INDEX_FILENAMES = {
    Granularity.VISUAL: "visual.idx",
    Granularity.TEXTUAL: "textual.idx",
    Granularity.EVENT: "event.idx",
}


@dataclass(frozen=True)
class BuildReport:
    items: int
    visual_records: int
    textual_records: int
    event_records: int

    @property
    def entity_records(self) -> int:
        return self.visual_records + self.textual_records

    def to_record(self) -> dict[str, int]:
        return {
            "items": self.items,
            "visual_records": self.visual_records,
            "textual_records": self.textual_records,
            "entity_records": self.entity_records,
            "event_records": self.event_records,
        }


def build_database(items: Iterable[NewsItem], settings: EngineSettings) -> tuple[IndexBundle, BuildReport]:
    visual_records: list[IndexRecord] = []
    textual_records: list[IndexRecord] = []
    event_records: list[IndexRecord] = []
    count = 0
    for item in items:
        count += 1
        for i, entity in enumerate(gated_entities(item, settings.extractor, settings.aligner)):
            z_v, z_t = encode_entity(entity, settings.visual_profile, settings.textual_profile)
            visual_records.append(
                IndexRecord(
                    record_id=f"{item.id}#v{i}",
                    vector=z_v,
                    source_news_id=item.id,
                    payload=entity.pair.visual.class_label,
                )
            )
            textual_records.append(
                IndexRecord(
                    record_id=f"{item.id}#t{i}",
                    vector=z_t,
                    source_news_id=item.id,
                    payload=entity.pair.textual.surface,
                )
            )
        event_records.append(
            IndexRecord(
                record_id=f"{item.id}#e",
                vector=encode_event(item.caption, settings.textual_profile),
                source_news_id=item.id,
                payload=item.caption,
            )
        )
    bundle = IndexBundle(
        visual=build_index(Granularity.VISUAL, visual_records, dim=settings.visual_profile.dim),
        textual=build_index(Granularity.TEXTUAL, textual_records, dim=settings.textual_profile.dim),
        event=build_index(Granularity.EVENT, event_records, dim=settings.textual_profile.dim),
    )
    report = BuildReport(
        items=count,
        visual_records=len(visual_records),
        textual_records=len(textual_records),
        event_records=len(event_records),
    )
    return bundle, report


def save_bundle(bundle: IndexBundle, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_index(bundle.visual, directory / INDEX_FILENAMES[Granularity.VISUAL])
    save_index(bundle.textual, directory / INDEX_FILENAMES[Granularity.TEXTUAL])
    save_index(bundle.event, directory / INDEX_FILENAMES[Granularity.EVENT])


def load_bundle(directory: str | Path) -> IndexBundle:
    directory = Path(directory)
    return IndexBundle(
        visual=load_index(directory / INDEX_FILENAMES[Granularity.VISUAL]),
        textual=load_index(directory / INDEX_FILENAMES[Granularity.TEXTUAL]),
        event=load_index(directory / INDEX_FILENAMES[Granularity.EVENT]),
    )
