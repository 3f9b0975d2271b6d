"""Flat exact-scan vector store with Euclidean k-nearest-neighbor search.

One index holds one granularity (visual / textual / event). Indices are
immutable after build, so concurrent queries need no locking.

Vectors are held at 32-bit float precision, matching the on-disk
format, which makes the save/load round trip bitwise exact; distances
are computed and returned as 64-bit floats. Ties are broken by
insertion order (earlier record wins).

File format, little-endian:
  magic "EXGIDX1\\0" (8 bytes), u8 granularity {0, 1, 2}, u32 dim,
  u64 count, then per record: u16 id length + UTF-8 id, u16 source id
  length + UTF-8, u32 payload length + UTF-8 payload, dim x f32 values.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .embedding import EmbeddingVector
from .errors import CorruptIndex, DimMismatch

MAGIC = b"EXGIDX1\x00"


class Granularity(enum.IntEnum):
    VISUAL = 0
    TEXTUAL = 1
    EVENT = 2

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class IndexRecord:
    record_id: str
    vector: EmbeddingVector
    source_news_id: str
    payload: str  # entity surface/class or event caption


@dataclass(frozen=True)
class Hit:
    record_id: str
    source_news_id: str
    payload: str
    distance: float

    def __post_init__(self) -> None:
        if self.distance < 0:
            raise ValueError("distance must be nonnegative")


def _quantize(vector: EmbeddingVector) -> EmbeddingVector:
    return EmbeddingVector(tuple(float(v) for v in np.asarray(vector.values, dtype=np.float32)))


class VectorIndex:
    """Immutable store of dim-consistent records for one granularity."""

    def __init__(self, granularity: Granularity, dim: int, records: Sequence[IndexRecord]):
        self.granularity = granularity
        self.dim = dim
        self.records: tuple[IndexRecord, ...] = tuple(records)
        if self.records:
            self._matrix = np.array(
                [r.vector.values for r in self.records], dtype=np.float32
            ).astype(np.float64)
        else:
            self._matrix = np.empty((0, dim), dtype=np.float64)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[IndexRecord]:
        return iter(self.records)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VectorIndex):
            return NotImplemented
        return (
            self.granularity == other.granularity
            and self.dim == other.dim
            and self.records == other.records
        )


def build_index(granularity: Granularity, records: Sequence[IndexRecord], dim: int | None = None) -> VectorIndex:
    """Build an index, quantizing vectors to the stored f32 precision.

    ``dim`` may be given explicitly for empty indices; otherwise it is
    taken from the first record. Mixed dims raise DimMismatch.
    """
    if not records:
        return VectorIndex(granularity, dim if dim is not None else 0, ())
    expected = dim if dim is not None else records[0].vector.dim
    stored: list[IndexRecord] = []
    for record in records:
        if record.vector.dim != expected:
            raise DimMismatch(
                f"record {record.record_id!r} has dim {record.vector.dim}, index dim {expected}"
            )
        stored.append(
            IndexRecord(
                record_id=record.record_id,
                vector=_quantize(record.vector),
                source_news_id=record.source_news_id,
                payload=record.payload,
            )
        )
    return VectorIndex(granularity, expected, stored)


def knn(index: VectorIndex, query: EmbeddingVector, k: int) -> list[Hit]:
    """Exact k-nearest records by Euclidean distance, ascending.

    Returns min(k, len(index)) hits; ties resolve to the earlier record.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if len(index) == 0:
        return []
    if query.dim != index.dim:
        raise DimMismatch(f"query dim {query.dim} != index dim {index.dim}")
    distances = np.linalg.norm(index._matrix - np.asarray(query.values, dtype=np.float64), axis=1)
    order = np.argsort(distances, kind="stable")[: min(k, len(index))]
    return [
        Hit(
            record_id=index.records[i].record_id,
            source_news_id=index.records[i].source_news_id,
            payload=index.records[i].payload,
            distance=float(distances[i]),
        )
        for i in order
    ]


def distances_to_all(index: VectorIndex, query: EmbeddingVector) -> np.ndarray:
    """Euclidean distance from the query to every record, in insertion order."""
    if query.dim != index.dim:
        raise DimMismatch(f"query dim {query.dim} != index dim {index.dim}")
    return np.linalg.norm(index._matrix - np.asarray(query.values, dtype=np.float64), axis=1)


def save_index(index: VectorIndex, path: str | Path) -> int:
    """Write the index to its binary format; returns bytes written."""
    chunks: list[bytes] = [MAGIC, struct.pack("<BIQ", int(index.granularity), index.dim, len(index))]
    for record in index.records:
        rid = record.record_id.encode("utf-8")
        src = record.source_news_id.encode("utf-8")
        payload = record.payload.encode("utf-8")
        chunks.append(struct.pack("<H", len(rid)))
        chunks.append(rid)
        chunks.append(struct.pack("<H", len(src)))
        chunks.append(src)
        chunks.append(struct.pack("<I", len(payload)))
        chunks.append(payload)
        chunks.append(np.asarray(record.vector.values, dtype="<f4").tobytes())
    blob = b"".join(chunks)
    Path(path).write_bytes(blob)
    return len(blob)


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise CorruptIndex(f"truncated index file at byte {self.pos}")
        out = self.blob[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_index(path: str | Path) -> VectorIndex:
    """Read an index file; raises CorruptIndex on bad magic or truncation."""
    blob = Path(path).read_bytes()
    reader = _Reader(blob)
    if reader.take(len(MAGIC)) != MAGIC:
        raise CorruptIndex("bad magic")
    granularity_raw, dim, count = reader.unpack("<BIQ")
    try:
        granularity = Granularity(granularity_raw)
    except ValueError:
        raise CorruptIndex(f"unknown granularity byte {granularity_raw}") from None
    records: list[IndexRecord] = []
    for _ in range(count):
        (id_len,) = reader.unpack("<H")
        record_id = reader.take(id_len).decode("utf-8")
        (src_len,) = reader.unpack("<H")
        source = reader.take(src_len).decode("utf-8")
        (payload_len,) = reader.unpack("<I")
        payload = reader.take(payload_len).decode("utf-8")
        raw = reader.take(4 * dim)
        values = tuple(float(v) for v in np.frombuffer(raw, dtype="<f4"))
        records.append(
            IndexRecord(
                record_id=record_id,
                vector=EmbeddingVector(values),
                source_news_id=source,
                payload=payload,
            )
        )
    if reader.pos != len(blob):
        raise CorruptIndex(f"{len(blob) - reader.pos} trailing bytes")
    return VectorIndex(granularity, dim, records)
