"""Exception types shared across the package.

Every error carries enough context to be reported on one line; the CLI
maps them to nonzero exit codes and the service maps them to 4xx/5xx.
"""

from __future__ import annotations


class OocdetectError(Exception):
    """Base class for all package-specific errors."""


class MalformedRecord(OocdetectError):
    """A corpus line violates the record schema."""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class DuplicateId(OocdetectError):
    """Two corpus records share the same id."""

    def __init__(self, item_id: str):
        self.item_id = item_id
        super().__init__(f"duplicate item id {item_id!r}")


class ProviderUnavailable(OocdetectError):
    """A remote provider could not be reached or answered garbage."""


class ImageUnreadable(OocdetectError):
    """Image bytes could not be resolved for a news item."""


class MalformedScore(OocdetectError):
    """A remote alignment scorer returned a value outside [0, 1]."""


class DimMismatch(OocdetectError):
    """Vector dimensionality disagrees with the index or profile."""


class CorruptIndex(OocdetectError):
    """An index file failed to parse (bad magic, truncation, ...)."""

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


class ProviderExhausted(OocdetectError):
    """All retry attempts against a remote LLM provider failed."""


class ScriptMissing(OocdetectError):
    """A scripted mock has no entry for the requested (stage, sample)."""

    def __init__(self, key: str):
        self.key = key
        super().__init__(f"no scripted response for {key!r}")


class UnverifiedEvidence(OocdetectError):
    """An evidence set was handed to the agents before verification."""


class UnparseableVerdict(OocdetectError):
    """The analyst response lacked a verdict line even after repair."""


class EmptyInput(OocdetectError):
    """An aggregation was asked to summarize zero records."""


class MissingCategory(OocdetectError):
    """An error-distribution input record lacks a mismatch category."""

    def __init__(self, item_id: str):
        self.item_id = item_id
        super().__init__(f"prediction {item_id!r} has no category")


class NotAPermutation(OocdetectError):
    """A rank row is not a strict permutation of 1..M."""

    def __init__(self, judge: str, sample: str):
        self.judge = judge
        self.sample = sample
        super().__init__(f"ranks for judge={judge!r} sample={sample!r} are not a permutation")
