"""Metric machinery: split accuracies, error breakdowns, ablation sweeps
and rank aggregation for the explanation study.

Percentages are rounded half-up for display (one decimal for
accuracies, two for error rates) while the raw ratios stay available
for assertions. Mean ranks are computed exactly as Fractions so the
per-table invariant (method means summing to M(M+1)/2) holds with no
floating error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .agents import PipelineConfig
from .corpus import Category, Label, NewsItem
from .errors import EmptyInput, MissingCategory, NotAPermutation

CATEGORY_DISPLAY = {
    Category.TEXT_IMAGE: "Text-Image",
    Category.TEXT_TEXT: "Text-Text",
    Category.PERSON: "Person-Matching",
    Category.SCENE: "Scene-Matching",
}


def round_half_up(value: float, ndigits: int) -> float:
    quantum = Decimal(1).scaleb(-ndigits)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class PredictionRecord:
    item_id: str
    truth: Label
    c_ooc: int
    category: Category | None = None
    config_used: PipelineConfig | None = None

    def __post_init__(self) -> None:
        if self.c_ooc not in (0, 1):
            raise ValueError("c_ooc must be 0 or 1")

    @property
    def correct(self) -> bool:
        # A falsified item is correctly detected by c_ooc = 1.
        return (self.truth is Label.FALSIFIED) == (self.c_ooc == 1)


@dataclass(frozen=True)
class EvalReport:
    total: int
    n_falsified: int
    n_pristine: int
    falsified_correct: int
    pristine_correct: int

    @property
    def correct(self) -> int:
        return self.falsified_correct + self.pristine_correct

    @property
    def acc_all(self) -> float:
        return 100.0 * self.correct / self.total

    @property
    def acc_falsified(self) -> float | None:
        if self.n_falsified == 0:
            return None
        return 100.0 * self.falsified_correct / self.n_falsified

    @property
    def acc_pristine(self) -> float | None:
        if self.n_pristine == 0:
            return None
        return 100.0 * self.pristine_correct / self.n_pristine

    def confusion(self) -> dict[str, int]:
        """2x2 cell counts keyed truth_prediction."""
        return {
            "falsified_ooc": self.falsified_correct,
            "falsified_pristine": self.n_falsified - self.falsified_correct,
            "pristine_pristine": self.pristine_correct,
            "pristine_ooc": self.n_pristine - self.pristine_correct,
        }

    def rounded(self) -> dict[str, float | None]:
        """Accuracies at the one-decimal display precision."""
        return {
            "all": round_half_up(self.acc_all, 1),
            "falsified": None if self.acc_falsified is None else round_half_up(self.acc_falsified, 1),
            "pristine": None if self.acc_pristine is None else round_half_up(self.acc_pristine, 1),
        }

    def to_record(self) -> dict[str, object]:
        return {
            "total": self.total,
            "correct": self.correct,
            "accuracy": self.rounded(),
            "raw_accuracy": {
                "all": self.acc_all,
                "falsified": self.acc_falsified,
                "pristine": self.acc_pristine,
            },
            "confusion": self.confusion(),
        }


def accuracy_report(preds: Sequence[PredictionRecord]) -> EvalReport:
    """Whole-split and per-class accuracy. Empty classes report as absent."""
    if not preds:
        raise EmptyInput("no predictions to score")
    n_falsified = sum(1 for p in preds if p.truth is Label.FALSIFIED)
    n_pristine = len(preds) - n_falsified
    falsified_correct = sum(1 for p in preds if p.truth is Label.FALSIFIED and p.correct)
    pristine_correct = sum(1 for p in preds if p.truth is Label.PRISTINE and p.correct)
    return EvalReport(
        total=len(preds),
        n_falsified=n_falsified,
        n_pristine=n_pristine,
        falsified_correct=falsified_correct,
        pristine_correct=pristine_correct,
    )


@dataclass(frozen=True)
class ErrorDistribution:
    total_errors: int
    counts: tuple[tuple[Category, int], ...]  # categories with at least one error

    def rates(self) -> dict[Category, float]:
        """Share of total errors per category, two decimals, half-up."""
        if self.total_errors == 0:
            return {}
        return {
            category: round_half_up(100.0 * count / self.total_errors, 2)
            for category, count in self.counts
        }

    def to_record(self) -> dict[str, object]:
        return {
            "total_errors": self.total_errors,
            "categories": [
                {
                    "category": category.value,
                    "display": CATEGORY_DISPLAY[category],
                    "count": count,
                    "rate": rate,
                }
                for (category, count), rate in zip(self.counts, self.rates().values())
            ],
        }


def error_distribution(preds: Sequence[PredictionRecord]) -> ErrorDistribution:
    """Count wrong predictions per mismatch category, largest share first."""
    errors = [p for p in preds if not p.correct]
    counts: dict[Category, int] = {}
    for pred in errors:
        if pred.category is None:
            raise MissingCategory(pred.item_id)
        counts[pred.category] = counts.get(pred.category, 0) + 1
    ordered = sorted(counts.items(), key=lambda pair: (-pair[1], pair[0].value))
    return ErrorDistribution(total_errors=len(errors), counts=tuple(ordered))


@dataclass
class RankMatrix:
    """Strict 1..M rankings: one row per (judge, sample) over all methods."""

    methods: tuple[str, ...]
    rows: dict[tuple[str, str], dict[str, int]] = field(default_factory=dict)

    def add(self, judge: str, sample: str, ranks: Mapping[str, int]) -> None:
        self.rows[(judge, sample)] = dict(ranks)

    def validate_row(self, judge: str, sample: str) -> None:
        ranks = self.rows[(judge, sample)]
        if set(ranks) != set(self.methods):
            raise NotAPermutation(judge, sample)
        if sorted(ranks.values()) != list(range(1, len(self.methods) + 1)):
            raise NotAPermutation(judge, sample)


def is_permutation(ranks: Mapping[str, int], methods: Sequence[str]) -> bool:
    return set(ranks) == set(methods) and sorted(ranks.values()) == list(
        range(1, len(methods) + 1)
    )


def average_ranks(matrix: RankMatrix) -> dict[str, Fraction]:
    """Mean rank per method over every (judge, sample) row, computed exactly.

    The means always sum to M(M+1)/2 because each row is a permutation.
    """
    if not matrix.rows:
        raise EmptyInput("rank matrix has no rows")
    totals = {method: 0 for method in matrix.methods}
    for judge, sample in matrix.rows:
        matrix.validate_row(judge, sample)
        for method, rank in matrix.rows[(judge, sample)].items():
            totals[method] += rank
    n = len(matrix.rows)
    return {method: Fraction(total, n) for method, total in totals.items()}


def ablation_sweep(
    items: Iterable[NewsItem],
    configs: Sequence[PipelineConfig],
    runner: Callable[[NewsItem, PipelineConfig], int],
) -> list[tuple[PipelineConfig, EvalReport]]:
    """Score every config over the same items; one report per config.

    ``runner`` maps (item, config) to the predicted c_ooc; items must be
    labeled.
    """
    item_list = list(items)
    results: list[tuple[PipelineConfig, EvalReport]] = []
    for config in configs:
        preds = [
            PredictionRecord(
                item_id=item.id,
                truth=item.label,
                c_ooc=runner(item, config),
                category=item.category,
                config_used=config,
            )
            for item in item_list
            if item.label is not None
        ]
        results.append((config, accuracy_report(preds)))
    return results
