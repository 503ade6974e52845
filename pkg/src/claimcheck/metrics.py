"""Evaluation metrics: balanced accuracy, F1, ranking accuracy, span
overlap, Fleiss' kappa, and timing summaries."""

from __future__ import annotations

import json
import statistics
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Hashable, Sequence

from .corpus import CharSpan, OutOfRangeError, tokenize


class DegenerateError(ValueError):
    """The statistic is undefined for this input."""


@dataclass(frozen=True)
class RankingItem:
    article_sentence: str
    claim_positive: str
    claim_negative: str

    def __post_init__(self) -> None:
        if not (self.article_sentence and self.claim_positive and self.claim_negative):
            raise ValueError("empty ranking item field")
        if self.claim_positive == self.claim_negative:
            raise ValueError("positive and negative claims must differ")


@dataclass
class ScoreReport:
    balanced_accuracy: float | None = None
    f1: float | None = None
    ranking_accuracy: float | None = None
    span_containment_accuracy: float | None = None
    span_token_f1: float | None = None
    class_counts: dict[str, int] | None = None
    unmatched_ids: int = 0


@dataclass
class AgreementReport:
    fleiss_kappa: float
    raters_per_item: int
    item_count: int
    dropped_items: int
    mean_seconds_per_item: float
    condition: str | None = None


def balanced_accuracy(predictions: Sequence[Hashable],
                      golds: Sequence[Hashable]) -> float:
    """Mean of per-class recalls over the classes present in golds."""
    if len(predictions) != len(golds):
        raise ValueError("length mismatch")
    classes = sorted(set(golds), key=repr)
    if len(classes) < 2:
        raise ValueError("golds must contain at least two classes")
    recalls = []
    for cls in classes:
        total = sum(1 for g in golds if g == cls)
        hits = sum(1 for p, g in zip(predictions, golds) if g == cls and p == cls)
        recalls.append(hits / total)
    return sum(recalls) / len(recalls)


def binary_f1(predictions: Sequence[Hashable], golds: Sequence[Hashable],
              positive_class: Hashable) -> float:
    """F1 with the configured positive class; 0 when precision and
    recall are both undefined or zero."""
    if len(predictions) != len(golds):
        raise ValueError("length mismatch")
    tp = sum(1 for p, g in zip(predictions, golds)
             if p == positive_class and g == positive_class)
    fp = sum(1 for p, g in zip(predictions, golds)
             if p == positive_class and g != positive_class)
    fn = sum(1 for p, g in zip(predictions, golds)
             if p != positive_class and g == positive_class)
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)


def ranking_accuracy(scorer: Callable[[str, str], float],
                     items: Sequence[RankingItem]) -> float:
    """Fraction of items where the positive claim outscores the
    negative one; exact ties credit 0.5."""
    if not items:
        raise ValueError("no ranking items")
    credit = 0.0
    for item in items:
        pos = scorer(item.article_sentence, item.claim_positive)
        neg = scorer(item.article_sentence, item.claim_negative)
        if pos > neg:
            credit += 1.0
        elif pos == neg:
            credit += 0.5
    return credit / len(items)


def _check_span(span: CharSpan, text: str) -> None:
    if span.end > len(text):
        raise OutOfRangeError(f"span {span} outside text of length {len(text)}")


def span_containment_accuracy(pairs: Sequence[tuple[CharSpan, CharSpan]],
                              texts: Sequence[str] | None = None) -> float:
    """Fraction of (model, human) span pairs where the model span is
    fully contained (char level) in the human span."""
    if not pairs:
        raise ValueError("no span pairs")
    if texts is not None:
        for (model, human), text in zip(pairs, texts):
            _check_span(model, text)
            _check_span(human, text)
    hits = sum(1 for model, human in pairs if human.contains(model))
    return hits / len(pairs)


def _token_indices(span: CharSpan, text: str) -> set[int]:
    return {i for i, tok in enumerate(tokenize(text))
            if tok.span.overlaps(span)}


def span_token_f1(model_span: CharSpan, human_span: CharSpan, text: str) -> float:
    """F1 over the token index sets covered by each span; the human
    span is ground truth."""
    _check_span(model_span, text)
    _check_span(human_span, text)
    model_tokens = _token_indices(model_span, text)
    human_tokens = _token_indices(human_span, text)
    tp = len(model_tokens & human_tokens)
    if tp == 0:
        return 0.0
    precision = tp / len(model_tokens)
    recall = tp / len(human_tokens)
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class FleissResult:
    kappa: float
    raters_per_item: int
    used_items: int
    dropped_items: int


def fleiss_kappa_detailed(items: Sequence[Sequence[Hashable]],
                          n_raters: int | None = None) -> FleissResult:
    """Fleiss' kappa over per-item label lists.

    Every usable item must carry exactly n_raters judgments (inferred
    as the most common count >= 2 when not given); other items are
    dropped and counted.
    """
    if n_raters is None:
        counts = Counter(len(it) for it in items if len(it) >= 2)
        if not counts:
            raise DegenerateError("no items with >= 2 judgments")
        n_raters = max(counts, key=lambda c: (counts[c], c))
    if n_raters < 2:
        raise ValueError("n_raters must be >= 2")
    usable = [it for it in items if len(it) == n_raters]
    dropped = len(items) - len(usable)
    if not usable:
        raise DegenerateError("zero usable items")
    categories = sorted({label for it in usable for label in it}, key=repr)
    n = n_raters
    big_n = len(usable)
    table = [[sum(1 for label in it if label == cat) for cat in categories]
             for it in usable]
    p_bar = sum((sum(c * c for c in row) - n) / (n * (n - 1)) for row in table) / big_n
    proportions = [sum(row[j] for row in table) / (big_n * n)
                   for j in range(len(categories))]
    p_e = sum(p * p for p in proportions)
    if 1 - p_e == 0:
        if p_bar == p_e:
            kappa = 1.0
        else:
            raise DegenerateError("expected agreement is 1 but observed differs")
    else:
        kappa = (p_bar - p_e) / (1 - p_e)
    return FleissResult(kappa=kappa, raters_per_item=n, used_items=big_n,
                        dropped_items=dropped)


def fleiss_kappa(items: Sequence[Sequence[Hashable]],
                 n_raters: int | None = None) -> float:
    return fleiss_kappa_detailed(items, n_raters).kappa


@dataclass(frozen=True)
class ConditionTiming:
    mean_seconds: float
    median_seconds: float
    count: int


@dataclass(frozen=True)
class TimingSummary:
    per_condition: dict[str, ConditionTiming]
    speed_ratio: float | None  # mean(ON) / mean(OFF) when both present


def timing_summary(records: Sequence[tuple[str, int]]) -> TimingSummary:
    """Aggregate (condition, elapsed_ms) records into per-condition
    mean/median seconds plus the ON/OFF speed ratio."""
    by_condition: dict[str, list[float]] = {}
    for condition, elapsed_ms in records:
        by_condition.setdefault(condition, []).append(elapsed_ms / 1000.0)
    per_condition = {
        cond: ConditionTiming(mean_seconds=statistics.fmean(vals),
                              median_seconds=statistics.median(vals),
                              count=len(vals))
        for cond, vals in by_condition.items()
    }
    ratio = None
    on = per_condition.get("HIGHLIGHTS_ON")
    off = per_condition.get("HIGHLIGHTS_OFF")
    if on and off and off.mean_seconds > 0:
        ratio = on.mean_seconds / off.mean_seconds
    return TimingSummary(per_condition=per_condition, speed_ratio=ratio)


def read_ranking_pairs(path: str) -> list[RankingItem]:
    """Read a JSONL file of {"article_sent", "claim_pos", "claim_neg"}."""
    items = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                items.append(RankingItem(obj["article_sent"], obj["claim_pos"],
                                         obj["claim_neg"]))
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed ranking pair: {exc}") from exc
    return items
