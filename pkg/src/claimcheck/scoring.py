"""Consistency scorers: token-overlap baseline, a trainable featurized
logistic baseline, and the external-prediction adapter.

A scorer maps (document_text, claim_text) to a probability of
CONSISTENT in [0, 1]. The trainable baseline is a desk-scale stand-in
for large fine-tuned models; real model outputs are consumed through
load_external_predictions.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import annotate
from .corpus import CharSpan, Document

FEATURE_NAMES = ("coverage", "entity_match", "number_match",
                 "negation_parity", "pronoun_presence", "length_ratio")


@dataclass(frozen=True)
class FeatureVector:
    coverage: float
    entity_match: float
    number_match: float
    negation_parity: float
    pronoun_presence: float
    length_ratio: float

    def __post_init__(self) -> None:
        values = self.as_array()
        if not np.all(np.isfinite(values)):
            raise ValueError("non-finite feature value")
        for name in ("coverage", "entity_match", "number_match"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in FEATURE_NAMES], dtype=np.float64)


def _claim_token_set(text: str) -> set[str]:
    from .corpus import tokenize
    return {t.surface.lower() for t in tokenize(text)}


def _best_sentence(document: Document, claim_tokens: set[str]) -> tuple[float, int]:
    """Best shared-token fraction of the claim over document sentences,
    with the index of the best sentence."""
    if not claim_tokens:
        return 0.0, 0
    best, best_idx = 0.0, 0
    for idx, sent in enumerate(document.sentences):
        sent_tokens = {t.surface.lower() for t in sent.tokens}
        frac = len(claim_tokens & sent_tokens) / len(claim_tokens)
        if frac > best:
            best, best_idx = frac, idx
    return best, best_idx


def overlap_score(document_text: str, claim_text: str) -> float:
    """Max over document sentences of the shared lowercased token
    fraction of the claim."""
    if not claim_text.strip():
        raise ValueError("empty claim")
    document = Document.from_text("_", document_text)
    score, _ = _best_sentence(document, _claim_token_set(claim_text))
    return score


def _negation_count(tokens) -> int:
    return sum(1 for t in tokens if t.surface.lower() in ("not", "n't", "never"))


def featurize(document: Document, claim_text: str,
              document_entities: Sequence[annotate.EntityMention] | None = None) -> FeatureVector:
    """Fixed-order real features for a (document, claim) pair.

    Pass precomputed document entities when featurizing many claims
    against the same document.
    """
    from .corpus import tokenize
    claim_tokens = tokenize(claim_text)
    claim_token_set = {t.surface.lower() for t in claim_tokens}
    coverage, best_idx = _best_sentence(document, claim_token_set)

    if document_entities is None:
        document_entities = annotate.tag_entities(document)
    doc_surfaces = {m.surface.lower(): m.group for m in document_entities}
    claim_doc = Document.from_text("_claim", claim_text)
    claim_entities = annotate.tag_entities(claim_doc)

    def match_rate(group: annotate.EntityGroup) -> float:
        mentions = [m for m in claim_entities if m.group == group]
        if not mentions:
            return 1.0
        hits = sum(1 for m in mentions if m.surface.lower() in doc_surfaces)
        return hits / len(mentions)

    claim_neg = _negation_count(claim_tokens)
    if document.sentences:
        sent_neg = _negation_count(document.sentences[best_idx].tokens)
        sent_len = len(document.sentences[best_idx].tokens)
    else:
        sent_neg, sent_len = 0, 0
    parity = 1.0 if (claim_neg % 2) != (sent_neg % 2) else 0.0
    pronouns = annotate.find_pronouns(claim_tokens)
    ratio = len(claim_tokens) / sent_len if sent_len else 0.0
    return FeatureVector(
        coverage=coverage,
        entity_match=match_rate(annotate.EntityGroup.NAMED),
        number_match=match_rate(annotate.EntityGroup.NUMBER),
        negation_parity=parity,
        pronoun_presence=1.0 if pronouns else 0.0,
        length_ratio=min(ratio, 4.0),
    )


@dataclass
class BaselineModel:
    weights: list[float]
    bias: float
    feature_means: list[float]
    feature_stds: list[float]
    epochs: int
    learning_rate: float
    seed: int
    final_loss: float = 0.0

    def score_features(self, features: FeatureVector) -> float:
        x = (features.as_array() - np.array(self.feature_means)) / np.array(self.feature_stds)
        z = float(np.dot(np.array(self.weights), x) + self.bias)
        return 1.0 / (1.0 + math.exp(-z))

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.__dict__, fh, indent=2, sort_keys=True)

    @classmethod
    def load(cls, path: str) -> "BaselineModel":
        with open(path, encoding="utf-8") as fh:
            return cls(**json.load(fh))


def _logistic_loss(X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float) -> float:
    z = X @ w + b
    # log(1 + exp(-y*z)) with y in {-1, +1}, numerically stable
    m = -y * z
    return float(np.mean(np.logaddexp(0.0, m)))


def train_baseline(features: Sequence[FeatureVector], labels: Sequence[int],
                   epochs: int = 200, learning_rate: float = 0.5,
                   seed: int = 0) -> BaselineModel:
    """Deterministic full-batch gradient descent on logistic loss.

    labels: 1 for CONSISTENT, 0 for INCONSISTENT. The step size is
    halved whenever a step would increase the loss, so the training
    loss is non-increasing per epoch.
    """
    if len(features) != len(labels):
        raise ValueError("length mismatch")
    if len(set(labels)) < 2:
        raise ValueError("training data must contain both classes")
    X = np.stack([f.as_array() for f in features])
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    stds[stds == 0] = 1.0
    Xs = (X - means) / stds
    y = np.where(np.asarray(labels) == 1, 1.0, -1.0)
    w = np.zeros(X.shape[1])
    b = 0.0
    lr = learning_rate
    loss = _logistic_loss(Xs, y, w, b)
    for _ in range(epochs):
        z = Xs @ w + b
        sig = 1.0 / (1.0 + np.exp(y * z))
        grad_w = -(Xs * (y * sig)[:, None]).mean(axis=0)
        grad_b = float(-(y * sig).mean())
        while lr > 1e-12:
            w_new = w - lr * grad_w
            b_new = b - lr * grad_b
            new_loss = _logistic_loss(Xs, y, w_new, b_new)
            if new_loss <= loss:
                w, b, loss = w_new, b_new, new_loss
                break
            lr /= 2.0
    return BaselineModel(weights=w.tolist(), bias=b,
                         feature_means=means.tolist(), feature_stds=stds.tolist(),
                         epochs=epochs, learning_rate=learning_rate, seed=seed,
                         final_loss=loss)


class OverlapScorer:
    """Reference scorer: best-sentence token overlap."""

    def score(self, document_text: str, claim_text: str) -> float:
        return overlap_score(document_text, claim_text)


class ConstantScorer:
    def __init__(self, value: float = 0.5):
        self.value = value

    def score(self, document_text: str, claim_text: str) -> float:
        return self.value


class RandomScorer:
    """Uniform random scores from a seeded stream (input-independent)."""

    def __init__(self, seed: int = 0):
        self._rng = random.Random(seed)

    def score(self, document_text: str, claim_text: str) -> float:
        return self._rng.random()


class BaselineScorer:
    def __init__(self, model: BaselineModel):
        self.model = model
        self._doc_cache: dict[str, tuple[Document, list]] = {}

    def score(self, document_text: str, claim_text: str) -> float:
        cached = self._doc_cache.get(document_text)
        if cached is None:
            doc = Document.from_text("_", document_text)
            cached = (doc, annotate.tag_entities(doc))
            self._doc_cache[document_text] = cached
        doc, entities = cached
        return self.model.score_features(
            featurize(doc, claim_text, document_entities=entities))


def load_external_predictions(path: str) -> dict[str, tuple[float, CharSpan | None, CharSpan | None]]:
    """Load a predictions file: JSONL {"id", "p_consistent",
    "support_span", "error_span"}."""
    predictions = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                example_id = obj["id"]
                p = float(obj["p_consistent"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed prediction row: {exc}") from exc
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{path}:{lineno}: p_consistent {p} outside [0, 1]")

            def parse_span(key: str) -> CharSpan | None:
                raw = obj.get(key)
                if raw is None:
                    return None
                try:
                    return CharSpan(int(raw[0]), int(raw[1]))
                except (ValueError, TypeError, IndexError) as exc:
                    raise ValueError(f"{path}:{lineno}: bad {key}: {raw}") from exc

            predictions[example_id] = (p, parse_span("support_span"), parse_span("error_span"))
    return predictions
