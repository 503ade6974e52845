"""Dataset generation: claim sampling, transform orchestration,
balancing, deduplication, and JSONL serialization.

The whole pipeline is byte-deterministic under a fixed seed: per-document
random streams are derived from (seed, doc_id) so parallel generation
order cannot change the output.
"""

from __future__ import annotations

import hashlib
import json
import random
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import __version__
from .annotate import EntityGroup, tag_entities
from .corpus import CharSpan, Document
from .transforms import (Claim, Label, Skipped, Transformed, TransformKind,
                         apply_entity_swap, apply_identity, apply_negation,
                         apply_noise_to_outcome, apply_paraphrase,
                         apply_pronoun_swap)


class UnbalanceableError(ValueError):
    """Balancing requires both classes to be present."""


class ValidationError(ValueError):
    """A dataset record violates the schema."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


DATASET_FIELDS = ("id", "doc_id", "text", "claim", "label", "extraction_span",
                  "augmentation_span", "transform", "noise_positions",
                  "original_claim")

_TRANSFORM_ORDER = (TransformKind.IDENTITY, TransformKind.PARAPHRASE,
                    TransformKind.ENTITY_SWAP, TransformKind.NUMBER_SWAP,
                    TransformKind.PRONOUN_SWAP, TransformKind.NEGATION)

DEFAULT_TRANSFORM_MIX = {kind: 1.0 for kind in _TRANSFORM_ORDER}


@dataclass(frozen=True)
class Example:
    """One training/evaluation record."""

    id: str
    doc_id: str
    text: str
    claim: str
    label: Label
    extraction_span: CharSpan
    augmentation_span: CharSpan | None
    transform: TransformKind
    noise_positions: tuple[int, ...] = ()
    original_claim: str = ""

    def to_json(self) -> str:
        obj = {
            "id": self.id,
            "doc_id": self.doc_id,
            "text": self.text,
            "claim": self.claim,
            "label": self.label.value,
            "extraction_span": [self.extraction_span.start, self.extraction_span.end],
            "augmentation_span": ([self.augmentation_span.start, self.augmentation_span.end]
                                  if self.augmentation_span else None),
            "transform": self.transform.value,
            "noise_positions": list(self.noise_positions),
            "original_claim": self.original_claim,
        }
        return json.dumps(obj, ensure_ascii=False)


@dataclass(frozen=True)
class GenConfig:
    claims_per_doc: int = 3
    min_claim_tokens: int = 5
    transform_mix: dict[TransformKind, float] = field(
        default_factory=lambda: dict(DEFAULT_TRANSFORM_MIX))
    noise_p: float = 0.05
    target_negative_ratio: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.claims_per_doc < 1:
            raise ValueError("claims_per_doc must be >= 1")
        if not 0.0 <= self.noise_p <= 1.0:
            raise ValueError("noise_p outside [0, 1]")
        if not 0.0 < self.target_negative_ratio < 1.0:
            raise ValueError("target_negative_ratio outside (0, 1)")
        if any(w < 0 for w in self.transform_mix.values()):
            raise ValueError("negative transform weight")
        enabled = [k for k, w in self.transform_mix.items() if w > 0]
        if not any(k.semantically_invariant for k in enabled):
            raise ValueError("no positive-polarity transform enabled")
        if not any(not k.semantically_invariant for k in enabled):
            raise ValueError("no negative-polarity transform enabled")

    def canonical_json(self) -> str:
        obj = {
            "claims_per_doc": self.claims_per_doc,
            "min_claim_tokens": self.min_claim_tokens,
            "transform_mix": {k.value: w for k, w in sorted(
                self.transform_mix.items(), key=lambda kv: kv[0].value)},
            "noise_p": self.noise_p,
            "target_negative_ratio": self.target_negative_ratio,
            "seed": self.seed,
        }
        return json.dumps(obj, sort_keys=True)

    def hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class DatasetManifest:
    example_count: int
    negative_fraction: float
    transform_counts: dict[str, int]
    skip_counts: dict[str, int]
    seed: int
    config_hash: str
    tool_version: str

    def to_json(self) -> str:
        return json.dumps({
            "example_count": self.example_count,
            "negative_fraction": self.negative_fraction,
            "transform_counts": dict(sorted(self.transform_counts.items())),
            "skip_counts": dict(sorted(self.skip_counts.items())),
            "seed": self.seed,
            "config_hash": self.config_hash,
            "tool_version": self.tool_version,
        }, indent=2, sort_keys=True)


def _doc_rng(seed: int, doc_id: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}:{doc_id}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "little"))


def _example_id(doc_id: str, sentence_index: int, kind: TransformKind, seed: int) -> str:
    tag = hashlib.sha1(
        f"{doc_id}|{sentence_index}|{kind.value}|{seed}".encode("utf-8")).hexdigest()[:8]
    return f"{doc_id}:{sentence_index}:{kind.value}:{tag}"


def extract_claims(document: Document, config: GenConfig,
                   rng: random.Random) -> list[tuple[int, Claim]]:
    """Sample up to claims_per_doc distinct long-enough sentences,
    uniformly without replacement. Returned in document order with the
    originating sentence index."""
    eligible = [i for i, s in enumerate(document.sentences)
                if len(s.tokens) >= config.min_claim_tokens]
    k = min(config.claims_per_doc, len(eligible))
    if k == 0:
        return []
    chosen = sorted(rng.sample(eligible, k))
    return [(i, Claim.from_sentence(document, document.sentences[i]))
            for i in chosen]


def _generate_for_document(document: Document, config: GenConfig,
                           provider) -> tuple[list[Example], Counter]:
    rng = _doc_rng(config.seed, document.id)
    skips: Counter = Counter()
    examples: list[Example] = []
    claims = extract_claims(document, config, rng)
    doc_mentions = tag_entities(document) if claims else []
    for sent_idx, claim in claims:
        for kind in _TRANSFORM_ORDER:
            weight = config.transform_mix.get(kind, 0.0)
            if weight <= 0:
                continue
            if weight < 1.0 and rng.random() >= weight:
                continue
            if kind == TransformKind.IDENTITY:
                outcome = apply_identity(claim)
            elif kind == TransformKind.PARAPHRASE:
                outcome = apply_paraphrase(claim, provider, rng)
            elif kind == TransformKind.ENTITY_SWAP:
                outcome = apply_entity_swap(claim, document, EntityGroup.NAMED,
                                            rng, document_mentions=doc_mentions)
            elif kind == TransformKind.NUMBER_SWAP:
                outcome = apply_entity_swap(claim, document, EntityGroup.NUMBER,
                                            rng, document_mentions=doc_mentions)
            elif kind == TransformKind.PRONOUN_SWAP:
                outcome = apply_pronoun_swap(claim, rng)
            else:
                outcome = apply_negation(claim, rng)
            if isinstance(outcome, Skipped):
                skips[f"{kind.value}:{outcome.reason.value}"] += 1
                continue
            if config.noise_p > 0:
                outcome = apply_noise_to_outcome(outcome, config.noise_p, rng)
            examples.append(Example(
                id=_example_id(document.id, sent_idx, kind, config.seed),
                doc_id=document.id,
                text=document.text,
                claim=outcome.claim.text,
                label=outcome.label,
                extraction_span=claim.origin_span,
                augmentation_span=outcome.augmentation_span,
                transform=kind,
                noise_positions=outcome.noise_positions,
                original_claim=claim.text,
            ))
    return examples, skips


def generate(documents: Iterable[Document], config: GenConfig,
             provider=None, max_workers: int = 1) -> tuple[list[Example], Counter]:
    """Run the generation procedure over a corpus.

    Output order is deterministic (input document order) regardless of
    worker count. Returns the examples plus per-(transform, reason)
    skip counts.
    """
    from .paraphrase import UnavailableProvider
    if provider is None:
        provider = UnavailableProvider()
    docs = list(documents)
    skips: Counter = Counter()
    examples: list[Example] = []
    if max_workers <= 1:
        results = [_generate_for_document(d, config, provider) for d in docs]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(
                lambda d: _generate_for_document(d, config, provider), docs))
    for doc_examples, doc_skips in results:
        examples.extend(doc_examples)
        skips.update(doc_skips)
    return examples, skips


def balance(examples: Sequence[Example], target_negative_ratio: float,
            rng: random.Random) -> list[Example]:
    """Downsample the majority class so the negative fraction lands
    within 1/N of the target; original order is preserved."""
    neg_idx = [i for i, e in enumerate(examples) if e.label == Label.INCONSISTENT]
    pos_idx = [i for i, e in enumerate(examples) if e.label == Label.CONSISTENT]
    if not neg_idx or not pos_idx:
        raise UnbalanceableError("both classes must be present")
    t = target_negative_ratio
    n_neg, n_pos = len(neg_idx), len(pos_idx)
    if n_neg / (n_neg + n_pos) > t:
        keep_neg = round(t * n_pos / (1 - t))
        keep_neg = max(1, min(n_neg, keep_neg))
        kept = set(rng.sample(neg_idx, keep_neg)) | set(pos_idx)
    else:
        keep_pos = round(n_neg * (1 - t) / t)
        keep_pos = max(1, min(n_pos, keep_pos))
        kept = set(rng.sample(pos_idx, keep_pos)) | set(neg_idx)
    return [e for i, e in enumerate(examples) if i in kept]


def dedupe(examples: Sequence[Example]) -> list[Example]:
    """Drop exact duplicates of (doc_id, claim, label), keeping the first."""
    seen = set()
    out = []
    for e in examples:
        key = (e.doc_id, e.claim, e.label)
        if key in seen:
            continue
        seen.add(key)
        out.append(e)
    return out


def build_manifest(examples: Sequence[Example], config: GenConfig,
                   skips: Counter | None = None) -> DatasetManifest:
    transform_counts = Counter(e.transform.value for e in examples)
    negatives = sum(1 for e in examples if e.label == Label.INCONSISTENT)
    return DatasetManifest(
        example_count=len(examples),
        negative_fraction=negatives / len(examples) if examples else 0.0,
        transform_counts=dict(transform_counts),
        skip_counts=dict(skips or {}),
        seed=config.seed,
        config_hash=config.hash(),
        tool_version=__version__,
    )


def write_dataset(examples: Sequence[Example], path: str,
                  manifest: DatasetManifest | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in examples:
            fh.write(e.to_json() + "\n")
    if manifest is not None:
        with open(path + ".manifest.json", "w", encoding="utf-8") as fh:
            fh.write(manifest.to_json() + "\n")


def _parse_span(raw, length: int, what: str, line: int) -> CharSpan:
    if (not isinstance(raw, (list, tuple)) or len(raw) != 2
            or not all(isinstance(v, int) for v in raw)):
        raise ValidationError(f"{what} must be [start, end]", line)
    start, end = raw
    if not (0 <= start < end <= length):
        raise ValidationError(f"{what} [{start}, {end}) out of bounds (len {length})", line)
    return CharSpan(start, end)


def read_dataset(path: str) -> list[Example]:
    """Read and validate a dataset file. Raises ValidationError with
    the offending line number on malformed input."""
    examples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"invalid JSON: {exc}", lineno) from exc
            missing = [f for f in DATASET_FIELDS if f not in obj]
            if missing:
                raise ValidationError(f"missing fields {missing}", lineno)
            try:
                label = Label(obj["label"])
                transform = TransformKind(obj["transform"])
            except ValueError as exc:
                raise ValidationError(str(exc), lineno) from exc
            extraction = _parse_span(obj["extraction_span"], len(obj["text"]),
                                     "extraction_span", lineno)
            augmentation = None
            if obj["augmentation_span"] is not None:
                augmentation = _parse_span(obj["augmentation_span"], len(obj["claim"]),
                                           "augmentation_span", lineno)
            if (label == Label.CONSISTENT) != transform.semantically_invariant:
                raise ValidationError(
                    f"label {label.value} inconsistent with transform {transform.value}", lineno)
            examples.append(Example(
                id=obj["id"], doc_id=obj["doc_id"], text=obj["text"],
                claim=obj["claim"], label=label, extraction_span=extraction,
                augmentation_span=augmentation, transform=transform,
                noise_positions=tuple(obj["noise_positions"]),
                original_claim=obj["original_claim"],
            ))
    return examples
