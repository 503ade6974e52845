"""Claim transformations with span metadata.

Semantically invariant transforms (identity, paraphrase) yield
CONSISTENT labels; variant transforms (entity/number/pronoun swap,
negation) yield INCONSISTENT labels and carry an augmentation span
addressing the altered region of the claim.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Sequence

from . import annotate
from .corpus import CharSpan, Document, Sentence, Token, tokenize
from .paraphrase import (ALL_PIVOTS, ParaphraseRequest, Pivot,
                         ProviderUnavailableError)


class Label(str, enum.Enum):
    CONSISTENT = "CONSISTENT"
    INCONSISTENT = "INCONSISTENT"


class TransformKind(str, enum.Enum):
    IDENTITY = "identity"
    PARAPHRASE = "paraphrase"
    ENTITY_SWAP = "entity_swap"
    NUMBER_SWAP = "number_swap"
    PRONOUN_SWAP = "pronoun_swap"
    NEGATION = "negation"

    @property
    def semantically_invariant(self) -> bool:
        return self in (TransformKind.IDENTITY, TransformKind.PARAPHRASE)

    @property
    def label(self) -> Label:
        return Label.CONSISTENT if self.semantically_invariant else Label.INCONSISTENT


# Transforms whose output differs from the input on exactly one
# contiguous region (equal to the augmentation span).
SINGLE_EDIT_KINDS = frozenset({
    TransformKind.ENTITY_SWAP, TransformKind.NUMBER_SWAP, TransformKind.PRONOUN_SWAP,
})


class SkipReason(str, enum.Enum):
    NO_CANDIDATE = "no_candidate"
    PROVIDER_UNAVAILABLE = "provider_unavailable"
    TOO_SHORT = "too_short"


@dataclass(frozen=True)
class Claim:
    """A single sentence with provenance to its source document."""

    text: str
    tokens: tuple[Token, ...]  # claim-local spans
    doc_id: str
    origin_span: CharSpan  # document coordinates of the source sentence

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("empty claim text")

    @classmethod
    def from_sentence(cls, document: Document, sentence: Sentence) -> "Claim":
        text = sentence.text_in(document.text)
        base = sentence.span.start
        tokens = tuple(
            Token(t.surface, CharSpan(t.span.start - base, t.span.end - base))
            for t in sentence.tokens)
        return cls(text=text, tokens=tokens, doc_id=document.id,
                   origin_span=sentence.span)

    def with_text(self, text: str) -> "Claim":
        return Claim(text=text, tokens=tuple(tokenize(text, 0)),
                     doc_id=self.doc_id, origin_span=self.origin_span)


@dataclass(frozen=True)
class Transformed:
    claim: Claim
    kind: TransformKind
    label: Label
    augmentation_span: CharSpan | None = None
    noise_positions: tuple[int, ...] = ()


@dataclass(frozen=True)
class Skipped:
    reason: SkipReason


TransformOutcome = Transformed | Skipped


def minimal_diff_span(old: str, new: str) -> CharSpan | None:
    """Minimal differing region of ``new`` relative to ``old``.

    Longest common prefix, then longest common suffix of the remainders.
    None when the region is empty (equal texts or pure deletion).
    """
    if old == new:
        return None
    p = 0
    limit = min(len(old), len(new))
    while p < limit and old[p] == new[p]:
        p += 1
    s = 0
    while s < limit - p and old[len(old) - 1 - s] == new[len(new) - 1 - s]:
        s += 1
    start, end = p, len(new) - s
    if start >= end:
        return None
    return CharSpan(start, end)


def apply_identity(claim: Claim) -> TransformOutcome:
    return Transformed(claim=claim, kind=TransformKind.IDENTITY,
                       label=Label.CONSISTENT)


def apply_paraphrase(claim: Claim, provider, rng: random.Random,
                     pivots: Sequence[Pivot] = ALL_PIVOTS) -> TransformOutcome:
    """Whole-sentence backtranslation rewrite; pivot chosen by rng."""
    pivot = pivots[rng.randrange(len(pivots))]
    try:
        result = provider.paraphrase(ParaphraseRequest(text=claim.text, pivot=pivot))
    except ProviderUnavailableError:
        return Skipped(SkipReason.PROVIDER_UNAVAILABLE)
    return Transformed(claim=claim.with_text(result.text),
                       kind=TransformKind.PARAPHRASE, label=Label.CONSISTENT)


def _splice(text: str, span: CharSpan, replacement: str) -> str:
    return text[:span.start] + replacement + text[span.end:]


def _claim_entities(claim: Claim) -> list[annotate.EntityMention]:
    pseudo = Document.from_text(claim.doc_id, claim.text)
    return annotate.tag_entities(pseudo)


def apply_entity_swap(claim: Claim, document: Document,
                      group: annotate.EntityGroup, rng: random.Random,
                      document_mentions: Sequence[annotate.EntityMention] | None = None,
                      match_kind: bool = False) -> TransformOutcome:
    """Replace one claim entity with a distinct same-group document entity.

    Both choices are uniform. Candidates whose substitution would not
    produce a non-empty differing region are excluded.
    """
    claim_mentions = [m for m in _claim_entities(claim) if m.group == group]
    if not claim_mentions:
        return Skipped(SkipReason.NO_CANDIDATE)
    if document_mentions is None:
        document_mentions = annotate.tag_entities(document)
    target = claim_mentions[rng.randrange(len(claim_mentions))]
    candidates = []
    for m in document_mentions:
        if m.group != group:
            continue
        if match_kind and m.kind != target.kind:
            continue
        if m.surface.lower() == target.surface.lower():
            continue
        new_text = _splice(claim.text, target.span, m.surface)
        if minimal_diff_span(claim.text, new_text) is not None:
            candidates.append((m, new_text))
    if not candidates:
        return Skipped(SkipReason.NO_CANDIDATE)
    _, new_text = candidates[rng.randrange(len(candidates))]
    kind = (TransformKind.ENTITY_SWAP if group == annotate.EntityGroup.NAMED
            else TransformKind.NUMBER_SWAP)
    return Transformed(claim=claim.with_text(new_text), kind=kind,
                       label=Label.INCONSISTENT,
                       augmentation_span=minimal_diff_span(claim.text, new_text))


def _match_capitalization(original: str, replacement: str) -> str:
    if original[0].isupper():
        return replacement[0].upper() + replacement[1:]
    return replacement


def apply_pronoun_swap(claim: Claim, rng: random.Random) -> TransformOutcome:
    """Swap one gendered pronoun for the other pronoun of its group."""
    mentions = annotate.find_pronouns(claim.tokens)
    if not mentions:
        return Skipped(SkipReason.NO_CANDIDATE)
    target = mentions[rng.randrange(len(mentions))]
    alternatives = annotate.pronoun_alternatives(target.surface, target.group)
    if not alternatives:
        return Skipped(SkipReason.NO_CANDIDATE)
    replacement = _match_capitalization(
        target.surface, alternatives[rng.randrange(len(alternatives))])
    new_text = _splice(claim.text, target.span, replacement)
    aug = minimal_diff_span(claim.text, new_text)
    if aug is None:
        return Skipped(SkipReason.NO_CANDIDATE)
    return Transformed(claim=claim.with_text(new_text),
                       kind=TransformKind.PRONOUN_SWAP,
                       label=Label.INCONSISTENT, augmentation_span=aug)


def apply_negation(claim: Claim, rng: random.Random) -> TransformOutcome:
    """Insert "not" after a non-negated auxiliary, or strip an existing
    negation. Insertion always uses the canonical "not" form."""
    auxes = annotate.find_auxiliaries(claim.tokens)
    if not auxes:
        return Skipped(SkipReason.NO_CANDIDATE)
    aux = auxes[rng.randrange(len(auxes))]
    text = claim.text
    if not aux.negated:
        insert_at = aux.span.end
        new_text = text[:insert_at] + " not" + text[insert_at:]
        aug = CharSpan(insert_at + 1, insert_at + 4)
    else:
        neg = aux.negation_span
        assert neg is not None
        start = neg.start
        if text[neg.start:neg.end].lower() == "not" and start > 0 \
                and text[start - 1].isspace():
            start -= 1
        new_text = text[:start] + text[neg.end:]
        # Zero-length edit at the removal point, encoded as the
        # auxiliary's span (unchanged: the auxiliary precedes the
        # removed negation).
        aug = aux.span
    return Transformed(claim=claim.with_text(new_text),
                       kind=TransformKind.NEGATION,
                       label=Label.INCONSISTENT, augmentation_span=aug)


def apply_noise(surfaces: Sequence[str], p: float, rng: random.Random,
                protected: frozenset[int] = frozenset()) -> tuple[list[tuple[int, str]], list[int]]:
    """Per-token duplicate-or-remove noise.

    Each position fires with probability p; on a hit a fair coin picks
    duplication vs removal. Removal never drops the token count below 3
    and never touches protected positions. Returns the noised sequence
    as (original_index, surface) pairs plus the fired positions.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"noise probability {p} outside [0, 1]")
    out: list[tuple[int, str]] = []
    fired: list[int] = []
    removed = 0
    for idx, surface in enumerate(surfaces):
        if p > 0 and rng.random() < p:
            duplicate = rng.random() < 0.5
            if duplicate:
                out.append((idx, surface))
                out.append((idx, surface))
                fired.append(idx)
                continue
            if idx not in protected and len(surfaces) - removed - 1 >= 3:
                removed += 1
                fired.append(idx)
                continue
        out.append((idx, surface))
    return out, fired


def apply_noise_to_outcome(outcome: Transformed, p: float,
                           rng: random.Random) -> Transformed:
    """Apply token noise to a transformed claim, re-offsetting the
    augmentation span so it still addresses the transformed region."""
    claim = outcome.claim
    surfaces = [t.surface for t in claim.tokens]
    protected: frozenset[int] = frozenset()
    aug = outcome.augmentation_span
    if aug is not None:
        protected = frozenset(
            i for i, t in enumerate(claim.tokens) if t.span.overlaps(aug))
    noised, fired = apply_noise(surfaces, p, rng, protected=protected)
    if not fired:
        return outcome
    # Rebuild text with single spaces and recompute token offsets.
    pieces = []
    offsets = []  # (orig_index, start, end) per emitted token
    pos = 0
    for orig_idx, surface in noised:
        if pieces:
            pos += 1
        pieces.append(surface)
        offsets.append((orig_idx, pos, pos + len(surface)))
        pos += len(surface)
    new_text = " ".join(pieces)
    new_aug = None
    if aug is not None:
        first_hits = {}
        for orig_idx, start, end in offsets:
            if orig_idx in protected and orig_idx not in first_hits:
                first_hits[orig_idx] = (start, end)
        if first_hits:
            starts = [se[0] for se in first_hits.values()]
            ends = [se[1] for se in first_hits.values()]
            new_aug = CharSpan(min(starts), max(ends))
        else:
            new_aug = aug
    return Transformed(claim=claim.with_text(new_text), kind=outcome.kind,
                       label=outcome.label, augmentation_span=new_aug,
                       noise_positions=tuple(fired))
