"""Linguistic annotators: entity/number tagging, pronouns, auxiliaries.

The built-in entity tagger is a deliberately simple deterministic
rule system; precomputed annotations from a real NER model can be
loaded through the standoff interface instead.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import CharSpan, Document, Sentence, Token


class AnnotationMismatchError(ValueError):
    """A standoff mention does not match the text it points into."""


class EntityGroup(str, enum.Enum):
    NAMED = "named"
    NUMBER = "number"


class EntityKind(str, enum.Enum):
    PERSON = "person"
    LOCATION = "location"
    INSTITUTION = "institution"
    DATE = "date"
    NUMERIC = "numeric"
    OTHER = "other"


@dataclass(frozen=True)
class EntityMention:
    span: CharSpan
    surface: str
    group: EntityGroup
    kind: EntityKind | None = None


class PronounGroup(str, enum.Enum):
    SUBJECTIVE = "subjective"
    OBJECTIVE = "objective"
    POSSESSIVE_DET = "possessive_det"
    POSSESSIVE_IND = "possessive_ind"
    REFLEXIVE = "reflexive"


@dataclass(frozen=True)
class PronounMention:
    span: CharSpan
    surface: str
    group: PronounGroup
    gendered: bool = True


@dataclass(frozen=True)
class AuxMention:
    span: CharSpan
    surface: str
    negated: bool
    negation_span: CharSpan | None = None


MONTHS = frozenset({
    "january", "february", "march", "april", "may", "june", "july",
    "august", "september", "october", "november", "december",
    "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.", "sep.",
    "sept.", "oct.", "nov.", "dec.",
})

_ORDINAL_SUFFIXES = ("st", "nd", "rd", "th")
_CURRENCY = set("$€£¥")

# Capitalized function words never start a named-entity run at
# sentence-initial position.
_STOPWORDS = frozenset("""
    the a an this that these those it he she they we you i in on at by
    of but and or so yet for to from with when while after before if as
    his her hers him them their our my your its there here now then
    however meanwhile although also not no yes what who where why how
    which once during since because until about over under again
""".split())

# Gendered pronoun inventory, by syntactic group. Within each group the
# two surfaces are each other's unique swap alternative.
PRONOUN_GROUPS: dict[PronounGroup, tuple[str, str]] = {
    PronounGroup.SUBJECTIVE: ("he", "she"),
    PronounGroup.OBJECTIVE: ("him", "her"),
    PronounGroup.POSSESSIVE_DET: ("his", "her"),
    PronounGroup.POSSESSIVE_IND: ("his", "hers"),
    PronounGroup.REFLEXIVE: ("himself", "herself"),
}

# Closed verb list used to disambiguate "her"/"his" before a verb or
# punctuation (objective / independent-possessive reading) from the
# determiner reading before a noun.
_COMMON_VERBS = frozenset("""
    is was were are be been being has had have having did does do done
    went go goes gone came come comes left leave leaves said says say
    saw see sees seen gave give gives given got get gets made make makes
    took take takes taken ran run runs walked walks arrived arrives
    stayed stays returned returns smiled laughed cried slept sleeps won
    wins lost loses knew knows thought thinks felt feels told tells
    asked asks wanted wants liked likes loved loves visited visits met
    meets spoke speaks called calls helped helps worked works moved
    moves stopped stops started starts waited waits
""".split())

AUXILIARIES = frozenset({
    "am", "is", "are", "was", "were", "has", "have", "had", "do",
    "does", "did", "will", "would", "can", "could", "shall", "should",
    "may", "might", "must",
})


def _is_number_token(tok: Token) -> bool:
    s = tok.surface
    if any(c.isdigit() for c in s):
        return True
    if s.lower() in MONTHS:
        return True
    return False


def _is_currency_token(tok: Token) -> bool:
    return all(c in _CURRENCY for c in tok.surface)


def _number_mentions(sentence: Sentence, text: str) -> list[EntityMention]:
    tokens = sentence.tokens
    mentions = []
    used = [False] * len(tokens)
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        low = tok.surface.lower()
        if low in MONTHS:
            # Merge "March 3, 2015" style dates: month [day [, year]].
            j = i
            if j + 1 < len(tokens) and tokens[j + 1].surface.isdigit():
                j += 1
                if (j + 2 < len(tokens) and tokens[j + 1].surface == ","
                        and tokens[j + 2].surface.isdigit()):
                    j += 2
                elif j + 1 < len(tokens) and tokens[j + 1].surface.isdigit():
                    j += 1
            span = CharSpan(tok.span.start, tokens[j].span.end)
            mentions.append(EntityMention(span, span.slice(text),
                                          EntityGroup.NUMBER, EntityKind.DATE))
            for k in range(i, j + 1):
                used[k] = True
            i = j + 1
            continue
        if any(c.isdigit() for c in tok.surface):
            start, end = tok.span.start, tok.span.end
            kind = EntityKind.NUMERIC
            # Attach an adjacent currency symbol or percent sign.
            if i > 0 and _is_currency_token(tokens[i - 1]) and tokens[i - 1].span.end == start:
                start = tokens[i - 1].span.start
                used[i - 1] = True
            if (i + 1 < len(tokens) and tokens[i + 1].surface == "%"
                    and tokens[i + 1].span.start == end):
                end = tokens[i + 1].span.end
                used[i + 1] = True
            span = CharSpan(start, end)
            mentions.append(EntityMention(span, span.slice(text),
                                          EntityGroup.NUMBER, kind))
            used[i] = True
        i += 1
    return mentions


def _is_capitalized_word(tok: Token) -> bool:
    s = tok.surface
    return s[0].isalpha() and s[0].isupper() and not any(c.isdigit() for c in s)


def _doc_capitalization_sets(sentences: Sequence[Sentence]) -> tuple[set[str], set[str]]:
    """Surfaces capitalized mid-sentence, and words seen lowercase."""
    mid_capitalized: set[str] = set()
    lowercase_words: set[str] = set()
    for sent in sentences:
        for idx, tok in enumerate(sent.tokens):
            if tok.surface.islower():
                lowercase_words.add(tok.surface)
            elif idx > 0 and _is_capitalized_word(tok):
                mid_capitalized.add(tok.surface)
    return mid_capitalized, lowercase_words


def _named_mentions(sentence: Sentence, text: str, number_spans: list[CharSpan],
                    mid_capitalized: set[str], lowercase_words: set[str]) -> list[EntityMention]:
    def in_number(tok: Token) -> bool:
        return any(tok.span.overlaps(ns) for ns in number_spans)

    def candidate(tok: Token) -> bool:
        return (_is_capitalized_word(tok) and tok.surface.lower() not in MONTHS
                and not in_number(tok))

    def keep_initial(tok: Token) -> bool:
        # Sentence-initial tokens are capitalized for orthographic
        # reasons; keep them only when the document gives evidence the
        # word is a name (capitalized mid-sentence elsewhere) or when
        # it is not a function word and never occurs lowercased.
        if tok.surface in mid_capitalized:
            return True
        low = tok.surface.lower()
        return low not in _STOPWORDS and low not in lowercase_words

    mentions = []
    i = 0
    tokens = sentence.tokens
    while i < len(tokens):
        if not candidate(tokens[i]) or (i == 0 and not keep_initial(tokens[i])):
            i += 1
            continue
        j = i
        while j + 1 < len(tokens) and candidate(tokens[j + 1]) \
                and tokens[j + 1].surface.lower() not in _STOPWORDS:
            j += 1
        span = CharSpan(tokens[i].span.start, tokens[j].span.end)
        mentions.append(EntityMention(span, span.slice(text),
                                      EntityGroup.NAMED, EntityKind.OTHER))
        i = j + 1
    return mentions


def tag_entities(document: Document) -> list[EntityMention]:
    """Built-in rule-based entity tagging over a whole document.

    NUMBER mentions come from digit/month/currency/percent patterns with
    multi-token dates merged; NAMED mentions are maximal capitalized
    token runs, with a sentence-initial guard (see _named_mentions).
    """
    mid_cap, lower_words = _doc_capitalization_sets(document.sentences)
    mentions: list[EntityMention] = []
    for sent in document.sentences:
        numbers = _number_mentions(sent, document.text)
        named = _named_mentions(sent, document.text, [m.span for m in numbers],
                                mid_cap, lower_words)
        mentions.extend(numbers)
        mentions.extend(named)
    mentions.sort(key=lambda m: (m.span.start, m.span.end))
    return mentions


def load_standoff(path: str) -> dict[str, list[dict]]:
    """Load a standoff NER file: JSONL {"doc_id", "mentions": [...]}."""
    table: dict[str, list[dict]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                table[obj["doc_id"]] = list(obj["mentions"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed standoff line: {exc}") from exc
    return table


def write_standoff(table: dict[str, list[dict]], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc_id in table:
            fh.write(json.dumps({"doc_id": doc_id, "mentions": table[doc_id]},
                                ensure_ascii=False) + "\n")


def standoff_mentions(document: Document, table: dict[str, list[dict]]) -> list[EntityMention]:
    """Materialize standoff mentions for a document, validating spans."""
    mentions = []
    for raw in table.get(document.id, []):
        try:
            span = CharSpan(int(raw["start"]), int(raw["end"]))
            group = EntityGroup(raw["group"])
        except (KeyError, ValueError, TypeError) as exc:
            raise AnnotationMismatchError(f"doc {document.id}: bad mention {raw}") from exc
        if span.end > len(document.text):
            raise AnnotationMismatchError(
                f"doc {document.id}: span {span} outside text of length {len(document.text)}")
        surface = span.slice(document.text)
        if "surface" in raw and raw["surface"] != surface:
            raise AnnotationMismatchError(
                f"doc {document.id}: surface {raw['surface']!r} != text {surface!r}")
        kind = EntityKind(raw["kind"]) if raw.get("kind") else None
        mentions.append(EntityMention(span, surface, group, kind))
    mentions.sort(key=lambda m: (m.span.start, m.span.end))
    return mentions


def find_pronouns(tokens: Sequence[Token]) -> list[PronounMention]:
    """Gendered pronoun mentions in a tokenized claim.

    "her" (and symmetrically "his") before a verb or punctuation reads
    objective / independent-possessive; before anything else it reads
    as a possessive determiner.
    """
    mentions = []
    for idx, tok in enumerate(tokens):
        low = tok.surface.lower()
        nxt = tokens[idx + 1].surface.lower() if idx + 1 < len(tokens) else None
        before_verb_or_punct = nxt is None or nxt in _COMMON_VERBS \
            or not any(c.isalnum() for c in nxt)
        if low == "he":
            group = PronounGroup.SUBJECTIVE
        elif low == "she":
            group = PronounGroup.SUBJECTIVE
        elif low == "him":
            group = PronounGroup.OBJECTIVE
        elif low == "her":
            group = PronounGroup.OBJECTIVE if before_verb_or_punct else PronounGroup.POSSESSIVE_DET
        elif low == "his":
            group = PronounGroup.POSSESSIVE_IND if before_verb_or_punct else PronounGroup.POSSESSIVE_DET
        elif low == "hers":
            group = PronounGroup.POSSESSIVE_IND
        elif low in ("himself", "herself"):
            group = PronounGroup.REFLEXIVE
        else:
            continue
        mentions.append(PronounMention(tok.span, tok.surface, group))
    return mentions


def pronoun_alternatives(surface: str, group: PronounGroup) -> list[str]:
    """Distinct same-group gendered alternatives for a pronoun surface."""
    return [p for p in PRONOUN_GROUPS[group] if p != surface.lower()]


def find_auxiliaries(tokens: Sequence[Token]) -> list[AuxMention]:
    """Auxiliary verbs, with attached negation when directly followed
    by a "not" or "n't" token."""
    mentions = []
    for idx, tok in enumerate(tokens):
        if tok.surface.lower() not in AUXILIARIES:
            continue
        negation_span = None
        if idx + 1 < len(tokens) and tokens[idx + 1].surface.lower() in ("not", "n't"):
            negation_span = tokens[idx + 1].span
        mentions.append(AuxMention(tok.span, tok.surface,
                                   negated=negation_span is not None,
                                   negation_span=negation_span))
    return mentions
