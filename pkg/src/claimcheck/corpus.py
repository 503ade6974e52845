"""Sentence segmentation, tokenization, and character-span bookkeeping.

All offsets are Python string indices (Unicode scalar values). Everything
here is deterministic and rule-based: identical input text always yields
byte-identical segmentation and tokenization.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass, field
from typing import Iterable, Iterator


class OutOfRangeError(ValueError):
    """A span falls outside the text it is supposed to address."""


# Versioned abbreviation list. Entries are stored lowercased and include
# the trailing period. Keep sorted; bump ABBREV_VERSION on change.
ABBREV_VERSION = 1
ABBREVIATIONS = frozenset({
    "a.m.", "adm.", "apr.", "approx.", "aug.", "ave.", "blvd.", "brig.",
    "capt.", "cf.", "cmdr.", "co.", "col.", "corp.", "dec.", "dept.",
    "dr.", "e.g.", "e.u.", "est.", "etc.", "feb.", "fig.", "fr.", "gen.",
    "gov.", "hon.", "i.e.", "inc.", "jan.", "jr.", "jul.", "jun.", "lt.",
    "ltd.", "maj.", "mar.", "messrs.", "mr.", "mrs.", "ms.", "mt.",
    "no.", "nov.", "oct.", "p.m.", "ph.d.", "pres.", "prof.", "rd.",
    "rep.", "rev.", "sen.", "sep.", "sept.", "sgt.", "sr.", "st.",
    "u.k.", "u.n.", "u.s.", "univ.", "vol.", "vs.",
})

_PUNCT = set(string.punctuation) | set("‘’“”–—…«»")

# Longest suffixes first so "n't" wins over "'t".
_CONTRACTION_SUFFIXES = ("n't", "'re", "'ve", "'ll", "'s", "'d", "'m")


@dataclass(frozen=True, order=True)
class CharSpan:
    """Half-open character interval [start, end)."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if not (0 <= self.start < self.end):
            raise ValueError(f"invalid span [{self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start

    def contains(self, other: "CharSpan") -> bool:
        return self.start <= other.start and other.end <= self.end

    def overlaps(self, other: "CharSpan") -> bool:
        return self.start < other.end and other.start < self.end

    def slice(self, text: str) -> str:
        return text[self.start:self.end]


@dataclass(frozen=True)
class Token:
    surface: str
    span: CharSpan

    def __post_init__(self) -> None:
        if not self.surface:
            raise ValueError("empty token surface")


@dataclass(frozen=True)
class Sentence:
    span: CharSpan
    tokens: tuple[Token, ...]

    def text_in(self, document_text: str) -> str:
        return self.span.slice(document_text)


@dataclass(frozen=True)
class Document:
    """Immutable segmented + tokenized source text."""

    id: str
    text: str
    sentences: tuple[Sentence, ...]
    summary_sentences: tuple[str, ...] = field(default=())

    @classmethod
    def from_text(cls, doc_id: str, text: str,
                  summary_sentences: Iterable[str] = ()) -> "Document":
        sentences = []
        for span in segment_sentences(text):
            tokens = tuple(tokenize(span.slice(text), span.start))
            sentences.append(Sentence(span=span, tokens=tokens))
        return cls(id=doc_id, text=text, sentences=tuple(sentences),
                   summary_sentences=tuple(summary_sentences))


def _word_ending_at(text: str, period_idx: int) -> str:
    """The whitespace-delimited chunk whose last char is text[period_idx]."""
    start = period_idx
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    return text[start:period_idx + 1]


def _is_abbreviation(word: str) -> bool:
    word = word.lower()
    if word in ABBREVIATIONS:
        return True
    # Single-letter initials such as "J." in "J. Smith".
    if len(word) == 2 and word[0].isalpha() and word[1] == ".":
        return True
    return False


def segment_sentences(text: str) -> list[CharSpan]:
    """Split text into sentence spans.

    A boundary is a [.?!] run followed by whitespace and an uppercase
    letter, unless the period terminates a known abbreviation. Returned
    spans are trimmed to non-whitespace bounds and together cover every
    non-whitespace character of the input.
    """
    if not text.strip():
        return []

    boundaries = []  # index one past the end of each sentence (untrimmed)
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c in ".?!":
            # Consume a run of terminal punctuation (e.g. "?!", "...").
            j = i
            while j + 1 < n and text[j + 1] in ".?!\"'’”)":
                j += 1
            k = j + 1
            while k < n and text[k].isspace():
                k += 1
            follows_ws_upper = k > j + 1 and k < n and text[k].isupper()
            guarded = c == "." and i == j and _is_abbreviation(_word_ending_at(text, i))
            if follows_ws_upper and not guarded:
                boundaries.append(j + 1)
            i = j + 1
        else:
            i += 1
    boundaries.append(n)

    spans = []
    start = 0
    for end in boundaries:
        s, e = start, end
        while s < e and text[s].isspace():
            s += 1
        while e > s and text[e - 1].isspace():
            e -= 1
        if e > s:
            spans.append(CharSpan(s, e))
        start = end
    return spans


def _split_chunk(chunk: str, offset: int, out: list[Token]) -> None:
    """Recursively split one whitespace-delimited chunk into tokens."""
    if _is_abbreviation(chunk):
        out.append(Token(chunk, CharSpan(offset, offset + len(chunk))))
        return
    if len(chunk) > 1 and chunk[0] in _PUNCT:
        out.append(Token(chunk[0], CharSpan(offset, offset + 1)))
        _split_chunk(chunk[1:], offset + 1, out)
        return
    if len(chunk) > 1 and chunk[-1] in _PUNCT:
        _split_chunk(chunk[:-1], offset, out)
        last = offset + len(chunk) - 1
        out.append(Token(chunk[-1], CharSpan(last, last + 1)))
        return
    lower = chunk.lower()
    for suffix in _CONTRACTION_SUFFIXES:
        if lower.endswith(suffix) and len(chunk) > len(suffix):
            cut = len(chunk) - len(suffix)
            _split_chunk(chunk[:cut], offset, out)
            out.append(Token(chunk[cut:], CharSpan(offset + cut, offset + len(chunk))))
            return
    out.append(Token(chunk, CharSpan(offset, offset + len(chunk))))


def tokenize(sentence_text: str, base_offset: int = 0) -> list[Token]:
    """Whitespace tokenization with punctuation and contraction splitting.

    Leading/trailing punctuation becomes separate tokens, contraction
    suffixes ("n't", "'s", ...) are split off, and abbreviation-list
    items are kept whole. Spans are offset by ``base_offset``.
    """
    tokens: list[Token] = []
    i = 0
    n = len(sentence_text)
    while i < n:
        if sentence_text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not sentence_text[j].isspace():
            j += 1
        _split_chunk(sentence_text[i:j], base_offset + i, tokens)
        i = j
    return tokens


def locate(span: CharSpan, sentence: Sentence) -> tuple[int, int]:
    """Minimal contiguous token index range [lo, hi) covering ``span``.

    Raises OutOfRangeError when the span is not inside the sentence span.
    If the span lies entirely between tokens the range is empty.
    """
    if not sentence.span.contains(span):
        raise OutOfRangeError(f"span {span} outside sentence {sentence.span}")
    lo = 0
    while lo < len(sentence.tokens) and sentence.tokens[lo].span.end <= span.start:
        lo += 1
    hi = len(sentence.tokens)
    while hi > lo and sentence.tokens[hi - 1].span.start >= span.end:
        hi -= 1
    return lo, hi


def read_corpus(path: str) -> Iterator[Document]:
    """Read a JSON Lines corpus of {"id", "text"[, "summary_sentences"]}."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                doc_id = obj["id"]
                text = obj["text"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed corpus line: {exc}") from exc
            yield Document.from_text(doc_id, text, obj.get("summary_sentences", ()))
