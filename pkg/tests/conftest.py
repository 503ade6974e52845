import random

import pytest

from claimcheck.corpus import Document

NAMES = ["Alice", "Bob", "Carol", "David", "Emma", "Frank", "Grace",
         "Henry", "Irene", "Jack", "Karen", "Liam", "Mona", "Nolan",
         "Olga", "Peter", "Quinn", "Rosa", "Steve", "Tina"]
CITIES = ["Paris", "London", "Berlin", "Madrid", "Rome", "Vienna",
          "Oslo", "Dublin", "Lisbon", "Prague"]
MONTH_NAMES = ["January", "February", "March", "April", "June", "July",
               "August", "September", "October", "November", "December"]

_TEMPLATES = [
    "{name} met {name2} in {city} on {month} {day}, {year}.",
    "{name} said the company earned {amount} million dollars in {year}.",
    "{name} visited {city} and praised {poss} team after the ceremony.",
    "He lost his keys near the old station in {city}.",
    "She was late because the train had stopped outside {city}.",
    "{name} did not attend the meeting held in {city} last {month}.",
    "The mayor of {city} thanked {name} for her work on {month} {day}, {year}.",
    "{name} will travel to {city} with {name2} in {month}.",
    "Revenue rose {pct}% in {year} according to {name}.",
    "{name} has worked in {city} since {year} and he still likes it.",
    "She gave her old books to {name} before leaving {city}.",
    "{name} was born in {city} in {year} and moved away in {year2}.",
]


def synthetic_document(doc_id: str, rng: random.Random,
                       n_sentences: int = 10) -> Document:
    sentences = []
    for _ in range(n_sentences):
        template = rng.choice(_TEMPLATES)
        name, name2 = rng.sample(NAMES, 2)
        year = rng.randint(1990, 2020)
        sentence = template.format(
            name=name, name2=name2, city=rng.choice(CITIES),
            month=rng.choice(MONTH_NAMES), day=rng.randint(1, 28),
            year=year, year2=year + rng.randint(1, 10),
            amount=rng.randint(2, 90), pct=rng.randint(1, 40),
            poss=rng.choice(["his", "her"]))
        sentences.append(sentence)
    return Document.from_text(doc_id, " ".join(sentences))


def synthetic_corpus(n_docs: int, seed: int = 7,
                     n_sentences: int = 10) -> list[Document]:
    rng = random.Random(seed)
    return [synthetic_document(f"doc{i:04d}", rng, n_sentences)
            for i in range(n_docs)]


class FakeRng:
    """random.Random stand-in fed from fixed sequences."""

    def __init__(self, randoms=(), randranges=()):
        self._randoms = list(randoms)
        self._randranges = list(randranges)

    def random(self):
        return self._randoms.pop(0) if self._randoms else 0.0

    def randrange(self, n):
        return self._randranges.pop(0) % n if self._randranges else 0


@pytest.fixture
def small_corpus():
    return synthetic_corpus(5, seed=3)
