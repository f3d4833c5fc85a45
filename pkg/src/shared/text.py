"""
Text helpers shared by coverage detection, reward signals and evaluation.

Important words are lower-cased tokens that are not in STOPWORDS and are
longer than two characters.
"""
import re
from functools import lru_cache
from typing import FrozenSet, List, Tuple

WORD_PATTERN = re.compile(r"[a-z0-9]+(?:'[a-z]+)?")
SENTENCE_BOUNDARY = re.compile(r"(?<=[.!?])\s+")

STOPWORDS: FrozenSet[str] = frozenset(
    """
    a an the and or but nor yet so of in on at to for with by from as into about
    is are was were be been being am do does did have has had having
    i me my you your it its this that these those there here
    any some what when where how which who whom can could would should will
    not no more other else than then very also just
    """.split()
)


@lru_cache(maxsize=65536)
def tokenize(text: str) -> Tuple[str, ...]:
    """Lower-cased word tokens of ``text``."""
    return tuple(WORD_PATTERN.findall(text.lower()))


def is_important(word: str) -> bool:
    return len(word) > 2 and word not in STOPWORDS


@lru_cache(maxsize=65536)
def important_words(text: str) -> FrozenSet[str]:
    """Content words of ``text`` used by the multi-word and keyword rules."""
    return frozenset(word for word in tokenize(text) if is_important(word))


def keyword_overlap(phrase: str, text: str) -> float:
    """Fraction of the phrase's important words that occur in ``text``."""
    wanted = important_words(phrase)
    if not wanted:
        return 0.0
    return len(wanted & important_words(text)) / len(wanted)


def split_sentences(text: str) -> List[str]:
    return [part.strip() for part in SENTENCE_BOUNDARY.split(text.strip()) if part.strip()]


def normalize_statement(text: str) -> str:
    """Case- and punctuation-insensitive form used for exact statement equality."""
    return " ".join(tokenize(text))
