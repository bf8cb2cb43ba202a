"""Tokenizing, stop-word filtering and suffix stripping.

Every document and every query goes through the same three steps so that
surface variants such as ``played`` / ``playing`` / ``plays`` land on one
indexed term.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

# \w also matches "_", which we treat as a separator.
_WORD_RE = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class Token:
    surface: str
    stem: str
    position: int


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into lowercase letter/digit runs.

    >>> [t.surface for t in tokenize("Play PLAYED playing!")]
    ['play', 'played', 'playing']
    """
    tokens = []
    for position, match in enumerate(_WORD_RE.finditer(text)):
        surface = match.group(0).lower()
        tokens.append(Token(surface, stem(surface), position))
    return tokens


def remove_stopwords(tokens: Iterable[Token], stoplist: Iterable[str]) -> list[Token]:
    stoplist = stoplist if isinstance(stoplist, (set, frozenset)) else set(stoplist)
    return [t for t in tokens if t.stem not in stoplist]


# ---------------------------------------------------------------------------
# Stemmer: Porter steps 1a, 1b and 5.
#
# Step 1c (y -> i) is left out on purpose, it would turn "play" into "plai".
# Steps 2-4 (derivational suffixes) are out of scope.
# ---------------------------------------------------------------------------

_VOWELS = frozenset("aeiou")


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem_: str) -> int:
    """Number of VC sequences in ``stem_`` (Porter's m)."""
    m = 0
    prev_vowel = False
    for i in range(len(stem_)):
        cons = _is_consonant(stem_, i)
        if cons and prev_vowel:
            m += 1
        prev_vowel = not cons
    return m


def _has_vowel(stem_: str) -> bool:
    return any(not _is_consonant(stem_, i) for i in range(len(stem_)))


def _ends_double_consonant(word: str) -> bool:
    return len(word) >= 2 and word[-1] == word[-2] and _is_consonant(word, len(word) - 1)


def _ends_cvc(word: str) -> bool:
    n = len(word)
    return (
        n >= 3
        and _is_consonant(word, n - 3)
        and not _is_consonant(word, n - 2)
        and _is_consonant(word, n - 1)
        and word[-1] not in "wxy"
    )


def _step1a(word: str) -> str:
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith("ies"):
        return word[:-2]
    if word.endswith("ss"):
        return word
    if word.endswith("s"):
        return word[:-1]
    return word


def _step1b(word: str) -> str:
    if word.endswith("eed"):
        if _measure(word[:-3]) > 0:
            return word[:-1]
        return word
    for suffix in ("ed", "ing"):
        if word.endswith(suffix):
            base = word[: -len(suffix)]
            if not _has_vowel(base):
                return word
            if base.endswith(("at", "bl", "iz")):
                return base + "e"
            if _ends_double_consonant(base) and base[-1] not in "lsz":
                return base[:-1]
            if _measure(base) == 1 and _ends_cvc(base):
                return base + "e"
            return base
    return word


def _step5(word: str) -> str:
    if word.endswith("e"):
        base = word[:-1]
        m = _measure(base)
        if m > 1 or (m == 1 and not _ends_cvc(base)):
            word = base
    if word.endswith("ll") and _measure(word) > 1:
        word = word[:-1]
    return word


def _strip_once(word: str) -> str:
    if len(word) <= 2:
        return word
    return _step5(_step1b(_step1a(word)))


def stem(word: str) -> str:
    """Strip inflectional suffixes from a lowercase word.

    Steps are re-applied until nothing changes, which makes the function
    idempotent (``stem(stem(w)) == stem(w)``). Every rewrite shortens the
    word, so the loop terminates.

    >>> stem("played"), stem("playing"), stem("plays"), stem("run")
    ('play', 'play', 'play', 'run')
    """
    while True:
        stripped = _strip_once(word)
        if stripped == word:
            return word
        word = stripped


# ---------------------------------------------------------------------------
# Stop words
# ---------------------------------------------------------------------------

_ENGLISH_STOPWORDS = """
a about above after again against all am an and any are as at be because been
before being below between both but by can could did do does doing down during
each few for from further had has have having he her here hers herself him
himself his how i if in into is it its itself just me more most my myself no
nor not of off on once only or other our ours ourselves out over own same she
should so some such than that the their theirs them themselves then there these
they this those through to too under until up very was we were what when where
which while who whom why will with would you your yours yourself yourselves
""".split()


def stopword_set(words: Iterable[str]) -> frozenset[str]:
    """Close a word list under :func:`stem`.

    Filtering happens on stems, so ``this`` has to be caught as ``thi`` too.
    """
    words = {w.strip().lower() for w in words if w.strip()}
    return frozenset(words | {stem(w) for w in words})


DEFAULT_STOPWORDS = stopword_set(_ENGLISH_STOPWORDS)


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Read a stop-word file: one word per line, ``#`` starts a comment."""
    words = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                words.append(line)
    return stopword_set(words)


def analyze(text: str, stoplist: Iterable[str] = DEFAULT_STOPWORDS) -> list[Token]:
    """tokenize + remove_stopwords, the bag-of-words front end."""
    return remove_stopwords(tokenize(text), stoplist)


def stems(tokens: Sequence[Token]) -> list[str]:
    return [t.stem for t in tokens]
