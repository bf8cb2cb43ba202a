"""tf, idf and tf*idf term weights."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

TF_VARIANTS = ("raw", "max_normalized", "logarithmic")

# CLI / config tokens -> internal variant names
TF_TOKENS = {"raw": "raw", "maxnorm": "max_normalized", "log": "logarithmic"}
IDF_TOKENS = {"on": True, "off": False}


@dataclass(frozen=True)
class TermStats:
    """Frequency of one term in a document, plus the document's largest tf."""

    tf: int
    tf_max: int = 1


@dataclass(frozen=True)
class WeightingScheme:
    tf_variant: str = "raw"
    idf_enabled: bool = True

    def __post_init__(self):
        if self.tf_variant not in TF_VARIANTS:
            raise ValueError(f"unknown tf variant {self.tf_variant!r}; expected one of {TF_VARIANTS}")

    @classmethod
    def from_tokens(cls, tf: str = "raw", idf: str = "on") -> "WeightingScheme":
        """Build a scheme from ``tf=raw|maxnorm|log`` and ``idf=on|off`` tokens."""
        try:
            return cls(TF_TOKENS[tf], IDF_TOKENS[idf])
        except KeyError as exc:
            raise ValueError(f"bad scheme token {exc.args[0]!r}") from None

    @property
    def tokens(self) -> tuple[str, str]:
        tf = {v: k for k, v in TF_TOKENS.items()}[self.tf_variant]
        return tf, "on" if self.idf_enabled else "off"

    def __str__(self) -> str:
        tf, idf = self.tokens
        return f"tf={tf},idf={idf}"


def idf(N: int, n: int) -> float:
    """Inverse document frequency ``ln(N / n)``.

    A term that never occurs in the corpus (``n == 0``) gets 0: it still
    spans a dimension of the query, it just never contributes to a score.
    """
    if N < 1:
        raise ValueError("idf is undefined for an empty corpus (N = 0)")
    if n < 0 or n > N:
        raise ValueError(f"document frequency {n} outside [0, {N}]")
    if n == 0:
        return 0.0
    return math.log(N / n)


def tf_weight(stats: TermStats, variant: str) -> float:
    tf = stats.tf
    if tf < 0:
        raise ValueError("tf must be >= 0")
    if variant == "raw":
        return float(tf)
    if variant == "max_normalized":
        if stats.tf_max < 1:
            raise ValueError("tf_max must be >= 1 for max normalization")
        return 0.5 + 0.5 * tf / stats.tf_max
    if variant == "logarithmic":
        return math.log(tf) + 1.0 if tf > 0 else 0.0
    raise ValueError(f"unknown tf variant {variant!r}")


def tfidf(stats: TermStats, N: int, n: int, scheme: WeightingScheme) -> float:
    # An absent term weighs zero under every variant, including the 0.5
    # floor of max normalization.
    if stats.tf == 0:
        return 0.0
    w = tf_weight(stats, scheme.tf_variant)
    if scheme.idf_enabled:
        w *= idf(N, n)
    return w


def weigh(
    term_counts: Mapping[str, int],
    N: int,
    df: Mapping[str, int],
    scheme: WeightingScheme,
) -> dict[str, float]:
    """Weight every term of a bag of counts; ``df`` lookups default to 0."""
    if not term_counts:
        return {}
    tf_max = max(term_counts.values())
    return {
        term: tfidf(TermStats(tf, tf_max), N, df.get(term, 0), scheme)
        for term, tf in term_counts.items()
    }
