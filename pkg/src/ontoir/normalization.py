"""Length normalization of weight vectors: cosine and pivoted.

Pivoted normalization replaces a document's cosine length ``L`` by the
affine divisor ``slope * L + (1 - slope) * pivot``. Documents shorter than
the pivot get a larger divisor, longer ones a smaller one, which lifts long
documents in the ranking.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

logger = logging.getLogger(__name__)

DEFAULT_SLOPE = 0.75
DEFAULT_BINS = 10


class ZeroLengthError(ValueError):
    """Raised when a zero vector is asked to be normalized."""

    def __init__(self, message: str = "zero-length vector"):
        super().__init__(message)


@dataclass(frozen=True)
class PivotParams:
    slope: float = DEFAULT_SLOPE
    pivot: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.slope <= 1.0):
            raise ValueError(f"slope must be in (0, 1], got {self.slope}")
        if not (self.pivot > 0.0 and math.isfinite(self.pivot)):
            raise ValueError(f"pivot must be a positive number, got {self.pivot}")


def vector_length(weights: Mapping[str, float] | Sequence[float]) -> float:
    values = weights.values() if isinstance(weights, Mapping) else weights
    return math.sqrt(math.fsum(w * w for w in values))


def _scale(weights, divisor):
    if isinstance(weights, Mapping):
        return {t: w / divisor for t, w in weights.items()}
    return [w / divisor for w in weights]


def cosine_normalize(weights):
    """Divide every component by the Euclidean length of the vector.

    Accepts a sparse ``{term: weight}`` mapping or a dense sequence and
    returns the same kind.
    """
    length = vector_length(weights)
    if length == 0.0:
        raise ZeroLengthError()
    return _scale(weights, length)


def pivoted_factor(old_norm: float, params: PivotParams) -> float:
    return params.slope * old_norm + (1.0 - params.slope) * params.pivot


def pivoted_normalize(weights, params: PivotParams):
    length = vector_length(weights)
    if length == 0.0:
        raise ZeroLengthError()
    return _scale(weights, pivoted_factor(length, params))


# ---------------------------------------------------------------------------
# Pivot estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurveBin:
    """One length bin of the relevance / retrieval curves."""

    mean_norm: float
    p_relevance: float
    p_retrieval: float
    size: int = 0

    @property
    def diff(self) -> float:
        return self.p_relevance - self.p_retrieval


@dataclass(frozen=True)
class PivotEstimate:
    pivot: float
    fallback: bool


def estimate_pivot(bins: Sequence[CurveBin], fallback: float | None = None) -> PivotEstimate:
    """Find where P(relevance) and P(retrieval) cross.

    ``bins`` must be ordered by increasing ``mean_norm``. The first crossing
    wins: either a bin whose two probabilities are exactly equal, or a sign
    change of ``p_relevance - p_retrieval`` between adjacent bins, which is
    located by linear interpolation. Curves that coincide everywhere, or
    never cross, yield ``fallback`` (default: the size-weighted mean of the
    bin norms) with ``PivotEstimate.fallback`` set.
    """
    if len(bins) < 2:
        raise ValueError("pivot estimation needs at least 2 bins")
    norms = [b.mean_norm for b in bins]
    if any(b > a for a, b in zip(norms[1:], norms)):
        raise ValueError("bins must be sorted by mean_norm")

    diffs = [b.diff for b in bins]
    if any(d != 0.0 for d in diffs):
        for i, d in enumerate(diffs):
            if d == 0.0:
                return PivotEstimate(norms[i], False)
            if i + 1 < len(diffs) and d * diffs[i + 1] < 0.0:
                x0, x1, d1 = norms[i], norms[i + 1], diffs[i + 1]
                return PivotEstimate(x0 + (x1 - x0) * d / (d - d1), False)

    if fallback is None:
        sizes = [b.size for b in bins]
        if sum(sizes) > 0:
            fallback = math.fsum(n * s for n, s in zip(norms, sizes)) / sum(sizes)
        else:
            fallback = math.fsum(norms) / len(norms)
    logger.warning("relevance and retrieval curves do not cross; using mean length %.6f as pivot", fallback)
    return PivotEstimate(fallback, True)
