"""Query processing, scoring, ranking and evaluation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .index import InvertedIndex, IndexStateError
from .normalization import CurveBin, PivotEstimate, PivotParams, DEFAULT_SLOPE, estimate_pivot, pivoted_factor, vector_length
from .ontology import DocVector, DomainOntology
from .pipeline import Pipeline
from .textprep import DEFAULT_STOPWORDS
from .weighting import WeightingScheme, weigh

NORMS = ("cosine", "pivoted")
DEFAULT_TOP_R = 10


@dataclass
class Query:
    query_id: str | int | None
    vector: DocVector

    @property
    def term_counts(self) -> dict[str, int]:
        return {t: int(w) for t, w in self.vector.entries}


@dataclass
class RankedList:
    query_id: str | int | None
    hits: list[tuple[int, float]] = field(default_factory=list)

    @property
    def doc_ids(self) -> list[int]:
        return [d for d, _ in self.hits]


def process_query(
    text: str,
    index: InvertedIndex,
    ontology: DomainOntology | None = None,
    k: int | None = None,
    *,
    stoplist: Iterable[str] = DEFAULT_STOPWORDS,
    query_id=None,
) -> Query:
    """Analyze query text exactly like a document.

    Terms unknown to the corpus stay in the vector; they weigh nothing at
    scoring time because their idf is 0.
    """
    if not index.frozen:
        raise IndexStateError("index must be frozen first")
    pipeline = Pipeline(frozenset(stoplist), ontology, k)
    return Query(query_id, pipeline.doc_vector(text, doc_id=query_id))


def mean_cosine_length(index: InvertedIndex, scheme: WeightingScheme) -> float:
    """Average Euclidean length of the non-zero document vectors (1.0 if none)."""
    return Searcher(index, scheme).mean_length


class Searcher:
    """Scores queries against one frozen index under a fixed configuration.

    Document weights and lengths are computed once here; a Searcher is
    read-only afterwards and can serve queries from several threads.
    """

    def __init__(
        self,
        index: InvertedIndex,
        scheme: WeightingScheme | None = None,
        norm: str = "cosine",
        params: PivotParams | None = None,
    ):
        if not index.frozen:
            raise IndexStateError("index must be frozen first")
        if norm not in NORMS:
            raise ValueError(f"unknown norm {norm!r}; expected one of {NORMS}")
        self.index = index
        self.scheme = scheme or WeightingScheme()
        self.norm = norm
        self.doc_weights = [index.doc_weights(d, self.scheme) for d in range(index.N)]
        self.lengths = [vector_length(w) for w in self.doc_weights]
        nonzero = [x for x in self.lengths if x > 0.0]
        self.mean_length = math.fsum(nonzero) / len(nonzero) if nonzero else 1.0
        if norm == "pivoted" and params is None:
            params = PivotParams(DEFAULT_SLOPE, self.mean_length)
        self.params = params
        self.divisors = [self._divisor(x) for x in self.lengths]

    def _divisor(self, length: float) -> float:
        if length == 0.0:
            return 0.0
        if self.norm == "pivoted":
            return pivoted_factor(length, self.params)
        return length

    def query_weights(self, query: Query) -> dict[str, float]:
        return weigh(query.term_counts, self.index.N, self.index.stats.df, self.scheme)

    def score(self, query: Query, doc_id: int, _qw: Mapping[str, float] | None = None) -> float:
        self.index.document(doc_id)
        divisor = self.divisors[doc_id]
        if divisor == 0.0:
            return 0.0
        qw = self.query_weights(query) if _qw is None else _qw
        dw = self.doc_weights[doc_id]
        return math.fsum(w * dw[t] for t, w in sorted(qw.items()) if t in dw) / divisor

    def rank(self, query: Query, top_r: int | None = DEFAULT_TOP_R) -> RankedList:
        """Documents with a positive score, best first, ties by doc_id."""
        if top_r is not None and top_r < 1:
            raise ValueError("top_r must be >= 1")
        qw = self.query_weights(query)
        candidates = set()
        for term, w in qw.items():
            if w != 0.0:
                candidates.update(d for d, _ in self.index.iter_postings(term))
        scored = [(d, self.score(query, d, qw)) for d in candidates]
        hits = sorted(((d, s) for d, s in scored if s > 0.0), key=lambda h: (-h[1], h[0]))
        return RankedList(query.query_id, hits[:top_r] if top_r is not None else hits)


def score(query: Query, doc_id: int, index: InvertedIndex, scheme: WeightingScheme, norm: str = "cosine", params: PivotParams | None = None) -> float:
    return Searcher(index, scheme, norm, params).score(query, doc_id)


def rank(query: Query, index: InvertedIndex, scheme: WeightingScheme, norm: str = "cosine", params: PivotParams | None = None, top_r: int = DEFAULT_TOP_R) -> RankedList:
    return Searcher(index, scheme, norm, params).rank(query, top_r)


def precision_recall(ranked: RankedList, relevant: Iterable[int]) -> tuple[float, float]:
    retrieved = set(ranked.doc_ids)
    relevant = set(relevant)
    hit = len(retrieved & relevant)
    precision = hit / len(retrieved) if retrieved else 0.0
    recall = hit / len(relevant) if relevant else 0.0
    return precision, recall


# ---------------------------------------------------------------------------
# Relevance / retrieval curves for pivot fitting
# ---------------------------------------------------------------------------


@dataclass
class Curves:
    bins: list[CurveBin]
    mean_norm: float
    top_r: int
    n_queries: int


def _equal_count_bins(n: int, b: int) -> list[range]:
    base, extra = divmod(n, b)
    out, start = [], 0
    for i in range(b):
        size = base + (1 if i < extra else 0)
        out.append(range(start, start + size))
        start += size
    return out


def relevance_retrieval_curves(
    searcher: Searcher,
    queries: Sequence[Query],
    judgments: Mapping[object, Mapping[int, int]],
    bins: int = 10,
    top_r: int = DEFAULT_TOP_R,
) -> Curves:
    """Bin documents by cosine length and measure P(relevance) and P(retrieval).

    Documents are sorted by length (then doc_id) and cut into ``bins``
    equal-count groups. Over every judged query ``q`` and bin ``B``::

        P(relevance) = #{(q, d): d in B, d judged relevant to q} / (|B| * |Q|)
        P(retrieval) = #{(q, d): d in B, d in the top_r of q}     / (|B| * |Q|)

    Retrieval uses the searcher's own norm, so fit with a cosine searcher
    to obtain the pivot for the cosine lengths.
    """
    if bins < 2:
        raise ValueError("at least 2 bins are required")
    judged = [q for q in queries if judgments.get(q.query_id)]
    if not judged:
        raise ValueError("no judged queries")
    n_docs = searcher.index.N
    if n_docs < bins:
        raise ValueError(f"{n_docs} documents cannot fill {bins} bins")

    # cosine length is the "old" normalization regardless of searcher.norm
    lengths = searcher.lengths
    order = sorted(range(n_docs), key=lambda d: (lengths[d], d))
    bin_of = {}
    groups = _equal_count_bins(n_docs, bins)
    for b, positions in enumerate(groups):
        for p in positions:
            bin_of[order[p]] = b

    rel = [0] * bins
    retr = [0] * bins
    for q in judged:
        for d, label in judgments[q.query_id].items():
            if label and d in bin_of:
                rel[bin_of[d]] += 1
        for d in searcher.rank(q, top_r).doc_ids:
            retr[bin_of[d]] += 1

    out = []
    for b, positions in enumerate(groups):
        docs = [order[p] for p in positions]
        denom = len(docs) * len(judged)
        out.append(
            CurveBin(
                mean_norm=math.fsum(lengths[d] for d in docs) / len(docs),
                p_relevance=rel[b] / denom,
                p_retrieval=retr[b] / denom,
                size=len(docs),
            )
        )
    return Curves(out, math.fsum(lengths) / n_docs, top_r, len(judged))


def fit_pivot(
    searcher: Searcher,
    queries: Sequence[Query],
    judgments: Mapping[object, Mapping[int, int]],
    bins: int = 10,
    top_r: int = DEFAULT_TOP_R,
) -> tuple[PivotEstimate, Curves]:
    curves = relevance_retrieval_curves(searcher, queries, judgments, bins, top_r)
    return estimate_pivot(curves.bins, fallback=curves.mean_norm), curves
