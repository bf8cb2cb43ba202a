import itertools
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ontoir.index import IndexStateError, InvertedIndex
from ontoir.normalization import PivotParams, vector_length
from ontoir.search import (
    RankedList,
    Searcher,
    fit_pivot,
    mean_cosine_length,
    precision_recall,
    process_query,
    rank,
    relevance_retrieval_curves,
    score,
)
from ontoir.weighting import WeightingScheme

from conftest import FIXTURE_DOCS, FIXTURE_QUERIES, build_index, dense, make_query
from oracle import dense_rank, dense_scores

VARIANTS = ["raw", "max_normalized", "logarithmic"]
ALL_SCHEMES = [WeightingScheme(v, i) for v in VARIANTS for i in (True, False)]


@pytest.fixture(scope="module")
def fixture_index():
    return build_index(FIXTURE_DOCS)


class TestProcessQuery:
    def test_conflation(self):
        index = build_index([{"play": 1}])
        q = process_query("playing played", index)
        assert q.term_counts == {"play": 2}

    def test_unseen_term_kept_but_scores_nothing(self):
        index = build_index([{"rain": 1, "wind": 2}, {"wind": 1}])
        q = process_query("volcano rain", index)
        assert q.term_counts == {"volcano": 1, "rain": 1}
        s = Searcher(index)
        assert s.query_weights(q)["volcano"] == 0.0
        assert score(q, 0, index, WeightingScheme()) == score(process_query("rain", index), 0, index, WeightingScheme())

    def test_empty(self):
        q = process_query("", build_index([{"a": 1}]))
        assert q.vector.entries == []

    def test_stopwords_removed(self):
        q = process_query("the weather of the day", build_index([{"a": 1}]))
        assert q.term_counts == {"weather": 1, "day": 1}

    def test_requires_frozen(self):
        with pytest.raises(IndexStateError):
            process_query("x", InvertedIndex())

    def test_with_ontology(self, weather_ontology):
        q = process_query("heavy rain", build_index([{"a": 1}]), weather_ontology, 1)
        assert q.term_counts == {"weather": 1}


class TestScore:
    def test_no_overlap(self):
        index = build_index([{"a": 1}, {"b": 2}])
        assert score(make_query({"b": 1}), 0, index, WeightingScheme()) == 0.0

    @pytest.mark.parametrize("variant", VARIANTS)
    def test_self_match_equals_length(self, variant):
        counts = {"x": 3, "y": 1, "z": 2}
        index = build_index([counts])
        scheme = WeightingScheme(variant, False)
        q = make_query(counts)
        # v . (v / |v|) = |v|
        expected = vector_length(Searcher(index, scheme).query_weights(q))
        assert score(q, 0, index, scheme) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("scheme", ALL_SCHEMES, ids=str)
    @pytest.mark.parametrize("norm", ["cosine", "pivoted"])
    def test_matches_dense_oracle(self, scheme, norm):
        docs = [{"a": 2, "b": 1}, {"b": 3, "c": 1, "d": 1}, {"a": 1, "c": 4}]
        terms = ["a", "b", "c", "d"]
        index = build_index(docs)
        qc = {"a": 1, "c": 2}
        expected, _ = dense_scores([dense(d, terms) for d in docs], dense(qc, terms), scheme.tf_variant, scheme.idf_enabled, norm)
        s = Searcher(index, scheme, norm)
        got = [s.score(make_query(qc), d) for d in range(3)]
        np.testing.assert_allclose(got, expected, rtol=1e-12, atol=1e-15)

    def test_zero_length_doc_scores_zero(self):
        index = build_index([{"a": 1}, {"a": 1, "b": 1}, {}])
        q = make_query({"a": 1})
        s = Searcher(index, WeightingScheme("raw", True))
        assert s.score(q, 0) > 0.0
        assert s.score(q, 2) == 0.0
        # a term present everywhere has idf 0, so doc 0 of this corpus has length 0
        flat = Searcher(build_index([{"a": 1}, {"a": 2, "b": 1}]), WeightingScheme("raw", True))
        assert flat.lengths[0] == 0.0 and flat.score(q, 0) == 0.0

    def test_unknown_doc(self):
        with pytest.raises(IndexError):
            score(make_query({"a": 1}), 5, build_index([{"a": 1}]), WeightingScheme())


class TestRank:
    def test_singleton(self):
        index = build_index([{"a": 1}, {"b": 1, "c": 1}, {"c": 2}])
        assert rank(make_query({"a": 1}), index, WeightingScheme(), top_r=10).doc_ids == [0]

    def test_ties_by_doc_id(self):
        docs = [{"z": 1}] * 8
        docs[3] = docs[7] = {"k": 2, "z": 1}
        index = build_index(docs)
        ranked = rank(make_query({"k": 1}), index, WeightingScheme())
        assert ranked.doc_ids == [3, 7]
        assert ranked.hits[0][1] == ranked.hits[1][1]

    def test_deterministic(self, fixture_index):
        q = make_query(FIXTURE_QUERIES[0])
        runs = {repr(rank(q, fixture_index, WeightingScheme(), "pivoted").hits) for _ in range(5)}
        assert len(runs) == 1

    def test_truncation_and_invariants(self, fixture_index):
        s = Searcher(fixture_index, WeightingScheme("logarithmic", True))
        for qc in FIXTURE_QUERIES:
            full = s.rank(make_query(qc), None)
            scores = [sc for _, sc in full.hits]
            assert scores == sorted(scores, reverse=True)
            assert all(sc > 0 for sc in scores)
            assert len(set(full.doc_ids)) == len(full.doc_ids)
            assert s.rank(make_query(qc), 2).hits == full.hits[:2]

    def test_bad_top(self, fixture_index):
        with pytest.raises(ValueError):
            Searcher(fixture_index).rank(make_query({"t00": 1}), 0)

    @pytest.mark.parametrize("scheme", ALL_SCHEMES, ids=str)
    @pytest.mark.parametrize("norm", ["cosine", "pivoted"])
    def test_oracle_equivalence(self, fixture_index, scheme, norm):
        s = Searcher(fixture_index, scheme, norm)
        D = [dense(d) for d in FIXTURE_DOCS]
        for qc in FIXTURE_QUERIES:
            expected = dense_rank(D, dense(qc), scheme.tf_variant, scheme.idf_enabled, norm)
            assert s.rank(make_query(qc), None).doc_ids == expected

    def test_concurrent_queries(self, fixture_index):
        s = Searcher(fixture_index, WeightingScheme("max_normalized", True), "pivoted")
        queries = [make_query(q) for q in FIXTURE_QUERIES] * 20
        serial = [s.rank(q).hits for q in queries]
        with ThreadPoolExecutor(8) as pool:
            assert [r.hits for r in pool.map(s.rank, queries)] == serial

    @pytest.mark.parametrize("variant", ["raw", "max_normalized"])
    @given(factor=st.integers(1, 50))
    def test_query_scaling_invariance(self, fixture_index, variant, factor):
        s = Searcher(fixture_index, WeightingScheme(variant, True))
        for qc in FIXTURE_QUERIES:
            scaled = {t: n * factor for t, n in qc.items()}
            assert s.rank(make_query(scaled), None).doc_ids == s.rank(make_query(qc), None).doc_ids

    def test_log_tf_is_not_scale_invariant(self):
        # ln(c*tf) + 1 is not proportional to ln(tf) + 1, so scaling a query can reorder
        index = build_index([{"a": 10}, {"b": 10}, {"a": 1, "b": 1, "c": 50}])
        s = Searcher(index, WeightingScheme("logarithmic", False))
        weights = [s.query_weights(make_query({"a": 1 * c, "b": 2 * c})) for c in (1, 10)]
        assert weights[0]["b"] / weights[0]["a"] != pytest.approx(weights[1]["b"] / weights[1]["a"])


class TestPivotEffect:
    def test_longer_document_moves_up(self):
        docs = [{"a": 1, "b": 1}, {"a": 3, "c": 3, "d": 3, "e": 3, "f": 3}]
        index = build_index(docs)
        scheme = WeightingScheme("raw", False)
        lengths = Searcher(index, scheme).lengths
        params = PivotParams(0.5, 4.0)
        assert lengths[0] < params.pivot < lengths[1]
        q = make_query({"a": 1})
        cos = Searcher(index, scheme, "cosine").rank(q).doc_ids
        piv = Searcher(index, scheme, "pivoted", params).rank(q).doc_ids
        assert piv.index(1) <= cos.index(1)
        assert cos == [0, 1] and piv == [1, 0]

    def test_default_pivot_is_mean_length(self, fixture_index):
        scheme = WeightingScheme("logarithmic", True)
        s = Searcher(fixture_index, scheme, "pivoted")
        _, lengths = dense_scores([dense(d) for d in FIXTURE_DOCS], dense({}), "logarithmic", True)
        assert s.params.pivot == pytest.approx(lengths.mean(), rel=1e-12)
        assert s.params.slope == 0.75
        assert mean_cosine_length(fixture_index, scheme) == pytest.approx(lengths.mean(), rel=1e-12)


class TestPrecisionRecall:
    def test_half(self):
        assert precision_recall(RankedList("q", [(1, 0.9), (2, 0.5)]), {2, 3}) == (0.5, 0.5)

    def test_perfect(self):
        assert precision_recall(RankedList("q", [(4, 1.0), (5, 0.2)]), {4, 5}) == (1.0, 1.0)

    def test_no_hits(self):
        assert precision_recall(RankedList("q", []), {1}) == (0.0, 0.0)

    def test_no_relevant(self):
        assert precision_recall(RankedList("q", [(1, 1.0)]), set()) == (0.0, 0.0)


def under_retrieval_corpus():
    shorts = [{"q": 1, f"s{i}": 1} for i in range(4)]
    longs = [{"q": 1, **{f"l{i}_{j}": 1 for j in range(8)}} for i in range(4)]
    return build_index(shorts + longs)


class TestCurves:
    def test_all_relevant_all_retrieved(self):
        index = build_index([{"a": 1, f"x{i}": i + 1} for i in range(6)])
        s = Searcher(index, WeightingScheme("raw", False))
        q = make_query({"a": 1}, "q1")
        curves = relevance_retrieval_curves(s, [q], {"q1": {d: 1 for d in range(6)}}, bins=3, top_r=10)
        assert [(b.p_relevance, b.p_retrieval) for b in curves.bins] == [(1.0, 1.0)] * 3

    def test_no_judgments(self):
        s = Searcher(build_index([{"a": 1}, {"b": 1}]))
        with pytest.raises(ValueError, match="judged"):
            relevance_retrieval_curves(s, [make_query({"a": 1}, "q1")], {}, bins=2)

    def test_bins_validated(self):
        s = Searcher(build_index([{"a": 1}, {"b": 1}]))
        q = make_query({"a": 1}, "q1")
        with pytest.raises(ValueError):
            relevance_retrieval_curves(s, [q], {"q1": {0: 1}}, bins=1)
        with pytest.raises(ValueError):
            relevance_retrieval_curves(s, [q], {"q1": {0: 1}}, bins=3)

    def test_long_documents_under_retrieved(self):
        index = under_retrieval_corpus()
        s = Searcher(index, WeightingScheme("raw", False))
        judgments = {"q1": {0: 1, 4: 1, 5: 1, 6: 1, 7: 1}}
        curves = relevance_retrieval_curves(s, [make_query({"q": 1}, "q1")], judgments, bins=2, top_r=4)
        short_bin, long_bin = curves.bins
        # counted by hand: shorts 1/4 relevant, 4/4 retrieved; longs 4/4 relevant, 0/4 retrieved
        assert (short_bin.p_relevance, short_bin.p_retrieval) == (0.25, 1.0)
        assert (long_bin.p_relevance, long_bin.p_retrieval) == (1.0, 0.0)
        assert long_bin.p_retrieval < long_bin.p_relevance
        assert short_bin.mean_norm == pytest.approx(math.sqrt(2)) and long_bin.mean_norm == pytest.approx(3.0)

        estimate, _ = fit_pivot(s, [make_query({"q": 1}, "q1")], judgments, bins=2, top_r=4)
        # zero of the line through (sqrt 2, -0.75) and (3, +1)
        x0, x1 = math.sqrt(2), 3.0
        assert estimate.pivot == pytest.approx(x0 + (x1 - x0) * 0.75 / 1.75, abs=1e-12)
        assert not estimate.fallback

    def test_unequal_bins(self):
        index = build_index([{"a": 1, "b": i + 1} for i in range(7)])
        s = Searcher(index, WeightingScheme("raw", False))
        curves = relevance_retrieval_curves(s, [make_query({"a": 1}, "q")], {"q": {0: 1}}, bins=3)
        assert [b.size for b in curves.bins] == [3, 2, 2]
        norms = [b.mean_norm for b in curves.bins]
        assert norms == sorted(norms)
