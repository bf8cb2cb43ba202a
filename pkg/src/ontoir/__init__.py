"""Vector-space retrieval with pivoted length normalization and an ontology layer."""

__version__ = "0.1.0"

from .index import Document, InvertedIndex, read_corpus
from .normalization import (
    CurveBin,
    PivotParams,
    cosine_normalize,
    estimate_pivot,
    pivoted_factor,
    pivoted_normalize,
    vector_length,
)
from .ontology import DocVector, DomainOntology, abstract_to_level, dis, extract_phrases, load_ontology
from .pipeline import Pipeline
from .search import Query, RankedList, Searcher, precision_recall, process_query, rank, score
from .textprep import Token, remove_stopwords, stem, tokenize
from .tree2owl import DecisionNode, OwlDocument, parse_tree, serialize_owl, tree_to_owl
from .weighting import TermStats, WeightingScheme, idf, tf_weight, tfidf
