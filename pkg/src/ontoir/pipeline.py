"""Text -> term counts, shared by indexing, querying and extraction."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Any

from .ontology import DocVector, DomainOntology, extract_phrases, parse_ontology
from .textprep import DEFAULT_STOPWORDS, remove_stopwords, stopword_set, tokenize


@dataclass(frozen=True)
class Pipeline:
    stoplist: frozenset[str] = DEFAULT_STOPWORDS
    ontology: DomainOntology | None = None
    abstraction_level: int | None = None

    def doc_vector(self, text: str, doc_id=None) -> DocVector:
        tokens = tokenize(text)
        if self.ontology is not None:
            return extract_phrases(tokens, self.ontology, self.abstraction_level, stoplist=self.stoplist, doc_id=doc_id)
        counts = Counter(t.stem for t in remove_stopwords(tokens, self.stoplist))
        return DocVector(doc_id, sorted((t, float(n)) for t, n in counts.items()))

    def term_counts(self, text: str) -> dict[str, int]:
        return {term: int(w) for term, w in self.doc_vector(text).entries}

    # Stored in the index snapshot so queries are analyzed like documents.
    def to_meta(self) -> dict[str, Any]:
        return {
            "stopwords": sorted(self.stoplist),
            "ontology": None if self.ontology is None else self.ontology.to_lines(),
            "abstraction_level": self.abstraction_level,
        }

    @classmethod
    def from_meta(cls, meta: dict[str, Any] | None) -> "Pipeline":
        if not meta:
            return cls()
        lines = meta.get("ontology")
        return cls(
            stoplist=stopword_set(meta.get("stopwords", DEFAULT_STOPWORDS)),
            ontology=None if lines is None else parse_ontology(lines, source="<snapshot>"),
            abstraction_level=meta.get("abstraction_level"),
        )
