"""Inverted index over a document collection.

The index has a two-phase lifecycle: documents are added while it is in
build mode, then :meth:`InvertedIndex.freeze` fixes the corpus statistics
(``N`` and per-term document frequency) that idf and the pivot depend on.
After freezing the index is read-only and can be shared between threads.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Sequence

from .textprep import Token
from .weighting import WeightingScheme, weigh

SNAPSHOT_FORMAT = "ontoir-index"
SNAPSHOT_VERSION = 1


class IndexStateError(RuntimeError):
    """Operation not allowed in the index's current build/frozen state."""


class SnapshotError(ValueError):
    """Snapshot file is malformed or written by an incompatible version."""


@dataclass
class Document:
    doc_id: int
    source_name: str
    term_counts: dict[str, int] = field(default_factory=dict)

    @property
    def unique_terms(self) -> int:
        return len(self.term_counts)

    @property
    def total_tokens(self) -> int:
        return sum(self.term_counts.values())

    @property
    def tf_max(self) -> int:
        return max(self.term_counts.values(), default=0)


@dataclass
class CorpusStats:
    N: int = 0
    df: dict[str, int] = field(default_factory=dict)


class InvertedIndex:
    def __init__(self, meta: Mapping[str, Any] | None = None):
        self.documents: list[Document] = []
        self.postings: dict[str, list[tuple[int, int]]] = {}
        self.stats = CorpusStats()
        # Opaque, JSON-serializable settings stored alongside the snapshot
        # (e.g. the analysis pipeline the documents went through).
        self.meta: dict[str, Any] = dict(meta or {})
        self._frozen = False
        self._term_space: list[str] | None = None

    def __repr__(self):
        state = "frozen" if self._frozen else "building"
        return f"InvertedIndex(N={self.N}, terms={len(self.postings)}, {state})"

    @property
    def N(self) -> int:
        return self.stats.N

    @property
    def frozen(self) -> bool:
        return self._frozen

    # -- build -------------------------------------------------------------

    def add_document(self, tokens: Sequence[Token], source_name: str) -> int:
        """Count the stems of ``tokens`` and store them as a new document."""
        return self.add_counts(Counter(t.stem for t in tokens), source_name)

    def add_counts(self, term_counts: Mapping[str, int], source_name: str) -> int:
        if self._frozen:
            raise IndexStateError("cannot add documents to a frozen index")
        doc_id = self.stats.N
        counts = {}
        for term, tf in term_counts.items():
            tf = int(tf)
            if tf < 0:
                raise ValueError(f"negative count for term {term!r}")
            if tf > 0:
                counts[term] = tf
        self.documents.append(Document(doc_id, source_name, counts))
        # doc_ids grow monotonically, so appending keeps postings sorted.
        for term, tf in counts.items():
            self.postings.setdefault(term, []).append((doc_id, tf))
            self.stats.df[term] = self.stats.df.get(term, 0) + 1
        self.stats.N += 1
        return doc_id

    def freeze(self) -> "InvertedIndex":
        self._frozen = True
        self._term_space = sorted(self.postings)
        return self

    def _require_frozen(self):
        if not self._frozen:
            raise IndexStateError("index must be frozen first")

    # -- read --------------------------------------------------------------

    def term_space(self) -> list[str]:
        """Union of all document terms in lexicographic order."""
        if self._term_space is not None:
            return list(self._term_space)
        return sorted(self.postings)

    def document(self, doc_id: int) -> Document:
        if not (0 <= doc_id < self.N):
            raise IndexError(f"unknown doc_id {doc_id}")
        return self.documents[doc_id]

    def document_frequency(self, term: str) -> int:
        self._require_frozen()
        return self.stats.df.get(term, 0)

    def doc_weights(self, doc_id: int, scheme: WeightingScheme) -> dict[str, float]:
        """Sparse weighted vector of one document."""
        self._require_frozen()
        doc = self.document(doc_id)
        return weigh(doc.term_counts, self.N, self.stats.df, scheme)

    def matrix_row(self, doc_id: int, scheme: WeightingScheme) -> list[float]:
        """Dense row of the document-by-term matrix; absent terms weigh 0."""
        weights = self.doc_weights(doc_id, scheme)
        return [weights.get(term, 0.0) for term in self.term_space()]

    def iter_postings(self, term: str) -> Iterator[tuple[int, int]]:
        return iter(self.postings.get(term, ()))

    # -- persistence -------------------------------------------------------

    def to_json(self) -> str:
        self._require_frozen()
        payload = {
            "format": SNAPSHOT_FORMAT,
            "version": SNAPSHOT_VERSION,
            "meta": self.meta,
            "documents": [
                {"id": d.doc_id, "source": d.source_name, "terms": d.term_counts}
                for d in self.documents
            ],
        }
        return json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "InvertedIndex":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SnapshotError(f"snapshot is not valid JSON: {exc}") from None
        if not isinstance(payload, dict) or payload.get("format") != SNAPSHOT_FORMAT:
            raise SnapshotError("not an index snapshot")
        if payload.get("version") != SNAPSHOT_VERSION:
            raise SnapshotError(
                f"snapshot version {payload.get('version')!r} is not supported (expected {SNAPSHOT_VERSION})"
            )
        index = cls(meta=payload.get("meta") or {})
        for expected_id, record in enumerate(payload["documents"]):
            if record["id"] != expected_id:
                raise SnapshotError(f"document ids out of sequence at {record['id']}")
            index.add_counts(record["terms"], record["source"])
        return index.freeze()

    def save(self, path: str | Path):
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "InvertedIndex":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Corpus ingestion
# ---------------------------------------------------------------------------


def read_corpus(path: str | Path) -> list[tuple[str, str]]:
    """Read ``(source_name, text)`` pairs.

    ``path`` is either a directory, in which every regular non-hidden file
    is one document named after the file, or a line-delimited JSON file
    whose records carry ``id`` and ``text`` fields.
    """
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.is_file() and not p.name.startswith("."))
        return [(p.name, p.read_text(encoding="utf-8", errors="replace")) for p in files]
    if path.is_file():
        return list(_read_records(path))
    raise FileNotFoundError(f"corpus not found: {path}")


def _read_records(path: Path) -> Iterable[tuple[str, str]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                yield str(record["id"]), str(record["text"])
            except (json.JSONDecodeError, KeyError, TypeError):
                raise ValueError(f"{path}:{lineno}: expected a JSON object with 'id' and 'text'") from None
