"""Domain ontology and the ontology-based phrase extractor.

An ontology file holds one concept per line::

    <concept_id> TAB <parent_id or -> TAB <name> TAB <synonym>[,<synonym>...]

Blank lines and lines starting with ``#`` are ignored. Synonyms are phrases
of one to four words. The extractor scans a token stream for those phrases,
picks one concept per match with :func:`dis`, lifts it to the requested
abstraction level and emits ``(term, weight)`` pairs.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .textprep import Token, stem, tokenize

MAX_PHRASE_TOKENS = 4


class OntologyError(ValueError):
    def __init__(self, message: str, lineno: int | None = None, source: str = "<ontology>"):
        self.lineno = lineno
        where = f"{source}:{lineno}: " if lineno is not None else f"{source}: "
        super().__init__(where + message)


def normalize_phrase(phrase: str) -> str:
    """Canonical form of a phrase: lowercase tokens joined by single spaces."""
    return " ".join(t.surface for t in tokenize(phrase))


@dataclass(frozen=True)
class Concept:
    concept_id: int
    name: str
    parent: int | None
    depth: int
    synonyms: frozenset[str]

    @property
    def term(self) -> str:
        """The index term a match on this concept produces."""
        return normalize_phrase(self.name).replace(" ", "_")


@dataclass
class DomainOntology:
    concepts: dict[int, Concept]
    phrase_index: dict[str, set[int]]
    children: dict[int, list[int]] = field(default_factory=dict)

    def __len__(self):
        return len(self.concepts)

    def __getitem__(self, concept_id: int) -> Concept:
        return self.concepts[concept_id]

    def ancestors(self, concept_id: int) -> list[Concept]:
        """Chain from the root down to (and including) ``concept_id``."""
        chain = []
        cid: int | None = concept_id
        while cid is not None:
            c = self.concepts[cid]
            chain.append(c)
            cid = c.parent
        chain.reverse()
        return chain

    def to_lines(self) -> list[str]:
        lines = []
        for cid in sorted(self.concepts):
            c = self.concepts[cid]
            parent = "-" if c.parent is None else str(c.parent)
            lines.append(f"{cid}\t{parent}\t{c.name}\t{','.join(sorted(c.synonyms))}")
        return lines


@dataclass
class DocVector:
    doc_id: int | str | None
    entries: list[tuple[str, float]]
    # concept_id -> matched occurrences, after abstraction
    concepts: dict[int, int] = field(default_factory=dict)

    def as_dict(self) -> dict[str, float]:
        return dict(self.entries)


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def parse_ontology(lines: Iterable[str], source: str = "<ontology>") -> DomainOntology:
    raw: dict[int, tuple[int | None, str, set[str], int]] = {}
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) not in (3, 4):
            raise OntologyError(f"expected 3 or 4 tab-separated fields, got {len(fields)}", lineno, source)
        try:
            cid = int(fields[0])
            parent = None if fields[1].strip() == "-" else int(fields[1])
        except ValueError:
            raise OntologyError("concept and parent ids must be integers (or '-' for no parent)", lineno, source) from None
        if cid in raw:
            raise OntologyError(f"duplicate concept id {cid}", lineno, source)
        name = fields[2].strip()
        if not normalize_phrase(name):
            raise OntologyError("concept name is empty", lineno, source)
        synonyms = set()
        for phrase in [name] + (fields[3].split(",") if len(fields) == 4 else []):
            norm = normalize_phrase(phrase)
            if not norm:
                continue
            if len(norm.split()) > MAX_PHRASE_TOKENS:
                raise OntologyError(f"synonym {phrase.strip()!r} is longer than {MAX_PHRASE_TOKENS} words", lineno, source)
            synonyms.add(norm)
        raw[cid] = (parent, name, synonyms, lineno)

    for cid, (parent, _, _, lineno) in raw.items():
        if parent is not None and parent not in raw:
            raise OntologyError(f"concept {cid} refers to unknown parent {parent}", lineno, source)

    depths: dict[int, int] = {}
    for cid in raw:
        path = []
        cur: int | None = cid
        while cur is not None and cur not in depths:
            if cur in path:
                raise OntologyError(f"cycle through concept {cur}", raw[cur][3], source)
            path.append(cur)
            cur = raw[cur][0]
        base = -1 if cur is None else depths[cur]
        for offset, node in enumerate(reversed(path), 1):
            depths[node] = base + offset

    concepts = {}
    phrase_index: dict[str, set[int]] = {}
    children: dict[int, list[int]] = {cid: [] for cid in raw}
    for cid in sorted(raw):
        parent, name, synonyms, _ = raw[cid]
        concepts[cid] = Concept(cid, name, parent, depths[cid], frozenset(synonyms))
        if parent is not None:
            children[parent].append(cid)
        for phrase in synonyms:
            phrase_index.setdefault(phrase, set()).add(cid)
    return DomainOntology(concepts, phrase_index, children)


def load_ontology(path: str | Path) -> DomainOntology:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        return parse_ontology(fh, source=str(path))


# ---------------------------------------------------------------------------
# Disambiguation and abstraction
# ---------------------------------------------------------------------------


def _neighborhood_stems(concept_id: int, phrase: str, ontology: DomainOntology) -> set[str]:
    c = ontology[concept_id]
    related = [c]
    if c.parent is not None:
        related.append(ontology[c.parent])
    related.extend(ontology[ch] for ch in ontology.children.get(concept_id, ()))
    own_words = {stem(w) for w in phrase.split()}
    out = set()
    for r in related:
        for syn in r.synonyms:
            if syn != phrase:
                out.update(stem(w) for w in syn.split())
    return out - own_words


def dis(term_phrase: str, context: Iterable[str], ontology: DomainOntology) -> int | None:
    """Choose the concept a phrase denotes in the given context.

    Each candidate concept is scored by how many distinct context stems
    appear among the words of its neighborhood (its own synonyms plus
    those of its parent and children, excluding the phrase itself). The
    highest score wins; ties go to the smallest concept id.
    """
    candidates = ontology.phrase_index.get(term_phrase)
    if not candidates:
        return None
    if len(candidates) == 1:
        return next(iter(candidates))
    context = set(context)
    return min(
        candidates,
        key=lambda cid: (-len(_neighborhood_stems(cid, term_phrase, ontology) & context), cid),
    )


def abstract_to_level(concept_id: int, k: int, ontology: DomainOntology) -> int:
    """Replace a concept deeper than ``k`` by its ancestor at depth ``k``."""
    if k < 0:
        raise ValueError("abstraction level must be >= 0")
    c = ontology[concept_id]
    while c.depth > k:
        c = ontology[c.parent]
    return c.concept_id


# ---------------------------------------------------------------------------
# Phrase extraction
# ---------------------------------------------------------------------------


def extract_phrases(
    tokens: Sequence[Token],
    ontology: DomainOntology,
    k: int | None = None,
    *,
    stoplist: Iterable[str] = (),
    doc_id=None,
) -> DocVector:
    """Scan ``tokens`` for ontology phrases and build a term/weight vector.

    Matching is greedy longest-match, left to right, over lowercase surface
    forms; a matched span is consumed. Each match becomes the (abstracted)
    concept's term, every other token contributes its stem. Unmatched tokens
    whose stem is in ``stoplist`` are dropped. ``k=None`` keeps concepts at
    their own depth. Weights are plain occurrence counts.
    """
    stoplist = set(stoplist)
    context = {t.stem for t in tokens if t.stem not in stoplist}
    counts: Counter[str] = Counter()
    concept_counts: Counter[int] = Counter()
    surfaces = [t.surface for t in tokens]
    i = 0
    while i < len(tokens):
        match = None
        for width in range(min(MAX_PHRASE_TOKENS, len(tokens) - i), 0, -1):
            phrase = " ".join(surfaces[i : i + width])
            if phrase in ontology.phrase_index:
                match = (phrase, width)
                break
        if match is None:
            if tokens[i].stem not in stoplist:
                counts[tokens[i].stem] += 1
            i += 1
            continue
        phrase, width = match
        cid = dis(phrase, context, ontology)
        if k is not None:
            cid = abstract_to_level(cid, k, ontology)
        concept_counts[cid] += 1
        counts[ontology[cid].term] += 1
        i += width
    entries = sorted((term, float(n)) for term, n in counts.items())
    return DocVector(doc_id, entries, dict(sorted(concept_counts.items())))


def export_instances_xml(doc_vectors: Sequence[DocVector], ontology: DomainOntology) -> str:
    """One ``<instance>`` per matched concept occurrence, with its ancestor chain."""
    root = ET.Element("instances")
    for vec in sorted(doc_vectors, key=lambda v: _doc_sort_key(v.doc_id)):
        for cid, n in sorted(vec.concepts.items()):
            c = ontology[cid]
            for occurrence in range(n):
                inst = ET.SubElement(
                    root,
                    "instance",
                    {
                        "doc": str(vec.doc_id),
                        "concept": c.name,
                        "concept_id": str(cid),
                        "depth": str(c.depth),
                        "occurrence": str(occurrence),
                    },
                )
                for anc in ontology.ancestors(cid)[:-1]:
                    ET.SubElement(inst, "ancestor", {"concept": anc.name, "concept_id": str(anc.concept_id), "depth": str(anc.depth)})
    ET.indent(root)
    return ET.tostring(root, encoding="unicode", xml_declaration=True) + "\n"


def _doc_sort_key(doc_id):
    # ints before strings, each in natural order
    return (0, doc_id, "") if isinstance(doc_id, int) else (1, 0, str(doc_id))
