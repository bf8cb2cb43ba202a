"""Command-line interface: ``ontoir {index,search,pivot-fit,extract,tree2owl}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .index import InvertedIndex, read_corpus
from .normalization import DEFAULT_BINS, DEFAULT_SLOPE, PivotParams
from .ontology import export_instances_xml, load_ontology
from .pipeline import Pipeline
from .search import DEFAULT_TOP_R, Query, Searcher, fit_pivot
from .textprep import DEFAULT_STOPWORDS, load_stopwords
from .tree2owl import load_tree, serialize_owl, tree_to_owl
from .weighting import WeightingScheme

log = logging.getLogger("ontoir")

DEFAULTS = {
    "tf": "raw",
    "idf": "on",
    "norm": "cosine",
    "slope": DEFAULT_SLOPE,
    "pivot": None,  # mean cosine length of the indexed corpus
    "bins": DEFAULT_BINS,
    "top": DEFAULT_TOP_R,
    "abstraction_level": None,  # keep concepts at their own depth
    "stopwords": None,  # built-in English list
    "jobs": 1,
}


class CliError(Exception):
    pass


# -- argument types ---------------------------------------------------------


def _slope(text):
    v = float(text)
    if not (0.0 < v <= 1.0):
        raise argparse.ArgumentTypeError(f"slope must be in (0, 1], got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0.0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _int_at_least(lo):
    def parse(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {v}")
        return v

    return parse


# -- file helpers -------------------------------------------------------------


def atomic_write(path: str | Path, text: str):
    """Write through a temp file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, output: str | None):
    if output:
        atomic_write(output, text)
    else:
        sys.stdout.write(text)


def read_queries(path) -> list[tuple[str, str]]:
    queries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise CliError(f"{path}:{lineno}: expected 'query_id<TAB>text'")
            qid, text = line.split("\t", 1)
            queries.append((qid.strip(), text))
    return queries


def read_judgments(path, index: InvertedIndex) -> dict[str, dict[int, int]]:
    """Parse ``query_id TAB doc TAB 0|1``; ``doc`` is the document's source name."""
    by_name = {d.source_name: d.doc_id for d in index.documents}
    judgments: dict[str, dict[int, int]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            fields = line.rstrip("\r\n").split("\t")
            if len(fields) != 3 or fields[2].strip() not in ("0", "1"):
                raise CliError(f"{path}:{lineno}: expected 'query_id<TAB>doc_id<TAB>0|1'")
            qid, doc, label = (f.strip() for f in fields)
            if doc not in by_name:
                log.warning("%s:%d: unknown document %r ignored", path, lineno, doc)
                continue
            judgments.setdefault(qid, {})[by_name[doc]] = int(label)
    return judgments


def _scheme(args) -> WeightingScheme:
    return WeightingScheme.from_tokens(args.tf, args.idf)


def _stoplist(args):
    return DEFAULT_STOPWORDS if args.stopwords is None else load_stopwords(args.stopwords)


def _load_index(path) -> InvertedIndex:
    return InvertedIndex.load(path)


def _queries(index: InvertedIndex, path) -> list[Query]:
    pipeline = Pipeline.from_meta(index.meta.get("pipeline"))
    return [Query(qid, pipeline.doc_vector(text, doc_id=qid)) for qid, text in read_queries(path)]


# -- commands -----------------------------------------------------------------


def cmd_index(args) -> int:
    ontology = load_ontology(args.ontology) if args.ontology else None
    pipeline = Pipeline(_stoplist(args), ontology, args.abstraction_level)
    docs = read_corpus(args.corpus)
    if not docs:
        raise CliError(f"no documents in {args.corpus}")
    index = InvertedIndex(meta={"pipeline": pipeline.to_meta()})
    for name, text in docs:
        index.add_counts(pipeline.term_counts(text), name)
    index.freeze()
    atomic_write(args.output, index.to_json())

    scheme = _scheme(args)
    searcher = Searcher(index, scheme)
    print(f"documents\t{index.N}")
    print(f"vocabulary\t{len(index.term_space())}")
    print(f"mean_cosine_length\t{searcher.mean_length:.6f}\t({scheme})")
    return 0


def _pivot_searcher(args, index: InvertedIndex, queries: list[Query]) -> Searcher:
    scheme = _scheme(args)
    if args.norm == "cosine":
        return Searcher(index, scheme, "cosine")
    pivot = args.pivot
    if args.pivot_from_judgments:
        judgments = read_judgments(args.pivot_from_judgments, index)
        estimate, _ = fit_pivot(Searcher(index, scheme, "cosine"), queries, judgments, args.bins, args.top)
        pivot = estimate.pivot
        note = " (fallback: curves do not cross)" if estimate.fallback else ""
        print(f"# pivot fitted from judgments: {pivot:.6f}, R={args.top}, bins={args.bins}{note}", file=sys.stderr)
    base = Searcher(index, scheme, "cosine")
    params = PivotParams(args.slope, pivot if pivot is not None else base.mean_length)
    return Searcher(index, scheme, "pivoted", params)


def cmd_search(args) -> int:
    index = _load_index(args.index)
    queries = _queries(index, args.queries)
    searcher = _pivot_searcher(args, index, queries)

    def run(q):
        return searcher.rank(q, args.top)

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        results = list(pool.map(run, queries))

    lines = []
    for ranked in results:
        for r, (doc_id, s) in enumerate(ranked.hits, 1):
            lines.append(f"{ranked.query_id}\t{r}\t{index.documents[doc_id].source_name}\t{s:.6f}\n")
    _emit("".join(lines), args.output)
    return 0


def cmd_pivot_fit(args) -> int:
    index = _load_index(args.index)
    queries = _queries(index, args.queries)
    judgments = read_judgments(args.judgments, index)
    if not any(judgments.get(q.query_id) for q in queries):
        raise CliError("insufficient judgments: no query in the query file has judgments")
    searcher = Searcher(index, _scheme(args), "cosine")
    estimate, curves = fit_pivot(searcher, queries, judgments, args.bins, args.top)

    report = {
        "pivot": estimate.pivot,
        "slope": args.slope,
        "fallback": estimate.fallback,
        "top_r": curves.top_r,
        "bins": args.bins,
        "queries": curves.n_queries,
        "scheme": str(searcher.scheme),
        "mean_norm": curves.mean_norm,
        "curves": [
            {"mean_norm": b.mean_norm, "size": b.size, "p_relevance": b.p_relevance, "p_retrieval": b.p_retrieval}
            for b in curves.bins
        ],
    }
    print(f"pivot\t{estimate.pivot:.9f}")
    print(f"slope\t{args.slope}")
    print(f"fallback\t{'yes' if estimate.fallback else 'no'}")
    print(f"top_r\t{curves.top_r}")
    print("bin\tmean_norm\tsize\tp_relevance\tp_retrieval")
    for i, b in enumerate(curves.bins):
        print(f"{i}\t{b.mean_norm:.6f}\t{b.size}\t{b.p_relevance:.6f}\t{b.p_retrieval:.6f}")
    if args.output:
        atomic_write(args.output, json.dumps(report, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_extract(args) -> int:
    ontology = load_ontology(args.ontology)
    pipeline = Pipeline(_stoplist(args), ontology, args.abstraction_level)
    docs = read_corpus(args.corpus)
    if not docs:
        raise CliError(f"no documents in {args.corpus}")
    vectors = [pipeline.doc_vector(text, doc_id=name) for name, text in docs]
    lines = [f"{v.doc_id}\t{term}\t{w:g}\n" for v in vectors for term, w in v.entries]
    xml = export_instances_xml(vectors, ontology)

    instances = args.instances
    if instances is None and args.output:
        instances = str(Path(args.output).with_suffix(".instances.xml"))
    # write the XML first so a failure leaves neither file behind
    if instances:
        atomic_write(instances, xml)
    _emit("".join(lines), args.output)
    return 0


def cmd_tree2owl(args) -> int:
    doc = tree_to_owl(load_tree(args.tree))
    _emit(serialize_owl(doc), args.output)
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--show-config", action="store_true", help="print the resolved configuration and exit")
    common.add_argument("-o", "--output", help="output file (default: stdout)")

    scheme = argparse.ArgumentParser(add_help=False)
    scheme.add_argument("--tf", choices=["raw", "maxnorm", "log"], default=DEFAULTS["tf"])
    scheme.add_argument("--idf", choices=["on", "off"], default=DEFAULTS["idf"])

    pivot = argparse.ArgumentParser(add_help=False)
    pivot.add_argument("--slope", type=_slope, default=DEFAULTS["slope"])
    pivot.add_argument("--bins", type=_int_at_least(2), default=DEFAULTS["bins"])
    pivot.add_argument("--top", type=_int_at_least(1), default=DEFAULTS["top"], help="rank cutoff R")

    analysis = argparse.ArgumentParser(add_help=False)
    analysis.add_argument("--stopwords", default=DEFAULTS["stopwords"], help="stop-word file (one word per line)")
    analysis.add_argument("--abstraction-level", type=_int_at_least(0), default=DEFAULTS["abstraction_level"], metavar="K")

    parser = argparse.ArgumentParser(prog="ontoir", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--show-config", action="store_true", help="print default settings and exit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("index", parents=[common, scheme, analysis], help="build an index snapshot")
    p.add_argument("corpus", help="directory of documents or a JSON-lines file with id/text")
    p.add_argument("--ontology", help="index ontology concepts instead of plain stems")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("search", parents=[common, scheme, pivot], help="rank documents for a query file")
    p.add_argument("index")
    p.add_argument("queries")
    p.add_argument("--norm", choices=["cosine", "pivoted"], default=DEFAULTS["norm"])
    p.add_argument("--pivot", type=_positive_float, default=DEFAULTS["pivot"])
    p.add_argument("--pivot-from-judgments", metavar="JUDGMENTS", help="fit the pivot from relevance judgments")
    p.add_argument("--jobs", type=_int_at_least(1), default=DEFAULTS["jobs"], help="queries evaluated concurrently")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("pivot-fit", parents=[common, scheme, pivot], help="estimate the pivot from judgments")
    p.add_argument("index")
    p.add_argument("queries")
    p.add_argument("judgments")
    p.set_defaults(func=cmd_pivot_fit)

    p = sub.add_parser("extract", parents=[common, analysis], help="ontology phrase extraction")
    p.add_argument("corpus")
    p.add_argument("--ontology", required=True)
    p.add_argument("--instances", help="instances XML output (default: <output>.instances.xml)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("tree2owl", parents=[common], help="convert a decision tree to OWL")
    p.add_argument("tree")
    p.set_defaults(func=cmd_tree2owl)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: warning: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.show_config:
        config = dict(DEFAULTS) if args.command is None else {
            k: v for k, v in vars(args).items() if k not in ("func", "show_config")
        }
        print(json.dumps(config, indent=2, sort_keys=True))
        return 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except (CliError, OSError, ValueError, RuntimeError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"ontoir: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
